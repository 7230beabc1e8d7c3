import csv
import io
import json

import numpy as np
import pytest

from iapower.reproduce import TABLES, reproduce, years_needed


@pytest.fixture(scope="module")
def reps():
    return {k: reproduce(k) for k in TABLES}


def test_all_build(reps):
    for k, rep in reps.items():
        assert rep.table_id == k
        assert rep.cells
        assert np.all(np.isfinite([c.ours for c in rep.cells]))


@pytest.mark.parametrize("table", ["t3", "t5", "t6", "t7", "fig1"])
def test_fully_matched(reps, table):
    assert reps[table].all_ok


def test_t4_short_horizon(reps):
    # the m=5 columns of both models match the printed values
    for key in ("arma:m=5:", "ima:m=5:"):
        cells = reps["t4"].select(key)
        assert len(cells) == 6 and all(c.ok for c in cells)


def test_t8_phi_half(reps):
    cells = [c for c in reps["t8"].cells if not c.label.startswith("phi=0.9")]
    assert len(cells) == 18 and all(c.ok for c in cells)


def test_t6_shape(reps):
    vals = {phi: [c.ours for c in reps["t6"].select(f"phi={phi}")] for phi in (0.6, 0.8)}
    for phi, v in vals.items():
        assert all(x < 0 for x in v)
        assert np.all(np.diff(v) > 0)  # shrinking in magnitude with more years
    assert all(abs(a) < abs(b) for a, b in zip(vals[0.6], vals[0.8]))


def test_years_needed_monotone():
    # a bigger trend needs fewer years; more autocorrelation needs more
    assert years_needed(0.3, 0.012) < years_needed(0.3, 0.008)
    assert years_needed(0.2, 0.01) < years_needed(0.6, 0.01)


def test_fig3_dominance(reps):
    rep = reps["fig3"]
    for c in rep.cells:
        if c.label.endswith(":sia"):
            q = next(x for x in rep.cells if x.label == c.label[:-3] + "q")
            assert c.ours > q.ours


def test_formats(reps):
    rep = reps["t7"]
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    assert len(rows) == 5 and set(rows[0]) >= {"cell", "ours", "published", "status"}
    obj = json.loads(rep.to_json())
    assert obj["n_ok"] == 5 and obj["table"] == "t7"
    assert "matched 5/5" in rep.to_text()


def test_unknown():
    with pytest.raises(ValueError):
        reproduce("t2")
