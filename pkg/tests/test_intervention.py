import numpy as np
import pytest

from iapower.intervention import (
    InterventionSpec,
    Kind,
    StudyDesign,
    consistency_check,
    difference,
    regressor_matrix,
    series,
)


@pytest.mark.parametrize(
    "kind, want",
    [("step", [0, 0, 1, 1, 1]), ("pulse", [0, 0, 1, 0, 0]), ("ramp", [0, 0, 1, 2, 3])],
)
def test_series(kind, want):
    np.testing.assert_array_equal(series(kind, 3, 5), want)


def test_series_onset_out_of_range():
    with pytest.raises(ValueError):
        series("step", 6, 5)


def test_difference_step_is_pulse():
    np.testing.assert_array_equal(difference(series("step", 3, 5), 1), series("pulse", 3, 5))


def test_difference_ramp_is_step():
    np.testing.assert_array_equal(difference(series("ramp", 3, 5), 1), series("step", 3, 5))


def test_difference_identity_and_presample():
    x = np.array([2.0, 5.0, 4.0])
    np.testing.assert_array_equal(difference(x, 0), x)
    # values before t=1 are zero
    np.testing.assert_array_equal(difference(x, 1), [2.0, 3.0, -1.0])
    np.testing.assert_array_equal(difference(x, 2), [2.0, 1.0, -4.0])


def test_regressor_matrix_mean_unknown():
    J = regressor_matrix(InterventionSpec(Kind.STEP), StudyDesign(4, 3))
    np.testing.assert_array_equal(J, [[1, 0], [1, 0], [1, 1], [1, 1]])


def test_regressor_matrix_mean_known():
    J = regressor_matrix(InterventionSpec(Kind.STEP), StudyDesign(4, 3, mean_known=True))
    np.testing.assert_array_equal(J, [[0], [0], [1], [1]])


def test_regressor_matrix_delay():
    J = regressor_matrix(InterventionSpec("step"), StudyDesign(5, 3, b=1))
    np.testing.assert_array_equal(J[:, 1], [0, 0, 0, 1, 1])


def test_regressor_matrix_differenced_keeps_ones():
    J = regressor_matrix("step", StudyDesign(6, 4), d=1, drop_presample=True)
    assert J.shape == (5, 2)
    np.testing.assert_array_equal(J[:, 0], 1)
    np.testing.assert_array_equal(J[:, 1], [0, 0, 1, 0, 0])


def test_intervention_onset_conflict():
    with pytest.raises(ValueError):
        regressor_matrix(InterventionSpec("step", T=5), StudyDesign(10, 4))


def test_consistency_step():
    c = consistency_check("step", StudyDesign(50, 25))
    assert c.c == pytest.approx(0.52)
    assert c.satisfied


def test_consistency_ima_step():
    c = consistency_check("step", StudyDesign(50, 25), d=1)
    assert c.c == 0 and not c.satisfied


def test_consistency_pulse():
    c = consistency_check("pulse", StudyDesign(50, 25))
    assert c.c == 0 and not c.satisfied


def test_consistency_ramp_mean_known():
    assert consistency_check("ramp", StudyDesign(50, 25, mean_known=True)).satisfied


def test_design_validation():
    with pytest.raises(ValueError):
        StudyDesign(10, 0)
    with pytest.raises(ValueError):
        StudyDesign(10, 3, alpha=1.5)
    with pytest.raises(ValueError):
        InterventionSpec("step", omega=1.0, delta=1.0)
    assert StudyDesign(10, 3, b=2).onset == 5


def test_consistency_ramp_mean_unknown():
    assert consistency_check("ramp", StudyDesign(50, 25)).satisfied


def test_consistency_collinear_step():
    c = consistency_check("step", StudyDesign(50, 1))
    assert c.c == 1 and not c.satisfied
    assert consistency_check("step", StudyDesign(50, 1, mean_known=True)).satisfied
