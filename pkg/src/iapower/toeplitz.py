"""Symmetric positive-definite Toeplitz algebra.

Everything here works from the first row ``(g_0, ..., g_{n-1})`` of the
matrix and costs O(n^2) time.  Three independent routes are provided:

* :func:`trench_inverse` builds the full inverse (Trench's algorithm);
* :func:`levinson_solve` solves ``G x = b`` (Levinson's recursion);
* :func:`whiten` runs the Durbin-Levinson one-step predictors over the
  columns of a matrix, which gives quadratic forms, the log determinant
  and the Gaussian loglikelihood without forming ``G^{-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NotPositiveDefiniteError",
    "SymToeplitz",
    "durbin_levinson",
    "whiten",
    "trench_inverse",
    "levinson_solve",
    "log_det",
    "quad_form",
    "gaussian_loglik",
]

#: innovation variances at or below this fraction of g_0 mean "not PD"
PD_RTOL = 1e-12


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a Durbin-Levinson innovation variance collapses."""


@dataclass(frozen=True, eq=False)
class SymToeplitz:
    """Symmetric Toeplitz matrix stored by its first row."""

    first_row: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.first_row, dtype=float).ravel()
        if r.size == 0:
            raise ValueError("first_row must be non-empty")
        if not np.all(np.isfinite(r)):
            raise ValueError("first_row must be finite")
        if r[0] <= 0:
            raise NotPositiveDefiniteError(f"g_0 = {r[0]!r} must be positive")
        object.__setattr__(self, "first_row", r)

    @property
    def n(self) -> int:
        return self.first_row.size

    def dense(self) -> np.ndarray:
        from scipy.linalg import toeplitz

        return toeplitz(self.first_row)

    def __matmul__(self, x):
        return self.dense() @ x


def _as_toeplitz(m) -> SymToeplitz:
    return m if isinstance(m, SymToeplitz) else SymToeplitz(m)


def _check_variance(v: float, r0: float, k: int) -> None:
    if not v > PD_RTOL * r0:
        raise NotPositiveDefiniteError(
            f"innovation variance {v!r} at step {k} is not positive; "
            "matrix is not positive definite"
        )


def _predictors(r: np.ndarray, steady_tol: float = 0.0, window: int = 1):
    """Yield ``(a_t, v_t)`` for t = 0..n-1.

    ``a_t`` holds the coefficients of the best linear predictor of x_t from
    x_{t-1}, x_{t-2}, ... and ``v_t`` its error variance.  With
    ``steady_tol > 0`` the recursion freezes once every partial
    autocorrelation over the last ``window`` steps is below ``steady_tol``;
    the truncation error is then of that order.
    """
    n = r.size
    r0 = r[0]
    a = np.zeros(0)
    v = r0
    recent = []
    frozen = False
    yield a, v
    for k in range(n - 1):
        if not frozen:
            pk = (r[k + 1] - a @ r[k:0:-1]) / v
            a = np.concatenate([a - pk * a[::-1], [pk]])
            v = v * (1.0 - pk * pk)
            _check_variance(v, r0, k + 1)
            if steady_tol > 0:
                recent.append(abs(pk))
                if len(recent) > window:
                    recent.pop(0)
                if len(recent) == window and max(recent) < steady_tol:
                    frozen = True
        yield a, v


def durbin_levinson(m, steady_tol: float = 0.0, window: int = 1):
    """Partial autocorrelations and innovation variances.

    Returns ``(pacf, v)`` where ``pacf[k]`` is the lag-k partial
    autocorrelation (``pacf[0] = 1``) and ``v[t]`` is the variance of the
    one-step prediction error of x_t given x_0..x_{t-1}.

    Raises
    ------
    NotPositiveDefiniteError
        If some ``v[t] <= 1e-12 * g_0``.
    """
    m = _as_toeplitz(m)
    v = np.empty(m.n)
    pacf = np.zeros(m.n)
    pacf[0] = 1.0
    for t, (a, vt) in enumerate(_predictors(m.first_row, steady_tol, window)):
        v[t] = vt
        if t and a.size == t:
            pacf[t] = a[-1]
    return pacf, v


def whiten(m, X, steady_tol: float = 0.0, window: int = 1):
    """Apply the prediction-error filter to the columns of ``X``.

    Returns ``(E, v)`` with ``E = L X`` where ``L`` is the unit lower
    triangular matrix of the innovations representation, so that
    ``G^{-1} = L' diag(1/v) L``.  ``X`` may be a vector or an (n, k) array.
    """
    m = _as_toeplitz(m)
    X = np.asarray(X, dtype=float)
    vec = X.ndim == 1
    X2 = X[:, None] if vec else X
    if X2.shape[0] != m.n:
        raise ValueError(f"X has {X2.shape[0]} rows, matrix is {m.n}x{m.n}")
    E = np.empty_like(X2)
    v = np.empty(m.n)
    for t, (a, vt) in enumerate(_predictors(m.first_row, steady_tol, window)):
        v[t] = vt
        L = a.size
        # a[j] multiplies x_{t-1-j}
        E[t] = X2[t] - a @ X2[t - L : t][::-1] if L else X2[t]
    return (E[:, 0] if vec else E), v


def quad_form(m, X, Y=None, **kw) -> np.ndarray:
    """``X' G^{-1} Y`` (``Y`` defaults to ``X``) via :func:`whiten`."""
    X = np.asarray(X, dtype=float)
    if Y is None:
        E, v = whiten(m, X, **kw)
        W = E / (np.sqrt(v)[:, None] if E.ndim == 2 else np.sqrt(v))
        return W.T @ W
    XY = np.column_stack([X, Y])
    E, v = whiten(m, XY, **kw)
    W = E / np.sqrt(v)[:, None]
    kx = 1 if X.ndim == 1 else X.shape[1]
    out = W[:, :kx].T @ W[:, kx:]
    return out


def trench_inverse(m) -> np.ndarray:
    """Inverse of a symmetric positive-definite Toeplitz matrix.

    Trench's algorithm: one Durbin solve of order n-1, then the inverse is
    generated from its first row by an O(n^2) recurrence, exploiting
    symmetry and persymmetry.
    """
    m = _as_toeplitz(m)
    n = m.n
    r0 = m.first_row[0]
    if n == 1:
        return np.array([[1.0 / r0]])
    rho = m.first_row[1:] / r0
    # Durbin: solve T_{n-1} y = -rho
    y = _durbin_yule_walker(rho)
    gam = 1.0 / (1.0 + rho @ y)
    if not gam > 0:
        raise NotPositiveDefiniteError("Trench pivot is not positive")
    nu = gam * y[::-1]
    B = np.empty((n, n))
    B[0, 0] = gam
    B[0, 1:] = nu[::-1]
    # 1-based recurrence: B(i,j) = B(i-1,j-1) + (nu(n+1-j)nu(n+1-i) - nu(i-1)nu(j-1))/gam
    _reflect(B, 0, np.arange(n))
    for i in range(2, (n - 1) // 2 + 2):
        j = np.arange(i, n - i + 2)
        B[i - 1, j - 1] = B[i - 2, j - 2] + (
            nu[n - j] * nu[n - i] - nu[i - 2] * nu[j - 2]
        ) / gam
        _reflect(B, i - 1, j - 1)
    return B / r0


def _reflect(B: np.ndarray, i: int, j: np.ndarray) -> None:
    """Copy row-``i`` wedge entries to their symmetric and persymmetric images."""
    n = B.shape[0]
    vals = B[i, j]
    B[j, i] = vals
    B[n - 1 - j, n - 1 - i] = vals
    B[n - 1 - i, n - 1 - j] = vals


def _durbin_yule_walker(rho: np.ndarray) -> np.ndarray:
    """Solve T y = -rho, T unit-diagonal Toeplitz with first row (1, rho[:-1])."""
    n = rho.size
    y = np.array([-rho[0]])
    beta = 1.0
    alpha = -rho[0]
    for k in range(1, n):
        beta = (1.0 - alpha * alpha) * beta
        if not beta > PD_RTOL:
            raise NotPositiveDefiniteError(f"Durbin pivot collapsed at step {k}")
        alpha = -(rho[k] + rho[:k][::-1] @ y) / beta
        y = np.concatenate([y + alpha * y[::-1], [alpha]])
    return y


def levinson_solve(m, rhs) -> np.ndarray:
    """Solve ``G x = rhs`` by Levinson's recursion in O(n^2) time, O(n) memory."""
    m = _as_toeplitz(m)
    b = np.asarray(rhs, dtype=float)
    if b.shape[0] != m.n:
        raise ValueError(f"rhs has length {b.shape[0]}, matrix is {m.n}x{m.n}")
    if b.ndim == 2:
        return np.column_stack([levinson_solve(m, b[:, k]) for k in range(b.shape[1])])
    n = m.n
    r0 = m.first_row[0]
    rho = m.first_row[1:] / r0
    b = b / r0
    x = np.array([b[0]])
    if n == 1:
        return x
    y = np.array([-rho[0]])
    alpha = -rho[0]
    beta = 1.0
    for k in range(1, n):
        beta = (1.0 - alpha * alpha) * beta
        if not beta > PD_RTOL:
            raise NotPositiveDefiniteError(f"Levinson pivot collapsed at step {k}")
        mu = (b[k] - rho[:k] @ x[::-1]) / beta
        x = np.concatenate([x + mu * y[::-1], [mu]])
        if k < n - 1:
            alpha = (-rho[k] - rho[:k] @ y[::-1]) / beta
            y = np.concatenate([y + alpha * y[::-1], [alpha]])
    return x


def log_det(m, **kw) -> float:
    """log det G as the sum of log innovation variances."""
    _, v = durbin_levinson(m, **kw)
    return float(np.sum(np.log(v)))


def gaussian_loglik(m, y, sigma_a2: float, **kw) -> float:
    """Gaussian loglikelihood of ``y ~ N(0, sigma_a2 * G)``, constants dropped.

    ``-(n/2) log sigma_a2 - (1/2) log det G - y' G^{-1} y / (2 sigma_a2)``
    """
    if not sigma_a2 > 0:
        raise ValueError("sigma_a2 must be positive")
    y = np.asarray(y, dtype=float)
    m = _as_toeplitz(m)
    E, v = whiten(m, y, **kw)
    n = y.size
    return float(
        -0.5 * n * np.log(sigma_a2) - 0.5 * np.sum(np.log(v)) - np.sum(E * E / v) / (2.0 * sigma_a2)
    )
