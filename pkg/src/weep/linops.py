"""Forward-difference operators, their adjoints, and (I + rho D^T D) solves.

Differences are one-sided with one-shorter output (no padding), so D^T D is
the classic second-difference matrix with Neumann-like ends.  The 2D operator
is anisotropic: independent row-wise and column-wise forward differences.

``solve_tikhonov_diff`` inverts (I + rho D^T D): directly via a symmetric
tridiagonal (banded Cholesky) solve in 1D, and matrix-free conjugate
gradients in 2D.  The CG path also accepts 1D inputs so the two routes can
cross-check each other.  All operations are pure; CG state is local to each
call, so concurrent use on disjoint inputs is safe.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.linalg import solveh_banded

from .errors import ConvergenceError

__all__ = [
    "DiffField2D",
    "diff1d",
    "diff1d_adjoint",
    "diff2d",
    "diff2d_adjoint",
    "solve_tikhonov_diff",
]


class DiffField2D(NamedTuple):
    """Anisotropic difference field of an image: dx is rows x (cols-1),
    dy is (rows-1) x cols."""

    dx: np.ndarray
    dy: np.ndarray


def _check_1d(x, min_len: int = 2) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size < min_len:
        raise ValueError(f"expected a 1-D array of length >= {min_len}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("array entries must be finite")
    return arr


def _check_2d(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] < 2:
        raise ValueError(f"expected a 2-D array with both dims >= 2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("array entries must be finite")
    return arr


def diff1d(x) -> np.ndarray:
    """Forward differences: out[i] = x[i+1] - x[i], length n-1."""
    arr = _check_1d(x)
    return arr[1:] - arr[:-1]


def diff1d_adjoint(v, n: int) -> np.ndarray:
    """Adjoint of :func:`diff1d`: satisfies <diff1d(x), v> = <x, out> for all x."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size != n - 1:
        raise ValueError(f"expected length {n - 1} for n={n}, got shape {v.shape}")
    out = np.zeros(n)
    out[:-1] -= v
    out[1:] += v
    return out


def diff2d(img) -> DiffField2D:
    """Row-wise and column-wise forward differences of a 2-D array."""
    arr = _check_2d(img)
    return DiffField2D(dx=arr[:, 1:] - arr[:, :-1], dy=arr[1:, :] - arr[:-1, :])


def diff2d_adjoint(field: DiffField2D) -> np.ndarray:
    """Adjoint of :func:`diff2d` for a consistently shaped difference field."""
    dx = np.asarray(field.dx, dtype=float)
    dy = np.asarray(field.dy, dtype=float)
    rows, cols = dy.shape[0] + 1, dx.shape[1] + 1
    if dx.shape != (rows, cols - 1) or dy.shape != (rows - 1, cols):
        raise ValueError(f"inconsistent field shapes dx={dx.shape}, dy={dy.shape}")
    out = np.zeros((rows, cols))
    out[:, :-1] -= dx
    out[:, 1:] += dx
    out[:-1, :] -= dy
    out[1:, :] += dy
    return out


def _gram_apply(x: np.ndarray, rho: float) -> np.ndarray:
    """(I + rho D^T D) x for 1D or 2D x."""
    if x.ndim == 1:
        return x + rho * diff1d_adjoint(diff1d(x), x.size)
    return x + rho * diff2d_adjoint(diff2d(x))


def _solve_tridiag(y: np.ndarray, rho: float) -> np.ndarray:
    """Direct banded-Cholesky solve of (I + rho D^T D) x = y in 1D."""
    n = y.size
    ab = np.empty((2, n))
    ab[0, 0] = 0.0
    ab[0, 1:] = -rho
    ab[1, :] = 1.0 + 2.0 * rho
    ab[1, 0] = 1.0 + rho
    ab[1, -1] = 1.0 + rho
    return solveh_banded(ab, y, lower=False)


def _solve_cg(y: np.ndarray, rho: float, tol: float, max_iter: int,
              x0: np.ndarray | None = None) -> np.ndarray:
    """Matrix-free CG on (I + rho D^T D) x = y; relative residual <= tol."""
    b_norm = float(np.linalg.norm(y))
    if b_norm == 0.0:
        return np.zeros_like(y)
    x = np.zeros_like(y) if x0 is None else np.array(x0, dtype=float, copy=True)
    r = y - _gram_apply(x, rho)
    p = r.copy()
    rs = float(np.vdot(r, r))
    for _ in range(max_iter):
        if np.sqrt(rs) <= tol * b_norm:
            return x
        ap = _gram_apply(p, rho)
        alpha = rs / float(np.vdot(p, ap))
        x += alpha * p
        r -= alpha * ap
        rs_new = float(np.vdot(r, r))
        p = r + (rs_new / rs) * p
        rs = rs_new
    if np.sqrt(rs) <= tol * b_norm:
        return x
    raise ConvergenceError(
        f"conjugate gradient did not reach relative residual {tol:g} "
        f"within {max_iter} iterations"
    )


def solve_tikhonov_diff(y, rho: float, method: str = "auto", tol: float = 1e-10,
                        max_iter: int | None = None, x0=None) -> np.ndarray:
    """Solve (I + rho D^T D) x = y, the minimizer of
    0.5 ||x - y||^2 + (rho/2) ||D x||^2.

    Parameters
    ----------
    y : 1-D or 2-D array.
    rho : positive coupling weight.
    method : "auto" (tridiag for 1D, cg for 2D), "tridiag" (1D only), or "cg".
    tol : CG relative-residual tolerance.
    max_iter : CG iteration cap; defaults to 10 * y.size.
    x0 : optional CG warm start.
    """
    if not (np.isfinite(rho) and rho > 0.0):
        raise ValueError(f"rho must be positive, got {rho!r}")
    arr = _check_1d(y) if np.asarray(y).ndim == 1 else _check_2d(y)
    if method == "auto":
        method = "tridiag" if arr.ndim == 1 else "cg"
    if method == "tridiag":
        if arr.ndim != 1:
            raise ValueError("tridiag path handles 1-D input only")
        return _solve_tridiag(arr, rho)
    if method == "cg":
        cap = max_iter if max_iter is not None else 10 * arr.size
        return _solve_cg(arr, rho, tol=tol, max_iter=cap,
                         x0=None if x0 is None else np.asarray(x0, dtype=float))
    raise ValueError(f"unknown method {method!r}; expected auto, tridiag, or cg")
