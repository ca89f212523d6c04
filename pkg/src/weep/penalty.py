"""Closed-form construction and evaluation of the WEEP sparsity penalty.

The penalty is built in two stages.  The base penalty ``h`` is a capped
quadratic with a linear tail,

    h(x) = (a/2) x^2         for |x| <= sqrt(2/a)
         = b |x| + c         for |x| >  sqrt(2/a),

where ``a > 0`` sets the curvature at the origin, ``b >= 0`` the tail slope,
and ``c = 1 - b sqrt(2/a)`` keeps ``h`` continuous.  The WEEP penalty is the
1-weakly-convex envelope of ``h``: the tightest function below ``h`` whose sum
with ``x^2/2`` is convex.  Geometrically this amounts to drawing the common
tangent line to the two parabolic segments of ``k(x) = h(x) + x^2/2`` and
replacing the non-convex kink by that tangent, which yields a three-branch
piecewise form

    weep(x) = (a/2) x^2              for |x| <= x1
            = m |x| + d - x^2/2      for x1 < |x| <= x2
            = b |x| + c              for |x| > x2.

The tangent slope ``m`` solves a quadratic whose positive root keeps
``x1 <= x2``.  The result is differentiable everywhere, has a
``max(1, a)``-Lipschitz gradient, and admits a closed-form proximal operator,
so it works with plain gradient descent / L-BFGS as well as with splitting
methods such as ADMM.

All evaluation routines are vectorized: they accept scalars or numpy arrays
and return results of matching shape (Python floats for scalar input).
Everything here is a pure function of immutable (frozen) parameter records,
so params and functions can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BasePenaltyParams",
    "WeepParams",
    "derive_weep_params",
    "base_value",
    "weep_value",
    "weep_grad",
    "weep_prox",
]


def _check_domain(a: float, b: float) -> None:
    """Reject (a, b) outside the envelope construction's domain."""
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError(f"penalty parameters must be finite, got a={a!r}, b={b!r}")
    if a <= 0.0:
        raise ValueError(f"curvature a must be positive, got {a!r}")
    if b < 0.0:
        raise ValueError(f"tail slope b must be nonnegative, got {b!r}")
    if b > math.sqrt(2.0 * a):
        # Beyond b = sqrt(2a) the tail is steeper than the inner tangency
        # slope and the common-tangent construction breaks down.
        raise ValueError(
            f"tail slope b={b!r} exceeds sqrt(2a)={math.sqrt(2.0 * a)!r}; "
            "the envelope construction requires 0 <= b <= sqrt(2a)"
        )


def _as_values(x, name: str = "x") -> tuple[np.ndarray, bool]:
    """Validate finiteness and return (array, was_scalar)."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr, arr.ndim == 0


def _ret(out: np.ndarray, scalar: bool):
    return float(out) if scalar else out


@dataclass(frozen=True)
class BasePenaltyParams:
    """Parameters of the capped-quadratic-plus-linear base penalty.

    ``c`` is determined by (a, b); use :meth:`from_ab` rather than filling it
    in by hand.
    """

    a: float
    b: float
    c: float

    @classmethod
    def from_ab(cls, a: float, b: float) -> "BasePenaltyParams":
        _check_domain(a, b)
        return cls(a=float(a), b=float(b), c=1.0 - b * math.sqrt(2.0 / a))


@dataclass(frozen=True)
class WeepParams:
    """Validated (a, b) plus the derived envelope constants.

    Attributes
    ----------
    a, b, c : float
        Base-penalty parameters (c = 1 - b*sqrt(2/a)).
    m : float
        Slope of the common tangent between the two parabolic segments of
        h(x) + x^2/2 (positive root of the tangency quadratic).
    d : float
        Intercept term of the tangent branch, d = -(m - b)^2 / 2 + c.
    x1, x2 : float
        Breakpoints of the three-branch form, x1 = m / (a + 1) and
        x2 = m - b.  They coincide exactly when b = sqrt(2a), in which case
        the tangent branch is empty and the envelope equals the base penalty.
    """

    a: float
    b: float
    c: float
    m: float
    d: float
    x1: float
    x2: float


def derive_weep_params(a: float, b: float) -> WeepParams:
    """Construct the envelope constants for curvature ``a`` and tail slope ``b``.

    The tangent slope solves ``a m^2 - 2 b (a+1) m + (b^2 - 2c)(a+1) = 0``;
    the positive root ``m = (b (a+1) + sqrt(a+1) |b - sqrt(2a)|) / a`` is the
    one with ``m > 0`` and ``x1 <= x2``.

    Raises
    ------
    ValueError
        If ``a <= 0``, ``b < 0``, ``b > sqrt(2a)``, or either input is
        non-finite.
    """
    a = float(a)
    b = float(b)
    _check_domain(a, b)
    c = 1.0 - b * math.sqrt(2.0 / a)
    m = (b * (a + 1.0) + math.sqrt(a + 1.0) * abs(b - math.sqrt(2.0 * a))) / a
    x1 = m / (a + 1.0)
    x2 = m - b
    d = -0.5 * (m - b) ** 2 + c
    return WeepParams(a=a, b=b, c=c, m=m, d=d, x1=x1, x2=x2)


def base_value(p, x):
    """Evaluate the base penalty ``h`` (capped quadratic with linear tail).

    ``p`` may be a :class:`BasePenaltyParams` or a :class:`WeepParams`; only
    the ``a``, ``b``, ``c`` fields are used.
    """
    arr, scalar = _as_values(x)
    ax = np.abs(arr)
    cap = math.sqrt(2.0 / p.a)
    out = np.where(ax <= cap, 0.5 * p.a * arr * arr, p.b * ax + p.c)
    return _ret(out, scalar)


def weep_value(p: WeepParams, x):
    """Evaluate the envelope penalty.

    Even in ``x``, zero exactly at the origin, and bounded above by
    :func:`base_value` with equality outside the open interval (x1, x2).
    Breakpoints belong to the lower branch; values agree across branches so
    the assignment is unobservable.
    """
    arr, scalar = _as_values(x)
    ax = np.abs(arr)
    inner = 0.5 * p.a * arr * arr
    middle = p.m * ax + p.d - 0.5 * arr * arr
    outer = p.b * ax + p.c
    out = np.where(ax <= p.x1, inner, np.where(ax <= p.x2, middle, outer))
    return _ret(out, scalar)


def weep_grad(p: WeepParams, x):
    """Gradient of :func:`weep_value`; odd, bounded by ``m``, Lipschitz with
    constant ``max(1, a)``.

    For ``b > 0`` the magnitude stays at ``b`` for all ``|x| > x2``, so the
    gradient never vanishes on the tail.
    """
    arr, scalar = _as_values(x)
    ax = np.abs(arr)
    sgn = np.sign(arr)
    out = np.where(
        ax <= p.x1,
        p.a * arr,
        np.where(ax <= p.x2, p.m * sgn - arr, p.b * sgn),
    )
    return _ret(out, scalar)


def weep_prox(p: WeepParams, step: float, z):
    """Proximal operator ``argmin_u 0.5 (u - z)^2 + step * weep_value(u)``.

    The penalty is 1-weakly convex, so the prox objective is strongly convex
    (hence single-valued) only for ``step < 1``; steps outside (0, 1) are
    rejected.  Callers that scale a regularization weight into the step (for
    instance ADMM with ``step = lambda / rho``) must keep the ratio below 1.

    The map is odd, sign-preserving, and shrinks toward zero; for
    ``|z|`` beyond the outer threshold it subtracts exactly ``step * b``
    from the magnitude (no shrinkage at all when ``b = 0``).
    """
    step = float(step)
    if not (math.isfinite(step) and 0.0 < step < 1.0):
        raise ValueError(f"prox step must lie in (0, 1), got {step!r}")
    arr, scalar = _as_values(z, "z")
    z1 = (1.0 + step * p.a) * p.x1
    z2 = (1.0 - step) * p.x2 + step * p.m
    az = np.abs(arr)
    sgn = np.sign(arr)
    inner = arr / (1.0 + step * p.a)
    middle = (arr - step * p.m * sgn) / (1.0 - step)
    outer = arr - step * p.b * sgn
    out = np.where(az <= z1, inner, np.where(az <= z2, middle, outer))
    return _ret(out, scalar)
