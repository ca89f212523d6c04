"""Comparison penalties and robust losses.

Each penalty kind is a small class exposing ``value`` and, where defined,
``grad`` and ``prox``.  Capability flags say which surfaces exist:

* ``has_gradient_everywhere`` — the gradient is defined at every real input
  (WEEP, squared L2, Huber, Tukey).  L1 / MCP / capped-L2 raise
  :class:`NondifferentiableError` on their kink sets.
* ``has_closed_form_prox`` — a closed-form proximal map is provided (WEEP,
  L1, squared L2, MCP, capped L2).  Huber and Tukey are used as robust
  losses only and raise :class:`PenaltyCapabilityError` from ``prox``.

All values are even functions vanishing at the origin, gradients are odd,
and every prox map is odd and a global minimizer of
``u -> 0.5 (u - z)^2 + step * value(u)``.  Everything is vectorized over
numpy arrays; scalars in, scalars out.  Penalty objects hold only their
parameters and never mutate, so instances are safe to share across threads.
"""

from __future__ import annotations

import math

import numpy as np

from .penalty import WeepParams, derive_weep_params, weep_grad, weep_prox, weep_value

__all__ = [
    "Penalty",
    "WeepPenalty",
    "L1Penalty",
    "SquaredL2Penalty",
    "McpPenalty",
    "CappedL2Penalty",
    "HuberLoss",
    "TukeyLoss",
    "PenaltyCapabilityError",
    "NondifferentiableError",
    "make_penalty",
    "PENALTY_KINDS",
]


class PenaltyCapabilityError(TypeError):
    """The requested operation is not provided by this penalty kind."""


class NondifferentiableError(ValueError):
    """Gradient requested at a point where it does not exist."""


def _as_values(x, name: str = "x") -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr, arr.ndim == 0


def _ret(out: np.ndarray, scalar: bool):
    return float(out) if scalar else out


class Penalty:
    """Base class; subclasses fill in the kind tag and capability flags."""

    kind: str = "?"
    has_gradient_everywhere: bool = False
    has_closed_form_prox: bool = False
    #: exclusive upper bound on the prox step, or None for any positive step
    prox_step_limit: float | None = None

    def value(self, x):
        raise NotImplementedError

    def grad(self, x):
        raise NotImplementedError

    def prox(self, step: float, z):
        raise PenaltyCapabilityError(
            f"{self.kind} has no closed-form proximal operator"
        )

    def check_prox_step(self, step: float) -> float:
        """Validate a prox step against this penalty's domain; returns it."""
        if not self.has_closed_form_prox:
            raise PenaltyCapabilityError(
                f"{self.kind} has no closed-form proximal operator"
            )
        step = float(step)
        if not (math.isfinite(step) and step > 0.0):
            raise ValueError(f"prox step must be positive and finite, got {step!r}")
        if self.prox_step_limit is not None and step >= self.prox_step_limit:
            raise ValueError(
                f"prox step {step!r} must be below {self.prox_step_limit!r} "
                f"for the {self.kind} penalty"
            )
        return step

    def params(self) -> dict:
        """Kind-specific parameters, for reports and CSV headers."""
        return {}

    def __repr__(self):
        fields = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({fields})"


class WeepPenalty(Penalty):
    """Envelope penalty adapter; see :mod:`weep.penalty` for the math."""

    kind = "weep"
    has_gradient_everywhere = True
    has_closed_form_prox = True
    prox_step_limit = 1.0

    def __init__(self, params: WeepParams):
        self.p = params

    @classmethod
    def from_ab(cls, a: float, b: float) -> "WeepPenalty":
        return cls(derive_weep_params(a, b))

    def value(self, x):
        return weep_value(self.p, x)

    def grad(self, x):
        return weep_grad(self.p, x)

    def prox(self, step, z):
        self.check_prox_step(step)
        return weep_prox(self.p, step, z)

    def params(self):
        return {"a": self.p.a, "b": self.p.b}


class L1Penalty(Penalty):
    kind = "l1"
    has_closed_form_prox = True

    def value(self, x):
        arr, scalar = _as_values(x)
        return _ret(np.abs(arr), scalar)

    def grad(self, x):
        arr, scalar = _as_values(x)
        if np.any(arr == 0.0):
            raise NondifferentiableError("l1 penalty is not differentiable at 0")
        return _ret(np.sign(arr), scalar)

    def prox(self, step, z):
        step = self.check_prox_step(step)
        arr, scalar = _as_values(z, "z")
        out = np.sign(arr) * np.maximum(np.abs(arr) - step, 0.0)
        return _ret(out, scalar)


class SquaredL2Penalty(Penalty):
    kind = "l2sq"
    has_gradient_everywhere = True
    has_closed_form_prox = True

    def value(self, x):
        arr, scalar = _as_values(x)
        return _ret(arr * arr, scalar)

    def grad(self, x):
        arr, scalar = _as_values(x)
        return _ret(2.0 * arr, scalar)

    def prox(self, step, z):
        step = self.check_prox_step(step)
        arr, scalar = _as_values(z, "z")
        return _ret(arr / (1.0 + 2.0 * step), scalar)


class McpPenalty(Penalty):
    """Minimax concave penalty with weight ``lam`` and concavity span ``gamma``.

    Quadratically tapered up to ``gamma * lam``, constant beyond, so large
    inputs are left unbiased by the prox (firm threshold).  ``gamma > 1``
    keeps the unit-step prox single-valued; prox steps must stay below
    ``gamma``.
    """

    kind = "mcp"
    has_closed_form_prox = True

    def __init__(self, lam: float, gamma: float):
        if not (math.isfinite(lam) and lam > 0.0):
            raise ValueError(f"mcp lam must be positive, got {lam!r}")
        if not (math.isfinite(gamma) and gamma > 1.0):
            raise ValueError(f"mcp gamma must exceed 1, got {gamma!r}")
        self.lam = float(lam)
        self.gamma = float(gamma)
        self.prox_step_limit = self.gamma

    def value(self, x):
        arr, scalar = _as_values(x)
        ax = np.abs(arr)
        lam, gam = self.lam, self.gamma
        out = np.where(
            ax <= gam * lam,
            lam * ax - arr * arr / (2.0 * gam),
            0.5 * gam * lam * lam,
        )
        return _ret(out, scalar)

    def grad(self, x):
        arr, scalar = _as_values(x)
        if np.any(arr == 0.0):
            raise NondifferentiableError("mcp penalty is not differentiable at 0")
        out = np.sign(arr) * np.maximum(self.lam - np.abs(arr) / self.gamma, 0.0)
        return _ret(out, scalar)

    def prox(self, step, z):
        step = self.check_prox_step(step)
        arr, scalar = _as_values(z, "z")
        az = np.abs(arr)
        lam, gam = self.lam, self.gamma
        shrunk = np.sign(arr) * (az - step * lam) / (1.0 - step / gam)
        out = np.where(az <= step * lam, 0.0, np.where(az <= gam * lam, shrunk, arr))
        return _ret(out, scalar)

    def params(self):
        return {"lam": self.lam, "gamma": self.gamma}


class CappedL2Penalty(Penalty):
    """``min(a x^2, cap)``: quadratic near zero, constant past the cap.

    Not weakly convex; the prox is set-valued at the tie point between the
    shrunk and untouched candidates, and we deterministically return the
    smaller-magnitude one.
    """

    kind = "capped_l2"
    has_closed_form_prox = True

    def __init__(self, a: float, cap: float):
        if not (math.isfinite(a) and a > 0.0):
            raise ValueError(f"capped_l2 a must be positive, got {a!r}")
        if not (math.isfinite(cap) and cap > 0.0):
            raise ValueError(f"capped_l2 cap must be positive, got {cap!r}")
        self.a = float(a)
        self.cap = float(cap)

    def _kink(self) -> float:
        return math.sqrt(self.cap / self.a)

    def value(self, x):
        arr, scalar = _as_values(x)
        return _ret(np.minimum(self.a * arr * arr, self.cap), scalar)

    def grad(self, x):
        arr, scalar = _as_values(x)
        k = self._kink()
        if np.any(np.abs(arr) == k):
            raise NondifferentiableError(
                f"capped_l2 penalty is not differentiable at +/-{k!r}"
            )
        out = np.where(np.abs(arr) < k, 2.0 * self.a * arr, 0.0)
        return _ret(out, scalar)

    def prox(self, step, z):
        step = self.check_prox_step(step)
        arr, scalar = _as_values(z, "z")
        k = self._kink()
        # Candidate on the quadratic piece: shrink, clipped to the piece.
        uq = np.clip(arr / (1.0 + 2.0 * step * self.a), -k, k)
        f_in = 0.5 * (uq - arr) ** 2 + step * self.a * uq * uq
        # Candidate on the capped piece: leave z alone (or sit at the kink).
        uo = np.where(np.abs(arr) >= k, arr, k * np.sign(arr))
        f_out = 0.5 * (uo - arr) ** 2 + step * self.cap
        # Ties go to the smaller-magnitude (quadratic-piece) candidate.
        out = np.where(f_in <= f_out, uq, uo)
        return _ret(out, scalar)

    def params(self):
        return {"a": self.a, "cap": self.cap}


class HuberLoss(Penalty):
    """Quadratic core, linear tail; the classic robust compromise.

    The tail slope stays at ``delta``, so large residuals keep a nonzero
    pull on the fit.  Used here as a loss only: no prox surface.
    """

    kind = "huber"
    has_gradient_everywhere = True

    def __init__(self, delta: float = 1.345):
        if not (math.isfinite(delta) and delta > 0.0):
            raise ValueError(f"huber delta must be positive, got {delta!r}")
        self.delta = float(delta)

    def value(self, x):
        arr, scalar = _as_values(x)
        ax = np.abs(arr)
        d = self.delta
        out = np.where(ax <= d, 0.5 * arr * arr, d * (ax - 0.5 * d))
        return _ret(out, scalar)

    def grad(self, x):
        arr, scalar = _as_values(x)
        d = self.delta
        out = np.where(np.abs(arr) <= d, arr, d * np.sign(arr))
        return _ret(out, scalar)

    def params(self):
        return {"delta": self.delta}


class TukeyLoss(Penalty):
    """Tukey's biweight: redescending, constant (gradient zero) beyond ``c``.

    The vanished tail gradient is exactly what makes it fragile to optimize;
    it is included as the redescending contrast case.  Loss only: no prox.
    """

    kind = "tukey"
    has_gradient_everywhere = True

    def __init__(self, c: float = 4.685):
        if not (math.isfinite(c) and c > 0.0):
            raise ValueError(f"tukey c must be positive, got {c!r}")
        self.c = float(c)

    def value(self, x):
        arr, scalar = _as_values(x)
        c = self.c
        u2 = (arr / c) ** 2
        out = np.where(
            np.abs(arr) <= c,
            (c * c / 6.0) * (1.0 - (1.0 - u2) ** 3),
            c * c / 6.0,
        )
        return _ret(out, scalar)

    def grad(self, x):
        arr, scalar = _as_values(x)
        u2 = (arr / self.c) ** 2
        out = np.where(np.abs(arr) <= self.c, arr * (1.0 - u2) ** 2, 0.0)
        return _ret(out, scalar)

    def params(self):
        return {"c": self.c}


PENALTY_KINDS = ("weep", "l1", "l2sq", "mcp", "capped_l2", "huber", "tukey")


def make_penalty(kind: str, **params) -> Penalty:
    """Build a penalty by kind tag; used by the CLI and the experiment harness.

    Parameters per kind: weep(a, b); l1(); l2sq(); mcp(lam, gamma);
    capped_l2(a, cap); huber(delta=1.345); tukey(c=4.685).
    """
    kind = kind.lower()
    if kind == "weep":
        return WeepPenalty.from_ab(**params)
    if kind == "l1":
        return L1Penalty(**params)
    if kind == "l2sq":
        return SquaredL2Penalty(**params)
    if kind == "mcp":
        return McpPenalty(**params)
    if kind == "capped_l2":
        return CappedL2Penalty(**params)
    if kind == "huber":
        return HuberLoss(**params)
    if kind == "tukey":
        return TukeyLoss(**params)
    raise ValueError(f"unknown penalty kind {kind!r}; expected one of {PENALTY_KINDS}")
