"""Optimization routes for the TV-denoising objective and generic smooth problems.

The denoising objective is

    min_x  0.5 ||y - x||^2 + lam * sum_i phi((D x)_i)

with D the forward-difference operator (1D or 2D anisotropic).  Three routes:

* :func:`denoise_admm` — operator splitting z = D x; x-update is an
  (I + rho D^T D) solve, z-update a prox with step lam/rho, plus the scaled
  dual update.  Works for any penalty with a closed-form prox.
* :func:`minimize_lbfgs` — limited-memory BFGS (two-loop recursion, strong
  Wolfe line search) for fully differentiable objectives; used with
  :func:`weep_tv_objective_and_grad` and by the robust-regression fits.
* :func:`denoise_l2_closed_form` — the quadratic special case, a single
  linear solve.

:func:`denoise_prox_gradient` adds a plain forward-backward iteration in
identity-operator mode (penalty applied to x itself), mostly to exercise
prox stepping against the L-smooth fidelity term.

Solvers are nonconvex-aware: they return stationary points, and traces
record the objective per iteration without asserting global monotonicity.
Each solver call owns its state and returns a fresh trace; calls on disjoint
inputs may run concurrently.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .baselines import Penalty, PenaltyCapabilityError
from .errors import SolverError
from .linops import (
    DiffField2D,
    diff1d,
    diff1d_adjoint,
    diff2d,
    diff2d_adjoint,
    solve_tikhonov_diff,
)
from .metrics import psnr as psnr_metric
from .penalty import WeepParams, weep_grad, weep_value

__all__ = [
    "AdmmConfig",
    "LbfgsConfig",
    "SolverTrace",
    "TraceRow",
    "denoise_admm",
    "minimize_lbfgs",
    "weep_tv_objective_and_grad",
    "denoise_l2_closed_form",
    "denoise_prox_gradient",
]


@dataclass(frozen=True)
class AdmmConfig:
    """ADMM settings; tolerances are relative (scaled residual criteria)."""

    rho: float = 1.0
    max_iter: int = 2000
    tol_primal: float = 1e-6
    tol_dual: float = 1e-6

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho > 0.0):
            raise ValueError(f"rho must be positive, got {self.rho!r}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter!r}")
        if self.tol_primal <= 0.0 or self.tol_dual <= 0.0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class LbfgsConfig:
    """L-BFGS settings: history size, Wolfe constants, gradient tolerance.

    ``max_step_rel`` bounds each line search: the trial step norm never
    exceeds ``max_step_rel * (1 + ||x||)``.  On landscapes with long flat
    tilted stretches (where no step can satisfy the curvature condition)
    the search accepts the largest sufficient-decrease point at the bound
    instead of doubling off to infinity.
    """

    memory: int = 10
    max_iter: int = 500
    grad_tol: float = 1e-8
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    max_step_rel: float = 10.0

    def __post_init__(self):
        if self.memory < 1:
            raise ValueError(f"memory must be >= 1, got {self.memory!r}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter!r}")
        if self.grad_tol <= 0.0:
            raise ValueError("grad_tol must be positive")
        if not (0.0 < self.wolfe_c1 < self.wolfe_c2 < 1.0):
            raise ValueError("need 0 < c1 < c2 < 1 for the Wolfe conditions")
        if self.max_step_rel <= 0.0:
            raise ValueError("max_step_rel must be positive")


@dataclass
class TraceRow:
    iteration: int
    objective: float
    r_primal: float | None = None
    r_dual: float | None = None
    psnr: float | None = None
    seconds: float = 0.0


@dataclass
class SolverTrace:
    """Per-iteration solver record; serializes to CSV for plotting."""

    solver: str
    rows: list[TraceRow] = field(default_factory=list)
    converged: bool = False
    stop_reason: str = ""
    line_search_failed: bool = False

    def append(self, **kw) -> None:
        self.rows.append(TraceRow(**kw))

    @property
    def objectives(self) -> list[float]:
        return [r.objective for r in self.rows]

    def to_csv(self, path, include_seconds: bool = True) -> None:
        """Write ``iter,objective,r_primal,r_dual,psnr,seconds`` rows.

        ``include_seconds=False`` leaves the seconds field blank, which keeps
        rerun artifacts byte-identical (wall time is the one nondeterministic
        column); the measured values remain available on the trace object.
        """

        def fmt(v) -> str:
            return "" if v is None else repr(v)

        lines = ["iter,objective,r_primal,r_dual,psnr,seconds"]
        for r in self.rows:
            secs = fmt(r.seconds) if include_seconds else ""
            lines.append(
                f"{r.iteration},{fmt(r.objective)},{fmt(r.r_primal)},"
                f"{fmt(r.r_dual)},{fmt(r.psnr)},{secs}"
            )
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")


def _check_signal(y) -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if arr.ndim not in (1, 2):
        raise ValueError(f"expected a 1-D signal or 2-D image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("input entries must be finite")
    return arr


def _tv_ops(shape) -> tuple[Callable, Callable]:
    """Difference operator and adjoint acting on flat penalty coordinates."""
    if len(shape) == 1:
        n = shape[0]
        return (lambda x: diff1d(x)), (lambda v: diff1d_adjoint(v, n))
    rows, cols = shape
    n_dx = rows * (cols - 1)

    def fwd(x):
        f = diff2d(x)
        return np.concatenate([f.dx.ravel(), f.dy.ravel()])

    def adj(v):
        dx = v[:n_dx].reshape(rows, cols - 1)
        dy = v[n_dx:].reshape(rows - 1, cols)
        return diff2d_adjoint(DiffField2D(dx, dy))

    return fwd, adj


def _psnr_or_none(ground_truth, x, peak) -> float | None:
    if ground_truth is None:
        return None
    return psnr_metric(ground_truth, x, peak)


def _resolve_peak(ground_truth, peak) -> float | None:
    if ground_truth is None:
        return None
    if peak is not None:
        return float(peak)
    gt = np.asarray(ground_truth, dtype=float)
    rng = float(gt.max() - gt.min())
    return rng if rng > 0.0 else 1.0


def denoise_admm(y, penalty: Penalty, lam: float, cfg: AdmmConfig = AdmmConfig(),
                 ground_truth=None, psnr_peak: float | None = None):
    """ADMM on the splitting z = D x.

    Per iteration: x-update solves (I + rho D^T D) x = y + rho D^T (z - u),
    the z-update applies the penalty prox with step lam/rho to D x + u, and
    the scaled dual variable accumulates the constraint violation.  Stops
    when the scaled primal and dual residuals both drop below their
    tolerances.

    Returns ``(estimate, trace)``.  Raises :class:`SolverError` on
    non-finite iterates and ValueError when lam/rho violates the penalty's
    prox-step domain (for the WEEP penalty the ratio must stay below 1).
    """
    y = _check_signal(y)
    lam = float(lam)
    if not (math.isfinite(lam) and lam >= 0.0):
        raise ValueError(f"lam must be nonnegative, got {lam!r}")
    if not penalty.has_closed_form_prox:
        raise PenaltyCapabilityError(
            f"{penalty.kind} has no closed-form prox; ADMM needs one"
        )
    step = penalty.check_prox_step(lam / cfg.rho) if lam > 0.0 else None
    peak = _resolve_peak(ground_truth, psnr_peak)

    fwd, adj = _tv_ops(y.shape)
    x = y.copy()
    z = fwd(x)
    u = np.zeros_like(z)

    trace = SolverTrace(solver="admm")
    t0 = time.perf_counter()
    obj0 = 0.5 * float(np.sum((x - y) ** 2)) + lam * float(np.sum(penalty.value(z)))
    trace.append(iteration=0, objective=obj0, r_primal=0.0, r_dual=None,
                 psnr=_psnr_or_none(ground_truth, x, peak),
                 seconds=time.perf_counter() - t0)

    for k in range(1, cfg.max_iter + 1):
        x = solve_tikhonov_diff(y + cfg.rho * adj(z - u), cfg.rho, x0=x)
        dx = fwd(x)
        z_old = z
        v = dx + u
        z = penalty.prox(step, v) if lam > 0.0 else v
        u = u + dx - z
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z)) and np.all(np.isfinite(u))):
            raise SolverError(f"ADMM produced non-finite iterates at iteration {k}")

        r_primal = float(np.linalg.norm(dx - z))
        r_dual = cfg.rho * float(np.linalg.norm(adj(z - z_old)))
        obj = 0.5 * float(np.sum((x - y) ** 2)) + lam * float(np.sum(penalty.value(dx)))
        trace.append(iteration=k, objective=obj, r_primal=r_primal, r_dual=r_dual,
                     psnr=_psnr_or_none(ground_truth, x, peak),
                     seconds=time.perf_counter() - t0)

        eps_pri = cfg.tol_primal * max(1.0, float(np.linalg.norm(dx)),
                                       float(np.linalg.norm(z)))
        eps_dual = cfg.tol_dual * max(1.0, cfg.rho * float(np.linalg.norm(adj(u))))
        if r_primal <= eps_pri and r_dual <= eps_dual:
            trace.converged = True
            trace.stop_reason = "residual_tolerance"
            break
    else:
        trace.stop_reason = "max_iter"
    return x, trace


def _two_loop(g, hist_s, hist_y, hist_rho) -> np.ndarray:
    if not hist_s:
        return g.copy()
    q = g.copy()
    alphas = []
    for s, yv, rho in zip(reversed(hist_s), reversed(hist_y), reversed(hist_rho)):
        a_i = rho * float(np.dot(s, q))
        alphas.append(a_i)
        q -= a_i * yv
    gamma = float(np.dot(hist_s[-1], hist_y[-1])) / float(np.dot(hist_y[-1], hist_y[-1]))
    r = gamma * q
    for (s, yv, rho), a_i in zip(zip(hist_s, hist_y, hist_rho), reversed(alphas)):
        beta = rho * float(np.dot(yv, r))
        r += s * (a_i - beta)
    return r


def _strong_wolfe(fun, x, f0, g0, d, c1, c2, a_max: float = math.inf,
                  max_evals: int = 60):
    """Bracket-and-zoom strong Wolfe search; returns (alpha, f, g, ok).

    ``a_max`` bounds the trial step.  If the sufficient-decrease condition
    still holds at the bound while the curvature condition is unattainable
    below it (flat tilted stretches), the boundary point is accepted.
    """
    dphi0 = float(np.dot(g0, d))
    if dphi0 >= 0.0:
        return None, f0, g0, False

    def trial(a):
        f, g = fun(x + a * d)
        return float(f), g, float(np.dot(g, d))

    def zoom(a_lo, f_lo, a_hi, budget):
        for _ in range(budget):
            a = 0.5 * (a_lo + a_hi)
            f_a, g_a, dphi_a = trial(a)
            if not math.isfinite(f_a) or f_a > f0 + c1 * a * dphi0 or f_a >= f_lo:
                a_hi = a
            else:
                if abs(dphi_a) <= -c2 * dphi0:
                    return a, f_a, g_a, True
                if dphi_a * (a_hi - a_lo) >= 0.0:
                    a_hi = a_lo
                a_lo, f_lo = a, f_a
            if abs(a_hi - a_lo) < 1e-16 * max(1.0, abs(a_lo)):
                break
        # Accept a plain-decrease point rather than giving up outright.
        f_a, g_a, _ = trial(a_lo)
        if math.isfinite(f_a) and f_a < f0 and a_lo > 0.0:
            return a_lo, f_a, g_a, True
        return None, f0, g0, False

    a_prev, f_prev = 0.0, f0
    a = min(1.0, a_max)
    evals = 0
    while evals < max_evals:
        f_a, g_a, dphi_a = trial(a)
        evals += 1
        if not math.isfinite(f_a):
            a = 0.5 * (a_prev + a)
            continue
        if f_a > f0 + c1 * a * dphi0 or (evals > 1 and f_a >= f_prev):
            return zoom(a_prev, f_prev, a, max_evals - evals)
        if abs(dphi_a) <= -c2 * dphi0:
            return a, f_a, g_a, True
        if dphi_a >= 0.0:
            return zoom(a, f_a, a_prev, max_evals - evals)
        if a >= a_max * (1.0 - 1e-12):
            return a, f_a, g_a, True  # sufficient decrease at the step bound
        a_prev, f_prev = a, f_a
        a = min(2.0 * a, a_max)
    return None, f0, g0, False


def minimize_lbfgs(fun: Callable[[np.ndarray], tuple[float, np.ndarray]],
                   x0, cfg: LbfgsConfig = LbfgsConfig(),
                   psnr_fn: Callable[[np.ndarray], float] | None = None):
    """Two-loop-recursion L-BFGS with a strong Wolfe line search.

    ``fun`` maps an iterate to ``(value, gradient)``.  Stops when the
    gradient norm falls below ``cfg.grad_tol`` or the iteration cap is hit;
    a failed line search ends the run early with
    ``trace.line_search_failed`` set.  Always returns the best iterate seen.
    """
    x = np.array(x0, dtype=float).ravel().copy()
    f, g = fun(x)
    f = float(f)
    g = np.asarray(g, dtype=float)
    if not (math.isfinite(f) and np.all(np.isfinite(g))):
        raise SolverError("objective or gradient non-finite at the starting point")

    trace = SolverTrace(solver="lbfgs")
    t0 = time.perf_counter()
    trace.append(iteration=0, objective=f,
                 psnr=None if psnr_fn is None else float(psnr_fn(x)),
                 seconds=time.perf_counter() - t0)

    best_f, best_x = f, x.copy()
    hist_s: list[np.ndarray] = []
    hist_y: list[np.ndarray] = []
    hist_rho: list[float] = []

    for k in range(1, cfg.max_iter + 1):
        if float(np.linalg.norm(g)) <= cfg.grad_tol:
            trace.converged = True
            trace.stop_reason = "grad_tol"
            break
        d = -_two_loop(g, hist_s, hist_y, hist_rho)
        if float(np.dot(d, g)) >= 0.0:
            # Defective curvature history; fall back to steepest descent.
            hist_s.clear()
            hist_y.clear()
            hist_rho.clear()
            d = -g
        d_norm = float(np.linalg.norm(d))
        a_max = cfg.max_step_rel * (1.0 + float(np.linalg.norm(x))) / max(d_norm, 1e-300)
        alpha, f_new, g_new, ok = _strong_wolfe(
            fun, x, f, g, d, cfg.wolfe_c1, cfg.wolfe_c2, a_max=a_max
        )
        if not ok:
            trace.line_search_failed = True
            trace.stop_reason = "line_search_failure"
            break
        g_new = np.asarray(g_new, dtype=float)
        if not (math.isfinite(f_new) and np.all(np.isfinite(g_new))):
            raise SolverError(f"non-finite objective or gradient at iteration {k}")
        s = alpha * d
        yv = g_new - g
        sy = float(np.dot(s, yv))
        if sy > 1e-10 * float(np.linalg.norm(s)) * float(np.linalg.norm(yv)):
            hist_s.append(s)
            hist_y.append(yv)
            hist_rho.append(1.0 / sy)
            if len(hist_s) > cfg.memory:
                hist_s.pop(0)
                hist_y.pop(0)
                hist_rho.pop(0)
        x = x + s
        f, g = f_new, g_new
        if f < best_f:
            best_f, best_x = f, x.copy()
        trace.append(iteration=k, objective=f,
                     psnr=None if psnr_fn is None else float(psnr_fn(x)),
                     seconds=time.perf_counter() - t0)
    else:
        trace.stop_reason = "max_iter"
    if not trace.stop_reason:
        trace.stop_reason = "grad_tol"
    return best_x, trace


def weep_tv_objective_and_grad(x, y, p: WeepParams, lam: float):
    """Value and exact gradient of the WEEP-TV denoising objective.

    value = 0.5 ||y - x||^2 + lam * sum(weep_value(D x)); the gradient is
    (x - y) + lam * D^T weep_grad(D x) by the chain rule, defined everywhere
    because the penalty is smooth.
    """
    x = _check_signal(x)
    y = _check_signal(y)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    lam = float(lam)
    if not (math.isfinite(lam) and lam >= 0.0):
        raise ValueError(f"lam must be nonnegative, got {lam!r}")
    if x.ndim == 1:
        dx = diff1d(x)
        value = 0.5 * float(np.sum((x - y) ** 2)) + lam * float(np.sum(weep_value(p, dx)))
        grad = (x - y) + lam * diff1d_adjoint(weep_grad(p, dx), x.size)
        return value, grad
    f = diff2d(x)
    value = 0.5 * float(np.sum((x - y) ** 2)) + lam * (
        float(np.sum(weep_value(p, f.dx))) + float(np.sum(weep_value(p, f.dy)))
    )
    grad = (x - y) + lam * diff2d_adjoint(
        DiffField2D(weep_grad(p, f.dx), weep_grad(p, f.dy))
    )
    return value, grad


def denoise_l2_closed_form(y, lam: float) -> np.ndarray:
    """Exact minimizer of 0.5 ||y - x||^2 + lam ||D x||^2, via
    (I + 2 lam D^T D) x = y.  ``lam = 0`` returns a copy of the input."""
    y = _check_signal(y)
    lam = float(lam)
    if not (math.isfinite(lam) and lam >= 0.0):
        raise ValueError(f"lam must be nonnegative, got {lam!r}")
    if lam == 0.0:
        return y.copy()
    return solve_tikhonov_diff(y, 2.0 * lam)


def denoise_prox_gradient(y, penalty: Penalty, lam: float, step: float = 1.0,
                          max_iter: int = 500, tol: float = 1e-10,
                          ground_truth=None, psnr_peak: float | None = None):
    """Forward-backward iteration in identity-operator mode.

    Solves min_x 0.5 ||y - x||^2 + lam * sum(penalty(x_i)) by iterating
    x <- prox_{step*lam}(x - step*(x - y)) from x = y.  The fidelity term is
    1-smooth, so ``step`` must lie in (0, 1]; with step = 1 and a convex
    penalty the first iterate is already exact.

    Returns ``(estimate, trace)``.
    """
    y = _check_signal(y)
    lam = float(lam)
    if not (math.isfinite(lam) and lam >= 0.0):
        raise ValueError(f"lam must be nonnegative, got {lam!r}")
    step = float(step)
    if not (0.0 < step <= 1.0):
        raise ValueError(f"step must lie in (0, 1] for the 1-smooth fidelity, got {step!r}")
    if lam > 0.0:
        penalty.check_prox_step(step * lam)
    peak = _resolve_peak(ground_truth, psnr_peak)

    def objective(x):
        return 0.5 * float(np.sum((x - y) ** 2)) + lam * float(np.sum(penalty.value(x)))

    x = y.copy()
    trace = SolverTrace(solver="prox_gradient")
    t0 = time.perf_counter()
    trace.append(iteration=0, objective=objective(x),
                 psnr=_psnr_or_none(ground_truth, x, peak),
                 seconds=time.perf_counter() - t0)
    for k in range(1, max_iter + 1):
        forward = x - step * (x - y)
        x_next = penalty.prox(step * lam, forward) if lam > 0.0 else forward
        if not np.all(np.isfinite(x_next)):
            raise SolverError(f"prox-gradient produced non-finite iterates at iteration {k}")
        delta = float(np.max(np.abs(x_next - x)))
        x = x_next
        trace.append(iteration=k, objective=objective(x),
                     psnr=_psnr_or_none(ground_truth, x, peak),
                     seconds=time.perf_counter() - t0)
        if delta <= tol:
            trace.converged = True
            trace.stop_reason = "step_tolerance"
            break
    else:
        trace.stop_reason = "max_iter"
    return x, trace
