"""Reproducible experiment harness: 1D/2D denoising studies and Monte Carlo
robust regression.

Every experiment is a pure function of (config, seed).  Randomness comes
from numpy's PCG64 generator seeded explicitly; child seeds are derived with
``numpy.random.SeedSequence``, so reruns are bit-identical across platforms.
Artifacts (JSON reports, CSV traces and tables) are written with
deterministic formatting; trace CSVs leave the wall-time column blank for
that reason.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .baselines import (
    HuberLoss,
    Penalty,
    PenaltyCapabilityError,
    SquaredL2Penalty,
    TukeyLoss,
    WeepPenalty,
    make_penalty,
)
from .errors import NumericalError
from .metrics import SsimConfig, mae, mse, psnr, ssim
from .solvers import (
    AdmmConfig,
    LbfgsConfig,
    SolverTrace,
    denoise_admm,
    denoise_l2_closed_form,
    minimize_lbfgs,
    weep_tv_objective_and_grad,
)

__all__ = [
    "rng_from_seed",
    "child_seeds",
    "gen_test_signal",
    "add_gaussian_noise",
    "DenoiseMethod",
    "ExperimentReport",
    "default_denoise_methods",
    "run_denoise_method",
    "run_denoise_1d",
    "run_denoise_2d",
    "grid_search",
    "cartesian_grid",
    "RegressionDataset",
    "gen_regression_data",
    "fit_mestimator",
    "monte_carlo_regression",
    "write_json",
    "write_table_csv",
]

SIGNAL_LENGTH = 512


def _check_seed(seed) -> int:
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    return seed


def rng_from_seed(seed: int) -> np.random.Generator:
    """PCG64 generator for ``seed``; the package-wide PRNG contract.

    PCG64 is numpy's documented default bit generator and produces identical
    streams for identical seeds on every platform, which is what makes the
    experiment artifacts byte-reproducible.
    """
    return np.random.Generator(np.random.PCG64(_check_seed(seed)))


def child_seeds(seed: int, count: int) -> list[int]:
    """Derive ``count`` independent sub-seeds from a master seed
    (SeedSequence expansion; deterministic)."""
    state = np.random.SeedSequence(_check_seed(seed)).generate_state(count, dtype=np.uint64)
    return [int(s) for s in state]


def gen_test_signal(seed: int) -> np.ndarray:
    """512-sample denoising benchmark: sharp plateaus plus a fine texture band.

    Layout by sample index:

    * ``[0, 96)``    plateau at ``v0 = 0``
    * ``[96, 192)``  plateau at ``v1 = v0 + j1`` with ``j1 ~ U[1, 2]``
    * ``[192, 288)`` plateau at ``v2 = v1 - j2`` with ``j2 ~ U[1, 2]``
    * ``[288, 480)`` texture band: ``v2`` plus two sine tones with an integer
      number of cycles (4..7 and 9..12 over the 192 samples) and amplitudes
      ``0.13 * min(j1, j2)`` and ``0.065 * min(j1, j2)``
    * ``[480, 512)`` plateau back at ``v2``

    The peak texture deviation is at most ``0.195 * min(j1, j2)``, so the
    texture-to-jump amplitude ratio stays below 0.2 while the plateau jumps
    stay at magnitude >= 1.  Integer cycle counts make the band start and end
    at zero deviation.  Deterministic per seed.
    """
    rng = rng_from_seed(seed)
    j1 = float(rng.uniform(1.0, 2.0))
    j2 = float(rng.uniform(1.0, 2.0))
    cycles_a = int(rng.integers(4, 8))
    cycles_b = int(rng.integers(9, 13))
    v0, v1 = 0.0, j1
    v2 = v1 - j2

    x = np.empty(SIGNAL_LENGTH)
    x[0:96] = v0
    x[96:192] = v1
    x[192:288] = v2
    t = np.arange(192, dtype=float)
    amp = min(j1, j2)
    texture = 0.13 * amp * np.sin(2.0 * np.pi * cycles_a * t / 192.0)
    texture += 0.065 * amp * np.sin(2.0 * np.pi * cycles_b * t / 192.0)
    x[288:480] = v2 + texture
    x[480:512] = v2
    return x


def add_gaussian_noise(x, sigma: float, seed: int) -> np.ndarray:
    """Add i.i.d. N(0, sigma^2) noise from the seeded generator."""
    arr = np.asarray(x, dtype=float)
    if not (math.isfinite(sigma) and sigma > 0.0):
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    rng = rng_from_seed(seed)
    return arr + rng.normal(0.0, sigma, size=arr.shape)


# --- denoising protocol -------------------------------------------------

@dataclass(frozen=True)
class DenoiseMethod:
    """One (penalty, solver) route with its hyperparameters.

    ``penalty`` is one of l2 / l1 / mcp / weep; ``solver`` is closed_form
    (l2 only), admm (l1 / mcp / weep), or lbfgs (weep only).  ``lam`` is the
    TV weight; ``params`` holds penalty-specific parameters (weep: a, b;
    mcp: mcp_lam, gamma).
    """

    penalty: str
    solver: str
    lam: float
    params: dict

    def label(self) -> str:
        return f"{self.penalty}-tv"

    def validate(self) -> None:
        allowed = {
            "l2": ("closed_form",),
            "l1": ("admm",),
            "mcp": ("admm",),
            "weep": ("admm", "lbfgs"),
        }
        if self.penalty not in allowed:
            raise ValueError(f"unknown denoising penalty {self.penalty!r}")
        if self.solver not in allowed[self.penalty]:
            raise ValueError(
                f"{self.penalty} supports solvers {allowed[self.penalty]}, "
                f"got {self.solver!r}"
            )
        if not (math.isfinite(self.lam) and self.lam >= 0.0):
            raise ValueError(f"lam must be nonnegative, got {self.lam!r}")


@dataclass
class ExperimentReport:
    """Outcome of one method run: label, hyperparameters, metrics, trace file."""

    method: str
    solver: str
    hyperparameters: dict
    metrics: dict
    trace_path: str | None
    seed: int

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "solver": self.solver,
            "hyperparameters": dict(self.hyperparameters),
            "metrics": dict(self.metrics),
            "trace_path": self.trace_path,
            "seed": self.seed,
        }


def default_denoise_methods(ndim: int = 1) -> list[DenoiseMethod]:
    """The standard comparison set: L2 (closed form), L1 and MCP (ADMM),
    WEEP (ADMM and L-BFGS).  Hyperparameter defaults suit the 1D benchmark
    at sigma ~ 0.25 and the 8-bit 2D setting at sigma ~ 12; tune per task
    with :func:`grid_search` for real comparisons."""
    if ndim == 1:
        return [
            DenoiseMethod("l2", "closed_form", 2.0, {}),
            DenoiseMethod("l1", "admm", 0.4, {}),
            DenoiseMethod("mcp", "admm", 0.4, {"mcp_lam": 1.0, "gamma": 4.0}),
            DenoiseMethod("weep", "admm", 1.0, {"a": 64.0, "b": 0.01}),
            DenoiseMethod("weep", "lbfgs", 1.0, {"a": 64.0, "b": 0.01}),
        ]
    return [
        DenoiseMethod("l2", "closed_form", 0.4, {}),
        DenoiseMethod("l1", "admm", 5.0, {}),
        DenoiseMethod("mcp", "admm", 8.0, {"mcp_lam": 1.0, "gamma": 48.0}),
        DenoiseMethod("weep", "admm", 600.0, {"a": 0.001, "b": 0.002}),
        DenoiseMethod("weep", "lbfgs", 600.0, {"a": 0.001, "b": 0.002}),
    ]


def _build_penalty(method: DenoiseMethod) -> Penalty | None:
    if method.penalty == "l1":
        return make_penalty("l1")
    if method.penalty == "mcp":
        return make_penalty("mcp", lam=method.params["mcp_lam"], gamma=method.params["gamma"])
    if method.penalty == "weep":
        return make_penalty("weep", a=method.params["a"], b=method.params["b"])
    return None


def run_denoise_method(noisy, method: DenoiseMethod, ground_truth=None,
                       psnr_peak: float | None = None,
                       admm_cfg: AdmmConfig = AdmmConfig(),
                       lbfgs_cfg: LbfgsConfig = LbfgsConfig()):
    """Run one (penalty, solver) route on ``noisy``; returns (estimate, trace).

    The closed-form L2 route has no iterations, so its trace is None.  For
    prox-step-limited penalties (weep: lam/rho < 1, mcp: lam/rho < gamma)
    the ADMM rho is raised, if needed, to keep the step at 0.8 of its limit,
    so one config can serve a whole hyperparameter grid.
    """
    method.validate()
    if method.penalty == "l2":
        return denoise_l2_closed_form(noisy, method.lam), None
    penalty = _build_penalty(method)
    if method.solver == "admm":
        limit = penalty.prox_step_limit
        if limit is not None and method.lam > 0.0:
            rho_min = method.lam / (0.8 * limit)
            if admm_cfg.rho < rho_min:
                admm_cfg = replace(admm_cfg, rho=rho_min)
        return denoise_admm(noisy, penalty, method.lam, cfg=admm_cfg,
                            ground_truth=ground_truth, psnr_peak=psnr_peak)
    # weep + lbfgs
    noisy_arr = np.asarray(noisy, dtype=float)
    shape = noisy_arr.shape
    p = penalty.p

    def fun_flat(xflat):
        value, grad = weep_tv_objective_and_grad(xflat.reshape(shape), noisy_arr,
                                                 p, method.lam)
        return value, grad.ravel()

    psnr_fn = None
    if ground_truth is not None:
        gt = np.asarray(ground_truth, dtype=float)
        peak = psnr_peak if psnr_peak is not None else max(float(gt.max() - gt.min()), 1.0)
        psnr_fn = lambda xflat: psnr(gt, xflat.reshape(shape), peak)
    x, trace = minimize_lbfgs(fun_flat, noisy_arr.ravel(), cfg=lbfgs_cfg, psnr_fn=psnr_fn)
    return x.reshape(shape), trace


def _method_hyperparams(method: DenoiseMethod) -> dict:
    return {"lam": method.lam, **method.params}


def run_denoise_1d(sigma: float, seed: int, methods: list[DenoiseMethod] | None = None,
                   admm_cfg: AdmmConfig = AdmmConfig(),
                   lbfgs_cfg: LbfgsConfig = LbfgsConfig(),
                   out_dir=None) -> list[ExperimentReport]:
    """1D denoising study on the benchmark signal.

    Generates the clean signal and its noisy version from child seeds of
    ``seed``, runs every method on the same noisy input, and records PSNR
    against the clean signal (peak = clean dynamic range).  With ``out_dir``
    set, writes ``report.json`` plus one trace CSV per iterative route.
    """
    sig_seed, noise_seed = child_seeds(seed, 2)
    clean = gen_test_signal(sig_seed)
    noisy = add_gaussian_noise(clean, sigma, noise_seed)
    peak = float(clean.max() - clean.min())
    if methods is None:
        methods = default_denoise_methods(ndim=1)

    reports: list[ExperimentReport] = []
    traces: dict[str, SolverTrace] = {}
    for m in methods:
        estimate, trace = run_denoise_method(noisy, m, ground_truth=clean,
                                             psnr_peak=peak, admm_cfg=admm_cfg,
                                             lbfgs_cfg=lbfgs_cfg)
        metrics = {"psnr": psnr(clean, estimate, peak)}
        if trace is not None:
            metrics["final_objective"] = trace.objectives[-1]
        trace_name = f"trace_{m.penalty}_{m.solver}.csv" if trace is not None else None
        if trace is not None:
            traces[trace_name] = trace
        reports.append(ExperimentReport(
            method=m.label(), solver=m.solver,
            hyperparameters=_method_hyperparams(m), metrics=metrics,
            trace_path=trace_name, seed=seed,
        ))

    if out_dir is not None:
        payload = {
            "experiment": "denoise1d",
            "seed": seed,
            "sigma": sigma,
            "psnr_noisy": psnr(clean, noisy, peak),
            "reports": [r.to_dict() for r in reports],
        }
        _write_artifacts(out_dir, payload, traces)
    return reports


def run_denoise_2d(image, sigma: float, seed: int,
                   methods: list[DenoiseMethod] | None = None,
                   admm_cfg: AdmmConfig = AdmmConfig(),
                   lbfgs_cfg: LbfgsConfig = LbfgsConfig(),
                   value_range: tuple[float, float] = (0.0, 255.0),
                   out_dir=None) -> list[ExperimentReport]:
    """2D denoising study: same protocol as 1D plus SSIM.

    ``image`` is a 2-D array in ``value_range`` units (8-bit grayscale by
    default).  Noise is added unclipped; metrics use the declared range.
    """
    clean = np.asarray(image, dtype=float)
    if clean.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {clean.shape}")
    lo, hi = value_range
    if not lo < hi:
        raise ValueError(f"invalid value_range {value_range!r}")
    peak = float(hi - lo)
    (noise_seed,) = child_seeds(seed, 1)
    noisy = add_gaussian_noise(clean, sigma, noise_seed)
    if methods is None:
        methods = default_denoise_methods(ndim=2)
    ssim_cfg = SsimConfig(dynamic_range=peak)

    reports: list[ExperimentReport] = []
    traces: dict[str, SolverTrace] = {}
    for m in methods:
        estimate, trace = run_denoise_method(noisy, m, ground_truth=clean,
                                             psnr_peak=peak, admm_cfg=admm_cfg,
                                             lbfgs_cfg=lbfgs_cfg)
        metrics = {
            "psnr": psnr(clean, estimate, peak),
            "ssim": ssim(clean, estimate, ssim_cfg),
        }
        if trace is not None:
            metrics["final_objective"] = trace.objectives[-1]
        trace_name = f"trace_{m.penalty}_{m.solver}.csv" if trace is not None else None
        if trace is not None:
            traces[trace_name] = trace
        reports.append(ExperimentReport(
            method=m.label(), solver=m.solver,
            hyperparameters=_method_hyperparams(m), metrics=metrics,
            trace_path=trace_name, seed=seed,
        ))

    if out_dir is not None:
        payload = {
            "experiment": "denoise2d",
            "seed": seed,
            "sigma": sigma,
            "shape": list(clean.shape),
            "psnr_noisy": psnr(clean, noisy, peak),
            "ssim_noisy": ssim(clean, noisy, ssim_cfg),
            "reports": [r.to_dict() for r in reports],
        }
        _write_artifacts(out_dir, payload, traces)
    return reports


def cartesian_grid(**axes) -> list[dict]:
    """Cartesian product of named value lists, in deterministic order."""
    points = [{}]
    for name, values in axes.items():
        points = [{**p, name: v} for p in points for v in values]
    return points


def grid_search(noisy, clean, penalty: str, solver: str, grid: list[dict],
                metric: str = "psnr", peak: float | None = None,
                ssim_cfg: SsimConfig | None = None,
                admm_cfg: AdmmConfig = AdmmConfig(),
                lbfgs_cfg: LbfgsConfig = LbfgsConfig()):
    """Exhaustively score hyperparameter points for one method.

    Each grid point is a dict with ``lam`` plus penalty parameters (weep:
    a, b; mcp: mcp_lam, gamma).  Returns ``(best_point, table)`` where the
    table holds one row per point with its score appended, and the best
    point maximizes the metric with deterministic tie-breaking toward
    smaller lam, then smaller a, then grid order.
    """
    if not grid:
        raise ValueError("grid must be non-empty")
    if metric not in ("psnr", "ssim"):
        raise ValueError(f"metric must be psnr or ssim, got {metric!r}")
    clean = np.asarray(clean, dtype=float)
    if peak is None:
        peak = max(float(clean.max() - clean.min()), 1.0)
    if ssim_cfg is None:
        ssim_cfg = SsimConfig(dynamic_range=peak)

    table: list[dict] = []
    for point in grid:
        params = {k: v for k, v in point.items() if k != "lam"}
        method = DenoiseMethod(penalty, solver, point["lam"], params)
        estimate, _ = run_denoise_method(noisy, method, admm_cfg=admm_cfg,
                                         lbfgs_cfg=lbfgs_cfg)
        if metric == "psnr":
            score = psnr(clean, estimate, peak)
        else:
            score = ssim(clean, estimate, ssim_cfg)
        table.append({**point, metric: score})

    def tie_break(item):
        i, row = item
        return (-row[metric], row.get("lam", 0.0), row.get("a", 0.0), i)

    _, best_row = min(enumerate(table), key=tie_break)
    best = {k: v for k, v in best_row.items() if k != metric}
    return best, table


# --- robust regression ---------------------------------------------------

@dataclass(frozen=True)
class RegressionDataset:
    """Paired samples with outlier labels and the generating line."""

    x: np.ndarray
    y: np.ndarray
    is_outlier: np.ndarray
    true_w1: float
    true_w2: float
    seed: int


def gen_regression_data(n: int, outlier_frac: float, seed: int,
                        noise_std: float = 1.0, true_w1: float = 5.0,
                        true_w2: float = 3.0) -> RegressionDataset:
    """Linear data with a fraction of the responses replaced by outliers.

    Protocol: x ~ U[0, 10]; y = w1 x + w2 + N(0, noise_std^2); then the
    responses of ``floor(outlier_frac * n)`` randomly chosen samples are
    replaced by draws from U[40, 120], uncorrelated with x.  The flat
    high-magnitude cloud drags a least-squares fit's slope toward zero and
    its intercept far upward, while the inliers stay tightly around the
    true line.
    """
    if n < 4:
        raise ValueError(f"need n >= 4 samples, got {n!r}")
    if not (0.0 <= outlier_frac < 1.0):
        raise ValueError(f"outlier_frac must lie in [0, 1), got {outlier_frac!r}")
    if noise_std < 0.0:
        raise ValueError(f"noise_std must be nonnegative, got {noise_std!r}")
    rng = rng_from_seed(seed)
    x = rng.uniform(0.0, 10.0, size=n)
    noise = rng.normal(0.0, 1.0, size=n) * noise_std
    y = true_w1 * x + true_w2 + noise
    k = int(outlier_frac * n)
    is_outlier = np.zeros(n, dtype=bool)
    if k > 0:
        idx = rng.choice(n, size=k, replace=False)
        y[idx] = rng.uniform(40.0, 120.0, size=k)
        is_outlier[idx] = True
    return RegressionDataset(x=x, y=y, is_outlier=is_outlier,
                             true_w1=float(true_w1), true_w2=float(true_w2),
                             seed=_check_seed(seed))


def fit_mestimator(data: RegressionDataset, loss: Penalty,
                   cfg: LbfgsConfig = LbfgsConfig()):
    """Fit (w1, w2) minimizing sum(loss(y_i - (w1 x_i + w2))) with L-BFGS
    from (0, 0).  The loss must have a gradient everywhere."""
    if not loss.has_gradient_everywhere:
        raise PenaltyCapabilityError(
            f"{loss.kind} is not differentiable everywhere; cannot be used "
            "as a smooth regression loss"
        )

    def fun(w):
        r = data.y - (w[0] * data.x + w[1])
        value = float(np.sum(loss.value(r)))
        g = np.asarray(loss.grad(r), dtype=float)
        return value, np.array([-float(np.dot(g, data.x)), -float(np.sum(g))])

    w, trace = minimize_lbfgs(fun, np.zeros(2), cfg=cfg)
    return float(w[0]), float(w[1]), trace


DEFAULT_REGRESSION_LOSSES = ("l2sq", "huber", "tukey", "weep")


def _regression_loss(kind: str) -> Penalty:
    if kind == "l2sq":
        return SquaredL2Penalty()
    if kind == "huber":
        return HuberLoss(1.345)
    if kind == "tukey":
        return TukeyLoss(4.685)
    if kind == "weep":
        return WeepPenalty.from_ab(100.0, 0.01)
    raise ValueError(f"unknown regression loss {kind!r}")


def monte_carlo_regression(trials: int, n: int = 50, outlier_frac: float = 0.6,
                           seed: int = 0, losses=DEFAULT_REGRESSION_LOSSES,
                           lbfgs_cfg: LbfgsConfig = LbfgsConfig(),
                           out_dir=None) -> dict:
    """Monte Carlo comparison of regression losses under outlier contamination.

    Per trial: a fresh contaminated training set and a fresh inlier-only test
    set of the same size are generated from child seeds; each loss is fitted
    by L-BFGS and scored by coefficient error and test MSE/MAE on the
    held-out inliers.  Returns (and optionally writes) a summary with mean,
    std, and median per method for the coefficients, their absolute errors
    against the generating line, and the test errors, plus the per-method
    count of line-search-flagged fits and of failed trials.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials!r}")
    seeds = child_seeds(seed, 2 * trials)
    loss_objs = {kind: _regression_loss(kind) for kind in losses}
    quantities = ("w1", "w2", "w1_abs_err", "w2_abs_err", "test_mse", "test_mae")
    per_method: dict[str, dict[str, list[float]]] = {
        kind: {q: [] for q in quantities} for kind in losses
    }
    flagged = {kind: 0 for kind in losses}
    failed = {kind: 0 for kind in losses}

    for t in range(trials):
        train = gen_regression_data(n, outlier_frac, seeds[2 * t])
        test = gen_regression_data(n, 0.0, seeds[2 * t + 1])
        for kind, loss in loss_objs.items():
            try:
                w1, w2, trace = fit_mestimator(train, loss, cfg=lbfgs_cfg)
            except NumericalError:
                failed[kind] += 1
                continue
            if trace.line_search_failed:
                flagged[kind] += 1
            pred = w1 * test.x + w2
            per_method[kind]["w1"].append(w1)
            per_method[kind]["w2"].append(w2)
            per_method[kind]["w1_abs_err"].append(abs(w1 - train.true_w1))
            per_method[kind]["w2_abs_err"].append(abs(w2 - train.true_w2))
            per_method[kind]["test_mse"].append(mse(test.y, pred))
            per_method[kind]["test_mae"].append(mae(test.y, pred))

    def stats(values: list[float]) -> dict:
        if not values:
            return {"mean": None, "std": None, "median": None}
        arr = np.asarray(values)
        return {
            "mean": float(arr.mean()),
            "std": float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
            "median": float(np.median(arr)),
        }

    summary = {
        "experiment": "robust_reg",
        "trials": trials,
        "n": n,
        "outlier_frac": outlier_frac,
        "seed": seed,
        "true_w1": 5.0,
        "true_w2": 3.0,
        "methods": {
            kind: {
                "loss_params": loss_objs[kind].params(),
                "completed": len(per_method[kind]["w1"]),
                "failed": failed[kind],
                "line_search_flagged": flagged[kind],
                **{q: stats(per_method[kind][q]) for q in quantities},
            }
            for kind in losses
        },
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "summary.json", summary)
    return summary


# --- deterministic artifact helpers --------------------------------------

def _json_ready(obj):
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _json_ready(obj.tolist())
    return obj


def write_json(path, payload: dict) -> None:
    """Deterministically formatted JSON (sorted keys, repr'd non-finite floats)."""
    text = json.dumps(_json_ready(payload), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="ascii")


def write_table_csv(path, rows: list[dict], columns: list[str]) -> None:
    """CSV with a fixed column order and repr-formatted cells."""

    def fmt(v) -> str:
        if v is None:
            return ""
        if isinstance(v, np.floating):
            v = float(v)
        elif isinstance(v, np.integer):
            v = int(v)
        return repr(v)

    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(fmt(row.get(c)) for c in columns))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def _write_artifacts(out_dir, payload: dict, traces: dict[str, SolverTrace]) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, trace in traces.items():
        trace.to_csv(out / name, include_seconds=False)
    write_json(out / "report.json", payload)
