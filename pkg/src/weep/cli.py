"""Command-line front end for penalty inspection, denoising studies,
robust regression, and hyperparameter grid search.

Each experiment invocation owns one run directory (named ``<command>-seed<N>``
under ``--out-root``, the ``WEEP_OUT_ROOT`` environment variable, or
``./runs``) and writes JSON reports plus CSV traces/tables there.  On
failure the run directory contains only ``FAILED.txt`` with the diagnostic.

Exit codes: 0 success, 1 usage or configuration error, 2 I/O error,
3 numerical/solver failure, 4 internal invariant breach.

Flags may also be supplied through ``--config FILE`` (a flat JSON object
keyed by flag name with dashes replaced by underscores); explicit flags
override file values.  See docs/config.md for the schema.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import shutil
import sys
from pathlib import Path

from .baselines import PenaltyCapabilityError
from .errors import NumericalError
from .experiments import (
    AdmmConfig,
    DenoiseMethod,
    _build_penalty,
    LbfgsConfig,
    add_gaussian_noise,
    cartesian_grid,
    child_seeds,
    default_denoise_methods,
    gen_test_signal,
    grid_search,
    monte_carlo_regression,
    run_denoise_1d,
    run_denoise_2d,
    write_json,
    write_table_csv,
)
from .images import read_image
from .penalty import base_value, derive_weep_params, weep_grad, weep_prox, weep_value

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3
EXIT_INTERNAL = 4

_EXIT_CODE_HELP = (
    "exit codes: 0 success, 1 usage/config error, 2 I/O error, "
    "3 numerical/solver failure, 4 internal error"
)


class UsageError(ValueError):
    """Bad flags or config; reported before any computation starts."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we map usage to 1
        raise UsageError(message)


def _floats_csv(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated floats, got {text!r}") from exc
    if not values:
        raise UsageError(f"expected at least one value in {text!r}")
    return values


# Defaults live here (not in argparse) so that config files sit between
# built-in defaults and explicit flags.
_DEFAULTS: dict[str, dict] = {
    "penalty-table": {
        "a": 2.0, "b": 0.5, "range": [-3.0, 3.0], "step_size": 0.1,
        "lam": 0.5, "out": "penalty_table.csv",
    },
    "denoise1d": {
        "sigma": None, "seed": 0, "penalty": "all", "solver": "auto",
        "lam": None, "a": 64.0, "b": 0.01, "mcp_lam": 1.0, "gamma": 4.0,
        "rho": 1.0, "admm_iters": 2000, "admm_tol": 1e-6,
        "lbfgs_iters": 500, "grad_tol": 1e-8, "out_root": None,
    },
    "denoise2d": {
        "image": None, "sigma": None, "seed": 0, "penalty": "all",
        "solver": "auto", "lam": None, "a": 0.001, "b": 0.002,
        "mcp_lam": 1.0, "gamma": 48.0, "rho": 1.0, "admm_iters": 300,
        "admm_tol": 1e-5, "lbfgs_iters": 500, "grad_tol": 1e-8,
        "out_root": None,
    },
    "robust-reg": {
        "trials": 200, "n": 50, "outlier_frac": 0.6, "seed": 0,
        "losses": "l2sq,huber,tukey,weep", "lbfgs_iters": 500,
        "out_root": None,
    },
    "grid-search": {
        "task": "denoise1d", "image": None, "sigma": None, "seed": 0,
        "penalty": None, "solver": "auto", "metric": "psnr",
        "lam_grid": None, "a_grid": "4,16,64", "b_grid": "0.01,0.05",
        "mcp_lam_grid": "1.0", "gamma_grid": "2.5,4,8",
        "rho": 1.0, "admm_iters": 2000, "admm_tol": 1e-6,
        "lbfgs_iters": 500, "grad_tol": 1e-8, "out_root": None,
    },
}

_REQUIRED: dict[str, tuple[str, ...]] = {
    "penalty-table": (),
    "denoise1d": ("sigma",),
    "denoise2d": ("image", "sigma"),
    "robust-reg": (),
    "grid-search": ("sigma", "penalty", "lam_grid"),
}


def build_parser() -> _Parser:
    parser = _Parser(prog="weep", description=__doc__.splitlines()[0],
                     epilog=_EXIT_CODE_HELP)
    from . import __version__

    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    p = sub.add_parser("penalty-table", epilog=_EXIT_CODE_HELP,
                       help="tabulate base penalty, envelope value, gradient, prox")
    p.add_argument("--a", type=float, default=S, help="curvature at the origin")
    p.add_argument("--b", type=float, default=S, help="tail slope")
    p.add_argument("--range", type=float, nargs=2, default=S, metavar=("MIN", "MAX"),
                   help="x range, inclusive")
    p.add_argument("--step-size", dest="step_size", type=float, default=S,
                   help="x spacing")
    p.add_argument("--lambda", dest="lam", type=float, default=S,
                   help="prox step in (0,1) for the prox column")
    p.add_argument("--out", type=str, default=S, help="output CSV path")
    p.add_argument("--config", type=str, default=S, help="JSON config file")

    for name in ("denoise1d", "denoise2d"):
        p = sub.add_parser(name, epilog=_EXIT_CODE_HELP,
                           help=f"{name[-2:].upper()} denoising study")
        if name == "denoise2d":
            p.add_argument("--image", type=str, default=S,
                           help="grayscale PGM/PNG input image")
        p.add_argument("--sigma", type=float, default=S, help="noise std dev")
        p.add_argument("--seed", type=int, default=S, help="master seed")
        p.add_argument("--penalty", type=str, default=S,
                       choices=["all", "l2", "l1", "mcp", "weep"],
                       help="penalty to run, or all")
        p.add_argument("--solver", type=str, default=S,
                       choices=["auto", "closed-form", "admm", "lbfgs"],
                       help="solver for a single penalty")
        p.add_argument("--lambda", dest="lam", type=float, default=S,
                       help="TV weight (single penalty only; defaults per method)")
        p.add_argument("--a", type=float, default=S, help="weep curvature")
        p.add_argument("--b", type=float, default=S, help="weep tail slope")
        p.add_argument("--mcp-lam", dest="mcp_lam", type=float, default=S,
                       help="mcp weight parameter")
        p.add_argument("--gamma", type=float, default=S,
                       help="mcp concavity span")
        p.add_argument("--rho", type=float, default=S, help="ADMM penalty parameter")
        p.add_argument("--admm-iters", dest="admm_iters", type=int, default=S)
        p.add_argument("--admm-tol", dest="admm_tol", type=float, default=S)
        p.add_argument("--lbfgs-iters", dest="lbfgs_iters", type=int, default=S)
        p.add_argument("--grad-tol", dest="grad_tol", type=float, default=S)
        p.add_argument("--out-root", dest="out_root", type=str, default=S,
                       help="artifact root (else $WEEP_OUT_ROOT or ./runs)")
        p.add_argument("--config", type=str, default=S, help="JSON config file")

    p = sub.add_parser("robust-reg", epilog=_EXIT_CODE_HELP,
                       help="Monte Carlo robust regression comparison")
    p.add_argument("--trials", type=int, default=S, help="number of trials")
    p.add_argument("--n", type=int, default=S, help="samples per trial")
    p.add_argument("--outlier-frac", dest="outlier_frac", type=float, default=S,
                   help="fraction of contaminated samples")
    p.add_argument("--seed", type=int, default=S, help="master seed")
    p.add_argument("--losses", type=str, default=S,
                   help="comma list from l2sq,huber,tukey,weep")
    p.add_argument("--lbfgs-iters", dest="lbfgs_iters", type=int, default=S)
    p.add_argument("--out-root", dest="out_root", type=str, default=S)
    p.add_argument("--config", type=str, default=S, help="JSON config file")

    p = sub.add_parser("grid-search", epilog=_EXIT_CODE_HELP,
                       help="exhaustive hyperparameter search for one method")
    p.add_argument("--task", type=str, default=S, choices=["denoise1d", "denoise2d"])
    p.add_argument("--image", type=str, default=S, help="input image for denoise2d")
    p.add_argument("--sigma", type=float, default=S, help="noise std dev")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--penalty", type=str, default=S, choices=["l2", "l1", "mcp", "weep"],
                   help="penalty to tune")
    p.add_argument("--solver", type=str, default=S,
                   choices=["auto", "closed-form", "admm", "lbfgs"])
    p.add_argument("--metric", type=str, default=S, choices=["psnr", "ssim"])
    p.add_argument("--lambda-grid", dest="lam_grid", type=str, default=S,
                   help="comma-separated TV weights")
    p.add_argument("--a-grid", dest="a_grid", type=str, default=S)
    p.add_argument("--b-grid", dest="b_grid", type=str, default=S)
    p.add_argument("--mcp-lam-grid", dest="mcp_lam_grid", type=str, default=S)
    p.add_argument("--gamma-grid", dest="gamma_grid", type=str, default=S)
    p.add_argument("--rho", type=float, default=S)
    p.add_argument("--admm-iters", dest="admm_iters", type=int, default=S)
    p.add_argument("--admm-tol", dest="admm_tol", type=float, default=S)
    p.add_argument("--lbfgs-iters", dest="lbfgs_iters", type=int, default=S)
    p.add_argument("--grad-tol", dest="grad_tol", type=float, default=S)
    p.add_argument("--out-root", dest="out_root", type=str, default=S)
    p.add_argument("--config", type=str, default=S, help="JSON config file")

    # Every flag's help line states its effective default.
    for name, sp in sub.choices.items():
        defaults = _DEFAULTS[name]
        for action in sp._actions:
            if action.dest in defaults:
                default = defaults[action.dest]
                shown = "required" if default is None else repr(default)
                base = action.help or ""
                if "default" not in base:
                    action.help = f"{base} (default: {shown})".strip()
    return parser


def _merge_config(command: str, ns: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags; rejects unknown config keys."""
    cli_values = {k: v for k, v in vars(ns).items() if k != "command"}
    config_path = cli_values.pop("config", None)
    merged = dict(_DEFAULTS[command])
    if config_path is not None:
        try:
            raw = Path(config_path).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read config file {config_path!r}: {exc}") from exc
        try:
            file_values = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {config_path!r} is not valid JSON: {exc}") from exc
        if not isinstance(file_values, dict):
            raise UsageError(f"config file {config_path!r} must hold a JSON object")
        unknown = set(file_values) - set(merged)
        if unknown:
            raise UsageError(
                f"unknown config keys for {command}: {sorted(unknown)}; "
                f"known keys: {sorted(merged)}"
            )
        merged.update(file_values)
        explicit = set(file_values) | set(cli_values)
    else:
        explicit = set(cli_values)
    merged.update(cli_values)
    for key in _REQUIRED[command]:
        if merged.get(key) is None:
            raise UsageError(f"missing required option --{key.replace('_', '-')}")
    merged["_explicit"] = explicit
    return merged


def _out_root(cfg: dict) -> Path:
    root = cfg.get("out_root")
    if root is None:
        root = os.environ.get("WEEP_OUT_ROOT", "runs")
    return Path(root)


def _fresh_run_dir(cfg: dict, command: str) -> Path:
    run_dir = _out_root(cfg) / f"{command}-seed{int(cfg['seed'])}"
    if run_dir.exists():
        shutil.rmtree(run_dir)
    return run_dir


def _write_failure_marker(run_dir: Path, exc: BaseException) -> None:
    try:
        if run_dir.exists():
            shutil.rmtree(run_dir)
        run_dir.mkdir(parents=True)
        (run_dir / "FAILED.txt").write_text(
            f"{type(exc).__name__}: {exc}\n", encoding="utf-8"
        )
    except OSError:
        pass  # the original failure is what gets reported


def _build_methods(cfg: dict, ndim: int) -> list[DenoiseMethod]:
    penalty = cfg["penalty"]
    if penalty == "all":
        clash = cfg.get("_explicit", set()) & {"lam", "a", "b", "mcp_lam", "gamma", "solver"}
        if clash:
            flags = ", ".join("--" + k.replace("_", "-").replace("lam", "lambda", 1)
                              if k == "lam" else "--" + k.replace("_", "-")
                              for k in sorted(clash))
            raise UsageError(f"{flags} requires a single --penalty, not all")
        return default_denoise_methods(ndim=ndim)

    defaults = {m.penalty: m for m in default_denoise_methods(ndim=ndim)}
    base = defaults[penalty]
    lam = cfg["lam"] if cfg.get("lam") is not None else base.lam
    if penalty == "weep":
        params = {"a": cfg["a"], "b": cfg["b"]}
    elif penalty == "mcp":
        params = {"mcp_lam": cfg["mcp_lam"], "gamma": cfg["gamma"]}
    else:
        params = {}

    solver = cfg["solver"]
    natural = {"l2": "closed_form", "l1": "admm", "mcp": "admm"}
    if penalty == "weep":
        solvers = ["admm", "lbfgs"] if solver == "auto" else [solver.replace("-", "_")]
    else:
        solvers = [natural[penalty]] if solver == "auto" else [solver.replace("-", "_")]
    methods = [DenoiseMethod(penalty, s, lam, params) for s in solvers]
    for m in methods:
        try:
            m.validate()
            _build_penalty(m)  # surface domain errors before any computation
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    return methods


def _solver_cfgs(cfg: dict) -> tuple[AdmmConfig, LbfgsConfig]:
    try:
        admm = AdmmConfig(rho=cfg["rho"], max_iter=cfg["admm_iters"],
                          tol_primal=cfg["admm_tol"], tol_dual=cfg["admm_tol"])
        lbfgs = LbfgsConfig(max_iter=cfg["lbfgs_iters"], grad_tol=cfg["grad_tol"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return admm, lbfgs


def _cmd_penalty_table(cfg: dict) -> int:
    try:
        params = derive_weep_params(cfg["a"], cfg["b"])
        lo, hi = cfg["range"]
        step = float(cfg["step_size"])
        lam = float(cfg["lam"])
        if not (math.isfinite(step) and step > 0.0):
            raise ValueError(f"step-size must be positive, got {step!r}")
        if not lo < hi:
            raise ValueError(f"empty range [{lo}, {hi}]")
        if not 0.0 < lam < 1.0:
            raise ValueError(f"lambda must lie in (0, 1) for the prox column, got {lam!r}")
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    xs = [lo + i * step for i in range(count)]
    rows = [
        {
            "x": x,
            "h": base_value(params, x),
            "weep": weep_value(params, x),
            "grad": weep_grad(params, x),
            "prox": weep_prox(params, lam, x),
        }
        for x in xs
    ]
    out = Path(cfg["out"])
    if out.parent != Path("."):
        out.parent.mkdir(parents=True, exist_ok=True)
    write_table_csv(out, rows, ["x", "h", "weep", "grad", "prox"])
    print(f"wrote {out} ({count} rows)")
    return EXIT_OK


def _cmd_denoise1d(cfg: dict) -> int:
    methods = _build_methods(cfg, ndim=1)
    admm_cfg, lbfgs_cfg = _solver_cfgs(cfg)
    run_dir = _fresh_run_dir(cfg, "denoise1d")
    try:
        reports = run_denoise_1d(cfg["sigma"], cfg["seed"], methods=methods,
                                 admm_cfg=admm_cfg, lbfgs_cfg=lbfgs_cfg,
                                 out_dir=run_dir)
    except Exception as exc:
        _write_failure_marker(run_dir, exc)
        raise
    for r in reports:
        print(f"{r.method} [{r.solver}] psnr={r.metrics['psnr']:.4f} dB")
    print(f"wrote {run_dir / 'report.json'}")
    return EXIT_OK


def _cmd_denoise2d(cfg: dict) -> int:
    image = read_image(cfg["image"])
    methods = _build_methods(cfg, ndim=2)
    admm_cfg, lbfgs_cfg = _solver_cfgs(cfg)
    run_dir = _fresh_run_dir(cfg, "denoise2d")
    try:
        reports = run_denoise_2d(image, cfg["sigma"], cfg["seed"], methods=methods,
                                 admm_cfg=admm_cfg, lbfgs_cfg=lbfgs_cfg,
                                 out_dir=run_dir)
    except Exception as exc:
        _write_failure_marker(run_dir, exc)
        raise
    for r in reports:
        print(f"{r.method} [{r.solver}] psnr={r.metrics['psnr']:.4f} dB "
              f"ssim={r.metrics['ssim']:.4f}")
    print(f"wrote {run_dir / 'report.json'}")
    return EXIT_OK


def _cmd_robust_reg(cfg: dict) -> int:
    losses = tuple(s.strip() for s in str(cfg["losses"]).split(",") if s.strip())
    known = {"l2sq", "huber", "tukey", "weep"}
    if not losses or not set(losses) <= known:
        raise UsageError(f"--losses must be a comma list from {sorted(known)}")
    try:
        lbfgs_cfg = LbfgsConfig(max_iter=cfg["lbfgs_iters"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    run_dir = _fresh_run_dir(cfg, "robust-reg")
    try:
        summary = monte_carlo_regression(cfg["trials"], n=cfg["n"],
                                         outlier_frac=cfg["outlier_frac"],
                                         seed=cfg["seed"], losses=losses,
                                         lbfgs_cfg=lbfgs_cfg, out_dir=run_dir)
    except Exception as exc:
        _write_failure_marker(run_dir, exc)
        raise
    for kind, row in summary["methods"].items():
        w1 = row["w1"]["median"]
        err = row["w1_abs_err"]["median"]
        mae_med = row["test_mae"]["median"]
        print(f"{kind}: median w1={w1:.4f}, median |w1 err|={err:.4f}, "
              f"median test MAE={mae_med:.4f}, failed={row['failed']}")
    print(f"wrote {run_dir / 'summary.json'}")
    return EXIT_OK


def _grid_for(cfg: dict) -> list[dict]:
    lam_values = _floats_csv(str(cfg["lam_grid"]))
    penalty = cfg["penalty"]
    if penalty == "weep":
        return cartesian_grid(lam=lam_values,
                              a=_floats_csv(str(cfg["a_grid"])),
                              b=_floats_csv(str(cfg["b_grid"])))
    if penalty == "mcp":
        return cartesian_grid(lam=lam_values,
                              mcp_lam=_floats_csv(str(cfg["mcp_lam_grid"])),
                              gamma=_floats_csv(str(cfg["gamma_grid"])))
    return cartesian_grid(lam=lam_values)


def _cmd_grid_search(cfg: dict) -> int:
    penalty = cfg["penalty"]
    solver = cfg["solver"]
    if solver == "auto":
        solver = {"l2": "closed_form", "l1": "admm", "mcp": "admm",
                  "weep": "lbfgs"}[penalty]
    else:
        solver = solver.replace("-", "_")
    grid = _grid_for(cfg)
    admm_cfg, lbfgs_cfg = _solver_cfgs(cfg)
    metric = cfg["metric"]

    if cfg["task"] == "denoise1d":
        if metric == "ssim":
            raise UsageError("ssim is a 2-D metric; use --metric psnr for denoise1d")
        sig_seed, noise_seed = child_seeds(cfg["seed"], 2)
        clean = gen_test_signal(sig_seed)
        noisy = add_gaussian_noise(clean, cfg["sigma"], noise_seed)
        peak = float(clean.max() - clean.min())
    else:
        if cfg.get("image") is None:
            raise UsageError("grid-search on denoise2d requires --image")
        clean = read_image(cfg["image"])
        (noise_seed,) = child_seeds(cfg["seed"], 1)
        noisy = add_gaussian_noise(clean, cfg["sigma"], noise_seed)
        peak = 255.0

    run_dir = _fresh_run_dir(cfg, "grid-search")
    try:
        best, table = grid_search(noisy, clean, penalty, solver, grid,
                                  metric=metric, peak=peak,
                                  admm_cfg=admm_cfg, lbfgs_cfg=lbfgs_cfg)
        run_dir.mkdir(parents=True, exist_ok=True)
        columns = list(grid[0].keys()) + [metric]
        write_table_csv(run_dir / "grid_table.csv", table, columns)
        write_json(run_dir / "best.json", {
            "experiment": "grid-search",
            "task": cfg["task"],
            "penalty": penalty,
            "solver": solver,
            "metric": metric,
            "seed": cfg["seed"],
            "sigma": cfg["sigma"],
            "best": best,
        })
    except Exception as exc:
        _write_failure_marker(run_dir, exc)
        raise
    best_str = ", ".join(f"{k}={v}" for k, v in best.items())
    print(f"best {penalty} [{solver}] by {metric}: {best_str}")
    print(f"wrote {run_dir / 'grid_table.csv'} ({len(table)} rows)")
    return EXIT_OK


_COMMANDS = {
    "penalty-table": _cmd_penalty_table,
    "denoise1d": _cmd_denoise1d,
    "denoise2d": _cmd_denoise2d,
    "robust-reg": _cmd_robust_reg,
    "grid-search": _cmd_grid_search,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        cfg = _merge_config(ns.command, ns)
        return _COMMANDS[ns.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, PenaltyCapabilityError) as exc:
        # Domain/capability problems trace back to the configuration.
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
