#!/usr/bin/env python3
"""Plot solver trace CSVs or a penalty table CSV.

Documentation helper, not a supported component.

    python scripts/plot_traces.py runs/denoise1d-seed42/trace_*.csv
    python scripts/plot_traces.py --table penalty_table.csv
"""

import argparse
import csv
import sys
from pathlib import Path

import matplotlib.pyplot as plt


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return rows


def plot_traces(paths, metric):
    fig, ax = plt.subplots()
    for path in paths:
        rows = read_csv(path)
        xs = [int(r["iter"]) for r in rows if r[metric]]
        ys = [float(r[metric]) for r in rows if r[metric]]
        ax.plot(xs, ys, label=Path(path).stem)
    ax.set_xlabel("iteration")
    ax.set_ylabel(metric)
    if metric == "objective":
        ax.set_yscale("log")
    ax.legend()
    return fig


def plot_table(path):
    rows = read_csv(path)
    xs = [float(r["x"]) for r in rows]
    fig, ax = plt.subplots()
    for col in ("h", "weep", "grad", "prox"):
        ax.plot(xs, [float(r[col]) for r in rows], label=col)
    ax.set_xlabel("x")
    ax.legend()
    return fig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csvs", nargs="+", help="trace CSVs (or one penalty table)")
    ap.add_argument("--table", action="store_true", help="plot a penalty table")
    ap.add_argument("--metric", default="objective",
                    choices=["objective", "psnr", "r_primal", "r_dual"])
    ap.add_argument("--out", default=None, help="save instead of showing")
    args = ap.parse_args(argv)

    fig = plot_table(args.csvs[0]) if args.table else plot_traces(args.csvs, args.metric)
    if args.out:
        fig.savefig(args.out, dpi=150, bbox_inches="tight")
        print(f"wrote {args.out}")
    else:
        plt.show()
    return 0


if __name__ == "__main__":
    sys.exit(main())
