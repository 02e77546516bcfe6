#!/usr/bin/env python3
"""Su-Olson panels: rho, theta and eps*J/rho per initial level A.

Usage: plot_suolson.py OUTDIR [TIME]
"""
import re
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd


def main() -> None:
    outdir = Path(sys.argv[1])
    runs = {}
    for p in outdir.glob("snapshot_*_a*_t*.csv"):
        m = re.match(r"snapshot_(.+)_a(.+)_t([^_]+)$", p.stem)
        if m:
            runs.setdefault(m.group(2), {})[m.group(1)] = p
    time = sys.argv[2] if len(sys.argv) > 2 else "1"
    fig, axes = plt.subplots(len(runs), 3, figsize=(13, 4 * len(runs)), squeeze=False)
    for row, (a, methods) in enumerate(sorted(runs.items())):
        for name, path in sorted(methods.items()):
            df = pd.read_csv(path)
            fr = pd.read_csv(outdir / f"fluxratio_{name}_a{a}_t{time}.csv")
            axes[row][0].plot(df.x, df.rho, label=name)
            axes[row][1].plot(df.x, df.theta, label=name)
            axes[row][2].plot(fr.x, fr.eps_J_over_rho, label=name)
        for col, ylab in enumerate(["rho", "theta", "eps*J/rho"]):
            axes[row][col].set_xlabel("x")
            axes[row][col].set_ylabel(ylab)
            axes[row][col].set_title(f"A = {a}")
            axes[row][col].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(outdir / "suolson.png", dpi=150)
    print(outdir / "suolson.png")


if __name__ == "__main__":
    main()
