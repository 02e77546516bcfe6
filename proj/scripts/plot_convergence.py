#!/usr/bin/env python3
"""Log-log error plots from a converge run.

Usage: plot_convergence.py OUTDIR [eps|dt]

'eps' plots err(eps) per label and time; 'dt' plots err(dt_outer). Default
guesses from the data (dt if dt_outer varies).
"""
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd


def main() -> None:
    outdir = Path(sys.argv[1])
    df = pd.read_csv(outdir / "errors.csv")
    axis = sys.argv[2] if len(sys.argv) > 2 else (
        "dt" if df.dt_outer.nunique() > df.eps.nunique() else "eps")
    x = df.dt_outer if axis == "dt" else df.eps
    df = df.assign(xval=x)
    fig, ax = plt.subplots(figsize=(6, 5))
    for (label, t), group in df.groupby(["label", "t"]):
        g = group.sort_values("xval")
        ax.loglog(g.xval, g.err_rho, "o-", label=f"{label} t={t}")
    # slope-1 and slope-2 guide lines anchored at the data's corner
    lo = df.xval.min()
    base = df.err_rho.min()
    for s in (1, 2):
        ax.loglog([lo, lo * 10], [base, base * 10**s], "k--", lw=0.5)
    ax.set_xlabel(axis)
    ax.set_ylabel("L2 error in rho")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(outdir / "convergence.png", dpi=150)
    print(outdir / "convergence.png")


if __name__ == "__main__":
    main()
