#!/usr/bin/env python3
"""Overlay density and flux snapshots from one output directory.

Usage: plot_snapshots.py OUTDIR [TIME]

Plots every snapshot_*_t<TIME>.csv (default: the largest time found).
"""
import re
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd


def main() -> None:
    outdir = Path(sys.argv[1])
    snaps = {}
    for p in outdir.glob("snapshot_*_t*.csv"):
        m = re.match(r"snapshot_(.+)_t([^_]+)$", p.stem)
        if m:
            snaps.setdefault(m.group(2), {})[m.group(1)] = p
    time = sys.argv[2] if len(sys.argv) > 2 else max(snaps, key=float)
    cols = ["rho", "J"]
    fig, axes = plt.subplots(1, len(cols), figsize=(11, 4))
    styles = {"inner": "-", "reference": "--", "projective": "-.", "heat": ":"}
    for name, path in sorted(snaps[time].items()):
        df = pd.read_csv(path)
        for ax, col in zip(axes, cols):
            if col in df:
                ax.plot(df.x, df[col], styles.get(name, "-"), label=name)
    for ax, col in zip(axes, cols):
        ax.set_xlabel("x")
        ax.set_ylabel(col)
        ax.legend()
    fig.suptitle(f"t = {time}")
    fig.tight_layout()
    fig.savefig(outdir / f"snapshots_t{time}.png", dpi=150)
    print(outdir / f"snapshots_t{time}.png")


if __name__ == "__main__":
    main()
