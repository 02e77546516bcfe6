#!/usr/bin/env python3
"""Plot amplification-symbol eigenvalues with their enclosing disks.

Usage: plot_spectrum.py OUTDIR [STEM ...]

STEM defaults to every spectrum_*.csv in OUTDIR; each gets one panel with
the matching disks_*.csv overlaid.
"""
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd


def main() -> None:
    outdir = Path(sys.argv[1])
    stems = sys.argv[2:] or sorted(
        p.stem.removeprefix("spectrum_") for p in outdir.glob("spectrum_*.csv")
    )
    fig, axes = plt.subplots(1, len(stems), figsize=(5 * len(stems), 5), squeeze=False)
    for ax, stem in zip(axes[0], stems):
        ev = pd.read_csv(outdir / f"spectrum_{stem}.csv")
        ax.scatter(ev.re, ev.im, s=6, c=ev.is_dominant, cmap="coolwarm")
        disks = outdir / f"disks_{stem}.csv"
        if disks.exists():
            for _, d in pd.read_csv(disks).iterrows():
                ax.add_patch(
                    plt.Circle((d.center_re, d.center_im), d.radius,
                               fill=False, ls="--", color="gray")
                )
        ax.axhline(0, lw=0.3, color="k")
        ax.set_title(stem)
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
        ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(outdir / "spectrum.png", dpi=150)
    print(outdir / "spectrum.png")


if __name__ == "__main__":
    main()
