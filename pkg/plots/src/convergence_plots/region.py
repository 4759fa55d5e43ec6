"""Bonus scatter rendering for stability-region CSVs."""

from __future__ import annotations

import csv

import matplotlib.pyplot as plt

from .reader import SchemaError

REGION_HEADER = ["re_mu", "im_mu", "stable", "excluded"]


def read_region_csv(path: str):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != REGION_HEADER:
            raise SchemaError(f"{path}: expected columns {REGION_HEADER}, got {header}")
        points = [(float(r[0]), float(r[1]), r[2] == "1", r[3] == "1")
                  for r in reader]
    if not points:
        raise SchemaError(f"{path}: no data rows after the header")
    return points


def render_region(paths, output: str) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    for path in paths:
        points = read_region_csv(path)
        stable = [(x, y) for x, y, s, e in points if s and not e]
        unstable = [(x, y) for x, y, s, e in points if not s]
        if stable:
            ax.scatter(*zip(*stable), s=2, color="tab:blue", label=f"{path} stable")
        if unstable:
            ax.scatter(*zip(*unstable), s=2, color="0.85")
    ax.set_xlabel("Re mu")
    ax.set_ylabel("Im mu")
    ax.set_aspect("equal")
    ax.legend(loc="upper left", fontsize="small")
    fig.tight_layout()
    fig.savefig(output)
    plt.close(fig)
