"""Log-log convergence figures with fitted-slope legend annotations."""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .reader import ConvergeRow, read_converge_csv

ROUND_OFF_FLOOR = 1e-11


@dataclass(frozen=True)
class FigureSpec:
    input_csvs: tuple[str, ...]
    labels: tuple[str, ...]
    reference_slopes: tuple[int, ...] = ()
    output: str = "figure.svg"

    def __post_init__(self):
        if len(self.labels) != len(self.input_csvs):
            raise ValueError(
                f"{len(self.input_csvs)} input files but {len(self.labels)} labels")
        if any(s <= 0 for s in self.reference_slopes):
            raise ValueError("reference slopes must be positive")


def fit_slope(rows: list[ConvergeRow], floor: float = ROUND_OFF_FLOOR) -> float:
    """Least-squares slope of log2(error) against log2(n), ignoring rows at
    the round-off floor. Positive for a converging series."""
    pts = [(row.n, row.max_error) for row in rows if row.max_error > floor]
    if len(pts) < 2:
        raise ValueError("need at least two rows above the round-off floor")
    ns = np.log2([p[0] for p in pts])
    errs = np.log2([p[1] for p in pts])
    return -float(np.polyfit(ns, errs, 1)[0])


def render(spec: FigureSpec) -> dict[str, float]:
    """Draw the figure and return each label's fitted slope.

    Same inputs give byte-identical SVG output: text stays text (no font
    paths), the hash salt is pinned, and no timestamp metadata is written.
    """
    series = [(label, read_converge_csv(path))
              for label, path in zip(spec.labels, spec.input_csvs)]
    slopes = {label: fit_slope(rows) for label, rows in series}

    with plt.rc_context({"svg.fonttype": "none", "svg.hashsalt": "convergence-plots"}):
        fig, ax = plt.subplots(figsize=(7.0, 5.0))
        for label, rows in series:
            ns = [row.n for row in rows]
            errs = [row.max_error for row in rows]
            ax.loglog(ns, errs, marker="o",
                      label=f"{label} (slope {slopes[label]:.2f})")

        anchor_rows = series[0][1]
        n0, e0 = anchor_rows[-1].n, anchor_rows[-1].max_error
        ns_all = sorted({row.n for _, rows in series for row in rows})
        for s in spec.reference_slopes:
            guide = [e0 * (n / n0) ** (-s) for n in ns_all]
            ax.loglog(ns_all, guide, linestyle="--", color="gray",
                      label=f"slope {s} guide")

        ax.set_xlabel("grid points n")
        ax.set_ylabel("global error (max norm)")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
        fig.tight_layout()
        fig.savefig(spec.output, metadata=_metadata_for(spec.output))
        plt.close(fig)
    return slopes


def _metadata_for(path: str) -> dict | None:
    if path.endswith(".svg"):
        return {"Date": None}
    return None
