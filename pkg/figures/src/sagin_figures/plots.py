"""Strategy-comparison figures from sweep CSVs.

Reads the simulator's output schema only; no simulator imports.  Each figure
plots one metric against population size with one series per strategy, the
replication mean as the line and the min-max band as shading.
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

DEFAULT_STRATEGY_ORDER = ("optimal", "evolutionary", "random", "nearest", "fixed")

#: figure name -> (CSV column, y-axis label)
FIGURES = {
    "utility": ("normalized_utility", "normalized average utility"),
    "risk": ("mean_risk_probability", "mean risk probability"),
    "delay": ("mean_queuing_delay", "mean queuing delay (s)"),
}


class SchemaError(ValueError):
    """Input CSV does not match the sweep schema; message names the column."""


@dataclass(frozen=True)
class PlotSpec:
    input_csv: Path
    figure: str
    output_image: Path
    strategy_order: tuple[str, ...] = DEFAULT_STRATEGY_ORDER

    def __post_init__(self):
        if self.figure not in FIGURES:
            raise ValueError(f"figure must be one of {sorted(FIGURES)}, got {self.figure!r}")
        object.__setattr__(self, "input_csv", Path(self.input_csv))
        object.__setattr__(self, "output_image", Path(self.output_image))


def load_rows(path: Path, metric_column: str) -> dict[str, dict[int, list[float]]]:
    """Per-strategy metric values grouped by population size."""
    series: dict[str, dict[int, list[float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in ("strategy", "n_devices", metric_column):
            if column not in header:
                raise SchemaError(f"missing column {column!r} in {path}")
        for row in reader:
            by_n = series.setdefault(row["strategy"], {})
            by_n.setdefault(int(row["n_devices"]), []).append(float(row[metric_column]))
    return series


def render(spec: PlotSpec) -> Path:
    """Draw one figure; deterministic bytes for identical input."""
    column, ylabel = FIGURES[spec.figure]
    series = load_rows(spec.input_csv, column)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    drawn = 0
    ordered = [s for s in spec.strategy_order if s in series]
    ordered += sorted(set(series) - set(ordered))  # unknown names still plot
    for name in ordered:
        by_n = series[name]
        ns = np.array(sorted(by_n))
        mean = np.array([np.mean(by_n[n]) for n in ns])
        lo = np.array([np.min(by_n[n]) for n in ns])
        hi = np.array([np.max(by_n[n]) for n in ns])
        (line,) = ax.plot(ns, mean, marker="o", markersize=3.5, label=name)
        ax.fill_between(ns, lo, hi, alpha=0.15, color=line.get_color(), linewidth=0)
        drawn += 1
    ax.set_xlabel("number of devices")
    ax.set_ylabel(ylabel)
    if drawn:
        ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    spec.output_image.parent.mkdir(parents=True, exist_ok=True)
    # strip the Software tag so output bytes depend only on the input CSV
    fig.savefig(spec.output_image, dpi=150, metadata={"Software": None})
    plt.close(fig)
    return spec.output_image


def render_all(input_csv: Path, outdir: Path) -> list[Path]:
    return [
        render(PlotSpec(input_csv=input_csv, figure=name, output_image=Path(outdir) / f"{name}.png"))
        for name in FIGURES
    ]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="render_figures", description=__doc__)
    parser.add_argument("--csv", required=True, help="sweep CSV from the simulator")
    parser.add_argument("--outdir", required=True, help="directory for utility/risk/delay PNGs")
    args = parser.parse_args(argv)
    try:
        paths = render_all(Path(args.csv), Path(args.outdir))
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    for p in paths:
        print(f"wrote {p}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
