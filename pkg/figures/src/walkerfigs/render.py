"""Render the five standard densification figures from sweep/bounds CSVs.

A pure read-only consumer of the simulator's CSV interfaces: every plotted
number comes verbatim from the files (normalized-ratio panels divide CSV
columns by CSV constants; nothing is re-simulated).  Output is
deterministic for fixed inputs.
"""

from __future__ import annotations

import argparse
import csv
import sys
import warnings
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

FIGURE_IDS = (
    "serving_distance",
    "interference_growth",
    "coverage",
    "spectral_efficiency",
    "scaling_check",
)

# sweep.csv interface: CI columns may be absent (plots degrade to lines)
SWEEP_REQUIRED = [
    "n_o", "n_s", "n_total", "policy", "q",
    "p_cov", "c_erg", "mean_I_over_p", "mean_D0_km", "drops", "outage_frac", "guide",
]
SWEEP_CI = ["p_cov_lo", "p_cov_hi", "c_erg_lo", "c_erg_hi"]

# bounds.csv interface: only the scaling-check normalizers are consumed
BOUNDS_REQUIRED = ["k_thin", "k_erg"]

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")


class SchemaError(ValueError):
    def __init__(self, path: str, missing: list[str]):
        super().__init__(f"{path}: missing columns: {', '.join(missing)}")
        self.missing = missing


@dataclass
class FigureSpec:
    figure_id: str
    sweep_csv: str
    out_path: str
    bounds_csv: str | None = None
    policies: tuple[str, ...] = ()  # empty filter draws every policy
    log_x: bool = True

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise ValueError(f"unknown figure id {self.figure_id!r}; choose from {FIGURE_IDS}")
        if self.figure_id == "scaling_check" and not self.bounds_csv:
            raise ValueError("scaling_check needs a bounds CSV for the normalizing constants")


def _read_csv(path: str, required: list[str]) -> list[dict]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        missing = [c for c in required if c not in (reader.fieldnames or [])]
        if missing:
            raise SchemaError(path, missing)
        return [dict(row) for row in reader]


def load_sweep(path: str) -> tuple[list[dict], bool]:
    """Rows plus a flag for whether CI columns are available."""
    rows = _read_csv(path, SWEEP_REQUIRED)
    have_ci = bool(rows) and all(c in rows[0] for c in SWEEP_CI)
    if not have_ci:
        warnings.warn(f"{path}: confidence-interval columns absent; drawing lines only")
    numeric = SWEEP_REQUIRED + (SWEEP_CI if have_ci else [])
    for row in rows:
        for key in numeric:
            if key != "policy":
                row[key] = float(row[key])
    return rows, have_ci


def load_bound_constants(path: str) -> dict[str, float]:
    rows = _read_csv(path, BOUNDS_REQUIRED)
    if not rows:
        raise SchemaError(path, ["<no data rows>"])
    return {key: float(rows[0][key]) for key in BOUNDS_REQUIRED}


def _policy_series(rows: list[dict], policies: tuple[str, ...]):
    seen = []
    for row in rows:
        if row["policy"] not in seen:
            seen.append(row["policy"])
    selected = [p for p in seen if not policies or p in policies]
    for idx, policy in enumerate(selected):
        series = sorted((r for r in rows if r["policy"] == policy), key=lambda r: r["n_total"])
        yield policy, PALETTE[idx % len(PALETTE)], series


def _style():
    plt.rcParams.update({
        "figure.figsize": (4.2, 3.2),
        "figure.dpi": 110,
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "grid.linestyle": "--",
        "lines.linewidth": 1.3,
        "lines.markersize": 3.5,
        "legend.fontsize": 7.5,
        "svg.hashsalt": "walkerfigs",
    })


def build_figure(spec: FigureSpec):
    """Assemble the matplotlib figure without writing it (testable)."""
    _style()
    rows, have_ci = load_sweep(spec.sweep_csv)
    builders = {
        "serving_distance": _build_serving_distance,
        "interference_growth": _build_interference_growth,
        "coverage": _build_coverage,
        "spectral_efficiency": _build_spectral_efficiency,
        "scaling_check": _build_scaling_check,
    }
    return builders[spec.figure_id](spec, rows, have_ci)


def _finish(ax, spec, xlabel="total satellites N", legend=True):
    if spec.log_x:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    if legend:
        ax.legend()


def _build_serving_distance(spec, rows, have_ci):
    fig, ax = plt.subplots()
    for policy, color, series in _policy_series(rows, spec.policies):
        n = [r["n_total"] for r in series]
        ax.plot(n, [r["mean_D0_km"] for r in series], "o-", color=color, label=policy)
    ax.set_ylabel("mean serving distance [km]")
    ax.set_title("Serving distance vs densification")
    _finish(ax, spec)
    return fig


def _build_interference_growth(spec, rows, have_ci):
    fig, ax = plt.subplots()
    for policy, color, series in _policy_series(rows, spec.policies):
        n = [r["n_total"] for r in series]
        ax.plot(n, [r["mean_I_over_p"] for r in series], "o-", color=color, label=policy)
    ax.set_yscale("log")
    ax.set_ylabel("mean interference / p")
    ax.set_title("Interference growth vs N")
    _finish(ax, spec)
    return fig


def _band(ax, n, lo, hi, color):
    ax.fill_between(n, lo, hi, color=color, alpha=0.18, linewidth=0)


def _build_coverage(spec, rows, have_ci):
    fig, ax = plt.subplots()
    for policy, color, series in _policy_series(rows, spec.policies):
        n = [r["n_total"] for r in series]
        ax.plot(n, [r["p_cov"] for r in series], "o-", color=color, label=policy)
        if have_ci:
            _band(ax, n, [r["p_cov_lo"] for r in series], [r["p_cov_hi"] for r in series], color)
        ax.plot(n, [r["guide"] for r in series], ":", color=color, alpha=0.7,
                label=f"{policy} 1/(qN) guide")
    ax.set_yscale("log")
    ax.set_ylabel("coverage probability")
    ax.set_title("Coverage vs densification")
    _finish(ax, spec)
    return fig


def _build_spectral_efficiency(spec, rows, have_ci):
    fig, ax = plt.subplots()
    for policy, color, series in _policy_series(rows, spec.policies):
        n = [r["n_total"] for r in series]
        c = [r["c_erg"] for r in series]
        ax.plot(n, c, "o-", color=color, label=policy)
        if have_ci:
            _band(ax, n, [r["c_erg_lo"] for r in series], [r["c_erg_hi"] for r in series], color)
        # same 1/(qN) guide, re-anchored to the first rate point for display
        guides = np.array([r["guide"] for r in series])
        if guides[0] > 0 and c[0] > 0:
            ax.plot(n, guides * (c[0] / guides[0]), ":", color=color, alpha=0.7,
                    label=f"{policy} 1/(qN) guide")
    ax.set_ylabel("ergodic spectral efficiency [bit/s/Hz]")
    ax.set_title("Spectral efficiency vs densification")
    _finish(ax, spec)
    return fig


def _build_scaling_check(spec, rows, have_ci):
    constants = load_bound_constants(spec.bounds_csv)
    fig, (ax_cov, ax_erg) = plt.subplots(1, 2, figsize=(8.0, 3.2))
    for policy, color, series in _policy_series(rows, spec.policies):
        n = [r["n_total"] for r in series]
        qn = np.array([r["q"] * r["n_total"] for r in series])
        ax_cov.plot(n, qn * [r["p_cov"] for r in series] / constants["k_thin"],
                    "o-", color=color, label=policy)
        ax_erg.plot(n, qn * [r["c_erg"] for r in series] / constants["k_erg"],
                    "o-", color=color, label=policy)
    for ax, label in ((ax_cov, "qN P_cov / K_thin"), (ax_erg, "qN C_erg / K_erg")):
        ax.axhline(1.0, color="k", linewidth=0.8, linestyle="-")
        ax.set_yscale("log")
        ax.set_ylabel(label)
        _finish(ax, spec)
    fig.suptitle("Normalized scaling ratios stay below 1")
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> str:
    """Build and write the figure; returns the output path."""
    fig = build_figure(spec)
    metadata = {"Date": None} if spec.out_path.endswith(".svg") else None
    fig.savefig(spec.out_path, metadata=metadata)
    plt.close(fig)
    return spec.out_path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="walkerfigs", description="Render densification figures from sweep CSVs."
    )
    parser.add_argument("figure_id", choices=FIGURE_IDS)
    parser.add_argument("--sweep", required=True, help="sweep CSV path")
    parser.add_argument("--bounds", help="bounds CSV path (needed for scaling_check)")
    parser.add_argument("--out", required=True, help="output image path (.svg default idiom)")
    parser.add_argument("--policies", default="", help="comma filter; empty draws all")
    args = parser.parse_args(argv)
    policies = tuple(p for p in args.policies.split(",") if p)
    try:
        spec = FigureSpec(
            figure_id=args.figure_id,
            sweep_csv=args.sweep,
            bounds_csv=args.bounds,
            out_path=args.out,
            policies=policies,
        )
        render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
