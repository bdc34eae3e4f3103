"""Figure builders over the teleport CLI's CSV tables."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGURE_KINDS = ("fig3", "loss_scaling", "wcs_ratios")

_REQUIRED_COLUMNS = {
    "fig3": (
        "nbar",
        "F_order2",
        "F_order1",
        "Padd_order2",
        "Padd_order1",
        "F_sim",
        "threshold_line",
    ),
    "loss_scaling": ("scenario", "T", "outcome", "weight", "fidelity"),
    "wcs_ratios": ("n_blue", "n_res", "sector_weight", "mplus_weight", "mminus_weight"),
}


class MissingColumnError(ValueError):
    """The input CSV does not satisfy the column contract."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    input_csv: str | Path
    output_image: str | Path
    overlay_path: str | Path | None = None

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"kind must be one of {FIGURE_KINDS}, got {self.kind!r}")

    @property
    def overlay(self) -> Path:
        if self.overlay_path is not None:
            return Path(self.overlay_path)
        return Path(str(self.output_image) + ".overlay.json")


def _read_rows(spec: FigureSpec) -> list[dict]:
    with open(spec.input_csv, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in _REQUIRED_COLUMNS[spec.kind] if c not in header]
        if missing:
            raise MissingColumnError(
                f"{spec.input_csv} is missing required column(s): {', '.join(missing)}"
            )
        rows = list(reader)
    if not rows:
        raise MissingColumnError(f"{spec.input_csv} holds no data rows")
    return rows


def _interpolate_crossing(x: np.ndarray, y: np.ndarray, level: float) -> float | None:
    """First x where the piecewise-linear y(x) crosses the level."""
    for i in range(len(x) - 1):
        y0, y1 = y[i] - level, y[i + 1] - level
        if y0 == 0.0:
            return float(x[i])
        if y0 * y1 < 0.0:
            return float(x[i] + (x[i + 1] - x[i]) * y0 / (y0 - y1))
    return None


def _render_fig3(spec: FigureSpec, rows: list[dict]) -> dict:
    nbar = np.array([float(r["nbar"]) for r in rows])
    series = {
        key: np.array([float(r[key]) for r in rows])
        for key in ("F_order2", "F_order1", "Padd_order2", "Padd_order1", "F_sim")
    }
    threshold = float(rows[0]["threshold_line"])

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot(nbar, series["F_order2"], color="tab:blue", lw=1.8, label="fidelity")
    ax.plot(nbar, series["F_order1"], color="tab:blue", lw=1.4, ls="--")
    ax.plot(nbar, series["Padd_order2"], color="tab:red", lw=1.8, label="extra-term weight")
    ax.plot(nbar, series["Padd_order1"], color="tab:red", lw=1.4, ls="--")
    ax.axhline(threshold, color="gray", lw=1.2)
    ax.plot(nbar, series["F_sim"], color="tab:blue", ls="none", marker=".", ms=3.5)
    ax.set_xlabel(r"initial thermal occupation $\bar{n}_0$")
    ax.set_ylabel("probability")
    ax.set_xlim(nbar.min(), nbar.max())
    ax.set_ylim(0.0, 1.02)
    ax.legend(loc="center right", frameon=False)
    fig.tight_layout()
    fig.savefig(spec.output_image, dpi=150)
    plt.close(fig)

    crossing = _interpolate_crossing(nbar, series["F_order2"], threshold)
    return {
        "kind": "fig3",
        "threshold": threshold,
        "crossing_nbar": crossing,
        "n_points": len(nbar),
        "nbar": nbar.tolist(),
        "series": {k: v.tolist() for k, v in series.items()},
    }


def _render_loss_scaling(spec: FigureSpec, rows: list[dict]) -> dict:
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    overlay_curves = {}
    for scenario in sorted({r["scenario"] for r in rows}):
        picked = [r for r in rows if r["scenario"] == scenario and r["outcome"] == "MPlus"]
        if not picked:
            continue
        t = np.array([float(r["T"]) for r in picked])
        w = np.array([float(r["weight"]) for r in picked])
        order = np.argsort(t)
        t, w = t[order], w[order]
        ax.plot(t, w, marker="o", ms=4, label=scenario)
        # fitted power law distinguishes the linear from the quadratic scaling
        exponent = float(np.polyfit(np.log(t), np.log(w), 1)[0]) if len(t) > 1 else None
        overlay_curves[scenario] = {"T": t.tolist(), "weight": w.tolist(), "exponent": exponent}
    ax.set_xlabel("transmittance T")
    ax.set_ylabel("herald weight")
    ax.set_xlim(0.0, 1.02)
    ax.set_ylim(bottom=0.0)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(spec.output_image, dpi=150)
    plt.close(fig)
    return {"kind": "loss_scaling", "curves": overlay_curves}


def _render_wcs_ratios(spec: FigureSpec, rows: list[dict]) -> dict:
    sectors = {}
    for r in rows:
        key = (int(r["n_blue"]), int(r["n_res"]))
        sectors[key] = {
            "weight": float(r["sector_weight"]),
            "herald": float(r["mplus_weight"]) + float(r["mminus_weight"]),
        }
    base = sectors.get((1, 1), {}).get("weight", 0.0)
    if base <= 0.0:
        raise MissingColumnError("wcs table lacks a populated (1,1) sector")
    order = [(1, 1), (1, 2), (2, 1), (2, 2)]
    labels = [f"({b},{r})" for b, r in order]
    ratios = [sectors[s]["weight"] / base if s in sectors else 0.0 for s in order]

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.bar(labels, ratios, color="tab:purple")
    ax.set_yscale("log")
    ax.set_xlabel("pump/input photon sector")
    ax.set_ylabel("weight relative to the (1,1) sector")
    fig.tight_layout()
    fig.savefig(spec.output_image, dpi=150)
    plt.close(fig)
    return {
        "kind": "wcs_ratios",
        "ratios": dict(zip(labels, ratios)),
        "sectors": {f"{b},{r}": v for (b, r), v in sectors.items()},
    }


def render(spec: FigureSpec) -> dict:
    """Render the figure and write the coordinate overlay; returns the overlay."""
    rows = _read_rows(spec)
    out_parent = Path(spec.output_image).parent
    if str(out_parent) not in ("", "."):
        out_parent.mkdir(parents=True, exist_ok=True)
    if spec.kind == "fig3":
        overlay = _render_fig3(spec, rows)
    elif spec.kind == "loss_scaling":
        overlay = _render_loss_scaling(spec, rows)
    else:
        overlay = _render_wcs_ratios(spec, rows)
    with open(spec.overlay, "w", newline="\n") as fh:
        json.dump(overlay, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return overlay
