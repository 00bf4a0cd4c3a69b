"""Regenerate the data, plotting scripts and renders of the reference figures.

Every panel gets a CSV (``fig2a.csv`` ... ``fig6c.csv``) with a leading
``series`` column naming the line family member (``gamma=0.5Gamma`` etc.).
One standalone matplotlib script per figure (``fig2.py`` ...) reads only
those CSVs; with ``render=True`` each script is executed to produce
``figN.png`` next to the data.
"""

from __future__ import annotations

import json
import math
import os
import subprocess
import sys
from pathlib import Path

from .io import RATIO_HEADER, SWEEP_HEADER, ratio_records, render_records, sweep_records
from .model import DEFAULT_CONVENTION, SensorParams, Topology, build_params
from .sweep import SweepSpec, compare_topologies, run_sweep, snr_peak_by_gamma
from .transfer import calibration_report, compare_noise_forms

GAMMA_FAMILY = (0.25, 0.5, 1.0, 2.0)
N_POINTS = 2001
DELTA_SPAN = 1.0  # Fig. 2 spans delta in [-1, 1] kappa
SNR_MULTIPLES = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0)

# panel -> (y columns, y label); x handling is per figure
PANELS = {
    "fig2": {"a": (["rel_signal"], "relative signal per photon"),
             "b": (["noise_total_re"], "relative noise"),
             "c": (["rel_snr"], "relative SNR per photon")},
    "fig3": {"a": (["rel_signal", "noise_total_re", "rel_snr"], "signal / noise / SNR"),
             "b": (["noise_gain", "noise_dissipative_re"], "reflective gain / dissipative loss")},
    "fig4": {"a": (["rel_signal"], "relative signal per photon"),
             "b": (["noise_total_re"], "Re(N)"),
             "c": (["rel_snr"], "relative SNR per photon")},
    "fig5": {"a": (["noise_gain"], "reflective gain"),
             "b": (["noise_dissipative_re"], "dissipative loss")},
    "fig6": {"a": (["s_ratio"], "S / S^S"),
             "b": (["n_ratio"], "Re(N) / N^S"),
             "c": (["snr_ratio"], "SNR / SNR^S")},
}
X_AXIS = {
    "fig2": (1.0, "delta / kappa"),
    "fig3": (None, "gamma / Gamma"),  # scaled by gamma_gain
    "fig4": (math.pi, "phi / pi"),
    "fig5": (math.pi, "phi / pi"),
    "fig6": (math.pi, "phi / pi"),
}

_SCRIPT = '''"""Plot {fig} from the CSV files in this directory."""
import csv
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
PANELS = {panels!r}
X_SCALE = {x_scale!r}
X_LABEL = {x_label!r}


def load(name):
    with open(os.path.join(HERE, name + ".csv"), newline="") as fh:
        return list(csv.DictReader(fh))


def main(out=None):
    fig, axes = plt.subplots(1, len(PANELS), figsize=(4.2 * len(PANELS), 3.4), squeeze=False)
    for ax, (panel, (columns, ylabel)) in zip(axes[0], sorted(PANELS.items())):
        rows = load("{fig}" + panel)
        series = []
        for r in rows:
            if r["series"] not in series:
                series.append(r["series"])
        for s in series:
            for col in columns:
                xs, ys = [], []
                for r in rows:
                    if r["series"] == s and r[col] != "":
                        xs.append(float(r["axis_value"]) / X_SCALE)
                        ys.append(float(r[col]))
                label = s if len(columns) == 1 else col + " " + s
                ax.plot(xs, ys, lw=1.2, label=label)
        ax.set_xlabel(X_LABEL)
        ax.set_ylabel(ylabel)
        ax.set_title("({{}})".format(panel), loc="left")
        ax.legend(fontsize=7, frameon=False)
    fig.tight_layout()
    fig.savefig(out or os.path.join(HERE, "{fig}.png"), dpi=120, metadata={{"Software": None}})


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
'''


def _series_label(multiple: float) -> str:
    return f"gamma={multiple:g}Gamma"


def _sweep_rows(spec: SweepSpec, label: str) -> list[dict]:
    records = sweep_records(run_sweep(spec))
    for rec in records:
        rec["series"] = label
    return records


def figure_data(base: SensorParams | None = None, n_points: int = N_POINTS,
                convention=DEFAULT_CONVENTION) -> dict:
    """Panel name -> (header, records) for every panel of Figs. 2-6."""
    base = base if base is not None else build_params()
    g0 = base.gamma_gain
    header = ("series",) + SWEEP_HEADER
    ratio_header = ("series",) + RATIO_HEADER
    data = {}

    fig2 = []
    for m in GAMMA_FAMILY:
        spec = SweepSpec("delta", -DELTA_SPAN, DELTA_SPAN, n_points, base.replace(gamma_loss=m * g0),
                         Topology.SMALL, convention)
        fig2 += _sweep_rows(spec, _series_label(m))
    for panel in PANELS["fig2"]:
        data["fig2" + panel] = (header, fig2)

    spec = SweepSpec("gamma_loss", 0.0, 2.0 * g0, n_points, base.replace(delta=0.0), Topology.SMALL,
                     convention)
    fig3 = _sweep_rows(spec, "small")
    for panel in PANELS["fig3"]:
        data["fig3" + panel] = (header, fig3)

    phi_rows = []
    ratio_rows = []
    for m in GAMMA_FAMILY:
        fixed = base.replace(delta=0.0, gamma_loss=m * g0)
        spec = SweepSpec("phi", 0.0, 2.0 * math.pi, n_points, fixed, Topology.GIANT, convention,
                         endpoint=False)
        phi_rows += _sweep_rows(spec, _series_label(m))
        for rec in ratio_records(compare_topologies(spec)):
            rec["series"] = _series_label(m)
            ratio_rows.append(rec)
    for fig in ("fig4", "fig5"):
        for panel in PANELS[fig]:
            data[fig + panel] = (header, phi_rows)
    for panel in PANELS["fig6"]:
        data["fig6" + panel] = (ratio_header, ratio_rows)
    return data


def snr_peaks(base: SensorParams | None = None, n_points: int = N_POINTS) -> dict:
    """Peak giant-cavity SNR over ``phi`` for a ladder of ``gamma / Gamma``.

    Two reference statements disagree on where this peak is largest (near
    ``gamma = Gamma`` versus at ``gamma = 4 Gamma``); both are reported here,
    neither is enforced.
    """
    base = base if base is not None else build_params()
    peaks = snr_peak_by_gamma(base.replace(delta=0.0), SNR_MULTIPLES, n_points)
    best = max(peaks, key=lambda m: peaks[m][0])
    return {
        "peaks": [{"gamma_over_Gamma": m, "snr": v, "phi_over_pi": phi / math.pi}
                  for m, (v, phi) in peaks.items()],
        "best_gamma_over_Gamma": best,
        "claim_maximum_near_Gamma": best == 1.0,
        "claim_maximum_at_4Gamma": best == 4.0,
    }


def noise_form_records(base: SensorParams | None = None, n_points: int = N_POINTS) -> list[dict]:
    """Reduced versus unreduced noise along ``phi`` for ``gamma = Gamma / 2``."""
    base = base if base is not None else build_params()
    p = base.replace(delta=0.0, gamma_loss=0.5 * base.gamma_gain)
    phis = [2.0 * math.pi * i / n_points for i in range(n_points)]
    scan = compare_noise_forms(p, phis)
    return [
        {"phi": float(phi), "reduced_re": float(r.real), "reduced_im": float(r.imag),
         "matrix_re": float(m.real), "matrix_im": float(m.imag), "agree": bool(a)}
        for phi, r, m, a in zip(scan["phi"], scan["reduced"], scan["matrix"], scan["agree"])
    ]


NOISE_FORM_HEADER = ("phi", "reduced_re", "reduced_im", "matrix_re", "matrix_im", "agree")


def script_source(fig: str, gamma_gain: float = 0.1) -> str:
    scale, label = X_AXIS[fig]
    if scale is None:
        scale = gamma_gain
    return _SCRIPT.format(fig=fig, panels=PANELS[fig], x_scale=scale, x_label=label)


def figures(out_dir, render: bool = True, base: SensorParams | None = None,
            n_points: int = N_POINTS) -> list[Path]:
    """Write panel CSVs, plotting scripts and (optionally) PNGs.

    Alongside go ``calibration.json`` (noise anchors under both transfer
    conventions), ``snr_peaks.json`` and ``noise_forms.csv``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = base if base is not None else build_params()
    written = []
    for name, (header, records) in figure_data(base, n_points).items():
        path = out / f"{name}.csv"
        path.write_text(render_records(records, header, "csv"))
        written.append(path)
    for fig in PANELS:
        path = out / f"{fig}.py"
        path.write_text(script_source(fig, base.gamma_gain))
        written.append(path)
    cal = calibration_report(base.gamma_gain)
    path = out / "calibration.json"
    path.write_text(json.dumps(cal.as_dict(), indent=1, sort_keys=True) + "\n")
    written.append(path)
    path = out / "snr_peaks.json"
    path.write_text(json.dumps(snr_peaks(base, n_points), indent=1) + "\n")
    written.append(path)
    path = out / "noise_forms.csv"
    path.write_text(render_records(noise_form_records(base, n_points), NOISE_FORM_HEADER, "csv"))
    written.append(path)
    if render:
        env = dict(os.environ, MPLBACKEND="Agg")
        for fig in PANELS:
            subprocess.run([sys.executable, str(out / f"{fig}.py")], check=True, env=env,
                           capture_output=True)
            written.append(out / f"{fig}.png")
    return written
