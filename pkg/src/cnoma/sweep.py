"""Power-axis sweeps over a grid of error models, with CSV and text report output."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from . import analytic, asymptotic
from .config import SweepSpec
from .errors import InfeasibleErrorVariance, ToleranceNotReached
from .model import ConstantVariance, PerfectCsi, ScaledVariance, config_for_power_sweep, derive
from .montecarlo import Quantity, estimates_from_counts, simulate_counts

CSV_COLUMNS = (
    "pt_db", "error_model", "eta_or_sigma", "feasible",
    "p_ue1_analytic", "p_ue1_mc", "p_ue1_mc_se",
    "p_ue2_ovr_exact", "p_ue2_ovr_approx", "p_ue2_mc", "p_ue2_mc_se",
    "p_un_ue1", "floor_ue1", "floor_ue2", "asym_ue1", "asym_ue2",
    "seed", "trials",
)
VALUE_COLUMNS = CSV_COLUMNS[4:16]
FLOOR_TOLERANCE = 1e-3


@dataclass
class SweepRow:
    pt_db: float
    error_model: str
    eta_or_sigma: float
    feasible: bool
    values: dict = field(default_factory=dict)
    seed: Optional[int] = None
    trials: Optional[int] = None
    degenerate: bool = False
    error: Optional[str] = None

    def get(self, column):
        return self.values.get(column)


def _point(spec: SweepSpec, model, pt_db, workers):
    row = SweepRow(pt_db=pt_db, error_model=model.kind, eta_or_sigma=model.parameter, feasible=True)
    cfg = config_for_power_sweep(replace(spec.base, error_model=model), pt_db, spec.relay_offset_db)
    try:
        d = derive(cfg)
    except InfeasibleErrorVariance as exc:
        row.feasible = False
        row.error = str(exc)
        return row
    row.degenerate = d.degenerate
    out = set(spec.outputs)
    v = row.values
    q = spec.quad
    try:
        if "ue1" in out:
            v["p_ue1_analytic"] = analytic.p_out_ue1(d).value
        if "ue2" in out:
            v["p_ue2_ovr_exact"] = analytic.p_ovr_ue2_exact(d, q).value
            v["p_ue2_ovr_approx"] = analytic.p_ovr_ue2_approx(d, q).value
        if "un_ue1" in out:
            v["p_un_ue1"] = analytic.p_un_ue1(d).value
        if "floors" in out and isinstance(model, ConstantVariance):
            v["floor_ue1"] = asymptotic.floor_ue1_const(d)
            v["floor_ue2"] = asymptotic.floor_ue2_const(d, q)
        if "asymptotes" in out and isinstance(model, (ScaledVariance, PerfectCsi)):
            # expansions in 1/rho: outside (0, 1) they carry no probability meaning
            a1 = asymptotic.asym_ue1_var(d)
            a2 = asymptotic.asym_ue2_var(asymptotic.AsymptoteInput.from_derived(d))
            if 0 < a1 < 1:
                v["asym_ue1"] = a1
            if not a2.negative and a2.value < 1:
                v["asym_ue2"] = a2.value
    except ToleranceNotReached as exc:
        row.error = f"numerical: {exc}"
    if spec.mc is not None and ("ue1" in out or "ue2" in out):
        d, counts = simulate_counts(cfg, spec.mc, workers)
        est = estimates_from_counts(d, counts, spec.mc)
        if "ue1" in out:
            v["p_ue1_mc"] = est[Quantity.UE1].p_hat
            v["p_ue1_mc_se"] = est[Quantity.UE1].std_err
        if "ue2" in out:
            v["p_ue2_mc"] = est[Quantity.UE2_OVERALL].p_hat
            v["p_ue2_mc_se"] = est[Quantity.UE2_OVERALL].std_err
        row.seed = spec.mc.seed
        row.trials = spec.mc.trials
    return row


def run_sweep(spec: SweepSpec, workers: int = 1):
    """One row per (error model, power) pair, in grid order.

    Infeasible points are flagged and carry no values; numerical failures are
    recorded on the row (``error``) without stopping the sweep.
    """
    return [
        _point(spec, model, pt, workers)
        for model in spec.error_model_grid
        for pt in spec.pt_grid()
    ]


def numerical_failures(rows):
    return [r for r in rows if r.error and r.error.startswith("numerical")]


# --- CSV -----------------------------------------------------------------------


def format_number(v) -> str:
    if v is None:
        return ""
    return f"{v:.11e}"


def _csv_record(row: SweepRow):
    rec = [
        format_number(row.pt_db),
        row.error_model,
        format_number(row.eta_or_sigma),
        "true" if row.feasible else "false",
    ]
    rec += [format_number(row.values.get(c)) if row.feasible else "" for c in VALUE_COLUMNS]
    rec += ["" if row.seed is None else str(row.seed), "" if row.trials is None else str(row.trials)]
    return rec


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow(_csv_record(row))
    return buf.getvalue()


def emit_csv(rows, path):
    if not rows:
        raise ValueError("no rows to write")
    Path(path).write_text(rows_to_csv(rows))


def read_csv(path):
    """Parse a sweep CSV back into :class:`SweepRow` objects."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
        rows = []
        for rec in reader:
            rows.append(SweepRow(
                pt_db=float(rec["pt_db"]),
                error_model=rec["error_model"],
                eta_or_sigma=float(rec["eta_or_sigma"]),
                feasible=rec["feasible"] == "true",
                values={c: float(rec[c]) for c in VALUE_COLUMNS if rec[c] != ""},
                seed=int(rec["seed"]) if rec["seed"] else None,
                trials=int(rec["trials"]) if rec["trials"] else None,
            ))
    return rows


# --- report --------------------------------------------------------------------


def group_rows(rows):
    groups = {}
    for r in rows:
        groups.setdefault((r.error_model, r.eta_or_sigma), []).append(r)
    return groups


def fit_column(rows, column, window=asymptotic.DEFAULT_WINDOW):
    lo, hi = window
    pts = [
        (r.pt_db, r.values[column])
        for r in sorted(rows, key=lambda r: r.pt_db)
        if r.feasible and lo <= r.pt_db <= hi and 0 < r.values.get(column, 0) < 1
    ]
    return asymptotic.fit_diversity_order(pts)


def floor_onset(rows, curve, floor, tol=FLOOR_TOLERANCE):
    """Smallest swept power from which ``|curve - floor| < tol`` holds to the end."""
    pts = sorted(
        (r.pt_db, abs(r.values[curve] - r.values[floor]))
        for r in rows
        if r.feasible and curve in r.values and floor in r.values
    )
    onset = None
    for pt, gap in reversed(pts):
        if gap < tol:
            onset = pt
        else:
            break
    return onset


def _label(kind, param):
    return "perfect" if kind == "perfect" else f"{kind}:{param:g}"


def build_report(rows) -> str:
    lines = ["# Outage sweep report", ""]
    for (kind, param), grp in group_rows(rows).items():
        feasible = [r for r in grp if r.feasible]
        lines.append(f"## {_label(kind, param)}")
        lines.append(f"points: {len(grp)} ({len(grp) - len(feasible)} infeasible)")
        for name, est, mc_col in (
            ("ue1", "p_ue1_analytic", "p_ue1_mc"),
            ("ue2 exact", "p_ue2_ovr_exact", "p_ue2_mc"),
            ("ue2 approx", "p_ue2_ovr_approx", "p_ue2_mc"),
        ):
            zs = []
            for r in feasible:
                v = r.values
                se = v.get(mc_col + "_se")
                if est in v and mc_col in v and se:
                    zs.append(abs(v[est] - v[mc_col]) / se)
            if zs:
                lines.append(f"max |analytic - MC| / SE ({name}): {max(zs):.3f}")
        gaps = [
            abs(r.values["p_ue2_ovr_approx"] - r.values["p_ue2_ovr_exact"])
            for r in feasible
            if "p_ue2_ovr_approx" in r.values and "p_ue2_ovr_exact" in r.values
        ]
        if gaps:
            lines.append(f"max |approx - exact| overall UE2 outage: {max(gaps):.3e}")
        if kind in ("scaled", "perfect"):
            for name, col in (("ue1", "p_ue1_analytic"), ("ue2", "p_ue2_ovr_approx"), ("ue2 MC", "p_ue2_mc")):
                try:
                    slope = fit_column(grp, col)
                except (ValueError, KeyError):
                    continue
                lines.append(f"diversity slope {name} (35-55 dB): {slope:.3f}")
        if kind == "constant":
            for user, curve, floor in (
                ("ue1", "p_ue1_analytic", "floor_ue1"),
                ("ue2", "p_ue2_ovr_approx", "floor_ue2"),
            ):
                vals = [r.values[floor] for r in feasible if floor in r.values]
                if not vals:
                    continue
                onset = floor_onset(grp, curve, floor)
                where = "not reached in sweep" if onset is None else f"from {onset:g} dB"
                lines.append(
                    f"floor {user}: {vals[0]:.6e}; |curve - floor| < {FLOOR_TOLERANCE:g} {where}"
                )
        failures = [r for r in grp if r.error and r.error.startswith("numerical")]
        if failures:
            lines.append(f"numerical failures: {len(failures)}")
        lines.append("")
    return "\n".join(lines)


def emit_report(rows, path):
    if not rows:
        raise ValueError("no rows to report")
    Path(path).write_text(build_report(rows))


def plot_script(csv_path: str) -> str:
    """gnuplot script drawing analytic and MC outage curves from a sweep CSV."""
    return f"""# gnuplot script for {csv_path}
set datafile separator ','
set logscale y
set format y '10^{{%L}}'
set xlabel 'P_T (dB)'
set ylabel 'outage probability'
set key outside
set yrange [1e-6:1]
plot '{csv_path}' using 1:(stringcolumn(4) eq 'true' ? $5 : 1/0) skip 1 with points title 'UE1 analytic', \\
     '' using 1:(stringcolumn(4) eq 'true' ? $9 : 1/0) skip 1 with points title 'UE2 analytic', \\
     '' using 1:(stringcolumn(4) eq 'true' ? $6 : 1/0) skip 1 with points title 'UE1 MC', \\
     '' using 1:(stringcolumn(4) eq 'true' ? $10 : 1/0) skip 1 with points title 'UE2 MC'
"""


def emit_plot_script(csv_path, script_path):
    Path(script_path).write_text(plot_script(str(csv_path)))
