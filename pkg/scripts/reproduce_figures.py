"""Sweep total power for the SNR-scaled and the constant error-variance grids.

Writes one CSV, text report and gnuplot script per grid into ``--out-dir``.
With ``--png`` and matplotlib installed, also draws the outage curves.

    python scripts/reproduce_figures.py --out-dir results --mc-trials 1000000
"""

import argparse
import logging
from dataclasses import replace
from pathlib import Path

from cnoma.config import parse_config, parse_error_model
from cnoma.montecarlo import McConfig
from cnoma.sweep import emit_csv, emit_plot_script, emit_report, numerical_failures, run_sweep

GRIDS = {
    "scaled": "perfect, scaled:1, scaled:5, scaled:20",
    "constant": "perfect, constant:1e-3, constant:3.3e-3, constant:1e-2",
}


def plot(rows, path, title):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 2, figsize=(11, 4.2), sharey=True)
    labels = {}
    for r in rows:
        labels.setdefault((r.error_model, r.eta_or_sigma), []).append(r)
    for ax, (user, curve, mc) in zip(axes, (("UE1", "p_ue1_analytic", "p_ue1_mc"),
                                            ("UE2", "p_ue2_ovr_approx", "p_ue2_mc"))):
        for (kind, param), grp in labels.items():
            grp = [r for r in grp if r.feasible and curve in r.values]
            name = "perfect CSI" if kind == "perfect" else f"{kind} {param:g}"
            line, = ax.semilogy([r.pt_db for r in grp], [r.values[curve] for r in grp], label=name)
            pts = [(r.pt_db, r.values[mc]) for r in grp if r.values.get(mc, 0) > 0]
            if pts:
                ax.semilogy(*zip(*pts), "o", mfc="none", color=line.get_color(), ms=4)
        ax.set_title(f"{user} ({title})")
        ax.set_xlabel("total transmit SNR (dB)")
        ax.set_ylim(1e-6, 1.2)
        ax.grid(True, which="both", alpha=0.3)
    axes[0].set_ylabel("outage probability")
    axes[1].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--mc-trials", type=int, default=100_000, help="0 disables simulation")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--start", type=float, default=0.0)
    ap.add_argument("--stop", type=float, default=60.0)
    ap.add_argument("--step", type=float, default=2.0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--png", action="store_true", help="draw curves with matplotlib")
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _, base = parse_config("")
    mc = McConfig(trials=args.mc_trials, seed=args.seed) if args.mc_trials > 0 else None
    for name, grid in GRIDS.items():
        spec = replace(
            base,
            pt_db_start=args.start, pt_db_stop=args.stop, pt_db_step=args.step,
            error_model_grid=tuple(parse_error_model(g) for g in grid.split(",")),
            mc=mc,
        )
        rows = run_sweep(spec, workers=args.workers)
        csv_path = out / f"{name}.csv"
        emit_csv(rows, csv_path)
        emit_report(rows, out / f"{name}_report.md")
        emit_plot_script(csv_path, out / f"{name}.gp")
        if args.png:
            plot(rows, out / f"{name}.png", f"{name} error variance")
        failed = numerical_failures(rows)
        print(f"{name}: {len(rows)} rows -> {csv_path}" + (f" ({len(failed)} numerical failures)" if failed else ""))


if __name__ == "__main__":
    main()
