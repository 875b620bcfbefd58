"""Command-line entry point: ``cnoma sweep | point | fit-diversity``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from . import __version__, analytic, asymptotic
from .config import load_config
from .errors import DegenerateFit, ParseError, ToleranceNotReached, ValidationError
from .model import (
    ConstantVariance,
    PerfectCsi,
    ScaledVariance,
    config_for_power_sweep,
    derive,
    describe_error_model,
)
from .montecarlo import McConfig, Quantity, estimates_from_counts, simulate_counts
from .sweep import (
    emit_csv,
    emit_plot_script,
    emit_report,
    fit_column,
    group_rows,
    numerical_failures,
    read_csv,
    run_sweep,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
QUANTITY_COLUMNS = {
    ("ue1", "analytic"): "p_ue1_analytic",
    ("ue1", "mc"): "p_ue1_mc",
    ("ue2", "analytic"): "p_ue2_ovr_approx",
    ("ue2", "exact"): "p_ue2_ovr_exact",
    ("ue2", "mc"): "p_ue2_mc",
}

log = logging.getLogger("cnoma")


def _mc_override(mc, trials, seed, chunk_size=None):
    if trials is None and seed is None:
        return mc
    if trials == 0:
        return None
    base = mc or McConfig()
    return McConfig(
        trials=trials if trials is not None else base.trials,
        seed=seed if seed is not None else base.seed,
        chunk_size=chunk_size or base.chunk_size,
        confidence=base.confidence,
    )


def cmd_sweep(args):
    _, spec = load_config(args.config)
    spec = replace(spec, mc=_mc_override(spec.mc, args.mc_trials, args.seed))
    rows = run_sweep(spec, workers=args.workers)
    emit_csv(rows, args.out)
    if args.report:
        emit_report(rows, args.report)
    if args.plot_script:
        emit_plot_script(args.out, args.plot_script)
    failed = numerical_failures(rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    if failed:
        for r in failed:
            log.error("pt_db=%g %s: %s", r.pt_db, r.error_model, r.error)
        return EXIT_NUMERICAL
    return EXIT_OK


def _fmt(v):
    return f"{v:.12g}"


def cmd_point(args):
    config, spec = load_config(args.config)
    if args.pt_db is not None:
        config = config_for_power_sweep(config, args.pt_db, spec.relay_offset_db)
    d = derive(config)
    print(f"error model       {describe_error_model(config.error_model)}")
    print(f"p1 p2 p3          {_fmt(config.p1)} {_fmt(config.p2)} {_fmt(config.p3)}")
    print(f"gamma_bar1/2      {_fmt(d.gamma_bar1)} {_fmt(d.gamma_bar2)}")
    if d.degenerate:
        print("degenerate        p2/p1 <= gamma_bar2: every outage probability is 1")
    else:
        print(f"chi chi_m         {_fmt(d.chi)} {_fmt(d.chi_m)}")
        print(f"rho11 rho12 rho3  {_fmt(d.rho11)} {_fmt(d.rho12)} {_fmt(d.rho3)}")
    for name, res in analytic.all_outages(d, spec.quad).items():
        print(f"{name:<22}{_fmt(res.value)}")
    model = config.error_model
    if isinstance(model, ConstantVariance):
        print(f"{'floor_ue1':<22}{_fmt(asymptotic.floor_ue1_const(d))}")
        print(f"{'floor_ue2':<22}{_fmt(asymptotic.floor_ue2_const(d, spec.quad))}")
    if isinstance(model, (ScaledVariance, PerfectCsi)):
        a2 = asymptotic.asym_ue2_var(asymptotic.AsymptoteInput.from_derived(d))
        print(f"{'asym_ue1':<22}{_fmt(asymptotic.asym_ue1_var(d))}")
        print(f"{'asym_ue2':<22}{_fmt(a2.value)}{' (negative bracket)' if a2.negative else ''}")
        print(f"{'asym_ue2_leading':<22}{_fmt(asymptotic.asym_ue2_leading(d))}")
    mc = _mc_override(spec.mc, args.mc_trials, args.seed)
    if mc is not None:
        d, counts = simulate_counts(config, mc, workers=args.workers)
        for q, est in estimates_from_counts(d, counts, mc).items():
            if isinstance(q, Quantity):
                print(
                    f"mc {q.value:<19}{_fmt(est.p_hat)}  se {est.std_err:.3g}  "
                    f"ci [{_fmt(est.ci_lo)}, {_fmt(est.ci_hi)}]"
                )
    return EXIT_OK


def _parse_window(text):
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError("window must look like 35:55")
    try:
        return float(lo), float(hi)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def cmd_fit(args):
    rows = read_csv(args.csv)
    column = QUANTITY_COLUMNS[(args.quantity, args.source)]
    status = EXIT_OK
    for (kind, param), grp in group_rows(rows).items():
        label = "perfect" if kind == "perfect" else f"{kind}:{param:g}"
        try:
            slope = fit_column(grp, column, args.window)
        except (DegenerateFit, ValueError) as exc:
            print(f"{label:<16} fit failed: {exc}")
            status = EXIT_NUMERICAL
            continue
        print(f"{label:<16} {slope:.4f}")
    return status


def build_parser():
    p = argparse.ArgumentParser(
        prog="cnoma", description="Outage analysis of two-user cooperative NOMA under imperfect CSI."
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="sweep total power over the configured error-model grid")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True, help="CSV output path")
    s.add_argument("--mc-trials", type=int, default=None, help="Monte-Carlo trials per point (0 disables)")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--report", default=None, help="optional text report path")
    s.add_argument("--plot-script", default=None, help="optional gnuplot script path")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    pt = sub.add_parser("point", help="print every quantity at one operating point")
    pt.add_argument("--config", required=True)
    pt.add_argument("--pt-db", type=float, default=None)
    pt.add_argument("--mc-trials", type=int, default=None)
    pt.add_argument("--seed", type=int, default=None)
    pt.add_argument("--workers", type=int, default=1)
    pt.set_defaults(func=cmd_point)

    f = sub.add_parser("fit-diversity", help="fit high-SNR slopes from a sweep CSV")
    f.add_argument("--csv", required=True)
    f.add_argument("--quantity", choices=("ue1", "ue2"), default="ue2")
    f.add_argument("--source", choices=("analytic", "exact", "mc"), default="analytic")
    f.add_argument("--window", type=_parse_window, default=asymptotic.DEFAULT_WINDOW)
    f.set_defaults(func=cmd_fit)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "quantity", None) == "ue1" and getattr(args, "source", None) == "exact":
        parser.error("--source exact applies to ue2 only")
    try:
        return args.func(args)
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ToleranceNotReached as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
