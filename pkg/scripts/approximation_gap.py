"""Tabulate the gap between the mean-error approximation and the exact overall
UE2 outage, and where each falls relative to a Monte-Carlo estimate.

    python scripts/approximation_gap.py --trials 1000000 --pts 10:40:5
"""

import argparse

from cnoma import analytic as an
from cnoma.model import ConstantVariance, PerfectCsi, ScaledVariance, default_config, derive
from cnoma.montecarlo import McConfig, Quantity, estimate
from cnoma.errors import InfeasibleErrorVariance

MODELS = [PerfectCsi(), ScaledVariance(1.0), ScaledVariance(5.0), ScaledVariance(20.0),
          ConstantVariance(1e-3), ConstantVariance(3.3e-3), ConstantVariance(1e-2)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--pts", default="10:40:5", help="start:stop:step in dB")
    args = ap.parse_args()
    start, stop, step = (float(x) for x in args.pts.split(":"))
    pts = [start + i * step for i in range(int((stop - start) / step + 1e-9) + 1)]

    print(f"{'model':<22}{'dB':>5}{'exact':>14}{'approx':>14}{'rel gap':>10}{'z exact':>9}{'z approx':>9}")
    for model in MODELS:
        for pt in pts:
            cfg = default_config(pt, model)
            try:
                d = derive(cfg)
            except InfeasibleErrorVariance:
                print(f"{str(model.kind) + ':' + format(model.parameter, 'g'):<22}{pt:>5g}   infeasible")
                continue
            ex, ap_ = an.p_ovr_ue2_exact(d).value, an.p_ovr_ue2_approx(d).value
            est = estimate(cfg, McConfig(trials=args.trials, seed=args.seed), Quantity.UE2_OVERALL)
            z = lambda v: (v - est.p_hat) / est.std_err if est.std_err > 0 else float("nan")
            label = f"{model.kind}:{model.parameter:g}"
            print(f"{label:<22}{pt:>5g}{ex:>14.6e}{ap_:>14.6e}{(ap_ - ex) / ex:>10.2%}{z(ex):>9.2f}{z(ap_):>9.2f}")


if __name__ == "__main__":
    main()
