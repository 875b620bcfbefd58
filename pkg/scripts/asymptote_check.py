"""Compare high-SNR UE2 expansions with the overall outage curve under
SNR-scaled error variance.

Columns: curve value, second-order closed form, derived leading-order term,
and their ratios to the curve.

    python scripts/asymptote_check.py --eta 1 --pts 40:80:5
"""

import argparse

from cnoma import analytic as an
from cnoma import asymptotic as asy
from cnoma.model import ScaledVariance, default_config, derive


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eta", type=float, default=1.0)
    ap.add_argument("--pts", default="40:80:5")
    args = ap.parse_args()
    start, stop, step = (float(x) for x in args.pts.split(":"))
    print(f"{'dB':>5}{'curve':>14}{'closed form':>14}{'leading':>14}{'cf/curve':>10}{'lead/curve':>11}{'s1/s2':>8}")
    pt = start
    while pt <= stop + 1e-9:
        d = derive(default_config(pt, ScaledVariance(args.eta)))
        curve = an.p_ovr_ue2_approx(d).value
        cf = asy.asym_ue2_var(asy.AsymptoteInput.from_derived(d)).value
        lead = asy.asym_ue2_leading(d)
        ratio = d.link_stats[0].hat_sigma_sq / d.link_stats[1].hat_sigma_sq
        print(f"{pt:>5g}{curve:>14.6e}{cf:>14.6e}{lead:>14.6e}{cf / curve:>10.4f}{lead / curve:>11.4f}{ratio:>8.3f}")
        pt += step


if __name__ == "__main__":
    main()
