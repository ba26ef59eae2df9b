"""Conditional momentum spread behind a narrow slit against hbar/a."""

import argparse

from eprlab.measurement import TOPHAT, Aperture
from eprlab.protocols import KimShihConfig, run_kim_shih
from eprlab.states import EPRParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sigma-plus", type=float, default=0.5)
    ap.add_argument("--sigma-minus", type=float, default=10.0)
    ap.add_argument("--width", type=float, nargs="+", default=[0.2, 0.5, 1.0, 2.0])
    args = ap.parse_args()

    print(f"{'a':>6}{'std_p2':>10}{'hbar/a':>10}{'ratio':>9}{'oracle':>9}")
    for a in args.width:
        r = run_kim_shih(KimShihConfig(epr=EPRParams(args.sigma_plus, args.sigma_minus), slit=Aperture(TOPHAT, 0.0, a)))
        print(f"{a:>6g}{r.std_p2:>10.5f}{r.collapse_bound:>10.5f}{r.ratio:>9.4f}{r.oracle_ratio:>9.4f}")


if __name__ == "__main__":
    main()
