"""One signaling run: decode slit-width bits from particle-2 spreads."""

import argparse

from eprlab.measurement import TOPHAT, Aperture
from eprlab.protocols import M1, M2_UNCONDITIONAL, SignalingConfig, run_signaling_test


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", choices=[M1, M2_UNCONDITIONAL], default=M2_UNCONDITIONAL)
    ap.add_argument("--blocks", type=int, default=50)
    ap.add_argument("--pairs", type=int, default=2000)
    ap.add_argument("--delay", type=float, default=1.0)
    ap.add_argument("--high", type=float, default=1.0)
    ap.add_argument("--low", type=float, default=0.2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    rep = run_signaling_test(
        SignalingConfig(
            slit_high=Aperture(TOPHAT, 0.0, args.high),
            slit_low=Aperture(TOPHAT, 0.0, args.low),
            blocks=args.blocks,
            pairs_per_block=args.pairs,
            delay=args.delay,
            model=args.model,
            seed=args.seed,
            workers=args.workers,
        )
    )
    d = rep.predicted_dispersion
    print(f"predicted spreads: high {d['high']:.5f}, low {d['low']:.5f}, threshold {d['threshold']:.5f}")
    print(f"accuracy {rep.accuracy:.3f}  predicted {rep.predicted_accuracy:.3f}  floor {rep.accuracy_floor:.3f}")
    print(f"Welch t {rep.t_statistic:.3f}  p {rep.p_value:.3g}")


if __name__ == "__main__":
    main()
