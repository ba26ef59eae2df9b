"""Oracle-predicted M1 decoding accuracy over delay and pairs per block (no sampling)."""

import argparse

import numpy as np
from scipy import stats

from eprlab.grid import PhysicalConstants
from eprlab.measurement import TOPHAT, Aperture
from eprlab.oracle import epr_covariance
from eprlab.protocols import M1, predicted_receiver_distribution
from eprlab.states import EPRParams


def predicted_accuracy(state, high, low, delay, pairs, c):
    ph = predicted_receiver_distribution(state, high, delay, M1, c)
    pl = predicted_receiver_distribution(state, low, delay, M1, c)
    thr = 0.5 * (ph["std"] + pl["std"])
    out = []
    for p, wider in ((ph, ph["std"] >= pl["std"]), (pl, pl["std"] > ph["std"])):
        se = p["std"] * np.sqrt((p["kurtosis"] - 1) / (4 * pairs))
        gap = p["std"] - thr if wider else thr - p["std"]
        out.append(stats.norm.cdf(gap / se))
    return float(np.mean(out))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--delays", type=float, nargs="+", default=[0.5, 1.0, 1.5, 2.0])
    ap.add_argument("--pairs", type=int, nargs="+", default=[2000, 5000, 10000, 20000])
    args = ap.parse_args()

    c = PhysicalConstants()
    state = epr_covariance(EPRParams(0.1, 10.0))
    high, low = Aperture(TOPHAT, 0.0, 1.0), Aperture(TOPHAT, 0.0, 0.2)
    print("delay " + "".join(f"{n:>9d}" for n in args.pairs))
    for t in args.delays:
        row = "".join(f"{predicted_accuracy(state, high, low, t, n, c):>9.3f}" for n in args.pairs)
        print(f"{t:<6g}{row}")


if __name__ == "__main__":
    main()
