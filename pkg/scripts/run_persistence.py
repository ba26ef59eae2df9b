"""Conditional x2 statistics versus delay, lattice against covariance oracle."""

from eprlab.protocols import PersistenceConfig, run_correlation_persistence


def main():
    rows = run_correlation_persistence(PersistenceConfig(delays=(0.0, 0.25, 0.5, 1.0)))
    cols = ["tau", "grid_mean_x2", "oracle_mean_x2", "grid_std_x2", "oracle_std_x2", "grid_residual_std", "unconditional_std_x2"]
    print("".join(f"{c:>22}" for c in cols))
    for r in rows:
        print("".join(f"{r[c]:>22.6g}" for c in cols))


if __name__ == "__main__":
    main()
