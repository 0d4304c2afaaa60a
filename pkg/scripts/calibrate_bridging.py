"""Estimate the bridging constant k in  k * N_DC * mean(omega**2) ~ realized variance.

Runs driftless GBM paths on calibration seeds (disjoint from the seeds used
by the test suite) and prints, per regime and threshold, the mean and spread
of  RV / (N_DC * mean(omega**2)).

    python scripts/calibrate_bridging.py [--seeds 20]
"""

import argparse
import statistics

from delta_engine.scaling_laws import realized_variance, summarize
from delta_engine.ticks import GbmParams, generate_gbm

HOUR_NS = 3600 * 10**9

REGIMES = {
    # per-tick log move 1-2x delta
    "coarse": dict(sigma=0.002, dt=1.0, n=10**6, thresholds=(1e-3, 2e-3), interval=HOUR_NS),
    # per-tick log move 0.05x delta
    "fine": dict(sigma=5e-5, dt=1.0, n=10**6, thresholds=(1e-3, 2e-3), interval=HOUR_NS),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--first-seed", type=int, default=1000)
    args = ap.parse_args()

    for name, cfg in REGIMES.items():
        ratios = {d: [] for d in cfg["thresholds"]}
        for seed in range(args.first_seed, args.first_seed + args.seeds):
            s = generate_gbm(GbmParams(sigma=cfg["sigma"], dt=cfg["dt"], n=cfg["n"], seed=seed))
            rv, _ = realized_variance(s, cfg["interval"])
            for d in cfg["thresholds"]:
                summ = summarize(s, d)
                ratios[d].append(rv / (summ.dc_count * summ.mean_sq_overshoot))
        pooled = [r for rs in ratios.values() for r in rs]
        print(f"[{name}] sigma={cfg['sigma']} dt={cfg['dt']} n={cfg['n']}")
        for d, rs in ratios.items():
            print(
                f"  delta={d:g}: mean k={statistics.fmean(rs):.4f} "
                f"sd={statistics.stdev(rs):.4f} min={min(rs):.4f} max={max(rs):.4f}"
            )
        print(f"  pooled mean k={statistics.fmean(pooled):.4f}")


if __name__ == "__main__":
    main()
