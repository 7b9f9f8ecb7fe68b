#!/usr/bin/env python3
"""Measured vs predicted stability scaling in the narrowband regime.

Same protocol as run_bbfs_scaling.py but with a single coherence bin
(B / beta_c = 0.5), where the prediction is M / N_eff and independent of
the symbol rate. Narrowband trials are cheap; the default settings run
in a few seconds.
"""

import argparse
import math
import sys

from trmimo import ChannelConfig, scaling_regression

from run_bbfs_scaling import print_fit

# (n_tx, n_rx, pinholes)
FAMILY = (
    (4, 2, ()),
    (8, 2, ()),
    (16, 2, ()),
    (32, 2, (32,)),
    (16, 1, ()),
    (32, 2, ()),
    (64, 2, ()),
    (64, 1, ()),
    (128, 1, ()),
)


def build_configs(base_seed):
    return [
        ChannelConfig(
            n_tx=n_tx,
            n_rx=n_rx,
            pinholes=pinholes,
            carrier=8.0 * math.pi,
            bandwidth=1.0,
            coherence_bw=2.0,
            symbol_interval=2.0,
            n_symbols=4,
            seed=base_seed + i,
        )
        for i, (n_tx, n_rx, pinholes) in enumerate(FAMILY)
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=2000)
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("--seed", type=int, default=200,
                        help="base seed; config i uses seed + i")
    parser.add_argument("--csv", help="optional path for the per-config table")
    args = parser.parse_args(argv)

    fit = scaling_regression(
        build_configs(args.seed), args.trials, workers=args.workers
    )
    print_fit(fit, args.csv)
    return 0


if __name__ == "__main__":
    sys.exit(main())
