#!/usr/bin/env python3
"""Optimal guard interval against noise level for a dispersive test channel.

The channel has an exponential power-delay profile with random signs. For
each channel gain the exhaustive (M, nu) search is repeated over a range of
noise densities; louder noise tolerates more interference, so the optimal
guard shrinks.
"""

import argparse
import math

import numpy as np

from wirechan import CapacityConfig, ImpulseResponse, channel_power_gain, optimize_cp
from wirechan.link import DEFAULT_SAMPLE_PERIOD


def test_channel(L, decay, seed):
    k = np.arange(L)
    signs = np.where(np.random.default_rng(seed).random(L) < 0.5, -1.0, 1.0)
    return ImpulseResponse(np.exp(-k / decay) * signs, DEFAULT_SAMPLE_PERIOD)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--taps", type=int, default=400)
    ap.add_argument("--decay", type=float, default=60.0, help="in samples")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--gains", type=float, nargs="+", default=[-20, -30, -40, -50])
    ap.add_argument("--noise", type=float, nargs="+", default=[-130, -120, -110, -100, -90])
    args = ap.parse_args()

    base = test_channel(args.taps, args.decay, args.seed)
    g0 = channel_power_gain(base)[0]
    print("gain_db " + " ".join(f"{n:>14g}" for n in args.noise))
    for g_db in args.gains:
        h = base.scaled(math.sqrt(10 ** (g_db / 10) / g0))
        cells = []
        for n0 in args.noise:
            M, nu, rate = optimize_cp(h, CapacityConfig(n0_dbm_hz=n0))
            cells.append(f"{M:>5}/{nu:<4}{rate / 1e6:5.0f}")
        print(f"{g_db:7g} " + " ".join(f"{c:>14}" for c in cells))
    print("cells: M/nu* and rate in Mbit/s; noise in dBm/Hz")


if __name__ == "__main__":
    main()
