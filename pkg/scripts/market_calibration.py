#!/usr/bin/env python3
"""Calibration sweep for the underlying market defaults.

Answers the question the parameters are tuned around: across many simulated
performances, how often does buying-and-holding each stock beat sitting on
cash while it deflates?  Prints the per-stock table and the sensitivity of
the wealth number to the run length.
"""

import argparse

from outcry.core import STOCKS
from outcry.market import load_market_config, monte_carlo


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--paths", type=int, default=2000)
    parser.add_argument("--ticks", type=int, default=120)
    parser.add_argument("--inflation", type=float, default=0.002)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--config", default=None)
    args = parser.parse_args()

    config = load_market_config(args.config)
    summary = monte_carlo(
        config,
        n_paths=args.paths,
        n_ticks=args.ticks,
        inflation_rate=args.inflation,
        seed=args.seed,
    )
    cash = (1 - args.inflation) ** args.ticks
    print(f"{args.paths} paths x {args.ticks} ticks, cash decays to {cash:.4f}")
    print(f"{'stock':<12} {'mean final':>12} {'beats cash':>12}")
    for stock in STOCKS:
        print(
            f"{config.display_names[stock]:<12} "
            f"{summary.mean_final_prices[stock]:>12.2f} "
            f"{summary.beat_cash_fraction[stock]:>12.3f}"
        )

    print("\nwealth-beats-cash vs performance length:")
    for ticks in (60, 90, 120, 180, 240):
        s = monte_carlo(config, n_paths=args.paths, n_ticks=ticks,
                        inflation_rate=args.inflation, seed=args.seed)
        print(f"  {ticks:>4} ticks: {s.beat_cash_fraction[STOCKS[0]]:.3f}")


if __name__ == "__main__":
    main()
