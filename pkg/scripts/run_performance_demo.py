#!/usr/bin/env python3
"""Headless scripted performance: 120 ticks, conductor narrative, replay check.

Runs a full 30-minute performance instantly (no sleeps), with an enforced
early bust, a shout-mode window, a tempo ramp, a few reconciled trades and
one cash injection.  Writes the event log, replays it, and verifies the
replayed snapshot is byte-identical before printing the payout table.
"""

import argparse
import random

from outcry.core import Regime
from outcry.engine import (
    ExchangeConfig,
    PerformanceConfig,
    PerformanceEngine,
    replay_log,
)
from outcry.market import load_market_config


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=424242)
    parser.add_argument("--log", default="performance.ndjson")
    args = parser.parse_args()

    config = PerformanceConfig(
        market=load_market_config(),
        exchange=ExchangeConfig(),
        duration_ticks=120,
        tempo_start_bpm=60.0,
        seed=args.seed,
    )
    engine = PerformanceEngine(config, log_path=args.log)
    rng = random.Random(args.seed)

    engine.start()
    for t in range(config.duration_ticks):
        if t == 5:
            engine.force_regime(Regime.BUST)
        if t == 25:
            engine.force_regime(None)
        if t == 40:
            engine.set_shout(True)
        if t == 52:
            engine.set_shout(False)
        if t in (30, 60, 90):
            engine.set_tempo(60 + t // 30)
        if t == 70:
            engine.inject_cash()
        if t % 9 == 4:  # a pair of mirrored slips every nine ticks
            a, b = rng.sample(range(1, 13), 2)
            stock = rng.choice(["wealth", "protection", "comfort"])
            qty = rng.randint(1, 5)
            price = round(engine.snapshot()["prices"][stock], 2)
            engine.submit_slip(trader=a, counterparty=b, side="buy",
                               stock=stock, quantity=qty, price=price)
            engine.submit_slip(trader=b, counterparty=a, side="sell",
                               stock=stock, quantity=qty, price=price)
        engine.tick()
    engine.close()

    snap = engine.snapshot()
    print(f"performance over at tick {snap['tick']}; {len(engine.records)} records -> {args.log}")
    print(f"final prices: " + "  ".join(
        f"{snap['display_names'][s]} {snap['prices'][s]:.2f}" for s in snap["prices"]
    ))

    replayed = replay_log(args.log)
    identical = replayed.snapshot_json == engine.snapshot_json()
    print(f"replay byte-identical: {identical}")

    print(f"payout (pot {engine.payout.pot:.0f}):")
    for trader, share in sorted(engine.payout.shares.items(), key=lambda kv: -kv[1]):
        print(f"  trader {trader:>2}: {share:7.2%}")


if __name__ == "__main__":
    main()
