#!/usr/bin/env python3
"""Produce candidate tune sets and render audition operas for each.

Mirrors the composing workflow: evolve six candidate sets, then render two
simulated operas per candidate (different seeds) so they can be auditioned
in a synthesizer or DAW.  Writes everything under ./candidates/.
"""

import argparse
from pathlib import Path

from outcry.agents import AgentSimConfig, Segment, run_simulation
from outcry.composer import GaConfig, export_tunes, run_ga

# A swell-shaped floor: quiet open, busy bullish middle, selling climax.
AUDITION_SCHEDULE = (
    Segment(duration_ticks=240, density=0.15, buy_bias=0.5),
    Segment(duration_ticks=360, density=0.55, buy_bias=0.8),
    Segment(duration_ticks=240, density=0.85, buy_bias=0.2),
    Segment(duration_ticks=120, density=0.25, buy_bias=0.5),
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--candidates", type=int, default=6)
    parser.add_argument("--operas-per-candidate", type=int, default=2)
    parser.add_argument("--pop", type=int, default=120)
    parser.add_argument("--gens", type=int, default=4000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--out", default="candidates")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for k in range(args.candidates):
        cfg = GaConfig(
            population_size=args.pop, generations=args.gens, seed=args.seed + k
        )
        result = run_ga(cfg, n_workers=args.workers)
        tunes_path = out / f"candidate_{k + 1}.tunes.txt"
        export_tunes(result.best, tunes_path)
        print(f"candidate {k + 1}: fitness {result.best_fitness:.4f} -> {tunes_path}")

        for run in range(args.operas_per_candidate):
            sim = AgentSimConfig(
                tuneset=result.best,
                schedule=AUDITION_SCHEDULE,
                n_agents=12,
                seed=1000 * (k + 1) + run,
            )
            midi_path = out / f"candidate_{k + 1}.opera_{run + 1}.mid"
            summary = run_simulation(sim, midi_path)
            print(
                f"  opera {run + 1}: {summary.n_events} phrases "
                f"({summary.buy_fraction:.0%} buys) -> {midi_path}"
            )


if __name__ == "__main__":
    main()
