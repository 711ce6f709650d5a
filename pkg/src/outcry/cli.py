"""One command-line entry point for composing, simulating, serving and replaying.

Exit codes: 0 success, 1 usage error (help printed), 2 runtime error.
Every subcommand is deterministic given its flags; seeds default to one
documented constant so demos reproduce.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .core import STOCKS
from .harmony import IntervalScoreTable

#: Default seed for reproducible demos.
DEFAULT_SEED = 424242


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="outcry", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    compose = sub.add_parser("compose", help="evolve a candidate trading-tune set")
    compose.add_argument("--seed", type=int, default=DEFAULT_SEED)
    compose.add_argument("--pop", type=int, default=120, help="population size")
    compose.add_argument("--gens", type=int, default=4000, help="generations")
    compose.add_argument("--out", required=True, help="tune-set output path")
    compose.add_argument("--score-table", help="file with 12 interval scores (intervals 0..11)")
    compose.add_argument("--workers", type=int, default=1, help="fitness evaluation processes")

    sound = sub.add_parser("simulate-sound", help="render an ensemble simulation to MIDI")
    sound.add_argument("--tunes", required=True, help="tune-set file from `compose`")
    sound.add_argument("--schedule", required=True, help="segments file: duration density buy_bias")
    sound.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sound.add_argument("--out", required=True, help="MIDI output path")
    sound.add_argument("--agents", type=int, default=12)
    sound.add_argument("--bpm", type=float, default=72.0)

    mkt = sub.add_parser("simulate-market", help="headless Monte Carlo of the price engine")
    mkt.add_argument("--paths", type=int, default=1000)
    mkt.add_argument("--ticks", type=int, default=120)
    mkt.add_argument("--seed", type=int, default=DEFAULT_SEED)
    mkt.add_argument("--config", help="market config file (defaults packaged)")
    mkt.add_argument("--inflation", type=float, default=0.002, help="cash decay per tick")

    serve = sub.add_parser("serve", help="run the live performance service")
    serve.add_argument("--port", type=int, default=8600)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--config", help="performance config file")
    serve.add_argument("--log", help="event log output path (NDJSON)")
    serve.add_argument("--tick-interval", type=float, help="override tick seconds (rehearsal speed)")
    serve.add_argument("--ui", help="directory of built console UI to mount at /ui")

    replay = sub.add_parser("replay", help="rebuild the final state from an event log")
    replay.add_argument("--log", required=True, help="event log file")

    return parser


def _load_score_table(path: str) -> IntervalScoreTable:
    values = Path(path).read_text(encoding="utf-8").split()
    if len(values) != 12:
        raise ValueError(f"score table file must hold 12 integers, found {len(values)}")
    return IntervalScoreTable(tuple(int(v) for v in values))


def _cmd_compose(args: argparse.Namespace) -> int:
    from .composer import GaConfig, export_tunes, run_ga

    table = _load_score_table(args.score_table) if args.score_table else None
    cfg_kwargs = dict(
        population_size=args.pop, generations=args.gens, seed=args.seed
    )
    if table is not None:
        cfg_kwargs["score_table"] = table
    cfg = GaConfig(**cfg_kwargs)
    result = run_ga(cfg, n_workers=args.workers)
    export_tunes(result.best, args.out)
    print(f"best fitness {result.best_fitness:.6f} after {args.gens} generations")
    print(f"tune set written to {args.out}")
    return 0


def _cmd_simulate_sound(args: argparse.Namespace) -> int:
    from .agents import AgentSimConfig, load_schedule, run_simulation
    from .composer import load_tunes

    cfg = AgentSimConfig(
        tuneset=load_tunes(args.tunes),
        schedule=load_schedule(args.schedule),
        n_agents=args.agents,
        seed=args.seed,
        base_tempo_bpm=args.bpm,
    )
    summary = run_simulation(cfg, args.out)
    print(
        f"{summary.n_events} events ({summary.buy_events} buy / {summary.sell_events} sell), "
        f"{summary.note_count} notes -> {args.out}"
    )
    for i, count in enumerate(summary.segment_event_counts):
        print(f"  segment {i + 1}: {count} events")
    return 0


def _cmd_simulate_market(args: argparse.Namespace) -> int:
    from .market import load_market_config, monte_carlo

    config = load_market_config(args.config)
    summary = monte_carlo(
        config, n_paths=args.paths, n_ticks=args.ticks, inflation_rate=args.inflation, seed=args.seed
    )
    cash_factor = (1.0 - args.inflation) ** args.ticks
    print(f"{args.paths} paths x {args.ticks} ticks; cash deflates to {cash_factor:.4f}")
    print(f"{'stock':<12} {'mean final price':>18} {'beats cash':>12}")
    for stock in STOCKS:
        name = config.display_names[stock]
        print(
            f"{name:<12} {summary.mean_final_prices[stock]:>18.2f} "
            f"{summary.beat_cash_fraction[stock]:>12.3f}"
        )
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .engine import load_performance_config
    from .server import serve

    config = load_performance_config(args.config)
    serve(
        config,
        port=args.port,
        host=args.host,
        log_path=args.log,
        tick_interval=args.tick_interval,
        ui_dir=args.ui,
    )
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    from .engine import replay_log

    result = replay_log(args.log)
    snap = result.snapshot
    print(f"replayed {result.n_records} records; final tick {snap['tick']}")
    print(f"{'stock':<12} {'final price':>12}")
    for stock in STOCKS:
        print(f"{snap['display_names'][stock.value]:<12} {snap['prices'][stock.value]:>12.2f}")
    if result.payout is not None:
        print(f"payout shares (pot {result.payout.pot:.2f}):")
        ranked = sorted(result.payout.shares.items(), key=lambda kv: -kv[1])
        for trader, share in ranked:
            print(f"  trader {trader:>2}: {share:7.2%}  ({result.payout.amount_for(trader):.2f})")
    return 0


_COMMANDS = {
    "compose": _cmd_compose,
    "simulate-sound": _cmd_simulate_sound,
    "simulate-market": _cmd_simulate_market,
    "serve": _cmd_serve,
    "replay": _cmd_replay,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required")
    except UsageError as usage:
        print(f"error: {usage}", file=sys.stderr)
        parser.print_help(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except Exception as failure:  # runtime errors map to exit 2
        print(f"error: {failure}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
