"""Evolve co-harmonizing buy/sell trading tunes with a genetic algorithm.

A genome is six four-note tunes: one buy/sell pair per stock, laid out
stock-major with buy before sell.  The search rewards buy tunes that blend
with each other and with the sell tunes, while pushing the sell tunes to
clash among themselves, so a selling (falling) market literally sounds
worse than a buying one:

    score = 1.5 * buy/sell consonance + buy/buy consonance - sell/sell consonance

Buy tunes are initialized in C major, sell tunes in C natural minor.
Breeding splices the flattened 24-note lists of two parents at a random
point; mutation hits a whole buy+sell pair for one stock at once.

All randomness flows from one `random.Random` seeded by the config.  The
generator is consumed only by the sequential init/breed/mutate steps, never
by fitness evaluation, so results are identical no matter how many workers
score the population.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .core import STOCKS, Side, StockId
from .harmony import (
    DEFAULT_SCORE_TABLE,
    DURATION_GRID,
    TUNE_LENGTH,
    IntervalScoreTable,
    Note,
    Tune,
    set_consonance,
)

#: Pitch-class sets used for fresh random tunes.
C_MAJOR: tuple[int, ...] = (0, 2, 4, 5, 7, 9, 11)
C_MINOR: tuple[int, ...] = (0, 2, 3, 5, 7, 8, 10)

#: Random durations are drawn uniformly from the grid points in [1/4, 2] beats.
DURATION_CHOICES: tuple[Fraction, ...] = tuple(
    DURATION_GRID * k for k in range(1, int(2 / DURATION_GRID) + 1)
)

TUNESET_FORMAT_VERSION = "tuneset-v1"


@dataclass(frozen=True)
class FitnessWeights:
    """Weights of the three consonance terms; the sell/sell term is subtracted."""

    w_buy_sell: float = 1.5
    w_buy_buy: float = 1.0
    w_sell_sell: float = 1.0


@dataclass(frozen=True)
class Genome:
    """Six tunes in canonical order: for each stock, its buy tune then its sell tune."""

    tunes: tuple[Tune, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tunes", tuple(self.tunes))
        if len(self.tunes) != 2 * len(STOCKS):
            raise ValueError(f"genome needs {2 * len(STOCKS)} tunes, got {len(self.tunes)}")
        for k, stock in enumerate(STOCKS):
            buy, sell = self.tunes[2 * k], self.tunes[2 * k + 1]
            if buy.side is not Side.BUY or buy.stock is not stock:
                raise ValueError(f"slot {2 * k} must be the {stock.value} buy tune")
            if sell.side is not Side.SELL or sell.stock is not stock:
                raise ValueError(f"slot {2 * k + 1} must be the {stock.value} sell tune")

    @property
    def buy_tunes(self) -> tuple[Tune, ...]:
        return self.tunes[0::2]

    @property
    def sell_tunes(self) -> tuple[Tune, ...]:
        return self.tunes[1::2]

    def pair(self, stock: StockId) -> tuple[Tune, Tune]:
        k = STOCKS.index(stock)
        return self.tunes[2 * k], self.tunes[2 * k + 1]

    @property
    def pairs(self) -> dict[StockId, tuple[Tune, Tune]]:
        return {stock: self.pair(stock) for stock in STOCKS}


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 120
    generations: int = 4000
    breed_fraction: float = 0.20
    mutation_prob: float = 0.25
    elitism_count: int = 1
    seed: int = 0
    weights: FitnessWeights = FitnessWeights()
    score_table: IntervalScoreTable = DEFAULT_SCORE_TABLE
    buy_pitch_set: tuple[int, ...] = C_MAJOR
    sell_pitch_set: tuple[int, ...] = C_MINOR
    duration_choices: tuple[Fraction, ...] = DURATION_CHOICES

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if not 0 < self.breed_fraction <= 1:
            raise ValueError("breed_fraction must lie in (0, 1]")
        if self.breed_fraction * self.population_size < 2:
            raise ValueError("breed_fraction * population_size must be at least 2")
        if not 0 <= self.mutation_prob <= 1:
            raise ValueError("mutation_prob must lie in [0, 1]")
        if not 0 <= self.elitism_count < self.population_size:
            raise ValueError("elitism_count must be in [0, population_size)")


@dataclass
class GaResult:
    best: Genome
    best_fitness: float
    history: list[float] = field(default_factory=list)


def fitness(
    genome: Genome,
    weights: FitnessWeights = FitnessWeights(),
    table: IntervalScoreTable = DEFAULT_SCORE_TABLE,
) -> float:
    """Weighted consonance blend; higher is better."""
    buys, sells = genome.buy_tunes, genome.sell_tunes
    return (
        weights.w_buy_sell * set_consonance(buys, sells, table)
        + weights.w_buy_buy * set_consonance(buys, buys, table)
        - weights.w_sell_sell * set_consonance(sells, sells, table)
    )


def _random_tune(
    rng: random.Random,
    side: Side,
    stock: StockId,
    pitch_set: Sequence[int],
    durations: Sequence[Fraction],
) -> Tune:
    notes = tuple(
        Note(rng.choice(pitch_set), rng.choice(durations)) for _ in range(TUNE_LENGTH)
    )
    return Tune(notes=notes, side=side, stock=stock)


def _random_genome(rng: random.Random, cfg: GaConfig) -> Genome:
    tunes: list[Tune] = []
    for stock in STOCKS:
        tunes.append(_random_tune(rng, Side.BUY, stock, cfg.buy_pitch_set, cfg.duration_choices))
        tunes.append(_random_tune(rng, Side.SELL, stock, cfg.sell_pitch_set, cfg.duration_choices))
    return Genome(tuple(tunes))


def init_population(cfg: GaConfig, rng: random.Random | None = None) -> list[Genome]:
    """Fresh random population, fully determined by cfg.seed when rng is omitted."""
    if rng is None:
        rng = random.Random(cfg.seed)
    return [_random_genome(rng, cfg) for _ in range(cfg.population_size)]


def breed(parent_a: Genome, parent_b: Genome, rng: random.Random) -> Genome:
    """One-point crossover on the flattened 24-note lists."""
    notes_a = [n for t in parent_a.tunes for n in t.notes]
    notes_b = [n for t in parent_b.tunes for n in t.notes]
    split = rng.randrange(1, len(notes_a))
    child_notes = notes_a[:split] + notes_b[split:]
    tunes = []
    for slot, template in enumerate(parent_a.tunes):
        chunk = child_notes[slot * TUNE_LENGTH : (slot + 1) * TUNE_LENGTH]
        tunes.append(Tune(notes=tuple(chunk), side=template.side, stock=template.stock))
    return Genome(tuple(tunes))


def mutate(
    genome: Genome,
    rng: random.Random,
    mutation_prob: float,
    *,
    buy_pitch_set: Sequence[int] = C_MAJOR,
    sell_pitch_set: Sequence[int] = C_MINOR,
    duration_choices: Sequence[Fraction] = DURATION_CHOICES,
) -> Genome:
    """With probability `mutation_prob`, regrow one stock's whole buy+sell pair."""
    if rng.random() >= mutation_prob:
        return genome
    k = rng.randrange(len(STOCKS))
    stock = STOCKS[k]
    tunes = list(genome.tunes)
    tunes[2 * k] = _random_tune(rng, Side.BUY, stock, buy_pitch_set, duration_choices)
    tunes[2 * k + 1] = _random_tune(rng, Side.SELL, stock, sell_pitch_set, duration_choices)
    return Genome(tuple(tunes))


def _fitness_task(args: tuple[Genome, FitnessWeights, IntervalScoreTable]) -> float:
    genome, weights, table = args
    return fitness(genome, weights, table)


def run_ga(cfg: GaConfig, n_workers: int = 1) -> GaResult:
    """Run the full evolutionary loop and return the best genome ever scored.

    Each generation: score everyone, carry the `elitism_count` best over
    unchanged, and refill the rest by breeding random pairs from the top
    `breed_fraction` (self-pairing is re-drawn once, then tolerated),
    mutating every child.  `history` records the best fitness per
    generation; with any elitism it never decreases.

    n_workers > 1 fans fitness evaluation out to worker processes.  Scores
    are collected in member order and the RNG never crosses the process
    boundary, so the result is identical for any worker count.
    """
    rng = random.Random(cfg.seed)
    population = init_population(cfg, rng)
    n_breeders = int(cfg.breed_fraction * cfg.population_size)
    n_children = cfg.population_size - cfg.elitism_count

    pool = ProcessPoolExecutor(max_workers=n_workers) if n_workers > 1 else None
    try:
        best: Genome | None = None
        best_fitness = float("-inf")
        history: list[float] = []
        for _generation in range(cfg.generations):
            if pool is None:
                scores = [fitness(g, cfg.weights, cfg.score_table) for g in population]
            else:
                tasks = [(g, cfg.weights, cfg.score_table) for g in population]
                chunk = max(1, cfg.population_size // (4 * n_workers))
                scores = list(pool.map(_fitness_task, tasks, chunksize=chunk))

            order = sorted(range(len(population)), key=scores.__getitem__, reverse=True)
            history.append(scores[order[0]])
            if scores[order[0]] > best_fitness:
                best_fitness = scores[order[0]]
                best = population[order[0]]

            elites = [population[i] for i in order[: cfg.elitism_count]]
            breeders = [population[i] for i in order[:n_breeders]]
            children: list[Genome] = []
            while len(children) < n_children:
                i = rng.randrange(n_breeders)
                j = rng.randrange(n_breeders)
                if i == j:
                    j = rng.randrange(n_breeders)
                child = breed(breeders[i], breeders[j], rng)
                child = mutate(
                    child,
                    rng,
                    cfg.mutation_prob,
                    buy_pitch_set=cfg.buy_pitch_set,
                    sell_pitch_set=cfg.sell_pitch_set,
                    duration_choices=cfg.duration_choices,
                )
                children.append(child)
            population = elites + children
    finally:
        if pool is not None:
            pool.shutdown()

    assert best is not None
    return GaResult(best=best, best_fitness=best_fitness, history=history)


# --- tune-set text format ----------------------------------------------------
#
# Header line "tuneset-v1", then one line per tune in genome order:
#   <stock> <buy|sell> p1:d1 p2:d2 p3:d3 p4:d4
# with pitch classes 0..11 and durations as exact rationals in beats ("1/2").


def format_tunes(genome: Genome) -> str:
    lines = [TUNESET_FORMAT_VERSION]
    for tune in genome.tunes:
        pairs = " ".join(f"{n.pitch}:{n.duration}" for n in tune.notes)
        lines.append(f"{tune.stock.value} {tune.side.value} {pairs}")
    return "\n".join(lines) + "\n"


def export_tunes(genome: Genome, destination: str | Path) -> None:
    """Write the genome in the versioned tune-set text format (lossless)."""
    Path(destination).write_text(format_tunes(genome), encoding="utf-8")


def parse_tunes(text: str) -> Genome:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != TUNESET_FORMAT_VERSION:
        raise ValueError(f"expected a {TUNESET_FORMAT_VERSION} header line")
    by_key: dict[tuple[StockId, Side], Tune] = {}
    for line in lines[1:]:
        fields = line.split()
        if len(fields) != 2 + TUNE_LENGTH:
            raise ValueError(f"malformed tune line: {line!r}")
        stock, side = StockId(fields[0]), Side(fields[1])
        notes = []
        for token in fields[2:]:
            pitch_str, _, dur_str = token.partition(":")
            notes.append(Note(int(pitch_str), Fraction(dur_str)))
        key = (stock, side)
        if key in by_key:
            raise ValueError(f"duplicate tune for {stock.value} {side.value}")
        by_key[key] = Tune(notes=tuple(notes), side=side, stock=stock)
    try:
        tunes = [by_key[(stock, side)] for stock in STOCKS for side in (Side.BUY, Side.SELL)]
    except KeyError as missing:
        raise ValueError(f"missing tune for {missing.args[0]}") from None
    return Genome(tuple(tunes))


def load_tunes(path: str | Path) -> Genome:
    return parse_tunes(Path(path).read_text(encoding="utf-8"))
