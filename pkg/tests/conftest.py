import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from outcry.composer import Genome
from outcry.core import STOCKS, Side
from outcry.harmony import DURATION_GRID, Note, Tune

DURATIONS = tuple(DURATION_GRID * k for k in range(1, 9))


def random_note(rng: random.Random) -> Note:
    return Note(rng.randrange(12), rng.choice(DURATIONS))


def random_tune(rng: random.Random, side=Side.BUY, stock=STOCKS[0]) -> Tune:
    return Tune(notes=tuple(random_note(rng) for _ in range(4)), side=side, stock=stock)


def random_tune_set(rng: random.Random, size: int, side=Side.BUY) -> list[Tune]:
    return [random_tune(rng, side, STOCKS[i % len(STOCKS)]) for i in range(size)]


def random_genome(rng: random.Random) -> Genome:
    tunes = []
    for stock in STOCKS:
        tunes.append(random_tune(rng, Side.BUY, stock))
        tunes.append(random_tune(rng, Side.SELL, stock))
    return Genome(tuple(tunes))


def constant_tune(pitch: int, side=Side.BUY, stock=STOCKS[0], duration=Fraction(1, 2)) -> Tune:
    return Tune(notes=tuple(Note(pitch, duration) for _ in range(4)), side=side, stock=stock)


def constant_genome(pitch: int = 0) -> Genome:
    tunes = []
    for stock in STOCKS:
        tunes.append(constant_tune(pitch, Side.BUY, stock))
        tunes.append(constant_tune(pitch, Side.SELL, stock))
    return Genome(tuple(tunes))


# --- hypothesis strategies -------------------------------------------------

pitches = st.integers(min_value=0, max_value=11)
durations = st.sampled_from(DURATIONS)
notes = st.builds(Note, pitch=pitches, duration=durations)


def tunes(side=Side.BUY, stock=STOCKS[0]):
    return st.builds(
        Tune,
        notes=st.tuples(notes, notes, notes, notes),
        side=st.just(side),
        stock=st.just(stock),
    )


def tune_sets(side=Side.BUY, min_size=1, max_size=4):
    return st.lists(tunes(side=side), min_size=min_size, max_size=max_size)


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
