"""Pitch-class consonance scoring and trading-tune machinery.

A trading tune is a four-note scaffold of pitch classes with quantized
durations.  One slot each for the order side, the quantity, the stock name
and the price; singing a concrete order repeats each slot's pitch once per
syllable of the word filling it.

Consonance between tunes is judged on pitch classes alone (octave-free,
12-TET).  Intervals are rated on a four-step scale, 6 (most consonant) down
to 1 (semitone, tritone, major seventh).  Because ensemble entries are not
synchronized, two tunes are also compared at note offsets of 1..3, the
"shift" alignments, and all alignments are averaged.

Conventions
-----------
- Pitch classes are ints 0..11 (0 = C); `Note` normalizes mod 12.
- Durations are `Fraction`s in beats on a 1/4-beat grid.
- In an aligned note pair, the interval is measured from the later-entering
  tune's note up to the leading tune's note: ``table[(lead - follow) % 12]``.
- At shift 0 neither tune leads, so that single alignment is scored in both
  directions and averaged; this makes set-level consonance symmetric even
  for score tables that rate an interval and its inversion differently.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .core import Side, StockId

#: Duration quantization grid, in beats.
DURATION_GRID = Fraction(1, 4)

#: Number of notes in a trading-tune scaffold.
TUNE_LENGTH = 4

#: The allowed consonance ratings, most consonant first.
SCORE_VALUES = frozenset({6, 5, 3, 1})


@dataclass(frozen=True)
class Note:
    """A pitch class plus a duration in beats (positive, on the grid)."""

    pitch: int
    duration: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "pitch", self.pitch % 12)
        object.__setattr__(self, "duration", Fraction(self.duration))
        if self.duration <= 0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        if (self.duration / DURATION_GRID).denominator != 1:
            raise ValueError(
                f"duration {self.duration} is not a multiple of the {DURATION_GRID} grid"
            )


@dataclass(frozen=True)
class Tune:
    """A four-note buy or sell scaffold for one stock."""

    notes: tuple[Note, ...]
    side: Side
    stock: StockId

    def __post_init__(self) -> None:
        object.__setattr__(self, "notes", tuple(self.notes))
        if len(self.notes) != TUNE_LENGTH:
            raise ValueError(f"a tune has exactly {TUNE_LENGTH} notes, got {len(self.notes)}")

    @property
    def pitches(self) -> tuple[int, ...]:
        return tuple(n.pitch for n in self.notes)

    @property
    def durations(self) -> tuple[Fraction, ...]:
        return tuple(n.duration for n in self.notes)


@dataclass(frozen=True)
class SungPhrase:
    """A concrete sung order: scaffold notes expanded to one note per syllable."""

    notes: tuple[Note, ...]
    words: tuple[tuple[str, int], ...]

    @property
    def total_beats(self) -> Fraction:
        return sum((n.duration for n in self.notes), Fraction(0))


@dataclass(frozen=True)
class IntervalScoreTable:
    """Consonance rating per semitone interval (index 0..11).

    Ratings must come from `SCORE_VALUES`.  The semitone, tritone and major
    seventh are pinned to the minimum rating, and the major third must beat
    the fifth.
    """

    scores: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "scores", tuple(self.scores))
        if len(self.scores) != 12:
            raise ValueError("score table needs one entry per semitone interval 0..11")
        bad = set(self.scores) - SCORE_VALUES
        if bad:
            raise ValueError(f"scores must be drawn from {sorted(SCORE_VALUES)}, got {bad}")
        if not (self.scores[1] == self.scores[6] == self.scores[11] == 1):
            raise ValueError("semitone, tritone and major seventh must score 1")
        if not self.scores[4] > self.scores[7]:
            raise ValueError("major third must score higher than the fifth")

    def __getitem__(self, interval: int) -> int:
        return self.scores[interval % 12]

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, int]) -> "IntervalScoreTable":
        return cls(tuple(mapping[i] for i in range(12)))


#: Default rating table.  The composer's exact ear-tuned table is a matter of
#: taste; this one satisfies the pinned constraints above and is replaceable
#: anywhere a table argument is accepted.
DEFAULT_SCORE_TABLE = IntervalScoreTable((6, 1, 3, 5, 6, 5, 1, 5, 3, 5, 3, 1))


def interval_score(a: int, b: int, table: IntervalScoreTable = DEFAULT_SCORE_TABLE) -> int:
    """Rating of the interval from pitch class `a` up to pitch class `b`."""
    return table.scores[(b - a) % 12]


def tune_pair_consonance(
    lead: Tune,
    follow: Tune,
    shift: int,
    table: IntervalScoreTable = DEFAULT_SCORE_TABLE,
) -> float:
    """Consonance of `follow` entering `shift` notes after `lead` starts.

    Note k of `follow` sounds against note ``shift + k`` of `lead`; the
    result is the mean rating over the 4 - shift overlapping pairs, each
    scored from the follower's note up to the leader's.  Durations are
    ignored; alignment is by note index.
    """
    return _shift_score(lead.pitches, follow.pitches, shift, table)


def _shift_score(
    lead: tuple[int, ...], follow: tuple[int, ...], shift: int, table: IntervalScoreTable
) -> float:
    if shift < 0 or shift >= min(len(lead), len(follow)):
        raise ValueError(f"shift {shift} leaves no overlapping notes")
    scores = [table.scores[(l - f) % 12] for l, f in zip(lead[shift:], follow)]
    return sum(scores) / len(scores)


@lru_cache(maxsize=65536)
def _pair_score(
    xs: tuple[int, ...], ys: tuple[int, ...], table: IntervalScoreTable
) -> float:
    # Seven alignment slots: the simultaneous entry once (both directions
    # averaged, since neither tune leads), then each tune lagging by 1..3.
    slots = [(_shift_score(xs, ys, 0, table) + _shift_score(ys, xs, 0, table)) / 2.0]
    for shift in range(1, TUNE_LENGTH):
        slots.append(_shift_score(xs, ys, shift, table))
        slots.append(_shift_score(ys, xs, shift, table))
    return sum(slots) / len(slots)


def pair_consonance(
    x: Tune, y: Tune, table: IntervalScoreTable = DEFAULT_SCORE_TABLE
) -> float:
    """Mean consonance of two tunes over all entry offsets (0, ±1, ±2, ±3)."""
    return _pair_score(x.pitches, y.pitches, table)


def set_consonance(
    xs: Sequence[Tune],
    ys: Sequence[Tune],
    table: IntervalScoreTable = DEFAULT_SCORE_TABLE,
) -> float:
    """Grand mean of `pair_consonance` over all tune pairs from two sets.

    When the two sets are the same, a tune is not scored against itself
    (unless the set has a single tune, where self-consonance is all there
    is).  Symmetric in its set arguments by construction.
    """
    xs = list(xs)
    ys = list(ys)
    if not xs or not ys:
        raise ValueError("consonance of an empty tune set is undefined")
    same = xs == ys
    skip_diagonal = same and len(xs) > 1
    scores = [
        _pair_score(x.pitches, y.pitches, table)
        for i, x in enumerate(xs)
        for j, y in enumerate(ys)
        if not (skip_diagonal and i == j)
    ]
    return sum(scores) / len(scores)


def syllable_count(word: str) -> int:
    """Syllables of a libretto word, written with hyphens ("one-hun-dred")."""
    return word.count("-") + 1


def expand_scaffold(scaffold: Tune, words: Sequence[tuple[str, int]]) -> SungPhrase:
    """Expand a scaffold into a sung phrase, one note per syllable.

    `words` gives the four slot words (side, quantity, stock, price) with
    their syllable counts.  Slot k contributes count-k notes, all carrying
    scaffold note k's pitch and duration.
    """
    if len(words) != TUNE_LENGTH:
        raise ValueError(f"expected {TUNE_LENGTH} words (side, quantity, stock, price)")
    notes: list[Note] = []
    for note, (word, count) in zip(scaffold.notes, words):
        if count < 1:
            raise ValueError(f"word {word!r} must carry at least one syllable")
        notes.extend([note] * count)
    return SungPhrase(notes=tuple(notes), words=tuple((w, c) for w, c in words))
