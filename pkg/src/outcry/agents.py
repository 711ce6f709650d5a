"""Musical multi-agent simulation of the trading floor, for auditioning tunes.

Agents stand in for singers.  At every scheduler tick (= one beat) an idle
agent may initiate an order: it picks a side (weighted by the segment's buy
bias), a stock, quantity and price words from the word bank, expands that
stock's buy or sell scaffold into a sung phrase, and repeats it a few times
at a tempo factor of half, unity or double speed.  While repeating, the
agent is busy and stays silent otherwise, the way a singer can only sing
one phrase at a time.

Schedules are segment lists (duration, density, buy bias) so trading
activity can swell and fade and the floor can lean bullish or bearish.
The rendered ensemble goes out as a format-1 MIDI file, one track per
agent, each agent parked in one of three octaves.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .composer import Genome
from .core import STOCKS, Side, StockId
from .harmony import SungPhrase, expand_scaffold, syllable_count
from .smf import SmfNote, beats_to_ticks, write_smf

#: Allowed phrase speeds relative to the visual metronome.
TEMPO_FACTORS: tuple[Fraction, ...] = (Fraction(1, 2), Fraction(1), Fraction(2))

#: Agents round-robin across three octaves; MIDI C of each register.
OCTAVE_BASES: tuple[int, ...] = (48, 60, 72)


def _bank_words(words: Sequence[str]) -> tuple[tuple[str, int], ...]:
    return tuple((w, syllable_count(w)) for w in words)


@dataclass(frozen=True)
class WordBank:
    """Libretto words for the variable slots, hyphenated per syllable."""

    quantities: tuple[tuple[str, int], ...] = _bank_words(
        ("five", "ten", "fif-teen", "twen-ty", "fif-ty", "one-hun-dred")
    )
    prices: tuple[tuple[str, int], ...] = _bank_words(
        ("ten", "twen-ty", "fif-ty", "se-ven-ty", "one-hun-dred")
    )
    sides: dict[Side, tuple[str, int]] = field(
        default_factory=lambda: {Side.BUY: ("buy", 1), Side.SELL: ("sell", 1)}
    )
    stocks: dict[StockId, tuple[str, int]] = field(
        default_factory=lambda: {
            StockId.WEALTH: ("wealth", 1),
            StockId.PROTECTION: ("pro-tec-tion", 3),
            StockId.COMFORT: ("com-fort", 2),
        }
    )


@dataclass(frozen=True)
class Segment:
    """A stretch of the schedule with fixed activity density and buy bias."""

    duration_ticks: int
    density: float
    buy_bias: float

    def __post_init__(self) -> None:
        if self.duration_ticks < 1:
            raise ValueError("segment duration must be at least one tick")
        if not 0 <= self.density <= 1:
            raise ValueError("density must lie in [0, 1]")
        if not 0 <= self.buy_bias <= 1:
            raise ValueError("buy_bias must lie in [0, 1]")


@dataclass(frozen=True)
class AgentSimConfig:
    tuneset: Genome
    schedule: tuple[Segment, ...]
    n_agents: int = 12
    seed: int = 0
    base_tempo_bpm: float = 72.0
    repeat_range: tuple[int, int] = (2, 4)
    word_bank: WordBank = WordBank()

    def __post_init__(self) -> None:
        object.__setattr__(self, "schedule", tuple(self.schedule))
        if not self.schedule:
            raise ValueError("schedule needs at least one segment")
        if self.n_agents < 1:
            raise ValueError("n_agents must be positive")
        lo, hi = self.repeat_range
        if not 1 <= lo <= hi:
            raise ValueError("repeat_range must satisfy 1 <= lo <= hi")

    @property
    def total_ticks(self) -> int:
        return sum(s.duration_ticks for s in self.schedule)


@dataclass(frozen=True)
class MusicEvent:
    """One initiated order: a phrase repeated k times from start_beat."""

    agent: int
    start_beat: Fraction
    phrase: SungPhrase
    tempo_factor: Fraction
    repeats: int
    side: Side
    stock: StockId

    @property
    def beats_per_repeat(self) -> Fraction:
        return self.phrase.total_beats / self.tempo_factor

    @property
    def end_beat(self) -> Fraction:
        return self.start_beat + self.repeats * self.beats_per_repeat


@dataclass
class MusicEventTrack:
    """Per-agent rendered notes (MIDI pitch, absolute beat onset, beat duration)."""

    agent_notes: list[list[tuple[int, Fraction, Fraction]]]
    tempo_bpm: float

    @property
    def note_count(self) -> int:
        return sum(len(notes) for notes in self.agent_notes)


def step_agents(
    cfg: AgentSimConfig,
    segment: Segment,
    tick: int,
    rng: random.Random,
    busy_until: list[Fraction],
) -> list[MusicEvent]:
    """Advance one scheduler tick; busy agents never re-initiate.

    Mutates `busy_until` (one entry per agent, in beats) and returns the
    events initiated this tick.  Draw order per agent is fixed: initiate?,
    side, stock, quantity, price, tempo factor, repeat count.
    """
    events: list[MusicEvent] = []
    beat = Fraction(tick)
    for agent in range(cfg.n_agents):
        if busy_until[agent] > beat:
            continue
        if rng.random() >= segment.density:
            continue
        side = Side.BUY if rng.random() < segment.buy_bias else Side.SELL
        stock = STOCKS[rng.randrange(len(STOCKS))]
        quantity = rng.choice(cfg.word_bank.quantities)
        price = rng.choice(cfg.word_bank.prices)
        buy_tune, sell_tune = cfg.tuneset.pair(stock)
        scaffold = buy_tune if side is Side.BUY else sell_tune
        words = (cfg.word_bank.sides[side], quantity, cfg.word_bank.stocks[stock], price)
        phrase = expand_scaffold(scaffold, words)
        event = MusicEvent(
            agent=agent,
            start_beat=beat,
            phrase=phrase,
            tempo_factor=TEMPO_FACTORS[rng.randrange(len(TEMPO_FACTORS))],
            repeats=rng.randint(*cfg.repeat_range),
            side=side,
            stock=stock,
        )
        busy_until[agent] = event.end_beat
        events.append(event)
    return events


def generate_events(cfg: AgentSimConfig) -> list[list[MusicEvent]]:
    """Run the whole schedule; returns events grouped per segment."""
    rng = random.Random(cfg.seed)
    busy_until = [Fraction(0)] * cfg.n_agents
    per_segment: list[list[MusicEvent]] = []
    tick = 0
    for segment in cfg.schedule:
        events: list[MusicEvent] = []
        for _ in range(segment.duration_ticks):
            events.extend(step_agents(cfg, segment, tick, rng, busy_until))
            tick += 1
        per_segment.append(events)
    return per_segment


def render_track(events: Sequence[MusicEvent], cfg: AgentSimConfig) -> MusicEventTrack:
    """Expand repeats into concrete notes with absolute onsets.

    Tempo factor scales durations (factor 2 = double speed = half length).
    Each agent's pitch classes land in its fixed octave register.
    """
    agent_notes: list[list[tuple[int, Fraction, Fraction]]] = [[] for _ in range(cfg.n_agents)]
    for event in sorted(events, key=lambda e: (e.start_beat, e.agent)):
        base = OCTAVE_BASES[event.agent % len(OCTAVE_BASES)]
        cursor = event.start_beat
        for _ in range(event.repeats):
            for note in event.phrase.notes:
                duration = note.duration / event.tempo_factor
                agent_notes[event.agent].append((base + note.pitch, cursor, duration))
                cursor += duration
    return MusicEventTrack(agent_notes=agent_notes, tempo_bpm=cfg.base_tempo_bpm)


def write_music_file(track: MusicEventTrack, destination: str | Path) -> None:
    """Write the rendered ensemble as a format-1 SMF, one track per agent."""
    note_tracks = []
    for agent, notes in enumerate(track.agent_notes):
        smf_notes = [
            SmfNote(
                pitch=pitch,
                onset_ticks=beats_to_ticks(onset),
                duration_ticks=beats_to_ticks(duration),
            )
            for pitch, onset, duration in notes
        ]
        note_tracks.append((f"agent {agent + 1}", smf_notes))
    write_smf(destination, note_tracks, tempo_bpm=track.tempo_bpm)


@dataclass
class SimulationSummary:
    n_events: int
    buy_events: int
    sell_events: int
    segment_event_counts: list[int]
    note_count: int

    @property
    def buy_fraction(self) -> float:
        return self.buy_events / self.n_events if self.n_events else 0.0


def run_simulation(cfg: AgentSimConfig, destination: str | Path) -> SimulationSummary:
    """Simulate the schedule, write the music file, and summarize activity."""
    per_segment = generate_events(cfg)
    events = [e for segment in per_segment for e in segment]
    track = render_track(events, cfg)
    write_music_file(track, destination)
    buys = sum(1 for e in events if e.side is Side.BUY)
    return SimulationSummary(
        n_events=len(events),
        buy_events=buys,
        sell_events=len(events) - buys,
        segment_event_counts=[len(seg) for seg in per_segment],
        note_count=track.note_count,
    )


def parse_schedule(text: str) -> tuple[Segment, ...]:
    """Parse a schedule file: one `duration_ticks density buy_bias` per line."""
    segments = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        fields = stripped.split()
        if len(fields) != 3:
            raise ValueError(f"schedule line {lineno}: expected 'duration density buy_bias'")
        segments.append(
            Segment(
                duration_ticks=int(fields[0]),
                density=float(fields[1]),
                buy_bias=float(fields[2]),
            )
        )
    if not segments:
        raise ValueError("schedule file contains no segments")
    return tuple(segments)


def load_schedule(path: str | Path) -> tuple[Segment, ...]:
    return parse_schedule(Path(path).read_text(encoding="utf-8"))
