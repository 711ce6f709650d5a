"""Minimal Standard MIDI File (format 1) writer and reader.

Just enough SMF to carry the ensemble simulation: a conductor track with
the tempo, then one note track per singing agent.  Note times are written
as absolute beats converted to a fixed 480 ticks-per-quarter grid.  The
reader exists so files can be round-tripped and inspected without external
tooling; it understands note on/off, running status and the tempo meta
event, and skips everything else.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

TICKS_PER_QUARTER = 480
DEFAULT_VELOCITY = 96


@dataclass(frozen=True)
class SmfNote:
    pitch: int
    onset_ticks: int
    duration_ticks: int


@dataclass
class SmfFile:
    format: int
    division: int
    tempo_bpm: float | None
    track_names: list[str]
    tracks: list[list[SmfNote]]

    @property
    def note_bearing_tracks(self) -> int:
        return sum(1 for t in self.tracks if t)

    @property
    def note_count(self) -> int:
        return sum(len(t) for t in self.tracks)


def _var_len(value: int) -> bytes:
    """Encode a variable-length quantity."""
    if value < 0:
        raise ValueError("delta times cannot be negative")
    chunks = [value & 0x7F]
    value >>= 7
    while value:
        chunks.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(chunks))


def _read_var_len(data: bytes, pos: int) -> tuple[int, int]:
    value = 0
    while True:
        byte = data[pos]
        pos += 1
        value = (value << 7) | (byte & 0x7F)
        if not byte & 0x80:
            return value, pos


def _track_chunk(events: bytes) -> bytes:
    return b"MTrk" + struct.pack(">I", len(events)) + events


def _meta(delta: int, meta_type: int, payload: bytes) -> bytes:
    return _var_len(delta) + bytes([0xFF, meta_type]) + _var_len(len(payload)) + payload


def beats_to_ticks(beats: Fraction | float) -> int:
    ticks = Fraction(beats) * TICKS_PER_QUARTER
    if ticks.denominator != 1:
        raise ValueError(f"{beats} beats does not land on the {TICKS_PER_QUARTER}-tick grid")
    return int(ticks)


def write_smf(
    destination: str | Path,
    note_tracks: Sequence[tuple[str, Sequence[SmfNote]]],
    tempo_bpm: float,
) -> None:
    """Write a format-1 SMF: tempo track first, then the given note tracks."""
    chunks = [struct.pack(">4sIHHH", b"MThd", 6, 1, len(note_tracks) + 1, TICKS_PER_QUARTER)]

    microseconds_per_quarter = round(60_000_000 / tempo_bpm)
    conductor = _meta(0, 0x03, b"conductor")
    conductor += _meta(0, 0x51, struct.pack(">I", microseconds_per_quarter)[1:])
    conductor += _meta(0, 0x2F, b"")
    chunks.append(_track_chunk(conductor))

    for name, notes in note_tracks:
        # Interleave on/off events; at equal ticks, offs go first so adjacent
        # repeats of the same pitch never collapse into one held note.
        moments: list[tuple[int, int, int]] = []  # (tick, order, pitch)
        for note in notes:
            moments.append((note.onset_ticks + note.duration_ticks, 0, note.pitch))
            moments.append((note.onset_ticks, 1, note.pitch))
        moments.sort()
        data = _meta(0, 0x03, name.encode("utf-8"))
        clock = 0
        for tick, order, pitch in moments:
            delta = tick - clock
            clock = tick
            status = 0x90 if order == 1 else 0x80
            data += _var_len(delta) + bytes([status, pitch, DEFAULT_VELOCITY if order else 0])
        data += _meta(0, 0x2F, b"")
        chunks.append(_track_chunk(data))

    Path(destination).write_bytes(b"".join(chunks))


def read_smf(source: str | Path | bytes) -> SmfFile:
    """Parse an SMF back into per-track note lists (notes, names, tempo)."""
    data = source if isinstance(source, bytes) else Path(source).read_bytes()
    if data[:4] != b"MThd":
        raise ValueError("not a Standard MIDI File (missing MThd)")
    header_len, fmt, ntrks, division = struct.unpack(">IHHH", data[4:14])
    pos = 8 + header_len

    tempo_bpm: float | None = None
    track_names: list[str] = []
    tracks: list[list[SmfNote]] = []
    for _ in range(ntrks):
        if data[pos : pos + 4] != b"MTrk":
            raise ValueError(f"expected MTrk chunk at byte {pos}")
        (length,) = struct.unpack(">I", data[pos + 4 : pos + 8])
        body = data[pos + 8 : pos + 8 + length]
        pos += 8 + length

        notes: list[SmfNote] = []
        name = ""
        open_notes: dict[int, list[int]] = {}
        clock = 0
        cursor = 0
        running_status = 0
        while cursor < len(body):
            delta, cursor = _read_var_len(body, cursor)
            clock += delta
            status = body[cursor]
            if status & 0x80:
                cursor += 1
                if status < 0xF0:
                    running_status = status
            else:
                status = running_status
            if status == 0xFF:
                meta_type = body[cursor]
                meta_len, cursor = _read_var_len(body, cursor + 1)
                payload = body[cursor : cursor + meta_len]
                cursor += meta_len
                if meta_type == 0x51:
                    (usec,) = struct.unpack(">I", b"\x00" + payload)
                    tempo_bpm = 60_000_000 / usec
                elif meta_type == 0x03 and not name:
                    name = payload.decode("utf-8", errors="replace")
            elif status in (0xF0, 0xF7):  # sysex
                skip, cursor = _read_var_len(body, cursor)
                cursor += skip
            else:
                kind = status & 0xF0
                if kind in (0x80, 0x90, 0xA0, 0xB0, 0xE0):
                    a, b = body[cursor], body[cursor + 1]
                    cursor += 2
                    if kind == 0x90 and b > 0:
                        open_notes.setdefault(a, []).append(clock)
                    elif kind == 0x80 or (kind == 0x90 and b == 0):
                        starts = open_notes.get(a)
                        if starts:
                            start = starts.pop(0)
                            notes.append(SmfNote(pitch=a, onset_ticks=start, duration_ticks=clock - start))
                elif kind in (0xC0, 0xD0):
                    cursor += 1
        notes.sort(key=lambda n: (n.onset_ticks, n.pitch))
        track_names.append(name)
        tracks.append(notes)

    return SmfFile(
        format=fmt,
        division=division,
        tempo_bpm=tempo_bpm,
        track_names=track_names,
        tracks=tracks,
    )
