"""File ingestion and the on-disk corpus index.

Input formats
-------------
* Transcripts: JSON Lines, one object per word:
  ``{"word": str, "start": seconds, "end": seconds, "speaker_id": str}``.
* Gaze traces: CSV with header ``t,yaw_deg,pitch_deg,frontal``.
* Speaker metadata: CSV with header ``speaker_id,party,gender``.
* Audio: WAV, 16-bit PCM little-endian; stereo is averaged to mono and
  sample values map to ``value / 32768``.

A corpus manifest (JSON) lists sessions and points at the per-session
files; :func:`build_index` parses everything once into a versioned
directory of per-session blobs that later commands load lazily.  The
index directory is written to a temporary sibling and renamed into place,
and rebuilding from unchanged inputs is byte-identical.

Loaders reject rather than repair: every parse failure carries the file
path and 1-based line number.
"""

from __future__ import annotations

import json
import os
import shutil
import tempfile
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    AngleOutOfRange,
    MissingFile,
    ParseError,
    ValidationError,
    VersionMismatch,
)
from .gaze import GazeSample
from .pitch import PITCH_RANGE_BY_GENDER, AudioBuffer, PitchRange, SpeakerProfile
from .timeline import Element, ElementStream, Modality, TimeInterval, build_stream

INDEX_FORMAT_VERSION = 1


def word_element_id(position: int) -> str:
    """Stable id for the word at a 0-based position in time order."""
    return f"w{position:06d}"


# --- transcripts -----------------------------------------------------------

def load_transcript(path, session_id: str | None = None) -> ElementStream:
    """Parse a JSONL transcript into a text stream.

    Element ids are assigned by time order (``w000000`` ...), so a
    write/load round trip is the identity.  The stream's speaker is the
    file's unique ``speaker_id`` (None when files mix speakers).
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    rows = []
    speakers = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(path, line_no, f"bad JSON: {e.msg}") from e
            if not isinstance(obj, dict):
                raise ParseError(path, line_no, "expected a JSON object")
            missing = {"word", "start", "end", "speaker_id"} - obj.keys()
            if missing:
                raise ParseError(path, line_no, f"missing keys {sorted(missing)}")
            word, start, end = obj["word"], obj["start"], obj["end"]
            if not isinstance(word, str) or not word:
                raise ParseError(path, line_no, "word must be a non-empty string")
            if not isinstance(start, (int, float)) or not isinstance(end, (int, float)):
                raise ParseError(path, line_no, "start/end must be numbers")
            if start < 0 or end < start:
                raise ParseError(path, line_no, f"bad word interval [{start}, {end})")
            rows.append((float(start), float(end), word))
            speakers.add(str(obj["speaker_id"]))
    if not rows:
        raise ParseError(path, 0, "transcript has no words")
    rows.sort()
    elements = [
        Element(word_element_id(i), TimeInterval(s, e), w) for i, (s, e, w) in enumerate(rows)
    ]
    return build_stream(
        Modality.TEXT,
        session_id if session_id is not None else path.stem,
        elements,
        speaker_id=speakers.pop() if len(speakers) == 1 else None,
    )


def write_transcript(stream: ElementStream, path, speaker_id: str | None = None) -> None:
    sid = speaker_id if speaker_id is not None else (stream.speaker_id or "")
    with open(path, "w", encoding="utf-8") as fh:
        for e in stream:
            fh.write(
                json.dumps(
                    {
                        "word": e.payload,
                        "start": e.interval.start,
                        "end": e.interval.end,
                        "speaker_id": sid,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


# --- gaze traces -----------------------------------------------------------

_GAZE_HEADER = "t,yaw_deg,pitch_deg,frontal"


def load_gaze(path) -> list[GazeSample]:
    """Parse a gaze CSV; samples come back sorted by time.

    Yaw must lie in [-180, 180] and pitch in [-90, 90] degrees
    (:class:`AngleOutOfRange` otherwise); ``frontal`` is 0 or 1.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    samples = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != _GAZE_HEADER:
            raise ParseError(path, 1, f"expected header {_GAZE_HEADER!r}, got {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ParseError(path, line_no, f"expected 4 fields, got {len(parts)}")
            try:
                t, yaw, pitch = (float(v) for v in parts[:3])
                frontal = int(parts[3])
            except ValueError as e:
                raise ParseError(path, line_no, f"bad field: {e}") from e
            if not -180.0 <= yaw <= 180.0:
                raise AngleOutOfRange(path, line_no, f"yaw {yaw} outside [-180, 180]")
            if not -90.0 <= pitch <= 90.0:
                raise AngleOutOfRange(path, line_no, f"pitch {pitch} outside [-90, 90]")
            if frontal not in (0, 1):
                raise ParseError(path, line_no, f"frontal must be 0 or 1, got {parts[3]}")
            samples.append(GazeSample(t, yaw, pitch, bool(frontal)))
    samples.sort(key=lambda s: s.t)
    return samples


def write_gaze(samples: Sequence[GazeSample], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_GAZE_HEADER + "\n")
        for s in samples:
            fh.write(f"{s.t!r},{s.yaw!r},{s.pitch!r},{int(s.frontal)}\n")


# --- speaker metadata ------------------------------------------------------

def load_speakers(path) -> dict[str, SpeakerProfile]:
    """Parse ``speaker_id,party,gender`` CSV into profiles with gender pitch bands."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    profiles: dict[str, SpeakerProfile] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "speaker_id,party,gender":
            raise ParseError(path, 1, f"expected header 'speaker_id,party,gender', got {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ParseError(path, line_no, f"expected 3 fields, got {len(parts)}")
            sid, party, gender = parts
            if gender not in PITCH_RANGE_BY_GENDER:
                raise ParseError(
                    path, line_no,
                    f"gender must be one of {sorted(PITCH_RANGE_BY_GENDER)}, got {gender!r}",
                )
            if sid in profiles:
                raise ParseError(path, line_no, f"duplicate speaker_id {sid!r}")
            profiles[sid] = SpeakerProfile(sid, party, PITCH_RANGE_BY_GENDER[gender])
    return profiles


def write_speakers(rows: Sequence[tuple[str, str, str]], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("speaker_id,party,gender\n")
        for sid, party, gender in rows:
            fh.write(f"{sid},{party},{gender}\n")


# --- audio -----------------------------------------------------------------

def read_wav(path) -> AudioBuffer:
    """Read 16-bit PCM WAV; stereo is averaged to mono; values scaled by 1/32768."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    try:
        with wave.open(str(path), "rb") as wf:
            if wf.getsampwidth() != 2:
                raise ParseError(path, 0, f"need 16-bit PCM, got {8 * wf.getsampwidth()}-bit")
            channels = wf.getnchannels()
            sr = wf.getframerate()
            raw = wf.readframes(wf.getnframes())
    except wave.Error as e:
        raise ParseError(path, 0, f"not a readable WAV file: {e}") from e
    data = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    if channels > 1:
        data = data.reshape(-1, channels).mean(axis=1)
    return AudioBuffer(data, sr)


def write_wav(samples: np.ndarray, sample_rate: int, path) -> None:
    """Write mono float samples (clipped to [-1, 1]) as 16-bit PCM."""
    pcm = np.clip(np.round(np.asarray(samples) * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(sample_rate)
        wf.writeframes(pcm.tobytes())


# --- corpus manifest and index ---------------------------------------------

@dataclass(frozen=True)
class SessionEntry:
    session_id: str
    speaker_id: str
    transcript: Path
    audio: Path
    gaze: Path


@dataclass(frozen=True)
class CorpusManifest:
    sessions: tuple[SessionEntry, ...]
    speakers_path: Path


def load_manifest(path) -> CorpusManifest:
    """Parse and validate a corpus manifest; all referenced files must exist."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(path, e.lineno, f"bad JSON: {e.msg}") from e
    if doc.get("format_version") != INDEX_FORMAT_VERSION:
        raise VersionMismatch(
            f"{path}: format_version {doc.get('format_version')!r} != {INDEX_FORMAT_VERSION}"
        )
    base = path.parent
    speakers = base / doc.get("speakers", "")
    if not speakers.is_file():
        raise MissingFile(str(speakers))
    entries = []
    seen = set()
    for i, sess in enumerate(doc.get("sessions", [])):
        missing = {"session_id", "speaker_id", "transcript", "audio", "gaze"} - sess.keys()
        if missing:
            raise ParseError(path, 0, f"session #{i} missing keys {sorted(missing)}")
        sid = sess["session_id"]
        if sid in seen:
            raise ParseError(path, 0, f"duplicate session_id {sid!r}")
        seen.add(sid)
        paths = {key: base / sess[key] for key in ("transcript", "audio", "gaze")}
        for p in paths.values():
            if not p.is_file():
                raise MissingFile(str(p))
        entries.append(
            SessionEntry(sid, sess["speaker_id"], paths["transcript"], paths["audio"], paths["gaze"])
        )
    if not entries:
        raise ParseError(path, 0, "manifest lists no sessions")
    return CorpusManifest(tuple(entries), speakers)


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode("utf-8")


def build_index(manifest_path, out_dir) -> Path:
    """Parse every session and write the index directory.

    The directory is assembled in a temporary sibling and renamed into
    place, replacing any previous index; building twice from unchanged
    inputs produces byte-identical files.
    """
    manifest = load_manifest(manifest_path)
    out_dir = Path(out_dir)
    profiles = load_speakers(manifest.speakers_path)

    out_dir.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=out_dir.name + ".tmp", dir=out_dir.parent))
    try:
        (tmp / "sessions").mkdir()
        session_rows = []
        for entry in manifest.sessions:
            words = load_transcript(entry.transcript, session_id=entry.session_id)
            samples = load_gaze(entry.gaze)
            if not entry.audio.is_file():
                raise MissingFile(str(entry.audio))
            blob = {
                "session_id": entry.session_id,
                "speaker_id": entry.speaker_id,
                "audio": str(entry.audio.resolve()),
                "words": [
                    {
                        "id": e.id,
                        "start": e.interval.start,
                        "end": e.interval.end,
                        "word": e.payload,
                    }
                    for e in words
                ],
                "gaze": [
                    {"t": s.t, "yaw": s.yaw, "pitch": s.pitch, "frontal": int(s.frontal)}
                    for s in samples
                ],
            }
            blob_name = f"sessions/{entry.session_id}.json"
            (tmp / blob_name).write_bytes(_json_bytes(blob))
            session_rows.append(
                {"session_id": entry.session_id, "speaker_id": entry.speaker_id, "blob": blob_name}
            )
        speakers_doc = {
            sid: {"party": p.party, "floor": p.gender_range.floor, "ceiling": p.gender_range.ceiling}
            for sid, p in sorted(profiles.items())
        }
        (tmp / "speakers.json").write_bytes(_json_bytes(speakers_doc))
        (tmp / "manifest.json").write_bytes(
            _json_bytes(
                {
                    "format_version": INDEX_FORMAT_VERSION,
                    "sessions": sorted(session_rows, key=lambda r: r["session_id"]),
                }
            )
        )
        if out_dir.exists():
            shutil.rmtree(out_dir)
        os.rename(tmp, out_dir)
    finally:
        if tmp.exists():
            shutil.rmtree(tmp)
    return out_dir


@dataclass(frozen=True)
class SessionData:
    session_id: str
    speaker_id: str
    words: ElementStream
    gaze: list[GazeSample]
    audio_path: Path


class CorpusIndex:
    """Lazy, read-only view of an index directory built by :func:`build_index`."""

    def __init__(self, root):
        self.root = Path(root)
        manifest = self.root / "manifest.json"
        if not manifest.is_file():
            raise MissingFile(str(manifest))
        doc = json.loads(manifest.read_text(encoding="utf-8"))
        if doc.get("format_version") != INDEX_FORMAT_VERSION:
            raise VersionMismatch(
                f"index {self.root} has format_version {doc.get('format_version')!r}, "
                f"this build reads {INDEX_FORMAT_VERSION}"
            )
        self._sessions = {row["session_id"]: row for row in doc["sessions"]}
        self._cache: dict[str, SessionData] = {}
        self._profiles: dict[str, SpeakerProfile] | None = None

    def session_ids(self) -> list[str]:
        return sorted(self._sessions)

    def speakers(self) -> dict[str, SpeakerProfile]:
        if self._profiles is None:
            doc = json.loads((self.root / "speakers.json").read_text(encoding="utf-8"))
            self._profiles = {
                sid: SpeakerProfile(sid, row["party"], PitchRange(row["floor"], row["ceiling"]))
                for sid, row in doc.items()
            }
        return self._profiles

    def load_session(self, session_id: str) -> SessionData:
        if session_id in self._cache:
            return self._cache[session_id]
        if session_id not in self._sessions:
            raise ValidationError(f"index has no session {session_id!r}")
        blob_path = self.root / self._sessions[session_id]["blob"]
        if not blob_path.is_file():
            raise MissingFile(str(blob_path))
        doc = json.loads(blob_path.read_text(encoding="utf-8"))
        words = build_stream(
            Modality.TEXT,
            session_id,
            [
                Element(w["id"], TimeInterval(w["start"], w["end"]), w["word"])
                for w in doc["words"]
            ],
            speaker_id=doc["speaker_id"],
        )
        samples = [
            GazeSample(g["t"], g["yaw"], g["pitch"], bool(g["frontal"])) for g in doc["gaze"]
        ]
        data = SessionData(session_id, doc["speaker_id"], words, samples, Path(doc["audio"]))
        self._cache[session_id] = data
        return data

    def __iter__(self) -> Iterator[SessionData]:
        for sid in self.session_ids():
            yield self.load_session(sid)
