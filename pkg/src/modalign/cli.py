"""Command-line front end composing the pipeline end to end.

One binary, one subcommand per stage::

    modalign ingest   --manifest corpus/manifest.json --out corpus.idx
    modalign pitch    --index corpus.idx --out word_pitch.csv
    modalign segments --index corpus.idx --out segments.csv
    modalign align    --index corpus.idx --source text --target segments --out pairs.csv
    modalign query    --index corpus.idx --select text --where "gaze.label==AfD" --out hits.csv
    modalign regress  --index corpus.idx --out results/
    modalign fw       --index corpus.idx --out fw.csv
    modalign advise   --data discrete --representation semantic --integration implicit
    modalign synth    --out corpus/ --seed 7 --effect 0.15

Settings resolve as: command-line flags, then the ``--config`` JSON file,
then built-in defaults.  All outputs are deterministic: rerunning any
command on unchanged inputs writes byte-identical files.  Exit codes:
0 success, 2 invalid parameters or configuration, 3 defective input data.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

from . import gaze as gaze_mod
from . import ingest, latent, pitch, stats, synth
from .errors import DataError, EngineError, ModalityAbsent, ValidationError
from .timeline import Modality, join_streams, query_crossmodal

Z_95 = stats.Z_95


# --- configuration ---------------------------------------------------------

@dataclass(frozen=True)
class PitchSettings:
    frame_length: int = 2048      # samples per analysis frame
    hop: int = 512                # samples between frames
    threshold: float = 0.15       # voicing threshold on the normalized difference
    floor: float | None = None    # Hz; overrides per-gender band when set
    ceiling: float | None = None  # Hz; overrides per-gender band when set
    per_session: bool = False     # standardize within session instead of corpus-wide


@dataclass(frozen=True)
class AddressSettings:
    yaw_min: float = 45.0             # degrees
    yaw_max: float = 70.0             # degrees
    notes_pitch_threshold: float = -20.0  # degrees; below = looking at notes
    min_words: int = 10               # minimum words a segment must cover
    label: str = "AfD"                # label stamped on detected segments
    max_notes_seconds: float | None = None  # cap on notes-look bridging; None = unlimited


@dataclass(frozen=True)
class RunConfig:
    pitch: PitchSettings = PitchSettings()
    address: AddressSettings = AddressSettings()
    target_party: str = "AfD"     # party whose addressing defines the interaction baseline
    prior_scale: float = 1.0      # total Dirichlet prior mass for the lexical comparison
    threads: int = 1

    def address_rule(self) -> gaze_mod.AddressRule:
        a = self.address
        return gaze_mod.AddressRule(
            yaw_min=a.yaw_min,
            yaw_max=a.yaw_max,
            notes_pitch_threshold=a.notes_pitch_threshold,
            min_words=a.min_words,
            label=a.label,
            max_notes_seconds=a.max_notes_seconds,
        )


_SECTION_TYPES = {"pitch": PitchSettings, "address": AddressSettings}


def load_config(path) -> RunConfig:
    """Read a JSON config file; unknown sections or keys are rejected."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ValidationError(f"config {path}: bad JSON at line {e.lineno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ValidationError(f"config {path}: top level must be an object")
    cfg = RunConfig()
    for section, value in doc.items():
        if section in _SECTION_TYPES:
            cls = _SECTION_TYPES[section]
            known = {f.name for f in fields(cls)}
            unknown = set(value) - known
            if unknown:
                raise ValidationError(f"config {path}: unknown keys {sorted(unknown)} in {section!r}")
            cfg = replace(cfg, **{section: replace(getattr(cfg, section), **value)})
        elif section in ("target_party", "prior_scale", "threads"):
            cfg = replace(cfg, **{section: value})
        else:
            raise ValidationError(f"config {path}: unknown section {section!r}")
    return cfg


def _merge_flags(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    """Fold explicitly passed flags (non-None) over the config."""
    pitch_over = {
        name: getattr(args, flag)
        for name, flag in (
            ("frame_length", "frame_length"),
            ("hop", "hop"),
            ("threshold", "threshold"),
            ("floor", "floor"),
            ("ceiling", "ceiling"),
        )
        if getattr(args, flag, None) is not None
    }
    addr_over = {
        name: getattr(args, flag)
        for name, flag in (
            ("yaw_min", "yaw_min"),
            ("yaw_max", "yaw_max"),
            ("notes_pitch_threshold", "notes_pitch"),
            ("min_words", "min_words"),
            ("label", "label"),
        )
        if getattr(args, flag, None) is not None
    }
    if pitch_over:
        cfg = replace(cfg, pitch=replace(cfg.pitch, **pitch_over))
    if addr_over:
        cfg = replace(cfg, address=replace(cfg.address, **addr_over))
    for name, flag in (("target_party", "target_party"), ("prior_scale", "prior")):
        if getattr(args, flag, None) is not None:
            cfg = replace(cfg, **{name: getattr(args, flag)})
    if getattr(args, "threads", None) is not None:
        cfg = replace(cfg, threads=args.threads)
    return cfg


# --- shared pipeline pieces ------------------------------------------------

def _speaker_range(cfg: RunConfig, profile: pitch.SpeakerProfile) -> pitch.PitchRange:
    if cfg.pitch.floor is not None or cfg.pitch.ceiling is not None:
        floor = cfg.pitch.floor if cfg.pitch.floor is not None else profile.gender_range.floor
        ceiling = cfg.pitch.ceiling if cfg.pitch.ceiling is not None else profile.gender_range.ceiling
        return pitch.PitchRange(floor, ceiling)
    return profile.gender_range


def _pitch_one_session(index: ingest.CorpusIndex, cfg: RunConfig, session_id: str):
    data = index.load_session(session_id)
    profile = index.speakers().get(data.speaker_id)
    if profile is None:
        raise DataError(f"session {session_id!r}: speaker {data.speaker_id!r} not in speakers table")
    audio = ingest.read_wav(data.audio_path)
    track = pitch.estimate_pitch_track(
        audio,
        _speaker_range(cfg, profile),
        frame_length=cfg.pitch.frame_length,
        hop=cfg.pitch.hop,
        threshold=cfg.pitch.threshold,
        session_id=session_id,
    )
    return data, pitch.word_pitch(track, data.words)


def corpus_word_pitches(index: ingest.CorpusIndex, cfg: RunConfig):
    """Word pitches for every session, standardized per speaker across the corpus.

    Returns ``(sessions, word_pitches)`` where ``sessions`` maps session id
    to its :class:`~modalign.ingest.SessionData` and ``word_pitches`` is a
    flat, standardized list in (session, time) order.
    """
    ids = index.session_ids()
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(lambda sid: _pitch_one_session(index, cfg, sid), ids))
    else:
        results = [_pitch_one_session(index, cfg, sid) for sid in ids]
    sessions = {data.session_id: data for data, _ in results}
    flat = [wp for _, wps in results for wp in wps]
    return sessions, pitch.standardize_by_speaker(flat, per_session=cfg.pitch.per_session)


def session_segments(index: ingest.CorpusIndex, cfg: RunConfig):
    """Detected, word-filtered address segments per session id."""
    rule = cfg.address_rule()
    out = {}
    for sid in index.session_ids():
        data = index.load_session(sid)
        raw = gaze_mod.detect_address_segments(data.gaze, rule)
        out[sid] = gaze_mod.enforce_min_words(raw, data.words, rule, session_id=sid)
    return out


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_lines(path, lines) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


# --- commands --------------------------------------------------------------

def cmd_ingest(args, cfg: RunConfig) -> int:
    out = ingest.build_index(args.manifest, args.out)
    print(out)
    return 0


def cmd_pitch(args, cfg: RunConfig) -> int:
    index = ingest.CorpusIndex(args.index)
    sessions, pitches = corpus_word_pitches(index, cfg)
    by_key = {(wp.session_id, wp.word_id): wp for wp in pitches}
    lines = ["session_id,word_id,word,start,end,speaker_id,mean_f0,voiced_frames,z"]
    for sid in index.session_ids():
        data = sessions[sid]
        for e in data.words:
            wp = by_key[(sid, e.id)]
            lines.append(
                ",".join(
                    [
                        sid,
                        e.id,
                        str(e.payload),
                        _fmt(e.interval.start),
                        _fmt(e.interval.end),
                        data.speaker_id,
                        _fmt(wp.mean_f0),
                        str(wp.voiced_frame_count),
                        _fmt(wp.z),
                    ]
                )
            )
    _write_lines(args.out, lines)
    missing = pitch.missing_count(pitches)
    print(f"{len(pitches)} words, {missing} without voiced frames -> {args.out}")
    return 0


def cmd_segments(args, cfg: RunConfig) -> int:
    index = ingest.CorpusIndex(args.index)
    segments = session_segments(index, cfg)
    lines = ["session_id,label,start,end,word_count"]
    total = 0
    for sid in index.session_ids():
        for seg in segments[sid]:
            lines.append(
                ",".join(
                    [sid, seg.label, _fmt(seg.interval.start), _fmt(seg.interval.end),
                     str(seg.word_count)]
                )
            )
            total += 1
    _write_lines(args.out, lines)
    print(f"{total} segments -> {args.out}")
    return 0


def session_streams(index: ingest.CorpusIndex, cfg: RunConfig):
    """(words, segments-or-None stream) per session, for align/query."""
    segments = session_segments(index, cfg)
    out = {}
    for sid in index.session_ids():
        data = index.load_session(sid)
        seg_stream = None
        if segments[sid]:
            seg_stream = gaze_mod.segments_to_stream(
                segments[sid], sid, speaker_id=data.speaker_id
            )
        out[sid] = (data.words, seg_stream)
    return out


def cmd_align(args, cfg: RunConfig) -> int:
    index = ingest.CorpusIndex(args.index)
    streams = session_streams(index, cfg)
    lines = ["session_id,source_id,target_id,overlap_seconds"]
    summaries = []
    for sid in index.session_ids():
        words, segs = streams[sid]
        pick = {"text": words, "segments": segs}
        source, target = pick[args.source], pick[args.target]
        if source is None or target is None:
            summaries.append(f"{sid}: no segments")
            continue
        amap = join_streams(source, target, min_overlap=args.min_overlap)
        for pair in amap.pairs:
            lines.append(f"{sid},{pair.source_id},{pair.target_id},{_fmt(pair.overlap)}")
        summaries.append(f"{sid}: {len(amap)} pairs, {amap.cardinality.value}")
    _write_lines(args.out, lines)
    for s in summaries:
        print(s)
    return 0


_WHERE_MODALITIES = {
    "text": Modality.TEXT,
    "audio": Modality.AUDIO,
    "visual": Modality.VISUAL,
    "derived": Modality.DERIVED,
    "gaze": Modality.DERIVED,      # address segments are a derived stream
    "segments": Modality.DERIVED,
}


def _parse_where(expr: str):
    """``modality.attr==value`` → (modality, predicate).  attr is cosmetic."""
    if "==" not in expr:
        raise ValidationError(f"where-expression {expr!r} must look like gaze.label==VALUE")
    lhs, value = expr.split("==", 1)
    lhs = lhs.strip()
    value = value.strip()
    if "." not in lhs:
        raise ValidationError(f"where-expression {expr!r}: left side needs modality.attr")
    mod_name, attr = lhs.split(".", 1)
    if mod_name not in _WHERE_MODALITIES:
        raise ValidationError(
            f"unknown modality {mod_name!r}; choose from {sorted(_WHERE_MODALITIES)}"
        )
    if attr not in ("label", "word", "payload"):
        raise ValidationError(f"unknown attribute {attr!r}; choose label, word, or payload")
    return _WHERE_MODALITIES[mod_name], (lambda e: str(e.payload) == value)


def cmd_query(args, cfg: RunConfig) -> int:
    index = ingest.CorpusIndex(args.index)
    select = _WHERE_MODALITIES.get(args.select)
    if select is None:
        raise ValidationError(f"unknown select modality {args.select!r}")
    where_modality, predicate = _parse_where(args.where)
    streams = session_streams(index, cfg)

    lines = ["session_id,id,start,end,payload"]
    hits = 0
    saw_where = False
    for sid in index.session_ids():
        words, segs = streams[sid]
        corpus = [s for s in (words, segs) if s is not None]
        if not any(s.modality is where_modality for s in corpus):
            continue
        saw_where = True
        if not any(s.modality is select for s in corpus):
            continue
        for e in query_crossmodal(corpus, select, predicate, where_modality):
            lines.append(
                f"{sid},{e.id},{_fmt(e.interval.start)},{_fmt(e.interval.end)},{e.payload}"
            )
            hits += 1
    if not saw_where:
        raise ModalityAbsent(f"corpus has no {where_modality.value} stream")
    _write_lines(args.out, lines)
    print(f"{hits} elements -> {args.out}")
    return 0


def build_panel(index: ingest.CorpusIndex, cfg: RunConfig):
    """Panel rows for the addressing regression, plus the party list."""
    sessions, pitches = corpus_word_pitches(index, cfg)
    segments = session_segments(index, cfg)
    profiles = index.speakers()

    addressed: dict[tuple[str, str], bool] = {}
    for sid, data in sessions.items():
        segs = segments[sid]
        if segs:
            seg_stream = gaze_mod.segments_to_stream(segs, sid)
            amap = join_streams(data.words, seg_stream)
            inside = {p.source_id for p in amap.pairs}
        else:
            inside = set()
        for e in data.words:
            addressed[(sid, e.id)] = e.id in inside

    parties = sorted({p.party for p in profiles.values()})
    others = [p for p in parties if p != cfg.target_party]
    rows = []
    skipped = 0
    for wp in pitches:
        if wp.z is None:
            skipped += 1
            continue
        profile = profiles.get(wp.speaker_id)
        if profile is None:
            raise DataError(f"speaker {wp.speaker_id!r} missing from speakers table")
        a = 1.0 if addressed[(wp.session_id, wp.word_id)] else 0.0
        regs = {"addressing": a}
        for p in others:
            regs[f"addressing_x_{p}"] = a if profile.party == p else 0.0
        rows.append(stats.PanelRow(wp.z, wp.speaker_id, regs))
    return rows, parties, skipped


def _result_json(result: stats.RegressionResult) -> dict:
    coef = {}
    for nm in result.regressor_names:
        b = result.coefficients[nm]
        s = result.standard_errors[nm]
        coef[nm] = {
            "estimate": b,
            "std_error": s,
            "ci_low": b - Z_95 * s,
            "ci_high": b + Z_95 * s,
        }
    return {
        "coefficients": coef,
        "n_obs": result.n_obs,
        "n_groups": result.n_groups,
        "deviance": result.deviance,
        "log_likelihood": result.log_likelihood,
    }


def cmd_regress(args, cfg: RunConfig) -> int:
    out_dir = Path(args.out)
    if args.panel is not None:
        rows = _read_panel_csv(args.panel, args.y, args.group, args.x)
        result = stats.fe_regress(rows, allow_single_group=args.allow_single_group)
        parties = None
    else:
        index = ingest.CorpusIndex(args.index)
        rows, parties, skipped = build_panel(index, cfg)
        if skipped:
            print(f"note: {skipped} words without pitch left out")
        result = stats.fe_regress(rows, allow_single_group=args.allow_single_group)

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "regression.json").write_bytes(ingest._json_bytes(_result_json(result)))
    (out_dir / "regression.txt").write_text(stats.render_result_table(result), encoding="utf-8")

    if parties is not None:
        cells = []
        for party in parties:
            for a in (0, 1):
                settings = {}
                if a:
                    settings["addressing"] = 1.0
                    key = f"addressing_x_{party}"
                    if key in result.regressor_names:
                        settings[key] = 1.0
                cells.append((f"{party}|{a}", settings))
        lines = ["party,addressing,predicted,ci_low,ci_high"]
        for m in stats.margins(result, cells):
            party, a = m.label.rsplit("|", 1)
            lines.append(
                f"{party},{a},{_fmt(m.predicted)},{_fmt(m.ci_low)},{_fmt(m.ci_high)}"
            )
        _write_lines(out_dir / "margins.csv", lines)
    print(f"n={result.n_obs} groups={result.n_groups} -> {out_dir}")
    return 0


def _read_panel_csv(path, y_col: str, group_col: str, x_cols: str | None):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"panel file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        for col in (y_col, group_col):
            if col not in header:
                raise ValidationError(f"panel {path} has no column {col!r}")
        regs = [c.strip() for c in x_cols.split(",")] if x_cols else [
            c for c in header if c not in (y_col, group_col)
        ]
        for col in regs:
            if col not in header:
                raise ValidationError(f"panel {path} has no column {col!r}")
        if not regs:
            raise ValidationError("no regressor columns")
        idx = {c: header.index(c) for c in header}
        rows = []
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise DataError(f"{path}:{line_no}: expected {len(header)} fields")
            try:
                rows.append(
                    stats.PanelRow(
                        float(parts[idx[y_col]]),
                        parts[idx[group_col]],
                        {c: float(parts[idx[c]]) for c in regs},
                    )
                )
            except ValueError as e:
                raise DataError(f"{path}:{line_no}: {e}") from e
    return rows


def cmd_fw(args, cfg: RunConfig) -> int:
    if args.counts_a is not None or args.counts_b is not None:
        if not (args.counts_a and args.counts_b):
            raise ValidationError("pass both --counts-a and --counts-b")
        comparisons = [
            ("a_vs_b", _read_counts_csv(args.counts_a), _read_counts_csv(args.counts_b))
        ]
    else:
        index = ingest.CorpusIndex(args.index)
        segments = session_segments(index, cfg)
        profiles = index.speakers()
        streams = [index.load_session(sid).words for sid in index.session_ids()]
        split = stats.four_situation_split(
            streams,
            segments,
            {sid: p.party for sid, p in profiles.items()},
            target_party=cfg.target_party,
        )
        t = cfg.target_party
        named = {
            f"{t}_to_{t}": split.target_to_target,
            f"{t}_to_others": split.target_to_others,
            f"others_to_{t}": split.others_to_target,
            "others_to_others": split.others_to_others,
        }
        comparisons = []
        for name in sorted(named):
            rest = sum(
                (c for other, c in named.items() if other != name), start=type(split.target_to_target)()
            )
            comparisons.append((name, named[name], rest))

    lines = ["situation,word,count,count_rest,delta,variance,z"]
    for name, counts, rest in comparisons:
        result = stats.fightin_words(counts, rest, prior_scale=cfg.prior_scale)
        for s in result:
            lines.append(
                f"{name},{s.word},{_fmt(s.count_a)},{_fmt(s.count_b)},"
                f"{_fmt(s.delta)},{_fmt(s.variance)},{_fmt(s.z)}"
            )
    _write_lines(args.out, lines)
    print(f"{len(lines) - 1} scores -> {args.out}")
    return 0


def _read_counts_csv(path):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"counts file not found: {path}")
    counts = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "word,count":
            raise DataError(f"{path}:1: expected header 'word,count', got {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise DataError(f"{path}:{line_no}: expected 2 fields")
            try:
                counts[parts[0]] = counts.get(parts[0], 0) + float(parts[1])
            except ValueError as e:
                raise DataError(f"{path}:{line_no}: {e}") from e
    return counts


def cmd_advise(args, cfg: RunConfig) -> int:
    kind = {"continuous": latent.DataKind.CONTINUOUS, "discrete": latent.DataKind.DISCRETE}[
        args.data
    ]
    rep = {
        None: None,
        "semantic": latent.Representation.SEMANTIC,
        "non-semantic": latent.Representation.NON_SEMANTIC,
    }[args.representation]
    integ = {
        None: None,
        "explicit": latent.Integration.EXPLICIT,
        "implicit": latent.Integration.IMPLICIT,
    }[args.integration]
    for strategy in latent.advise(latent.StrategyQuery(kind, rep, integ)):
        print(f"{strategy.name} — {strategy.summary}")
    return 0


def cmd_synth(args, cfg: RunConfig) -> int:
    settings = {}
    if args.spec is not None:
        try:
            doc = json.loads(Path(args.spec).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ValidationError(f"spec file not found: {args.spec}") from None
        except json.JSONDecodeError as e:
            raise ValidationError(f"spec {args.spec}: bad JSON: {e.msg}") from e
        known = {f.name for f in fields(synth.SynthSpec)}
        unknown = set(doc) - known
        if unknown:
            raise ValidationError(f"spec {args.spec}: unknown keys {sorted(unknown)}")
        settings.update(doc)
    for name, flag in (
        ("seed", "seed"),
        ("speakers", "speakers"),
        ("words_per_speech", "words"),
        ("planted_pitch_effect", "effect"),
        ("segment_density", "density"),
    ):
        if getattr(args, flag) is not None:
            settings[name] = getattr(args, flag)
    manifest = synth.synth_corpus(synth.SynthSpec(**settings), args.out)
    print(manifest)
    return 0


# --- argument parsing ------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modalign",
        description="Align words, pitch, and gaze on a shared timeline and analyze the result.",
    )
    parser.add_argument("--config", metavar="PATH", help="JSON config file (flags win over it)")
    parser.add_argument("--threads", type=int, metavar="N", help="worker threads for per-session stages")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a corpus into an on-disk index")
    p.add_argument("--manifest", required=True, metavar="PATH", help="corpus manifest JSON")
    p.add_argument("--out", required=True, metavar="DIR", help="index directory to write")
    p.set_defaults(func=cmd_ingest)

    def pitch_flags(p):
        p.add_argument("--frame-length", dest="frame_length", type=int, metavar="SAMPLES",
                       help="analysis frame length in samples")
        p.add_argument("--hop", type=int, metavar="SAMPLES", help="hop between frames in samples")
        p.add_argument("--threshold", type=float, metavar="X",
                       help="voicing threshold on the normalized difference (dimensionless)")
        p.add_argument("--floor", type=float, metavar="HZ", help="search floor in Hz (overrides gender band)")
        p.add_argument("--ceiling", type=float, metavar="HZ", help="search ceiling in Hz (overrides gender band)")

    def address_flags(p):
        p.add_argument("--yaw-min", dest="yaw_min", type=float, metavar="DEG",
                       help="lower edge of the addressing yaw band in degrees")
        p.add_argument("--yaw-max", dest="yaw_max", type=float, metavar="DEG",
                       help="upper edge of the addressing yaw band in degrees")
        p.add_argument("--notes-pitch", dest="notes_pitch", type=float, metavar="DEG",
                       help="pitch angle in degrees below which the speaker is reading notes")
        p.add_argument("--min-words", dest="min_words", type=int, metavar="N",
                       help="minimum words a segment must cover")
        p.add_argument("--label", metavar="NAME", help="label stamped on detected segments")

    p = sub.add_parser("pitch", help="per-word pitch with per-speaker z-scores")
    p.add_argument("--index", required=True, metavar="DIR", help="corpus index directory")
    p.add_argument("--out", required=True, metavar="CSV", help="word-pitch CSV to write")
    pitch_flags(p)
    p.set_defaults(func=cmd_pitch)

    p = sub.add_parser("segments", help="detect address segments from gaze traces")
    p.add_argument("--index", required=True, metavar="DIR", help="corpus index directory")
    p.add_argument("--out", required=True, metavar="CSV", help="segments CSV to write")
    address_flags(p)
    p.set_defaults(func=cmd_segments)

    p = sub.add_parser("align", help="interval-join two element streams")
    p.add_argument("--index", required=True, metavar="DIR", help="corpus index directory")
    p.add_argument("--source", choices=("text", "segments"), default="text", help="source stream")
    p.add_argument("--target", choices=("text", "segments"), default="segments", help="target stream")
    p.add_argument("--min-overlap", dest="min_overlap", type=float, default=0.0, metavar="SECONDS",
                   help="pairs must overlap strictly more than this many seconds")
    p.add_argument("--out", required=True, metavar="CSV", help="alignment pairs CSV to write")
    address_flags(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("query", help="select elements overlapping a condition on another modality")
    p.add_argument("--index", required=True, metavar="DIR", help="corpus index directory")
    p.add_argument("--select", required=True, metavar="MODALITY",
                   help="modality to return (text, audio, visual, derived)")
    p.add_argument("--where", required=True, metavar="EXPR",
                   help="filter like gaze.label==AfD on the other modality")
    p.add_argument("--out", required=True, metavar="CSV", help="matching elements CSV to write")
    address_flags(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("regress", help="fixed-effects regression of pitch on addressing")
    p.add_argument("--index", metavar="DIR", help="corpus index directory")
    p.add_argument("--panel", metavar="CSV", help="regress a prepared panel CSV instead of an index")
    p.add_argument("--y", metavar="COL", default="y", help="outcome column (panel mode)")
    p.add_argument("--group", metavar="COL", default="group", help="fixed-effect group column (panel mode)")
    p.add_argument("--x", metavar="COLS", help="comma-separated regressor columns (panel mode; default: rest)")
    p.add_argument("--target-party", dest="target_party", metavar="NAME",
                   help="party whose addressing anchors the interaction baseline")
    p.add_argument("--allow-single-group", dest="allow_single_group", action="store_true",
                   help="permit a panel with a single group")
    p.add_argument("--out", required=True, metavar="DIR", help="directory for results JSON/table/margins")
    pitch_flags(p)
    address_flags(p)
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("fw", help="log-odds lexical comparison across the four addressing situations")
    p.add_argument("--index", metavar="DIR", help="corpus index directory")
    p.add_argument("--counts-a", dest="counts_a", metavar="CSV", help="word,count CSV for group a")
    p.add_argument("--counts-b", dest="counts_b", metavar="CSV", help="word,count CSV for group b")
    p.add_argument("--prior", type=float, metavar="X", help="total Dirichlet prior mass (dimensionless)")
    p.add_argument("--target-party", dest="target_party", metavar="NAME",
                   help="party defining the target audience")
    p.add_argument("--out", required=True, metavar="CSV", help="z-score CSV to write")
    address_flags(p)
    p.set_defaults(func=cmd_fw)

    p = sub.add_parser("advise", help="recommend alignment strategies for a problem shape")
    p.add_argument("--data", required=True, choices=("continuous", "discrete"),
                   help="are the modality's elements continuous signals or discrete units")
    p.add_argument("--representation", choices=("semantic", "non-semantic"),
                   help="does correspondence ride on shared meaning (discrete only)")
    p.add_argument("--integration", choices=("explicit", "implicit"),
                   help="is the mapping produced explicitly or absorbed by a model (discrete only)")
    p.set_defaults(func=cmd_advise)

    p = sub.add_parser("synth", help="generate a synthetic corpus with planted ground truth")
    p.add_argument("--out", required=True, metavar="DIR", help="corpus directory to write")
    p.add_argument("--spec", metavar="PATH", help="SynthSpec JSON (flags win over it)")
    p.add_argument("--seed", type=int, metavar="N", help="random seed")
    p.add_argument("--speakers", type=int, metavar="N", help="number of speakers (one session each)")
    p.add_argument("--words", type=int, metavar="N", help="words per speech")
    p.add_argument("--effect", type=float, metavar="SD",
                   help="planted pitch boost inside segments, in speaker-SD units")
    p.add_argument("--density", type=float, metavar="FRACTION",
                   help="target fraction of words inside address segments")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg = _merge_flags(cfg, args)
        if args.command == "regress" and (args.index is None) == (args.panel is None):
            raise ValidationError("pass exactly one of --index or --panel")
        if args.command == "fw" and args.index is None and args.counts_a is None:
            raise ValidationError("pass --index or --counts-a/--counts-b")
        return args.func(args, cfg)
    except ValidationError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 2
    except DataError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 3
    except EngineError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
