"""Interval algebra, stream construction, temporal joins, cross-modal queries."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import brute_force_join
from modalign.errors import (
    EmptyStream,
    MixedPayload,
    ModalityAbsent,
    NegativeInterval,
    OverlappingWords,
    SessionMismatch,
)
from modalign.timeline import (
    Cardinality,
    Element,
    Modality,
    TimeInterval,
    build_stream,
    join_streams,
    overlap,
    query_crossmodal,
)


def el(eid, start, end, payload=1.0):
    return Element(eid, TimeInterval(start, end), payload)


def derived(spans, session="s", prefix="e"):
    return build_stream(
        Modality.DERIVED,
        session,
        [el(f"{prefix}{i:03d}", a, b) for i, (a, b) in enumerate(spans)],
    )


def random_spans(rng, n):
    starts = rng.uniform(0.0, 50.0, size=n)
    durations = rng.exponential(1.0, size=n)
    durations[rng.uniform(size=n) < 0.2] = 0.0  # sprinkle in point samples
    return list(zip(starts, starts + durations))


# --- intervals -------------------------------------------------------------

def test_interval_basics():
    iv = TimeInterval(1.0, 2.5)
    assert iv.duration == 1.5
    assert not iv.point
    assert TimeInterval(3.0, 3.0).point


def test_interval_rejects_negative():
    with pytest.raises(NegativeInterval):
        TimeInterval(-0.1, 1.0)
    with pytest.raises(NegativeInterval):
        TimeInterval(2.0, 1.0)


def test_overlap_cases():
    assert overlap(TimeInterval(0, 2), TimeInterval(1, 3)) == 1.0
    assert overlap(TimeInterval(0, 10), TimeInterval(2, 3)) == 1.0  # containment
    assert overlap(TimeInterval(0, 1), TimeInterval(1, 2)) == 0.0  # touching
    assert overlap(TimeInterval(0, 1), TimeInterval(5, 6)) == 0.0
    # a point inside a covering interval still has zero measure
    assert overlap(TimeInterval(0, 10), TimeInterval(4, 4)) == 0.0


@given(
    st.tuples(
        st.floats(0, 100, allow_nan=False),
        st.floats(0, 100, allow_nan=False),
        st.floats(0, 100, allow_nan=False),
        st.floats(0, 100, allow_nan=False),
    )
)
def test_overlap_symmetric_and_bounded(vals):
    a1, d1, a2, d2 = vals
    a = TimeInterval(a1, a1 + d1)
    b = TimeInterval(a2, a2 + d2)
    assert overlap(a, b) == overlap(b, a)
    assert 0.0 <= overlap(a, b) <= min(a.duration, b.duration)


# --- stream construction ---------------------------------------------------

def test_build_stream_sorts_elements():
    s = build_stream(
        Modality.DERIVED, "s", [el("b", 5, 6), el("a", 1, 2), el("c", 3, 4)]
    )
    assert [e.id for e in s] == ["a", "c", "b"]


def test_build_stream_rejects_empty():
    with pytest.raises(EmptyStream):
        build_stream(Modality.TEXT, "s", [])


def test_build_stream_rejects_mixed_payloads():
    with pytest.raises(MixedPayload):
        build_stream(Modality.DERIVED, "s", [el("a", 0, 1, "word"), el("b", 2, 3, 1.5)])
    with pytest.raises(MixedPayload):
        build_stream(Modality.DERIVED, "s", [el("a", 0, 1, [1, 2])])


def test_build_stream_rejects_duplicate_ids():
    with pytest.raises(ValueError):
        build_stream(Modality.DERIVED, "s", [el("a", 0, 1), el("a", 2, 3)])


def test_text_words_may_touch_but_not_overlap():
    ok = build_stream(
        Modality.TEXT, "s", [el("w0", 0.0, 0.5, "ja"), el("w1", 0.5, 1.0, "nein")]
    )
    assert len(ok) == 2
    with pytest.raises(OverlappingWords):
        build_stream(
            Modality.TEXT, "s", [el("w0", 0.0, 0.6, "ja"), el("w1", 0.5, 1.0, "nein")]
        )


def test_non_text_streams_may_overlap():
    s = derived([(0.0, 2.0), (1.0, 3.0)])
    assert len(s) == 2


@given(st.permutations(list(range(6))))
def test_build_stream_order_invariant(perm):
    spans = [(0.0, 1.0), (0.5, 2.0), (2.0, 2.0), (3.0, 4.5), (4.0, 4.1), (6.0, 7.0)]
    elems = [el(f"e{i}", *spans[i]) for i in range(6)]
    reference = build_stream(Modality.DERIVED, "s", elems)
    shuffled = build_stream(Modality.DERIVED, "s", [elems[i] for i in perm])
    assert shuffled == reference


# --- joins -----------------------------------------------------------------

def test_join_matches_brute_force_randomized():
    rng = np.random.default_rng(42)
    for trial in range(60):
        na, nb = rng.integers(1, 250, size=2)
        a = derived(random_spans(rng, int(na)), prefix="a")
        b = derived(random_spans(rng, int(nb)), prefix="b")
        min_ov = float(rng.choice([0.0, 0.0, 0.25]))
        got = {(p.source_id, p.target_id): p.overlap for p in join_streams(a, b, min_ov).pairs}
        assert got == brute_force_join(a, b, min_ov)


def test_join_pairs_ordered_by_position():
    a = derived([(0, 4), (1, 5), (2, 6)], prefix="a")
    b = derived([(0, 3), (2, 7)], prefix="b")
    pairs = join_streams(a, b).pairs
    keys = [(p.source_id, p.target_id) for p in pairs]
    assert keys == sorted(keys)


def test_touching_intervals_never_align():
    a = derived([(0.0, 1.0)], prefix="a")
    b = derived([(1.0, 2.0)], prefix="b")
    assert join_streams(a, b).pairs == ()


def test_point_elements_never_align():
    words = derived([(0.0, 10.0)], prefix="w")
    points = derived([(5.0, 5.0)], prefix="p")
    assert join_streams(words, points).pairs == ()
    assert join_streams(points, words).pairs == ()


def test_min_overlap_is_strict():
    a = derived([(0.0, 1.0)], prefix="a")
    b = derived([(0.5, 2.0)], prefix="b")  # overlap exactly 0.5
    assert len(join_streams(a, b, min_overlap=0.25)) == 1
    assert len(join_streams(a, b, min_overlap=0.5)) == 0


def test_join_rejects_cross_session():
    a = derived([(0, 1)], session="s1")
    b = derived([(0, 1)], session="s2")
    with pytest.raises(SessionMismatch):
        join_streams(a, b)


# --- cardinality -----------------------------------------------------------

def test_cardinality_classification():
    one = derived([(0, 1), (2, 3)], prefix="a")
    assert join_streams(one, derived([(0.5, 2.5)], prefix="b")).cardinality is Cardinality.MANY_TO_ONE
    assert join_streams(derived([(0.5, 2.5)], prefix="b"), one).cardinality is Cardinality.ONE_TO_MANY
    assert join_streams(one, derived([(0, 1), (2, 3)], prefix="b")).cardinality is Cardinality.ONE_TO_ONE
    many = derived([(0, 3), (1, 4)], prefix="a")
    assert join_streams(many, derived([(0, 3), (1, 4)], prefix="b")).cardinality is Cardinality.MANY_TO_MANY


def test_empty_alignment_is_degenerate_many_to_many():
    a = derived([(0, 1)], prefix="a")
    b = derived([(5, 6)], prefix="b")
    amap = join_streams(a, b)
    assert amap.pairs == ()
    assert amap.cardinality is Cardinality.MANY_TO_MANY


# --- cross-modal queries ---------------------------------------------------

def words_stream(session, toks_spans):
    return build_stream(
        Modality.TEXT,
        session,
        [el(f"w{i:03d}", a, b, tok) for i, (tok, a, b) in enumerate(toks_spans)],
    )


def test_query_selects_overlapping_elements():
    words = words_stream("s", [("ja", 0, 1), ("nein", 1, 2), ("doch", 4, 5)])
    segs = build_stream(Modality.DERIVED, "s", [el("g0", 0.5, 1.5, "AfD")])
    hits = query_crossmodal([words, segs], Modality.TEXT, lambda e: e.payload == "AfD", Modality.DERIVED)
    assert [e.id for e in hits] == ["w000", "w001"]


def test_query_deduplicates_and_orders():
    words = words_stream("s", [("a", 0, 3), ("b", 3, 4)])
    segs = build_stream(
        Modality.DERIVED, "s", [el("g0", 0.0, 1.5, "AfD"), el("g1", 1.0, 3.5, "AfD")]
    )
    hits = query_crossmodal([words, segs], Modality.TEXT, lambda e: True, Modality.DERIVED)
    # w000 overlaps both segments but appears once, in timeline order
    assert [e.id for e in hits] == ["w000", "w001"]


def test_query_respects_sessions():
    words_a = words_stream("sa", [("x", 0, 1)])
    words_b = words_stream("sb", [("y", 0, 1)])
    segs_a = build_stream(Modality.DERIVED, "sa", [el("g0", 0.0, 1.0, "AfD")])
    hits = query_crossmodal(
        [words_a, words_b, segs_a], Modality.TEXT, lambda e: True, Modality.DERIVED
    )
    assert [e.id for e in hits] == ["w000"]
    assert hits[0].payload == "x"


def test_query_requires_both_modalities():
    words = words_stream("s", [("x", 0, 1)])
    with pytest.raises(ModalityAbsent):
        query_crossmodal([words], Modality.TEXT, lambda e: True, Modality.DERIVED)
    with pytest.raises(ModalityAbsent):
        query_crossmodal([words], Modality.DERIVED, lambda e: True, Modality.TEXT)


def test_query_matches_brute_force_randomized():
    rng = np.random.default_rng(3)
    for trial in range(25):
        words = derived(random_spans(rng, 40), prefix="w")
        words = build_stream(Modality.AUDIO, "s", list(words))  # any non-filter modality
        marks = rng.uniform(size=30) < 0.4
        segs = build_stream(
            Modality.DERIVED,
            "s",
            [
                el(f"g{i:03d}", a, b, "hit" if marks[i] else "miss")
                for i, (a, b) in enumerate(random_spans(rng, 30))
            ],
        )
        got = query_crossmodal([words, segs], Modality.AUDIO, lambda e: e.payload == "hit", Modality.DERIVED)
        matched = [e for e in segs if e.payload == "hit"]
        expected = sorted(
            (
                w.id
                for w in words
                if any(
                    min(w.interval.end, g.interval.end) - max(w.interval.start, g.interval.start) > 0
                    for g in matched
                )
            ),
        )
        assert sorted(e.id for e in got) == expected
