"""Acceptance suite: one test per release criterion.

Each test prints a single ``ACCEPTANCE PASS`` line when its criterion holds
(run with ``pytest -s`` to see them); a failing criterion shows up as a
normal pytest failure for that line instead.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path

from fastapi.testclient import TestClient

from guifusion import (
    CrashOutcome,
    DfsComplete,
    NgramWeighted,
    RipConfig,
    Store,
    UniformRandom,
    assemble_report,
    crawl_for_crashes,
    detect_duplicates,
    infer_gui_state,
    ngram_score,
    parse_app_model,
    render_report,
    replay_report,
    report_similarity,
    rip,
    suggest_next,
    train_ngram,
    train_ngram_segments,
    triage_report,
    universe_by_id,
)
from guifusion.errors import HistoryHitsCrashError
from guifusion.maintenance import SimilarityConfig
from guifusion.service import create_app

from .conftest import FIXTURES, fixture_doc, fixture_source
from .oracles import oracle_paths_up_to, oracle_reachable, oracle_shortest_crash_paths
from .test_flow import steps_from
from .test_service import fixed_clock, tree_digest

UNBOUNDED = RipConfig(max_events=10**9, max_depth=10**9)


def _passed(name: str) -> None:
    print(f"ACCEPTANCE PASS: {name}")


def test_ripper_oracle_equivalence():
    fixtures = ["noteapp-v1", "noteapp-v2", "noteapp-v2-broken", "galleryapp-v1"]
    assert "noteapp-v1" in fixtures and len(fixtures) >= 3
    for name in fixtures:
        doc = fixture_doc(name)
        model = parse_app_model(json.dumps(doc))
        started = time.perf_counter()
        efg = rip(model, UNBOUNDED).efg
        elapsed = time.perf_counter() - started
        fingerprints, oracle_edges, oracle_cold = oracle_reachable(doc)
        ripped_edges = {
            (
                source,
                token.action,
                token.component,
                target.marker if isinstance(target, CrashOutcome) else target,
            )
            for (source, token), target in efg.edges.items()
        }
        assert set(efg.states) == set(fingerprints.values()), name
        assert ripped_edges == oracle_edges, name
        assert efg.cold_start == oracle_cold, name
        assert elapsed < 1.0, f"{name} ripped in {elapsed:.3f}s"
    _passed("ripper oracle equivalence on 4 fixture models")


def test_round_trip_reproduction(noteapp_v1, noteapp_efg, noteapp_universe):
    started = time.perf_counter()
    paths = oracle_paths_up_to(fixture_doc("noteapp-v1"), 5)
    assert paths
    for path in paths:
        report = assemble_report(
            "round trip", "emulator", "generated", steps_from(*path),
            noteapp_efg, noteapp_universe,
        )
        result = replay_report(report, noteapp_v1)
        assert result.outcome == "reproduced", path
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0
    _passed(f"round-trip reproduction of all {len(paths)} paths (length <= 5)")


def test_suggestion_soundness_completeness(
    noteapp_efg, noteapp_ngram, noteapp_universe
):
    started = time.perf_counter()
    histories = [()] + oracle_paths_up_to(fixture_doc("noteapp-v1"), 4)
    for history in histories:
        suggestion = suggest_next(
            steps_from(*history), noteapp_efg, noteapp_ngram, noteapp_universe
        )
        inferred = infer_gui_state(steps_from(*history), noteapp_efg)
        assert list(suggestion.inferred_states) == inferred
        assert len(inferred) == 1, history
        expected = {token for token, _ in noteapp_efg.outgoing(inferred[0])}
        assert suggestion.pairs() == expected, history
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0
    _passed(
        f"suggestions equal outgoing edge labels for all {len(histories)} valid histories"
    )


def test_ngram_correctness(noteapp_rip, noteapp_efg):
    trained = train_ngram_segments(noteapp_rip.trace, vocabulary=noteapp_efg.tokens())
    contexts = list(trained.counts) + [trained.context_for([])]
    for context in contexts:
        total = sum(
            ngram_score(trained, list(context), candidate)
            for candidate in trained.vocabulary
        )
        assert abs(total - 1.0) < 1e-9, context
    bigram = train_ngram(
        ["tap@btn_new", "type@txt_title", "tap@btn_save"],
        n=2,
        vocabulary=noteapp_efg.tokens(),
    )
    assert len(bigram.vocabulary) == 7
    assert ngram_score(bigram, ["tap@btn_new"], "type@txt_title") == 0.25
    _passed("n-gram probabilities normalize and the hand-computed 0.25 matches")


def test_crash_crawling(noteapp_v1):
    reports = crawl_for_crashes(noteapp_v1, DfsComplete())
    assert len(reports) == 1
    tokens = [t.text for t in reports[0].tokens()]
    oracle = oracle_shortest_crash_paths(fixture_doc("noteapp-v1"))
    assert tokens == list(oracle[0][0])
    assert len(tokens) == 2

    random_one = crawl_for_crashes(noteapp_v1, UniformRandom(seed=13, budget=250))
    random_two = crawl_for_crashes(noteapp_v1, UniformRandom(seed=13, budget=250))
    assert [r.to_dict() for r in random_one] == [r.to_dict() for r in random_two]

    weighted_one = crawl_for_crashes(noteapp_v1, NgramWeighted(seed=13, budget=250))
    weighted_two = crawl_for_crashes(noteapp_v1, NgramWeighted(seed=13, budget=250))
    assert [r.to_dict() for r in weighted_one] == [r.to_dict() for r in weighted_two]
    _passed("dfs-complete matches the shortest-path oracle; seeded strategies repeat")


def test_adaptive_replay(noteapp_efg, noteapp_universe, noteapp_v2, noteapp_v2_broken):
    report = assemble_report(
        "back navigation", "emulator", "desc",
        steps_from("tap@btn_new", "tap@btn_back"),
        noteapp_efg, noteapp_universe,
    )
    on_v2 = replay_report(report, noteapp_v2)
    assert on_v2.outcome == "reproduced"
    assert on_v2.steps[1].match_level == "kind+label"

    on_broken = replay_report(report, noteapp_v2_broken)
    assert on_broken.outcome == "diverged"
    assert on_broken.divergence_ordinal == 2
    _passed("adaptive replay: kind+label rescue on v2, divergence at ordinal 2 on broken v2")


def test_dedup_properties(noteapp_efg, noteapp_universe):
    def build(report_id, *tokens):
        return assemble_report(
            "dup", "emulator", "desc", steps_from(*tokens),
            noteapp_efg, noteapp_universe, report_id=report_id,
        )

    a = build("r-000001", "tap@btn_new", "type@txt_title", "tap@btn_save")
    b = build("r-000002", "tap@btn_new", "tap@btn_save")
    twin = build("r-000003", "tap@btn_new", "type@txt_title", "tap@btn_save")

    assert report_similarity(a, b) == report_similarity(b, a)
    assert report_similarity(a, twin) == 1.0
    assert abs(report_similarity(a, b) - 0.4) < 1e-9
    strict = detect_duplicates([a, b], SimilarityConfig(tau=0.8))
    assert not strict.pairs
    loose = detect_duplicates([a, b], SimilarityConfig(tau=0.3))
    assert len(loose.pairs) == 1
    _passed("dedup: symmetry, identity=1.0, worked pair=0.4, tau gates 0.8/0.3")


def test_determinism(tmp_path, noteapp_v1, noteapp_efg, noteapp_universe):
    store_a = Store(tmp_path / "a", clock=fixed_clock)
    store_b = Store(tmp_path / "b", clock=fixed_clock)
    store_a.rip_app(noteapp_v1)
    store_b.rip_app(noteapp_v1)
    assert tree_digest(store_a.root) == tree_digest(store_b.root)

    report = assemble_report(
        "determinism", "emulator", "desc", steps_from("tap@btn_new"),
        noteapp_efg, noteapp_universe,
    )
    for fmt in ("json", "markdown", "html"):
        assert render_report(report, fmt) == render_report(report, fmt)
    _passed("byte-identical rip databases and renders")


def test_report_structure(noteapp_efg, noteapp_universe):
    report = assemble_report(
        "structure", "emulator", "desc",
        steps_from("tap@btn_new", "type@txt_title", "tap@btn_save"),
        noteapp_efg, noteapp_universe,
    )
    md = render_report(report, "markdown")
    assert sum(1 for line in md.splitlines() if line.startswith("## ")) == 3
    html = render_report(report, "html")
    assert html.count("<section") == 3
    sections = json.loads(render_report(report, "json"))
    assert list(sections) == ["summary", "steps", "screenshots"]
    for step in sections["steps"]:
        for field in ("action", "kind", "relative_location", "activity", "screenshot_cropped"):
            assert step[field], (step["ordinal"], field)
    _passed("three sections and five per-step fields in every render")


def test_service_fidelity(tmp_path, noteapp_v1, noteapp_v2):
    store = Store(tmp_path / "store", clock=fixed_clock)
    store.rip_app(noteapp_v1)
    store.rip_app(noteapp_v2)
    client = TestClient(create_app(store))

    created = client.post(
        "/api/sessions", json={"app_id": "noteapp", "version": "1.0"}
    ).json()
    session_id = created["session"]["session_id"]
    bundle = store.bundle("noteapp", "1.0")
    expected = suggest_next([], bundle.efg, bundle.ngram, bundle.universe)
    assert created["suggestion"] == expected.to_dict()

    for action, component, extra in (
        ("tap", "btn_new", {}),
        ("type", "txt_title", {"input_text": "test"}),
        ("tap", "btn_save", {}),
    ):
        response = client.post(
            f"/api/sessions/{session_id}/steps",
            json={"action": action, "component": component, **extra},
        )
        assert response.status_code == 200
    report_id = client.post(
        f"/api/sessions/{session_id}/finalize",
        json={"title": "t", "device": "d", "description": "x"},
    ).json()["report_id"]

    report = store.load_report(report_id)
    replay_payload = client.post(
        f"/api/reports/{report_id}/replay", json={"version": "2.0"}
    ).json()
    assert replay_payload == replay_report(report, store.bundle("noteapp", "2.0").model).to_dict()

    twin_session = client.post(
        "/api/sessions", json={"app_id": "noteapp", "version": "1.0"}
    ).json()["session"]["session_id"]
    for action, component, extra in (
        ("tap", "btn_new", {}),
        ("type", "txt_title", {"input_text": "test"}),
        ("tap", "btn_save", {}),
    ):
        client.post(
            f"/api/sessions/{twin_session}/steps",
            json={"action": action, "component": component, **extra},
        )
    twin_id = client.post(
        f"/api/sessions/{twin_session}/finalize",
        json={"title": "t", "device": "d", "description": "x"},
    ).json()["report_id"]
    dup_payload = client.get(f"/api/reports/{report_id}/duplicates").json()
    expected_score = report_similarity(report, store.load_report(twin_id))
    assert dup_payload["candidates"] == [
        {"report_id": twin_id, "score": expected_score, "duplicate": True}
    ]

    owners = {"alice": {"EditorActivity": 5, "MainActivity": 1}, "bob": {"ListActivity": 3}}
    from guifusion.canonical import write_json

    write_json(store.owners_path(), owners)
    triage_payload = client.get(f"/api/reports/{report_id}/triage").json()
    assert triage_payload["ranking"] == [
        {"developer": dev, "score": score}
        for dev, score in triage_report(report, owners)
    ]

    before = tree_digest(store.root)
    reopened = Store(store.root, clock=fixed_clock)
    client2 = TestClient(create_app(reopened))
    assert client2.get("/api/reports").json() == client.get("/api/reports").json()
    assert tree_digest(store.root) == before
    _passed("service payloads equal core outputs; store round-trips byte-identically")
