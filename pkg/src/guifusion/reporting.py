"""Bug reports: assembly, rendering, natural-language steps, cross-version
replay with adaptive component matching, and automated crash crawling.

A report presents three sections: preliminary information (title, device,
description), the numbered step list where every step carries its action,
component type, relative location, source activity and component
screenshot, and the ordered full screenshots, one per step.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from html import escape as html_escape
from typing import Any, Mapping, Sequence

from .appmodel import AppModel, ComponentRecord, universe_by_id
from .canonical import canonical_json, content_id
from .errors import (
    EmptyStepsError,
    UnresolvedComponentError,
)
from .flow import NGramModel, Step, train_ngram_segments, uniform_ngram
from .ripper import (
    NOOP,
    CrashOutcome,
    EventFlowGraph,
    EventToken,
    GuiState,
    RipConfig,
    ScreenshotEntry,
    cold_start,
    execute_event,
    actionable_pairs,
    rip,
)
from .screenshots import crop_screenshot, render_screenshot

#: Fixed timestamp used for machine-generated reports so that equal inputs
#: produce byte-identical artifacts.
EPOCH_TIMESTAMP = "1970-01-01T00:00:00Z"

_VERBS = {"tap": "Tap", "long-touch": "Long-touch", "swipe": "Swipe", "type": "Type"}

MATCH_EXACT_ID = "exact-id"
MATCH_KIND_LABEL = "kind+label"
MATCH_KIND_LOCATION = "kind+location"
MATCH_NONE = "none"

OUTCOME_REPRODUCED = "reproduced"
OUTCOME_DIVERGED = "diverged"
OUTCOME_CRASH_REPRODUCED = "crash-reproduced"


@dataclass
class ReportStep:
    """A step as it appears in a finalized report: the raw event plus the
    five per-step presentation fields and the screenshot references."""

    ordinal: int
    action: str
    component: str
    input_text: str | None
    note: str | None
    override: bool
    kind: str
    label: str
    relative_location: str
    activity: str
    screen: str
    sentence: str
    state_before: str | None = None
    state_after: str | None = None
    crash: str | None = None
    screenshot_full: str | None = None
    screenshot_cropped: str | None = None

    @property
    def event(self) -> EventToken:
        return EventToken(self.action, self.component)

    def to_dict(self) -> dict[str, Any]:
        return {
            "ordinal": self.ordinal,
            "action": self.action,
            "component": self.component,
            "input_text": self.input_text,
            "note": self.note,
            "override": self.override,
            "kind": self.kind,
            "label": self.label,
            "relative_location": self.relative_location,
            "activity": self.activity,
            "screen": self.screen,
            "sentence": self.sentence,
            "state_before": self.state_before,
            "state_after": self.state_after,
            "crash": self.crash,
            "screenshot_full": self.screenshot_full,
            "screenshot_cropped": self.screenshot_cropped,
        }

    @staticmethod
    def from_dict(raw: Mapping[str, Any]) -> "ReportStep":
        return ReportStep(**{k: raw[k] for k in (
            "ordinal", "action", "component", "input_text", "note", "override",
            "kind", "label", "relative_location", "activity", "screen", "sentence",
            "state_before", "state_after", "crash", "screenshot_full",
            "screenshot_cropped",
        )})


@dataclass
class BugReport:
    report_id: str
    title: str
    device: str
    description: str
    app_id: str
    app_version: str
    created_at: str
    steps: list[ReportStep]

    def tokens(self) -> list[EventToken]:
        return [step.event for step in self.steps]

    def activities(self) -> set[str]:
        return {step.activity for step in self.steps}

    def to_dict(self) -> dict[str, Any]:
        return {
            "report_id": self.report_id,
            "title": self.title,
            "device": self.device,
            "description": self.description,
            "app_id": self.app_id,
            "app_version": self.app_version,
            "created_at": self.created_at,
            "steps": [step.to_dict() for step in self.steps],
        }

    @staticmethod
    def from_dict(raw: Mapping[str, Any]) -> "BugReport":
        return BugReport(
            report_id=raw["report_id"],
            title=raw["title"],
            device=raw["device"],
            description=raw["description"],
            app_id=raw["app_id"],
            app_version=raw["app_version"],
            created_at=raw["created_at"],
            steps=[ReportStep.from_dict(s) for s in raw["steps"]],
        )


@dataclass
class ReplayStepRecord:
    ordinal: int
    match_level: str
    resolved_component: str | None
    result: str | None  # successor fingerprint, CRASH:<name>, or None

    def to_dict(self) -> dict[str, Any]:
        return {
            "ordinal": self.ordinal,
            "match_level": self.match_level,
            "resolved_component": self.resolved_component,
            "result": self.result,
        }


@dataclass
class ReplayResult:
    outcome: str
    steps: list[ReplayStepRecord]
    divergence_ordinal: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "outcome": self.outcome,
            "divergence_ordinal": self.divergence_ordinal,
            "steps": [record.to_dict() for record in self.steps],
        }


@dataclass(frozen=True)
class DfsComplete:
    """Exhaustive exploration; reported paths are BFS-shortest."""

    name = "dfs-complete"


@dataclass(frozen=True)
class UniformRandom:
    seed: int
    budget: int
    name = "uniform-random"

    def __post_init__(self) -> None:
        if self.budget <= 0:
            raise ValueError("budget must be positive")


@dataclass(frozen=True)
class NgramWeighted:
    seed: int
    budget: int
    name = "ngram-weighted"

    def __post_init__(self) -> None:
        if self.budget <= 0:
            raise ValueError("budget must be positive")


CrawlStrategy = DfsComplete | UniformRandom | NgramWeighted


def generate_step_sentence(step: Step | ReportStep, record: ComponentRecord) -> str:
    """Natural-language rendering of one step, e.g.

        Tap the "Save" button located on the bottom-left of the screen.

    Typing appends the entered text; empty labels drop the quoted-label
    phrase entirely.
    """
    event = step.event
    if record.component_id != event.component:
        raise ValueError(
            f"record is for '{record.component_id}', step acts on '{event.component}'"
        )
    verb = _VERBS[event.action]
    label_part = f' "{record.label}"' if record.label else ""
    sentence = (
        f"{verb} the{label_part} {record.kind} located on the "
        f"{record.relative_location} of the screen"
    )
    if event.action == "type":
        sentence += f' entering "{step.input_text}"'
    return sentence + "."


def assemble_report(
    title: str,
    device: str,
    description: str,
    steps: Sequence[Step],
    efg: EventFlowGraph,
    universe: Mapping[str, ComponentRecord],
    report_id: str = "draft",
    created_at: str = EPOCH_TIMESTAMP,
) -> BugReport:
    """Build a finalized report from validated steps.

    Each step is enriched with its five presentation fields from the
    component universe; state fingerprints and screenshot references are
    resolved by walking the event-flow graph from cold start for as long as
    the steps keep matching edges.
    """
    if not steps:
        raise EmptyStepsError("a report needs at least one step")
    report_steps: list[ReportStep] = []
    current: str | None = efg.cold_start
    for i, step in enumerate(steps):
        record = universe.get(step.event.component)
        if record is None:
            raise UnresolvedComponentError(
                f"step {i + 1} references unknown component '{step.event.component}'"
            )
        state_before = current
        state_after: str | None = None
        crash: str | None = None
        shot: ScreenshotEntry | None = None
        if current is not None:
            target = efg.edge_target(current, step.event)
            shot = efg.screenshots.get((current, step.event.component))
            if isinstance(target, CrashOutcome):
                crash = target.exception_name
                current = None
            elif target is not None:
                state_after = target
                current = target
            else:
                current = None  # untracked from here on
        report_steps.append(
            ReportStep(
                ordinal=i + 1,
                action=step.event.action,
                component=step.event.component,
                input_text=step.input_text,
                note=step.note,
                override=step.override,
                kind=record.kind,
                label=record.label,
                relative_location=record.relative_location,
                activity=record.activity,
                screen=record.screen,
                sentence=generate_step_sentence(step, record),
                state_before=state_before,
                state_after=state_after,
                crash=crash,
                screenshot_full=shot.full if shot else None,
                screenshot_cropped=shot.cropped if shot else None,
            )
        )
    return BugReport(
        report_id=report_id,
        title=title,
        device=device,
        description=description,
        app_id=efg.app_id,
        app_version=efg.version,
        created_at=created_at,
        steps=report_steps,
    )


# --------------------------------------------------------------------------
# rendering


def render_report(report: BugReport, format: str = "json",
                  screenshot_base: str = "/api/screenshots/") -> str:
    """Deterministic three-section rendering: summary, steps, screenshots."""
    if format == "json":
        return canonical_json(_report_sections(report))
    if format == "markdown" or format == "md":
        return _render_markdown(report, screenshot_base)
    if format == "html":
        return _render_html(report, screenshot_base)
    raise ValueError(f"unknown report format: {format!r}")


def _report_sections(report: BugReport) -> dict[str, Any]:
    return {
        "summary": {
            "report_id": report.report_id,
            "title": report.title,
            "device": report.device,
            "description": report.description,
            "app_id": report.app_id,
            "app_version": report.app_version,
            "created_at": report.created_at,
        },
        "steps": [step.to_dict() for step in report.steps],
        "screenshots": [
            {"ordinal": step.ordinal, "full": step.screenshot_full}
            for step in report.steps
        ],
    }


def _shot_url(base: str, shot_id: str | None) -> str:
    return f"{base}{shot_id}.svg" if shot_id else "(unavailable)"


def _render_markdown(report: BugReport, base: str) -> str:
    lines = [
        "## Summary",
        "",
        f"- Report: {report.report_id}",
        f"- Title: {report.title}",
        f"- Device: {report.device}",
        f"- App: {report.app_id} {report.app_version}",
        f"- Created: {report.created_at}",
        "",
        report.description,
        "",
        "## Steps to Reproduce",
        "",
    ]
    for step in report.steps:
        lines.append(f"{step.ordinal}. {step.sentence}")
        lines.append(f"   - action: {step.action}")
        lines.append(f"   - component type: {step.kind}")
        lines.append(f"   - relative location: {step.relative_location}")
        lines.append(f"   - activity: {step.activity}")
        lines.append(
            f"   - component screenshot: {_shot_url(base, step.screenshot_cropped)}"
        )
        if step.input_text is not None:
            lines.append(f'   - entered text: "{step.input_text}"')
        if step.note:
            lines.append(f"   - note: {step.note}")
        if step.crash:
            lines.append(f"   - crash: {step.crash}")
    lines.append("")
    lines.append("## Screenshots")
    lines.append("")
    for step in report.steps:
        lines.append(f"{step.ordinal}. {_shot_url(base, step.screenshot_full)}")
    lines.append("")
    return "\n".join(lines)


def _render_html(report: BugReport, base: str) -> str:
    e = html_escape
    rows = []
    for step in report.steps:
        cropped = (
            f'<img src="{e(_shot_url(base, step.screenshot_cropped))}" '
            f'alt="step {step.ordinal} component"/>'
            if step.screenshot_cropped
            else "(unavailable)"
        )
        extra = ""
        if step.input_text is not None:
            extra += f'<div class="entered">entered: &quot;{e(step.input_text)}&quot;</div>'
        if step.note:
            extra += f'<div class="note">note: {e(step.note)}</div>'
        if step.crash:
            extra += f'<div class="crash">crash: {e(step.crash)}</div>'
        rows.append(
            "<tr>"
            f"<td>{step.ordinal}</td>"
            f"<td>{e(step.sentence)}{extra}</td>"
            f"<td>{e(step.action)}</td>"
            f"<td>{e(step.kind)}</td>"
            f"<td>{e(step.relative_location)}</td>"
            f"<td>{e(step.activity)}</td>"
            f"<td>{cropped}</td>"
            "</tr>"
        )
    shots = []
    for step in report.steps:
        img = (
            f'<img src="{e(_shot_url(base, step.screenshot_full))}" '
            f'alt="step {step.ordinal} screen"/>'
            if step.screenshot_full
            else "(unavailable)"
        )
        shots.append(f'<figure><figcaption>Step {step.ordinal}</figcaption>{img}</figure>')
    parts = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8"/>',
        f"<title>{e(report.title)}</title>",
        "<style>",
        "body{font-family:sans-serif;margin:2rem;}",
        "table{border-collapse:collapse;}",
        "td,th{border:1px solid #999;padding:0.4rem;vertical-align:top;}",
        "img{max-width:180px;border:1px solid #ccc;}",
        "figure{display:inline-block;margin:0.5rem;}",
        ".crash{color:#b00020;font-weight:bold;}",
        "</style>",
        "</head>",
        "<body>",
        '<section id="summary">',
        f"<h2>Summary</h2>",
        "<dl>",
        f"<dt>Report</dt><dd>{e(report.report_id)}</dd>",
        f"<dt>Title</dt><dd>{e(report.title)}</dd>",
        f"<dt>Device</dt><dd>{e(report.device)}</dd>",
        f"<dt>App</dt><dd>{e(report.app_id)} {e(report.app_version)}</dd>",
        f"<dt>Created</dt><dd>{e(report.created_at)}</dd>",
        f"<dt>Description</dt><dd>{e(report.description)}</dd>",
        "</dl>",
        "</section>",
        '<section id="steps">',
        "<h2>Steps to Reproduce</h2>",
        "<table>",
        "<tr><th>#</th><th>Step</th><th>Action</th><th>Component type</th>"
        "<th>Relative location</th><th>Activity</th><th>Component screenshot</th></tr>",
        *rows,
        "</table>",
        "</section>",
        '<section id="screenshots">',
        "<h2>Screenshots</h2>",
        *shots,
        "</section>",
        "</body>",
        "</html>",
    ]
    return "\n".join(parts) + "\n"


# --------------------------------------------------------------------------
# replay


def replay_report(report: BugReport, target_model: AppModel) -> ReplayResult:
    """Execute a report against a model, which may be a different version.

    Components are resolved on the current screen through a cascade: exact
    id, then same kind and label, then same kind and relative location;
    ambiguous fallback matches pick the lowest component id. Resolution
    failure or a no-op execution means divergence. A crash reached on the
    final step reproduces the crash.
    """
    universe = universe_by_id(target_model)
    state: GuiState | None = cold_start(target_model)
    records: list[ReplayStepRecord] = []
    outcome = OUTCOME_REPRODUCED
    divergence: int | None = None

    for step in report.steps:
        if state is None:
            # the previous step crashed or diverged; nothing left to act on
            records.append(ReplayStepRecord(step.ordinal, MATCH_NONE, None, None))
            outcome = OUTCOME_DIVERGED
            divergence = step.ordinal
            break
        resolved, level = _resolve_component(step, state, universe)
        if resolved is None:
            records.append(ReplayStepRecord(step.ordinal, MATCH_NONE, None, None))
            outcome = OUTCOME_DIVERGED
            divergence = step.ordinal
            break
        event = EventToken(step.action, resolved)
        result = execute_event(target_model, state, event, step.input_text)
        if result is NOOP:
            records.append(ReplayStepRecord(step.ordinal, level, resolved, None))
            outcome = OUTCOME_DIVERGED
            divergence = step.ordinal
            break
        if isinstance(result, CrashOutcome):
            records.append(
                ReplayStepRecord(step.ordinal, level, resolved, result.marker)
            )
            if step.ordinal == report.steps[-1].ordinal:
                outcome = OUTCOME_CRASH_REPRODUCED
                break
            state = None
            continue
        records.append(
            ReplayStepRecord(step.ordinal, level, resolved, result.fingerprint)
        )
        state = result

    return ReplayResult(outcome=outcome, steps=records, divergence_ordinal=divergence)


def _resolve_component(
    step: ReportStep, state: GuiState, universe: Mapping[str, ComponentRecord]
) -> tuple[str | None, str]:
    visible = [c.id for c in state.visible_components]
    if step.component in visible:
        return step.component, MATCH_EXACT_ID
    by_label = sorted(
        c
        for c in visible
        if universe[c].kind == step.kind and universe[c].label == step.label
    )
    if by_label:
        return by_label[0], MATCH_KIND_LABEL
    by_location = sorted(
        c
        for c in visible
        if universe[c].kind == step.kind
        and universe[c].relative_location == step.relative_location
    )
    if by_location:
        return by_location[0], MATCH_KIND_LOCATION
    return None, MATCH_NONE


# --------------------------------------------------------------------------
# crash crawling


def crawl_for_crashes(
    model: AppModel,
    strategy: CrawlStrategy,
    ngram: NGramModel | None = None,
    created_at: str = EPOCH_TIMESTAMP,
) -> list[BugReport]:
    """Explore a model hunting for crash markers; one finalized report per
    distinct crash edge reached.

    `dfs-complete` rips the whole model and reports a shortest event path
    per crash; the random strategies walk from cold start restarting after
    every crash or dead end, and report each crash walk as found. Identical
    strategy and seed always produce identical report lists.
    """
    if isinstance(strategy, DfsComplete):
        result = rip(model, RipConfig(max_events=10**9, max_depth=10**9))
        crash_paths = _shortest_crash_paths(result.efg)
        efg = result.efg
    else:
        if isinstance(strategy, NgramWeighted) and ngram is None:
            base = rip(model, RipConfig(max_events=10**9, max_depth=10**9))
            tokens = base.efg.tokens()
            segments = base.trace
            ngram = (
                train_ngram_segments(segments, vocabulary=tokens)
                if any(segments)
                else uniform_ngram(tokens)
            )
        efg, crash_paths = _random_crawl(model, strategy, ngram)

    universe = universe_by_id(model)
    reports = []
    for path, crash in crash_paths:
        steps = [
            Step(
                ordinal=i + 1,
                event=token,
                input_text="" if token.action == "type" else None,
            )
            for i, token in enumerate(path)
        ]
        source_screen = model.screen_of(path[-1].component)
        activity = model.screen(source_screen).activity
        report_id = "crash-" + content_id(
            canonical_json(
                [model.app_id, model.version, crash.exception_name,
                 [t.text for t in path]]
            )
        )[:12]
        reports.append(
            assemble_report(
                title=f"Crash: {crash.exception_name} in {activity}",
                device="automated-crawler",
                description=(
                    f"Automatically generated crash report: executing the steps "
                    f"below raises {crash.exception_name} (strategy: {strategy.name})."
                ),
                steps=steps,
                efg=efg,
                universe=universe,
                report_id=report_id,
                created_at=created_at,
            )
        )
    return reports


def _shortest_crash_paths(
    efg: EventFlowGraph,
) -> list[tuple[list[EventToken], CrashOutcome]]:
    """BFS over non-crash edges; one shortest path per crash edge, listed in
    canonical edge order."""
    paths: dict[str, list[EventToken]] = {efg.cold_start: []}
    queue = deque([efg.cold_start])
    while queue:
        fp = queue.popleft()
        for token, target in efg.outgoing(fp):
            if isinstance(target, CrashOutcome) or target in paths:
                continue
            paths[target] = paths[fp] + [token]
            queue.append(target)
    found: list[tuple[tuple[int, str, str], list[EventToken], CrashOutcome]] = []
    for (source, token), target in efg.edges.items():
        if isinstance(target, CrashOutcome) and source in paths:
            path = paths[source] + [token]
            found.append(((len(path), source, token.text), path, target))
    found.sort(key=lambda item: item[0])
    return [(path, crash) for _, path, crash in found]


def _random_crawl(
    model: AppModel,
    strategy: UniformRandom | NgramWeighted,
    ngram: NGramModel | None,
) -> tuple[EventFlowGraph, list[tuple[list[EventToken], CrashOutcome]]]:
    """Seeded walks from cold start; discovered states, edges and
    screenshots accumulate into a partial event-flow graph so that crash
    reports can be fully enriched."""
    rng = random.Random(strategy.seed)
    states: dict[str, GuiState] = {}
    edges: dict[tuple[str, EventToken], str | CrashOutcome] = {}
    screenshots: dict[tuple[str, str | None], ScreenshotEntry] = {}
    documents: dict[str, str] = {}
    crash_paths: list[tuple[list[EventToken], CrashOutcome]] = []
    seen_crash_edges: set[tuple[str, str]] = set()

    def register(state: GuiState) -> None:
        if state.fingerprint in states:
            return
        states[state.fingerprint] = state
        full_svg = render_screenshot(state, model.canvas)
        full_id = content_id(full_svg)
        documents[full_id] = full_svg
        screenshots[(state.fingerprint, None)] = ScreenshotEntry(full=full_id)
        for component in state.visible_components:
            highlighted = render_screenshot(state, model.canvas, highlight=component.id)
            cropped = crop_screenshot(state, model.canvas, component.id)
            screenshots[(state.fingerprint, component.id)] = ScreenshotEntry(
                full=content_id(highlighted), cropped=content_id(cropped)
            )
            documents[content_id(highlighted)] = highlighted
            documents[content_id(cropped)] = cropped

    state = cold_start(model)
    register(state)
    walk: list[EventToken] = []
    events_fired = 0
    while events_fired < strategy.budget:
        pairs = list(actionable_pairs(state))
        if not pairs:
            state = cold_start(model)
            walk = []
            continue
        token = _pick(rng, pairs, strategy, ngram, [t.text for t in walk])
        input_text = "" if token.action == "type" else None
        outcome = execute_event(model, state, token, input_text)
        events_fired += 1
        if outcome is NOOP:
            continue
        edges[(state.fingerprint, token)] = (
            outcome.fingerprint if isinstance(outcome, GuiState) else outcome
        )
        if isinstance(outcome, CrashOutcome):
            walk = walk + [token]
            edge_key = (state.fingerprint, token.text)
            if edge_key not in seen_crash_edges:
                seen_crash_edges.add(edge_key)
                crash_paths.append((walk, outcome))
            state = cold_start(model)
            walk = []
            continue
        register(outcome)
        walk = walk + [token]
        state = outcome

    start = cold_start(model)
    efg = EventFlowGraph(
        app_id=model.app_id,
        version=model.version,
        canvas=model.canvas,
        cold_start=start.fingerprint,
        states=states,
        edges=edges,
        screenshots=screenshots,
        truncated=True,
    )
    return efg, crash_paths


def _pick(
    rng: random.Random,
    pairs: list[EventToken],
    strategy: UniformRandom | NgramWeighted,
    ngram: NGramModel | None,
    history: list[str],
) -> EventToken:
    if isinstance(strategy, UniformRandom):
        return pairs[rng.randrange(len(pairs))]
    assert ngram is not None
    weights = []
    context = ngram.context_for(history)
    bucket = ngram.counts.get(context, {})
    total = sum(bucket.values())
    denom = total + ngram.alpha * len(ngram.vocabulary)
    for token in pairs:
        if token.text in ngram.vocabulary:
            weights.append((bucket.get(token.text, 0) + ngram.alpha) / denom)
        else:
            # capability-permitted pair that never produced an edge: give it
            # the unseen-candidate mass so exploration stays complete
            weights.append(ngram.alpha / denom)
    threshold = rng.random() * sum(weights)
    cumulative = 0.0
    for token, weight in zip(pairs, weights):
        cumulative += weight
        if threshold < cumulative:
            return token
    return pairs[-1]
