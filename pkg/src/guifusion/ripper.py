"""Dynamic exploration engine: interprets an app model, walks its GUI
systematically, and records run-time states, transitions and screenshots.

States are identified by a fingerprint digest of (screen id, sorted
component tuples); typed edittext content never participates, so typing
different texts lands in the same node. Exploration is a depth-first
search that fires every actionable (action, component) pair in canonical
order; pending states are re-reached by relaunching from cold start and
replaying the recorded event path, which is sound because the interpreter
is deterministic.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Iterator

from .appmodel import ACTIONS, AppModel, GuiComponent, CRASH_PREFIX
from .errors import UnknownComponentError
from .screenshots import crop_screenshot, render_screenshot
from .canonical import content_id


@dataclass(frozen=True)
class EventToken:
    """An (action, component) pair; canonical text form ``action@component``."""

    action: str
    component: str

    @property
    def text(self) -> str:
        return f"{self.action}@{self.component}"

    @staticmethod
    def parse(text: str) -> "EventToken":
        action, sep, component = text.partition("@")
        if not sep or action not in ACTIONS or not component:
            raise ValueError(f"malformed event token: {text!r}")
        return EventToken(action, component)

    def __str__(self) -> str:  # pragma: no cover - repr sugar
        return self.text


@dataclass(frozen=True)
class GuiState:
    fingerprint: str
    screen: str
    visible_components: tuple[GuiComponent, ...]

    def component(self, component_id: str) -> GuiComponent | None:
        for comp in self.visible_components:
            if comp.id == component_id:
                return comp
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "fingerprint": self.fingerprint,
            "screen": self.screen,
            "components": [c.to_dict() for c in self.visible_components],
        }

    @staticmethod
    def from_dict(raw: dict[str, Any]) -> "GuiState":
        return GuiState(
            fingerprint=raw["fingerprint"],
            screen=raw["screen"],
            visible_components=tuple(
                GuiComponent(
                    id=c["id"],
                    kind=c["kind"],
                    label=c["label"],
                    bounds=tuple(c["bounds"]),
                    clickable=c["clickable"],
                    long_clickable=c["long_clickable"],
                    swipeable=c["swipeable"],
                    editable=c["editable"],
                )
                for c in raw["components"]
            ),
        )


@dataclass(frozen=True)
class CrashOutcome:
    exception_name: str

    @property
    def marker(self) -> str:
        return f"{CRASH_PREFIX}{self.exception_name}"


class _NoOp:
    """Sentinel: the event fired but the model defines no transition."""

    _instance: "_NoOp | None" = None

    def __new__(cls) -> "_NoOp":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NoOp"


NOOP = _NoOp()


@dataclass(frozen=True)
class ScreenshotEntry:
    """Ids of the rendered documents for one (state, component?) key:
    a full-frame shot (highlighted when a component is given) and, for
    component keys, the cropped per-component shot."""

    full: str
    cropped: str | None = None


@dataclass(frozen=True)
class RipConfig:
    max_events: int = 10_000
    max_depth: int = 50
    type_inputs: tuple[str, ...] = ("", "test")
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_events <= 0:
            raise ValueError("max_events must be positive")
        if self.max_depth <= 0:
            raise ValueError("max_depth must be positive")
        if not self.type_inputs:
            raise ValueError("type_inputs must be non-empty")


@dataclass
class EventFlowGraph:
    app_id: str
    version: str
    canvas: tuple[int, int]
    cold_start: str
    states: dict[str, GuiState]
    edges: dict[tuple[str, EventToken], str | CrashOutcome]
    screenshots: dict[tuple[str, str | None], ScreenshotEntry]
    truncated: bool

    def outgoing(self, fingerprint: str) -> list[tuple[EventToken, str | CrashOutcome]]:
        """Edges leaving a state, in canonical (component, action) order."""
        found = [
            (token, target)
            for (source, token), target in self.edges.items()
            if source == fingerprint
        ]
        found.sort(key=lambda item: _token_sort_key(item[0]))
        return found

    def edge_target(self, fingerprint: str, token: EventToken) -> str | CrashOutcome | None:
        return self.edges.get((fingerprint, token))

    def tokens(self) -> set[EventToken]:
        return {token for (_, token) in self.edges}

    def to_dict(self) -> dict[str, Any]:
        edges = sorted(
            self.edges.items(), key=lambda item: (item[0][0], _token_sort_key(item[0][1]))
        )
        shots = sorted(
            self.screenshots.items(), key=lambda item: (item[0][0], item[0][1] or "")
        )
        return {
            "app_id": self.app_id,
            "version": self.version,
            "canvas": list(self.canvas),
            "cold_start": self.cold_start,
            "truncated": self.truncated,
            "states": [
                self.states[fp].to_dict() for fp in sorted(self.states)
            ],
            "edges": [
                {
                    "from": source,
                    "action": token.action,
                    "component": token.component,
                    "to": target.marker if isinstance(target, CrashOutcome) else target,
                }
                for (source, token), target in edges
            ],
            "screenshots": [
                {
                    "state": state_fp,
                    "component": component_id,
                    "full": entry.full,
                    "cropped": entry.cropped,
                }
                for (state_fp, component_id), entry in shots
            ],
        }

    @staticmethod
    def from_dict(raw: dict[str, Any]) -> "EventFlowGraph":
        states = {s["fingerprint"]: GuiState.from_dict(s) for s in raw["states"]}
        edges: dict[tuple[str, EventToken], str | CrashOutcome] = {}
        for e in raw["edges"]:
            token = EventToken(e["action"], e["component"])
            to = e["to"]
            target: str | CrashOutcome
            if to.startswith(CRASH_PREFIX):
                target = CrashOutcome(to[len(CRASH_PREFIX):])
            else:
                target = to
            edges[(e["from"], token)] = target
        screenshots = {
            (s["state"], s["component"]): ScreenshotEntry(full=s["full"], cropped=s["cropped"])
            for s in raw["screenshots"]
        }
        return EventFlowGraph(
            app_id=raw["app_id"],
            version=raw["version"],
            canvas=tuple(raw["canvas"]),
            cold_start=raw["cold_start"],
            states=states,
            edges=edges,
            screenshots=screenshots,
            truncated=raw["truncated"],
        )


@dataclass
class RipResult:
    efg: EventFlowGraph
    trace: list[list[EventToken]]
    screenshot_documents: dict[str, str]

    def trace_texts(self) -> list[list[str]]:
        return [[token.text for token in segment] for segment in self.trace]


def _token_sort_key(token: EventToken) -> tuple[str, int]:
    return (token.component, ACTIONS.index(token.action))


def state_fingerprint(screen_id: str, components: tuple[GuiComponent, ...]) -> str:
    """Digest of the state identity: screen id plus the sorted component
    tuples (id, kind, label, bounds, capability flags). Edittext content is
    not part of a component tuple, so typed text can never alter it."""
    payload = [
        screen_id,
        [
            [
                c.id,
                c.kind,
                c.label,
                list(c.bounds),
                [c.clickable, c.long_clickable, c.swipeable, c.editable],
            ]
            for c in sorted(components, key=lambda c: c.id)
        ],
    ]
    blob = json.dumps(payload, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def state_for_screen(model: AppModel, screen_id: str) -> GuiState:
    screen = model.screen(screen_id)
    components = tuple(sorted(screen.components, key=lambda c: c.id))
    return GuiState(
        fingerprint=state_fingerprint(screen_id, components),
        screen=screen_id,
        visible_components=components,
    )


def cold_start(model: AppModel) -> GuiState:
    """The state of the initial screen after a fresh launch."""
    return state_for_screen(model, model.initial_screen)


def execute_event(
    model: AppModel,
    state: GuiState,
    event: EventToken,
    input_text: str | None = None,
) -> GuiState | CrashOutcome | _NoOp:
    """Fire one event against a state.

    Returns the successor state for a matching transition, a `CrashOutcome`
    for crash markers, or `NOOP` when the component is visible but the model
    defines no transition for the pair. Typed `input_text` is accepted for
    `type` events and deliberately ignored by state identity.
    """
    if event.action not in ACTIONS:
        raise ValueError(f"unknown action: {event.action!r}")
    if state.component(event.component) is None:
        raise UnknownComponentError(
            f"component '{event.component}' is not visible on screen '{state.screen}'"
        )
    transition = model.transition_for(state.screen, event.component, event.action)
    if transition is None:
        return NOOP
    if transition.crashes:
        return CrashOutcome(transition.exception_name)
    return state_for_screen(model, transition.to)


def actionable_pairs(state: GuiState) -> Iterator[EventToken]:
    """All capability-permitted pairs in canonical order: components sorted
    by id, actions in tap, long-touch, swipe, type order."""
    for component in state.visible_components:
        for action in component.actions():
            yield EventToken(action, component.id)


class _BudgetExhausted(Exception):
    pass


class _Session:
    """Interpreter position tracking plus the chronological event trace."""

    def __init__(self, model: AppModel, config: RipConfig):
        self.model = model
        self.config = config
        self.events_fired = 0
        self.current: GuiState | None = None
        self.segments: list[list[EventToken]] = []

    def launch(self) -> GuiState:
        state = cold_start(self.model)
        self.current = state
        self.segments.append([])
        return state

    def fire(self, event: EventToken, input_text: str | None = None):
        if self.events_fired >= self.config.max_events:
            raise _BudgetExhausted
        assert self.current is not None
        outcome = execute_event(self.model, self.current, event, input_text)
        self.events_fired += 1
        if outcome is not NOOP:
            self.segments[-1].append(event)
        if isinstance(outcome, GuiState):
            self.current = outcome
        elif isinstance(outcome, CrashOutcome):
            self.current = None
        return outcome

    def ensure_at(self, state: GuiState, path: list[EventToken]) -> None:
        """Re-reach `state` (reached from cold start via `path`), relaunching
        and replaying only when the interpreter is not already there."""
        if self.current is not None and self.current.fingerprint == state.fingerprint:
            return
        self.launch()
        for event in path:
            input_text = self.config.type_inputs[0] if event.action == "type" else None
            outcome = self.fire(event, input_text)
            if not isinstance(outcome, GuiState):
                raise AssertionError(
                    f"replay of {event.text} did not produce a state; model is not deterministic"
                )


def rip(model: AppModel, config: RipConfig | None = None) -> RipResult:
    """Systematic depth-first exploration of a model.

    Fires every actionable pair from every discovered state, recursing into
    unseen fingerprints up to `max_depth` events from cold start and stopping
    at the `max_events` budget. Running out of budget or depth is not an
    error: the partial graph is returned with `truncated` set. Every
    discovered state gets a full screenshot plus, per component, a cropped
    shot and a highlighted full-frame shot.
    """
    config = config or RipConfig()
    session = _Session(model, config)

    states: dict[str, GuiState] = {}
    edges: dict[tuple[str, EventToken], str | CrashOutcome] = {}
    screenshots: dict[tuple[str, str | None], ScreenshotEntry] = {}
    documents: dict[str, str] = {}
    truncated = False

    def register(state: GuiState) -> None:
        states[state.fingerprint] = state
        full_svg = render_screenshot(state, model.canvas)
        full_id = content_id(full_svg)
        documents[full_id] = full_svg
        screenshots[(state.fingerprint, None)] = ScreenshotEntry(full=full_id)
        for component in state.visible_components:
            highlighted = render_screenshot(state, model.canvas, highlight=component.id)
            cropped = crop_screenshot(state, model.canvas, component.id)
            highlighted_id = content_id(highlighted)
            cropped_id = content_id(cropped)
            documents[highlighted_id] = highlighted
            documents[cropped_id] = cropped
            screenshots[(state.fingerprint, component.id)] = ScreenshotEntry(
                full=highlighted_id, cropped=cropped_id
            )

    def expand(state: GuiState, path: list[EventToken], depth: int) -> None:
        nonlocal truncated
        for token in actionable_pairs(state):
            session.ensure_at(state, path)
            if token.action == "type":
                outcome = NOOP
                for text in config.type_inputs:
                    outcome = session.fire(token, text)
                    if outcome is not NOOP:
                        break
                    # a NoOp leaves the state unchanged; try the next input
            else:
                outcome = session.fire(token)
            if outcome is NOOP:
                continue
            if isinstance(outcome, CrashOutcome):
                edges[(state.fingerprint, token)] = outcome
                continue
            edges[(state.fingerprint, token)] = outcome.fingerprint
            if outcome.fingerprint not in states:
                register(outcome)
                if depth + 1 < config.max_depth:
                    expand(outcome, path + [token], depth + 1)
                elif any(True for _ in actionable_pairs(outcome)):
                    truncated = True

    start = session.launch()
    register(start)
    try:
        expand(start, [], 0)
    except _BudgetExhausted:
        truncated = True

    # drop a trailing empty segment left by a launch that never fired
    trace = [segment for segment in session.segments if segment]

    efg = EventFlowGraph(
        app_id=model.app_id,
        version=model.version,
        canvas=model.canvas,
        cold_start=start.fingerprint,
        states=states,
        edges=edges,
        screenshots=screenshots,
        truncated=truncated,
    )
    return RipResult(efg=efg, trace=trace, screenshot_documents=documents)
