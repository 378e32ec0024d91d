"""Declarative app models: schema, validation, and the component universe.

An app model describes a GUI application as screens of components plus a
transition table, and doubles as the executable specification the ripper
interprets. Models are plain JSON documents; `parse_app_model` validates
every structural rule and returns an immutable `AppModel`, raising
`ModelParseError` naming the first violated rule otherwise.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .canonical import canonical_json
from .errors import ModelParseError

COMPONENT_KINDS = (
    "button",
    "textview",
    "edittext",
    "spinner",
    "checkbox",
    "image",
    "list-item",
)

#: Canonical action order; used everywhere an (action, component) listing
#: must be deterministic.
ACTIONS = ("tap", "long-touch", "swipe", "type")

#: Which capability flag licenses each action.
CAPABILITY_FOR_ACTION = {
    "tap": "clickable",
    "long-touch": "long_clickable",
    "swipe": "swipeable",
    "type": "editable",
}

CRASH_PREFIX = "CRASH:"
DEFAULT_CANVAS = (360, 640)

_ID_RE = re.compile(r"^[A-Za-z0-9_.-]+$")
_EXCEPTION_RE = re.compile(r"^[A-Za-z0-9_.$]+$")

RULE_SYNTAX = "SyntaxError"
RULE_SCHEMA = "SchemaError"
RULE_DUPLICATE_ID = "DuplicateId"
RULE_UNKNOWN_REFERENCE = "UnknownReference"
RULE_CAPABILITY_MISMATCH = "CapabilityMismatch"
RULE_INVALID_BOUNDS = "InvalidBounds"
RULE_EMPTY_SCREEN = "EmptyScreen"


@dataclass(frozen=True)
class GuiComponent:
    """One interactable widget; bounds are (x, y, w, h) in abstract pixels."""

    id: str
    kind: str
    label: str
    bounds: tuple[int, int, int, int]
    clickable: bool = False
    long_clickable: bool = False
    swipeable: bool = False
    editable: bool = False

    def allows(self, action: str) -> bool:
        return bool(getattr(self, CAPABILITY_FOR_ACTION[action]))

    def actions(self) -> tuple[str, ...]:
        return tuple(a for a in ACTIONS if self.allows(a))

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind,
            "label": self.label,
            "bounds": list(self.bounds),
            "clickable": self.clickable,
            "long_clickable": self.long_clickable,
            "swipeable": self.swipeable,
            "editable": self.editable,
        }


@dataclass(frozen=True)
class Screen:
    id: str
    activity: str
    overlay: bool
    components: tuple[GuiComponent, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "activity": self.activity,
            "overlay": self.overlay,
            "components": [c.to_dict() for c in self.components],
        }


@dataclass(frozen=True)
class Transition:
    """`to` is either a screen id or a crash marker (see `crashes`)."""

    from_screen: str
    component: str
    action: str
    to: str

    @property
    def crashes(self) -> bool:
        return self.to.startswith(CRASH_PREFIX)

    @property
    def exception_name(self) -> str:
        if not self.crashes:
            raise ValueError("transition does not crash")
        return self.to[len(CRASH_PREFIX):]

    def to_dict(self) -> dict[str, Any]:
        return {
            "from": self.from_screen,
            "component": self.component,
            "action": self.action,
            "to": self.to,
        }


@dataclass
class AppModel:
    app_id: str
    version: str
    canvas: tuple[int, int]
    initial_screen: str
    screens: tuple[Screen, ...]
    transitions: tuple[Transition, ...]

    _screens_by_id: dict[str, Screen] = field(
        init=False, repr=False, compare=False, default_factory=dict
    )
    _screen_of_component: dict[str, str] = field(
        init=False, repr=False, compare=False, default_factory=dict
    )
    _components_by_id: dict[str, GuiComponent] = field(
        init=False, repr=False, compare=False, default_factory=dict
    )
    _transition_index: dict[tuple[str, str, str], Transition] = field(
        init=False, repr=False, compare=False, default_factory=dict
    )

    def __post_init__(self) -> None:
        for screen in self.screens:
            self._screens_by_id[screen.id] = screen
            for comp in screen.components:
                self._screen_of_component[comp.id] = screen.id
                self._components_by_id[comp.id] = comp
        for tr in self.transitions:
            self._transition_index[(tr.from_screen, tr.component, tr.action)] = tr

    def screen(self, screen_id: str) -> Screen:
        return self._screens_by_id[screen_id]

    def component(self, component_id: str) -> GuiComponent:
        return self._components_by_id[component_id]

    def has_component(self, component_id: str) -> bool:
        return component_id in self._components_by_id

    def screen_of(self, component_id: str) -> str:
        return self._screen_of_component[component_id]

    def transition_for(
        self, screen_id: str, component_id: str, action: str
    ) -> Transition | None:
        return self._transition_index.get((screen_id, component_id, action))

    def to_dict(self) -> dict[str, Any]:
        return {
            "app_id": self.app_id,
            "version": self.version,
            "canvas": list(self.canvas),
            "initial_screen": self.initial_screen,
            "screens": [s.to_dict() for s in self.screens],
            "transitions": [t.to_dict() for t in self.transitions],
        }


@dataclass(frozen=True)
class ComponentRecord:
    """Universe entry: a component plus its traceability data."""

    component_id: str
    kind: str
    label: str
    bounds: tuple[int, int, int, int]
    relative_location: str
    activity: str
    screen: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "component_id": self.component_id,
            "kind": self.kind,
            "label": self.label,
            "bounds": list(self.bounds),
            "relative_location": self.relative_location,
            "activity": self.activity,
            "screen": self.screen,
        }


def relative_location(
    bounds: tuple[int, int, int, int], canvas: tuple[int, int]
) -> str:
    """3x3 grid label for the bounds center over canvas thirds.

    Columns/rows are half-open: [0, W/3), [W/3, 2W/3), [2W/3, W]. Computed
    with doubled-center integer arithmetic so fractional centers need no
    floating point.
    """
    x, y, w, h = bounds
    width, height = canvas
    cx2 = 2 * x + w
    cy2 = 2 * y + h
    if 3 * cx2 < 2 * width:
        col = "left"
    elif 3 * cx2 < 4 * width:
        col = "center"
    else:
        col = "right"
    if 3 * cy2 < 2 * height:
        row = "top"
    elif 3 * cy2 < 4 * height:
        row = "middle"
    else:
        row = "bottom"
    return f"{row}-{col}"


def _fail(rule: str, location: str, message: str) -> "NoReturn":  # noqa: F821
    raise ModelParseError(rule, location, message)


def _expect_mapping(value: Any, location: str) -> Mapping[str, Any]:
    if not isinstance(value, dict):
        _fail(RULE_SCHEMA, location, f"expected an object, got {type(value).__name__}")
    return value


def _expect_keys(
    value: Mapping[str, Any], location: str, required: Iterable[str], optional: Iterable[str]
) -> None:
    required = set(required)
    allowed = required | set(optional)
    for key in value:
        if key not in allowed:
            _fail(RULE_SCHEMA, f"{location}.{key}", "unknown key")
    for key in sorted(required - set(value)):
        _fail(RULE_SCHEMA, location, f"missing required key '{key}'")


def _expect_str(value: Any, location: str) -> str:
    if not isinstance(value, str):
        _fail(RULE_SCHEMA, location, f"expected a string, got {type(value).__name__}")
    return value


def _expect_id(value: Any, location: str) -> str:
    text = _expect_str(value, location)
    if not _ID_RE.match(text):
        _fail(RULE_SCHEMA, location, f"'{text}' is not a valid identifier ([A-Za-z0-9_.-]+)")
    return text


def _expect_bool(value: Any, location: str, default: bool = False) -> bool:
    if value is None:
        return default
    if not isinstance(value, bool):
        _fail(RULE_SCHEMA, location, f"expected a boolean, got {type(value).__name__}")
    return value


def _expect_int(value: Any, location: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        _fail(RULE_SCHEMA, location, f"expected an integer, got {type(value).__name__}")
    return value


def _parse_canvas(value: Any, location: str) -> tuple[int, int]:
    if value is None:
        return DEFAULT_CANVAS
    if not isinstance(value, list) or len(value) != 2:
        _fail(RULE_SCHEMA, location, "canvas must be a [width, height] pair")
    width = _expect_int(value[0], f"{location}[0]")
    height = _expect_int(value[1], f"{location}[1]")
    if width <= 0 or height <= 0:
        _fail(RULE_SCHEMA, location, "canvas dimensions must be positive")
    return (width, height)


def _parse_component(
    raw: Any, location: str, canvas: tuple[int, int]
) -> GuiComponent:
    obj = _expect_mapping(raw, location)
    _expect_keys(
        obj,
        location,
        required=("id", "kind", "bounds"),
        optional=("label", "clickable", "long_clickable", "swipeable", "editable"),
    )
    comp_id = _expect_id(obj["id"], f"{location}.id")
    kind = _expect_str(obj["kind"], f"{location}.kind")
    if kind not in COMPONENT_KINDS:
        _fail(
            RULE_SCHEMA,
            f"{location}.kind",
            f"'{kind}' is not one of {', '.join(COMPONENT_KINDS)}",
        )
    label = _expect_str(obj.get("label", ""), f"{location}.label")
    raw_bounds = obj["bounds"]
    if not isinstance(raw_bounds, list) or len(raw_bounds) != 4:
        _fail(RULE_SCHEMA, f"{location}.bounds", "bounds must be a [x, y, w, h] array")
    x, y, w, h = (
        _expect_int(raw_bounds[i], f"{location}.bounds[{i}]") for i in range(4)
    )
    width, height = canvas
    if w <= 0 or h <= 0:
        _fail(RULE_INVALID_BOUNDS, f"{location}.bounds", "width and height must be positive")
    if x < 0 or y < 0 or x + w > width or y + h > height:
        _fail(
            RULE_INVALID_BOUNDS,
            f"{location}.bounds",
            f"bounds ({x},{y},{w},{h}) fall outside the {width}x{height} canvas",
        )
    component = GuiComponent(
        id=comp_id,
        kind=kind,
        label=label,
        bounds=(x, y, w, h),
        clickable=_expect_bool(obj.get("clickable"), f"{location}.clickable"),
        long_clickable=_expect_bool(obj.get("long_clickable"), f"{location}.long_clickable"),
        swipeable=_expect_bool(obj.get("swipeable"), f"{location}.swipeable"),
        editable=_expect_bool(obj.get("editable"), f"{location}.editable"),
    )
    if component.editable and component.kind != "edittext":
        _fail(
            RULE_CAPABILITY_MISMATCH,
            f"{location}.editable",
            f"component '{comp_id}' is editable but its kind is '{kind}', not 'edittext'",
        )
    return component


def parse_app_model(source_text: str) -> AppModel:
    """Parse and fully validate an app-model document.

    Raises `ModelParseError` naming the first violated rule; the returned
    model satisfies every structural invariant (unique ids, resolvable
    references, capability-consistent transitions, in-canvas bounds).
    """
    try:
        raw = json.loads(source_text)
    except json.JSONDecodeError as exc:
        _fail(RULE_SYNTAX, f"line {exc.lineno} column {exc.colno}", exc.msg)

    root = _expect_mapping(raw, "$")
    _expect_keys(
        root,
        "$",
        required=("app_id", "version", "initial_screen", "screens", "transitions"),
        optional=("canvas",),
    )
    app_id = _expect_id(root["app_id"], "$.app_id")
    version = _expect_id(root["version"], "$.version")
    canvas = _parse_canvas(root.get("canvas"), "$.canvas")

    raw_screens = root["screens"]
    if not isinstance(raw_screens, list) or not raw_screens:
        _fail(RULE_SCHEMA, "$.screens", "screens must be a non-empty array")

    screens: list[Screen] = []
    seen_screens: dict[str, str] = {}
    seen_components: dict[str, str] = {}
    for i, raw_screen in enumerate(raw_screens):
        loc = f"$.screens[{i}]"
        obj = _expect_mapping(raw_screen, loc)
        _expect_keys(obj, loc, required=("id", "activity", "components"), optional=("overlay",))
        screen_id = _expect_id(obj["id"], f"{loc}.id")
        if screen_id in seen_screens:
            _fail(
                RULE_DUPLICATE_ID,
                f"{loc}.id",
                f"screen id '{screen_id}' already declared at {seen_screens[screen_id]}",
            )
        seen_screens[screen_id] = loc
        activity = _expect_str(obj["activity"], f"{loc}.activity")
        if not activity:
            _fail(RULE_SCHEMA, f"{loc}.activity", "activity must be non-empty")
        overlay = _expect_bool(obj.get("overlay"), f"{loc}.overlay")
        raw_components = obj["components"]
        if not isinstance(raw_components, list):
            _fail(RULE_SCHEMA, f"{loc}.components", "components must be an array")
        if not raw_components:
            _fail(RULE_EMPTY_SCREEN, f"{loc}.components", "a screen needs at least one component")
        components: list[GuiComponent] = []
        for j, raw_component in enumerate(raw_components):
            comp_loc = f"{loc}.components[{j}]"
            component = _parse_component(raw_component, comp_loc, canvas)
            if component.id in seen_components:
                _fail(
                    RULE_DUPLICATE_ID,
                    f"{comp_loc}.id",
                    f"component id '{component.id}' already declared at "
                    f"{seen_components[component.id]}",
                )
            seen_components[component.id] = comp_loc
            components.append(component)
        screens.append(
            Screen(id=screen_id, activity=activity, overlay=overlay, components=tuple(components))
        )

    initial_screen = _expect_id(root["initial_screen"], "$.initial_screen")
    if initial_screen not in seen_screens:
        _fail(
            RULE_UNKNOWN_REFERENCE,
            "$.initial_screen",
            f"initial screen '{initial_screen}' is not declared",
        )

    screen_index = {s.id: s for s in screens}
    component_index = {c.id: c for s in screens for c in s.components}
    screen_of = {c.id: s.id for s in screens for c in s.components}

    raw_transitions = root["transitions"]
    if not isinstance(raw_transitions, list):
        _fail(RULE_SCHEMA, "$.transitions", "transitions must be an array")

    transitions: list[Transition] = []
    seen_triples: dict[tuple[str, str, str], str] = {}
    for i, raw_tr in enumerate(raw_transitions):
        loc = f"$.transitions[{i}]"
        obj = _expect_mapping(raw_tr, loc)
        _expect_keys(obj, loc, required=("from", "component", "action", "to"), optional=())
        from_screen = _expect_id(obj["from"], f"{loc}.from")
        if from_screen not in screen_index:
            _fail(
                RULE_UNKNOWN_REFERENCE,
                f"{loc}.from",
                f"screen '{from_screen}' is not declared",
            )
        component_id = _expect_id(obj["component"], f"{loc}.component")
        if component_id not in component_index:
            _fail(
                RULE_UNKNOWN_REFERENCE,
                f"{loc}.component",
                f"component '{component_id}' is not declared",
            )
        if screen_of[component_id] != from_screen:
            _fail(
                RULE_UNKNOWN_REFERENCE,
                f"{loc}.component",
                f"component '{component_id}' belongs to screen "
                f"'{screen_of[component_id]}', not '{from_screen}'",
            )
        action = _expect_str(obj["action"], f"{loc}.action")
        if action not in ACTIONS:
            _fail(
                RULE_SCHEMA,
                f"{loc}.action",
                f"'{action}' is not one of {', '.join(ACTIONS)}",
            )
        component = component_index[component_id]
        if not component.allows(action):
            flag = CAPABILITY_FOR_ACTION[action]
            _fail(
                RULE_CAPABILITY_MISMATCH,
                f"{loc}.action",
                f"action '{action}' requires the '{flag}' flag on component "
                f"'{component_id}'",
            )
        to = _expect_str(obj["to"], f"{loc}.to")
        if to.startswith(CRASH_PREFIX):
            exception_name = to[len(CRASH_PREFIX):]
            if not exception_name or not _EXCEPTION_RE.match(exception_name):
                _fail(
                    RULE_SCHEMA,
                    f"{loc}.to",
                    "crash marker must name an exception: CRASH:<ExceptionName>",
                )
        elif to not in screen_index:
            _fail(
                RULE_UNKNOWN_REFERENCE,
                f"{loc}.to",
                f"target screen '{to}' is not declared",
            )
        triple = (from_screen, component_id, action)
        if triple in seen_triples:
            _fail(
                RULE_DUPLICATE_ID,
                loc,
                f"duplicate transition for ({from_screen}, {component_id}, {action}); "
                f"first declared at {seen_triples[triple]}",
            )
        seen_triples[triple] = loc
        transitions.append(
            Transition(from_screen=from_screen, component=component_id, action=action, to=to)
        )

    return AppModel(
        app_id=app_id,
        version=version,
        canvas=canvas,
        initial_screen=initial_screen,
        screens=tuple(screens),
        transitions=tuple(transitions),
    )


def serialize_app_model(model: AppModel) -> str:
    """Canonical textual form; `parse(serialize(m))` equals `m`."""
    return canonical_json(model.to_dict())


def extract_component_universe(model: AppModel) -> list[ComponentRecord]:
    """One record per component, sorted by (screen id, component id).

    Each record carries the traceability link to its enclosing screen's
    activity plus the derived 3x3 relative location.
    """
    records = [
        ComponentRecord(
            component_id=component.id,
            kind=component.kind,
            label=component.label,
            bounds=component.bounds,
            relative_location=relative_location(component.bounds, model.canvas),
            activity=screen.activity,
            screen=screen.id,
        )
        for screen in model.screens
        for component in screen.components
    ]
    records.sort(key=lambda r: (r.screen, r.component_id))
    return records


def universe_by_id(model: AppModel) -> dict[str, ComponentRecord]:
    """Component universe indexed by component id."""
    return {r.component_id: r for r in extract_component_universe(model)}
