"""Deterministic SVG screenshots of GUI states.

SVG keeps the artifacts byte-stable, human-viewable and croppable: a crop
is the same document with its viewport narrowed to the component bounds.
"""

from __future__ import annotations

from typing import TYPE_CHECKING
from xml.sax.saxutils import escape, quoteattr

from .errors import UnknownComponentError

if TYPE_CHECKING:  # pragma: no cover
    from .ripper import GuiState

_KIND_FILL = {
    "button": "#4a90d9",
    "textview": "#e8e8e8",
    "edittext": "#fff8d0",
    "spinner": "#d0e8d0",
    "checkbox": "#e0d0f0",
    "image": "#c8dce8",
    "list-item": "#f0e0d0",
}

_FRAME_FILL = "#fafafa"
_HIGHLIGHT_STROKE = "#e02020"


def _component_markup(component, highlighted: bool) -> list[str]:
    x, y, w, h = component.bounds
    fill = _KIND_FILL[component.kind]
    lines = [
        f'  <g id={quoteattr("c-" + component.id)}>',
        f'    <rect x="{x}" y="{y}" width="{w}" height="{h}" fill="{fill}" '
        'stroke="#555555" stroke-width="1"/>',
    ]
    if component.label:
        cx = x + w // 2
        cy = y + h // 2
        lines.append(
            f'    <text x="{cx}" y="{cy}" font-family="monospace" font-size="12" '
            f'fill="#222222" text-anchor="middle" dominant-baseline="middle">'
            f"{escape(component.label)}</text>"
        )
    if highlighted:
        lines.append(
            f'    <rect x="{x - 3}" y="{y - 3}" width="{w + 6}" height="{h + 6}" '
            f'fill="none" stroke="{_HIGHLIGHT_STROKE}" stroke-width="3" '
            'stroke-dasharray="6,3"/>'
        )
    lines.append("  </g>")
    return lines


def _document(state: "GuiState", canvas: tuple[int, int],
              viewport: tuple[int, int, int, int], highlight: str | None) -> str:
    width, height = canvas
    vx, vy, vw, vh = viewport
    lines = [
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{vw}" height="{vh}" viewBox="{vx} {vy} {vw} {vh}">',
        f'  <rect x="0" y="0" width="{width}" height="{height}" '
        f'fill="{_FRAME_FILL}" stroke="#333333" stroke-width="2"/>',
        f"  <title>{escape(state.screen)}</title>",
    ]
    for component in state.visible_components:
        lines.extend(_component_markup(component, highlighted=component.id == highlight))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _require_visible(state: "GuiState", component_id: str):
    component = state.component(component_id)
    if component is None:
        raise UnknownComponentError(
            f"component '{component_id}' is not visible on screen '{state.screen}'"
        )
    return component


def render_screenshot(
    state: "GuiState", canvas: tuple[int, int], highlight: str | None = None
) -> str:
    """Full-frame shot of a state; `highlight` draws a distinct border around
    one visible component."""
    if highlight is not None:
        _require_visible(state, highlight)
    return _document(state, canvas, (0, 0, canvas[0], canvas[1]), highlight)


def crop_screenshot(state: "GuiState", canvas: tuple[int, int], component_id: str) -> str:
    """Per-component shot: same scene, viewport narrowed to the component's
    bounds."""
    component = _require_visible(state, component_id)
    return _document(state, canvas, component.bounds, None)
