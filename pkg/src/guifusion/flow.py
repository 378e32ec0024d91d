"""State inference, auto-completion suggestions, and the event-flow n-gram.

Given a reporter's step history and a ripped event-flow graph, this module
works out where in the app the reporter plausibly is, then offers the
actions and components executable there, ranked by a Laplace-smoothed
n-gram model trained on exploration traces.

Inference degrades gracefully through four rules, applied in order:

  (a) empty history: the cold-start state;
  (b) every step matches an edge walked from cold start: the unique
      terminal state;
  (c) on the first divergence: every state showing the component of the
      last matched step (or of the divergent step when nothing matched);
  (d) when that set is empty: every known state.

The result is always non-empty and sorted by fingerprint, unless a step
walks into a crash edge, which raises `HistoryHitsCrashError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .appmodel import ACTIONS, ComponentRecord
from .errors import (
    EmptyTraceError,
    HistoryHitsCrashError,
    UnknownTokenError,
)
from .ripper import CrashOutcome, EventFlowGraph, EventToken

#: Context sentinel prepended ahead of short histories. Real tokens always
#: contain '@', so collision is impossible.
START = "<START>"

DEFAULT_ORDER = 3
DEFAULT_ALPHA = 1.0


@dataclass
class Step:
    """One reproduction step: an (action, component) event plus metadata.

    `input_text` is present exactly when the action is `type`; fingerprints
    and screenshot refs get filled in during report assembly when the step
    is resolvable against the event-flow graph.
    """

    ordinal: int
    event: EventToken
    input_text: str | None = None
    note: str | None = None
    override: bool = False
    state_before: str | None = None
    state_after: str | None = None
    screenshot_full: str | None = None
    screenshot_cropped: str | None = None

    def __post_init__(self) -> None:
        if (self.event.action == "type") != (self.input_text is not None):
            raise ValueError(
                "input_text must be present exactly when the action is 'type' "
                f"(step {self.ordinal}: {self.event.text})"
            )

    def to_dict(self) -> dict[str, Any]:
        return {
            "ordinal": self.ordinal,
            "action": self.event.action,
            "component": self.event.component,
            "input_text": self.input_text,
            "note": self.note,
            "override": self.override,
        }

    @staticmethod
    def from_dict(raw: Mapping[str, Any]) -> "Step":
        return Step(
            ordinal=raw["ordinal"],
            event=EventToken(raw["action"], raw["component"]),
            input_text=raw.get("input_text"),
            note=raw.get("note"),
            override=raw.get("override", False),
        )


@dataclass(frozen=True)
class SuggestionEntry:
    """One offered component for an action: its universe record, its cropped
    and highlighted full-frame screenshot ids, the ranking score, and the
    full-frame candidates across every inferred state offering the pair."""

    record: ComponentRecord
    cropped: str | None
    full: str | None
    score: float
    contextual: tuple[tuple[str, str], ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "component": self.record.to_dict(),
            "cropped": self.cropped,
            "full": self.full,
            "score": self.score,
            "contextual": [
                {"state": fp, "full": full_id} for fp, full_id in self.contextual
            ],
        }


@dataclass(frozen=True)
class Suggestion:
    inferred_states: tuple[str, ...]
    actions: tuple[str, ...]
    components_by_action: Mapping[str, tuple[SuggestionEntry, ...]]

    def pairs(self) -> set[EventToken]:
        return {
            EventToken(action, entry.record.component_id)
            for action, entries in self.components_by_action.items()
            for entry in entries
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "inferred_states": list(self.inferred_states),
            "actions": list(self.actions),
            "components": {
                action: [entry.to_dict() for entry in entries]
                for action, entries in self.components_by_action.items()
            },
        }


@dataclass(frozen=True)
class NGramModel:
    """Laplace-smoothed conditional distribution over event tokens.

    `counts` maps an (n-1)-token context to next-token counts; contexts of
    short histories are left-padded with the START sentinel. The candidate
    vocabulary never includes START (nothing predicts a launch).
    """

    n: int
    alpha: float
    vocabulary: frozenset[str]
    counts: Mapping[tuple[str, ...], Mapping[str, int]]

    def context_for(self, history: Sequence[str]) -> tuple[str, ...]:
        padded = [START] * (self.n - 1) + list(history)
        return tuple(padded[-(self.n - 1):])

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "alpha": self.alpha,
            "vocabulary": sorted(self.vocabulary),
            "counts": [
                {
                    "context": list(context),
                    "next": {token: self.counts[context][token]
                             for token in sorted(self.counts[context])},
                }
                for context in sorted(self.counts)
            ],
        }

    @staticmethod
    def from_dict(raw: Mapping[str, Any]) -> "NGramModel":
        counts = {
            tuple(entry["context"]): dict(entry["next"]) for entry in raw["counts"]
        }
        return NGramModel(
            n=raw["n"],
            alpha=raw["alpha"],
            vocabulary=frozenset(raw["vocabulary"]),
            counts=counts,
        )


def _tokens_of(history: Sequence[Step] | Sequence[EventToken]) -> list[EventToken]:
    return [item.event if isinstance(item, Step) else item for item in history]


def infer_gui_state(
    history: Sequence[Step], efg: EventFlowGraph
) -> list[str]:
    """Fingerprints of the states the reporter may be in; see module docs
    for the decision rules. Sorted, never empty."""
    if not efg.states:
        raise ValueError("event-flow graph has no states")
    tokens = _tokens_of(history)
    current = efg.cold_start
    last_matched: EventToken | None = None
    divergent: EventToken | None = None
    for i, token in enumerate(tokens):
        target = efg.edge_target(current, token)
        if target is None:
            divergent = token
            break
        if isinstance(target, CrashOutcome):
            raise HistoryHitsCrashError(target.exception_name, ordinal=i + 1)
        current = target
        last_matched = token
    else:
        return [current]

    anchor = last_matched.component if last_matched is not None else divergent.component
    candidates = sorted(
        fp for fp, state in efg.states.items() if state.component(anchor) is not None
    )
    if candidates:
        return candidates
    return sorted(efg.states)


def train_ngram(
    trace: Sequence[EventToken] | Sequence[str],
    n: int = DEFAULT_ORDER,
    alpha: float = DEFAULT_ALPHA,
    vocabulary: Iterable[EventToken] | Iterable[str] | None = None,
) -> NGramModel:
    """Train on one chronological trace (see `train_ngram_segments` for
    multi-launch traces). The trace is left-padded with n-1 START sentinels
    and every n-gram window is counted. `vocabulary` is normally the full
    edge-token set of the source graph, so unseen-but-possible events score
    above zero; observed tokens are always included."""
    return train_ngram_segments([trace], n=n, alpha=alpha, vocabulary=vocabulary)


def train_ngram_segments(
    segments: Sequence[Sequence[EventToken] | Sequence[str]],
    n: int = DEFAULT_ORDER,
    alpha: float = DEFAULT_ALPHA,
    vocabulary: Iterable[EventToken] | Iterable[str] | None = None,
) -> NGramModel:
    """Train on several traces (one per app launch), summing their counts.
    Each segment is padded independently: the first event of a launch
    follows START context, never the previous launch's tail."""
    if n < 2:
        raise ValueError("n-gram order must be at least 2")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    token_segments = [[_token_text(t) for t in segment] for segment in segments]
    if not any(token_segments):
        raise EmptyTraceError("cannot train an n-gram model on an empty trace")
    vocab = {_token_text(t) for t in vocabulary} if vocabulary is not None else set()
    counts: dict[tuple[str, ...], dict[str, int]] = {}
    for tokens in token_segments:
        vocab.update(tokens)
        padded = [START] * (n - 1) + tokens
        for i in range(len(tokens)):
            context = tuple(padded[i:i + n - 1])
            nxt = padded[i + n - 1]
            bucket = counts.setdefault(context, {})
            bucket[nxt] = bucket.get(nxt, 0) + 1
    return NGramModel(n=n, alpha=alpha, vocabulary=frozenset(vocab), counts=counts)


def uniform_ngram(
    vocabulary: Iterable[EventToken] | Iterable[str],
    n: int = DEFAULT_ORDER,
    alpha: float = DEFAULT_ALPHA,
) -> NGramModel:
    """A model with no observations: every candidate scores 1/|V| in every
    context. Used when an exploration produced no events at all."""
    vocab = frozenset(_token_text(t) for t in vocabulary)
    return NGramModel(n=n, alpha=alpha, vocabulary=vocab, counts={})


def _token_text(token: EventToken | str) -> str:
    return token.text if isinstance(token, EventToken) else token


def ngram_score(
    model: NGramModel,
    history: Sequence[EventToken] | Sequence[str],
    candidate: EventToken | str,
) -> float:
    """Laplace-smoothed P(candidate | last n-1 history tokens):

        (count(context, candidate) + alpha) / (count(context) + alpha * |V|)

    Always in (0, 1]; scores over the whole vocabulary sum to one for any
    context."""
    cand = _token_text(candidate)
    if cand not in model.vocabulary:
        raise UnknownTokenError(f"candidate token '{cand}' is not in the vocabulary")
    context = model.context_for([_token_text(t) for t in history])
    bucket = model.counts.get(context, {})
    context_total = sum(bucket.values())
    hits = bucket.get(cand, 0)
    return (hits + model.alpha) / (context_total + model.alpha * len(model.vocabulary))


def suggest_next(
    history: Sequence[Step],
    efg: EventFlowGraph,
    ngram: NGramModel,
    universe: Mapping[str, ComponentRecord],
) -> Suggestion:
    """Offer the actions and components executable in any inferred state.

    Actions keep their canonical order; within an action, components are
    ranked by descending n-gram score of the candidate event given the
    history, ties broken by ascending component id. Every entry links the
    cropped and highlighted full-frame screenshots taken during ripping.
    """
    inferred = infer_gui_state(history, efg)
    history_tokens = [step.event.text for step in history]

    # pair -> sorted list of inferred states offering it
    offered: dict[EventToken, list[str]] = {}
    for fp in inferred:
        for token, _target in efg.outgoing(fp):
            offered.setdefault(token, []).append(fp)

    actions = tuple(a for a in ACTIONS if any(t.action == a for t in offered))
    components_by_action: dict[str, tuple[SuggestionEntry, ...]] = {}
    for action in actions:
        entries = []
        for token, sources in offered.items():
            if token.action != action:
                continue
            record = universe[token.component]
            score = ngram_score(ngram, history_tokens, token)
            contextual = []
            for fp in sources:
                entry = efg.screenshots.get((fp, token.component))
                if entry is not None:
                    contextual.append((fp, entry.full))
            primary = efg.screenshots.get((sources[0], token.component))
            entries.append(
                SuggestionEntry(
                    record=record,
                    cropped=primary.cropped if primary else None,
                    full=primary.full if primary else None,
                    score=score,
                    contextual=tuple(contextual),
                )
            )
        entries.sort(key=lambda e: (-e.score, e.record.component_id))
        components_by_action[action] = tuple(entries)

    return Suggestion(
        inferred_states=tuple(inferred),
        actions=actions,
        components_by_action=components_by_action,
    )
