"""Duplicate report detection and developer triaging.

Both techniques lean on the structure of the reports rather than their
prose: similarity compares event-token sequences (length-normalized
longest common subsequence blended with bigram-bag cosine), and triaging
sums a developer's ownership counts over the distinct activities a report
touches.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .errors import AppMismatchError, EmptyOwnershipMapError
from .reporting import BugReport

#: developer id -> activity identifier -> touch count
OwnershipMap = Mapping[str, Mapping[str, int]]


@dataclass(frozen=True)
class SimilarityConfig:
    w_lcs: float = 0.5
    w_ngram: float = 0.5
    tau: float = 0.8

    def __post_init__(self) -> None:
        if self.w_lcs < 0 or self.w_ngram < 0:
            raise ValueError("weights must be non-negative")
        if abs(self.w_lcs + self.w_ngram - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must be within [0, 1]")


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Length of the longest common subsequence, O(len(a)*len(b))."""
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for item_a in a:
        current = [0]
        for j, item_b in enumerate(b, start=1):
            if item_a == item_b:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def _bigram_bag(tokens: Sequence[str]) -> Counter:
    return Counter(zip(tokens, tokens[1:]))


def _bigram_cosine(a: Sequence[str], b: Sequence[str]) -> float:
    bag_a = _bigram_bag(a)
    bag_b = _bigram_bag(b)
    if not bag_a and not bag_b:
        # single-step reports have no bigrams; identical sequences must
        # still score 1.0, disjoint ones 0.0
        return 1.0 if list(a) == list(b) else 0.0
    if not bag_a or not bag_b:
        return 0.0
    dot = sum(count * bag_b[gram] for gram, count in bag_a.items())
    # sqrt of the integer product keeps cosine(x, x) at exactly 1.0
    norm_sq = sum(c * c for c in bag_a.values()) * sum(c * c for c in bag_b.values())
    return dot / math.sqrt(norm_sq)


def report_similarity(
    a: BugReport, b: BugReport, cfg: SimilarityConfig | None = None
) -> float:
    """Structural similarity in [0, 1]:

        w_lcs * 2*LCS(A, B) / (|A| + |B|)  +  w_ngram * cosine(bigrams)

    over the two reports' event-token sequences. Symmetric, and exactly 1.0
    for identical sequences.
    """
    cfg = cfg or SimilarityConfig()
    if a.app_id != b.app_id:
        raise AppMismatchError(
            f"cannot compare reports for different apps: {a.app_id} vs {b.app_id}"
        )
    tokens_a = [t.text for t in a.tokens()]
    tokens_b = [t.text for t in b.tokens()]
    lcs_term = 2 * lcs_length(tokens_a, tokens_b) / (len(tokens_a) + len(tokens_b))
    return cfg.w_lcs * lcs_term + cfg.w_ngram * _bigram_cosine(tokens_a, tokens_b)


@dataclass
class DuplicatePair:
    report_a: str
    report_b: str
    score: float

    def to_dict(self) -> dict[str, Any]:
        return {"a": self.report_a, "b": self.report_b, "score": self.score}


@dataclass
class DuplicateReportOutput:
    pairs: list[DuplicatePair]
    clusters: list[list[str]]
    tau: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "tau": self.tau,
            "pairs": [p.to_dict() for p in self.pairs],
            "clusters": self.clusters,
        }


def detect_duplicates(
    corpus: Sequence[BugReport], cfg: SimilarityConfig | None = None
) -> DuplicateReportOutput:
    """Score all unordered pairs, flag those at or above tau, and group the
    flagged pairs into connected-component clusters.

    Pairs come back sorted by descending score then report ids; clusters are
    the components of the flagged-pair graph (size >= 2), members sorted.
    """
    cfg = cfg or SimilarityConfig()
    ordered = sorted(corpus, key=lambda r: r.report_id)
    flagged: list[DuplicatePair] = []
    parent: dict[str, str] = {r.report_id: r.report_id for r in ordered}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: str, y: str) -> None:
        root_x, root_y = find(x), find(y)
        if root_x != root_y:
            parent[max(root_x, root_y)] = min(root_x, root_y)

    for i, first in enumerate(ordered):
        for second in ordered[i + 1:]:
            score = report_similarity(first, second, cfg)
            if score >= cfg.tau:
                flagged.append(
                    DuplicatePair(first.report_id, second.report_id, score)
                )
                union(first.report_id, second.report_id)
    flagged.sort(key=lambda p: (-p.score, p.report_a, p.report_b))

    groups: dict[str, list[str]] = {}
    for pair in flagged:
        for member in (pair.report_a, pair.report_b):
            root = find(member)
            bucket = groups.setdefault(root, [])
            if member not in bucket:
                bucket.append(member)
    clusters = sorted(sorted(members) for members in groups.values())
    return DuplicateReportOutput(pairs=flagged, clusters=clusters, tau=cfg.tau)


def triage_report(
    report: BugReport, owners: OwnershipMap
) -> list[tuple[str, int]]:
    """Rank developers by summed ownership of the distinct activities the
    report's steps touch. Descending score, ties by ascending developer id;
    zero-score developers stay in the list at the tail."""
    if not owners:
        raise EmptyOwnershipMapError("ownership map has no developers")
    activities = report.activities()
    scored = [
        (dev, sum(counts.get(activity, 0) for activity in activities))
        for dev, counts in owners.items()
    ]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored
