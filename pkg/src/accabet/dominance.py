"""Pareto dominance preprocessing over candidate bets.

A candidate is dominated when some other candidate offers at least as high
odds and at least as high probability, strictly better in one of the two.
Dominated candidates can never appear in an optimal selection, so dropping
them shrinks the search space without changing the optimum.

Two scopes: the intra filter only lets a candidate eliminate others at the
same bookmaker; the inter filter lets any candidate eliminate any other.
The inter-filtered pool is always a subset of the intra-filtered one.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .domain import BookmakerRef, CandidateBet, candidate_sort_key


class FilterMode(str, Enum):
    NONE = "none"
    INTRA = "intra"
    INTER = "inter"


@dataclass(frozen=True)
class ReductionReport:
    """Outcome of a dominance pass: sizes plus one witness per elimination."""

    input_count: int
    kept_count: int
    eliminated: tuple[tuple[CandidateBet, CandidateBet], ...]

    def __post_init__(self) -> None:
        if self.kept_count + len(self.eliminated) != self.input_count:
            raise ValueError("reduction report does not account for every candidate")

    @property
    def reduction(self) -> float:
        """Eliminated share of the input, 0.0 for an empty input."""
        if self.input_count == 0:
            return 0.0
        return len(self.eliminated) / self.input_count


def dominates(a: CandidateBet, b: CandidateBet) -> bool:
    """True when a is at least as good as b on both axes and better on one."""
    return (
        a.odds >= b.odds
        and a.prob >= b.prob
        and (a.odds > b.odds or a.prob > b.prob)
    )


def _frontier(group: Sequence[CandidateBet]) -> tuple[list[CandidateBet], list[CandidateBet]]:
    """Split one comparison group into kept and eliminated candidates.

    Sweep in descending odds order keeping the running best probability;
    within an equal-odds block only the block's best probability survives.
    Exact (odds, prob) ties all survive, since neither dominates the other.
    """
    order = sorted(group, key=lambda c: (-c.odds, -c.prob))
    kept: list[CandidateBet] = []
    eliminated: list[CandidateBet] = []
    best_prob_above = float("-inf")
    i = 0
    while i < len(order):
        j = i
        while j < len(order) and order[j].odds == order[i].odds:
            j += 1
        block = order[i:j]
        block_best_prob = block[0].prob
        for c in block:
            if best_prob_above >= c.prob or block_best_prob > c.prob:
                eliminated.append(c)
            else:
                kept.append(c)
        best_prob_above = max(best_prob_above, block_best_prob)
        i = j
    return kept, eliminated


def _witness(c: CandidateBet, pool_in_key_order: Sequence[CandidateBet]) -> CandidateBet:
    """First dominator of c in canonical order; exists for any eliminated c."""
    for d in pool_in_key_order:
        if dominates(d, c):
            return d
    raise AssertionError(f"no dominator found for eliminated candidate {c}")


def _filter_groups(
    groups: Iterable[Sequence[CandidateBet]], input_count: int
) -> tuple[list[CandidateBet], ReductionReport]:
    kept_all: list[CandidateBet] = []
    eliminated_pairs: list[tuple[CandidateBet, CandidateBet]] = []
    for group in groups:
        kept, eliminated = _frontier(group)
        kept_all.extend(kept)
        if eliminated:
            in_key_order = sorted(group, key=candidate_sort_key)
            for c in sorted(eliminated, key=candidate_sort_key):
                eliminated_pairs.append((c, _witness(c, in_key_order)))
    kept_all.sort(key=candidate_sort_key)
    report = ReductionReport(
        input_count=input_count,
        kept_count=len(kept_all),
        eliminated=tuple(eliminated_pairs),
    )
    return kept_all, report


def intra_filter(
    candidates: Sequence[CandidateBet],
) -> tuple[list[CandidateBet], ReductionReport]:
    """Keep candidates not dominated by another candidate at the same bookmaker."""
    groups = split_by_bookmaker(candidates)
    return _filter_groups(groups.values(), len(candidates))


def inter_filter(
    candidates: Sequence[CandidateBet],
) -> tuple[list[CandidateBet], ReductionReport]:
    """Keep candidates not dominated by any candidate at any bookmaker."""
    return _filter_groups([candidates] if candidates else [], len(candidates))


def apply_filter(
    candidates: Sequence[CandidateBet], mode: FilterMode
) -> tuple[list[CandidateBet], ReductionReport]:
    if mode is FilterMode.NONE:
        kept = sorted(candidates, key=candidate_sort_key)
        return kept, ReductionReport(len(candidates), len(kept), ())
    if mode is FilterMode.INTRA:
        return intra_filter(candidates)
    return inter_filter(candidates)


def split_by_bookmaker(
    candidates: Sequence[CandidateBet],
) -> dict[BookmakerRef, list[CandidateBet]]:
    """Partition candidates by bookmaker, keys in code order."""
    groups: dict[BookmakerRef, list[CandidateBet]] = {}
    for c in candidates:
        groups.setdefault(c.bookmaker, []).append(c)
    return {bk: groups[bk] for bk in sorted(groups, key=lambda b: b.code)}


def efficient_pools(
    candidates: Sequence[CandidateBet], mode: FilterMode
) -> dict[BookmakerRef, list[CandidateBet]]:
    """Filter by mode, then split by bookmaker: the solver's working pools."""
    kept, _ = apply_filter(candidates, mode)
    return split_by_bookmaker(kept)
