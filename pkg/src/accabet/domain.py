"""Core data model: matches, bookmakers, candidate bets, accumulators.

Decimal (European) odds throughout. Probabilities are outcome estimates
attached to each candidate bet; they do not depend on the bookmaker, only
the odds do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable


class Outcome(str, Enum):
    """Full-time result market: home win, draw, away win."""

    HOME = "H"
    DRAW = "D"
    AWAY = "A"

    @classmethod
    def from_code(cls, code: str) -> "Outcome":
        try:
            return cls(code.strip().upper())
        except ValueError:
            raise ValueError(f"unknown outcome code: {code!r}") from None


# Fixed iteration order (home, draw, away); used for deterministic sorting only.
OUTCOME_ORDER = {Outcome.HOME: 0, Outcome.DRAW: 1, Outcome.AWAY: 2}


@dataclass(frozen=True)
class MatchRef:
    """Identity of one fixture within a season."""

    league: str
    matchday: int
    home_team: str
    away_team: str

    def __post_init__(self) -> None:
        if self.matchday < 1:
            raise ValueError(f"matchday must be positive, got {self.matchday}")
        if self.home_team == self.away_team:
            raise ValueError(f"a team cannot play itself: {self.home_team}")

    def label(self) -> str:
        return f"{self.league} MD{self.matchday} {self.home_team} v {self.away_team}"


@dataclass(frozen=True)
class BookmakerRef:
    """Bookmaker identity, e.g. B365 or BW."""

    code: str

    def __post_init__(self) -> None:
        if not self.code:
            raise ValueError("bookmaker code must be nonempty")


def match_sort_key(match: MatchRef) -> tuple:
    return (match.league, match.matchday, match.home_team, match.away_team)


@dataclass(frozen=True)
class CandidateBet:
    """One backable outcome of one match at one bookmaker."""

    match: MatchRef
    bookmaker: BookmakerRef
    outcome: Outcome
    odds: float
    prob: float

    def __post_init__(self) -> None:
        if not self.odds > 1.0:
            raise ValueError(f"odds must exceed 1.0, got {self.odds}")
        if not 0.0 < self.prob < 1.0:
            raise ValueError(f"prob must lie in (0, 1), got {self.prob}")

    def label(self) -> str:
        return f"{self.match.home_team} v {self.match.away_team} ({self.outcome.value})"


def candidate_sort_key(c: CandidateBet) -> tuple:
    """Canonical (bookmaker, match, outcome) ordering; odds/prob break exotic ties."""
    return (
        c.bookmaker.code,
        *match_sort_key(c.match),
        OUTCOME_ORDER[c.outcome],
        c.odds,
        c.prob,
    )


@dataclass(frozen=True)
class Accumulator:
    """A combination bet: a set of legs placed together at one bookmaker.

    Legs are deduplicated and stored in canonical order, so two accumulators
    with the same leg set compare equal. Construction does not enforce the
    one-outcome-per-match or single-bookmaker constraints; use
    validate_accumulator to check them.
    """

    bookmaker: BookmakerRef
    legs: tuple[CandidateBet, ...]

    def __post_init__(self) -> None:
        canonical = tuple(sorted(set(self.legs), key=candidate_sort_key))
        object.__setattr__(self, "legs", canonical)


@dataclass(frozen=True)
class AccumulatorTotals:
    """Combined odds, win probability, and expected unit return of an accumulator."""

    odds: float
    prob: float
    exp: float


@dataclass(frozen=True)
class ConstraintViolation:
    """One broken accumulator constraint, with the legs responsible."""

    constraint: str
    message: str
    legs: tuple[CandidateBet, ...]


def accumulator_totals(acc: Accumulator) -> AccumulatorTotals:
    """Total odds and probability of an accumulator.

    Products are accumulated in log space so leg order cannot change the
    result; exp is odds * prob by definition.
    """
    if not acc.legs:
        raise ValueError("empty accumulator")
    log_odds = math.fsum(math.log(leg.odds) for leg in acc.legs)
    log_prob = math.fsum(math.log(leg.prob) for leg in acc.legs)
    odds = math.exp(log_odds)
    prob = math.exp(log_prob)
    return AccumulatorTotals(odds=odds, prob=prob, exp=odds * prob)


def validate_accumulator(acc: Accumulator) -> list[ConstraintViolation]:
    """Check nonemptiness, one outcome per match, and single bookmaker.

    Returns an empty list iff the accumulator is feasible.
    """
    violations: list[ConstraintViolation] = []
    if not acc.legs:
        violations.append(
            ConstraintViolation("empty", "accumulator has no legs", ())
        )
        return violations

    by_match: dict[MatchRef, list[CandidateBet]] = {}
    for leg in acc.legs:
        by_match.setdefault(leg.match, []).append(leg)
    for match in sorted(by_match, key=match_sort_key):
        group = by_match[match]
        if len(group) > 1:
            violations.append(
                ConstraintViolation(
                    "conflicting-outcomes",
                    f"{len(group)} outcomes selected for {match.label()}",
                    tuple(group),
                )
            )

    strays = tuple(leg for leg in acc.legs if leg.bookmaker != acc.bookmaker)
    if strays:
        codes = sorted({leg.bookmaker.code for leg in strays} | {acc.bookmaker.code})
        violations.append(
            ConstraintViolation(
                "mixed-bookmaker",
                "legs span bookmakers " + ", ".join(codes),
                strays,
            )
        )
    return violations


def distinct_matches(legs: Iterable[CandidateBet]) -> set[MatchRef]:
    return {leg.match for leg in legs}
