"""Stake sizing rules and return/variance analytics for combined vs split bets.

Two sizing rules:

* conservative Kelly: f = p - (1 - p) / o, floored at zero. This uses the
  full decimal odds o in the denominator rather than the net odds (o - 1),
  which deliberately understakes relative to the textbook criterion; pass
  textbook=True for the classic form.
* variance-adjusted: c = 1 / (2 * o * (1 - p)), capped at 1. Staking this
  fraction halves the strategy's contribution to portfolio variance for
  long-odds bets while remaining bankroll-bounded.

The moments helpers quantify the risk trade-off between betting a set of
legs as one accumulator versus splitting the same total stake equally
across the legs as singles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .domain import Accumulator, CandidateBet


def _check_edge(p: float, o: float) -> None:
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p}")
    if not o > 1.0:
        raise ValueError(f"odds must exceed 1.0, got {o}")


def kelly_fraction(p: float, o: float, textbook: bool = False) -> float:
    """Conservative Kelly stake as a fraction of the staking base."""
    _check_edge(p, o)
    denominator = (o - 1.0) if textbook else o
    return max(0.0, p - (1.0 - p) / denominator)


def variance_adjusted_stake(p: float, o: float) -> float:
    """Variance-halving stake fraction, capped at the whole staking base."""
    _check_edge(p, o)
    return min(1.0, 1.0 / (2.0 * o * (1.0 - p)))


class Sizing(str, Enum):
    """Stake sizing rule applied to a selected bet."""

    CONSERVATIVE_KELLY = "kelly"
    VARIANCE_ADJUSTED = "variance-adjusted"


def stake_fraction(sizing: Sizing, p: float, o: float) -> float:
    if sizing is Sizing.CONSERVATIVE_KELLY:
        return kelly_fraction(p, o)
    return variance_adjusted_stake(p, o)


@dataclass(frozen=True)
class BetMoments:
    """First two moments of the unit-stake return of a betting scheme."""

    expected_return: float
    variance: float

    def __post_init__(self) -> None:
        if self.variance < 0.0:
            raise ValueError(f"variance cannot be negative, got {self.variance}")


def accumulator_moments(legs: Iterable[tuple[float, float]]) -> BetMoments:
    """Moments of one unit staked on the accumulator of (odds, prob) legs.

    The return is prod(o) with probability prod(p) and 0 otherwise, so
    E = prod(o_i p_i) and V = prod(o_i^2 p_i) * (1 - prod(p_i)).
    """
    legs = list(legs)
    if not legs:
        raise ValueError("empty accumulator")
    expected = 1.0
    second = 1.0
    prob_all = 1.0
    for o, p in legs:
        _check_edge(p, o)
        expected *= o * p
        second *= o * o * p
        prob_all *= p
    return BetMoments(expected_return=expected, variance=second * (1.0 - prob_all))


def split_singles_moments(legs: Iterable[tuple[float, float]]) -> BetMoments:
    """Moments of one unit split equally across the (odds, prob) legs as singles.

    E = (1/k) sum(o_i p_i) and V = (1/k^2) sum(o_i^2 p_i (1 - p_i)); the legs
    are independent events.
    """
    legs = list(legs)
    if not legs:
        raise ValueError("empty bet set")
    k = len(legs)
    expected = 0.0
    variance = 0.0
    for o, p in legs:
        _check_edge(p, o)
        expected += o * p
        variance += o * o * p * (1.0 - p)
    return BetMoments(expected_return=expected / k, variance=variance / (k * k))


StakeTarget = Accumulator | CandidateBet


@dataclass(frozen=True)
class StakePlan:
    """Stake fractions assigned to bet targets for one matchday."""

    strategy: Sizing
    stakes: tuple[tuple[StakeTarget, float], ...]

    @property
    def total_fraction(self) -> float:
        return math.fsum(fraction for _, fraction in self.stakes)


def build_stake_plan(
    strategy: Sizing, items: Sequence[tuple[StakeTarget, float, float]]
) -> StakePlan:
    """Size each (target, prob, odds) item and normalize to at most one base.

    Zero-fraction items (Kelly says no edge) are dropped. If the fractions
    sum past 1.0 they are scaled down proportionally so the matchday can
    never stake more than the whole base.
    """
    sized = []
    for target, p, o in items:
        fraction = stake_fraction(strategy, p, o)
        if fraction > 0.0:
            sized.append((target, fraction))
    total = math.fsum(fraction for _, fraction in sized)
    if total > 1.0:
        sized = [(target, fraction / total) for target, fraction in sized]
    return StakePlan(strategy=strategy, stakes=tuple(sized))
