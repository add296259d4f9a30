"""Stochastic diffusion search over accumulator hypotheses.

One agent population per bookmaker, sharing a single wall-clock budget in
round-robin. Each iteration runs a test phase, where every agent compares
its hypothesis against a random peer and becomes inefficient (dominated on
both odds and probability), inactive (lower expected return), or active,
and a diffusion phase, where inefficient agents restart from a random
three-leg hypothesis and inactive agents either copy-and-perturb an active
peer or restart too.

The search stops at the first hypothesis whose expected return reaches
min_exp while keeping total probability at least p_min, or when the time
budget runs out, in which case no bet is recommended.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Sequence

from .dominance import FilterMode
from .domain import (
    Accumulator,
    AccumulatorTotals,
    BookmakerRef,
    CandidateBet,
    MatchRef,
    accumulator_totals,
    candidate_sort_key,
    match_sort_key,
)


class OracleLimitError(ValueError):
    """Raised when an instance is too large for exhaustive enumeration."""


@dataclass(frozen=True)
class SolverParams:
    """Search configuration; defaults follow the batch recommendation setup."""

    p_min: float = 0.25
    min_exp: float = 2.0
    max_time: float = 600.0
    population: int = 50
    seed: int = 0
    max_legs: int | None = None
    filter_mode: FilterMode = FilterMode.INTRA

    def __post_init__(self) -> None:
        if not 0.0 < self.p_min < 1.0:
            raise ValueError(f"p_min must lie in (0, 1), got {self.p_min}")
        if self.min_exp < 0.0:
            raise ValueError(f"min_exp cannot be negative, got {self.min_exp}")
        if self.max_time <= 0.0:
            raise ValueError(f"max_time must be positive, got {self.max_time}")
        if self.population < 2:
            raise ValueError(f"population must be at least 2, got {self.population}")
        if self.max_legs is not None and self.max_legs < 1:
            raise ValueError(f"max_legs must be positive, got {self.max_legs}")


class AgentStatus(Enum):
    ACTIVE = "active"
    INACTIVE = "inactive"
    INEFFICIENT = "inefficient"


@dataclass
class Agent:
    """One search agent; hypothesis and totals stay in sync."""

    hypothesis: Accumulator
    totals: AccumulatorTotals
    status: AgentStatus = AgentStatus.ACTIVE


class SearchReason(Enum):
    MET_THRESHOLD = "MetThreshold"
    TIMED_OUT = "TimedOut"


@dataclass(frozen=True)
class SearchOutcome:
    """Result of one search: the selected bet, if any, and why it stopped."""

    best: tuple[Accumulator, AccumulatorTotals] | None
    iterations: int
    elapsed: float
    reason: SearchReason


@dataclass(frozen=True)
class TraceRecord:
    """One per-population iteration snapshot for convergence logging."""

    iteration: int
    bookmaker: str
    best_exp: float
    active_fraction: float


AuditHook = Callable[[Accumulator], None]
TraceHook = Callable[[TraceRecord], None]


def _leg_key(acc: Accumulator) -> tuple:
    return tuple(candidate_sort_key(leg) for leg in acc.legs)


def relaxed_initialization(
    candidates: Sequence[CandidateBet],
    p_min: float,
    rng: random.Random,
    max_legs: int | None = None,
) -> Accumulator:
    """Build a starting hypothesis from the continuous relaxation.

    Maximizing sum(x * ln odds) subject to sum(x * -ln prob) <= -ln p_min
    with 0 <= x <= 1 is a fractional knapsack: fill by descending
    ln(odds) / -ln(prob) ratio, stop at the first item that no longer fits
    and keep its fractional share. Fractions are rounded at 0.5. Ratio ties
    are ordered randomly, conflicting legs on one match keep the highest
    probability, and an empty rounding falls back to the single candidate
    with the best expected return.
    """
    if not candidates:
        raise ValueError("no candidates to initialize from")
    pool = sorted(candidates, key=candidate_sort_key)
    rng.shuffle(pool)

    def ratio(c: CandidateBet) -> float:
        return math.log(c.odds) / -math.log(c.prob)

    pool.sort(key=ratio, reverse=True)
    budget = -math.log(p_min)
    used = 0.0
    chosen: list[CandidateBet] = []
    for c in pool:
        weight = -math.log(c.prob)
        if used + weight <= budget:
            chosen.append(c)
            used += weight
        else:
            if (budget - used) / weight >= 0.5:
                chosen.append(c)
            break

    by_match: dict[MatchRef, CandidateBet] = {}
    for c in chosen:
        current = by_match.get(c.match)
        if current is None or c.prob > current.prob:
            by_match[c.match] = c
    legs = sorted(by_match.values(), key=ratio, reverse=True)
    if max_legs is not None:
        legs = legs[:max_legs]
    if not legs:
        legs = [max(pool, key=lambda c: (c.odds * c.prob, candidate_sort_key(c)))]
    return Accumulator(bookmaker=legs[0].bookmaker, legs=tuple(legs))


def _random_hypothesis(
    matches: Sequence[MatchRef],
    by_match: Mapping[MatchRef, Sequence[CandidateBet]],
    rng: random.Random,
    max_legs: int | None,
) -> Accumulator:
    """Fresh hypothesis: up to three legs on distinct random matches."""
    want = min(3, len(matches)) if max_legs is None else min(3, len(matches), max_legs)
    picked = rng.sample(list(matches), want)
    legs = tuple(rng.choice(list(by_match[m])) for m in picked)
    return Accumulator(bookmaker=legs[0].bookmaker, legs=legs)


def neighborhood_move(
    acc: Accumulator, pool: Sequence[CandidateBet], rng: random.Random
) -> Accumulator:
    """Swap one random leg for an unselected, non-conflicting pool candidate.

    The replacement may sit on the vacated match (switching outcome) or on a
    fresh one; it may not duplicate a current leg or collide with a kept
    leg's match. With no eligible replacement the accumulator is unchanged.
    """
    if not acc.legs:
        return acc
    index = rng.randrange(len(acc.legs))
    kept = [leg for i, leg in enumerate(acc.legs) if i != index]
    kept_matches = {leg.match for leg in kept}
    current = set(acc.legs)
    eligible = [
        c
        for c in sorted(pool, key=candidate_sort_key)
        if c not in current and c.match not in kept_matches
    ]
    if not eligible:
        return acc
    replacement = rng.choice(eligible)
    return Accumulator(bookmaker=acc.bookmaker, legs=tuple(kept) + (replacement,))


def test_phase(population: Sequence[Agent], rng: random.Random) -> None:
    """Set every agent's status from one comparison against a random peer.

    Statuses are computed against a snapshot of the population and applied
    afterwards, so the order of comparisons cannot matter.
    """
    totals = [agent.totals for agent in population]
    n = len(population)
    statuses: list[AgentStatus] = []
    for i in range(n):
        j = rng.randrange(n - 1)
        if j >= i:
            j += 1
        mine, theirs = totals[i], totals[j]
        dominated = (
            mine.odds <= theirs.odds
            and mine.prob <= theirs.prob
            and (mine.odds < theirs.odds or mine.prob < theirs.prob)
        )
        if dominated:
            statuses.append(AgentStatus.INEFFICIENT)
        elif mine.exp < theirs.exp:
            statuses.append(AgentStatus.INACTIVE)
        else:
            statuses.append(AgentStatus.ACTIVE)
    for agent, status in zip(population, statuses):
        agent.status = status


def diffusion_phase(
    population: Sequence[Agent],
    efficient_pool: Sequence[CandidateBet],
    rng: random.Random,
    max_legs: int | None = None,
    audit: AuditHook | None = None,
) -> None:
    """Replace inefficient hypotheses and spread active ones.

    Inefficient agents restart from a random hypothesis. Inactive agents
    draw a random peer: an active peer's hypothesis is adopted after one
    neighborhood move, anything else means restart. Active agents keep
    their hypotheses, so reading peers in place is safe: only non-active
    hypotheses are ever overwritten, and decisions use the statuses frozen
    by the last test phase.
    """
    by_match: dict[MatchRef, list[CandidateBet]] = {}
    for c in sorted(efficient_pool, key=candidate_sort_key):
        by_match.setdefault(c.match, []).append(c)
    matches = sorted(by_match, key=match_sort_key)
    if not matches:
        return
    statuses = [agent.status for agent in population]
    n = len(population)

    def assign(agent: Agent, hypothesis: Accumulator) -> None:
        agent.hypothesis = hypothesis
        agent.totals = accumulator_totals(hypothesis)
        if audit is not None:
            audit(hypothesis)

    for i, agent in enumerate(population):
        if statuses[i] is AgentStatus.ACTIVE:
            continue
        if statuses[i] is AgentStatus.INEFFICIENT:
            assign(agent, _random_hypothesis(matches, by_match, rng, max_legs))
            continue
        j = rng.randrange(n - 1)
        if j >= i:
            j += 1
        if statuses[j] is AgentStatus.ACTIVE:
            assign(agent, neighborhood_move(population[j].hypothesis, efficient_pool, rng))
        else:
            assign(agent, _random_hypothesis(matches, by_match, rng, max_legs))


def _qualifies(
    agent: Agent, params: SolverParams
) -> bool:
    if agent.totals.exp < params.min_exp or agent.totals.prob < params.p_min:
        return False
    if params.max_legs is not None and len(agent.hypothesis.legs) > params.max_legs:
        return False
    return True


def _best_qualifying(
    population: Sequence[Agent], params: SolverParams
) -> tuple[Accumulator, AccumulatorTotals] | None:
    best: tuple[Accumulator, AccumulatorTotals] | None = None
    for agent in population:
        if not _qualifies(agent, params):
            continue
        if (
            best is None
            or agent.totals.exp > best[1].exp
            or (agent.totals.exp == best[1].exp and _leg_key(agent.hypothesis) < _leg_key(best[0]))
        ):
            best = (agent.hypothesis, agent.totals)
    return best


def _init_population(
    pool: Sequence[CandidateBet],
    params: SolverParams,
    rng: random.Random,
    audit: AuditHook | None,
) -> list[Agent]:
    """Seed one agent from the relaxation, the rest from random restarts.

    An all-relaxation population would be near-uniform and therefore all
    active after the first test phase, freezing the search; the random
    majority supplies the diversity diffusion feeds on.
    """
    by_match: dict[MatchRef, list[CandidateBet]] = {}
    for c in sorted(pool, key=candidate_sort_key):
        by_match.setdefault(c.match, []).append(c)
    matches = sorted(by_match, key=match_sort_key)
    agents: list[Agent] = []
    for i in range(params.population):
        if i == 0:
            hypothesis = relaxed_initialization(pool, params.p_min, rng, params.max_legs)
        else:
            hypothesis = _random_hypothesis(matches, by_match, rng, params.max_legs)
        if audit is not None:
            audit(hypothesis)
        agents.append(Agent(hypothesis=hypothesis, totals=accumulator_totals(hypothesis)))
    return agents


def sds_search(
    pool_by_bookmaker: Mapping[BookmakerRef, Sequence[CandidateBet]],
    params: SolverParams,
    rng: random.Random | None = None,
    trace: TraceHook | None = None,
    audit: AuditHook | None = None,
) -> SearchOutcome:
    """Run the diffusion search across all bookmaker pools.

    Populations take turns, one test-and-diffusion iteration each, against
    one shared clock. The first qualifying hypothesis (exp >= min_exp,
    prob >= p_min, leg cap respected) ends the search; max_time ends it
    with no bet. With a fixed seed the selection is reproducible, although
    the iteration count of a timed-out run depends on machine speed.
    """
    start = time.monotonic()
    if rng is None:
        rng = random.Random(params.seed)
    pools = {
        bk: sorted(pool_by_bookmaker[bk], key=candidate_sort_key)
        for bk in sorted(pool_by_bookmaker, key=lambda b: b.code)
        if pool_by_bookmaker[bk]
    }
    if not pools:
        return SearchOutcome(None, 0, 0.0, SearchReason.TIMED_OUT)

    populations: dict[BookmakerRef, list[Agent]] = {}
    incumbent: tuple[Accumulator, AccumulatorTotals] | None = None
    for bk, pool in pools.items():
        population = _init_population(pool, params, rng, audit)
        populations[bk] = population
        incumbent = _better(incumbent, _best_qualifying(population, params))
    iterations = 0
    if incumbent is not None:
        return SearchOutcome(
            incumbent, iterations, time.monotonic() - start, SearchReason.MET_THRESHOLD
        )

    while True:
        for bk, population in populations.items():
            if time.monotonic() - start >= params.max_time:
                return SearchOutcome(
                    None, iterations, time.monotonic() - start, SearchReason.TIMED_OUT
                )
            test_phase(population, rng)
            diffusion_phase(population, pools[bk], rng, params.max_legs, audit)
            iterations += 1
            if trace is not None:
                active = sum(1 for a in population if a.status is AgentStatus.ACTIVE)
                trace(
                    TraceRecord(
                        iteration=iterations,
                        bookmaker=bk.code,
                        best_exp=max(a.totals.exp for a in population),
                        active_fraction=active / len(population),
                    )
                )
            incumbent = _better(incumbent, _best_qualifying(population, params))
            if incumbent is not None:
                return SearchOutcome(
                    incumbent,
                    iterations,
                    time.monotonic() - start,
                    SearchReason.MET_THRESHOLD,
                )


def _better(
    a: tuple[Accumulator, AccumulatorTotals] | None,
    b: tuple[Accumulator, AccumulatorTotals] | None,
) -> tuple[Accumulator, AccumulatorTotals] | None:
    if a is None:
        return b
    if b is None:
        return a
    if b[1].exp > a[1].exp:
        return b
    if b[1].exp == a[1].exp and _leg_key(b[0]) < _leg_key(a[0]):
        return b
    return a


def enumerate_oracle(
    candidates: Sequence[CandidateBet],
    p_min: float,
    max_legs: int | None = None,
) -> tuple[
    tuple[Accumulator, AccumulatorTotals] | None,
    list[tuple[Accumulator, AccumulatorTotals]],
]:
    """Exhaustively enumerate feasible accumulators at one bookmaker.

    Returns the expected-return maximizer among those with prob >= p_min
    (None when nothing qualifies) and the full odds/probability Pareto
    front over all feasible accumulators. Guarded against instances whose
    conflict-pruned subset count exceeds 2**24.
    """
    if max_legs is not None and max_legs > 12:
        raise ValueError(f"max_legs cannot exceed 12, got {max_legs}")
    if not candidates:
        return None, []
    bookmakers = {c.bookmaker for c in candidates}
    if len(bookmakers) > 1:
        raise ValueError("oracle instances must use a single bookmaker")
    bookmaker = next(iter(bookmakers))

    by_match: dict[MatchRef, list[CandidateBet]] = {}
    for c in sorted(candidates, key=candidate_sort_key):
        by_match.setdefault(c.match, []).append(c)
    groups = [by_match[m] for m in sorted(by_match, key=match_sort_key)]

    combinations = 1
    for group in groups:
        combinations *= len(group) + 1
        if combinations > 2**24:
            raise OracleLimitError("oracle limit exceeded")

    best: tuple[Accumulator, AccumulatorTotals] | None = None
    front: list[tuple[Accumulator, AccumulatorTotals]] = []

    def visit(legs: tuple[CandidateBet, ...]) -> None:
        nonlocal best
        acc = Accumulator(bookmaker=bookmaker, legs=legs)
        totals = accumulator_totals(acc)
        if totals.prob >= p_min:
            candidate = (acc, totals)
            best = _better(best, candidate)
        dominated = any(
            f.odds >= totals.odds
            and f.prob >= totals.prob
            and (f.odds > totals.odds or f.prob > totals.prob)
            for _, f in front
        )
        if not dominated:
            front[:] = [
                entry
                for entry in front
                if not (
                    totals.odds >= entry[1].odds
                    and totals.prob >= entry[1].prob
                    and (totals.odds > entry[1].odds or totals.prob > entry[1].prob)
                )
            ]
            front.append((acc, totals))

    def recurse(depth: int, legs: tuple[CandidateBet, ...]) -> None:
        if depth == len(groups):
            if legs:
                visit(legs)
            return
        recurse(depth + 1, legs)
        if max_legs is None or len(legs) < max_legs:
            for c in groups[depth]:
                recurse(depth + 1, legs + (c,))

    recurse(0, ())
    front.sort(key=lambda entry: (-entry[1].odds, -entry[1].prob, _leg_key(entry[0])))
    return best, front
