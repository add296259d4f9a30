"""Historical season replay for the four selection/sizing strategy combos.

Strategies bet a fraction of a conservative staking base: the base starts
at the initial bankroll and after every matchday drops to the lower of
itself and the running bankroll, so it tracks the worst drawdown and never
grows back with winnings.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Iterator, Sequence

from .dominance import FilterMode, apply_filter, efficient_pools
from .domain import (
    Accumulator,
    CandidateBet,
    MatchRef,
    Outcome,
    accumulator_totals,
)
from .ingest import MatchdayPool
from .solver import SearchReason, SolverParams, sds_search
from .staking import Sizing, StakeTarget, build_stake_plan


class Selector(str, Enum):
    """What gets selected each matchday: one accumulator or many singles."""

    ACCUMULATOR = "acc"
    SINGLES = "singles"


@dataclass(frozen=True)
class StrategyCombo:
    selector: Selector
    sizing: Sizing

    @property
    def label(self) -> str:
        sizing = "kelly" if self.sizing is Sizing.CONSERVATIVE_KELLY else "va"
        return f"{self.selector.value}-{sizing}"


_COMBO_LABELS = {
    "acc-kelly": StrategyCombo(Selector.ACCUMULATOR, Sizing.CONSERVATIVE_KELLY),
    "acc-va": StrategyCombo(Selector.ACCUMULATOR, Sizing.VARIANCE_ADJUSTED),
    "singles-kelly": StrategyCombo(Selector.SINGLES, Sizing.CONSERVATIVE_KELLY),
    "singles-va": StrategyCombo(Selector.SINGLES, Sizing.VARIANCE_ADJUSTED),
}

ALL_COMBOS = tuple(_COMBO_LABELS.values())


def parse_combo(label: str) -> StrategyCombo:
    try:
        return _COMBO_LABELS[label]
    except KeyError:
        known = ", ".join(sorted(_COMBO_LABELS))
        raise ValueError(f"unknown combo {label!r} (known: {known})") from None


@dataclass(frozen=True)
class Wager:
    """One placed bet: its target, size, and settled result."""

    target: StakeTarget
    fraction: float
    amount: float
    odds: float
    prob: float
    won: bool
    net_gain: float

    def label(self) -> str:
        if isinstance(self.target, Accumulator):
            legs = " + ".join(leg.label() for leg in self.target.legs)
            return f"{self.target.bookmaker.code}: {legs}"
        return f"{self.target.bookmaker.code}: {self.target.label()}"


@dataclass(frozen=True)
class LedgerEntry:
    """One matchday's wagers and the resulting account state."""

    matchday: int
    wagers: tuple[Wager, ...]
    net_gain: float
    bankroll_after: float
    staking_base_after: float


def settle(acc: Accumulator, results: dict[MatchRef, Outcome], amount: float) -> float:
    """Net gain of one settled accumulator: full payout or full loss."""
    if not acc.legs:
        raise ValueError("empty accumulator")
    if amount == 0.0:
        return 0.0
    won = True
    for leg in acc.legs:
        if leg.match not in results:
            raise ValueError(f"no result for {leg.match.label()}")
        won = won and results[leg.match] is leg.outcome
    if won:
        return amount * (accumulator_totals(acc).odds - 1.0)
    return -amount


def _as_accumulator(target: StakeTarget) -> Accumulator:
    if isinstance(target, Accumulator):
        return target
    return Accumulator(bookmaker=target.bookmaker, legs=(target,))


def _matchday_plan(
    pool: MatchdayPool,
    combo: StrategyCombo,
    params: SolverParams,
    rng: random.Random,
) -> list[tuple[StakeTarget, float, float, float]]:
    """Select targets and fractions: (target, fraction, odds, prob) rows."""
    if combo.selector is Selector.SINGLES:
        kept, _ = apply_filter(pool.candidates, params.filter_mode)
        plan = build_stake_plan(
            combo.sizing, [(c, c.prob, c.odds) for c in kept]
        )
        fractions = dict(plan.stakes)
        return [
            (c, fractions[c], c.odds, c.prob) for c in kept if c in fractions
        ]
    pools = efficient_pools(pool.candidates, params.filter_mode)
    outcome = sds_search(pools, params, rng)
    if outcome.reason is not SearchReason.MET_THRESHOLD:
        return []
    acc, totals = outcome.best
    plan = build_stake_plan(combo.sizing, [(acc, totals.prob, totals.odds)])
    if not plan.stakes:
        return []
    (_, fraction), = plan.stakes
    return [(acc, fraction, totals.odds, totals.prob)]


def iter_season(
    pools: Sequence[MatchdayPool],
    combo: StrategyCombo,
    params: SolverParams,
    initial_bankroll: float = 100.0,
    rng: random.Random | None = None,
) -> Iterator[LedgerEntry]:
    """Replay a season matchday by matchday, yielding ledger entries.

    All of a matchday's wagers are placed against the staking base as it
    stood before the matchday and settle simultaneously.
    """
    if initial_bankroll <= 0.0:
        raise ValueError(f"initial bankroll must be positive, got {initial_bankroll}")
    if rng is None:
        rng = random.Random(params.seed)
    bankroll = float(initial_bankroll)
    base = float(initial_bankroll)
    for pool in sorted(pools, key=lambda p: p.matchday):
        wagers: list[Wager] = []
        for target, fraction, odds, prob in _matchday_plan(pool, combo, params, rng):
            amount = fraction * base
            gain = settle(_as_accumulator(target), pool.results, amount)
            wagers.append(
                Wager(
                    target=target,
                    fraction=fraction,
                    amount=amount,
                    odds=odds,
                    prob=prob,
                    won=gain > 0.0,
                    net_gain=gain,
                )
            )
        net = math.fsum(w.net_gain for w in wagers)
        bankroll += net
        base = min(base, bankroll)
        yield LedgerEntry(
            matchday=pool.matchday,
            wagers=tuple(wagers),
            net_gain=net,
            bankroll_after=bankroll,
            staking_base_after=base,
        )


def run_season(
    pools: Sequence[MatchdayPool],
    combo: StrategyCombo,
    params: SolverParams,
    initial_bankroll: float = 100.0,
    rng: random.Random | None = None,
    progress: Callable[[LedgerEntry], None] | None = None,
) -> list[LedgerEntry]:
    """Replay a whole season and return the full ledger."""
    ledger = []
    for entry in iter_season(pools, combo, params, initial_bankroll, rng):
        ledger.append(entry)
        if progress is not None:
            progress(entry)
    return ledger


@dataclass(frozen=True)
class SeasonSummary:
    """Per-strategy season report in the shape of a results table row.

    Stake averages are reported two ways: summed per matchday (the share of
    the base risked per round) and per individual bet.
    """

    matchdays: int
    matchdays_with_bets: int
    bet_count: int
    winning_bet_count: int
    average_odds: float | None
    average_probability: float | None
    average_stakes_per_matchday: float | None
    average_stake_per_bet: float | None
    total_gains: float


def summarize(
    ledger: Sequence[LedgerEntry], initial_bankroll: float | None = None
) -> SeasonSummary:
    """Aggregate a ledger; averages cover only matchdays that placed a bet."""
    wagers = [w for entry in ledger for w in entry.wagers]
    betting_days = [entry for entry in ledger if entry.wagers]
    if initial_bankroll is None:
        if not ledger:
            raise ValueError("cannot infer the initial bankroll of an empty ledger")
        initial_bankroll = ledger[0].bankroll_after - ledger[0].net_gain
    final = ledger[-1].bankroll_after if ledger else initial_bankroll

    def mean(values: list[float]) -> float | None:
        return math.fsum(values) / len(values) if values else None

    return SeasonSummary(
        matchdays=len(ledger),
        matchdays_with_bets=len(betting_days),
        bet_count=len(wagers),
        winning_bet_count=sum(1 for w in wagers if w.won),
        average_odds=mean([w.odds for w in wagers]),
        average_probability=mean([w.prob for w in wagers]),
        average_stakes_per_matchday=mean(
            [math.fsum(w.fraction for w in entry.wagers) for entry in betting_days]
        ),
        average_stake_per_bet=mean([w.fraction for w in wagers]),
        total_gains=(final - initial_bankroll) / initial_bankroll,
    )


def ledger_to_csv(ledger: Iterable[LedgerEntry], strategy: str) -> str:
    """One CSV row per wager: the audit trail of a season run."""
    lines = ["matchday,strategy,stake,odds,prob,won,net_gain,bankroll"]
    for entry in ledger:
        for w in entry.wagers:
            lines.append(
                f"{entry.matchday},{strategy},{w.amount!r},{w.odds!r},{w.prob!r},"
                f"{int(w.won)},{w.net_gain!r},{entry.bankroll_after!r}"
            )
    return "\n".join(lines) + "\n"


def cumulative_gains(
    ledger: Sequence[LedgerEntry], initial_bankroll: float | None = None
) -> list[tuple[int, float]]:
    """Per-matchday cumulative gain fractions relative to the start."""
    if initial_bankroll is None:
        if not ledger:
            return []
        initial_bankroll = ledger[0].bankroll_after - ledger[0].net_gain
    return [
        (entry.matchday, (entry.bankroll_after - initial_bankroll) / initial_bankroll)
        for entry in ledger
    ]
