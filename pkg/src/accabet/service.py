"""HTTP+JSON service exposing recommendation, Pareto exploration, what-if
evaluation, backtesting, and per-session wager ledgers.

Money crosses the wire as decimal strings ("102.35") to keep client-side
bookkeeping exact; odds and probabilities are plain JSON numbers. The
dataset is immutable once loaded; session ledgers are the only mutable
state and only wager recording mutates them.
"""

from __future__ import annotations

import glob
import json
import secrets
import threading
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation, ROUND_HALF_EVEN
from typing import Iterator, Literal

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from .backtest import (
    LedgerEntry,
    cumulative_gains,
    iter_season,
    parse_combo,
    settle,
    summarize,
)
from .dominance import FilterMode, apply_filter, efficient_pools
from .domain import (
    Accumulator,
    BookmakerRef,
    CandidateBet,
    MatchRef,
    Outcome,
    accumulator_totals,
    validate_accumulator,
)
from .ingest import ExternalProbabilities, MatchdayPool, load_season
from .solver import SearchReason, SolverParams, sds_search
from .staking import (
    accumulator_moments,
    kelly_fraction,
    split_singles_moments,
    variance_adjusted_stake,
)

CENTS = Decimal("0.01")
INTERACTIVE_TIME_CAP = 30.0


def _money(value: Decimal) -> str:
    return str(value.quantize(CENTS, rounding=ROUND_HALF_EVEN))


def _parse_money(raw: str | float | int, name: str) -> Decimal:
    try:
        amount = Decimal(str(raw)).quantize(CENTS, rounding=ROUND_HALF_EVEN)
    except (InvalidOperation, ValueError):
        raise HTTPException(status_code=400, detail=f"invalid {name}: {raw!r}") from None
    return amount


class Dataset:
    """Loaded season pools plus cached dominance reports."""

    def __init__(self, pools: list[MatchdayPool]):
        self.pools = sorted(pools, key=lambda p: p.matchday)
        self.by_day = {pool.matchday: pool for pool in self.pools}
        self._filter_cache: dict[tuple[int, FilterMode], tuple] = {}

    def filtered(self, day: int, mode: FilterMode):
        key = (day, mode)
        if key not in self._filter_cache:
            self._filter_cache[key] = apply_filter(self.by_day[day].candidates, mode)
        return self._filter_cache[key]


@dataclass
class Session:
    """One interactive bankroll ledger; mutated only by wager recording."""

    bankroll: Decimal
    staking_base: Decimal
    entries: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


class ParamsIn(BaseModel):
    p_min: float = 0.25
    min_exp: float = 2.0
    max_time: float = INTERACTIVE_TIME_CAP
    population: int = 50
    seed: int = 0
    max_legs: int | None = None
    filter: Literal["none", "intra", "inter"] = "intra"


class RecommendIn(BaseModel):
    matchday: int
    params: ParamsIn = ParamsIn()


class LegIn(BaseModel):
    league: str
    matchday: int = 1
    home_team: str
    away_team: str
    outcome: str
    bookmaker: str
    odds: float
    prob: float


class WhatIfIn(BaseModel):
    legs: list[LegIn]
    bankroll: str | float | int | None = None


class BacktestIn(BaseModel):
    combo: str
    params: ParamsIn = ParamsIn()
    initial_bankroll: str | float | int = "100.00"
    stream: bool = False


class LoadIn(BaseModel):
    paths: list[str]
    probabilities: str | None = None


class SessionIn(BaseModel):
    bankroll: str | float | int = "100.00"


class WagerIn(BaseModel):
    matchday: int
    legs: list[LegIn]
    amount: str | float | int


def _leg_json(leg: CandidateBet) -> dict:
    return {
        "league": leg.match.league,
        "matchday": leg.match.matchday,
        "home_team": leg.match.home_team,
        "away_team": leg.match.away_team,
        "outcome": leg.outcome.value,
        "bookmaker": leg.bookmaker.code,
        "odds": leg.odds,
        "prob": leg.prob,
    }


def _solver_params(params: ParamsIn, interactive: bool) -> SolverParams:
    max_time = params.max_time
    if interactive:
        max_time = min(max_time, INTERACTIVE_TIME_CAP)
    try:
        return SolverParams(
            p_min=params.p_min,
            min_exp=params.min_exp,
            max_time=max_time,
            population=params.population,
            seed=params.seed,
            max_legs=params.max_legs,
            filter_mode=FilterMode(params.filter),
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from None


def _legs_to_accumulator(legs: list[LegIn]) -> Accumulator:
    """Build the submitted accumulator; 422 carries any constraint breach."""
    violations = []
    candidates = []
    for leg in legs:
        try:
            candidates.append(
                CandidateBet(
                    match=MatchRef(leg.league, leg.matchday, leg.home_team, leg.away_team),
                    bookmaker=BookmakerRef(leg.bookmaker),
                    outcome=Outcome.from_code(leg.outcome),
                    odds=leg.odds,
                    prob=leg.prob,
                )
            )
        except ValueError as exc:
            violations.append(
                {
                    "constraint": "invalid-leg",
                    "message": str(exc),
                    "legs": [f"{leg.home_team} v {leg.away_team} ({leg.outcome})"],
                }
            )
    if violations:
        raise HTTPException(status_code=422, detail={"violations": violations})
    bookmaker = candidates[0].bookmaker if candidates else BookmakerRef("?")
    acc = Accumulator(bookmaker=bookmaker, legs=tuple(candidates))
    found = validate_accumulator(acc)
    if found:
        raise HTTPException(
            status_code=422,
            detail={
                "violations": [
                    {
                        "constraint": v.constraint,
                        "message": v.message,
                        "legs": [leg.label() for leg in v.legs],
                    }
                    for v in found
                ]
            },
        )
    return acc


def create_app(pools: list[MatchdayPool] | None = None) -> FastAPI:
    app = FastAPI(title="accabet", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.dataset = Dataset(pools) if pools else None
    app.state.sessions = {}

    def dataset() -> Dataset:
        if app.state.dataset is None:
            raise HTTPException(status_code=409, detail="no dataset loaded")
        return app.state.dataset

    @app.get("/")
    def root() -> dict:
        loaded = app.state.dataset is not None
        return {
            "name": "accabet",
            "dataset_loaded": loaded,
            "matchdays": len(app.state.dataset.pools) if loaded else 0,
        }

    @app.post("/load")
    def load(body: LoadIn) -> dict:
        paths: list[str] = []
        for pattern in body.paths:
            matched = sorted(glob.glob(pattern))
            if not matched:
                raise HTTPException(status_code=400, detail=f"no files match: {pattern}")
            paths.extend(matched)
        estimator = None
        try:
            if body.probabilities:
                estimator = ExternalProbabilities.from_csv(body.probabilities)
            pools_loaded = load_season(paths, estimator=estimator)
        except (OSError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        if not pools_loaded:
            raise HTTPException(status_code=400, detail="season files produced no pools")
        app.state.dataset = Dataset(pools_loaded)
        return {
            "matchdays": len(pools_loaded),
            "fixtures": sum(len(p.results) for p in pools_loaded),
            "candidates": sum(len(p.candidates) for p in pools_loaded),
        }

    @app.get("/matchdays")
    def matchdays() -> list[dict]:
        data = dataset()
        out = []
        for pool in data.pools:
            kept_intra, _ = data.filtered(pool.matchday, FilterMode.INTRA)
            kept_inter, _ = data.filtered(pool.matchday, FilterMode.INTER)
            out.append(
                {
                    "matchday": pool.matchday,
                    "fixtures": len(pool.results),
                    "candidates": len(pool.candidates),
                    "kept_intra": len(kept_intra),
                    "kept_inter": len(kept_inter),
                }
            )
        return out

    @app.get("/matchdays/{day}/candidates")
    def matchday_candidates(
        day: int, filter: Literal["none", "intra", "inter"] = "intra"
    ) -> dict:
        data = dataset()
        if day not in data.by_day:
            raise HTTPException(status_code=404, detail=f"unknown matchday: {day}")
        mode = FilterMode(filter)
        kept, report = data.filtered(day, mode)
        kept_set = set(kept)
        dominators = {c: d for c, d in report.eliminated}
        pool = data.by_day[day]
        candidates = []
        for c in pool.candidates:
            row = _leg_json(c)
            row["kept"] = c in kept_set
            witness = dominators.get(c)
            row["dominated_by"] = _leg_json(witness) if witness is not None else None
            candidates.append(row)
        results = [
            {
                "league": m.league,
                "matchday": m.matchday,
                "home_team": m.home_team,
                "away_team": m.away_team,
                "result": pool.results[m].value,
            }
            for m in sorted(pool.results, key=lambda m: (m.league, m.home_team))
        ]
        return {
            "matchday": day,
            "filter": mode.value,
            "candidates": candidates,
            "results": results,
        }

    @app.post("/recommend")
    def recommend(body: RecommendIn) -> dict:
        data = dataset()
        if body.matchday not in data.by_day:
            raise HTTPException(status_code=404, detail=f"unknown matchday: {body.matchday}")
        params = _solver_params(body.params, interactive=True)
        pool = data.by_day[body.matchday]
        outcome = sds_search(efficient_pools(pool.candidates, params.filter_mode), params)
        if outcome.reason is not SearchReason.MET_THRESHOLD:
            return {"no_bet": outcome.reason.value, "iterations": outcome.iterations}
        acc, totals = outcome.best
        return {
            "accumulator": {
                "bookmaker": acc.bookmaker.code,
                "legs": [_leg_json(leg) for leg in acc.legs],
            },
            "totals": {"odds": totals.odds, "prob": totals.prob, "exp": totals.exp},
            "kelly_fraction": kelly_fraction(totals.prob, totals.odds),
            "variance_adjusted": variance_adjusted_stake(totals.prob, totals.odds),
        }

    @app.post("/whatif")
    def whatif(body: WhatIfIn) -> dict:
        acc = _legs_to_accumulator(body.legs)
        totals = accumulator_totals(acc)
        pairs = [(leg.odds, leg.prob) for leg in acc.legs]
        kelly = kelly_fraction(totals.prob, totals.odds)
        va = variance_adjusted_stake(totals.prob, totals.odds)
        moments = accumulator_moments(pairs)
        split = split_singles_moments(pairs)
        response = {
            "totals": {"odds": totals.odds, "prob": totals.prob, "exp": totals.exp},
            "kelly_fraction": kelly,
            "variance_adjusted": va,
            "moments": {
                "expected_return": moments.expected_return,
                "variance": moments.variance,
            },
            "split_moments": {
                "expected_return": split.expected_return,
                "variance": split.variance,
            },
            "stakes": None,
        }
        if body.bankroll is not None:
            bankroll = _parse_money(body.bankroll, "bankroll")
            if bankroll <= 0:
                raise HTTPException(status_code=400, detail="bankroll must be positive")
            response["stakes"] = {
                "kelly": {
                    "fraction": kelly,
                    "amount": _money(bankroll * Decimal(repr(kelly))),
                },
                "variance_adjusted": {
                    "fraction": va,
                    "amount": _money(bankroll * Decimal(repr(va))),
                },
            }
        return response

    @app.post("/backtest")
    def backtest(body: BacktestIn):
        data = dataset()
        try:
            combo = parse_combo(body.combo)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        params = _solver_params(body.params, interactive=False)
        bankroll = _parse_money(body.initial_bankroll, "initial_bankroll")
        if bankroll <= 0:
            raise HTTPException(status_code=400, detail="initial_bankroll must be positive")
        initial = float(bankroll)

        def entry_json(entry: LedgerEntry) -> dict:
            return {
                "matchday": entry.matchday,
                "wagers": [
                    {
                        "label": w.label(),
                        "fraction": w.fraction,
                        "amount": _money(Decimal(repr(w.amount))),
                        "odds": w.odds,
                        "prob": w.prob,
                        "won": w.won,
                        "net_gain": _money(Decimal(repr(w.net_gain))),
                    }
                    for w in entry.wagers
                ],
                "net_gain": _money(Decimal(repr(entry.net_gain))),
                "bankroll": _money(Decimal(repr(entry.bankroll_after))),
                "staking_base": _money(Decimal(repr(entry.staking_base_after))),
            }

        if body.stream:

            def events() -> Iterator[str]:
                ledger = []
                for entry in iter_season(data.pools, combo, params, initial):
                    ledger.append(entry)
                    yield json.dumps({"event": "matchday", **entry_json(entry)}) + "\n"
                summary = summarize(ledger, initial)
                yield json.dumps(
                    {"event": "summary", **_summary_json(summary)}
                ) + "\n"

            return StreamingResponse(events(), media_type="application/x-ndjson")

        ledger = list(iter_season(data.pools, combo, params, initial))
        summary = summarize(ledger, initial)
        return {
            "summary": _summary_json(summary),
            "ledger": [entry_json(entry) for entry in ledger],
            "cumulative": [
                {"matchday": day, "gain": gain}
                for day, gain in cumulative_gains(ledger, initial)
            ],
        }

    @app.post("/sessions")
    def create_session(body: SessionIn) -> dict:
        bankroll = _parse_money(body.bankroll, "bankroll")
        if bankroll <= 0:
            raise HTTPException(status_code=400, detail="bankroll must be positive")
        token = secrets.token_hex(8)
        app.state.sessions[token] = Session(bankroll=bankroll, staking_base=bankroll)
        return _session_json(token, app.state.sessions[token])

    @app.get("/sessions/{token}")
    def get_session(token: str) -> dict:
        session = app.state.sessions.get(token)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return _session_json(token, session)

    @app.post("/sessions/{token}/wagers")
    def record_wager(token: str, body: WagerIn) -> dict:
        session = app.state.sessions.get(token)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        data = dataset()
        if body.matchday not in data.by_day:
            raise HTTPException(status_code=404, detail=f"unknown matchday: {body.matchday}")
        acc = _legs_to_accumulator(body.legs)
        amount = _parse_money(body.amount, "amount")
        if amount < 0:
            raise HTTPException(status_code=400, detail="amount cannot be negative")
        results = data.by_day[body.matchday].results
        with session.lock:
            if amount > session.bankroll:
                raise HTTPException(
                    status_code=400,
                    detail=f"amount {_money(amount)} exceeds bankroll "
                    f"{_money(session.bankroll)}",
                )
            try:
                gain = settle(acc, results, float(amount))
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None
            totals = accumulator_totals(acc)
            if amount == 0:
                net = Decimal("0.00")
            elif gain > 0:
                net = (amount * (Decimal(repr(totals.odds)) - 1)).quantize(
                    CENTS, rounding=ROUND_HALF_EVEN
                )
            else:
                net = -amount
            session.bankroll += net
            session.staking_base = min(session.staking_base, session.bankroll)
            session.entries.append(
                {
                    "matchday": body.matchday,
                    "legs": [_leg_json(leg) for leg in acc.legs],
                    "odds": totals.odds,
                    "prob": totals.prob,
                    "amount": _money(amount),
                    "won": bool(amount > 0 and gain > 0),
                    "net_gain": _money(net),
                    "bankroll": _money(session.bankroll),
                    "staking_base": _money(session.staking_base),
                }
            )
            return _session_json(token, session)

    return app


def _summary_json(summary) -> dict:
    return {
        "matchdays": summary.matchdays,
        "matchdays_with_bets": summary.matchdays_with_bets,
        "bet_count": summary.bet_count,
        "winning_bet_count": summary.winning_bet_count,
        "average_odds": summary.average_odds,
        "average_probability": summary.average_probability,
        "average_stakes_per_matchday": summary.average_stakes_per_matchday,
        "average_stake_per_bet": summary.average_stake_per_bet,
        "total_gains": summary.total_gains,
    }


def _session_json(token: str, session: Session) -> dict:
    return {
        "token": token,
        "bankroll": _money(session.bankroll),
        "staking_base": _money(session.staking_base),
        "entries": list(session.entries),
    }
