"""Season data loading: results CSVs, matchday inference, probability estimates.

The expected input layout is the public football results archive format:
one CSV per league and season with columns Div, Date, HomeTeam, AwayTeam,
FTHG, FTAG, FTR and per-bookmaker odds columns such as B365H, B365D,
B365A. Unknown columns are ignored. Dates appear as dd/mm/yy or
dd/mm/yyyy.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import logging
import os
from dataclasses import dataclass, field
from typing import IO, Callable, Iterable, Mapping, Sequence

from .domain import (
    BookmakerRef,
    CandidateBet,
    MatchRef,
    Outcome,
    OUTCOME_ORDER,
    candidate_sort_key,
)

logger = logging.getLogger(__name__)

# Bookmakers whose odds columns are recognized, by column prefix.
BOOKMAKER_CODES = ("B365", "BW", "GB", "IW", "LB")

REQUIRED_COLUMNS = ("Div", "Date", "HomeTeam", "AwayTeam", "FTR")

_DATE_FORMATS = ("%d/%m/%y", "%d/%m/%Y")


@dataclass(frozen=True)
class FixtureRecord:
    """One completed match with its closing odds at each known bookmaker."""

    league: str
    date: dt.date
    home_team: str
    away_team: str
    full_time_result: Outcome
    odds_by_bookmaker: Mapping[BookmakerRef, tuple[float, float, float]]

    def __post_init__(self) -> None:
        if not self.odds_by_bookmaker:
            raise ValueError("fixture carries no complete odds triple")


@dataclass(frozen=True)
class ProbabilityTriple:
    """Outcome probabilities for one fixture, summing to one."""

    p_home: float
    p_draw: float
    p_away: float

    def __post_init__(self) -> None:
        for p in (self.p_home, self.p_draw, self.p_away):
            if not 0.0 < p < 1.0:
                raise ValueError(f"probability must lie in (0, 1), got {p}")
        total = self.p_home + self.p_draw + self.p_away
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities must sum to 1, got {total}")

    def for_outcome(self, outcome: Outcome) -> float:
        return {
            Outcome.HOME: self.p_home,
            Outcome.DRAW: self.p_draw,
            Outcome.AWAY: self.p_away,
        }[outcome]


def _parse_date(text: str) -> dt.date:
    for fmt in _DATE_FORMATS:
        try:
            return dt.datetime.strptime(text.strip(), fmt).date()
        except ValueError:
            continue
    raise ValueError(f"unparseable date: {text!r}")


def _open_source(source: str | os.PathLike | bytes | IO) -> IO[str]:
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8-sig", errors="replace"))
    if isinstance(source, (str, os.PathLike)):
        return open(source, newline="", encoding="utf-8-sig", errors="replace")
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8-sig", errors="replace")
        return io.StringIO(data)
    raise TypeError(f"unsupported CSV source: {type(source)!r}")


def parse_season_csv(
    source: str | os.PathLike | bytes | IO, league: str | None = None
) -> list[FixtureRecord]:
    """Parse one season file into fixture records.

    Rows missing a full-time result are rejected; a bookmaker's odds triple
    is dropped when any of its three cells is blank, unparseable, or at most
    1.0; rows retaining no complete triple are rejected. All rejections are
    logged as warnings. A missing mandatory header column is fatal.
    """
    stream = _open_source(source)
    try:
        reader = csv.DictReader(stream)
        header = reader.fieldnames or []
        for column in REQUIRED_COLUMNS:
            if column not in header:
                raise ValueError(f"missing required column: {column}")
        fixtures: list[FixtureRecord] = []
        for line_no, row in enumerate(reader, start=2):
            record = _parse_row(row, line_no, league)
            if record is not None:
                fixtures.append(record)
        return fixtures
    finally:
        stream.close()


def _parse_row(row: dict, line_no: int, league: str | None) -> FixtureRecord | None:
    home = (row.get("HomeTeam") or "").strip()
    away = (row.get("AwayTeam") or "").strip()
    if not home and not away:
        return None  # trailing blank line
    div = (row.get("Div") or "").strip()
    where = f"line {line_no} ({home} v {away})"
    result_code = (row.get("FTR") or "").strip()
    if result_code not in ("H", "D", "A"):
        logger.warning("%s: missing or unknown full-time result, row skipped", where)
        return None
    try:
        date = _parse_date(row.get("Date") or "")
    except ValueError as exc:
        logger.warning("%s: %s, row skipped", where, exc)
        return None

    odds: dict[BookmakerRef, tuple[float, float, float]] = {}
    for code in BOOKMAKER_CODES:
        cells = [row.get(code + suffix) for suffix in ("H", "D", "A")]
        if any(cell is None or not str(cell).strip() for cell in cells):
            continue
        try:
            triple = tuple(float(cell) for cell in cells)
        except ValueError:
            logger.warning("%s: unparseable %s odds, bookmaker dropped", where, code)
            continue
        if any(o <= 1.0 for o in triple):
            logger.warning("%s: %s quotes odds <= 1.0, bookmaker dropped", where, code)
            continue
        odds[BookmakerRef(code)] = triple  # type: ignore[assignment]
    if not odds:
        logger.warning("%s: no complete odds triple, row skipped", where)
        return None
    return FixtureRecord(
        league=league or div,
        date=date,
        home_team=home,
        away_team=away,
        full_time_result=Outcome(result_code),
        odds_by_bookmaker=odds,
    )


def infer_matchdays(fixtures: Sequence[FixtureRecord]) -> dict[MatchRef, int]:
    """Assign a matchday to every fixture from the calendar alone.

    Within each league, fixtures are replayed in date order with a round
    counter per team. A fixture lands on the round after the higher of its
    two teams' counters, and both counters catch up to it, so a postponed
    match cannot drag later rounds backwards.
    """
    by_league: dict[str, list[tuple[dt.date, int, FixtureRecord]]] = {}
    for index, f in enumerate(fixtures):
        by_league.setdefault(f.league, []).append((f.date, index, f))

    assignment: dict[MatchRef, int] = {}
    for league in sorted(by_league):
        rounds: dict[str, int] = {}
        seen_dates: set[tuple[str, dt.date]] = set()
        for date, _, f in sorted(by_league[league], key=lambda item: (item[0], item[1])):
            for team in (f.home_team, f.away_team):
                if (team, date) in seen_dates:
                    raise ValueError(
                        f"duplicate fixture: {team} appears twice on {date.isoformat()}"
                    )
                seen_dates.add((team, date))
            day = max(rounds.get(f.home_team, 0), rounds.get(f.away_team, 0)) + 1
            rounds[f.home_team] = day
            rounds[f.away_team] = day
            ref = MatchRef(league, day, f.home_team, f.away_team)
            assignment[ref] = day
    return assignment


Estimator = Callable[[FixtureRecord], "ProbabilityTriple | None"]


def inverse_odds_probabilities(fixture: FixtureRecord) -> ProbabilityTriple:
    """Default estimator: normalized inverse odds, averaged over bookmakers.

    Each bookmaker's inverse odds are normalized first (removing that
    bookmaker's margin), then averaged, so scaling one bookmaker's prices
    cannot shift the estimate.
    """
    columns = [0.0, 0.0, 0.0]
    for triple in fixture.odds_by_bookmaker.values():
        inverse = [1.0 / o for o in triple]
        total = sum(inverse)
        for k in range(3):
            columns[k] += inverse[k] / total
    n = len(fixture.odds_by_bookmaker)
    p = [q / n for q in columns]
    total = sum(p)
    return ProbabilityTriple(p[0] / total, p[1] / total, p[2] / total)


class ExternalProbabilities:
    """Estimator backed by a CSV of per-fixture probabilities.

    Expected columns: League, Date, HomeTeam, AwayTeam, PH, PD, PA. Triples
    are renormalized on load; fixtures without a row are excluded from
    candidate generation with a warning.
    """

    def __init__(self, table: Mapping[tuple[str, dt.date, str, str], ProbabilityTriple]):
        self._table = dict(table)

    @classmethod
    def from_csv(cls, source: str | os.PathLike | bytes | IO) -> "ExternalProbabilities":
        stream = _open_source(source)
        table: dict[tuple[str, dt.date, str, str], ProbabilityTriple] = {}
        try:
            reader = csv.DictReader(stream)
            header = reader.fieldnames or []
            for column in ("League", "Date", "HomeTeam", "AwayTeam", "PH", "PD", "PA"):
                if column not in header:
                    raise ValueError(f"missing required column: {column}")
            for line_no, row in enumerate(reader, start=2):
                home = (row.get("HomeTeam") or "").strip()
                away = (row.get("AwayTeam") or "").strip()
                if not home and not away:
                    continue
                try:
                    date = _parse_date(row.get("Date") or "")
                    raw = [float(row[c]) for c in ("PH", "PD", "PA")]
                    total = sum(raw)
                    if total <= 0.0 or any(p <= 0.0 for p in raw):
                        raise ValueError("probabilities must be positive")
                    triple = ProbabilityTriple(*(p / total for p in raw))
                except ValueError as exc:
                    logger.warning("probabilities line %d: %s, row skipped", line_no, exc)
                    continue
                key = ((row.get("League") or "").strip(), date, home, away)
                table[key] = triple
        finally:
            stream.close()
        return cls(table)

    def __call__(self, fixture: FixtureRecord) -> ProbabilityTriple | None:
        key = (fixture.league, fixture.date, fixture.home_team, fixture.away_team)
        triple = self._table.get(key)
        if triple is None:
            logger.warning(
                "no external probabilities for %s v %s on %s, fixture excluded",
                fixture.home_team,
                fixture.away_team,
                fixture.date.isoformat(),
            )
        return triple


def estimate_probabilities(
    fixture: FixtureRecord, estimator: Estimator | None = None
) -> ProbabilityTriple | None:
    """Estimate outcome probabilities; None excludes the fixture."""
    if estimator is None:
        estimator = inverse_odds_probabilities
    return estimator(fixture)


@dataclass
class MatchdayPool:
    """Every candidate bet of one matchday plus the known results."""

    matchday: int
    candidates: list[CandidateBet]
    results: dict[MatchRef, Outcome] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for c in self.candidates:
            if c.match not in self.results:
                raise ValueError(f"candidate without result: {c.match.label()}")


def _fixture_key(f: FixtureRecord) -> tuple[str, str, str]:
    return (f.league, f.home_team, f.away_team)


def build_candidates(
    fixtures: Sequence[FixtureRecord],
    probabilities: Mapping[MatchRef, ProbabilityTriple],
    matchdays: Mapping[MatchRef, int],
) -> list[MatchdayPool]:
    """Expand fixtures into per-matchday candidate pools.

    Every (available bookmaker, outcome) pair of every fixture with a
    probability estimate becomes one candidate. Fixtures without an
    estimate are skipped; infer_matchdays provides the day assignment.
    """
    ref_by_fixture = {
        (m.league, m.home_team, m.away_team): m for m in matchdays
    }
    candidates_by_day: dict[int, list[CandidateBet]] = {}
    results_by_day: dict[int, dict[MatchRef, Outcome]] = {}
    for f in fixtures:
        ref = ref_by_fixture.get(_fixture_key(f))
        if ref is None:
            continue
        triple = probabilities.get(ref)
        if triple is None:
            continue
        day = matchdays[ref]
        results_by_day.setdefault(day, {})[ref] = f.full_time_result
        bucket = candidates_by_day.setdefault(day, [])
        for bookmaker in sorted(f.odds_by_bookmaker, key=lambda b: b.code):
            triple_odds = f.odds_by_bookmaker[bookmaker]
            for outcome in Outcome:
                bucket.append(
                    CandidateBet(
                        match=ref,
                        bookmaker=bookmaker,
                        outcome=outcome,
                        odds=triple_odds[OUTCOME_ORDER[outcome]],
                        prob=triple.for_outcome(outcome),
                    )
                )
    pools = []
    for day in sorted(candidates_by_day):
        pool = MatchdayPool(
            matchday=day,
            candidates=sorted(candidates_by_day[day], key=candidate_sort_key),
            results=results_by_day[day],
        )
        pools.append(pool)
    return pools


def load_season(
    sources: Iterable[str | os.PathLike | bytes | IO],
    league: str | None = None,
    estimator: Estimator | None = None,
) -> list[MatchdayPool]:
    """Parse, infer matchdays, estimate probabilities, and build pools."""
    fixtures: list[FixtureRecord] = []
    for source in sources:
        fixtures.extend(parse_season_csv(source, league=league))
    matchdays = infer_matchdays(fixtures)
    ref_by_fixture = {(m.league, m.home_team, m.away_team): m for m in matchdays}
    probabilities: dict[MatchRef, ProbabilityTriple] = {}
    for f in fixtures:
        ref = ref_by_fixture[_fixture_key(f)]
        triple = estimate_probabilities(f, estimator)
        if triple is not None:
            probabilities[ref] = triple
    return build_candidates(fixtures, probabilities, matchdays)
