"""Shared test helpers: quick constructors and synthetic season CSVs."""

from __future__ import annotations

import datetime as dt
import random

from accabet.domain import BookmakerRef, CandidateBet, MatchRef, Outcome

BOOKMAKERS = ("B365", "BW", "GB", "IW", "LB")


def make_match(league="E0", day=1, home="Alpha", away="Beta") -> MatchRef:
    return MatchRef(league, day, home, away)


def make_candidate(
    league="E0",
    day=1,
    home="Alpha",
    away="Beta",
    bookmaker="B365",
    outcome=Outcome.HOME,
    odds=2.0,
    prob=0.5,
) -> CandidateBet:
    return CandidateBet(
        match=MatchRef(league, day, home, away),
        bookmaker=BookmakerRef(bookmaker),
        outcome=Outcome(outcome),
        odds=odds,
        prob=prob,
    )


def _single_round_robin(n: int) -> list[list[tuple[int, int]]]:
    """Circle-method schedule for an even team count."""
    teams = list(range(n))
    rounds = []
    for r in range(n - 1):
        pairs = []
        for i in range(n // 2):
            a, b = teams[i], teams[n - 1 - i]
            pairs.append((a, b) if (r + i) % 2 == 0 else (b, a))
        rounds.append(pairs)
        teams = [teams[0]] + teams[-1:] + teams[1:-1]
    return rounds


def double_round_robin(n: int) -> list[list[tuple[int, int]]]:
    first = _single_round_robin(n)
    return first + [[(b, a) for a, b in rnd] for rnd in first]


def season_csv(
    league: str = "E0",
    teams: int = 6,
    seed: int = 7,
    dispersion: float = 0.25,
    start: dt.date = dt.date(2015, 8, 8),
) -> str:
    """Deterministic season in the public results-archive CSV layout.

    True outcome probabilities drive both the sampled result and the odds;
    each bookmaker quotes fair odds shaded by a margin and an independent
    relative error of up to +-dispersion, so consensus probabilities are
    close to truth while single bookmakers can be off either way.
    """
    rng = random.Random(f"{league}-{seed}")
    names = [f"{league} Team {i:02d}" for i in range(teams)]
    header = ["Div", "Date", "HomeTeam", "AwayTeam", "FTHG", "FTAG", "FTR"]
    for code in BOOKMAKERS:
        header += [f"{code}H", f"{code}D", f"{code}A"]
    lines = [",".join(header)]
    for round_index, pairs in enumerate(double_round_robin(teams)):
        date = start + dt.timedelta(days=7 * round_index)
        for home, away in pairs:
            p_home = rng.uniform(0.25, 0.62)
            p_away = rng.uniform(0.12, min(0.5, 0.88 - p_home))
            p_draw = 1.0 - p_home - p_away
            probs = (p_home, p_draw, p_away)
            roll = rng.random()
            if roll < p_home:
                result, goals = "H", (2, 0)
            elif roll < p_home + p_draw:
                result, goals = "D", (1, 1)
            else:
                result, goals = "A", (0, 2)
            margin = rng.uniform(1.03, 1.07)
            row = [
                league,
                date.strftime("%d/%m/%y"),
                names[home],
                names[away],
                str(goals[0]),
                str(goals[1]),
                result,
            ]
            for _ in BOOKMAKERS:
                for p in probs:
                    fair = 1.0 / (p * margin)
                    quoted = max(1.02, fair * (1.0 + rng.uniform(-dispersion, dispersion)))
                    row.append(f"{quoted:.2f}")
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"
