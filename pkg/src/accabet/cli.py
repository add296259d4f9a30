"""Command line interface: recommend, backtest, filter-stats, oracle, serve.

Exit codes: 0 on success, 3 when a recommendation legitimately finds no
bet, 2 on any error (bad arguments, missing files, data gaps, oversized
oracle instances).
"""

from __future__ import annotations

import argparse
import glob
import json
import logging
import math
import random
import sys
from typing import Sequence

from .backtest import (
    ALL_COMBOS,
    cumulative_gains,
    parse_combo,
    run_season,
    summarize,
)
from .dominance import FilterMode, apply_filter, efficient_pools, split_by_bookmaker
from .domain import BookmakerRef, CandidateBet, MatchRef, Outcome, accumulator_totals
from .ingest import ExternalProbabilities, MatchdayPool, load_season
from .solver import (
    OracleLimitError,
    SearchReason,
    SolverParams,
    enumerate_oracle,
    sds_search,
)
from .staking import kelly_fraction, variance_adjusted_stake

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_NO_BET = 3

ORACLE_CANDIDATE_LIMIT = 24


class CliError(Exception):
    """Fatal command error; the message goes to stderr, the code is 2."""


def _add_season_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--season",
        action="append",
        metavar="GLOB",
        help="season CSV files (glob, repeatable)",
    )
    parser.add_argument(
        "--probabilities",
        metavar="CSV",
        help="external probabilities CSV (League,Date,HomeTeam,AwayTeam,PH,PD,PA)",
    )


def _add_solver_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--pmin", type=float, default=0.25, help="probability floor")
    parser.add_argument("--min-exp", type=float, default=2.0, help="expected-return threshold")
    parser.add_argument("--max-time", type=float, default=600.0, help="search budget in seconds")
    parser.add_argument("--agents", type=int, default=50, help="agents per population")
    parser.add_argument("--seed", type=int, default=0, help="RNG seed")
    parser.add_argument("--max-legs", type=int, default=None, help="cap on legs per accumulator")


def _add_output_options(parser: argparse.ArgumentParser, default: str = "table") -> None:
    parser.add_argument(
        "--format", choices=("table", "csv", "json"), default=default, help="output format"
    )
    parser.add_argument("--out", metavar="PATH", help="write the report to a file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="accabet",
        description="Accumulator bet selection and season backtesting",
    )
    parser.add_argument("--verbose", action="store_true", help="log ingest warnings and info")
    parser.add_argument(
        "--serve",
        metavar="ADDR",
        help="start the HTTP service on host:port (shortcut for the serve command)",
    )
    _add_season_options(parser)

    commands = parser.add_subparsers(dest="command")

    recommend = commands.add_parser("recommend", help="pick one accumulator for a matchday")
    _add_season_options(recommend)
    _add_solver_options(recommend)
    _add_output_options(recommend)
    recommend.add_argument("--matchday", type=int, required=True)
    recommend.add_argument(
        "--filter",
        choices=tuple(m.value for m in FilterMode),
        default="intra",
        help="dominance preprocessing mode",
    )

    backtest = commands.add_parser("backtest", help="replay a season per strategy combo")
    _add_season_options(backtest)
    _add_solver_options(backtest)
    _add_output_options(backtest)
    backtest.add_argument(
        "--combo",
        action="append",
        choices=("acc-kelly", "acc-va", "singles-kelly", "singles-va"),
        help="strategy combo (repeatable; default: all four)",
    )
    backtest.add_argument(
        "--filter",
        action="append",
        choices=tuple(m.value for m in FilterMode),
        help="dominance mode (repeatable; default: intra)",
    )
    backtest.add_argument("--bankroll", type=float, default=100.0)
    backtest.add_argument(
        "--threads",
        type=int,
        default=1,
        help="run strategy rows concurrently (timing-sensitive runs may lose reproducibility)",
    )

    stats = commands.add_parser("filter-stats", help="dominance reduction per matchday")
    _add_season_options(stats)
    _add_output_options(stats, default="csv")
    stats.add_argument(
        "--filter",
        action="append",
        choices=tuple(m.value for m in FilterMode),
        help="mode to report (repeatable; default: intra and inter)",
    )

    oracle = commands.add_parser(
        "oracle", help="compare the search against exhaustive enumeration"
    )
    _add_season_options(oracle)
    _add_solver_options(oracle)
    _add_output_options(oracle)
    oracle.add_argument("--matchday", type=int, help="build the instance from this matchday")
    oracle.add_argument("--bookmaker", help="bookmaker code for the data-built instance")
    oracle.add_argument(
        "--synthetic",
        type=int,
        metavar="N",
        help="use a random N-candidate instance instead of season data",
    )
    oracle.add_argument("--seeds", type=int, default=100, help="number of seeded runs")
    oracle.add_argument(
        "--force", action="store_true", help="enumerate past the candidate-count guard"
    )

    serve = commands.add_parser("serve", help="start the HTTP service")
    _add_season_options(serve)
    serve.add_argument("--addr", default="127.0.0.1:8000", help="host:port to bind")

    return parser


def _load_pools(args: argparse.Namespace) -> list[MatchdayPool]:
    patterns = args.season or []
    if not patterns:
        raise CliError("no season files given; pass --season GLOB")
    paths: list[str] = []
    for pattern in patterns:
        matched = sorted(glob.glob(pattern))
        if not matched:
            raise CliError(f"no season files match: {pattern}")
        paths.extend(matched)
    estimator = None
    if args.probabilities:
        try:
            estimator = ExternalProbabilities.from_csv(args.probabilities)
        except OSError as exc:
            raise CliError(f"cannot read probabilities: {exc}") from exc
    try:
        pools = load_season(paths, estimator=estimator)
    except (OSError, ValueError) as exc:
        raise CliError(str(exc)) from exc
    if not pools:
        raise CliError("season files produced no matchday pools")
    return pools


def _params(args: argparse.Namespace, filter_mode: FilterMode) -> SolverParams:
    try:
        return SolverParams(
            p_min=args.pmin,
            min_exp=args.min_exp,
            max_time=args.max_time,
            population=args.agents,
            seed=args.seed,
            max_legs=args.max_legs,
            filter_mode=filter_mode,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _render_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip(),
        "  ".join("-" * widths[i] for i in range(len(headers))),
    ]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def _render_csv(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = [",".join(headers)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def _pct(x: float | None, digits: int = 2) -> str:
    return "-" if x is None else f"{x * 100:.{digits}f}%"


def cmd_recommend(args: argparse.Namespace) -> int:
    pools = _load_pools(args)
    by_day = {pool.matchday: pool for pool in pools}
    if args.matchday not in by_day:
        raise CliError(f"matchday {args.matchday} not present (have 1..{max(by_day)})")
    mode = FilterMode(args.filter)
    params = _params(args, mode)
    pool = by_day[args.matchday]
    outcome = sds_search(efficient_pools(pool.candidates, mode), params)

    if outcome.reason is not SearchReason.MET_THRESHOLD:
        sys.stdout.write("no bet: TimedOut\n")
        return EXIT_NO_BET

    acc, totals = outcome.best
    kelly = kelly_fraction(totals.prob, totals.odds)
    va = variance_adjusted_stake(totals.prob, totals.odds)
    if args.format == "json":
        payload = {
            "bookmaker": acc.bookmaker.code,
            "legs": [_leg_dict(leg) for leg in acc.legs],
            "totals": {"odds": totals.odds, "prob": totals.prob, "exp": totals.exp},
            "kelly_fraction": kelly,
            "variance_adjusted": va,
        }
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
        return EXIT_OK
    headers = ("league", "matchday", "home", "away", "outcome", "odds", "prob")
    rows = [
        (
            leg.match.league,
            str(leg.match.matchday),
            leg.match.home_team,
            leg.match.away_team,
            leg.outcome.value,
            f"{leg.odds:.2f}",
            f"{leg.prob:.4f}",
        )
        for leg in acc.legs
    ]
    if args.format == "csv":
        body = _render_csv(headers, rows)
    else:
        body = _render_table(headers, rows)
        body += (
            f"\nbookmaker {acc.bookmaker.code}"
            f"  odds {totals.odds:.2f}  prob {totals.prob:.4f}  exp {totals.exp:.4f}\n"
            f"kelly {kelly:.4f}  variance-adjusted {va:.4f}\n"
        )
    _emit(body, args.out)
    return EXIT_OK


def _leg_dict(leg: CandidateBet) -> dict:
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


def _check_gaps(pools: Sequence[MatchdayPool]) -> None:
    days = {pool.matchday for pool in pools}
    missing = sorted(set(range(1, max(days) + 1)) - days)
    if missing:
        listed = ", ".join(str(d) for d in missing)
        raise CliError(f"season has gaps: missing matchdays {listed}")


def cmd_backtest(args: argparse.Namespace) -> int:
    pools = _load_pools(args)
    _check_gaps(pools)
    combos = [parse_combo(label) for label in (args.combo or list(_all_combo_labels()))]
    modes = [FilterMode(v) for v in (args.filter or ["intra"])]
    jobs = [(combo, mode) for combo in combos for mode in modes]

    def run_one(combo, mode):
        params = _params(args, mode)
        ledger = run_season(pools, combo, params, initial_bankroll=args.bankroll)
        return combo, mode, ledger, summarize(ledger, args.bankroll)

    if args.threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=args.threads) as executor:
            results = list(executor.map(lambda job: run_one(*job), jobs))
    else:
        results = [run_one(combo, mode) for combo, mode in jobs]

    headers = (
        "model",
        "preprocessing",
        "avg odds",
        "avg prob",
        "avg stake/matchday",
        "avg stake/bet",
        "total gains",
        "wins",
    )
    rows = []
    for combo, mode, _, summary in results:
        rows.append(
            (
                combo.label,
                mode.value,
                "-" if summary.average_odds is None else f"{summary.average_odds:.2f}",
                _pct(summary.average_probability, 2),
                _pct(summary.average_stakes_per_matchday, 2),
                _pct(summary.average_stake_per_bet, 2),
                _pct(summary.total_gains, 1),
                str(summary.winning_bet_count),
            )
        )
    if args.format == "json":
        payload = [
            {
                "model": combo.label,
                "preprocessing": mode.value,
                "average_odds": summary.average_odds,
                "average_probability": summary.average_probability,
                "average_stakes_per_matchday": summary.average_stakes_per_matchday,
                "average_stake_per_bet": summary.average_stake_per_bet,
                "total_gains": summary.total_gains,
                "winning_bet_count": summary.winning_bet_count,
                "bet_count": summary.bet_count,
            }
            for combo, mode, _, summary in results
        ]
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    elif args.format == "csv":
        text = _render_csv(headers, rows)
    else:
        text = _render_table(headers, rows)

    if args.out:
        series = {
            f"{combo.label}@{mode.value}": dict(cumulative_gains(ledger, args.bankroll))
            for combo, mode, ledger, _ in results
        }
        days = sorted({day for gains in series.values() for day in gains})
        lines = ["matchday," + ",".join(sorted(series))]
        for day in days:
            cells = [f"{series[label].get(day, '')!s}" for label in sorted(series)]
            lines.append(f"{day}," + ",".join(cells))
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write("\n".join(lines) + "\n")
    sys.stdout.write(text)
    return EXIT_OK


def _all_combo_labels() -> list[str]:
    return [combo.label for combo in ALL_COMBOS]


def cmd_filter_stats(args: argparse.Namespace) -> int:
    pools = _load_pools(args)
    modes = [FilterMode(v) for v in (args.filter or ["intra", "inter"])]
    headers = (
        "matchday",
        "mode",
        "input_count",
        "kept_count",
        "reduction_pct",
        "incremental_pct",
    )
    rows: list[tuple[str, ...]] = []
    sums: dict[FilterMode, list[float]] = {mode: [] for mode in modes}
    increments: dict[FilterMode, list[float]] = {mode: [] for mode in modes}
    for pool in pools:
        intra_kept_count: int | None = None
        if FilterMode.INTER in modes:
            intra_kept, _ = apply_filter(pool.candidates, FilterMode.INTRA)
            intra_kept_count = len(intra_kept)
        for mode in modes:
            kept, report = apply_filter(pool.candidates, mode)
            if mode is FilterMode.INTER and intra_kept_count:
                incremental = 1.0 - len(kept) / intra_kept_count
            elif mode is FilterMode.NONE:
                incremental = 0.0
            else:
                incremental = report.reduction
            sums[mode].append(report.reduction)
            increments[mode].append(incremental)
            rows.append(
                (
                    str(pool.matchday),
                    mode.value,
                    str(report.input_count),
                    str(report.kept_count),
                    f"{report.reduction * 100:.2f}",
                    f"{incremental * 100:.2f}",
                )
            )
    for mode in modes:
        if sums[mode]:
            avg = math.fsum(sums[mode]) / len(sums[mode])
            avg_inc = math.fsum(increments[mode]) / len(increments[mode])
            rows.append(
                ("season-avg", mode.value, "", "", f"{avg * 100:.2f}", f"{avg_inc * 100:.2f}")
            )
    if args.format == "json":
        payload = [dict(zip(headers, row)) for row in rows]
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    elif args.format == "table":
        text = _render_table(headers, rows)
    else:
        text = _render_csv(headers, rows)
    _emit(text, args.out)
    return EXIT_OK


def _synthetic_instance(n_candidates: int, seed: int) -> list[CandidateBet]:
    """Random single-bookmaker instance: n candidates over ceil(n/3) matches."""
    rng = random.Random(f"oracle-instance-{seed}")
    bookmaker = BookmakerRef("B365")
    candidates: list[CandidateBet] = []
    n_matches = (n_candidates + 2) // 3
    for m in range(n_matches):
        match = MatchRef("SYN", 1, f"Home{m:02d}", f"Away{m:02d}")
        main = rng.uniform(0.55, 0.78)
        second = (1.0 - main) * rng.uniform(0.35, 0.65)
        third = 1.0 - main - second
        probs = [main, second, third]
        rng.shuffle(probs)
        for outcome, p in zip(Outcome, probs):
            if len(candidates) == n_candidates:
                break
            odds = (1.0 / p) * (1.0 + rng.uniform(0.0, 0.25))
            candidates.append(
                CandidateBet(match=match, bookmaker=bookmaker, outcome=outcome,
                             odds=odds, prob=p)
            )
    return candidates


def cmd_oracle(args: argparse.Namespace) -> int:
    if args.synthetic is not None:
        if args.synthetic < 1:
            raise CliError("--synthetic needs at least 1 candidate")
        candidates = _synthetic_instance(args.synthetic, args.seed)
    else:
        if not args.season or args.matchday is None:
            raise CliError("pass either --synthetic N or --season GLOB with --matchday")
        pools = _load_pools(args)
        by_day = {pool.matchday: pool for pool in pools}
        if args.matchday not in by_day:
            raise CliError(f"matchday {args.matchday} not present")
        groups = split_by_bookmaker(
            apply_filter(by_day[args.matchday].candidates, FilterMode.INTRA)[0]
        )
        if args.bookmaker:
            wanted = BookmakerRef(args.bookmaker)
            if wanted not in groups:
                raise CliError(f"bookmaker {args.bookmaker} has no candidates")
            candidates = groups[wanted]
        else:
            candidates = groups[sorted(groups, key=lambda b: b.code)[0]]

    if len(candidates) > ORACLE_CANDIDATE_LIMIT and not args.force:
        raise CliError(
            f"instance has {len(candidates)} candidates "
            f"(limit {ORACLE_CANDIDATE_LIMIT}); pass --force to enumerate anyway"
        )

    params = _params(args, FilterMode.NONE)
    try:
        best, _ = enumerate_oracle(candidates, params.p_min)
    except OracleLimitError as exc:
        raise CliError(str(exc)) from exc
    if best is None:
        raise CliError(f"no feasible accumulator reaches p_min={params.p_min}")
    optimum = best[1]

    pool = {candidates[0].bookmaker: candidates}
    headers = ("seed", "reason", "best_exp", "gap_pct")
    rows = []
    hits = 0
    within = 0
    for seed in range(args.seeds):
        run_params = SolverParams(
            p_min=params.p_min,
            min_exp=optimum.exp,
            max_time=params.max_time,
            population=params.population,
            seed=seed,
            max_legs=params.max_legs,
            filter_mode=FilterMode.NONE,
        )
        best_seen = 0.0

        def watch(hypothesis) -> None:
            nonlocal best_seen
            totals = accumulator_totals(hypothesis)
            if totals.prob >= run_params.p_min and totals.exp > best_seen:
                best_seen = totals.exp

        outcome = sds_search(pool, run_params, audit=watch)
        if outcome.reason is SearchReason.MET_THRESHOLD:
            hits += 1
            best_seen = max(best_seen, outcome.best[1].exp)
        gap = (optimum.exp - best_seen) / optimum.exp
        if gap <= 0.05:
            within += 1
        rows.append(
            (str(seed), outcome.reason.value, f"{best_seen:.6f}", f"{max(gap, 0.0) * 100:.2f}")
        )

    summary = (
        f"instance: {len(candidates)} candidates, oracle optimum exp {optimum.exp:.6f} "
        f"(odds {optimum.odds:.2f}, prob {optimum.prob:.4f})\n"
        f"runs: {args.seeds}, met threshold: {hits}, within 5%: {within}\n"
    )
    if args.format == "json":
        payload = {
            "candidates": len(candidates),
            "optimum": {"odds": optimum.odds, "prob": optimum.prob, "exp": optimum.exp},
            "runs": [dict(zip(headers, row)) for row in rows],
            "met_threshold": hits,
            "within_5pct": within,
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    elif args.format == "csv":
        text = _render_csv(headers, rows)
    else:
        text = _render_table(headers, rows) + summary
    _emit(text, args.out)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    pools = None
    if args.season:
        pools = _load_pools(args)
    addr = getattr(args, "addr", None) or args.serve
    host, _, port_text = addr.rpartition(":")
    if not host or not port_text.isdigit():
        raise CliError(f"invalid address {addr!r}; expected host:port")
    app = create_app(pools)
    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.ERROR,
        format="%(levelname)s %(name)s: %(message)s",
    )
    dispatch = {
        "recommend": cmd_recommend,
        "backtest": cmd_backtest,
        "filter-stats": cmd_filter_stats,
        "oracle": cmd_oracle,
        "serve": cmd_serve,
    }
    try:
        if args.command is None:
            if args.serve:
                return cmd_serve(args)
            parser.print_help()
            return EXIT_ERROR
        return dispatch[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
