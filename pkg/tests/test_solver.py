import itertools
import random

import pytest

from accabet.domain import (
    Accumulator,
    BookmakerRef,
    accumulator_totals,
    validate_accumulator,
)
from accabet.dominance import FilterMode
from accabet.solver import (
    Agent,
    AgentStatus,
    OracleLimitError,
    SearchReason,
    SolverParams,
    diffusion_phase,
    enumerate_oracle,
    neighborhood_move,
    relaxed_initialization,
    sds_search,
)
from accabet.solver import test_phase as agent_test_phase  # dodge pytest collection
from util import make_candidate


def agent_for(odds, prob, home="Alpha", away="Beta"):
    leg = make_candidate(home=home, away=away, odds=odds, prob=prob)
    acc = Accumulator(bookmaker=leg.bookmaker, legs=(leg,))
    return Agent(hypothesis=acc, totals=accumulator_totals(acc))


def grid(spec, bookmaker="B365"):
    """spec: per-match (odds_h, odds_d, odds_a, p_h, p_d, p_a)."""
    out = []
    for i, (oh, od, oa, ph, pd, pa) in enumerate(spec):
        for outcome, o, p in (("H", oh, ph), ("D", od, pd), ("A", oa, pa)):
            out.append(
                make_candidate(
                    home=f"H{i}",
                    away=f"A{i}",
                    bookmaker=bookmaker,
                    outcome=outcome,
                    odds=o,
                    prob=p,
                )
            )
    return out


FOUR_MATCH_SPEC = [
    (2.2, 3.6, 5.6, 0.50, 0.30, 0.20),
    (2.5, 3.7, 4.6, 0.45, 0.30, 0.25),
    (1.9, 4.4, 7.6, 0.60, 0.25, 0.15),
    (2.8, 3.4, 4.0, 0.40, 0.32, 0.28),
]


def test_params_validation():
    SolverParams(min_exp=0.0)  # a zero floor disables the return threshold
    with pytest.raises(ValueError, match="p_min"):
        SolverParams(p_min=0.0)
    with pytest.raises(ValueError, match="p_min"):
        SolverParams(p_min=1.0)
    with pytest.raises(ValueError, match="min_exp"):
        SolverParams(min_exp=-0.1)
    with pytest.raises(ValueError, match="max_time"):
        SolverParams(max_time=0.0)
    with pytest.raises(ValueError, match="population"):
        SolverParams(population=1)
    with pytest.raises(ValueError, match="max_legs"):
        SolverParams(max_legs=0)


# hand-worked knapsack: budget -ln(0.25), ratio order c2, c1, c3, c4,
# c4's remaining fraction 0.158 rounds away
def test_relaxed_initialization_greedy_fill():
    c1 = make_candidate(home="H1", away="A1", odds=2.0, prob=0.8)
    c2 = make_candidate(home="H2", away="A2", odds=1.5, prob=0.9)
    c3 = make_candidate(home="H3", away="A3", odds=3.0, prob=0.5)
    c4 = make_candidate(home="H4", away="A4", odds=10.0, prob=0.1)
    acc = relaxed_initialization([c1, c2, c3, c4], 0.25, random.Random(0))
    assert set(acc.legs) == {c1, c2, c3}


# last item's remaining fraction 0.868 rounds in, overshooting p_min
def test_relaxed_initialization_fractional_round_up():
    c1 = make_candidate(home="H1", away="A1", odds=3.0, prob=0.5)
    c2 = make_candidate(home="H2", away="A2", odds=2.9, prob=0.45)
    acc = relaxed_initialization([c1, c2], 0.25, random.Random(0))
    assert set(acc.legs) == {c1, c2}
    assert accumulator_totals(acc).prob < 0.25


def test_relaxed_initialization_conflict_keeps_highest_prob():
    home = make_candidate(home="H1", away="A1", outcome="H", odds=2.0, prob=0.8)
    draw = make_candidate(home="H1", away="A1", outcome="D", odds=1.9, prob=0.75)
    other = make_candidate(home="H2", away="A2", odds=2.0, prob=0.8)
    acc = relaxed_initialization([home, draw, other], 0.25, random.Random(0))
    assert set(acc.legs) == {home, other}


def test_relaxed_initialization_empty_rounding_falls_back_to_best_single():
    modest = make_candidate(home="H1", away="A1", odds=2.0, prob=0.5)
    better = make_candidate(home="H2", away="A2", odds=4.0, prob=0.3)
    acc = relaxed_initialization([modest, better], 0.9, random.Random(0))
    assert acc.legs == (better,)


def test_relaxed_initialization_max_legs_truncates_by_ratio():
    c1 = make_candidate(home="H1", away="A1", odds=2.0, prob=0.8)
    c2 = make_candidate(home="H2", away="A2", odds=1.5, prob=0.9)
    c3 = make_candidate(home="H3", away="A3", odds=3.0, prob=0.5)
    acc = relaxed_initialization([c1, c2, c3], 0.25, random.Random(0), max_legs=2)
    assert set(acc.legs) == {c1, c2}


def test_relaxed_initialization_deterministic_per_seed():
    pool = grid(FOUR_MATCH_SPEC)
    first = relaxed_initialization(pool, 0.25, random.Random(5))
    second = relaxed_initialization(pool, 0.25, random.Random(5))
    assert first == second


def test_relaxed_initialization_empty_pool():
    with pytest.raises(ValueError, match="no candidates"):
        relaxed_initialization([], 0.25, random.Random(0))


def test_neighborhood_move_switches_outcome_when_only_option():
    home = make_candidate(outcome="H", odds=2.0, prob=0.5)
    draw = make_candidate(outcome="D", odds=3.4, prob=0.3)
    acc = Accumulator(bookmaker=home.bookmaker, legs=(home,))
    moved = neighborhood_move(acc, [home, draw], random.Random(1))
    assert moved.legs == (draw,)


def test_neighborhood_move_no_eligible_replacement():
    home = make_candidate(outcome="H", odds=2.0, prob=0.5)
    acc = Accumulator(bookmaker=home.bookmaker, legs=(home,))
    assert neighborhood_move(acc, [home], random.Random(1)) == acc


def test_neighborhood_move_preserves_leg_count_and_validity():
    pool = grid(FOUR_MATCH_SPEC)
    rng = random.Random(11)
    acc = relaxed_initialization(pool, 0.25, rng)
    for _ in range(50):
        acc = neighborhood_move(acc, pool, rng)
        assert len(acc.legs) == len({leg.match for leg in acc.legs})
        assert validate_accumulator(acc) == []


# a two-agent population always compares against the other agent
def test_test_phase_dominated_agent_goes_inefficient():
    weak = agent_for(2.0, 0.4, home="H1", away="A1")
    strong = agent_for(2.5, 0.5, home="H2", away="A2")
    agent_test_phase([weak, strong], random.Random(0))
    assert weak.status is AgentStatus.INEFFICIENT
    assert strong.status is AgentStatus.ACTIVE


def test_test_phase_lower_exp_goes_inactive():
    # higher odds, lower prob: not dominated, but smaller expected return
    longshot = agent_for(3.0, 0.3, home="H1", away="A1")  # exp 0.9
    favourite = agent_for(2.0, 0.5, home="H2", away="A2")  # exp 1.0
    agent_test_phase([longshot, favourite], random.Random(0))
    assert longshot.status is AgentStatus.INACTIVE
    assert favourite.status is AgentStatus.ACTIVE


def test_test_phase_equal_totals_both_active():
    a = agent_for(2.0, 0.5, home="H1", away="A1")
    b = agent_for(2.0, 0.5, home="H2", away="A2")
    agent_test_phase([a, b], random.Random(0))
    assert a.status is AgentStatus.ACTIVE
    assert b.status is AgentStatus.ACTIVE


def test_diffusion_inefficient_agent_restarts():
    pool = grid(FOUR_MATCH_SPEC)
    loser = agent_for(2.0, 0.4, home="H0", away="A0")
    keeper = agent_for(2.5, 0.5, home="H1", away="A1")
    loser.status = AgentStatus.INEFFICIENT
    old_keeper = keeper.hypothesis
    diffusion_phase([loser, keeper], pool, random.Random(3))
    assert keeper.hypothesis == old_keeper
    assert len(loser.hypothesis.legs) == 3  # restart draws three distinct matches
    assert validate_accumulator(loser.hypothesis) == []
    assert loser.totals == accumulator_totals(loser.hypothesis)


def test_diffusion_inactive_agent_perturbs_active_peer():
    pool = grid(FOUR_MATCH_SPEC)
    rng = random.Random(9)
    follower = agent_for(2.0, 0.4, home="H0", away="A0")
    leader_acc = relaxed_initialization(pool, 0.25, rng)
    leader = Agent(hypothesis=leader_acc, totals=accumulator_totals(leader_acc))
    follower.status = AgentStatus.INACTIVE
    leader.status = AgentStatus.ACTIVE
    diffusion_phase([follower, leader], pool, rng)
    assert leader.hypothesis == leader_acc
    # the follower adopted the leader's hypothesis modulo one swapped leg
    assert len(follower.hypothesis.legs) == len(leader_acc.legs)
    assert len(set(follower.hypothesis.legs) & set(leader_acc.legs)) >= len(leader_acc.legs) - 1


def test_diffusion_inactive_pair_both_restart():
    pool = grid(FOUR_MATCH_SPEC)
    a = agent_for(2.0, 0.4, home="H0", away="A0")
    b = agent_for(2.1, 0.4, home="H1", away="A1")
    a.status = AgentStatus.INACTIVE
    b.status = AgentStatus.INACTIVE
    diffusion_phase([a, b], pool, random.Random(4))
    assert len(a.hypothesis.legs) == 3
    assert len(b.hypothesis.legs) == 3


def test_diffusion_audit_sees_every_assignment():
    pool = grid(FOUR_MATCH_SPEC)
    a = agent_for(2.0, 0.4, home="H0", away="A0")
    b = agent_for(2.1, 0.4, home="H1", away="A1")
    a.status = AgentStatus.INEFFICIENT
    b.status = AgentStatus.INACTIVE
    seen = []
    diffusion_phase([a, b], pool, random.Random(4), audit=seen.append)
    assert seen == [a.hypothesis, b.hypothesis]


def pools_of(candidates):
    groups = {}
    for c in candidates:
        groups.setdefault(c.bookmaker, []).append(c)
    return groups


def test_sds_meets_threshold_at_initialization():
    winner = make_candidate(odds=3.0, prob=0.8)  # exp 2.4 on its own
    outcome = sds_search(
        pools_of([winner]), SolverParams(min_exp=2.0, max_time=5.0, seed=1)
    )
    assert outcome.reason is SearchReason.MET_THRESHOLD
    assert outcome.iterations == 0
    acc, totals = outcome.best
    assert acc.legs == (winner,)
    assert totals.exp == pytest.approx(2.4, rel=1e-12)


def test_sds_empty_pools_time_out_immediately():
    for pools in ({}, {BookmakerRef("B365"): []}):
        outcome = sds_search(pools, SolverParams(max_time=1.0))
        assert outcome.best is None
        assert outcome.reason is SearchReason.TIMED_OUT
        assert outcome.iterations == 0


def test_sds_times_out_when_threshold_unreachable():
    pool = grid(FOUR_MATCH_SPEC)
    outcome = sds_search(
        pools_of(pool), SolverParams(min_exp=1e9, max_time=0.15, seed=2)
    )
    assert outcome.best is None
    assert outcome.reason is SearchReason.TIMED_OUT
    assert outcome.iterations > 0
    assert outcome.elapsed >= 0.15


def test_sds_finds_enumerated_optimum():
    # relaxation seeds the exact optimum here, so this hit happens at init
    pool = grid(FOUR_MATCH_SPEC)
    best, _ = enumerate_oracle(pool, p_min=0.25)
    assert best is not None
    params = SolverParams(p_min=0.25, min_exp=best[1].exp, max_time=30.0, seed=7)
    outcome = sds_search(pools_of(pool), params)
    assert outcome.reason is SearchReason.MET_THRESHOLD
    assert outcome.best[1].exp == best[1].exp
    assert outcome.best[0] == best[0]


def test_sds_finds_optimum_beyond_initialization():
    # at p_min 0.1 the relaxation lands short of the optimum, so the
    # population has to diffuse its way there
    pool = grid(FOUR_MATCH_SPEC)
    best, _ = enumerate_oracle(pool, p_min=0.1)
    init = relaxed_initialization(pool, 0.1, random.Random(7))
    assert accumulator_totals(init).exp < best[1].exp
    params = SolverParams(p_min=0.1, min_exp=best[1].exp, max_time=30.0, seed=7)
    outcome = sds_search(pools_of(pool), params)
    assert outcome.reason is SearchReason.MET_THRESHOLD
    assert outcome.best[0] == best[0]


def test_sds_deterministic_for_fixed_seed():
    pool = grid(FOUR_MATCH_SPEC)
    best, _ = enumerate_oracle(pool, p_min=0.1)
    params = SolverParams(p_min=0.1, min_exp=best[1].exp, max_time=30.0, seed=123)
    first = sds_search(pools_of(pool), params)
    second = sds_search(pools_of(pool), params)
    assert first.best == second.best
    assert first.iterations == second.iterations
    assert first.reason is second.reason


def test_sds_single_bookmaker_selection_across_pools():
    cheap = grid(FOUR_MATCH_SPEC, bookmaker="B365")
    rich = grid(
        [(oh * 1.15, od * 1.15, oa * 1.15, ph, pd, pa) for oh, od, oa, ph, pd, pa in FOUR_MATCH_SPEC],
        bookmaker="BW",
    )
    best_rich, _ = enumerate_oracle(rich, p_min=0.1)
    params = SolverParams(p_min=0.1, min_exp=best_rich[1].exp, max_time=30.0, seed=3)
    outcome = sds_search(pools_of(cheap + rich), params)
    assert outcome.reason is SearchReason.MET_THRESHOLD
    acc, totals = outcome.best
    assert acc.bookmaker.code == "BW"
    assert validate_accumulator(acc) == []
    assert totals.exp >= best_rich[1].exp


def test_sds_respects_max_legs():
    pool = grid(FOUR_MATCH_SPEC)
    best_single, _ = enumerate_oracle(pool, p_min=0.25, max_legs=1)
    params = SolverParams(
        p_min=0.25, min_exp=best_single[1].exp, max_time=30.0, seed=5, max_legs=1
    )
    outcome = sds_search(pools_of(pool), params)
    assert outcome.reason is SearchReason.MET_THRESHOLD
    assert len(outcome.best[0].legs) == 1


def test_sds_trace_round_robins_bookmakers():
    pool = grid(FOUR_MATCH_SPEC) + grid(FOUR_MATCH_SPEC, bookmaker="BW")
    traces = []
    outcome = sds_search(
        pools_of(pool),
        SolverParams(min_exp=1e9, max_time=0.2, seed=4),
        trace=traces.append,
    )
    assert outcome.iterations == len(traces)
    assert [t.iteration for t in traces] == list(range(1, len(traces) + 1))
    assert traces[0].bookmaker == "B365"
    assert traces[1].bookmaker == "BW"
    for t in traces:
        assert 0.0 <= t.active_fraction <= 1.0
        assert t.best_exp > 0.0


def test_sds_audit_covers_initialization():
    pool = grid(FOUR_MATCH_SPEC)
    seen = []
    params = SolverParams(min_exp=1e9, max_time=0.1, seed=6, population=10)
    sds_search(pools_of(pool), params, audit=seen.append)
    assert len(seen) >= 10  # all initial hypotheses audited, then every reassignment
    assert all(acc.legs for acc in seen)


def brute_oracle(candidates, p_min, max_legs=None):
    """Independent itertools enumeration of best and Pareto front."""
    groups = {}
    for c in candidates:
        groups.setdefault(c.match, []).append(c)
    options = [[None, *group] for group in groups.values()]
    entries = []
    for combo in itertools.product(*options):
        legs = tuple(c for c in combo if c is not None)
        if not legs or (max_legs is not None and len(legs) > max_legs):
            continue
        acc = Accumulator(bookmaker=legs[0].bookmaker, legs=legs)
        entries.append((acc, accumulator_totals(acc)))
    best_exp = max(
        (t.exp for _, t in entries if t.prob >= p_min), default=None
    )
    front = [
        (acc, t)
        for acc, t in entries
        if not any(
            o.odds >= t.odds and o.prob >= t.prob and (o.odds > t.odds or o.prob > t.prob)
            for _, o in entries
        )
    ]
    return best_exp, front


# hand-worked two-match instance, exp maximum ties broken toward the
# lexicographically earlier leg set
def test_oracle_hand_instance():
    a1 = make_candidate(home="H1", away="A1", outcome="H", odds=2.0, prob=0.5)
    a2 = make_candidate(home="H1", away="A1", outcome="D", odds=3.0, prob=0.3)
    b1 = make_candidate(home="H2", away="A2", outcome="H", odds=1.8, prob=0.6)
    b2 = make_candidate(home="H2", away="A2", outcome="D", odds=4.0, prob=0.25)
    best, front = enumerate_oracle([a1, a2, b1, b2], p_min=0.25)
    acc, totals = best
    assert set(acc.legs) == {a1, b1}
    assert totals.odds == pytest.approx(3.6, rel=1e-12)
    assert totals.prob == pytest.approx(0.30, rel=1e-12)
    assert totals.exp == pytest.approx(1.08, rel=1e-12)
    points = [(t.odds, t.prob) for _, t in front]
    expected = [
        (12.0, 0.075),
        (8.0, 0.125),
        (5.4, 0.18),
        (4.0, 0.25),
        (3.6, 0.30),
        (2.0, 0.5),
        (1.8, 0.6),
    ]
    assert len(points) == len(expected)
    for (odds, prob), (eo, ep) in zip(points, expected):
        assert odds == pytest.approx(eo, rel=1e-12)
        assert prob == pytest.approx(ep, rel=1e-12)


def test_oracle_unreachable_p_min_still_reports_front():
    pool = grid(FOUR_MATCH_SPEC[:2])
    best, front = enumerate_oracle(pool, p_min=0.999)
    assert best is None
    assert front


def test_oracle_matches_brute_force():
    rng = random.Random(77)
    for trial in range(12):
        spec = []
        for _ in range(rng.randint(2, 4)):
            ph = rng.uniform(0.3, 0.6)
            pd = rng.uniform(0.15, min(0.35, 0.9 - ph))
            pa = 1.0 - ph - pd
            margin = rng.uniform(0.9, 1.1)
            spec.append(
                (
                    margin / ph,
                    margin / pd,
                    margin / pa,
                    ph,
                    pd,
                    pa,
                )
            )
        pool = grid(spec)
        max_legs = rng.choice([None, 2])
        best, front = enumerate_oracle(pool, p_min=0.2, max_legs=max_legs)
        brute_best_exp, brute_front = brute_oracle(pool, 0.2, max_legs=max_legs)
        assert best is not None and brute_best_exp is not None
        assert best[1].exp == brute_best_exp
        if max_legs is None:
            assert {acc for acc, _ in front} == {acc for acc, _ in brute_front}


def test_oracle_guards():
    mixed = [
        make_candidate(bookmaker="B365"),
        make_candidate(home="G", away="D", bookmaker="BW"),
    ]
    with pytest.raises(ValueError, match="single bookmaker"):
        enumerate_oracle(mixed, p_min=0.25)
    with pytest.raises(ValueError, match="max_legs"):
        enumerate_oracle([make_candidate()], p_min=0.25, max_legs=13)
    wide = [
        make_candidate(home=f"H{i}", away=f"A{i}", odds=2.0, prob=0.5)
        for i in range(25)
    ]
    with pytest.raises(OracleLimitError, match="oracle limit exceeded"):
        enumerate_oracle(wide, p_min=0.25)
    assert enumerate_oracle([], p_min=0.25) == (None, [])


def test_oracle_max_legs_one_is_best_single():
    pool = grid(FOUR_MATCH_SPEC)
    best, _ = enumerate_oracle(pool, p_min=0.25, max_legs=1)
    exp_best = max(c.odds * c.prob for c in pool if c.prob >= 0.25)
    assert best[1].exp == pytest.approx(exp_best, rel=1e-12)
    assert len(best[0].legs) == 1
