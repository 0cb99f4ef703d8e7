import itertools
import math
import random
from fractions import Fraction

import pytest

from helpers import independent_check
from ucsp.analysis import optimize_t
from ucsp.be import extended_be
from ucsp.formula import Conflict, Formula, apply_assignment, bit, coloring_formula, popcount
from ucsp.generate import brute_force_solutions, generate_unique
from ucsp.hybrid import (
    HybridConfig,
    default_cutoff,
    expected_exponent,
    hybrid_iteration,
    restart_schedule,
    solve_hybrid,
)
from ucsp.implication import semantic_implies
from ucsp.ppsz import TimeDraw, ppsz_iteration, ppsz_truncated, prefix_size
from ucsp.work import Status


def test_schedule_constants():
    assert restart_schedule(0) == (6, 400)
    assert restart_schedule(10) == (66, 409600)
    assert restart_schedule(0.5) == (9, 566)
    with pytest.raises(ValueError):
        restart_schedule(-1)


@pytest.mark.parametrize("p_fast, slow", [(0.5, 12), (0.1, 40), (0.02, 300), (0.9, 5)])
def test_schedule_beats_two_point_workload(p_fast, slow):
    """Work 2^X with X = 0 (prob p_fast) or X = slow: the schedule wins 99% of the time."""
    rng = random.Random(int(p_fast * 1000) + slow)
    E = (1 - p_fast) * slow
    runs, cutoff = restart_schedule(E)
    trials = 2000
    wins = 0
    for _ in range(trials):
        wins += any(2 ** (0 if rng.random() < p_fast else slow) <= cutoff for _ in range(runs))
    assert wins / trials >= 0.99


def test_config_validation():
    with pytest.raises(ValueError):
        HybridConfig(t=1.2)
    with pytest.raises(ValueError):
        HybridConfig(t=0.5, restart_budget_exponent=-1)
    assert HybridConfig.for_k(5).t == 0.23
    assert HybridConfig.for_k(6).t == 0.35
    assert HybridConfig.for_k(7).t == 0.44
    assert default_cutoff(2) == 0.0
    # past k = 7 plain PPSZ wins, so the optimum sits at t = 1
    assert default_cutoff(8) == round(optimize_t(8)[0], 2) == 1.0


def test_full_cutoff_replays_ppsz():
    rng = random.Random(1)
    for _ in range(10):
        inst = generate_unique(7, 4, "random", rng)
        for seed in range(40):
            a, ok = ppsz_iteration(inst.formula, 1, random.Random(seed))
            res = hybrid_iteration(inst.formula, HybridConfig(t=1.0), random.Random(seed))
            assert (res.status is Status.SAT) == ok
            if ok:
                assert res.assignment == a


def test_zero_cutoff_matches_extended_be_rate():
    rng = random.Random(2)
    for _ in range(4):
        inst = generate_unique(6, 5, "random", rng)
        trials = 3000
        hy = sum(hybrid_iteration(inst.formula, HybridConfig(t=0.0), rng).found for _ in range(trials))
        be = sum(extended_be(inst.formula, rng).found for _ in range(trials))
        p = (hy + be) / (2 * trials)
        sigma = math.sqrt(2 * p * (1 - p) / trials)
        assert abs(hy - be) / trials <= 3 * sigma + 1e-12
        assert p == pytest.approx(0.8**6, abs=0.03)


def test_zero_cutoff_is_exact_on_small_domains():
    f = coloring_formula(3, [(1, 2), (2, 3), (1, 3)], 3)
    res = hybrid_iteration(f, HybridConfig(t=0.0), random.Random(0))
    assert res.status is Status.SAT and independent_check(f, res.assignment)
    odd = coloring_formula(3, [(1, 2), (2, 3), (1, 3)], 2)
    assert hybrid_iteration(odd, HybridConfig(t=0.0), random.Random(0)).status is Status.UNSAT


def _order_draw(order):
    return TimeDraw({x: (i + 1) / (len(order) + 1) for i, x in enumerate(order)})


def _formula_probability(trace):
    p = Fraction(1)
    for i, r in trace.r_counts.items():
        p /= Fraction(i) ** r
    for i, b in trace.b_counts.items():
        if i >= 5:
            p *= Fraction(4, i) ** b
    return p


def _enumerated_probability(f, order, m):
    """Exact success probability of one hybrid iteration for a fixed order.

    Prefix draws use the exhaustive implication oracle; the second phase
    enumerates every four-value subset of each wide eligible set.
    """

    def eligible(a, x):
        return [c for c in f.domain(x) if not semantic_implies(f, a, x, c, 1)]

    def leaf(a):
        try:
            residual = apply_assignment(f, a)
        except Conflict:
            return Fraction(0)
        sets = {x: eligible(a, x) for x in residual.variables}
        doms = {x: sum(bit(c) for c in v) for x, v in sets.items()}
        restricted = residual.replace(domains=doms)
        # sub-domains keep exactly the solutions that fit inside them
        sols = list(brute_force_solutions(restricted))
        if not sols:
            return Fraction(0)
        choices = [
            [sum(bit(c) for c in s) for s in itertools.combinations(v, 4)] if len(v) > 4 else [doms[x]]
            for x, v in sets.items()
        ]
        xs = list(sets)
        hits = total = 0
        for combo in itertools.product(*choices):
            total += 1
            hits += any(all(m & bit(s[x]) for x, m in zip(xs, combo)) for s in sols)
        return Fraction(hits, total)

    def rec(a, i):
        if i == m:
            return leaf(a)
        x = order[i]
        elig = eligible(a, x)
        if not elig:
            return Fraction(0)
        return sum(rec({**a, x: c}, i + 1) for c in elig) / len(elig)

    return rec({}, 0)


def test_trace_formula_matches_enumeration():
    rng = random.Random(3)
    exact_cases = bound_cases = 0
    for n, k in ((3, 5), (4, 6), (4, 5), (3, 6)):
        inst = generate_unique(n, k, "random", rng)
        f = inst.formula
        for order in itertools.permutations(f.variables):
            for t in (0.0, 0.25, 0.5):
                m = prefix_size(t, n)
                trace = ppsz_truncated(f, t, 1, times=_order_draw(order), planted=inst.planted)
                formula = _formula_probability(trace)
                enumerated = _enumerated_probability(f, list(order), m)
                if min(trace.b_counts, default=3) >= 3:
                    # propagation is idle, so down-sampling sees the eligible sets as is
                    assert enumerated == formula
                    exact_cases += 1
                else:
                    assert enumerated >= formula
                    bound_cases += 1
    assert exact_cases > 50


def test_trace_formula_matches_iteration_frequency():
    rng = random.Random(4)
    # want an order whose survivors keep >= 3 values and some need down-sampling
    while True:
        inst = generate_unique(4, 6, "random", rng)
        draw = _order_draw(rng.sample(inst.formula.variables, 4))
        trace = ppsz_truncated(inst.formula, 0.5, 1, times=draw, planted=inst.planted)
        if min(trace.b_counts) >= 3 and max(trace.b_counts) >= 5:
            break
    p = float(_formula_probability(trace))
    trials = 10_000
    wins = 0
    for _ in range(trials):
        res = hybrid_iteration(inst.formula, HybridConfig(t=0.5), rng, times=draw)
        wins += res.found
        assert not res.found or res.assignment == inst.planted
    assert abs(wins / trials - p) <= 3 * math.sqrt(p * (1 - p) / trials)


def test_single_forced_variable_first_iteration():
    f = Formula.build(1, 5, unary=[(1, c) for c in (1, 2, 3, 5)])
    res = solve_hybrid(f, HybridConfig.for_k(5), random.Random(0))
    assert res.status is Status.SAT and res.assignment == {1: 4} and res.iterations == 1


def test_mix_and_plain_agree_on_unique_instances():
    rng = random.Random(5)
    for _ in range(20):
        inst = generate_unique(rng.randint(3, 10), 5, "random", rng)
        plain = solve_hybrid(inst.formula, HybridConfig.for_k(5), random.Random(1))
        mixed = solve_hybrid(inst.formula, HybridConfig.for_k(5, mix=True), random.Random(1))
        assert plain.assignment == mixed.assignment == inst.planted


def test_jobs_do_not_change_the_answer():
    rng = random.Random(6)
    inst = generate_unique(9, 6, "random", rng)
    cfg = HybridConfig.for_k(6, mix=True)
    one = solve_hybrid(inst.formula, cfg, random.Random(9), jobs=1)
    two = solve_hybrid(inst.formula, cfg, random.Random(9), jobs=2)
    assert (one.status, one.assignment, one.iterations, one.work) == (
        two.status,
        two.assignment,
        two.iterations,
        two.work,
    )


def test_budget_bounds_the_work_on_unsat_input():
    f = coloring_formula(4, [(1, 2), (2, 3), (1, 3), (3, 4)], 2)
    cfg = HybridConfig(t=0.5, restart_budget_exponent=0)
    res = solve_hybrid(f, cfg, random.Random(0))
    assert res.status is Status.NOT_FOUND
    runs, cutoff = restart_schedule(0)
    assert res.iterations <= runs * cutoff


def test_expected_exponent_grows_with_n():
    small = generate_unique(4, 5, "random", random.Random(7)).formula
    large = generate_unique(9, 5, "random", random.Random(7)).formula
    cfg = HybridConfig.for_k(5)
    assert 0 < expected_exponent(small, cfg) < expected_exponent(large, cfg)


def test_six_value_instances_solved_within_schedule():
    rng = random.Random(8)
    cfg = HybridConfig(t=0.35, k=6)
    solved = 0
    total = 200
    for i in range(total):
        inst = generate_unique(6 + i % 7, 6, "random", rng)
        res = solve_hybrid(inst.formula, cfg, rng)
        if res.found:
            assert res.assignment == inst.planted
            assert independent_check(inst.formula, res.assignment)
            solved += 1
    assert solved >= 0.99 * total


def test_refutation_without_guesses_is_unsat():
    # both variables are forced onto the one forbidden pair
    f = Formula.build(2, 3, [(1, 1, 2, 1)], domains={1: bit(1), 2: bit(1)})
    res = solve_hybrid(f, HybridConfig(t=0.5), random.Random(0))
    assert res.status is Status.UNSAT and res.iterations == 1
