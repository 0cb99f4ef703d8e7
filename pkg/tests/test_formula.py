import random

import pytest
from hypothesis import given, strategies as st

from helpers import exhaustive_solutions, formula_and_partial, formulas, random_formula
from ucsp.formula import (
    Conflict,
    Formula,
    ParseError,
    apply_assignment,
    bit,
    coloring_formula,
    parse_instance,
    parse_instance_with_solution,
    serialize_instance,
    values_of,
)
from ucsp.generate import generate_unique

TRIANGLE = [(1, 2), (2, 3), (1, 3)]


def test_parse_single_binary_nogood():
    f = parse_instance(b"p ucsp 2 3\nc 1 1 2 1\n")
    assert (f.n, f.k) == (2, 3)
    assert f.nogoods == {(1, 1, 2, 1)}
    assert f.domains == {1: 0b111, 2: 0b111}


def test_parse_unary_shrinks_domain():
    f = parse_instance("p ucsp 1 5\nu 1 2\n")
    assert f.domain(1) == [1, 3, 4, 5]


def test_parse_skips_comments_and_blank_lines():
    f = parse_instance("# corpus file\n\np ucsp 2 2\n# edge\nc 2 1 1 2\n")
    assert f.nogoods == {(1, 2, 2, 1)}


@pytest.mark.parametrize(
    "text, lineno",
    [
        ("c 1 1 2 1\n", 1),
        ("p ucsp 2 2\np ucsp 2 2\n", 2),
        ("p ucsp 2 2\nc 1 1 3 1\n", 2),
        ("p ucsp 2 2\nc 1 1 2 9\n", 2),
        ("p ucsp 2 2\n\nu 0 1\n", 3),
        ("p ucsp 2 x\n", 1),
        ("p csp 2 2\n", 1),
        ("p ucsp 2 2\nz 1 1\n", 2),
        ("p ucsp 2 2\nc 1 1 2\n", 2),
        ("p ucsp 2 2\ns 1\n", 2),
        ("p ucsp 2 99\n", 1),
    ],
)
def test_parse_errors_carry_line_numbers(text, lineno):
    with pytest.raises(ParseError) as exc:
        parse_instance(text)
    assert exc.value.lineno == lineno
    assert f"line {lineno}" in str(exc.value)


def test_missing_header_is_an_error():
    with pytest.raises(ParseError):
        parse_instance("# nothing here\n")


def test_solution_line_round_trips():
    text = b"p ucsp 3 2\nc 1 1 2 1\ns 2 1 2\n"
    f, sol = parse_instance_with_solution(text)
    assert sol == {1: 2, 2: 1, 3: 2}
    assert serialize_instance(f, sol) == text


def test_empty_formula_serializes_to_header():
    assert serialize_instance(Formula.build(0, 3)) == b"p ucsp 0 3\n"


def test_triangle_two_coloring_nogoods():
    f = coloring_formula(3, TRIANGLE, 2)
    # one nogood per (edge, colour); the set has no duplicates to reach twelve
    assert len(f.nogoods) == 6
    assert {(x, y) for x, _, y, _ in f.nogoods} == set(TRIANGLE)


def test_same_variable_pairs_normalize():
    f = Formula.build(2, 3, [(1, 2, 1, 2), (1, 1, 1, 3), (2, 1, 1, 3)])
    assert f.domain(1) == [1, 3]
    assert f.nogoods == {(1, 3, 2, 1)}


def test_nogood_on_removed_value_is_dropped():
    f = Formula.build(2, 2, [(1, 1, 2, 1)], unary=[(1, 1)])
    assert not f.nogoods


def test_k_bound_enforced():
    with pytest.raises(ValueError):
        Formula.build(1, 65)


def test_generated_corpus_round_trips():
    rng = random.Random(3)
    for i in range(100):
        n = rng.randint(1, 9)
        k = rng.randint(2, 5)
        mode = "random" if n > 1 else "distinct"
        inst = generate_unique(n, k, mode, rng)
        text = serialize_instance(inst.formula, inst.planted)
        f, sol = parse_instance_with_solution(text)
        assert f == inst.formula and sol == inst.planted
        assert serialize_instance(f, sol) == text


@given(formulas(max_n=6, max_k=5, max_nogoods=20))
def test_serialize_parse_identity(f):
    assert parse_instance(serialize_instance(f)) == f


@given(formulas())
def test_canonicalization_is_idempotent(f):
    g = Formula.build(f.n, f.k, f.nogoods, f.unary_nogoods)
    assert g == f
    assert all(x < y for x, _, y, _ in f.nogoods)


def test_apply_empty_is_identity(rng):
    f = random_formula(rng, 5, 3)
    assert apply_assignment(f, {}) == f


def test_apply_turns_matching_nogood_into_unary():
    f = Formula.build(2, 3, [(1, 1, 2, 2)])
    r = apply_assignment(f, {1: 1})
    assert r.variables == [2]
    assert r.domain(2) == [1, 3]
    assert not r.nogoods


def test_apply_drops_nogood_on_other_value():
    f = Formula.build(2, 3, [(1, 1, 2, 2)])
    r = apply_assignment(f, {1: 3})
    assert r.domain(2) == [1, 2, 3] and not r.nogoods


def test_apply_signals_conflict():
    f = Formula.build(2, 2, [(1, 1, 2, 1), (1, 1, 2, 2)])
    with pytest.raises(Conflict):
        apply_assignment(f, {1: 1})
    with pytest.raises(Conflict):
        apply_assignment(Formula.build(2, 2, [(1, 1, 2, 1)]), {1: 1, 2: 1})


def test_apply_rejects_out_of_domain_values():
    f = Formula.build(1, 3, unary=[(1, 2)])
    with pytest.raises(ValueError):
        apply_assignment(f, {1: 2})


@given(formula_and_partial(max_n=5, max_k=3), st.data())
def test_apply_is_compositional(fa, data):
    f, a = fa
    keys = list(a)
    cut = data.draw(st.integers(0, len(keys)))
    first = {x: a[x] for x in keys[:cut]}
    second = {x: a[x] for x in keys[cut:]}
    try:
        whole = apply_assignment(f, a)
    except Conflict:
        whole = None
    try:
        mid = apply_assignment(f, first)
        # a value pruned by the first stage is a conflict of the whole
        if any(not mid.domains[x] & bit(v) for x, v in second.items()):
            raise Conflict("pruned")
        staged = apply_assignment(mid, second)
    except Conflict:
        staged = None
    assert whole == staged


def test_residual_satisfiability_matches_brute_force():
    rng = random.Random(11)
    checked = 0
    for _ in range(300):
        n = rng.randint(1, 8)
        f = random_formula(rng, n, rng.randint(2, 3), density=rng.uniform(0.05, 0.35))
        xs = rng.sample(f.variables, rng.randint(0, n))
        a = {x: rng.choice(values_of(f.domains[x])) for x in xs if f.domains[x]}
        extendable = any(all(s[x] == v for x, v in a.items()) for s in exhaustive_solutions(f))
        try:
            residual_sat = next(exhaustive_solutions(apply_assignment(f, a)), None) is not None
        except Conflict:
            residual_sat = False
        assert residual_sat == extendable
        checked += 1
    assert checked == 300


@given(formulas(max_n=5, max_k=3), st.data())
def test_direct_scan_agrees_with_full_application(f, data):
    a = {x: data.draw(st.integers(1, f.k)) for x in f.variables}
    in_domain = all(f.domains[x] & bit(v) for x, v in a.items())
    if in_domain:
        try:
            residual = apply_assignment(f, a)
            via_apply = not residual.domains and not residual.nogoods
        except Conflict:
            via_apply = False
    else:
        via_apply = False
    assert f.satisfied_by(a) == via_apply


def test_compact_renumbers_live_variables():
    f = Formula.build(4, 2, [(2, 1, 4, 1)])
    r = apply_assignment(f, {1: 1, 3: 2})
    with pytest.raises(ValueError):
        serialize_instance(r)
    g, ren = r.compact()
    assert ren == {2: 1, 4: 2}
    assert g.nogoods == {(1, 1, 2, 1)}
