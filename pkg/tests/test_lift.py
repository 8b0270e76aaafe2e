"""Lambda lifting: hoisting, capture, call rewriting, semantics."""

import random

import pytest

from skelc.interp import evaluate
from skelc.lift import lambda_lift
from skelc.parser import parse_program
from skelc.pretty import print_program, rename_generated
from skelc.syntax import FunDefBlock, IntVal, PVar, int_list_value, values_equal, walk


def no_blocks(p):
    for d in p.defs:
        for c in d.clauses:
            assert not any(isinstance(n, FunDefBlock) for n in walk(c.body))
    if p.main is not None:
        assert not any(isinstance(n, FunDefBlock) for n in walk(p.main))


def test_plain_hoist_keeps_name():
    p = parse_program(
        """
f xs = g xs
    where { g [] = 0 ; g (x:xs) = 1 + (g xs) }

main xs = f xs
"""
    )
    q = lambda_lift(p)
    no_blocks(q)
    assert [d.name for d in q.defs] == ["f", "g"]
    assert q.def_named("g").arity == 1  # no captures to add


def test_captured_variables_become_leading_params():
    p = parse_program(
        """
scale k xs = go xs
    where { go [] = [] ; go (y:ys) = (k * y) : (go ys) }

main k xs = scale k xs
"""
    )
    q = lambda_lift(p)
    go = q.def_named("go")
    assert go.arity == 2
    assert go.clauses[0].patterns[0] == PVar("k")  # captured, leading
    r = evaluate(q, [IntVal(3), int_list_value([1, 2])])
    assert values_equal(r, evaluate(p, [IntVal(3), int_list_value([1, 2])]))


def test_sibling_blocks_get_distinct_names():
    p = parse_program(
        """
a xs = g xs
    where { g [] = 1 ; g (x:xs) = x }

b xs = g xs
    where { g [] = 2 ; g (x:xs) = x + 1 }

main xs = (a xs) + (b xs)
"""
    )
    q = lambda_lift(p)
    names = [d.name for d in q.defs]
    assert len(names) == len(set(names)) == 4
    assert evaluate(q, [int_list_value([])]) == IntVal(3)


def test_mutual_recursion_closes_capture_sets():
    # even's body never mentions k, but it calls odd which does
    p = parse_program(
        """
par k xs = even xs
    where { even [] = k ;
            even (x:xs) = odd xs ;
            odd [] = 0 + (0 * k) ;
            odd (x:xs) = even xs }

main k xs = par k xs
"""
    )
    q = lambda_lift(p)
    no_blocks(q)
    ev = next(d for d in q.defs if d.name.startswith("even"))
    assert ev.arity == 2
    for n in (0, 1, 2, 3, 4):
        got = evaluate(q, [IntVal(7), int_list_value(list(range(n)))])
        want = evaluate(p, [IntVal(7), int_list_value(list(range(n)))])
        assert values_equal(got, want), n


def test_local_function_used_as_a_value():
    p = parse_program(
        """
f k xs = foldr comb 0 xs
    where { comb x acc = (k * x) + acc }

main k xs = f k xs
"""
    )
    q = lambda_lift(p)
    no_blocks(q)
    got = evaluate(q, [IntVal(2), int_list_value([1, 2, 3])])
    assert got == IntVal(12)


def test_nested_blocks_two_deep():
    p = parse_program(
        """
f a xs = outer xs
    where { outer ys = inner ys
        where { inner [] = a ; inner (z:zs) = z + (inner zs) } }

main a xs = f a xs
"""
    )
    q = lambda_lift(p)
    no_blocks(q)
    got = evaluate(q, [IntVal(100), int_list_value([1, 2, 3])])
    assert got == IntVal(106)


def test_local_named_like_prelude_is_renamed():
    p = parse_program(
        """
f xs = map xs
    where { map [] = 0 ; map (x:xs) = 1 }

main xs = f xs
"""
    )
    q = lambda_lift(p)
    assert all(d.name != "map" for d in q.defs)
    assert evaluate(q, [int_list_value([5])]) == IntVal(1)


def test_lifted_output_reparses():
    p = parse_program(
        """
f k xs = go xs
    where { go [] = k ; go (x:xs) = x + (go xs) }

main k xs = f k xs
"""
    )
    q = lambda_lift(p)
    src = print_program(rename_generated(q))
    r = parse_program(src)
    got = evaluate(r, [IntVal(4), int_list_value([1, 2])])
    assert got == IntVal(7)


def test_lift_random_semantics_preserved():
    rng = random.Random(20240817)
    p = parse_program(
        """
stats k xs = (total xs) : (count xs) : (scaled xs)
    where { total [] = 0 ;
            total (x:xs) = x + (total xs) ;
            count [] = 0 ;
            count (x:xs) = 1 + (count xs) ;
            scaled [] = [] ;
            scaled (x:xs) = (k * x) : (scaled xs) }

main k xs = stats k xs
"""
    )
    q = lambda_lift(p)
    no_blocks(q)
    for _ in range(60):
        k = rng.randrange(-5, 6)
        xs = [rng.randrange(-20, 21) for _ in range(rng.randrange(0, 10))]
        a = evaluate(p, [IntVal(k), int_list_value(xs)])
        b = evaluate(q, [IntVal(k), int_list_value(xs)])
        assert values_equal(a, b), (k, xs)


def test_lift_is_idempotent_once_flat():
    p = parse_program(
        """
f xs = g xs
    where { g [] = 0 ; g (x:xs) = x }

main xs = f xs
"""
    )
    q = lambda_lift(p)
    r = lambda_lift(q)
    assert [d.name for d in r.defs] == [d.name for d in q.defs]
