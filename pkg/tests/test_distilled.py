"""Distilled-shape validation."""

from skelc.distilled import validate_distilled
from skelc.parser import parse_program


def test_distilled_program_passes():
    # matched positions receive plain variables everywhere
    p = parse_program(
        """
f [] ys v = 0
f (x:xs) ys v = x + (f xs ys v)

g zs = let v = \\q. q in f zs zs v

main zs = g zs
"""
    )
    rep = validate_distilled(p)
    assert rep.ok, rep.format()
    assert rep.format() == "distilled shape: ok"


def test_composed_argument_at_matched_position_fails():
    p = parse_program(
        """
suml [] = 0
suml (x:xs) = x + (suml xs)

rev [] = []
rev (x:xs) = (rev xs) ++ (x : [])

main xs = suml (rev xs)
"""
    )
    rep = validate_distilled(p)
    assert not rep.ok
    assert any("not a variable" in v.message for v in rep.violations)
    assert rep.violations[0].where == "main"


def test_let_bound_variable_matched_downstream_fails():
    p = parse_program(
        """
suml [] = 0
suml (x:xs) = x + (suml xs)

main xs = let ys = xs in suml ys
"""
    )
    rep = validate_distilled(p)
    assert not rep.ok
    assert any("let-bound ys" in v.message for v in rep.violations)


def test_let_bound_variable_at_unmatched_position_is_fine():
    p = parse_program(
        """
f (x:xs) v = v x
f [] v = 0

main xs = let v = \\q. q + 1 in f xs v
"""
    )
    assert validate_distilled(p).ok


def test_local_definitions_are_resolved():
    p = parse_program(
        """
f xs = g xs
    where { g [] = 0 ; g (y:ys) = y }

main xs = f xs
"""
    )
    assert validate_distilled(p).ok

    q = parse_program(
        """
f xs = g (xs ++ xs)
    where { g [] = 0 ; g (y:ys) = y }

main xs = f xs
"""
    )
    rep = validate_distilled(q)
    assert not rep.ok and rep.violations[0].where == "f"


def test_prelude_matched_positions_are_known():
    # map matches its first input, so a computed list there is flagged
    p = parse_program("main xs = map (xs ++ xs) (\\x. x)")
    rep = validate_distilled(p)
    assert not rep.ok
    assert "call to map" in rep.violations[0].message


def test_unknown_heads_are_unconstrained():
    p = parse_program("main xs f = farm f (f xs)")
    assert validate_distilled(p).ok
