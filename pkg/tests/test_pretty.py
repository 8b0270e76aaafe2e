"""Printing: round trips, sugar, generated-name cleanup."""

import random

from skelc.parser import parse_program
from skelc.pretty import print_expr, print_program, rename_generated
from skelc.syntax import ConApp, IntLit, Var

SAMPLE = """
data BTree a ::= E | B a (BTree a) (BTree a)

dotp :: [a] -> [a] -> Int
dotp xs ys = foldr (+) 0 (zipWith (*) xs ys)

transpose [] = []
transpose (xs:xss) = f xs
    where { f [] = [] ; f (y:ys) = (y : []) : (f ys) }

main xs ys = dotp xs ys
"""


def test_print_parse_print_is_stable():
    p1 = parse_program(SAMPLE)
    s1 = print_program(rename_generated(p1))
    p2 = parse_program(s1)
    s2 = print_program(rename_generated(p2))
    assert s1 == s2


def test_printed_program_reparses():
    p = parse_program(SAMPLE)
    q = parse_program(print_program(rename_generated(p)))
    assert [d.name for d in q.defs] == [d.name for d in p.defs]
    assert q.signatures.keys() == p.signatures.keys()


def test_list_literal_sugar():
    e = ConApp(
        "Cons", (IntLit(1), ConApp("Cons", (IntLit(2), ConApp("Nil", ()))))
    )
    assert print_expr(e) == "[1, 2]"


def test_open_tail_prints_as_cons():
    e = ConApp("Cons", (IntLit(1), Var("rest")))
    assert print_expr(e) == "1 : rest"


def test_precedence_round_trip():
    rng = random.Random(99)
    atoms = ["1", "2", "x", "y"]
    ops = [" + ", " * ", " : ", " ++ "]
    for _ in range(120):
        n = rng.randrange(2, 6)
        src = atoms[0]
        for _ in range(n):
            src = src + rng.choice(ops) + rng.choice(atoms)
        p1 = parse_program(f"main x y rest = {src}")
        s1 = print_program(p1)
        p2 = parse_program(s1)
        assert p2.main == p1.main, src


def test_pragma_preserved():
    p = parse_program("-- %skeletonized\nmain w = mapReduce1 w (+) (\\x. x)")
    s = print_program(rename_generated(p))
    assert s.splitlines()[0].strip() == "-- %skeletonized"
    assert parse_program(s).skeletonized


def test_rename_generated_removes_hash_names():
    p = parse_program("main xs = foldr (+) 0 xs")
    out = print_program(rename_generated(p))
    assert "#" not in out
    parse_program(out)  # and the result is legal source


def test_where_block_survives_round_trip():
    p = parse_program(SAMPLE)
    s = print_program(rename_generated(p))
    q = parse_program(s)
    t = q.def_named("transpose")
    from skelc.syntax import FunDefBlock

    assert isinstance(t.clauses[1].body, FunDefBlock)
