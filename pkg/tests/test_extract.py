"""Rebuilding programs from transition graphs, with and without skeletons."""

import random

import pytest

from skelc import corpus
from skelc.encode import encode_program
from skelc.extract import ExtractError, extract_program, residualize
from skelc.generators import (
    matmul_args,
    matmul_inputs,
    random_tree,
    tree_args,
)
from skelc.interp import deep_force, evaluate
from skelc.lift import lambda_lift
from skelc.lts import build_lts
from skelc.parser import parse_program
from skelc.pretty import print_program
from skelc.syntax import (
    App,
    ConApp,
    FunCall,
    IntLit,
    Lambda,
    Var,
    free_fun_names,
    values_equal,
    walk,
)
from skelc.templates import map_reduce_template, map_template


def load(name):
    return lambda_lift(parse_program(corpus.corpus_source(name)))


def sample_args(name, rng):
    if name.startswith("matmul"):
        return matmul_args(*matmul_inputs(rng, rng.randint(1, 5)))
    return tree_args(random_tree(rng, rng.randrange(12)),
                     random_tree(rng, rng.randrange(12)))


def agree(p1, p2, name, rng, trials):
    for _ in range(trials):
        args = sample_args(name, rng)
        v1 = deep_force(evaluate(p1, args))
        v2 = deep_force(evaluate(p2, args))
        assert values_equal(v1, v2), name


def called_names(program):
    out = set()
    for d in program.defs:
        for cl in d.clauses:
            out |= free_fun_names(cl.body)
    if program.main is not None:
        out |= free_fun_names(program.main)
    return out


# ---------------------------------------------------------------------------
# plain round-trip: graph -> program with no templates


def test_non_recursive_expression_round_trips():
    e = ConApp("Pair", (IntLit(1), App(Lambda("x", Var("x")), IntLit(2))))
    r = residualize(build_lts(e))
    assert not r.defs and not r.skeletonized
    assert r.main == e


def test_round_trip_preserves_meaning_on_corpus():
    rng = random.Random(17)
    for name in corpus.corpus_names():
        prog = load(name)
        back = extract_program(prog, ())
        assert back.skeletonized == prog.skeletonized
        assert back.type_decls == prog.type_decls
        assert back.main_params == prog.main_params
        agree(prog, back, name, rng, 8)


def test_round_trip_output_reparses():
    for name in corpus.corpus_names():
        back = extract_program(load(name), ())
        again = parse_program(print_program(back))
        assert [d.name for d in again.defs] == [d.name for d in back.defs]


def test_shared_definition_extracted_once():
    prog = lambda_lift(parse_program(
        "twice x = x + x\nmain a b = twice a * twice b"))
    back = extract_program(prog, ())
    assert len(back.defs) == 1


def test_sigma_on_constructor_is_rejected():
    bad = build_lts(App(ConApp("C", ()), IntLit(1)))
    with pytest.raises(ExtractError):
        residualize(bad)


# ---------------------------------------------------------------------------
# skeleton replacement


def test_matmul_wrappers_call_runtime_skeletons():
    prog = load("matmul_enc")
    sk = extract_program(prog)
    assert sk.skeletonized
    calls = called_names(sk)
    assert "map" in calls and "mapReduce" in calls
    assert "mapReduce1" not in calls
    # the unstable middle pass survives as plain recursion: it calls itself
    selfrec = [d.name for d in sk.defs
               if any(d.name in free_fun_names(c.body) for c in d.clauses)]
    assert len(selfrec) >= 1


def test_tree_dot_wrapper_calls_single_seed_variant():
    sk = extract_program(load("tree_dot_enc"))
    assert sk.skeletonized
    assert "mapReduce1" in called_names(sk)


def test_tree_dot_with_restricted_registry_uses_general_variant():
    sk = extract_program(load("tree_dot_enc"),
                         (map_reduce_template(), map_template()))
    calls = called_names(sk)
    assert "mapReduce" in calls and "mapReduce1" not in calls


def test_skeletonized_output_preserves_meaning():
    rng = random.Random(23)
    for name in ("matmul_enc", "tree_dot_enc"):
        prog = load(name)
        agree(prog, extract_program(prog), name, rng, 10)


def test_skeletonized_output_reparses_and_still_agrees():
    rng = random.Random(29)
    for name in ("matmul_enc", "tree_dot_enc"):
        prog = load(name)
        again = lambda_lift(parse_program(print_program(extract_program(prog))))
        assert again.skeletonized
        agree(prog, again, name, rng, 6)


def test_element_function_is_local_to_the_wrapper():
    sk = extract_program(load("matmul_enc"))
    # wrappers keep their per-element function in a local block so the
    # surrounding clause parameters stay visible
    wrapper_defs = [d for d in sk.defs
                    if any("map" in free_fun_names(c.body) or
                           "mapReduce" in free_fun_names(c.body)
                           for c in d.clauses)]
    assert wrapper_defs
    top_names = {d.name for d in sk.defs}
    for d in wrapper_defs:
        for cl in d.clauses:
            blocks = [e for e in walk(cl.body)
                      if e.__class__.__name__ == "FunDefBlock"]
            assert blocks, d.name


def test_template_shaped_source_is_matched():
    src = (
        "data T a ::= Stop | Go a\n"
        "run (Stop:w) = 0\n"
        "run ((Go x):w) = x + run w\n"
        "main w = run w\n"
    )
    sk = extract_program(lambda_lift(parse_program(src)))
    assert sk.skeletonized
    assert "mapReduce1" in called_names(sk)


def test_non_list_recursion_is_left_alone():
    src = (
        "data N ::= Z | S N\n"
        "count Z = 0\n"
        "count (S n) = 1 + count n\n"
        "main n = count n\n"
    )
    prog = lambda_lift(parse_program(src))
    sk = extract_program(prog)
    assert not sk.skeletonized


# ---------------------------------------------------------------------------
# end to end: encode, then identify and replace


def test_encode_then_extract_matmul():
    rng = random.Random(31)
    base = load("matmul_fused")
    enc = lambda_lift(encode_program(base).program)
    sk = extract_program(enc)
    assert sk.skeletonized
    calls = called_names(sk)
    assert "map" in calls and "mapReduce" in calls
    agree(base, sk, "matmul_fused", rng, 8)


def test_encode_then_extract_tree_dot():
    rng = random.Random(37)
    base = load("tree_dot")
    enc = lambda_lift(encode_program(base).program)
    sk = extract_program(enc)
    assert sk.skeletonized
    assert "mapReduce1" in called_names(sk)
    agree(base, sk, "tree_dot", rng, 8)
