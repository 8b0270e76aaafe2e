"""The input-encoding pass: golden structure, scope analysis, semantics."""

import random

import pytest

from skelc import corpus
from skelc.canon import canonical_text, canonical_type_decls
from skelc.encode import (
    EncodeError,
    check_equivalence,
    classify_inputs,
    encode_program,
    extract_shape,
    random_value,
)
from skelc.generators import matmul_args, random_matrix, random_tree, tree_args
from skelc.interp import evaluate, evaluate_call
from skelc.lift import lambda_lift
from skelc.parser import parse_program
from skelc.pretty import print_def, print_program
from skelc.syntax import (
    ConVal,
    IntVal,
    TFun,
    free_fun_names,
    list_to_value,
    value_to_list,
    values_equal,
)


def load(name):
    return lambda_lift(parse_program(corpus.corpus_source(name)))


def encoded_tree():
    return encode_program(load("tree_dot"))


def encoded_fused():
    return encode_program(load("matmul_fused"))


def fun(program, name):
    for d in program.defs:
        if d.name == name:
            return d
    raise AssertionError(f"no definition named {name}")


# ---------------------------------------------------------------------------
# golden structure


def test_tree_dot_encoding_matches_reference():
    mine = encoded_tree().program
    golden = parse_program(corpus.corpus_source("tree_dot_enc"))
    assert canonical_text(mine) == canonical_text(golden)


def test_fused_matmul_types_match_reference():
    mine = encoded_fused().program
    golden = parse_program(corpus.corpus_source("matmul_enc"))
    assert canonical_type_decls(mine) == canonical_type_decls(golden)
    # one cell type per encoded function, appended after the source decls
    assert canonical_type_decls(mine) == (
        "data T0 t0 ::= K0 | K1 | K2 [t0] [t0]",
        "data T1 t0 ::= K3 | K4",
        "data T2 t0 ::= K5 | K6 | K7 t0 [t0]",
    )


# ---------------------------------------------------------------------------
# shape analysis


def test_matched_inputs_form_a_leading_prefix():
    fused = load("matmul_fused")
    assert classify_inputs(fun(fused, "mMul_1")) == (2, 1)
    assert classify_inputs(fun(fused, "mMul_2")) == (1, 3)
    assert classify_inputs(fun(fused, "mMul_3")) == (2, 1)
    assert classify_inputs(fun(load("tree_dot"), "dotP")) == (2, 0)


def test_captured_values_follow_pattern_positions():
    # components appear in pattern order, position-major, and include
    # only what the rewritten clause still needs
    dot = extract_shape(fun(load("tree_dot"), "dotP"))
    assert dot.clauses[0].captured == ()
    assert dot.clauses[1].captured == ()
    assert dot.clauses[2].captured == ("x", "y", "xt1", "yt1")

    fused = load("matmul_fused")
    m1 = extract_shape(fun(fused, "mMul_1"))
    assert m1.plains == ("yss",)
    assert m1.clauses[2].captured == ("xs", "zs")
    m2 = extract_shape(fun(fused, "mMul_2"))
    assert all(c.captured == () for c in m2.clauses)
    m3 = extract_shape(fun(fused, "mMul_3"))
    assert m3.clauses[2].captured == ("x", "ys")


def test_plain_arguments_of_the_chosen_call_are_captured():
    # transpose' passes (rotate xs yss) along unchanged; xs comes from
    # the matched pattern, so the cell must carry it
    shape = extract_shape(fun(load("matmul"), "transpose'"))
    assert "xs" in shape.clauses[1].captured


def test_rightmost_self_call_drives_the_rewrite():
    res = encoded_tree()
    info = res.encoded["dotP"]
    text = print_def(fun(res.program, info.new_name))
    # the chosen (last) call walks the synthesized list; the other one
    # recurses through a fresh encoding of its own arguments
    assert text.rstrip().endswith(f"{info.new_name} w")
    assert f"{info.new_name} ({info.encode_name} xt1 yt1)" in text


def test_every_call_site_is_rewritten():
    for res in (encoded_tree(), encoded_fused()):
        old_names = set(res.encoded)
        p = res.program
        for d in p.defs:
            for cl in d.clauses:
                assert not (free_fun_names(cl.body) & old_names), d.name
        assert not (free_fun_names(p.main) & old_names)


def test_encoded_functions_keep_one_clause_per_source_clause():
    for res in (encoded_tree(), encoded_fused()):
        for info in res.encoded.values():
            k = len(info.shape.clauses)
            assert len(info.con_names) == k
            assert len(fun(res.program, info.encode_name).clauses) == k
            assert len(fun(res.program, info.new_name).clauses) == k
            assert len(info.type_decl.constructors) == k


# ---------------------------------------------------------------------------
# hand-checked encoding


def test_single_branch_trees_encode_to_two_cells():
    res = encoded_tree()
    info = res.encoded["dotP"]
    c1, _, c3 = info.con_names
    e = ConVal("E", ())
    args = tree_args((2, None, None), (3, None, None))
    got = evaluate_call(res.program, info.encode_name, args)
    want = list_to_value(
        [ConVal(c3, (IntVal(2), IntVal(3), e, e)), ConVal(c1, ())]
    )
    assert values_equal(got, want)


def test_empty_inputs_encode_to_a_singleton():
    res = encoded_tree()
    info = res.encoded["dotP"]
    got = evaluate_call(res.program, info.encode_name, tree_args(None, None))
    want = list_to_value([ConVal(info.con_names[0], ())])
    assert values_equal(got, want)


# ---------------------------------------------------------------------------
# properties


def matched_arg_types(program, fname, m):
    t = program.signatures[fname]
    out = []
    for _ in range(m):
        assert isinstance(t, TFun)
        out.append(t.arg)
        t = t.res
    return out


def test_encodings_are_never_empty_and_end_with_a_base_cell():
    rng = random.Random(90125)
    for make in (encoded_tree, encoded_fused):
        res = make()
        original = load("tree_dot" if make is encoded_tree else "matmul_fused")
        decls = {d.name: d for d in original.type_decls}
        for info in res.encoded.values():
            types = matched_arg_types(original, info.original, info.shape.matched)
            base = {
                info.con_names[c.index]
                for c in info.shape.clauses
                if c.chosen_args is None
            }
            for _ in range(100):
                args = [random_value(t, decls, rng, 5) for t in types]
                cells = value_to_list(
                    evaluate_call(res.program, info.encode_name, args)
                )
                assert cells, info.original
                assert cells[-1].con in base
                for cell in cells[:-1]:
                    assert cell.con in set(info.con_names) - base


def test_matrix_encoding_has_one_cell_per_row_plus_terminator():
    rng = random.Random(31337)
    res = encoded_fused()
    info = res.encoded["mMul_1"]
    for n in range(5):
        xss, yss = random_matrix(rng, n, 3), random_matrix(rng, n + 1, 3)
        args = matmul_args(xss, yss)
        cells = value_to_list(evaluate_call(res.program, info.encode_name, args))
        assert len(cells) == n + 1


# ---------------------------------------------------------------------------
# randomized equivalence


def test_textbook_matmul_stays_equivalent():
    p = load("matmul")
    r = check_equivalence(p, encode_program(p).program, seed=11, trials=50)
    assert r.ok, r.format()


def test_fused_matmul_stays_equivalent():
    p = load("matmul_fused")
    r = check_equivalence(p, encode_program(p).program, seed=12, trials=50)
    assert r.ok, r.format()


def test_tree_dot_stays_equivalent():
    p = load("tree_dot")
    r = check_equivalence(p, encode_program(p).program, seed=13, trials=50, size=12)
    assert r.ok, r.format()


def test_encoding_twice_is_still_equivalent():
    res = encode_program(encoded_tree().program)
    assert res.encoded  # the walker over the synthesized list recurses too
    rng = random.Random(404)
    for _ in range(8):
        args = tree_args(random_tree(rng, 12, -9, 9), random_tree(rng, 12, -9, 9))
        assert values_equal(
            evaluate(encoded_tree().program, args),
            evaluate(res.program, args),
        )


def test_mismatches_are_reported_with_inputs():
    broken_src = corpus.corpus_source("tree_dot_enc").replace("(x * y)", "(x + y)")
    assert broken_src != corpus.corpus_source("tree_dot_enc")
    r = check_equivalence(
        load("tree_dot"), parse_program(broken_src), seed=14, trials=40, size=8
    )
    assert not r.ok
    assert "disagree" in r.format()


def test_inputs_need_a_signature_to_generate():
    enc = load("matmul_enc")  # its main is not a plain signed application
    with pytest.raises(EncodeError):
        check_equivalence(enc, enc, trials=1)


# ---------------------------------------------------------------------------
# programs the pass must refuse or leave alone


def test_plain_definitions_pass_through_untouched():
    src = """
add3 x = x + 3
twice f x = f (f x)
main x = twice add3 x
"""
    p = parse_program(src)
    res = encode_program(p)
    assert res.encoded == {}
    assert res.notes == []
    assert print_program(res.program) == print_program(p)


def test_mutually_recursive_functions_are_skipped():
    src = """
f [] = 0
f (x:xs) = (f xs) + (g xs)
g [] = 0
g (x:xs) = f xs
main xs = f xs
"""
    res = encode_program(parse_program(src))
    assert res.encoded == {}
    assert any("f" in n and "mutual" in n for n in res.notes)


def test_matched_argument_after_plain_one_is_refused():
    src = """
rot xs [] = xs
rot xs (y:ys) = rot xs ys
main xs ys = rot xs ys
"""
    res = encode_program(parse_program(src))
    assert res.encoded == {}
    assert any("leading prefix" in n for n in res.notes)


def test_scrutinee_matched_everywhere_but_no_recursion_still_encodes():
    # single non-recursive clause set over a matched input is skipped:
    # nothing recursive to drive the synthesized list
    src = """
hd (x:xs) = x
hd [] = 0
main xs = hd xs
"""
    res = encode_program(parse_program(src))
    assert res.encoded == {}


def test_chosen_call_must_use_pattern_bound_arguments():
    src = """
f [] = []
f (x:xs) = (\\ys. f ys) xs
main xs = f xs
"""
    with pytest.raises(EncodeError):
        encode_program(parse_program(src))


def test_encoded_function_cannot_be_passed_partially_applied():
    src = """
g [] = 0
g (x:xs) = 1 + (g xs)
main xss = map xss g
"""
    with pytest.raises(EncodeError):
        encode_program(parse_program(src))
