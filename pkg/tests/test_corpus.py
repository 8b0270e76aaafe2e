"""The bundled programs against brute-force oracles."""

import random

from skelc import corpus
from skelc.generators import (
    matmul_args,
    matmul_inputs,
    random_tree,
    tree_args,
)
from skelc.interp import evaluate, evaluate_call
from skelc.parser import parse_program
from skelc.pretty import print_program
from skelc.syntax import ConVal, IntVal, value_to_list, value_to_matrix


def load(name):
    return parse_program(corpus.corpus_source(name))


def mat_mul(xss, yss):
    return [
        [sum(x * row[j] for x, row in zip(xs, yss)) for j in range(len(yss[0]))]
        for xs in xss
    ]


def tree_dot(xt, yt):
    if xt is None or yt is None:
        return 0
    x, xl, xr = xt
    y, yl, yr = yt
    return x * y + tree_dot(xl, yl) + tree_dot(xr, yr)


def test_every_file_parses():
    for name in corpus.corpus_names():
        p = load(name)
        assert p.defs, name
        assert p.main is not None, name


def test_pragma_only_on_skeleton_wrapped_variants():
    for name in corpus.corpus_names():
        want = name.endswith("_enc_par")
        assert load(name).skeletonized == want, name


def test_sources_round_trip_through_printer():
    for name in corpus.corpus_names():
        p = load(name)
        again = parse_program(print_program(p))
        assert len(again.defs) == len(p.defs), name
        assert again.skeletonized == p.skeletonized, name


def test_matmul_variants_match_oracle():
    rng = random.Random(20240819)
    shapes = [(0, 3), (1, 1), (2, 2), (3, 3), (4, 4), (5, 5), (3, 5), (1, 4)]
    for n, m in shapes:
        xss, yss = matmul_inputs(rng, n, m)
        want = mat_mul(xss, yss)
        for name in corpus.MATMUL_VARIANTS:
            got = evaluate(load(name), matmul_args(xss, yss))
            assert value_to_matrix(got) == want, (name, n, m)


def test_tree_variants_match_oracle():
    rng = random.Random(77)
    cases = []
    for size in [0, 1, 2, 3, 5, 9, 17, 30]:
        t = random_tree(rng, size)
        cases.append((t, t))
        cases.append((t, random_tree(rng, size)))
    cases.append((random_tree(rng, 7), random_tree(rng, 13)))
    for xt, yt in cases:
        want = tree_dot(xt, yt)
        for name in corpus.TREE_VARIANTS:
            got = evaluate(load(name), tree_args(xt, yt))
            assert isinstance(got, IntVal)
            assert got.value == want, name


def test_encoded_lists_are_nonempty_with_nullary_terminal():
    rng = random.Random(5150)
    prog = load("tree_dot_enc")
    for _ in range(25):
        xt = random_tree(rng, rng.randrange(12))
        yt = random_tree(rng, rng.randrange(12))
        w = evaluate_call(prog, "encode_dotP", tree_args(xt, yt))
        cells = value_to_list(w)
        assert cells
        for cell in cells[:-1]:
            assert isinstance(cell, ConVal)
            assert cell.con == "C3" and len(cell.args) == 4
        last = cells[-1]
        assert isinstance(last, ConVal)
        assert last.con in ("C1", "C2") and last.args == ()


def test_matmul_encoded_lists_have_matching_structure():
    rng = random.Random(31337)
    prog = load("matmul_enc")
    for _ in range(20):
        n = rng.randrange(1, 6)
        xss, yss = matmul_inputs(rng, n)
        w = evaluate_call(prog, "encode_mMul_1", matmul_args(xss, yss))
        cells = value_to_list(w)
        assert len(cells) == n + 1
        assert all(c.con == "C3" for c in cells[:-1])
        assert cells[-1].con in ("C1", "C2")
