"""Seeded input builders for tests, check-equiv and the bench harness.

Matrices are plain row-major lists of lists of ints.  Trees are either
None (empty) or (value, left, right) tuples; tree_value turns one into
the corpus BTree representation.
"""

from __future__ import annotations

import random
from typing import Optional, Tuple

from .syntax import ConVal, IntVal, Value, matrix_value

Tree = Optional[Tuple[int, "Tree", "Tree"]]


def random_matrix(rng: random.Random, rows: int, cols: int,
                  lo: int = -9, hi: int = 9) -> list[list[int]]:
    return [[rng.randint(lo, hi) for _ in range(cols)] for _ in range(rows)]


def matmul_inputs(rng: random.Random, n: int, m: int | None = None):
    """An n x m matrix paired with an m x n one (square when m is None)."""
    m = n if m is None else m
    return random_matrix(rng, n, m), random_matrix(rng, m, n)


def random_tree(rng: random.Random, size: int,
                lo: int = -9, hi: int = 9) -> Tree:
    if size <= 0:
        return None
    left = rng.randrange(size)
    return (
        rng.randint(lo, hi),
        random_tree(rng, left, lo, hi),
        random_tree(rng, size - 1 - left, lo, hi),
    )


def tree_value(t: Tree) -> Value:
    if t is None:
        return ConVal("E", ())
    x, l, r = t
    return ConVal("B", (IntVal(x), tree_value(l), tree_value(r)))


def matmul_args(xss: list[list[int]], yss: list[list[int]]) -> list[Value]:
    return [matrix_value(xss), matrix_value(yss)]


def tree_args(xt: Tree, yt: Tree) -> list[Value]:
    return [tree_value(xt), tree_value(yt)]
