"""Library functions available to every program.

map takes its list first, mirroring the sequential skeleton definition
the templates are built from; foldr, reduce and zipWith use the usual
operator-first order, which is how the corpus programs apply them.
These are ordinary definitions: user definitions of the same name
shadow them, and in skeletonized programs the name map refers to the
runtime skeleton instead (see interp).
"""

from __future__ import annotations

from functools import lru_cache

from .syntax import FunDef

PRELUDE_SOURCE = """
map [] f = []
map (x:xs) f = (f x) : (map xs f)

foldr g v [] = v
foldr g v (x:xs) = g x (foldr g v xs)

reduce g v [] = v
reduce g v (x:xs) = g x (reduce g v xs)

zipWith g [] ys = []
zipWith g (x:xs) [] = []
zipWith g (x:xs) (y:ys) = (g x y) : (zipWith g xs ys)
"""


@lru_cache(maxsize=1)
def prelude_defs() -> tuple[FunDef, ...]:
    from .parser import parse_program

    return parse_program(PRELUDE_SOURCE, prelude_names=frozenset()).defs


@lru_cache(maxsize=1)
def prelude_names() -> frozenset[str]:
    return frozenset(d.name for d in prelude_defs())
