"""Builtin skeleton shapes the matcher recognizes.

Each template packages a one-clause definition covering only non-empty
input (the empty case of a candidate is absorbed into the per-element
function it binds), the application expression naming its parameters,
and the transition graph of that application.

There is deliberately no plain `reduce` entry: on an encoded call
structure the combine step receives a cell image on the left and the
folded suffix on the right, which are different types, so the operator
cannot be assumed associative and only the map/mapReduce forms are
safe to parallelize.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lts import Lts, build_lts
from .syntax import (
    App,
    Clause,
    Expr,
    FunCall,
    FunDef,
    PCon,
    PVar,
    Var,
    apply_spine,
    cons,
)


@dataclass(frozen=True)
class SkeletonTemplate:
    name: str
    params: tuple[str, ...]  # application-order parameter names
    defn: FunDef  # single clause, non-empty input only
    app: Expr  # e.g. `map xs f`
    lts: Lts  # graph of `app` under {name: defn}

    @property
    def reducing(self) -> bool:
        """Whether the skeleton folds images (binds a combine step)."""
        return "g" in self.params


def _template(name: str, params: tuple[str, ...], body: Expr) -> SkeletonTemplate:
    cell = PCon("Cons", (PVar("x"), PVar("xs")))
    patterns = (cell,) + tuple(PVar(p) for p in params[1:])
    defn = FunDef(name, (Clause(patterns, body),))
    app = apply_spine(FunCall(name), [Var(p) for p in params])
    lts = build_lts(app, {name: defn})
    return SkeletonTemplate(name, params, defn, app, lts)


def _rec(name: str, params: tuple[str, ...]) -> Expr:
    return apply_spine(FunCall(name), [Var(p) for p in params])


def map_template() -> SkeletonTemplate:
    # map (x:xs) f = (f x) : (map xs f)
    body = cons(App(Var("f"), Var("x")), _rec("map", ("xs", "f")))
    return _template("map", ("xs", "f"), body)


def map_reduce_template() -> SkeletonTemplate:
    # mapReduce (x:xs) g v f = g (f x) (mapReduce xs g v f)
    body = apply_spine(
        Var("g"), [App(Var("f"), Var("x")), _rec("mapReduce", ("xs", "g", "v", "f"))]
    )
    return _template("mapReduce", ("xs", "g", "v", "f"), body)


def map_reduce1_template() -> SkeletonTemplate:
    # mapReduce1 (x:xs) g f = g (f x) (mapReduce1 xs g f)
    body = apply_spine(
        Var("g"), [App(Var("f"), Var("x")), _rec("mapReduce1", ("xs", "g", "f"))]
    )
    return _template("mapReduce1", ("xs", "g", "f"), body)


def builtin_templates() -> tuple[SkeletonTemplate, ...]:
    """All recognized skeletons, in matching order: the seedless fold
    first (it only fits candidates without plain parameters), then the
    seeded fold, then map."""
    return (map_reduce1_template(), map_reduce_template(), map_template())
