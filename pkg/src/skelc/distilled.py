"""Shape check for distilled programs.

Distilled code only ever pattern-matches values that arrive directly
as function arguments, never values built locally.  Concretely, at
every call whose target definition is known:

* a pattern-matched argument position must be filled by a plain
  variable, and
* that variable must not be let-bound.

Let-bound variables may still flow into positions the callee never
matches (accumulating closures, say).  Violations are collected into a
report rather than raised: callers decide whether to stop, and the
pipeline only warns before encoding anyway.
"""

from __future__ import annotations

from dataclasses import dataclass

from .prelude import prelude_defs
from .syntax import (
    App,
    ConApp,
    Expr,
    FunCall,
    FunDef,
    FunDefBlock,
    IntLit,
    Lambda,
    Let,
    Program,
    Var,
    spine_parts,
)


@dataclass(frozen=True)
class Violation:
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.where}: {self.message}"


@dataclass(frozen=True)
class DistilledReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def format(self) -> str:
        if self.ok:
            return "distilled shape: ok"
        lines = [f"distilled shape: {len(self.violations)} violation(s)"]
        lines += [f"  {v}" for v in self.violations]
        return "\n".join(lines)


def validate_distilled(program: Program) -> DistilledReport:
    table: dict[str, FunDef] = {d.name: d for d in prelude_defs()}
    table.update({d.name: d for d in program.defs})
    out: list[Violation] = []

    def check_call(fn: str, args, rho: frozenset[str], where: str, scope):
        callee = scope.get(fn) or table.get(fn)
        if callee is None:
            # an intrinsic or unresolved name; nothing to say about it
            for a in args:
                walk(a, rho, where, scope)
            return
        matched = set(callee.matched_positions())
        for i, a in enumerate(args):
            if i in matched:
                if not isinstance(a, Var):
                    out.append(
                        Violation(
                            where,
                            f"call to {fn}: argument {i + 1} is matched "
                            f"by {fn} but is not a variable",
                        )
                    )
                    walk(a, rho, where, scope)
                elif a.name in rho:
                    out.append(
                        Violation(
                            where,
                            f"call to {fn}: let-bound {a.name} flows into "
                            f"matched argument {i + 1}",
                        )
                    )
            else:
                walk(a, rho, where, scope)

    def walk(e: Expr, rho: frozenset[str], where: str, scope: dict):
        if isinstance(e, (Var, IntLit, FunCall)):
            return
        if isinstance(e, App):
            head, args = spine_parts(e)
            if isinstance(head, FunCall):
                check_call(head.name, args, rho, where, scope)
                return
            walk(head, rho, where, scope)
            for a in args:
                walk(a, rho, where, scope)
            return
        if isinstance(e, ConApp):
            for a in e.args:
                walk(a, rho, where, scope)
            return
        if isinstance(e, Lambda):
            walk(e.body, rho - {e.param}, where, scope)
            return
        if isinstance(e, Let):
            for _, r in e.bindings:
                walk(r, rho, where, scope)
            walk(e.body, rho | {n for n, _ in e.bindings}, where, scope)
            return
        if isinstance(e, FunDefBlock):
            inner = dict(scope)
            inner.update({d.name: d for d in e.defs})
            walk(e.body, rho, where, inner)
            for d in e.defs:
                check_def(d, rho, f"{where}.{d.name}", inner)
            return
        raise TypeError(type(e).__name__)

    def check_def(d: FunDef, rho: frozenset[str], where: str, scope: dict):
        for c in d.clauses:
            walk(c.body, rho, where, scope)

    for d in program.defs:
        check_def(d, frozenset(), d.name, {})
    if program.main is not None:
        walk(program.main, frozenset(), "main", {})
    return DistilledReport(tuple(out))
