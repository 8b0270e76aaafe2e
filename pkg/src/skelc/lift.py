"""Move local function definitions to the top level.

Each where-block definition becomes a top-level one.  Variables it
uses from the enclosing scope are prepended as plain parameters, and
every reference to it (call or argument position alike) is replaced by
the new name partially applied to those variables, which keeps the
replacement meaning-preserving even where the function escapes as a
value.  Capture sets are closed over mutual recursion inside a block,
so a definition that calls a capturing sibling also passes the
sibling's environment along.

Names are kept when nothing else claims them; otherwise a generated
name is used (pretty printing turns it into base_1, base_2, ...).
"""

from __future__ import annotations

from dataclasses import replace

from .parser import RESERVED_FUN_NAMES
from .prelude import prelude_names
from .syntax import (
    App,
    Clause,
    ConApp,
    Expr,
    FunCall,
    FunDef,
    FunDefBlock,
    IntLit,
    Lambda,
    Let,
    PVar,
    Program,
    Var,
    apply_spine,
    clause_bound_vars,
    def_free_vars,
    free_fun_names,
    fresh_name,
)


def lambda_lift(program: Program) -> Program:
    """Return an equivalent program with no local definition blocks."""
    claimed = {d.name for d in program.defs}
    claimed |= set(RESERVED_FUN_NAMES) | set(prelude_names()) | {"map", "main"}
    out_defs: list[FunDef] = []

    def claim(base: str) -> str:
        if base not in claimed:
            claimed.add(base)
            return base
        name = fresh_name(base)
        claimed.add(name)
        return name

    def lift_expr(e: Expr, hoisted: list[FunDef]) -> Expr:
        if isinstance(e, (Var, IntLit, FunCall)):
            return e
        if isinstance(e, App):
            return App(lift_expr(e.fn, hoisted), lift_expr(e.arg, hoisted))
        if isinstance(e, ConApp):
            return ConApp(e.con, tuple(lift_expr(a, hoisted) for a in e.args))
        if isinstance(e, Lambda):
            return Lambda(e.param, lift_expr(e.body, hoisted))
        if isinstance(e, Let):
            return Let(
                tuple((n, lift_expr(r, hoisted)) for n, r in e.bindings),
                lift_expr(e.body, hoisted),
            )
        if isinstance(e, FunDefBlock):
            # inner blocks first, so their captured variables are
            # visible as plain variables here
            defs = [
                FunDef(
                    d.name,
                    tuple(
                        Clause(c.patterns, lift_expr(c.body, hoisted))
                        for c in d.clauses
                    ),
                )
                for d in e.defs
            ]
            body = lift_expr(e.body, hoisted)

            local = {d.name for d in defs}
            captured: dict[str, list[str]] = {
                d.name: def_free_vars(d) for d in defs
            }
            calls = {
                d.name: {
                    n
                    for c in d.clauses
                    for n in free_fun_names(c.body)
                    if n in local
                }
                for d in defs
            }
            changed = True
            while changed:
                changed = False
                for d in defs:
                    mine = captured[d.name]
                    for callee in calls[d.name]:
                        for v in captured[callee]:
                            if v not in mine:
                                mine.append(v)
                                changed = True

            renames = {d.name: claim(d.name) for d in defs}
            mapping = {
                d.name: (renames[d.name], captured[d.name]) for d in defs
            }

            for d in defs:
                new_clauses = []
                for c in d.clauses:
                    bound = set(clause_bound_vars(c))
                    extra = tuple(
                        PVar(v if v not in bound else fresh_name(v))
                        for v in captured[d.name]
                    )
                    new_clauses.append(
                        Clause(
                            extra + c.patterns,
                            _replace_refs(c.body, mapping),
                        )
                    )
                hoisted.append(FunDef(renames[d.name], tuple(new_clauses)))
            return _replace_refs(body, mapping)
        raise TypeError(type(e).__name__)

    for d in program.defs:
        hoisted: list[FunDef] = []
        new_clauses = tuple(
            Clause(c.patterns, lift_expr(c.body, hoisted)) for c in d.clauses
        )
        out_defs.append(FunDef(d.name, new_clauses))
        out_defs.extend(hoisted)

    new_main = program.main
    if new_main is not None:
        hoisted = []
        new_main = lift_expr(new_main, hoisted)
        out_defs.extend(hoisted)

    return replace(program, defs=tuple(out_defs), main=new_main)


def _replace_refs(e: Expr, mapping: dict[str, tuple[str, list[str]]]) -> Expr:
    """Swap references to lifted names for partially applied new names."""
    if isinstance(e, FunCall):
        got = mapping.get(e.name)
        if got is None:
            return e
        name, captured = got
        return apply_spine(FunCall(name), [Var(v) for v in captured])
    if isinstance(e, (Var, IntLit)):
        return e
    if isinstance(e, App):
        return App(_replace_refs(e.fn, mapping), _replace_refs(e.arg, mapping))
    if isinstance(e, ConApp):
        return ConApp(e.con, tuple(_replace_refs(a, mapping) for a in e.args))
    if isinstance(e, Lambda):
        return Lambda(e.param, _replace_refs(e.body, mapping))
    if isinstance(e, Let):
        return Let(
            tuple((n, _replace_refs(r, mapping)) for n, r in e.bindings),
            _replace_refs(e.body, mapping),
        )
    if isinstance(e, FunDefBlock):
        # block def names are unique after parsing, so no shadowing here
        return FunDefBlock(
            _replace_refs(e.body, mapping),
            tuple(
                FunDef(
                    d.name,
                    tuple(
                        Clause(c.patterns, _replace_refs(c.body, mapping))
                        for c in d.clauses
                    ),
                )
                for d in e.defs
            ),
        )
    raise TypeError(type(e).__name__)
