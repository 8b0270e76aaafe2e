"""Canonical alpha-renaming of whole programs.

Two programs that differ only in the names of types, constructors,
functions, and variables should be considered the same.  This module
rewrites every user-chosen name to a positional one (T0/K0/g0/v0/t0)
determined purely by declaration and traversal order, so that structural
equality reduces to string equality of the printed canonical forms.

Built-in names (prelude functions, primitives, list constructors,
skeleton intrinsics, and ``main``) keep their spelling: they carry
meaning, not just identity.
"""

from __future__ import annotations

from .prelude import prelude_names
from .pretty import print_program, print_type_decl
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
    PCon,
    PRIM_NAMES,
    PVar,
    Pattern,
    Program,
    TCon,
    TFun,
    TVar,
    TypeDecl,
    TypeExpr,
    Var,
    replace,
)

INTRINSIC_NAMES = ("map", "mapReduce", "mapReduce1", "farm")


def _fixed_names() -> frozenset[str]:
    fixed = {"main", "Cons", "Nil", "Int", "List"}
    fixed.update(PRIM_NAMES)
    fixed.update(INTRINSIC_NAMES)
    fixed.update(prelude_names())
    return frozenset(fixed)


def canonical_form(program: Program) -> Program:
    fixed = _fixed_names()

    tmap: dict[str, str] = {}
    cmap: dict[str, str] = {}
    for i, decl in enumerate(program.type_decls):
        tmap[decl.name] = f"T{i}"
        for cname, _ in decl.constructors:
            cmap[cname] = f"K{len(cmap)}"

    fmap: dict[str, str] = {}
    for d in program.defs:
        if d.name not in fixed:
            fmap[d.name] = f"g{len(fmap)}"

    def rtype(t: TypeExpr, tvars: dict[str, str]) -> TypeExpr:
        if isinstance(t, TVar):
            if t.name not in tvars:
                tvars[t.name] = f"t{len(tvars)}"
            return TVar(tvars[t.name])
        if isinstance(t, TCon):
            return TCon(tmap.get(t.name, t.name), tuple(rtype(a, tvars) for a in t.args))
        assert isinstance(t, TFun)
        return TFun(rtype(t.arg, tvars), rtype(t.res, tvars))

    new_decls = []
    for decl in program.type_decls:
        tvars: dict[str, str] = {}
        params = []
        for p in decl.params:
            tvars[p] = f"t{len(tvars)}"
            params.append(tvars[p])
        cons = tuple(
            (cmap[cname], tuple(rtype(t, tvars) for t in comps))
            for cname, comps in decl.constructors
        )
        new_decls.append(TypeDecl(tmap[decl.name], tuple(params), cons))

    def rename_def(d: FunDef) -> FunDef:
        new_clauses = []
        for cl in d.clauses:
            counter = 0

            def fresh() -> str:
                nonlocal counter
                name = f"v{counter}"
                counter += 1
                return name

            env: dict[str, str] = {}
            pats = tuple(_rpat(p, env, fresh, cmap) for p in cl.patterns)
            body = _rex(cl.body, env, {}, fresh, fmap, cmap)
            new_clauses.append(Clause(pats, body))
        return FunDef(fmap.get(d.name, d.name), tuple(new_clauses))

    new_defs = tuple(rename_def(d) for d in program.defs)

    new_main = None
    new_params = program.main_params
    if program.main is not None:
        counter = 0

        def fresh_main() -> str:
            nonlocal counter
            name = f"v{counter}"
            counter += 1
            return name

        env = {p: fresh_main() for p in program.main_params}
        new_params = tuple(env[p] for p in program.main_params)
        new_main = _rex(program.main, env, {}, fresh_main, fmap, cmap)

    new_sigs = {}
    for name, t in sorted(program.signatures.items()):
        new_sigs[fmap.get(name, name)] = rtype(t, {})

    return replace(
        program,
        type_decls=tuple(new_decls),
        defs=new_defs,
        main=new_main,
        main_params=new_params,
        signatures=new_sigs,
    )


def _rpat(p: Pattern, env: dict[str, str], fresh, cmap: dict[str, str]) -> Pattern:
    if isinstance(p, PVar):
        env[p.name] = fresh()
        return PVar(env[p.name])
    assert isinstance(p, PCon)
    return PCon(cmap.get(p.con, p.con), tuple(_rpat(a, env, fresh, cmap) for a in p.args))


def _rex(
    e: Expr,
    env: dict[str, str],
    fenv: dict[str, str],
    fresh,
    fmap: dict[str, str],
    cmap: dict[str, str],
) -> Expr:
    def lookup(name: str) -> str:
        if name in env:
            return env[name]
        if name in fenv:
            return fenv[name]
        return fmap.get(name, name)

    match e:
        case Var(name):
            return Var(lookup(name))
        case FunCall(name):
            return FunCall(lookup(name))
        case IntLit():
            return e
        case App(fn, arg):
            return App(
                _rex(fn, env, fenv, fresh, fmap, cmap),
                _rex(arg, env, fenv, fresh, fmap, cmap),
            )
        case ConApp(con, args):
            return ConApp(
                cmap.get(con, con),
                tuple(_rex(a, env, fenv, fresh, fmap, cmap) for a in args),
            )
        case Lambda(param, body):
            inner = dict(env)
            inner[param] = fresh()
            return Lambda(inner[param], _rex(body, inner, fenv, fresh, fmap, cmap))
        case Let(bindings, body):
            inner = dict(env)
            new_bindings = []
            for name, rhs in bindings:
                # a let RHS cannot see its own binder
                new_rhs = _rex(rhs, inner, fenv, fresh, fmap, cmap)
                inner = dict(inner)
                inner[name] = fresh()
                new_bindings.append((inner[name], new_rhs))
            return Let(tuple(new_bindings), _rex(body, inner, fenv, fresh, fmap, cmap))
        case FunDefBlock(body, defs):
            block_fenv = dict(fenv)
            for d in defs:
                block_fenv[d.name] = fresh()
            new_defs = []
            for d in defs:
                new_clauses = []
                for cl in d.clauses:
                    inner = dict(env)
                    pats = tuple(_rpat(p, inner, fresh, cmap) for p in cl.patterns)
                    new_clauses.append(
                        Clause(pats, _rex(cl.body, inner, block_fenv, fresh, fmap, cmap))
                    )
                new_defs.append(FunDef(block_fenv[d.name], tuple(new_clauses)))
            return FunDefBlock(
                _rex(body, env, block_fenv, fresh, fmap, cmap), tuple(new_defs)
            )
        case _:
            raise TypeError(f"unexpected expression node: {e!r}")


def canonical_text(program: Program) -> str:
    """Printed canonical form; equal strings mean alpha-equivalent programs."""
    return print_program(canonical_form(program))


def canonical_type_decls(program: Program) -> tuple[str, ...]:
    """Printed canonical type declarations, for comparing generated types
    against a reference while ignoring everything else."""
    return tuple(print_type_decl(d) for d in canonical_form(program).type_decls)


def alpha_equivalent(p: Program, q: Program) -> bool:
    return canonical_text(p) == canonical_text(q)
