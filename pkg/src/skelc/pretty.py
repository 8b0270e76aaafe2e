"""Source printer.

print_program(parse_program(s)) is a fixpoint: printing, reparsing and
printing again yields the same text.  Generated names contain '#',
which the lexer rejects, so programs are passed through
rename_generated before printing.
"""

from __future__ import annotations

from dataclasses import replace

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
    PVar,
    Pattern,
    Program,
    TCon,
    TFun,
    TVar,
    TypeDecl,
    TypeExpr,
    Var,
    is_generated_name,
    spine_parts,
)

_PREC_LAM = 1
_PREC_CONS = 5
_PREC_ADD = 6
_PREC_MUL = 7
_PREC_APP = 10
_PREC_ATOM = 11


def print_expr(e: Expr, prec: int = 0, indent: str = "") -> str:
    match e:
        case Var(name):
            return name
        case IntLit(v):
            return str(v)
        case FunCall(name):
            return f"({name})" if name in ("+", "*", "++") else name
        case ConApp("Nil", ()):
            return "[]"
        case ConApp("Cons", (_, _)):
            items, tail = _cons_spine(e)
            if tail is None:
                return "[" + ", ".join(print_expr(x, _PREC_LAM, indent) for x in items) + "]"
            parts = [print_expr(x, _PREC_CONS + 1, indent) for x in items]
            parts.append(print_expr(tail, _PREC_CONS, indent))
            return _wrap(" : ".join(parts), prec > _PREC_CONS)
        case ConApp(con, ()):
            return con
        case ConApp(con, args):
            s = con + " " + " ".join(print_expr(a, _PREC_ATOM, indent) for a in args)
            return _wrap(s, prec > _PREC_APP)
        case App():
            head, args = spine_parts(e)
            if isinstance(head, FunCall) and head.name in ("+", "*", "++") and len(args) == 2:
                a, b = args
                if head.name == "+":
                    s = f"{print_expr(a, _PREC_ADD, indent)} + {print_expr(b, _PREC_ADD + 1, indent)}"
                    return _wrap(s, prec > _PREC_ADD)
                if head.name == "*":
                    s = f"{print_expr(a, _PREC_MUL, indent)} * {print_expr(b, _PREC_MUL + 1, indent)}"
                    return _wrap(s, prec > _PREC_MUL)
                s = f"{print_expr(a, _PREC_CONS + 1, indent)} ++ {print_expr(b, _PREC_CONS, indent)}"
                return _wrap(s, prec > _PREC_CONS)
            s = " ".join(
                [print_expr(head, _PREC_APP, indent)]
                + [print_expr(a, _PREC_ATOM, indent) for a in args]
            )
            return _wrap(s, prec > _PREC_APP)
        case Lambda(param, body):
            s = f"\\{param}. {print_expr(body, _PREC_LAM, indent)}"
            return _wrap(s, prec > _PREC_LAM)
        case Let(bindings, body):
            bs = "; ".join(f"{n} = {print_expr(rhs, _PREC_LAM, indent)}" for n, rhs in bindings)
            s = f"let {bs} in {print_expr(body, _PREC_LAM, indent)}"
            return _wrap(s, prec > _PREC_LAM)
        case FunDefBlock(body, defs):
            inner = indent + "    "
            lines = []
            for i, d in enumerate(defs):
                for j, cl in enumerate(d.clauses):
                    sep = ";" if (i, j) != (len(defs) - 1, len(d.clauses) - 1) else " }"
                    lines.append(inner + _clause_text(d.name, cl, inner) + sep)
            s = print_expr(body, _PREC_APP, indent) + " where {\n" + "\n".join(lines)
            return _wrap(s, prec > 0)
    raise TypeError(e)


def _cons_spine(e: Expr) -> tuple[list[Expr], Expr | None]:
    """Items of a cons chain; tail is None when it ends in Nil."""
    items = []
    while isinstance(e, ConApp) and e.con == "Cons":
        items.append(e.args[0])
        e = e.args[1]
    if isinstance(e, ConApp) and e.con == "Nil":
        return items, None
    return items, e


def _wrap(s: str, need: bool) -> str:
    return f"({s})" if need else s


def print_pattern(p: Pattern, atom: bool = True) -> str:
    match p:
        case PVar(name):
            return name
        case PCon("Nil", ()):
            return "[]"
        case PCon("Cons", (h, t)):
            inner = f"{print_pattern(h)}:{_cons_pattern_tail(t)}"
            return f"({inner})" if atom else inner
        case PCon(con, ()):
            return con
        case PCon(con, args):
            inner = con + " " + " ".join(print_pattern(a) for a in args)
            return f"({inner})" if atom else inner
    raise TypeError(p)


def _cons_pattern_tail(p: Pattern) -> str:
    if isinstance(p, PCon) and p.con == "Cons":
        return f"{print_pattern(p.args[0])}:{_cons_pattern_tail(p.args[1])}"
    return print_pattern(p)


def print_type(t: TypeExpr, prec: int = 0) -> str:
    match t:
        case TVar(name):
            return name
        case TCon("List", (elem,)):
            return f"[{print_type(elem)}]"
        case TCon(name, ()):
            return name
        case TCon(name, args):
            s = name + " " + " ".join(print_type(a, 2) for a in args)
            return _wrap(s, prec >= 2)
        case TFun(arg, res):
            s = f"{print_type(arg, 1)} -> {print_type(res)}"
            return _wrap(s, prec >= 1)
    raise TypeError(t)


def _clause_text(name: str, cl: Clause, indent: str) -> str:
    pats = "".join(" " + print_pattern(p) for p in cl.patterns)
    return f"{name}{pats} = {print_expr(cl.body, 0, indent)}"


def print_def(d: FunDef) -> str:
    return "\n".join(_clause_text(d.name, cl, "") for cl in d.clauses)


def print_type_decl(decl: TypeDecl) -> str:
    alts = " | ".join(
        con + "".join(" " + print_type(t, 2) for t in comps)
        for con, comps in decl.constructors
    )
    params = "".join(" " + p for p in decl.params)
    return f"data {decl.name}{params} ::= {alts}"


def print_program(program: Program) -> str:
    program = rename_generated(program)
    parts: list[str] = []
    if program.skeletonized:
        parts.append("-- %skeletonized")
    for decl in program.type_decls:
        parts.append(print_type_decl(decl))
    if parts:
        parts.append("")
    for d in program.defs:
        if d.name in program.signatures:
            parts.append(f"{d.name} :: {print_type(program.signatures[d.name])}")
        parts.append(print_def(d))
        parts.append("")
    def_names = set(program.def_names())
    for name, sig in program.signatures.items():
        if name not in def_names:
            parts.append(f"{name} :: {print_type(sig)}")
    if program.main is not None:
        params = "".join(" " + p for p in program.main_params)
        parts.append(f"main{params} = {print_expr(program.main)}")
        parts.append("")
    while parts and parts[-1] == "":
        parts.pop()
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# emit-safe renaming


def all_names(program: Program) -> set[str]:
    names: set[str] = set(program.main_params)
    names.update(program.signatures)
    for decl in program.type_decls:
        names.add(decl.name)
        names.update(decl.constructor_names())

    def go(e: Expr) -> None:
        match e:
            case Var(name) | FunCall(name):
                names.add(name)
            case Lambda(param, body):
                names.add(param)
                go(body)
            case Let(bindings, body):
                for n, rhs in bindings:
                    names.add(n)
                    go(rhs)
                go(body)
            case FunDefBlock(body, defs):
                go(body)
                for d in defs:
                    go_def(d)
            case App(fn, arg):
                go(fn)
                go(arg)
            case ConApp(_, args):
                for a in args:
                    go(a)
            case _:
                pass

    def go_pattern(p: Pattern) -> None:
        if isinstance(p, PVar):
            names.add(p.name)
        else:
            assert isinstance(p, PCon)
            for a in p.args:
                go_pattern(a)

    def go_def(d: FunDef) -> None:
        names.add(d.name)
        for cl in d.clauses:
            for p in cl.patterns:
                go_pattern(p)
            go(cl.body)

    for d in program.defs:
        go_def(d)
    if program.main is not None:
        go(program.main)
    return names


def map_names(e: Expr, ren: dict[str, str]) -> Expr:
    """Uniform renaming of every name occurrence.  Only safe when the
    renaming is injective and targets are unused, as with generated
    names."""

    def pat(p: Pattern) -> Pattern:
        if isinstance(p, PVar):
            return PVar(ren.get(p.name, p.name))
        assert isinstance(p, PCon)
        return PCon(p.con, tuple(pat(a) for a in p.args))

    def go(node: Expr) -> Expr:
        match node:
            case Var(name):
                return Var(ren.get(name, name))
            case FunCall(name):
                return FunCall(ren.get(name, name))
            case IntLit():
                return node
            case App(fn, arg):
                return App(go(fn), go(arg))
            case ConApp(con, args):
                return ConApp(con, tuple(go(a) for a in args))
            case Lambda(param, body):
                return Lambda(ren.get(param, param), go(body))
            case Let(bindings, body):
                return Let(tuple((ren.get(n, n), go(r)) for n, r in bindings), go(body))
            case FunDefBlock(body, defs):
                return FunDefBlock(
                    go(body),
                    tuple(
                        FunDef(
                            ren.get(d.name, d.name),
                            tuple(Clause(tuple(pat(p) for p in cl.patterns), go(cl.body)) for cl in d.clauses),
                        )
                        for d in defs
                    ),
                )
        raise TypeError(node)

    return go(e)


def rename_generated(program: Program) -> Program:
    """Replace '#'-bearing generated names by unused plain names."""
    names = all_names(program)
    gen = sorted(n for n in names if is_generated_name(n))
    if not gen:
        return program
    ren: dict[str, str] = {}
    taken = set(names)
    for name in gen:
        base = name.split("#", 1)[0] or "v"
        k = 1
        while f"{base}_{k}" in taken:
            k += 1
        ren[name] = f"{base}_{k}"
        taken.add(f"{base}_{k}")

    new_defs = []
    for d in program.defs:
        renamed = map_names(FunDefBlock(IntLit(0), (d,)), ren)
        assert isinstance(renamed, FunDefBlock)
        new_defs.append(renamed.defs[0])
    new_main = map_names(program.main, ren) if program.main is not None else None
    sigs = {ren.get(k, k): v for k, v in program.signatures.items()}
    return replace(
        program,
        defs=tuple(new_defs),
        main=new_main,
        signatures=sigs,
    )
