"""Abstract syntax for the source language.

The language is a small higher-order functional language: integers with
+ and *, user data types, pattern-matching function definitions whose
clauses match a leading prefix of the argument list, lambdas, lets and
nested function-definition blocks (where-blocks).  Lists are ordinary
data (Nil/Cons) with [] and (x:xs) as surface sugar; ++ is list append.

Everything here is a frozen dataclass so expressions can be hashed,
shared and compared structurally.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Any, Iterator, Optional


# ---------------------------------------------------------------------------
# expressions


class Expr:
    """Base class for expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Var(Expr):
    """A variable occurrence (bound or free)."""

    name: str


@dataclass(frozen=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True)
class ConApp(Expr):
    """Saturated constructor application, e.g. Cons h t."""

    con: str
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class FunCall(Expr):
    """Reference to a named function (definition, builtin or primitive)."""

    name: str


@dataclass(frozen=True)
class App(Expr):
    fn: Expr
    arg: Expr


@dataclass(frozen=True)
class Lambda(Expr):
    param: str
    body: Expr


@dataclass(frozen=True)
class Let(Expr):
    """Non-recursive let; all bindings are in scope only in the body."""

    bindings: tuple[tuple[str, Expr], ...]
    body: Expr


@dataclass(frozen=True)
class FunDefBlock(Expr):
    """An expression with locally defined functions (a where-block).

    The defined names are in scope in the body and, mutually, in every
    local definition.
    """

    body: Expr
    defs: tuple["FunDef", ...]


# ---------------------------------------------------------------------------
# patterns and definitions


class Pattern:
    __slots__ = ()


@dataclass(frozen=True)
class PVar(Pattern):
    name: str


@dataclass(frozen=True)
class PCon(Pattern):
    con: str
    args: tuple[Pattern, ...] = ()


@dataclass(frozen=True)
class Clause:
    patterns: tuple[Pattern, ...]
    body: Expr


@dataclass(frozen=True)
class FunDef:
    """A function given by one or more pattern-matching clauses.

    Every clause has the same number of patterns.  Positions holding a
    constructor pattern in at least one clause are "matched" positions;
    the remaining all-variable positions are plain parameters.
    """

    name: str
    clauses: tuple[Clause, ...]

    @property
    def arity(self) -> int:
        return len(self.clauses[0].patterns)

    def matched_positions(self) -> list[int]:
        """Indices (0-based) where some clause has a constructor pattern."""
        return [
            i
            for i in range(self.arity)
            if any(isinstance(c.patterns[i], PCon) for c in self.clauses)
        ]

    def is_plain_position(self, i: int) -> bool:
        return all(isinstance(c.patterns[i], PVar) for c in self.clauses)


# ---------------------------------------------------------------------------
# types (used for data declarations and optional signatures only; there
# is no type checker)


class TypeExpr:
    __slots__ = ()


@dataclass(frozen=True)
class TVar(TypeExpr):
    name: str


@dataclass(frozen=True)
class TCon(TypeExpr):
    name: str
    args: tuple[TypeExpr, ...] = ()


@dataclass(frozen=True)
class TFun(TypeExpr):
    arg: TypeExpr
    res: TypeExpr


INT_TYPE = TCon("Int")
LIST_TYPE_NAME = "List"


def list_type(elem: TypeExpr) -> TCon:
    return TCon(LIST_TYPE_NAME, (elem,))


@dataclass(frozen=True)
class TypeDecl:
    """A data declaration: name, parameters and constructor alternatives."""

    name: str
    params: tuple[str, ...]
    constructors: tuple[tuple[str, tuple[TypeExpr, ...]], ...]

    def constructor_names(self) -> list[str]:
        return [c for c, _ in self.constructors]


LIST_DECL = TypeDecl(
    LIST_TYPE_NAME,
    ("a",),
    (
        ("Nil", ()),
        ("Cons", (TVar("a"), TCon(LIST_TYPE_NAME, (TVar("a"),)))),
    ),
)


# ---------------------------------------------------------------------------
# programs


PRIM_NAMES = ("+", "*", "++")


@dataclass
class Program:
    """A parsed program: data declarations, definitions and an entry body.

    The entry point is stored as ``main`` (an expression) together with
    ``main_params``, the parameter names the surface syntax attached to
    it; ``main`` is the body only, not a lambda chain.  ``skeletonized``
    marks programs whose map/mapReduce/mapReduce1/farm calls refer to
    the runtime skeleton intrinsics rather than ordinary definitions.
    """

    type_decls: tuple[TypeDecl, ...] = ()
    defs: tuple[FunDef, ...] = ()
    main: Optional[Expr] = None
    main_params: tuple[str, ...] = ()
    signatures: dict[str, TypeExpr] = field(default_factory=dict)
    skeletonized: bool = False

    def def_named(self, name: str) -> Optional[FunDef]:
        for d in self.defs:
            if d.name == name:
                return d
        return None

    def def_names(self) -> list[str]:
        return [d.name for d in self.defs]

    def constructor_table(self) -> dict[str, tuple[TypeDecl, tuple[TypeExpr, ...]]]:
        """Map constructor name to (owning decl, component types)."""
        table: dict[str, tuple[TypeDecl, tuple[TypeExpr, ...]]] = {}
        for decl in (LIST_DECL,) + tuple(self.type_decls):
            for con, comps in decl.constructors:
                table[con] = (decl, comps)
        return table

    def with_defs(self, defs: tuple[FunDef, ...]) -> "Program":
        return replace(self, defs=defs)


# ---------------------------------------------------------------------------
# fresh names

_fresh_counter = itertools.count(1)


def fresh_name(base: str) -> str:
    """A globally fresh name.  '#' is rejected by the lexer in source
    code, so generated names can never collide with user names."""
    base = base.split("#", 1)[0]
    return f"{base}#{next(_fresh_counter)}"


def is_generated_name(name: str) -> bool:
    return "#" in name


# ---------------------------------------------------------------------------
# traversals


def children(e: Expr) -> tuple[Expr, ...]:
    match e:
        case App(fn, arg):
            return (fn, arg)
        case Lambda(_, body):
            return (body,)
        case ConApp(_, args):
            return args
        case Let(bindings, body):
            return tuple(b for _, b in bindings) + (body,)
        case FunDefBlock(body, defs):
            return (body,) + tuple(c.body for d in defs for c in d.clauses)
        case _:
            return ()


def walk(e: Expr) -> Iterator[Expr]:
    """Preorder traversal of an expression and all nested clause bodies."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def expr_size(e: Expr) -> int:
    return sum(1 for _ in walk(e))


def pattern_vars(p: Pattern) -> list[str]:
    """Variables of a pattern in left-to-right order."""
    match p:
        case PVar(name):
            return [name]
        case PCon(_, args):
            out: list[str] = []
            for a in args:
                out.extend(pattern_vars(a))
            return out
    raise TypeError(p)


def pattern_size(p: Pattern) -> int:
    match p:
        case PVar(_):
            return 1
        case PCon(_, args):
            return 1 + sum(pattern_size(a) for a in args)
    raise TypeError(p)


def clause_bound_vars(clause: Clause) -> list[str]:
    out: list[str] = []
    for p in clause.patterns:
        out.extend(pattern_vars(p))
    return out


# ---------------------------------------------------------------------------
# free variables


def free_vars(e: Expr) -> set[str]:
    return set(free_vars_ordered(e))


def free_vars_ordered(e: Expr) -> list[str]:
    """Free variables in first-occurrence (preorder) order.

    Function names referenced by FunCall are not variables and are not
    reported here; see free_fun_names.
    """
    out: list[str] = []
    seen: set[str] = set()

    def go(node: Expr, bound: frozenset[str]) -> None:
        match node:
            case Var(name):
                if name not in bound and name not in seen:
                    seen.add(name)
                    out.append(name)
            case Lambda(param, body):
                go(body, bound | {param})
            case Let(bindings, body):
                for _, rhs in bindings:
                    go(rhs, bound)
                go(body, bound | {n for n, _ in bindings})
            case FunDefBlock(body, defs):
                for d in defs:
                    for c in d.clauses:
                        go(c.body, bound | set(clause_bound_vars(c)))
                go(body, bound)
            case _:
                for child in children(node):
                    go(child, bound)

    go(e, frozenset())
    return out


def free_fun_names(e: Expr) -> set[str]:
    """FunCall targets not bound by an enclosing FunDefBlock."""
    out: set[str] = set()

    def go(node: Expr, bound: frozenset[str]) -> None:
        match node:
            case FunCall(name):
                if name not in bound:
                    out.add(name)
            case FunDefBlock(body, defs):
                inner = bound | {d.name for d in defs}
                go(body, inner)
                for d in defs:
                    for c in d.clauses:
                        go(c.body, inner)
            case _:
                for child in children(node):
                    go(child, bound)

    go(e, frozenset())
    return out


def clause_free_vars(clause: Clause) -> list[str]:
    bound = set(clause_bound_vars(clause))
    return [v for v in free_vars_ordered(clause.body) if v not in bound]


def def_free_vars(d: FunDef) -> list[str]:
    """Variables free in some clause body and not bound by its patterns."""
    out: list[str] = []
    for c in d.clauses:
        for v in clause_free_vars(c):
            if v not in out:
                out.append(v)
    return out


# ---------------------------------------------------------------------------
# substitution


def substitute(e: Expr, mapping: dict[str, Expr]) -> Expr:
    """Capture-avoiding substitution of variables.

    Binders that would capture a free variable of a substituted
    expression are renamed with fresh names.
    """
    if not mapping:
        return e
    danger = set()
    for repl in mapping.values():
        danger |= free_vars(repl)

    def rename_pattern(p: Pattern, ren: dict[str, str]) -> Pattern:
        match p:
            case PVar(name):
                return PVar(ren.get(name, name))
            case PCon(con, args):
                return PCon(con, tuple(rename_pattern(a, ren) for a in args))
        raise TypeError(p)

    def go(node: Expr, m: dict[str, Expr]) -> Expr:
        if not m:
            return node
        match node:
            case Var(name):
                return m.get(name, node)
            case IntLit() | FunCall():
                return node
            case App(fn, arg):
                return App(go(fn, m), go(arg, m))
            case ConApp(con, args):
                return ConApp(con, tuple(go(a, m) for a in args))
            case Lambda(param, body):
                m2 = {k: v for k, v in m.items() if k != param}
                if param in danger and any(param in free_vars(v) for v in m2.values()):
                    new = fresh_name(param)
                    body = go(body, {param: Var(new)})
                    param = new
                return Lambda(param, go(body, m2))
            case Let(bindings, body):
                new_rhs = tuple((n, go(rhs, m)) for n, rhs in bindings)
                names = [n for n, _ in bindings]
                m2 = {k: v for k, v in m.items() if k not in names}
                ren: dict[str, Expr] = {}
                out_names = []
                for n in names:
                    if n in danger and any(n in free_vars(v) for v in m2.values()):
                        nn = fresh_name(n)
                        ren[n] = Var(nn)
                        out_names.append(nn)
                    else:
                        out_names.append(n)
                if ren:
                    body = go(body, ren)
                return Let(
                    tuple((out_names[i], rhs) for i, (_, rhs) in enumerate(new_rhs)),
                    go(body, m2),
                )
            case FunDefBlock(body, defs):
                new_defs = []
                for d in defs:
                    new_clauses = []
                    for c in d.clauses:
                        bound = set(clause_bound_vars(c))
                        m2 = {k: v for k, v in m.items() if k not in bound}
                        clash = {
                            b
                            for b in bound
                            if b in danger and any(b in free_vars(v) for v in m2.values())
                        }
                        pats, cbody = c.patterns, c.body
                        if clash:
                            ren_map = {b: fresh_name(b) for b in clash}
                            pats = tuple(rename_pattern(p, ren_map) for p in pats)
                            cbody = go(cbody, {b: Var(n) for b, n in ren_map.items()})
                        new_clauses.append(Clause(pats, go(cbody, m2)))
                    new_defs.append(FunDef(d.name, tuple(new_clauses)))
                return FunDefBlock(go(body, m), tuple(new_defs))
        raise TypeError(node)

    return go(e, dict(mapping))


# ---------------------------------------------------------------------------
# convenience constructors


def apply_spine(head: Expr, args: list[Expr] | tuple[Expr, ...]) -> Expr:
    out = head
    for a in args:
        out = App(out, a)
    return out


def spine_parts(e: Expr) -> tuple[Expr, list[Expr]]:
    """Decompose nested applications into (head, [args])."""
    args: list[Expr] = []
    while isinstance(e, App):
        args.append(e.arg)
        e = e.fn
    args.reverse()
    return e, args


def prim(name: str, a: Expr, b: Expr) -> Expr:
    return App(App(FunCall(name), a), b)


def nil() -> ConApp:
    return ConApp("Nil")


def cons(h: Expr, t: Expr) -> ConApp:
    return ConApp("Cons", (h, t))


def list_expr(items: list[Expr] | tuple[Expr, ...]) -> Expr:
    out: Expr = nil()
    for item in reversed(items):
        out = cons(item, out)
    return out


def lambdas(params: tuple[str, ...] | list[str], body: Expr) -> Expr:
    for p in reversed(list(params)):
        body = Lambda(p, body)
    return body


# ---------------------------------------------------------------------------
# values


class Value:
    __slots__ = ()


@dataclass(frozen=True)
class IntVal(Value):
    value: int


@dataclass(frozen=True)
class ConVal(Value):
    con: str
    args: tuple["Value", ...] = ()


@dataclass(frozen=True)
class Closure(Value):
    """A lambda value with its captured environment."""

    param: str
    body: Expr
    env: Any = None


def value_size(v: Value) -> int:
    n = 0
    stack = [v]
    while stack:
        x = stack.pop()
        n += 1
        if isinstance(x, ConVal):
            stack.extend(x.args)
    return n


def values_equal(a: Value, b: Value) -> bool:
    """Structural equality, iterative so long list values are safe.

    Function values (closures and friends) compare by identity only.
    """
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x is y:
            continue
        if isinstance(x, IntVal) and isinstance(y, IntVal):
            if x.value != y.value:
                return False
            continue
        if isinstance(x, ConVal) and isinstance(y, ConVal):
            if x.con != y.con or len(x.args) != len(y.args):
                return False
            stack.extend(zip(x.args, y.args))
            continue
        return False
    return True


def value_to_list(v: Value) -> list[Value]:
    """Spine of a Nil/Cons value as a Python list."""
    out = []
    while True:
        if not isinstance(v, ConVal):
            raise ValueError(f"not a list value: {v!r}")
        if v.con == "Nil":
            return out
        if v.con != "Cons":
            raise ValueError(f"not a list value: constructor {v.con}")
        out.append(v.args[0])
        v = v.args[1]


def list_to_value(items: list[Value]) -> Value:
    out: Value = ConVal("Nil")
    for item in reversed(items):
        out = ConVal("Cons", (item, out))
    return out


def int_list_value(items: list[int]) -> Value:
    return list_to_value([IntVal(i) for i in items])


def matrix_value(rows: list[list[int]]) -> Value:
    return list_to_value([int_list_value(r) for r in rows])


def value_to_matrix(v: Value) -> list[list[int]]:
    rows = []
    for row in value_to_list(v):
        rows.append([x.value for x in value_to_list(row)])  # type: ignore[union-attr]
    return rows
