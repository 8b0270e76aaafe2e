"""Finite transition-graph form of a program's recursive structure.

Every expression node becomes a state whose outgoing edges are labelled
with what the node is (an application, a constructor, a clause header,
...).  Function calls are memoized: the first call to f turns the call
state into f's definition state, and every later call points back at
that same state, which is how recursion shows up as cycles and why the
graph is always finite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .interp import INTRINSIC_ARITY
from .parser import intrinsic_names
from .prelude import prelude_defs
from .pretty import print_pattern
from .syntax import (
    PRIM_NAMES,
    App,
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
    Var,
    expr_size,
    pattern_vars,
)


class LtsError(Exception):
    pass


# ---------------------------------------------------------------------------
# actions

SINK = 0  # shared terminal: leaf edges end here; not counted as a state


class Action:
    __slots__ = ()


@dataclass(frozen=True)
class VarAct(Action):
    name: str


@dataclass(frozen=True)
class ConAct(Action):
    name: str


@dataclass(frozen=True)
class LamAct(Action):
    # Def-9 style lambdas are drawn as a bare λ edge; the binder name is
    # kept so matching can treat bound names as renameable
    param: str


@dataclass(frozen=True)
class AppAct(Action):
    pass


@dataclass(frozen=True)
class ArgAct(Action):
    index: int  # 1-based

    def __post_init__(self):
        if self.index < 1:
            raise LtsError("argument action index must be >= 1")


@dataclass(frozen=True)
class ClauseAct(Action):
    patterns: tuple[Pattern, ...]


@dataclass(frozen=True)
class LetBodyAct(Action):
    pass


@dataclass(frozen=True)
class LetBindAct(Action):
    name: str


Edge = tuple[Action, int]


@dataclass
class Lts:
    start: int
    edges: dict[int, tuple[Edge, ...]]
    # definition states by function name, for display and back-edge
    # annotation ("@(map)"); names may repeat across local blocks, the
    # last one wins for labelling purposes only
    fn_states: dict[str, int] = field(default_factory=dict)

    @property
    def states(self) -> set[int]:
        return set(self.edges)

    def out(self, s: int) -> tuple[Edge, ...]:
        return self.edges.get(s, ())


def action_label(a: Action) -> str:
    if isinstance(a, VarAct):
        return a.name
    if isinstance(a, ConAct):
        if a.name == "Cons":
            return "(:)"
        if a.name == "Nil":
            return "[]"
        return a.name
    if isinstance(a, LamAct):
        return "λ"
    if isinstance(a, AppAct):
        return "@"
    if isinstance(a, ArgAct):
        return f"#{a.index}"
    if isinstance(a, ClauseAct):
        return " ".join(print_pattern(p) for p in a.patterns)
    if isinstance(a, LetBodyAct):
        return "let"
    if isinstance(a, LetBindAct):
        return a.name
    raise LtsError(f"unknown action {a!r}")


# ---------------------------------------------------------------------------
# construction


def program_defs(program: Program) -> dict[str, FunDef]:
    """The definition environment a program runs under: the prelude
    shadowed by the program's own definitions, minus names the runtime
    resolves to skeleton intrinsics (the parser keeps programs from
    defining those themselves)."""
    delta = {d.name: d for d in prelude_defs()}
    delta.update({d.name: d for d in program.defs})
    for name in intrinsic_names(program.skeletonized):
        delta.pop(name, None)
    return delta


def build_lts(subject: Union[Program, Expr], defs: Optional[dict] = None) -> Lts:
    """Graph of a whole program (rooted at main's body) or of one
    expression under the given definitions."""
    if isinstance(subject, Program):
        if subject.main is None:
            raise LtsError("program has no entry point to build from")
        root_expr: Expr = subject.main
        delta = program_defs(subject)
    else:
        root_expr = subject
        delta = dict(defs) if defs else {}

    edges: dict[int, tuple[Edge, ...]] = {}
    fn_states: dict[str, int] = {}
    memo: dict[int, int] = {}  # id(FunDef) -> definition state
    counter = 0

    def fresh() -> int:
        nonlocal counter
        counter += 1
        return counter

    def go(e: Expr, env: dict[str, FunDef]) -> int:
        match e:
            case Var(name):
                s = fresh()
                edges[s] = ((VarAct(name), SINK),)
                return s
            case IntLit(value):
                s = fresh()
                edges[s] = ((ConAct(str(value)), SINK),)
                return s
            case ConApp(con, args):
                s = fresh()
                out: list[Edge] = [(ConAct(con), SINK)]
                for i, a in enumerate(args, start=1):
                    out.append((ArgAct(i), go(a, env)))
                edges[s] = tuple(out)
                return s
            case App(fn, arg):
                s = fresh()
                left = go(fn, env)
                right = go(arg, env)
                edges[s] = ((AppAct(), left), (ArgAct(1), right))
                return s
            case Lambda(param, body):
                s = fresh()
                edges[s] = ((LamAct(param), go(body, env)),)
                return s
            case Let(bindings, body):
                s = fresh()
                out = [(LetBodyAct(), go(body, env))]
                for name, rhs in bindings:
                    out.append((LetBindAct(name), go(rhs, env)))
                edges[s] = tuple(out)
                return s
            case FunDefBlock(body, local_defs):
                inner = dict(env)
                inner.update({d.name: d for d in local_defs})
                return go(body, inner)
            case FunCall(name):
                d = env.get(name)
                if d is None:
                    if name not in PRIM_NAMES and name not in INTRINSIC_ARITY:
                        raise LtsError(f"unbound function name {name!r}")
                    # primitives and skeleton intrinsics stay leaves
                    s = fresh()
                    edges[s] = ((VarAct(name), SINK),)
                    return s
                if id(d) in memo:
                    return memo[id(d)]
                s = fresh()
                memo[id(d)] = s
                fn_states[name] = s
                out = []
                for cl in d.clauses:
                    out.append((ClauseAct(tuple(cl.patterns)), go(cl.body, env)))
                edges[s] = tuple(out)
                return s
            case _:
                raise LtsError(f"cannot build transitions for {e!r}")

    start = go(root_expr, delta)
    return Lts(start, edges, fn_states)


def function_lts(program: Program, fname: str) -> Lts:
    """Graph rooted at one function's definition state; recursive calls
    cycle back to the root."""
    return build_lts(FunCall(fname), program_defs(program))


def ast_nodes(program: Program) -> int:
    """Expression-node count of the whole definition environment; the
    state count of any graph built from the program stays within it."""
    total = expr_size(program.main) if program.main is not None else 0
    for d in program_defs(program).values():
        for cl in d.clauses:
            total += 1 + expr_size(cl.body)
    return total


# ---------------------------------------------------------------------------
# traversal helpers


def reachable(l: Lts, s: int) -> set[int]:
    seen: set[int] = set()
    stack = [s]
    while stack:
        cur = stack.pop()
        if cur in seen or cur == SINK:
            continue
        seen.add(cur)
        for _, t in l.out(cur):
            stack.append(t)
    return seen


def cycles_back(l: Lts, s: int) -> bool:
    """True when some path from s re-enters s (the Def-12 guard)."""
    for st in reachable(l, s):
        for _, t in l.out(st):
            if t == s:
                return True
    return False


def sub_lts(l: Lts, s: int) -> Lts:
    keep = reachable(l, s)
    return Lts(
        s,
        {st: l.edges[st] for st in keep},
        {n: st for n, st in l.fn_states.items() if st in keep},
    )


def var_actions(l: Lts) -> set[str]:
    out: set[str] = set()
    for es in l.edges.values():
        for a, _ in es:
            if isinstance(a, VarAct):
                out.add(a.name)
    return out


def binder_names(l: Lts) -> set[str]:
    out: set[str] = set()
    for es in l.edges.values():
        for a, _ in es:
            if isinstance(a, LamAct):
                out.add(a.param)
            elif isinstance(a, LetBindAct):
                out.add(a.name)
            elif isinstance(a, ClauseAct):
                for p in a.patterns:
                    out.update(pattern_vars(p))
    return out


def free_names(l: Lts) -> set[str]:
    return var_actions(l) - binder_names(l)


# ---------------------------------------------------------------------------
# equality modulo state labels and bound-variable names


def _pattern_shape(p: Pattern) -> str:
    if isinstance(p, PVar):
        return "_"
    assert isinstance(p, PCon)
    return "(" + p.con + " " + " ".join(_pattern_shape(a) for a in p.args) + ")"


def _clause_key(a: ClauseAct) -> str:
    return "|".join(_pattern_shape(p) for p in a.patterns)


class _NameMap:
    """Bijection over renameable (bound) names; all others must agree."""

    def __init__(self, bound1: set[str], bound2: set[str]):
        self.bound1 = bound1
        self.bound2 = bound2
        self.fwd: dict[str, str] = {}
        self.bwd: dict[str, str] = {}

    def pair(self, a: str, b: str) -> bool:
        if (a in self.bound1) != (b in self.bound2):
            return False
        if a not in self.bound1:
            return a == b
        if a in self.fwd:
            return self.fwd[a] == b
        if b in self.bwd:
            return False
        self.fwd[a] = b
        self.bwd[b] = a
        return True


def _pair_patterns(ps1, ps2, names: _NameMap) -> bool:
    if len(ps1) != len(ps2):
        return False
    for p1, p2 in zip(ps1, ps2):
        if isinstance(p1, PVar) != isinstance(p2, PVar):
            return False
        if isinstance(p1, PVar):
            if not names.pair(p1.name, p2.name):
                return False
        else:
            if p1.con != p2.con:
                return False
            if not _pair_patterns(p1.args, p2.args, names):
                return False
    return True


def _actions_pair(a1: Action, a2: Action, names: _NameMap) -> bool:
    if type(a1) is not type(a2):
        return False
    if isinstance(a1, VarAct):
        return names.pair(a1.name, a2.name)
    if isinstance(a1, ConAct):
        return a1.name == a2.name
    if isinstance(a1, LamAct):
        return names.pair(a1.param, a2.param)
    if isinstance(a1, ArgAct):
        return a1.index == a2.index
    if isinstance(a1, LetBindAct):
        return names.pair(a1.name, a2.name)
    if isinstance(a1, ClauseAct):
        return _pair_patterns(a1.patterns, a2.patterns, names)
    return True  # AppAct, LetBodyAct


def _edge_partner(e1: Edge, candidates: Iterable[Edge], names: _NameMap):
    """The unique out-edge matching e1's action, if any.  Distinct
    actions per state make this deterministic; same-typed clause edges
    are disambiguated by pattern shape."""
    a1, _ = e1
    for a2, t2 in candidates:
        if type(a2) is not type(a1):
            continue
        if isinstance(a1, ArgAct) and a1.index != a2.index:
            continue
        if isinstance(a1, ConAct) and a1.name != a2.name:
            continue
        if isinstance(a1, ClauseAct) and _clause_key(a1) != _clause_key(a2):
            continue
        if isinstance(a1, LetBindAct):
            mapped = names.fwd.get(a1.name)
            if mapped is not None and mapped != a2.name:
                continue
        return (a2, t2)
    return None


def lts_equal(l1: Lts, l2: Lts) -> bool:
    """Rooted isomorphism modulo state labels and bound-variable names;
    free names and constructor names must coincide."""
    names = _NameMap(binder_names(l1), binder_names(l2))
    paired: dict[int, int] = {}
    rpaired: dict[int, int] = {}
    work = [(l1.start, l2.start)]
    while work:
        s1, s2 = work.pop()
        if s1 == SINK or s2 == SINK:
            if s1 != s2:
                return False
            continue
        if s1 in paired or s2 in rpaired:
            if paired.get(s1) != s2 or rpaired.get(s2) != s1:
                return False
            continue
        paired[s1] = s2
        rpaired[s2] = s1
        es1, es2 = l1.out(s1), l2.out(s2)
        if len(es1) != len(es2):
            return False
        used = []
        for e1 in es1:
            partner = _edge_partner(e1, (e for e in es2 if e not in used), names)
            if partner is None:
                return False
            if not _actions_pair(e1[0], partner[0], names):
                return False
            used.append(partner)
            work.append((e1[1], partner[1]))
    return True


# ---------------------------------------------------------------------------
# substitution


def lts_substitute(l: Lts, theta: dict[str, Lts]) -> Lts:
    """Replace each leaf s -(x)-> 0 with theta[x], renaming binders in l
    that would capture a free name of a grafted graph."""
    if not theta:
        return Lts(l.start, dict(l.edges), dict(l.fn_states))

    # renaming binders that share a name with the substituted variables
    # (or with anything free in the grafted graphs) leaves exactly the
    # free occurrences of dom(theta) to be replaced
    incoming = set(theta)
    for sub in theta.values():
        incoming |= free_names(sub)
    clashes = binder_names(l) & incoming
    body = _rename_binders(l, clashes) if clashes else l

    edges = dict(body.edges)
    fn_states = dict(body.fn_states)
    next_id = max(list(edges) + [body.start, SINK]) + 1

    def graft(sub: Lts, at: int) -> None:
        nonlocal next_id
        remap = {sub.start: at, SINK: SINK}
        for st in sub.edges:
            if st not in remap:
                remap[st] = next_id
                next_id += 1
        for st, es in sub.edges.items():
            edges[remap[st]] = tuple((a, remap[t]) for a, t in es)
        for n, st in sub.fn_states.items():
            if st in remap:
                fn_states.setdefault(n, remap[st])

    for s, es in list(edges.items()):
        if len(es) == 1 and isinstance(es[0][0], VarAct) and es[0][1] == SINK:
            sub = theta.get(es[0][0].name)
            if sub is not None:
                graft(sub, s)

    return Lts(body.start, edges, fn_states)


def _rename_pattern(p: Pattern, ren: dict[str, str]) -> Pattern:
    if isinstance(p, PVar):
        return PVar(ren.get(p.name, p.name))
    assert isinstance(p, PCon)
    return PCon(p.con, tuple(_rename_pattern(a, ren) for a in p.args))


def _rename_binders(l: Lts, names: set[str]) -> Lts:
    """Rename the given names at their binding sites and at the
    occurrences those sites bind; free occurrences keep their name.

    Every state stems from one expression node with a single static
    scope (function states are shared between call sites but their
    scope is the definition's own), so one rename decision per state is
    well defined and a first-visit walk is consistent.
    """
    taken = var_actions(l) | binder_names(l)
    ren: dict[str, str] = {}
    for n in sorted(names):
        fresh = n + "'"
        while fresh in taken:
            fresh += "'"
        ren[n] = fresh
        taken.add(fresh)

    new_edges: dict[int, tuple[Edge, ...]] = {}
    seen: set[int] = set()

    def visit(s: int, env: frozenset) -> None:
        if s == SINK or s in seen:
            return
        seen.add(s)
        out: list[Edge] = []
        for a, t in l.out(s):
            na = a
            tenv = env
            if isinstance(a, VarAct):
                if a.name in env:
                    na = VarAct(ren[a.name])
            elif isinstance(a, LamAct):
                if a.param in names:
                    na = LamAct(ren[a.param])
                    tenv = env | {a.param}
            elif isinstance(a, LetBindAct):
                # the binding scopes over the body edge, not its own rhs
                if a.name in names:
                    na = LetBindAct(ren[a.name])
            elif isinstance(a, LetBodyAct):
                bound = {
                    b.name for b, _ in l.out(s) if isinstance(b, LetBindAct)
                }
                tenv = env | (bound & names)
            elif isinstance(a, ClauseAct):
                pv = {v for p in a.patterns for v in pattern_vars(p)}
                hit = pv & names
                if hit:
                    na = ClauseAct(
                        tuple(_rename_pattern(p, ren) for p in a.patterns)
                    )
                tenv = env | hit
            out.append((na, t))
            visit(t, tenv)
        new_edges[s] = tuple(out)

    visit(l.start, frozenset())
    return Lts(
        l.start,
        new_edges,
        {n: st for n, st in l.fn_states.items() if st in new_edges},
    )


# ---------------------------------------------------------------------------
# DOT output


def to_dot(l: Lts, title: str = "lts") -> str:
    state_of = {s: n for n, s in l.fn_states.items()}
    lines = [
        f'digraph "{title}" {{',
        "  rankdir=TB;",
        '  node [shape=circle, label="", width=0.18, fixedsize=true];',
        f"  s{l.start} [shape=doublecircle];",
    ]
    sink_n = 0
    for s in sorted(l.edges):
        for a, t in l.out(s):
            label = action_label(a)
            if isinstance(a, AppAct) and t in state_of:
                label = f"@({state_of[t]})"
            label = label.replace("\\", "\\\\").replace('"', '\\"')
            if t == SINK:
                sink_n += 1
                lines.append(f"  z{sink_n} [shape=point];")
                lines.append(f'  s{s} -> z{sink_n} [label="{label}"];')
            else:
                lines.append(f'  s{s} -> s{t} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
