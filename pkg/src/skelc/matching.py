"""Deciding whether a recursive function's graph is an instance of a
skeleton template.

Two situations arise.  A graph rooted at an application (a template
instantiated by substitution) is matched by walking it and the template
in lockstep, binding template parameters to the sub-graphs found at
their leaves.  A graph rooted at a function definition over an encoded
call structure — every clause consuming one constructor cell from the
leading list — is matched by absorption: the per-cell computations of
all clauses fold into one case-analyzing element function, the combine
step (if any) must be identical across recursive clauses, and the
recursive spine must consume exactly the cell-list tail with the plain
parameters passed through unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .lts import (
    SINK,
    AppAct,
    ArgAct,
    ClauseAct,
    ConAct,
    LamAct,
    LetBindAct,
    LetBodyAct,
    Lts,
    VarAct,
    _actions_pair,
    _edge_partner,
    _NameMap,
    binder_names,
    function_lts,
    lts_equal,
    program_defs,
    reachable,
    sub_lts,
)
from .syntax import FunDef, PCon, PVar, Program, free_fun_names, pattern_vars
from .templates import SkeletonTemplate, builtin_templates


@dataclass(frozen=True)
class LetLayer:
    """One peeled let: binding names with the states of their bodies."""

    bindings: tuple[tuple[str, int], ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.bindings)


@dataclass(frozen=True)
class ClausePart:
    """What one clause of an absorbed candidate contributes."""

    index: int
    con: str  # cell constructor
    cell_vars: tuple[str, ...]
    w: str  # tail of the encoded list
    plains: tuple[str, ...]
    lets: tuple[LetLayer, ...]  # peeled lets wrapping the image
    image: int  # per-element computation state
    recursive: bool


@dataclass
class MatchResult:
    template: SkeletonTemplate
    theta: dict[str, Lts]
    subject: Lts
    parts: tuple[ClausePart, ...] = ()  # only absorption matches
    g_state: Optional[int] = None  # combine sub-graph (reducing)

    @property
    def absorbed(self) -> bool:
        return bool(self.parts)


# ---------------------------------------------------------------------------
# small graph queries


def _leaf_name(l: Lts, s: int) -> Optional[str]:
    es = l.out(s)
    if len(es) == 1 and isinstance(es[0][0], VarAct) and es[0][1] == SINK:
        return es[0][0].name
    return None


def _app_parts(l: Lts, s: int) -> Optional[tuple[int, int]]:
    es = l.out(s)
    if len(es) == 2:
        head = arg = None
        for a, t in es:
            if isinstance(a, AppAct):
                head = t
            elif isinstance(a, ArgAct) and a.index == 1:
                arg = t
        if head is not None and arg is not None:
            return head, arg
    return None


def _let_parts(l: Lts, s: int) -> Optional[tuple[int, LetLayer]]:
    es = l.out(s)
    body = None
    binds = []
    for a, t in es:
        if isinstance(a, LetBodyAct):
            body = t
        elif isinstance(a, LetBindAct):
            binds.append((a.name, t))
        else:
            return None
    if body is None:
        return None
    return body, LetLayer(tuple(binds))


def _cons_parts(l: Lts, s: int) -> Optional[tuple[int, int]]:
    es = l.out(s)
    if len(es) != 3:
        return None
    head = tail = None
    seen_con = False
    for a, t in es:
        if isinstance(a, ConAct) and a.name == "Cons":
            seen_con = True
        elif isinstance(a, ArgAct) and a.index == 1:
            head = t
        elif isinstance(a, ArgAct) and a.index == 2:
            tail = t
    if seen_con and head is not None and tail is not None:
        return head, tail
    return None


def _spine_args(l: Lts, s: int, root: int) -> Optional[list[int]]:
    """Argument states of an application chain ending at root, in call
    order; None when s is not such a chain."""
    args: list[int] = []
    cur = s
    while True:
        parts = _app_parts(l, cur)
        if parts is None:
            return None
        head, arg = parts
        args.append(arg)
        if head == root:
            return list(reversed(args))
        cur = head


def _occurs_free(l: Lts, s: int, name: str) -> bool:
    """Whether the named variable occurs free in the sub-graph at s."""
    seen: set[tuple[int, bool]] = set()
    stack: list[tuple[int, bool]] = [(s, False)]
    while stack:
        st, shadowed = stack.pop()
        if st == SINK or (st, shadowed) in seen:
            continue
        seen.add((st, shadowed))
        let_binds = {
            a.name for a, _ in l.out(st) if isinstance(a, LetBindAct)
        }
        for a, t in l.out(st):
            if isinstance(a, VarAct):
                if a.name == name and not shadowed:
                    return True
                continue
            sh = shadowed
            if isinstance(a, LamAct):
                sh = sh or a.param == name
            elif isinstance(a, LetBodyAct):
                sh = sh or name in let_binds
            elif isinstance(a, ClauseAct):
                sh = sh or any(
                    name in pattern_vars(p) for p in a.patterns
                )
            stack.append((t, sh))
    return False


def _var_leaf_lts(name: str) -> Lts:
    return Lts(1, {1: ((VarAct(name), SINK),)})


# ---------------------------------------------------------------------------
# candidate recognition


def cell_clause_shape(d: FunDef) -> Optional[list[tuple[str, tuple[str, ...], str, tuple[str, ...]]]]:
    """(cell con, cell vars, tail, plains) per clause when every clause
    consumes one constructor cell off a leading list; None otherwise."""
    rows = []
    cons = []
    for cl in d.clauses:
        if not cl.patterns:
            return None
        p0 = cl.patterns[0]
        if not (isinstance(p0, PCon) and p0.con == "Cons" and len(p0.args) == 2):
            return None
        cell, tail = p0.args
        if not isinstance(cell, PCon) or not isinstance(tail, PVar):
            return None
        if not all(isinstance(a, PVar) for a in cell.args):
            return None
        rest = cl.patterns[1:]
        if not all(isinstance(p, PVar) for p in rest):
            return None
        cons.append(cell.con)
        rows.append(
            (
                cell.con,
                tuple(a.name for a in cell.args),
                tail.name,
                tuple(p.name for p in rest),
            )
        )
    if len(set(cons)) != len(cons):
        return None
    return rows


def is_candidate(d: FunDef) -> bool:
    """Directly recursive definitions driven by an encoded call list."""
    if cell_clause_shape(d) is None:
        return False
    return any(d.name in free_fun_names(cl.body) for cl in d.clauses)


# ---------------------------------------------------------------------------
# absorption matching (definition-rooted subjects)


def absorption_match(l: Lts, t: SkeletonTemplate) -> Optional[MatchResult]:
    root = l.start
    clause_edges = l.out(root)
    if not clause_edges or not all(
        isinstance(a, ClauseAct) for a, _ in clause_edges
    ):
        return None

    rows = []
    for a, body in clause_edges:
        assert isinstance(a, ClauseAct)
        p0 = a.patterns[0] if a.patterns else None
        if not (isinstance(p0, PCon) and p0.con == "Cons" and len(p0.args) == 2):
            return None
        cell, tail = p0.args
        if not isinstance(cell, PCon) or not isinstance(tail, PVar):
            return None
        if not all(isinstance(x, PVar) for x in cell.args):
            return None
        rest = a.patterns[1:]
        if not all(isinstance(p, PVar) for p in rest):
            return None
        rows.append(
            (
                cell.con,
                tuple(x.name for x in cell.args),
                tail.name,
                tuple(p.name for p in rest),
                body,
            )
        )
    if len({r[0] for r in rows}) != len(rows):
        return None

    if t.name == "mapReduce1" and any(r[3] for r in rows):
        return None  # seedless fold fits only plain-free candidates

    parts: list[ClausePart] = []
    g_states: list[int] = []
    for idx, (con, cell_vars, w, plains, body) in enumerate(rows):
        # peel lets wrapping the clause body
        layers: list[LetLayer] = []
        cur = body
        while True:
            lp = _let_parts(l, cur)
            if lp is None:
                break
            cur, layer = lp
            layers.append(layer)
        let_bound = {n for layer in layers for n in layer.names}

        image = None
        rec_args = None
        g_state = None
        if t.name == "map":
            cp = _cons_parts(l, cur)
            if cp is not None:
                head, tail_state = cp
                rec_args = _spine_args(l, tail_state, root)
                image = head
        else:
            ap = _app_parts(l, cur)
            if ap is not None:
                h1, rec_state = ap
                inner = _app_parts(l, h1)
                if inner is not None:
                    g_state, image = inner
                    rec_args = _spine_args(l, rec_state, root)

        if rec_args is not None:
            # recursive form: tail and plains must pass through unchanged
            expected = (w,) + plains
            if len(rec_args) != len(expected):
                return None
            for arg_state, want in zip(rec_args, expected):
                if _leaf_name(l, arg_state) != want or want in let_bound:
                    return None
            assert image is not None
            rhs_states = [r for layer in layers for _, r in layer.bindings]
            if any(_occurs_free(l, s, w) for s in [image] + rhs_states):
                return None
            if g_state is not None:
                g_free_forbidden = {w, *cell_vars, *let_bound}
                if any(_occurs_free(l, g_state, n) for n in g_free_forbidden):
                    return None
                if root in reachable(l, g_state):
                    return None
                g_states.append(g_state)
            parts.append(
                ClausePart(idx, con, cell_vars, w, plains, tuple(layers), image, True)
            )
        else:
            # base form: the whole body is the element image and must
            # not depend on the list tail
            if _occurs_free(l, body, w):
                return None
            parts.append(ClausePart(idx, con, cell_vars, w, plains, (), body, False))

    if not any(p.recursive for p in parts):
        return None
    if t.name != "map":
        if not g_states:
            return None
        first = sub_lts(l, g_states[0])
        if any(not lts_equal(sub_lts(l, g), first) for g in g_states[1:]):
            return None

    theta: dict[str, Lts] = {
        "xs": _var_leaf_lts(parts[0].w),
        "f": _synthesized_element_fn(l, parts),
    }
    g0 = g_states[0] if g_states else None
    if g0 is not None:
        theta["g"] = sub_lts(l, g0)
    return MatchResult(t, theta, l, tuple(parts), g0)


def _synthesized_element_fn(l: Lts, parts: list[ClausePart]) -> Lts:
    """Case-analyzing per-element function as a graph: one clause per
    cell constructor, each leading to that clause's (re-wrapped) image."""
    edges = dict(l.edges)
    nid = max(list(edges) + [l.start, SINK]) + 1
    clause_edges = []
    for part in parts:
        target = part.image
        for layer in reversed(part.lets):
            edges[nid] = ((LetBodyAct(), target),) + tuple(
                (LetBindAct(n), r) for n, r in layer.bindings
            )
            target = nid
            nid += 1
        pat = PCon(part.con, tuple(PVar(v) for v in part.cell_vars))
        clause_edges.append((ClauseAct((pat,)), target))
    edges[nid] = tuple(clause_edges)
    return sub_lts(Lts(nid, edges), nid)


# ---------------------------------------------------------------------------
# generic matching (application-rooted subjects)


def _generic_match(l: Lts, t: SkeletonTemplate) -> Optional[MatchResult]:
    theta: dict[str, Lts] = {}
    names = _NameMap(binder_names(t.lts), binder_names(l))
    paired: dict[int, int] = {}
    rpaired: dict[int, int] = {}

    def walk(ts: int, ss: int, bound: frozenset) -> bool:
        if ts == SINK or ss == SINK:
            return ts == ss
        leaf = _leaf_name(t.lts, ts)
        if leaf is not None and leaf in t.params and leaf not in bound:
            found = sub_lts(l, ss)
            prev = theta.get(leaf)
            if prev is not None:
                return lts_equal(prev, found)
            theta[leaf] = found
            return True
        if ts in paired or ss in rpaired:
            return paired.get(ts) == ss and rpaired.get(ss) == ts
        paired[ts] = ss
        rpaired[ss] = ts
        tes, ses = t.lts.out(ts), l.out(ss)
        if len(tes) != len(ses):
            return False
        used: list = []
        for ta, tt in tes:
            partner = _edge_partner(
                (ta, -1), [e for e in ses if e not in used], names
            )
            if partner is None:
                return False
            sa, st = partner
            if not _actions_pair(ta, sa, names):
                return False
            used.append(partner)
            nb = bound
            if isinstance(ta, LamAct):
                nb = bound | {ta.param}
            elif isinstance(ta, LetBindAct):
                pass  # binder scopes over the body edge, handled below
            elif isinstance(ta, LetBodyAct):
                nb = bound | {
                    a.name for a, _ in tes if isinstance(a, LetBindAct)
                }
            elif isinstance(ta, ClauseAct):
                nb = bound | {
                    v for p in ta.patterns for v in pattern_vars(p)
                }
            if not walk(tt, st, nb):
                return False
        return True

    if not walk(t.lts.start, l.start, frozenset()):
        return None
    for p in t.params:
        theta.setdefault(p, _var_leaf_lts(p))
    return MatchResult(t, theta, l)


# ---------------------------------------------------------------------------
# public entry points


def _identity_theta(t: SkeletonTemplate) -> dict[str, Lts]:
    return {p: _var_leaf_lts(p) for p in t.params}


def match_template(l: Lts, t: SkeletonTemplate) -> Optional[MatchResult]:
    """θ with t's graph instantiated by θ equivalent to l, or None."""
    es = l.out(l.start)
    if es and all(isinstance(a, ClauseAct) for a, _ in es):
        def_state = t.lts.fn_states[t.name]
        if lts_equal(l, sub_lts(t.lts, def_state)):
            return MatchResult(t, _identity_theta(t), l)
        return absorption_match(l, t)
    return _generic_match(l, t)


def identify(
    program: Program, templates: Optional[tuple[SkeletonTemplate, ...]] = None
) -> list[tuple[str, Optional[str]]]:
    """(function, matched skeleton or None) for every candidate, in
    definition order."""
    if templates is None:
        templates = builtin_templates()
    table: list[tuple[str, Optional[str]]] = []
    delta = program_defs(program)
    for d in program.defs:
        if delta.get(d.name) is not d or not is_candidate(d):
            continue
        l = function_lts(program, d.name)
        found = None
        for t in templates:
            if match_template(l, t) is not None:
                found = t.name
                break
        table.append((d.name, found))
    return table
