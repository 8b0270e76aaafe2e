"""Turning a transition graph back into a program, with recognized
recursive structures replaced by skeleton calls.

The walk keeps a pending-argument stack: application states push their
(already rebuilt) argument and descend into the head, and whatever is
at the bottom — a variable, a definition call, a lambda — is applied to
the stack's contents.  Function states met for the first time become
fresh top-level definitions named after the state; meeting the same
state again emits a call to that name, which is what turns graph cycles
back into recursion.  A recursive function state whose clauses fit a
skeleton template becomes a wrapper definition calling the skeleton
runtime with a synthesized per-element function (and combine step), in
the shape of the hand-written parallel reference programs.

Precondition: graphs built from lambda-lifted programs.  Lifting
guarantees definition bodies close over their own clause parameters, so
hoisting the rebuilt definitions to the top level preserves scoping
(lambdas and lets are rebuilt in place and keep theirs).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .interp import INTRINSIC_ARITY
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
    binder_names,
    build_lts,
    cycles_back,
    sub_lts,
    var_actions,
)
from .matching import MatchResult, absorption_match
from .pretty import rename_generated
from .syntax import (
    PRIM_NAMES,
    Clause,
    Expr,
    FunCall,
    FunDef,
    FunDefBlock,
    IntLit,
    Lambda,
    Let,
    PCon,
    Program,
    PVar,
    Var,
    apply_spine,
    ConApp,
    fresh_name,
    substitute,
)
from .templates import SkeletonTemplate, builtin_templates


class ExtractError(Exception):
    pass


@dataclass
class ExtractResult:
    main: Expr
    defs: tuple[FunDef, ...]
    skeletonized: bool  # whether any wrapper was emitted


def residualize(
    l: Lts, templates: tuple[SkeletonTemplate, ...] = ()
) -> ExtractResult:
    """Rebuild the graph into an entry expression plus definitions."""
    ex = _Extractor(l, tuple(templates))
    main = ex.state_expr(l.start, [])
    return ExtractResult(main, tuple(ex.defs), ex.matched_any)


def extract_program(
    subject: Union[Program, Lts],
    templates: Optional[tuple[SkeletonTemplate, ...]] = None,
) -> Program:
    """Rebuild a program from its graph, replacing every recursive
    function that instantiates one of the templates with a call to the
    corresponding skeleton intrinsic.  Pass an empty tuple to rebuild
    without skeletons."""
    if templates is None:
        templates = builtin_templates()
    if isinstance(subject, Program):
        l = build_lts(subject)
        decls = subject.type_decls
        params = subject.main_params
        already = subject.skeletonized
    else:
        l = subject
        decls = ()
        params = ()
        already = False
    r = residualize(l, templates)
    out = Program(
        type_decls=decls,
        defs=r.defs,
        main=r.main,
        main_params=params,
        signatures={},
        skeletonized=already or r.skeletonized,
    )
    return rename_generated(out)


class _Extractor:
    def __init__(self, l: Lts, templates: tuple[SkeletonTemplate, ...]):
        self.l = l
        self.templates = templates
        self.rho: dict[int, str] = {}  # function state -> created name
        self.defs: list[FunDef] = []
        self.matched_any = False
        self.taken = var_actions(l) | binder_names(l)

    def _def_name(self, s: int) -> str:
        name = f"x_{s}"
        while name in self.taken:
            name += "_"
        self.taken.add(name)
        return name

    # -- main dispatch ------------------------------------------------------

    def state_expr(self, s: int, sigma: list[Expr]) -> Expr:
        if s == SINK:
            raise ExtractError("dangling transition into the sink")
        name = self.rho.get(s)
        if name is not None:
            return apply_spine(FunCall(name), sigma)
        es = self.l.out(s)
        if not es:
            raise ExtractError(f"state {s} has no transitions")
        a0 = es[0][0]
        if isinstance(a0, ClauseAct):
            return self._function(s, sigma)
        return self._structural(s, es, sigma)

    # -- structural rules ---------------------------------------------------

    def _structural(self, s: int, es, sigma: list[Expr]) -> Expr:
        a0 = es[0][0]
        if isinstance(a0, VarAct):
            base: Expr
            if a0.name in PRIM_NAMES or a0.name in INTRINSIC_ARITY:
                base = FunCall(a0.name)
            else:
                base = Var(a0.name)
            return apply_spine(base, sigma)
        if isinstance(a0, ConAct):
            if sigma:
                raise ExtractError(
                    f"constructor {a0.name} applied to {len(sigma)} extra arguments"
                )
            args = {
                a.index: t for a, t in es if isinstance(a, ArgAct)
            }
            if not args and a0.name.lstrip("-").isdigit():
                return IntLit(int(a0.name))
            built = tuple(
                self.state_expr(args[i], []) for i in range(1, len(args) + 1)
            )
            return ConApp(a0.name, built)
        if isinstance(a0, AppAct):
            head = arg = None
            for a, t in es:
                if isinstance(a, AppAct):
                    head = t
                elif isinstance(a, ArgAct) and a.index == 1:
                    arg = t
            if head is None or arg is None:
                raise ExtractError("malformed application state")
            return self.state_expr(head, [self.state_expr(arg, [])] + sigma)
        if isinstance(a0, LamAct):
            lam = Lambda(a0.param, self.state_expr(es[0][1], []))
            return apply_spine(lam, sigma)
        if isinstance(a0, (LetBodyAct, LetBindAct)):
            body = None
            binds = []
            for a, t in es:
                if isinstance(a, LetBodyAct):
                    body = t
                elif isinstance(a, LetBindAct):
                    binds.append((a.name, self.state_expr(t, [])))
            if body is None:
                raise ExtractError("let state without a body")
            let = Let(tuple(binds), self.state_expr(body, []))
            return apply_spine(let, sigma)
        raise ExtractError(f"state {s} with unexpected action {a0!r}")

    # -- function states ----------------------------------------------------

    def _function(self, s: int, sigma: list[Expr]) -> Expr:
        if self.templates and cycles_back(self.l, s):
            region = sub_lts(self.l, s)
            for t in self.templates:
                m = absorption_match(region, t)
                if m is not None:
                    return self._wrapper(s, m, sigma)
        name = self._def_name(s)
        self.rho[s] = name
        clauses = []
        for a, body in self.l.out(s):
            assert isinstance(a, ClauseAct)
            clauses.append(Clause(a.patterns, self.state_expr(body, [])))
        self.defs.append(FunDef(name, tuple(clauses)))
        return apply_spine(FunCall(name), sigma)

    def _wrapper(self, s: int, m: MatchResult, sigma: list[Expr]) -> Expr:
        name = self._def_name(s)
        self.rho[s] = name  # images may re-enter this very function
        self.matched_any = True
        w = m.parts[0].w
        plains = m.parts[0].plains

        f_name = fresh_name("f")
        f_clauses = []
        for part in m.parts:
            img = self.state_expr(part.image, [])
            for layer in reversed(part.lets):
                img = Let(
                    tuple(
                        (n, self.state_expr(rhs, []))
                        for n, rhs in layer.bindings
                    ),
                    img,
                )
            ren = {
                old: Var(new)
                for old, new in zip(part.plains, plains)
                if old != new
            }
            if ren:
                img = substitute(img, ren)
            pat = PCon(part.con, tuple(PVar(v) for v in part.cell_vars))
            f_clauses.append(Clause((pat,), img))
        locals_: list[FunDef] = [FunDef(f_name, tuple(f_clauses))]

        call_args: list[Expr] = [Var(w)]
        if m.g_state is not None:
            g_name = fresh_name("g")
            ga, gb = fresh_name("a"), fresh_name("b")
            g_expr = self.state_expr(m.g_state, [])
            locals_.append(
                FunDef(
                    g_name,
                    (
                        Clause(
                            (PVar(ga), PVar(gb)),
                            apply_spine(g_expr, [Var(ga), Var(gb)]),
                        ),
                    ),
                )
            )
            call_args.append(FunCall(g_name))
        call_args.append(FunCall(f_name))

        body = FunDefBlock(
            apply_spine(FunCall(m.template.name), call_args), tuple(locals_)
        )
        params = (PVar(w),) + tuple(PVar(p) for p in plains)
        self.defs.append(FunDef(name, (Clause(params, body),)))
        return apply_spine(FunCall(name), sigma)
