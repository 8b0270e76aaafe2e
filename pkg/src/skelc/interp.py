"""Evaluator for the language.

Two independent evaluators live here:

* an environment machine (`evaluate`, `eval_expr`) using memoised
  thunks, so sharing is call-by-need; observable results agree with
  call-by-name because the language is pure;
* a small-step rewriting interpreter (`reduce_step`,
  `normalize_by_steps`) that works on closed expressions by textual
  substitution.  It is slow and exists so the machine has something
  honest to disagree with in tests.

Skeleton intrinsics
-------------------

`farm f xs` is a plain map over an ordinary list; under the parallel
runtime it is the work-distribution point, here it is sequential.

`map w f`, `mapReduce w g f` and `mapReduce1 w g f` consume encoded
call structures: non-empty lists whose last cell is the terminal
constructor.  The image of the terminal cell is not an element like
the others; for `map` it becomes the tail of the result and for the
reduce forms it seeds the right fold.  Folding this way needs no unit
value, which is what lets base-case bodies of the source function be
absorbed into the per-cell worker.

The names farm/mapReduce/mapReduce1 are always intrinsic.  The name
map is intrinsic only in skeletonized programs; otherwise it refers to
the prelude definition.
"""

from __future__ import annotations

import sys
import threading
from functools import lru_cache
from typing import Callable, Optional

from .prelude import prelude_defs
from .syntax import (
    App,
    Clause,
    ConApp,
    ConVal,
    Closure,
    Expr,
    FunCall,
    FunDef,
    FunDefBlock,
    IntLit,
    IntVal,
    Lambda,
    Let,
    PCon,
    PVar,
    Pattern,
    Program,
    Value,
    Var,
    fresh_name,
    substitute,
)

DEFAULT_FUEL = 10**8

INTRINSIC_ARITY = {"map": 2, "mapReduce": 3, "mapReduce1": 3, "farm": 2}


class EvalError(Exception):
    """A stuck term: unmatched clause, bad primitive argument, etc."""


class FuelError(Exception):
    """The unfold budget ran out."""


# ---------------------------------------------------------------------------
# thunks and environments


class Thunk:
    __slots__ = ("fn", "value", "forced")

    def __init__(self, fn: Optional[Callable[[], Value]]):
        self.fn = fn
        self.value: Optional[Value] = None
        self.forced = False

    @staticmethod
    def of(value: Value) -> "Thunk":
        t = Thunk(None)
        t.value = value
        t.forced = True
        return t


def force(t):
    if isinstance(t, Thunk):
        if not t.forced:
            t.value = t.fn()  # type: ignore[misc]
            t.forced = True
            t.fn = None
        return t.value
    return t  # already a value


def as_thunk(x) -> Thunk:
    return x if isinstance(x, Thunk) else Thunk.of(x)


class Env:
    __slots__ = ("table", "parent")

    def __init__(self, table: dict, parent: Optional["Env"]):
        self.table = table
        self.parent = parent


def env_lookup(env: Optional[Env], name: str):
    while env is not None:
        t = env.table.get(name)
        if t is not None:
            return t
        env = env.parent
    return None


# ---------------------------------------------------------------------------
# function values


class DefVal:
    """A named function, possibly partially applied.

    home is the table used to resolve free function names in its body
    (program definitions or the prelude); env closes over local
    definition blocks and is None for top-level functions.
    """

    __slots__ = ("fundef", "env", "home", "args")

    def __init__(self, fundef: FunDef, env, home, args=()):
        self.fundef = fundef
        self.env = env
        self.home = home
        self.args = args


class PrimVal:
    __slots__ = ("op", "args")

    def __init__(self, op: str, args=()):
        self.op = op
        self.args = args


class IntrinsicVal:
    __slots__ = ("name", "args")

    def __init__(self, name: str, args=()):
        self.name = name
        self.args = args


@lru_cache(maxsize=1)
def prelude_table() -> dict:
    return {d.name: d for d in prelude_defs()}


class EvalCtx:
    __slots__ = ("defs", "skeletonized", "fuel", "hook")

    def __init__(self, defs: dict, skeletonized: bool, fuel: int, hook=None):
        self.defs = defs
        self.skeletonized = skeletonized
        self.fuel = fuel
        # optional intrinsic interceptor: hook(name, args, ctx) may return
        # a Value to take over a full skeleton application, or None to
        # leave it to the sequential definitions below
        self.hook = hook

    def tick(self):
        self.fuel -= 1
        if self.fuel < 0:
            raise FuelError("out of fuel")


# ---------------------------------------------------------------------------
# the machine


def eval_expr(e: Expr, env: Optional[Env], ctx: EvalCtx, home: dict) -> Value:
    while True:
        if isinstance(e, Var):
            t = env_lookup(env, e.name)
            if t is None:
                raise EvalError(f"unbound variable {e.name!r}")
            return force(t)
        if isinstance(e, IntLit):
            return IntVal(e.value)
        if isinstance(e, FunCall):
            v = resolve_fun(e.name, env, ctx, home)
            if isinstance(v, DefVal) and v.fundef.arity == 0:
                return dispatch_def(v, ctx)
            return v
        if isinstance(e, ConApp):
            return ConVal(
                e.con, tuple(mk_thunk(a, env, ctx, home) for a in e.args)
            )
        if isinstance(e, Lambda):
            return Closure(e.param, e.body, (env, home))
        if isinstance(e, App):
            f = eval_expr(e.fn, env, ctx, home)
            return apply_value(f, mk_thunk(e.arg, env, ctx, home), ctx)
        if isinstance(e, Let):
            frame = {
                n: mk_thunk(rhs, env, ctx, home) for n, rhs in e.bindings
            }
            env = Env(frame, env)
            e = e.body
            continue
        if isinstance(e, FunDefBlock):
            block = Env({}, env)
            for d in e.defs:
                block.table[d.name] = Thunk.of(DefVal(d, block, home))
            env = block
            e = e.body
            continue
        raise EvalError(f"cannot evaluate {type(e).__name__}")


def mk_thunk(e: Expr, env: Optional[Env], ctx: EvalCtx, home: dict) -> Thunk:
    if isinstance(e, IntLit):
        return Thunk.of(IntVal(e.value))
    if isinstance(e, Var):
        t = env_lookup(env, e.name)
        if t is None:
            raise EvalError(f"unbound variable {e.name!r}")
        return t
    return Thunk(lambda: eval_expr(e, env, ctx, home))


def resolve_fun(name: str, env: Optional[Env], ctx: EvalCtx, home: dict) -> Value:
    t = env_lookup(env, name)
    if t is not None:
        return force(t)
    d = home.get(name)
    if d is not None:
        return DefVal(d, None, home)
    if name in INTRINSIC_ARITY and (name != "map" or ctx.skeletonized):
        return IntrinsicVal(name)
    p = prelude_table().get(name)
    if p is not None:
        return DefVal(p, None, prelude_table())
    if name in ("+", "*", "++"):
        return PrimVal(name)
    raise EvalError(f"unknown function {name!r}")


def apply_value(f: Value, arg: Thunk, ctx: EvalCtx) -> Value:
    if isinstance(f, DefVal):
        args = f.args + (arg,)
        if len(args) == f.fundef.arity:
            return dispatch_def(DefVal(f.fundef, f.env, f.home, args), ctx)
        return DefVal(f.fundef, f.env, f.home, args)
    if isinstance(f, Closure):
        ctx.tick()
        env, home = f.env
        return eval_expr(f.body, Env({f.param: arg}, env), ctx, home)
    if isinstance(f, IntrinsicVal):
        args = f.args + (arg,)
        if len(args) == INTRINSIC_ARITY[f.name]:
            return apply_intrinsic(f.name, args, ctx)
        return IntrinsicVal(f.name, args)
    if isinstance(f, PrimVal):
        args = f.args + (arg,)
        if len(args) == 2:
            return apply_prim(f.op, args[0], args[1], ctx)
        return PrimVal(f.op, args)
    raise EvalError(f"value of kind {type(f).__name__} applied to an argument")


def dispatch_def(dv: DefVal, ctx: EvalCtx) -> Value:
    ctx.tick()
    d = dv.fundef
    for clause in d.clauses:
        frame: dict = {}
        if match_patterns(clause.patterns, dv.args, frame):
            return eval_expr(clause.body, Env(frame, dv.env), ctx, dv.home)
    raise EvalError(f"no clause of {d.name} matches the arguments")


def match_patterns(patterns, args, frame: dict) -> bool:
    stack = list(zip(patterns, args))
    while stack:
        p, t = stack.pop()
        if isinstance(p, PVar):
            frame[p.name] = as_thunk(t)
            continue
        v = force(t)
        if not isinstance(v, ConVal) or v.con != p.con:
            return False
        stack.extend(zip(p.args, v.args))
    return True


def apply_prim(op: str, lt: Thunk, rt: Thunk, ctx: EvalCtx) -> Value:
    ctx.tick()
    if op == "++":
        return prim_append(lt, rt, ctx)
    a = force(lt)
    b = force(rt)
    if not isinstance(a, IntVal) or not isinstance(b, IntVal):
        raise EvalError(f"({op}) needs numbers")
    return IntVal(a.value + b.value if op == "+" else a.value * b.value)


def prim_append(lt: Thunk, rt: Thunk, ctx: EvalCtx) -> Value:
    v = force(lt)
    if not isinstance(v, ConVal):
        raise EvalError("(++) needs a list")
    if v.con == "Nil":
        return force(rt)
    if v.con != "Cons":
        raise EvalError(f"(++) applied to constructor {v.con}")
    head, tail = v.args
    return ConVal(
        "Cons",
        (as_thunk(head), Thunk(lambda: prim_append(as_thunk(tail), rt, ctx))),
    )


# -- skeleton intrinsics -------------------------------------------------------


def list_cells(t: Thunk, what: str) -> list:
    """Component thunks of a list value's spine, forcing the spine only."""
    cells = []
    v = force(t)
    while True:
        if not isinstance(v, ConVal):
            raise EvalError(f"{what} needs a list")
        if v.con == "Nil":
            return cells
        if v.con != "Cons":
            raise EvalError(f"{what} applied to constructor {v.con}")
        cells.append(v.args[0])
        v = force(v.args[1])


def apply_intrinsic(name: str, args, ctx: EvalCtx) -> Value:
    ctx.tick()
    if ctx.hook is not None:
        out = ctx.hook(name, args, ctx)
        if out is not None:
            return out
    if name == "farm":
        f, xs = args
        fv = force(f)
        images = [apply_value(fv, c, ctx) for c in list_cells(xs, "farm")]
        out: Value = ConVal("Nil", ())
        for img in reversed(images):
            out = ConVal("Cons", (Thunk.of(img), Thunk.of(out)))
        return out
    if name == "map":
        w, f = args
        cells = list_cells(w, "map")
        if not cells:
            raise EvalError("map skeleton needs a non-empty call structure")
        fv = force(f)
        images = [apply_value(fv, c, ctx) for c in cells]
        out = images[-1]  # terminal image is the tail of the result
        for img in reversed(images[:-1]):
            out = ConVal("Cons", (Thunk.of(img), Thunk.of(out)))
        return out
    if name in ("mapReduce", "mapReduce1"):
        w, g, f = args
        cells = list_cells(w, name)
        if not cells:
            raise EvalError(f"{name} skeleton needs a non-empty call structure")
        fv = force(f)
        gv = force(g)
        images = [apply_value(fv, c, ctx) for c in cells]
        acc = images[-1]  # terminal image seeds the right fold
        for img in reversed(images[:-1]):
            acc = apply_value(
                apply_value(gv, Thunk.of(img), ctx), Thunk.of(acc), ctx
            )
        return acc
    raise EvalError(f"unknown intrinsic {name!r}")


# ---------------------------------------------------------------------------
# deep forcing


def deep_force(v: Value) -> Value:
    """Replace every thunk under v, rebuilding with pure values.

    Iterative; shared substructure is forced once and reused.
    """
    memo: dict[int, Value] = {}
    keep = []  # protects ids in memo from reuse by the allocator
    stack = [(force(v), False)]
    out: list[Value] = []
    while stack:
        x, ready = stack.pop()
        if isinstance(x, ConVal) and x.args:
            if ready:
                n = len(x.args)
                parts = tuple(out[len(out) - n :])
                del out[len(out) - n :]
                r = ConVal(x.con, parts)
                memo[id(x)] = r
                keep.append(x)
                out.append(r)
                continue
            got = memo.get(id(x))
            if got is not None:
                out.append(got)
                continue
            stack.append((x, True))
            # children pushed reversed so results pop back in order
            for a in reversed(x.args):
                stack.append((force(a), False))
            continue
        out.append(x)
    assert len(out) == 1
    return out[0]


# ---------------------------------------------------------------------------
# deep recursion harness


def run_deep(fn: Callable[[], Value], stack_mb: int = 512):
    """Run fn on a thread with a large stack and a raised recursion limit."""
    box: list = []
    err: list = []

    def target():
        try:
            box.append(fn())
        except BaseException as exc:  # propagated below
            err.append(exc)

    old_limit = sys.getrecursionlimit()
    old_size = threading.stack_size()
    sys.setrecursionlimit(1_000_000)
    try:
        try:
            threading.stack_size(stack_mb * 1024 * 1024)
        except (ValueError, RuntimeError):
            threading.stack_size(64 * 1024 * 1024)
        t = threading.Thread(target=target, name="skelc-eval")
        t.start()
        t.join()
    finally:
        threading.stack_size(old_size)
        sys.setrecursionlimit(old_limit)
    if err:
        raise err[0]
    return box[0]


# ---------------------------------------------------------------------------
# entry points


def make_ctx(program: Program, fuel: int = DEFAULT_FUEL) -> tuple[EvalCtx, dict]:
    home = {d.name: d for d in program.defs}
    return EvalCtx(home, program.skeletonized, fuel), home


def evaluate(program: Program, args=None, fuel: int = DEFAULT_FUEL) -> Value:
    """Run the program's main expression on the given argument values."""
    if program.main is None:
        raise EvalError("program has no main expression")
    args = list(args or [])
    if len(args) != len(program.main_params):
        raise EvalError(
            f"main takes {len(program.main_params)} arguments, got {len(args)}"
        )
    ctx, home = make_ctx(program, fuel)
    env = Env(
        {n: Thunk.of(v) for n, v in zip(program.main_params, args)}, None
    )
    return run_deep(
        lambda: deep_force(eval_expr(program.main, env, ctx, home))
    )


def evaluate_call(
    program: Program, fname: str, args, fuel: int = DEFAULT_FUEL
) -> Value:
    """Apply a named top-level function to argument values fully."""
    ctx, home = make_ctx(program, fuel)

    def go():
        v = resolve_fun(fname, None, ctx, home)
        for a in args:
            v = apply_value(v, Thunk.of(a), ctx)
        return deep_force(v)

    return run_deep(go)


def evaluate_expression(
    program: Program, e: Expr, bindings: dict, fuel: int = DEFAULT_FUEL
) -> Value:
    """Evaluate an expression with free variables bound to values."""
    ctx, home = make_ctx(program, fuel)
    env = Env({n: Thunk.of(v) for n, v in bindings.items()}, None)
    return run_deep(lambda: deep_force(eval_expr(e, env, ctx, home)))


# ---------------------------------------------------------------------------
# the rewriting stepper
#
# reduce_step finds the leftmost-outermost redex of a closed expression
# and fires it once.  Definition bodies come from a name -> FunDef
# mapping; local definition blocks stay in the term and act as scope
# overlays until their body no longer mentions them.


class _NeedStep(Exception):
    """Internal: pattern matching needs a subterm forced first."""

    def __init__(self, path):
        self.path = path  # (arg index, component path...)


def reduce_step(
    e: Expr, defs: dict, skeletonized: bool = False
) -> Optional[Expr]:
    """One leftmost-outermost rewriting step; None when e is normal."""
    return _step(e, (defs,), skeletonized)


def normalize_by_steps(
    e: Expr, defs: dict, max_steps: int = 200_000, skeletonized: bool = False
) -> Expr:
    for _ in range(max_steps):
        nxt = reduce_step(e, defs, skeletonized)
        if nxt is None:
            return e
        e = nxt
    raise FuelError(f"no normal form within {max_steps} steps")


def _scope_get(scope, name: str) -> Optional[FunDef]:
    for layer in reversed(scope):
        d = layer.get(name)
        if d is not None:
            return d
    return None


def _step(e: Expr, scope, skel: bool) -> Optional[Expr]:
    if isinstance(e, (Var, IntLit, Lambda)):
        return None
    if isinstance(e, FunCall):
        d = _scope_get(scope, e.name)
        if d is not None and d.arity == 0:
            # a zero-arity definition has exactly one clause
            return d.clauses[0].body
        return None
    if isinstance(e, ConApp):
        for i, a in enumerate(e.args):
            s = _step(a, scope, skel)
            if s is not None:
                args = list(e.args)
                args[i] = s
                return ConApp(e.con, tuple(args))
        return None
    if isinstance(e, Let):
        return substitute(e.body, {n: rhs for n, rhs in e.bindings})
    if isinstance(e, FunDefBlock):
        local = {d.name: d for d in e.defs}
        if not (_mentions(e.body, set(local))):
            return e.body
        s = _step(e.body, scope + (local,), skel)
        if s is not None:
            return FunDefBlock(s, e.defs)
        return None
    if isinstance(e, App):
        return _step_app(e, scope, skel)
    return None


def _mentions(e: Expr, names: set[str]) -> bool:
    from .syntax import free_fun_names

    return bool(free_fun_names(e) & names)


def _spine(e: Expr):
    args: list[Expr] = []
    while isinstance(e, App):
        args.append(e.arg)
        e = e.fn
    args.reverse()
    return e, args


def _respine(head: Expr, args) -> Expr:
    out = head
    for a in args:
        out = App(out, a)
    return out


def _step_args(head, args, scope, skel) -> Optional[Expr]:
    for i, a in enumerate(args):
        s = _step(a, scope, skel)
        if s is not None:
            new = list(args)
            new[i] = s
            return _respine(head, new)
    return None


def _step_app(e: App, scope, skel: bool) -> Optional[Expr]:
    head, args = _spine(e)
    if isinstance(head, Lambda):
        reduced = substitute(head.body, {head.param: args[0]})
        return _respine(reduced, args[1:])
    if isinstance(head, FunCall):
        name = head.name
        d = _scope_get(scope, name)
        if d is not None:
            return _step_def(head, d, args, scope, skel)
        if name in INTRINSIC_ARITY and (name != "map" or skel):
            return _step_intrinsic(head, name, args, scope, skel)
        p = prelude_table().get(name)
        if p is not None:
            return _step_def(head, p, args, scope, skel, prelude=True)
        if name in ("+", "*", "++"):
            return _step_prim(head, name, args, scope, skel)
        raise EvalError(f"unknown function {name!r}")
    s = _step(head, scope, skel)
    if s is not None:
        return _respine(s, args)
    return _step_args(head, args, scope, skel)


def _step_def(head, d: FunDef, args, scope, skel, prelude=False) -> Optional[Expr]:
    n = d.arity
    if len(args) < n:
        return _step_args(head, args, scope, skel)
    used, rest = args[:n], args[n:]
    undecided_path = None
    for clause in d.clauses:
        try:
            binding = _match_exprs(clause.patterns, used)
        except _NeedStep as need:
            if undecided_path is None:
                undecided_path = need.path
            continue
        if binding is None:
            continue
        fired = substitute(clause.body, binding)
        if prelude:
            # a prelude body must keep resolving against the prelude
            # even if the program defines the same names; corpus
            # programs never do, so no renaming pass is needed here
            pass
        return _respine(fired, rest)
    if undecided_path is not None:
        return _force_at(head, args, undecided_path, scope, skel)
    raise EvalError(f"no clause of {d.name} matches")


def _match_exprs(patterns, args) -> Optional[dict]:
    binding: dict = {}
    for i, (p, a) in enumerate(zip(patterns, args)):
        if not _match_one(p, a, (i,), binding):
            return None
    return binding


def _match_one(p: Pattern, a: Expr, path, binding: dict) -> bool:
    """Match one pattern against an argument expression.

    Raises _NeedStep with the path of the first subterm that is not
    yet constructor-headed but needs to be.
    """
    if isinstance(p, PVar):
        binding[p.name] = a
        return True
    assert isinstance(p, PCon)
    if not isinstance(a, ConApp):
        raise _NeedStep(path)
    if a.con != p.con:
        return False
    for j, (sp, sa) in enumerate(zip(p.args, a.args)):
        if not _match_one(sp, sa, path + (j,), binding):
            return False
    return True


def _force_at(head, args, path, scope, skel) -> Expr:
    """Step inside the argument blocking pattern matching."""

    def rebuild(e: Expr, p) -> Expr:
        if not p:
            s = _step(e, scope, skel)
            if s is None:
                raise EvalError("pattern match stuck on a normal form")
            return s
        assert isinstance(e, ConApp)
        parts = list(e.args)
        parts[p[0]] = rebuild(parts[p[0]], p[1:])
        return ConApp(e.con, tuple(parts))

    i, rest = path[0], path[1:]
    new = list(args)
    new[i] = rebuild(args[i], rest)
    return _respine(head, new)


def _step_prim(head, op, args, scope, skel) -> Optional[Expr]:
    if len(args) < 2:
        return _step_args(head, args, scope, skel)
    a, b, rest = args[0], args[1], args[2:]
    if op == "++":
        if isinstance(a, ConApp) and a.con == "Nil":
            return _respine(b, rest)
        if isinstance(a, ConApp) and a.con == "Cons":
            h, t = a.args
            return _respine(
                ConApp("Cons", (h, App(App(FunCall("++"), t), b))), rest
            )
        s = _step(a, scope, skel)
        if s is not None:
            return _respine(head, [s, b] + list(rest))
        raise EvalError("(++) needs a list")
    for i, x in enumerate((a, b)):
        if not isinstance(x, IntLit):
            s = _step(x, scope, skel)
            if s is not None:
                new = [a, b]
                new[i] = s
                return _respine(head, new + list(rest))
            raise EvalError(f"({op}) needs numbers")
    val = a.value + b.value if op == "+" else a.value * b.value
    return _respine(IntLit(val), rest)


def _head_cell(e: Expr):
    """Split a list expression into (head, tail) if constructor-headed."""
    if isinstance(e, ConApp) and e.con == "Cons":
        return e.args[0], e.args[1]
    return None


def _step_intrinsic(head, name, args, scope, skel) -> Optional[Expr]:
    arity = INTRINSIC_ARITY[name]
    if len(args) < arity:
        return _step_args(head, args, scope, skel)
    used, rest = args[:arity], args[arity:]
    if name == "farm":
        f, xs = used
        if isinstance(xs, ConApp) and xs.con == "Nil":
            return _respine(ConApp("Nil", ()), rest)
        cell = _head_cell(xs)
        if cell is not None:
            h, t = cell
            return _respine(
                ConApp(
                    "Cons", (App(f, h), App(App(FunCall("farm"), f), t))
                ),
                rest,
            )
        s = _step(xs, scope, skel)
        if s is not None:
            return _respine(head, [f, s] + list(rest))
        raise EvalError("farm needs a list")
    if name == "map":
        w, f = used
        cell = _head_cell(w)
        if cell is not None:
            h, t = cell
            if isinstance(t, ConApp) and t.con == "Nil":
                return _respine(App(f, h), rest)  # terminal image is the tail
            if _head_cell(t) is not None:
                return _respine(
                    ConApp(
                        "Cons",
                        (App(f, h), App(App(FunCall("map"), t), f)),
                    ),
                    rest,
                )
            s = _step(t, scope, skel)
            if s is not None:
                return _respine(
                    head, [ConApp("Cons", (h, s)), f] + list(rest)
                )
            raise EvalError("map skeleton needs a non-empty call structure")
        if isinstance(w, ConApp) and w.con == "Nil":
            raise EvalError("map skeleton needs a non-empty call structure")
        s = _step(w, scope, skel)
        if s is not None:
            return _respine(head, [s, f] + list(rest))
        raise EvalError("map skeleton needs a list")
    # the reduce forms
    w, g, f = used
    cell = _head_cell(w)
    if cell is not None:
        h, t = cell
        if isinstance(t, ConApp) and t.con == "Nil":
            return _respine(App(f, h), rest)  # terminal image seeds the fold
        if _head_cell(t) is not None:
            return _respine(
                App(
                    App(g, App(f, h)),
                    App(App(App(FunCall(name), t), g), f),
                ),
                rest,
            )
        s = _step(t, scope, skel)
        if s is not None:
            return _respine(
                head, [ConApp("Cons", (h, s)), g, f] + list(rest)
            )
        raise EvalError(f"{name} skeleton needs a non-empty call structure")
    if isinstance(w, ConApp) and w.con == "Nil":
        raise EvalError(f"{name} skeleton needs a non-empty call structure")
    s = _step(w, scope, skel)
    if s is not None:
        return _respine(head, [s, g, f] + list(rest))
    raise EvalError(f"{name} skeleton needs a list")


# ---------------------------------------------------------------------------
# conversions for cross-checking


def value_to_expr(v: Value) -> Expr:
    if isinstance(v, IntVal):
        return IntLit(v.value)
    if isinstance(v, ConVal):
        return ConApp(v.con, tuple(value_to_expr(force(a)) for a in v.args))
    raise EvalError("only first-order values convert to expressions")


def expr_to_value(e: Expr) -> Value:
    if isinstance(e, IntLit):
        return IntVal(e.value)
    if isinstance(e, ConApp):
        return ConVal(e.con, tuple(expr_to_value(a) for a in e.args))
    raise EvalError(f"not a value expression: {type(e).__name__}")
