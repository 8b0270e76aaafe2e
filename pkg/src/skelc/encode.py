"""Input encoding: one cons list drives each recursive function.

For a directly recursive top-level function f whose pattern-matched
inputs form a leading prefix of its parameters, three things are
derived:

  - a sum type T_f with one constructor per clause, whose components
    are the values that clause consumes outside the recursion;
  - encode_f, which destructures the matched inputs exactly as f does
    and linearizes one chosen recursion spine into a list of cells;
  - f', which pattern matches cells instead of the original inputs.

Every call to f anywhere in the program then becomes
f' (encode_f matched-args) plain-args, and the chosen self-call inside
f's own body becomes f' w plain-args, where w is the rest of the cell
list.  When a clause has several self-calls the syntactically last one
drives the list; the earlier ones are re-encoded at run time, which
keeps them correct at the cost of re-running encode_f on their
arguments.

Captured components are ordered by their position inside the pattern
first and by pattern index second, so matching depths across different
arguments sit together: dotP's third clause captures x y xt1 yt1, not
x xt1 y yt1.

Constructor names are C_<f>_<k> and the cell list parameter is w, both
uniqued against the program when taken.  Component types come from the
function's signature where one exists; anything underivable is typed
by the opaque parameter a (types are documentation downstream, nothing
checks them).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .interp import DEFAULT_FUEL, EvalError, FuelError, evaluate
from .prelude import prelude_names
from .pretty import print_expr, print_type
from .syntax import (
    App,
    Clause,
    ConApp,
    ConVal,
    Expr,
    FunCall,
    FunDef,
    FunDefBlock,
    IntLit,
    IntVal,
    Lambda,
    Let,
    LIST_DECL,
    Pattern,
    PCon,
    Program,
    PVar,
    TCon,
    TFun,
    TVar,
    TypeDecl,
    TypeExpr,
    Value,
    Var,
    apply_spine,
    free_vars,
    list_to_value,
    list_type,
    spine_parts,
    values_equal,
)


class EncodeError(Exception):
    """The program falls outside what the encoding pass can rewrite."""


# ---------------------------------------------------------------------------
# shape analysis


@dataclass(frozen=True)
class ClauseShape:
    """What one clause contributes to the encoding of its function."""

    index: int
    matched_patterns: tuple[Pattern, ...]
    chosen_args: Optional[tuple[Expr, ...]]
    captured: tuple[str, ...]


@dataclass(frozen=True)
class RecursiveShape:
    fname: str
    matched: int
    plains: tuple[str, ...]
    clauses: tuple[ClauseShape, ...]


def pattern_vars_with_paths(p: Pattern, path: tuple[int, ...] = ()):
    if isinstance(p, PVar):
        yield p.name, path
        return
    for i, sub in enumerate(p.args):
        yield from pattern_vars_with_paths(sub, path + (i,))


def classify_inputs(d: FunDef) -> tuple[int, int]:
    """Split parameters into the matched prefix and the plain rest.

    Raises EncodeError if a constructor pattern appears after the first
    all-variable position, since then the plain parameters cannot be
    kept as ordinary arguments of f'.
    """
    arity = len(d.clauses[0].patterns)
    is_matched = [
        any(not isinstance(cl.patterns[i], PVar) for cl in d.clauses)
        for i in range(arity)
    ]
    m = 0
    while m < arity and is_matched[m]:
        m += 1
    if any(is_matched[m:]):
        raise EncodeError(
            f"{d.name}: pattern-matched argument follows a plain one; "
            "matched inputs must form a leading prefix"
        )
    return m, arity - m


def _self_call_spines(e: Expr, fname: str) -> list[tuple[Expr, list[Expr]]]:
    """Maximal call spines of fname, in source order."""
    out: list[tuple[Expr, list[Expr]]] = []

    def walk(node: Expr) -> None:
        head, args = spine_parts(node)
        if isinstance(head, FunCall) and head.name == fname:
            out.append((node, args))
            for a in args:
                walk(a)
            return
        if isinstance(node, App):
            walk(node.fn)
            walk(node.arg)
        elif isinstance(node, Lambda):
            walk(node.body)
        elif isinstance(node, Let):
            for _, rhs in node.bindings:
                walk(rhs)
            walk(node.body)
        elif isinstance(node, FunDefBlock):
            for dd in node.defs:
                for cl in dd.clauses:
                    walk(cl.body)
            walk(node.body)
        elif isinstance(node, ConApp):
            for a in node.args:
                walk(a)

    walk(e)
    # drop spines nested inside another self-call's arguments: replacing
    # those with f' w would leave w free inside a copied argument
    maximal: list[tuple[Expr, list[Expr]]] = []
    seen_args: list[Expr] = []

    def contains(container: Expr, node: Expr) -> bool:
        if container is node:
            return True
        kids: tuple[Expr, ...] = ()
        if isinstance(container, App):
            kids = (container.fn, container.arg)
        elif isinstance(container, Lambda):
            kids = (container.body,)
        elif isinstance(container, Let):
            kids = tuple(r for _, r in container.bindings) + (container.body,)
        elif isinstance(container, FunDefBlock):
            kids = tuple(cl.body for dd in container.defs for cl in dd.clauses)
            kids += (container.body,)
        elif isinstance(container, ConApp):
            kids = container.args
        return any(contains(k, node) for k in kids)

    for node, args in out:
        if any(contains(held, node) for held in seen_args):
            continue
        maximal.append((node, args))
        seen_args.extend(args)
    return maximal


def _replace_node(e: Expr, target: Expr, replacement: Expr) -> Expr:
    """Swap one node, located by identity, for another."""
    if e is target:
        return replacement

    def go(node: Expr) -> Expr:
        if node is target:
            return replacement
        if isinstance(node, App):
            return App(go(node.fn), go(node.arg))
        if isinstance(node, Lambda):
            return Lambda(node.param, go(node.body))
        if isinstance(node, Let):
            return Let(
                tuple((n, go(r)) for n, r in node.bindings), go(node.body)
            )
        if isinstance(node, FunDefBlock):
            defs = tuple(
                FunDef(
                    dd.name,
                    tuple(Clause(cl.patterns, go(cl.body)) for cl in dd.clauses),
                )
                for dd in node.defs
            )
            return FunDefBlock(go(node.body), defs)
        if isinstance(node, ConApp):
            return ConApp(node.con, tuple(go(a) for a in node.args))
        return node

    return go(e)


def extract_shape(d: FunDef) -> RecursiveShape:
    """Pick each clause's driving self-call and its captured values."""
    m, _ = classify_inputs(d)
    plains = tuple(
        p.name  # type: ignore[union-attr]
        for p in d.clauses[0].patterns[m:]
    )
    clauses = []
    for k, cl in enumerate(d.clauses):
        matched = cl.patterns[:m]
        spines = _self_call_spines(cl.body, d.name)
        chosen = spines[-1] if spines else None
        if chosen is not None and len(chosen[1]) < len(cl.patterns):
            raise EncodeError(
                f"{d.name}: clause {k + 1} applies {d.name} to fewer "
                "arguments than its arity"
            )
        ordered = sorted(
            (
                (path, pat_idx, name)
                for pat_idx, p in enumerate(matched)
                for name, path in pattern_vars_with_paths(p)
            ),
            key=lambda t: (t[0], t[1]),
        )
        if chosen is None:
            used = free_vars(cl.body)
        else:
            # everything the rewritten body will still mention: the
            # context around the hole plus the chosen call's plain
            # arguments, which are kept verbatim after f' w
            rest = _replace_node(cl.body, chosen[0], Var("#hole"))
            used = free_vars(rest) - {"#hole"}
            for a in chosen[1][m:]:
                used |= free_vars(a)
        captured = tuple(
            name for _, _, name in ordered if name in used and name not in plains
        )
        clauses.append(
            ClauseShape(
                index=k,
                matched_patterns=tuple(matched),
                chosen_args=tuple(chosen[1]) if chosen else None,
                captured=captured,
            )
        )
    return RecursiveShape(d.name, m, plains, tuple(clauses))


# ---------------------------------------------------------------------------
# typing the captured components


def _arg_types(program: Program, fname: str, arity: int):
    sig = program.signatures.get(fname)
    if sig is None:
        return [None] * arity
    out: list[Optional[TypeExpr]] = []
    t: TypeExpr = sig
    for _ in range(arity):
        if isinstance(t, TFun):
            out.append(t.arg)
            t = t.res
        else:
            out.append(None)
    return out


def _pattern_var_types(
    p: Pattern, t: Optional[TypeExpr], con_table: dict, acc: dict
) -> None:
    if isinstance(p, PVar):
        if t is not None:
            acc[p.name] = t
        return
    comp_types: list[Optional[TypeExpr]] = [None] * len(p.args)
    decl = con_table.get(p.con)
    if decl is not None and isinstance(t, TCon) and t.name == decl.name:
        comps = dict(decl.constructors)[p.con]
        if len(t.args) == len(decl.params) and len(comps) == len(p.args):
            subst = dict(zip(decl.params, t.args))
            comp_types = [_subst_type(ct, subst) for ct in comps]
    for sub, ct in zip(p.args, comp_types):
        _pattern_var_types(sub, ct, con_table, acc)


def _subst_type(t: TypeExpr, subst: dict) -> TypeExpr:
    if isinstance(t, TVar):
        return subst.get(t.name, t)
    if isinstance(t, TCon):
        return TCon(t.name, tuple(_subst_type(a, subst) for a in t.args))
    if isinstance(t, TFun):
        return TFun(_subst_type(t.arg, subst), _subst_type(t.res, subst))
    return t


def _type_vars(t: TypeExpr, acc: list[str]) -> None:
    if isinstance(t, TVar):
        if t.name not in acc:
            acc.append(t.name)
    elif isinstance(t, TCon):
        for a in t.args:
            _type_vars(a, acc)
    elif isinstance(t, TFun):
        _type_vars(t.arg, acc)
        _type_vars(t.res, acc)


def derive_encoded_type(
    program: Program,
    shape: RecursiveShape,
    d: FunDef,
    type_name: str,
    con_names: list[str],
    con_table: dict,
) -> TypeDecl:
    arg_types = _arg_types(program, shape.fname, len(d.clauses[0].patterns))
    opaque = TVar("a")
    constructors = []
    for cshape, cname in zip(shape.clauses, con_names):
        var_types: dict[str, TypeExpr] = {}
        for p, t in zip(cshape.matched_patterns, arg_types[: shape.matched]):
            _pattern_var_types(p, t, con_table, var_types)
        comps = tuple(var_types.get(z, opaque) for z in cshape.captured)
        constructors.append((cname, comps))
    params: list[str] = []
    for t in arg_types[: shape.matched]:
        if t is not None:
            _type_vars(t, params)
    if not any(t is not None for t in arg_types[: shape.matched]):
        for _, comps in constructors:
            for t in comps:
                _type_vars(t, params)
    return TypeDecl(type_name, tuple(params), tuple(constructors))


# ---------------------------------------------------------------------------
# synthesizing encode_f and f'


def _matched_pattern_vars(cshape: ClauseShape) -> set[str]:
    return {
        name
        for p in cshape.matched_patterns
        for name, _ in pattern_vars_with_paths(p)
    }


def derive_encode_fn(
    d: FunDef, shape: RecursiveShape, encode_name: str, con_names: list[str]
) -> FunDef:
    clauses = []
    for cshape, cname in zip(shape.clauses, con_names):
        cell = ConApp(cname, tuple(Var(z) for z in cshape.captured))
        singleton = ConApp("Cons", (cell, ConApp("Nil")))
        if cshape.chosen_args is None:
            body: Expr = singleton
        else:
            rec_args = cshape.chosen_args[: shape.matched]
            in_scope = _matched_pattern_vars(cshape)
            for a in rec_args:
                loose = free_vars(a) - in_scope
                if loose:
                    raise EncodeError(
                        f"{shape.fname}: clause {cshape.index + 1}'s chosen "
                        f"self-call consumes {sorted(loose)[0]!r}, which the "
                        "matched patterns do not bind"
                    )
            rec = apply_spine(FunCall(encode_name), list(rec_args))
            body = App(App(FunCall("++"), singleton), rec)
        clauses.append(Clause(cshape.matched_patterns, body))
    return FunDef(encode_name, tuple(clauses))


def rewrite_function(
    d: FunDef, shape: RecursiveShape, new_name: str, con_names: list[str]
) -> FunDef:
    clauses = []
    for cshape, cname, cl in zip(shape.clauses, con_names, d.clauses):
        taken = {n for p in cl.patterns for n, _ in pattern_vars_with_paths(p)}
        w = "w"
        while w in taken:
            w += "'"
        cell = PCon(cname, tuple(PVar(z) for z in cshape.captured))
        head = PCon("Cons", (cell, PVar(w)))
        plain_pats = cl.patterns[shape.matched:]
        body = cl.body
        if cshape.chosen_args is not None:
            spines = _self_call_spines(body, shape.fname)
            target = spines[-1][0]
            plain_args = list(cshape.chosen_args[shape.matched:])
            replacement = apply_spine(
                FunCall(new_name), [Var(w)] + plain_args
            )
            body = _replace_node(body, target, replacement)
        clauses.append(Clause((head,) + tuple(plain_pats), body))
    return FunDef(new_name, tuple(clauses))


# ---------------------------------------------------------------------------
# whole-program pass


@dataclass
class EncodedFunction:
    original: str
    new_name: str
    encode_name: str
    type_decl: TypeDecl
    con_names: tuple[str, ...]
    shape: RecursiveShape


@dataclass
class EncodeResult:
    program: Program
    encoded: dict[str, EncodedFunction] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)


def _called_defs(d: FunDef, names: set[str]) -> set[str]:
    out: set[str] = set()

    def walk(e: Expr) -> None:
        if isinstance(e, FunCall):
            if e.name in names:
                out.add(e.name)
        elif isinstance(e, App):
            walk(e.fn)
            walk(e.arg)
        elif isinstance(e, Lambda):
            walk(e.body)
        elif isinstance(e, Let):
            for _, r in e.bindings:
                walk(r)
            walk(e.body)
        elif isinstance(e, FunDefBlock):
            for dd in e.defs:
                for cl in dd.clauses:
                    walk(cl.body)
            walk(e.body)
        elif isinstance(e, ConApp):
            for a in e.args:
                walk(a)

    for cl in d.clauses:
        walk(cl.body)
    return out


def _mutual_names(program: Program) -> set[str]:
    """Names on a call cycle that passes through another definition."""
    names = {d.name for d in program.defs}
    calls = {d.name: _called_defs(d, names) for d in program.defs}
    reach: dict[str, set[str]] = {}
    for start in names:
        seen: set[str] = set()
        stack = list(calls[start])
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            stack.extend(calls[n])
        reach[start] = seen
    return {
        f
        for f in names
        if any(g != f and g in reach[f] and f in reach[g] for g in names)
    }


def _unique(base: str, taken: set[str]) -> str:
    name = base
    while name in taken:
        name += "'"
    taken.add(name)
    return name


def encode_program(program: Program) -> EncodeResult:
    """Encode every directly recursive definition with matched inputs."""
    result_notes: list[str] = []
    def_names = {d.name for d in program.defs}
    mutual = _mutual_names(program)
    con_table: dict[str, TypeDecl] = {}
    for decl in list(program.type_decls) + [LIST_DECL]:
        for cname, _ in decl.constructors:
            con_table[cname] = decl

    candidates: list[FunDef] = []
    for d in program.defs:
        self_rec = d.name in _called_defs(d, {d.name})
        if not self_rec:
            continue
        if d.name in mutual:
            result_notes.append(
                f"{d.name}: mutually recursive, not encoded"
            )
            continue
        try:
            m, _ = classify_inputs(d)
        except EncodeError as exc:
            result_notes.append(f"not encoded -- {exc}")
            continue
        if m == 0:
            result_notes.append(
                f"{d.name}: no pattern-matched inputs, not encoded"
            )
            continue
        candidates.append(d)

    if not candidates:
        return EncodeResult(program, {}, result_notes)

    taken = set(def_names)
    taken |= set(prelude_names())
    taken |= {c for c in con_table}
    taken |= {t.name for t in program.type_decls}
    taken |= {"map", "mapReduce", "mapReduce1", "farm", "main"}

    encoded: dict[str, EncodedFunction] = {}
    new_decls: list[TypeDecl] = []
    for d in candidates:
        shape = extract_shape(d)
        new_name = _unique(d.name + "'", taken)
        encode_name = _unique("encode_" + d.name, taken)
        type_name = _unique("T_" + d.name, taken)
        con_names = [
            _unique(f"C_{d.name}_{k + 1}", taken)
            for k in range(len(d.clauses))
        ]
        decl = derive_encoded_type(
            program, shape, d, type_name, con_names, con_table
        )
        new_decls.append(decl)
        encoded[d.name] = EncodedFunction(
            d.name, new_name, encode_name, decl, tuple(con_names), shape
        )

    def rewrite_calls(e: Expr) -> Expr:
        head, args = spine_parts(e)
        if isinstance(head, FunCall):
            info = encoded.get(head.name)
            if info is not None:
                m = info.shape.matched
                if len(args) < m:
                    raise EncodeError(
                        f"{head.name} is applied to {len(args)} arguments "
                        f"but its {m} matched inputs must all be present"
                    )
                enc = apply_spine(
                    FunCall(info.encode_name),
                    [rewrite_calls(a) for a in args[:m]],
                )
                rest = [rewrite_calls(a) for a in args[m:]]
                return apply_spine(FunCall(info.new_name), [enc] + rest)
            if args:
                return apply_spine(head, [rewrite_calls(a) for a in args])
            return e
        if isinstance(e, App):
            return App(rewrite_calls(e.fn), rewrite_calls(e.arg))
        if isinstance(e, Lambda):
            return Lambda(e.param, rewrite_calls(e.body))
        if isinstance(e, Let):
            return Let(
                tuple((n, rewrite_calls(r)) for n, r in e.bindings),
                rewrite_calls(e.body),
            )
        if isinstance(e, FunDefBlock):
            for dd in e.defs:
                if dd.name in encoded:
                    raise EncodeError(
                        f"local definition shadows encoded function {dd.name!r}"
                    )
            defs = tuple(
                FunDef(
                    dd.name,
                    tuple(
                        Clause(cl.patterns, rewrite_calls(cl.body))
                        for cl in dd.clauses
                    ),
                )
                for dd in e.defs
            )
            return FunDefBlock(rewrite_calls(e.body), defs)
        if isinstance(e, ConApp):
            return ConApp(e.con, tuple(rewrite_calls(a) for a in e.args))
        return e

    def rewrite_def(d: FunDef) -> FunDef:
        return FunDef(
            d.name,
            tuple(Clause(cl.patterns, rewrite_calls(cl.body)) for cl in d.clauses),
        )

    out_defs: list[FunDef] = []
    for d in program.defs:
        info = encoded.get(d.name)
        if info is None:
            out_defs.append(rewrite_def(d))
            continue
        enc_fn = derive_encode_fn(d, info.shape, info.encode_name, list(info.con_names))
        prime = rewrite_function(d, info.shape, info.new_name, list(info.con_names))
        out_defs.append(rewrite_def(enc_fn))
        out_defs.append(rewrite_def(prime))

    new_main = rewrite_calls(program.main) if program.main is not None else None
    signatures = {
        n: t for n, t in program.signatures.items() if n not in encoded
    }
    out = Program(
        type_decls=tuple(program.type_decls) + tuple(new_decls),
        defs=tuple(out_defs),
        main=new_main,
        main_params=program.main_params,
        signatures=signatures,
        skeletonized=program.skeletonized,
    )
    return EncodeResult(out, encoded, result_notes)


# ---------------------------------------------------------------------------
# randomized equivalence checking


@dataclass
class EquivReport:
    trials: int
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def format(self) -> str:
        if self.ok:
            return f"equivalent on {self.trials} trials"
        lines = [
            f"{len(self.failures)} of {self.trials} trials disagree:"
        ] + self.failures[:10]
        return "\n".join(lines)


def entry_arg_types(program: Program) -> Optional[list[TypeExpr]]:
    """Argument types for main, read off the signature of the function
    main applies its parameters to.  None when that shape is absent."""
    if program.main is None or not program.main_params:
        return None
    head, args = spine_parts(program.main)
    if not isinstance(head, FunCall):
        return None
    if [a for a in args] != [Var(p) for p in program.main_params]:
        return None
    sig = program.signatures.get(head.name)
    if sig is None:
        return None
    types = []
    t: TypeExpr = sig
    for _ in program.main_params:
        if not isinstance(t, TFun):
            return None
        types.append(t.arg)
        t = t.res
    return types


def random_value(
    t: TypeExpr, decls: dict[str, TypeDecl], rng: random.Random, size: int
) -> Value:
    if isinstance(t, (TVar,)) or (isinstance(t, TCon) and t.name == "Int"):
        return IntVal(rng.randint(-9, 9))
    if isinstance(t, TCon) and t.name == "List":
        n = rng.randint(0, max(0, size))
        return list_to_value(
            [random_value(t.args[0], decls, rng, size // 2) for _ in range(n)]
        )
    if isinstance(t, TCon) and t.name in decls:
        decl = decls[t.name]
        subst = dict(zip(decl.params, t.args))
        rec_free = [
            (c, comps)
            for c, comps in decl.constructors
            if not any(_mentions(ct, decl.name) for ct in comps)
        ]
        pool = rec_free if size <= 0 and rec_free else list(decl.constructors)
        cname, comps = pool[rng.randrange(len(pool))]
        n_rec = sum(1 for ct in comps if _mentions(ct, decl.name))
        sub_size = (size - 1) // n_rec if n_rec else size
        args = tuple(
            random_value(_subst_type(ct, subst), decls, rng, sub_size)
            for ct in comps
        )
        return ConVal(cname, args)
    raise EncodeError(f"cannot generate a random value of type {print_type(t)}")


def _mentions(t: TypeExpr, name: str) -> bool:
    if isinstance(t, TCon):
        return t.name == name or any(_mentions(a, name) for a in t.args)
    if isinstance(t, TFun):
        return _mentions(t.arg, name) or _mentions(t.res, name)
    return False


def check_equivalence(
    original: Program,
    encoded: Program,
    seed: int = 0,
    trials: int = 100,
    size: int = 6,
    fuel: int = DEFAULT_FUEL,
) -> EquivReport:
    """Evaluate both programs' entry points on random inputs and compare."""
    types = entry_arg_types(original)
    if types is None:
        raise EncodeError(
            "cannot generate inputs: main must apply one signed function "
            "to its parameters"
        )
    if len(original.main_params) != len(encoded.main_params):
        raise EncodeError("the two programs take different argument counts")
    decls = {d.name: d for d in original.type_decls}
    rng = random.Random(seed)
    report = EquivReport(trials)
    for i in range(trials):
        args = [random_value(t, decls, rng, size) for t in types]
        shown = ", ".join(print_expr(_value_expr(a)) for a in args)
        try:
            v1 = evaluate(original, args, fuel=fuel)
            v2 = evaluate(encoded, args, fuel=fuel)
        except (EvalError, FuelError) as exc:
            report.failures.append(f"trial {i}: [{shown}] -> {exc}")
            continue
        if not values_equal(v1, v2):
            report.failures.append(
                f"trial {i}: [{shown}] -> "
                f"{print_expr(_value_expr(v1))} vs {print_expr(_value_expr(v2))}"
            )
    return report


def _value_expr(v: Value) -> Expr:
    if isinstance(v, IntVal):
        return IntLit(v.value)
    if isinstance(v, ConVal):
        return ConApp(v.con, tuple(_value_expr(a) for a in v.args))
    raise EncodeError("cannot print a functional value")
