"""Parser for .mfl source files.

Layout: every top-level item starts at column 1; indented lines continue
the item above.  Items are data declarations, type signatures, function
clauses (same-name clauses must be adjacent) and at most one main
definition.  Comments run from -- to end of line.  The marker line
"-- %skeletonized" anywhere in the file flags the program as operating
on encoded lists, which changes how the name map resolves (see interp).

Surface syntax:

    data Tree a ::= Leaf a | Node (Tree a) (Tree a)
    dotP :: [Int] -> [Int] -> Int
    dotP [] [] = 0
    dotP (x:xt) (y:yt) = (x * y) + dotP xt yt
    main xs ys = dotP xs ys

Expressions: application, infix * + : ++ (with the usual precedences,
: and ++ right-associative at the same level), \\x.e lambdas,
let x = e1; y = e2 in e, and e where { f p = b ; ... } blocks.
Sections (+) (*) (++) (:) eta-expand to lambdas.  '#' never appears in
source; generated names use it, keeping the two namespaces apart.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

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
    children,
    clause_bound_vars,
    fresh_name,
    list_type,
    pattern_vars,
    substitute,
)

RESERVED_FUN_NAMES = {"mapReduce", "mapReduce1", "farm"}
KEYWORDS = {"data", "let", "in", "where"}


class ParseError(Exception):
    def __init__(self, msg: str, line: int = 0):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


# ---------------------------------------------------------------------------
# lexer


@dataclass
class Token:
    kind: str  # var con int sym
    text: str
    line: int


_SYMBOLS = ["::=", "::", "->", "++", "(", ")", "[", "]", "{", "}",
            "\\", ".", ",", ";", ":", "=", "|", "+", "*"]

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_']*")
_INT_RE = re.compile(r"-?\d+")

PRAGMA_SKELETONIZED = "%skeletonized"


def tokenize(text: str, base_line: int = 1) -> list[Token]:
    toks: list[Token] = []
    line = base_line
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            continue
        if text.startswith("--", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        if ch == "#":
            raise ParseError("'#' is not valid in source", line)
        m = _INT_RE.match(text, i)
        if m and (ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit())):
            toks.append(Token("int", m.group(), line))
            i = m.end()
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            word = m.group()
            kind = "con" if word[0].isupper() else "var"
            toks.append(Token(kind, word, line))
            i = m.end()
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                toks.append(Token("sym", sym, line))
                i += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line)
    return toks


def split_items(source: str) -> tuple[list[tuple[int, str]], bool]:
    """Split into (start_line, chunk) items by the column-1 rule.

    Returns the items and whether the skeletonized pragma was seen.
    """
    items: list[tuple[int, str]] = []
    pragma = False
    cur: list[str] = []
    cur_line = 0
    for lineno, raw in enumerate(source.split("\n"), start=1):
        stripped = raw.strip()
        if stripped.startswith("--"):
            if PRAGMA_SKELETONIZED in stripped:
                pragma = True
            if cur:
                cur.append("")
            continue
        if not stripped:
            if cur:
                cur.append("")
            continue
        if raw[0] in " \t":
            if not cur:
                raise ParseError("continuation line with nothing to continue", lineno)
            cur.append(raw)
        else:
            if cur:
                items.append((cur_line, "\n".join(cur)))
            cur = [raw]
            cur_line = lineno
    if cur:
        items.append((cur_line, "\n".join(cur)))
    return items, pragma


# ---------------------------------------------------------------------------
# token cursor


class Cursor:
    def __init__(self, toks: list[Token], line: int):
        self.toks = toks
        self.pos = 0
        self.start_line = line

    def peek(self) -> Token | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self) -> Token:
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of item", self.start_line)
        self.pos += 1
        return t

    def at_sym(self, *texts: str) -> bool:
        t = self.peek()
        return t is not None and t.kind == "sym" and t.text in texts

    def at_word(self, word: str) -> bool:
        t = self.peek()
        return t is not None and t.kind == "var" and t.text == word

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.line)
        return t

    def done(self) -> bool:
        return self.pos >= len(self.toks)


# ---------------------------------------------------------------------------
# expression / pattern / type grammars


def parse_type(c: Cursor) -> TypeExpr:
    left = parse_btype(c)
    if c.at_sym("->"):
        c.next()
        return TFun(left, parse_type(c))
    return left


def parse_btype(c: Cursor) -> TypeExpr:
    t = c.peek()
    if t is not None and t.kind == "con":
        c.next()
        args = []
        while _at_atype(c):
            args.append(parse_atype(c))
        return TCon(t.text, tuple(args))
    return parse_atype(c)


def _at_atype(c: Cursor) -> bool:
    t = c.peek()
    if t is None:
        return False
    return t.kind in ("var", "con") or (t.kind == "sym" and t.text in ("(", "["))


def parse_atype(c: Cursor) -> TypeExpr:
    t = c.next()
    if t.kind == "var":
        return TVar(t.text)
    if t.kind == "con":
        return TCon(t.text)
    if t.text == "(":
        inner = parse_type(c)
        c.expect(")")
        return inner
    if t.text == "[":
        inner = parse_type(c)
        c.expect("]")
        return list_type(inner)
    raise ParseError(f"expected a type, found {t.text!r}", t.line)


def parse_apattern(c: Cursor) -> Pattern:
    t = c.next()
    if t.kind == "var":
        if t.text in KEYWORDS:
            raise ParseError(f"{t.text!r} cannot be a pattern variable", t.line)
        return PVar(t.text)
    if t.kind == "con":
        return PCon(t.text)
    if t.text == "[":
        c.expect("]")
        return PCon("Nil")
    if t.text == "(":
        p = parse_pattern(c)
        c.expect(")")
        return p
    raise ParseError(f"expected a pattern, found {t.text!r}", t.line)


def parse_pattern(c: Cursor) -> Pattern:
    t = c.peek()
    if t is not None and t.kind == "con":
        c.next()
        args = []
        while _at_apattern(c):
            args.append(parse_apattern(c))
        p: Pattern = PCon(t.text, tuple(args))
    else:
        p = parse_apattern(c)
    if c.at_sym(":"):
        c.next()
        return PCon("Cons", (p, parse_pattern(c)))
    return p


def _at_apattern(c: Cursor) -> bool:
    t = c.peek()
    if t is None:
        return False
    if t.kind in ("var", "con"):
        return not (t.kind == "var" and t.text in KEYWORDS)
    return t.kind == "sym" and t.text in ("(", "[")


def parse_expr(c: Cursor) -> Expr:
    e = parse_expr_nowhere(c)
    while c.at_word("where"):
        c.next()
        c.expect("{")
        defs = parse_local_defs(c)
        c.expect("}")
        e = FunDefBlock(e, defs)
    return e


def parse_expr_nowhere(c: Cursor) -> Expr:
    t = c.peek()
    if t is not None and t.kind == "sym" and t.text == "\\":
        c.next()
        params = []
        while True:
            tok = c.next()
            if tok.kind != "var":
                raise ParseError(f"expected lambda parameter, found {tok.text!r}", tok.line)
            params.append(tok.text)
            if c.at_sym("."):
                c.next()
                break
        body = parse_expr_nowhere(c)
        for p in reversed(params):
            body = Lambda(p, body)
        return body
    if t is not None and t.kind == "var" and t.text == "let":
        c.next()
        bindings = []
        while True:
            name = c.next()
            if name.kind != "var" or name.text in KEYWORDS:
                raise ParseError(f"expected let binder, found {name.text!r}", name.line)
            c.expect("=")
            rhs = parse_expr_nowhere(c)
            bindings.append((name.text, rhs))
            if c.at_sym(";"):
                c.next()
                continue
            break
        tok = c.next()
        if not (tok.kind == "var" and tok.text == "in"):
            raise ParseError(f"expected 'in', found {tok.text!r}", tok.line)
        return Let(tuple(bindings), parse_expr_nowhere(c))
    return parse_cons(c)


def parse_cons(c: Cursor) -> Expr:
    left = parse_add(c)
    if c.at_sym(":"):
        c.next()
        return ConApp("Cons", (left, parse_cons(c)))
    if c.at_sym("++"):
        c.next()
        return App(App(FunCall("++"), left), parse_cons(c))
    return left


def parse_add(c: Cursor) -> Expr:
    left = parse_mul(c)
    while c.at_sym("+"):
        c.next()
        left = App(App(FunCall("+"), left), parse_mul(c))
    return left


def parse_mul(c: Cursor) -> Expr:
    left = parse_app(c)
    while c.at_sym("*"):
        c.next()
        left = App(App(FunCall("*"), left), parse_app(c))
    return left


def parse_app(c: Cursor) -> Expr:
    head_tok = c.peek()
    atoms = [parse_atom(c)]
    while _at_atom(c):
        atoms.append(parse_atom(c))
    head = atoms[0]
    # A constructor atom absorbs its arguments into a saturated ConApp;
    # arity is checked later against the declarations in scope.
    if isinstance(head, ConApp) and not head.args:
        return ConApp(head.con, tuple(atoms[1:]))
    if len(atoms) > 1 and isinstance(head, ConApp):
        raise ParseError("constructor applied twice", head_tok.line if head_tok else 0)
    e = head
    for a in atoms[1:]:
        e = App(e, a)
    return e


def _at_atom(c: Cursor) -> bool:
    t = c.peek()
    if t is None:
        return False
    if t.kind in ("int", "con"):
        return True
    if t.kind == "var":
        return t.text not in KEYWORDS and t.text != "in"
    return t.kind == "sym" and t.text in ("(", "[")


def parse_atom(c: Cursor) -> Expr:
    t = c.next()
    if t.kind == "int":
        return IntLit(int(t.text))
    if t.kind == "var":
        return Var(t.text)
    if t.kind == "con":
        return ConApp(t.text)
    if t.text == "[":
        if c.at_sym("]"):
            c.next()
            return ConApp("Nil")
        items = [parse_expr_nowhere(c)]
        while c.at_sym(","):
            c.next()
            items.append(parse_expr_nowhere(c))
        c.expect("]")
        out: Expr = ConApp("Nil")
        for item in reversed(items):
            out = ConApp("Cons", (item, out))
        return out
    if t.text == "(":
        if c.at_sym("+", "*", "++", ":"):
            op = c.next().text
            c.expect(")")
            if op == ":":
                return Lambda("h#s", Lambda("t#s", ConApp("Cons", (Var("h#s"), Var("t#s")))))
            return Lambda("a#s", Lambda("b#s", App(App(FunCall(op), Var("a#s")), Var("b#s"))))
        inner = parse_expr(c)
        c.expect(")")
        return inner
    raise ParseError(f"expected an expression, found {t.text!r}", t.line)


def parse_local_defs(c: Cursor) -> tuple[FunDef, ...]:
    raw: list[tuple[str, Clause, int]] = []
    while True:
        name_tok = c.next()
        if name_tok.kind != "var" or name_tok.text in KEYWORDS:
            raise ParseError(f"expected local definition, found {name_tok.text!r}", name_tok.line)
        pats = []
        while _at_apattern(c):
            pats.append(parse_apattern(c))
        c.expect("=")
        body = parse_expr(c)
        raw.append((name_tok.text, Clause(tuple(pats), body), name_tok.line))
        if c.at_sym(";"):
            c.next()
            continue
        break
    return group_clauses(raw)


def group_clauses(raw: list[tuple[str, Clause, int]]) -> tuple[FunDef, ...]:
    """Group adjacent same-name clauses into definitions."""
    defs: list[FunDef] = []
    seen: set[str] = set()
    i = 0
    while i < len(raw):
        name, clause, line = raw[i]
        if name in seen:
            raise ParseError(f"clauses of {name!r} are not adjacent", line)
        clauses = [clause]
        i += 1
        while i < len(raw) and raw[i][0] == name:
            clauses.append(raw[i][1])
            i += 1
        seen.add(name)
        arities = {len(cl.patterns) for cl in clauses}
        if len(arities) != 1:
            raise ParseError(f"clauses of {name!r} disagree on arity", line)
        defs.append(FunDef(name, tuple(clauses)))
    return defs


# ---------------------------------------------------------------------------
# top-level items


def parse_data_decl(c: Cursor) -> TypeDecl:
    c.next()  # 'data'
    name_tok = c.next()
    if name_tok.kind != "con":
        raise ParseError("data declaration needs a capitalized type name", name_tok.line)
    params = []
    while True:
        t = c.peek()
        if t is not None and t.kind == "var":
            c.next()
            params.append(t.text)
        else:
            break
    c.expect("::=")
    cons = []
    while True:
        ct = c.next()
        if ct.kind != "con":
            raise ParseError("constructor names are capitalized", ct.line)
        comps = []
        while _at_atype(c) and not c.at_sym("|"):
            comps.append(parse_atype(c))
        cons.append((ct.text, tuple(comps)))
        if c.at_sym("|"):
            c.next()
            continue
        break
    if not c.done():
        raise ParseError("trailing tokens after data declaration", name_tok.line)
    return TypeDecl(name_tok.text, tuple(params), tuple(cons))


# ---------------------------------------------------------------------------
# program assembly and checks


def parse_program(source: str, prelude_names: frozenset[str] | None = None) -> Program:
    """Parse and check a complete program.

    prelude_names are additional function names treated as in scope when
    resolving identifiers; None means the standard prelude.  Pass an
    explicit frozenset() for a program with no library in scope.
    """
    if prelude_names is None:
        from .prelude import prelude_names as _std

        prelude_names = _std()
    chunks, pragma = split_items(source)
    decls: list[TypeDecl] = []
    signatures: dict[str, TypeExpr] = {}
    clause_items: list[tuple[str, Clause, int]] = []
    for line, chunk in chunks:
        toks = tokenize(chunk, line)
        c = Cursor(toks, line)
        first = c.peek()
        assert first is not None
        if first.kind == "var" and first.text == "data":
            decls.append(parse_data_decl(c))
            continue
        if first.kind != "var" or first.text in KEYWORDS:
            raise ParseError(f"item must start with a definition name, found {first.text!r}", line)
        # signature or clause
        if len(toks) > 1 and toks[1].kind == "sym" and toks[1].text == "::":
            name = c.next().text
            c.expect("::")
            sig = parse_type(c)
            if not c.done():
                raise ParseError("trailing tokens after signature", line)
            if name in signatures:
                raise ParseError(f"duplicate signature for {name!r}", line)
            signatures[name] = sig
            continue
        name_tok = c.next()
        pats = []
        while _at_apattern(c):
            pats.append(parse_apattern(c))
        c.expect("=")
        body = parse_expr(c)
        if not c.done():
            raise ParseError("trailing tokens after definition", line)
        clause_items.append((name_tok.text, Clause(tuple(pats), body), line))

    defs = list(group_clauses(clause_items))

    main_expr = None
    main_params: tuple[str, ...] = ()
    for d in defs:
        if d.name == "main":
            if len(d.clauses) != 1 or any(
                not isinstance(p, PVar) for p in d.clauses[0].patterns
            ):
                raise ParseError("main takes plain parameters and a single clause")
            main_params = tuple(p.name for p in d.clauses[0].patterns)  # type: ignore[union-attr]
            main_expr = d.clauses[0].body
    defs = [d for d in defs if d.name != "main"]

    program = Program(
        type_decls=tuple(decls),
        defs=tuple(defs),
        main=main_expr,
        main_params=main_params,
        signatures=signatures,
        skeletonized=pragma,
    )
    check_program(program, prelude_names)
    resolve_names(program, prelude_names)
    rename_shadowed(program)
    return program


def parse_expression(source: str) -> Expr:
    toks = tokenize(source)
    c = Cursor(toks, 1)
    e = parse_expr(c)
    if not c.done():
        raise ParseError("trailing tokens after expression", 1)
    return e


# -- checks ------------------------------------------------------------------


def check_program(program: Program, prelude_names: frozenset[str]) -> None:
    con_table = program.constructor_table()
    decl_names = set()
    for decl in program.type_decls:
        if decl.name in decl_names or decl.name == "List":
            raise ParseError(f"duplicate type {decl.name!r}")
        decl_names.add(decl.name)
    con_owner: dict[str, str] = {}
    for decl in program.type_decls:
        for con, _ in decl.constructors:
            if con in ("Nil", "Cons") or con in con_owner:
                raise ParseError(f"duplicate constructor {con!r}")
            con_owner[con] = decl.name

    for d in program.defs:
        if d.name in RESERVED_FUN_NAMES:
            raise ParseError(f"{d.name!r} is a reserved skeleton name")
        if program.skeletonized and d.name == "map":
            raise ParseError("'map' is a reserved skeleton name in skeletonized programs")

    def check_pattern(p: Pattern, line_hint: str) -> None:
        if isinstance(p, PCon):
            if p.con not in con_table:
                raise ParseError(f"unknown constructor {p.con!r} in {line_hint}")
            want = len(con_table[p.con][1])
            if len(p.args) != want:
                raise ParseError(
                    f"constructor {p.con} takes {want} components, "
                    f"pattern in {line_hint} has {len(p.args)}"
                )
            for a in p.args:
                check_pattern(a, line_hint)

    def check_expr(e: Expr, where: str) -> None:
        for node in _walk_with_defs(e):
            if isinstance(node, ConApp):
                if node.con not in con_table:
                    raise ParseError(f"unknown constructor {node.con!r} in {where}")
                want = len(con_table[node.con][1])
                if len(node.args) != want:
                    raise ParseError(
                        f"constructor {node.con} takes {want} arguments, "
                        f"got {len(node.args)} in {where}"
                    )
            if isinstance(node, FunDefBlock):
                for d in node.defs:
                    check_def(d, f"{where}.{d.name}")

    def check_def(d: FunDef, where: str) -> None:
        names_per_clause = []
        for cl in d.clauses:
            vs = clause_bound_vars(cl)
            if len(vs) != len(set(vs)):
                raise ParseError(f"repeated variable in patterns of {where}")
            names_per_clause.append(vs)
            for p in cl.patterns:
                check_pattern(p, where)
            check_expr(cl.body, where)
        check_clause_coverage(d, con_table, where)

    for d in program.defs:
        check_def(d, d.name)
    if program.main is not None:
        if len(set(program.main_params)) != len(program.main_params):
            raise ParseError("repeated main parameter")
        check_expr(program.main, "main")


def _walk_with_defs(e: Expr):
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, FunDefBlock):
            stack.append(node.body)  # nested def bodies handled by caller
        else:
            stack.extend(children(node))


def check_clause_coverage(
    d: FunDef,
    con_table: dict[str, tuple[TypeDecl, tuple[TypeExpr, ...]]],
    where: str,
) -> None:
    """Clauses must not overlap; each position must be shallowly complete.

    Overlap of two clauses means some argument tuple matches both.
    Completeness is per position: either some clause leaves the position
    a variable, or the top-level constructors used there cover the whole
    declaring type.  Two sanctioned forms of partiality remain: joint
    gaps across positions (zip-style definitions applied to unequal
    shapes), and list positions matching only (:) cells, the idiom for
    functions over non-empty call structures.  Both fail only at run
    time.
    """
    rows = [list(cl.patterns) for cl in d.clauses]
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            if all(_compatible(p, q) for p, q in zip(rows[i], rows[j])):
                raise ParseError(f"clauses {i + 1} and {j + 1} of {where} overlap")
    width = len(rows[0]) if rows else 0
    for pos in range(width):
        pats = [row[pos] for row in rows]
        if any(isinstance(p, PVar) for p in pats):
            continue
        cons = {p.con for p in pats if isinstance(p, PCon)}
        owners = {con_table[c][0].name for c in cons}
        if len(owners) > 1:
            raise ParseError(
                f"argument {pos + 1} of {where} mixes constructors of types "
                + " and ".join(sorted(owners))
            )
        if cons == {"Cons"}:
            continue  # a function over non-empty lists
        decl = con_table[next(iter(cons))][0]
        missing = [c for c in decl.constructor_names() if c not in cons]
        if missing:
            raise ParseError(
                f"argument {pos + 1} of {where} never matches {missing[0]}"
            )


def _compatible(p: Pattern, q: Pattern) -> bool:
    if isinstance(p, PVar) or isinstance(q, PVar):
        return True
    assert isinstance(p, PCon) and isinstance(q, PCon)
    return p.con == q.con and all(_compatible(a, b) for a, b in zip(p.args, q.args))


# -- name resolution ----------------------------------------------------------


def intrinsic_names(skeletonized: bool) -> set[str]:
    names = set(RESERVED_FUN_NAMES)
    if skeletonized:
        names.add("map")
    return names


def resolve_names(program: Program, prelude_names: frozenset[str]) -> None:
    """Rewrite Var occurrences of function names into FunCall, and
    reject identifiers bound nowhere."""
    fun_scope = set(program.def_names()) | intrinsic_names(program.skeletonized) | set(
        prelude_names
    ) | {"+", "*", "++"}

    def resolve_expr(e: Expr, vars_in_scope: frozenset[str], funs: frozenset[str]) -> Expr:
        match e:
            case Var(name):
                if name in vars_in_scope:
                    return e
                if name in funs:
                    return FunCall(name)
                raise ParseError(f"unbound identifier {name!r}")
            case FunCall():
                return e
            case IntLit():
                return e
            case App(fn, arg):
                return App(resolve_expr(fn, vars_in_scope, funs), resolve_expr(arg, vars_in_scope, funs))
            case ConApp(con, args):
                return ConApp(con, tuple(resolve_expr(a, vars_in_scope, funs) for a in args))
            case Lambda(param, body):
                return Lambda(param, resolve_expr(body, vars_in_scope | {param}, funs))
            case Let(bindings, body):
                new_b = tuple((n, resolve_expr(rhs, vars_in_scope, funs)) for n, rhs in bindings)
                inner = vars_in_scope | {n for n, _ in bindings}
                return Let(new_b, resolve_expr(body, inner, funs))
            case FunDefBlock(body, defs):
                inner_funs = funs | {d.name for d in defs}
                new_defs = tuple(
                    resolve_def(d, vars_in_scope, inner_funs) for d in defs
                )
                return FunDefBlock(resolve_expr(body, vars_in_scope, inner_funs), new_defs)
        raise TypeError(e)

    def resolve_def(d: FunDef, vars_in_scope: frozenset[str], funs: frozenset[str]) -> FunDef:
        new_clauses = []
        for cl in d.clauses:
            bound = vars_in_scope | set(clause_bound_vars(cl))
            new_clauses.append(Clause(cl.patterns, resolve_expr(cl.body, bound, funs)))
        return FunDef(d.name, tuple(new_clauses))

    funs = frozenset(fun_scope)
    program.defs = tuple(resolve_def(d, frozenset(), funs) for d in program.defs)
    if program.main is not None:
        program.main = resolve_expr(program.main, frozenset(program.main_params), funs)


def rename_shadowed(program: Program) -> None:
    """Rename any binder that shadows an enclosing binder, so later
    passes can float expressions without capture checks.  Sibling
    scopes may reuse names; only true nesting is renamed."""

    def fresh_pattern(p: Pattern, enclosing: frozenset[str], local: set[str], ren: dict[str, str]) -> Pattern:
        if isinstance(p, PVar):
            name = p.name
            if name in enclosing or name in local:
                nn = fresh_name(name)
                ren[name] = nn
                name = nn
            local.add(name)
            return PVar(name)
        assert isinstance(p, PCon)
        return PCon(p.con, tuple(fresh_pattern(a, enclosing, local, ren) for a in p.args))

    def go(e: Expr, taken: frozenset[str]) -> Expr:
        match e:
            case Var() | IntLit() | FunCall():
                return e
            case App(fn, arg):
                return App(go(fn, taken), go(arg, taken))
            case ConApp(con, args):
                return ConApp(con, tuple(go(a, taken) for a in args))
            case Lambda(param, body):
                if param in taken:
                    nn = fresh_name(param)
                    body = substitute(body, {param: Var(nn)})
                    param = nn
                return Lambda(param, go(body, taken | {param}))
            case Let(bindings, body):
                new_bindings = []
                ren: dict[str, str] = {}
                inner = set(taken)
                for n, rhs in bindings:
                    rhs = go(rhs, taken)
                    if n in inner:
                        nn = fresh_name(n)
                        ren[n] = nn
                        n = nn
                    inner.add(n)
                    new_bindings.append((n, rhs))
                if ren:
                    body = substitute(body, {k: Var(v) for k, v in ren.items()})
                return Let(tuple(new_bindings), go(body, frozenset(inner)))
            case FunDefBlock(body, defs):
                new_defs = tuple(go_def(d, taken) for d in defs)
                return FunDefBlock(go(body, taken), new_defs)
        raise TypeError(e)

    def go_def(d: FunDef, taken: frozenset[str]) -> FunDef:
        new_clauses = []
        for cl in d.clauses:
            ren: dict[str, str] = {}
            local: set[str] = set()
            pats = tuple(fresh_pattern(p, taken, local, ren) for p in cl.patterns)
            body = cl.body
            if ren:
                body = substitute(body, {k: Var(v) for k, v in ren.items()})
            new_clauses.append(Clause(pats, go(body, taken | local)))
        return FunDef(d.name, tuple(new_clauses))

    program.defs = tuple(go_def(d, frozenset()) for d in program.defs)
    if program.main is not None:
        program.main = go(program.main, frozenset(program.main_params))
