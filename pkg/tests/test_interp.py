"""Evaluation: the machine, the stepper, and their agreement."""

import random

import pytest

from skelc.interp import (
    EvalError,
    FuelError,
    evaluate,
    evaluate_call,
    normalize_by_steps,
    reduce_step,
    value_to_expr,
)
from skelc.parser import parse_program
from skelc.syntax import (
    App,
    ConApp,
    ConVal,
    FunCall,
    IntLit,
    IntVal,
    Var,
    int_list_value,
    list_to_value,
    value_to_list,
    values_equal,
)


def ints(v):
    return [x.value for x in value_to_list(v)]


def expr_list(xs):
    out = ConApp("Nil", ())
    for x in reversed(xs):
        out = ConApp("Cons", (IntLit(x), out))
    return out


# -- machine basics ------------------------------------------------------------


def test_arithmetic():
    p = parse_program("main x y = (x + y) * (x + -1)")
    assert evaluate(p, [IntVal(5), IntVal(3)]) == IntVal(32)


def test_clause_dispatch_and_recursion():
    p = parse_program(
        """
len [] = 0
len (x:xs) = 1 + (len xs)

main xs = len xs
"""
    )
    assert evaluate(p, [int_list_value([7, 8, 9])]) == IntVal(3)


def test_call_by_need_skips_unused_arguments():
    p = parse_program(
        """
fst x y = x
loop n = loop (n + 1)

main = fst 42 (loop 0)
"""
    )
    assert evaluate(p, [], fuel=1000) == IntVal(42)


def test_sharing_forces_once():
    # without memoised thunks this would need fuel quadratic in the
    # list length; with sharing the doubled use is nearly free
    p = parse_program(
        """
len [] = 0
len (x:xs) = 1 + (len xs)

main xs = let n = len xs in n + n
"""
    )
    assert evaluate(p, [int_list_value(list(range(50)))], fuel=200) == IntVal(100)


def test_no_clause_matched_is_stuck():
    p = parse_program(
        """
data BTree a ::= E | B a (BTree a) (BTree a)

dz E yt = 0
dz (B x l r) E = 1
dz (B x l r) (B y l' r') = 2

main a b = dz a b
"""
    )
    e = ConVal("E", ())
    b = ConVal("B", (IntVal(1), e, e))
    assert evaluate(p, [e, b]) == IntVal(0)
    with pytest.raises(EvalError, match="no clause"):
        evaluate_call(
            p, "dz", [ConVal("Nil", ()), e]
        )


def test_fuel_runs_out():
    p = parse_program("loop n = loop n\n\nmain = loop 0")
    with pytest.raises(FuelError):
        evaluate(p, [], fuel=500)


def test_partial_application():
    p = parse_program(
        """
add x y = x + y

main xs = map xs (add 10)
"""
    )
    assert ints(evaluate(p, [int_list_value([1, 2])])) == [11, 12]


def test_let_is_parallel():
    # both rhss see the parameter, not each other
    p = parse_program("main x = let y = x + 1; z = x * 2 in y + z")
    assert evaluate(p, [IntVal(10)]) == IntVal(31)


def test_local_defs_close_over_scope():
    p = parse_program(
        """
scale k xs = go xs
    where { go [] = [] ; go (x:xs) = (k * x) : (go xs) }

main xs = scale 3 xs
"""
    )
    assert ints(evaluate(p, [int_list_value([1, 2, 3])])) == [3, 6, 9]


def test_user_definition_shadows_prelude():
    p = parse_program(
        """
map xs f = xs

main xs = map xs (\\x. x + 1)
"""
    )
    assert ints(evaluate(p, [int_list_value([5])])) == [5]


def test_prelude_functions():
    p = parse_program(
        "main xs ys = foldr (+) 0 (zipWith (*) xs ys) : (reduce (+) 0 xs) : []"
    )
    out = evaluate(p, [int_list_value([1, 2, 3]), int_list_value([4, 5, 6])])
    assert ints(out) == [32, 6]


def test_append_is_lazy_in_the_tail():
    p = parse_program(
        """
hd (x:xs) = x
ones = 1 : ones

main xs = hd (xs ++ ones)
"""
    )
    # hd of a partial list backed by an infinite tail
    assert evaluate(p, [int_list_value([9])], fuel=300) == IntVal(9)


def test_deep_list_and_deep_recursion():
    p = parse_program(
        """
copy [] = []
copy (x:xs) = x : (copy xs)

suml [] = 0
suml (x:xs) = x + (suml xs)

main xs = (suml xs) : (copy xs)
"""
    )
    n = 30000
    out = value_to_list(evaluate(p, [int_list_value(list(range(n)))]))
    assert out[0] == IntVal(n * (n - 1) // 2)
    assert len(out) == n + 1 and out[-1] == IntVal(n - 1)


def test_values_equal_on_long_lists():
    a = int_list_value(list(range(50000)))
    b = int_list_value(list(range(50000)))
    assert values_equal(a, b)
    c = int_list_value(list(range(49999)) + [7])
    assert not values_equal(a, c)


# -- skeleton intrinsics ---------------------------------------------------------


def test_farm_is_a_plain_map():
    p = parse_program("main xs = farm (\\x. x * x) xs")
    assert ints(evaluate(p, [int_list_value([1, 2, 3])])) == [1, 4, 9]
    assert ints(evaluate(p, [int_list_value([])])) == []


def test_skeleton_map_terminal_image_is_the_tail():
    src = """-- %skeletonized
data Cell ::= Go Int | Stop

main w = map w f
    where { f (Go x) = x + 100 ; f Stop = [] }
"""
    p = parse_program(src)
    w = list_to_value(
        [ConVal("Go", (IntVal(1),)), ConVal("Go", (IntVal(2),)), ConVal("Stop", ())]
    )
    assert ints(evaluate(p, [w])) == [101, 102]


def test_skeleton_map_requires_nonempty():
    p = parse_program("-- %skeletonized\nmain w = map w (\\x. x)")
    with pytest.raises(EvalError, match="non-empty"):
        evaluate(p, [int_list_value([])])


def test_map_reduce_folds_right_with_terminal_seed():
    src = """-- %skeletonized
data Cell ::= Go Int | Stop

main w = mapReduce w (\\a. \\b. a + (2 * b)) f
    where { f (Go x) = x ; f Stop = 100 }
"""
    p = parse_program(src)
    w = list_to_value(
        [ConVal("Go", (IntVal(1),)), ConVal("Go", (IntVal(2),)), ConVal("Stop", ())]
    )
    # 1 + 2*(2 + 2*100) = 405: right fold, seed from the terminal cell
    assert evaluate(p, [w]) == IntVal(405)


def test_map_reduce1_single_cell_is_just_the_image():
    p = parse_program("-- %skeletonized\nmain w = mapReduce1 w (+) (\\x. x * 5)")
    assert evaluate(p, [int_list_value([4])]) == IntVal(20)


# -- the stepper -----------------------------------------------------------------


def test_step_of_prelude_map_on_nil():
    e = App(App(FunCall("map"), ConApp("Nil", ())), Var("f"))
    assert reduce_step(e, {}) == ConApp("Nil", ())


def test_step_normal_form_is_none():
    assert reduce_step(IntLit(5), {}) is None
    assert reduce_step(ConApp("Nil", ()), {}) is None


def test_stepper_matches_machine_on_fixed_programs():
    src = """
data BTree a ::= E | B a (BTree a) (BTree a)

suml [] = 0
suml (x:xs) = x + (suml xs)

rev [] = []
rev (x:xs) = (rev xs) ++ (x : [])

tsum E = 0
tsum (B x l r) = x + ((tsum l) + (tsum r))

main = 0
"""
    p = parse_program(src)
    defs = {d.name: d for d in p.defs}
    rng = random.Random(424242)

    def rand_tree_expr(depth):
        if depth == 0 or rng.random() < 0.3:
            return ConApp("E", ())
        return ConApp(
            "B",
            (
                IntLit(rng.randrange(-9, 10)),
                rand_tree_expr(depth - 1),
                rand_tree_expr(depth - 1),
            ),
        )

    for _ in range(40):
        xs = [rng.randrange(-9, 10) for _ in range(rng.randrange(0, 7))]
        for fname in ("suml", "rev"):
            e = App(FunCall(fname), expr_list(xs))
            nf = normalize_by_steps(e, defs)
            mach = evaluate_call(p, fname, [int_list_value(xs)])
            assert nf == value_to_expr(mach), (fname, xs)
        t = rand_tree_expr(3)
        nf = normalize_by_steps(App(FunCall("tsum"), t), defs)
        from skelc.interp import expr_to_value

        mach = evaluate_call(p, "tsum", [expr_to_value(t)])
        assert nf == value_to_expr(mach)


def test_stepper_skeleton_map_agrees_with_machine():
    src = """-- %skeletonized
data Cell ::= Go Int | Stop

run w = map w f
    where { f (Go x) = x + 1 ; f Stop = [] }

main w = run w
"""
    p = parse_program(src)
    defs = {d.name: d for d in p.defs}
    cells = [ConApp("Go", (IntLit(k),)) for k in (3, 4, 5)] + [ConApp("Stop", ())]
    e = App(FunCall("run"), expr_list([]))  # placeholder, rebuilt below
    w = ConApp("Nil", ())
    for c in reversed(cells):
        w = ConApp("Cons", (c, w))
    e = App(FunCall("run"), w)
    nf = normalize_by_steps(e, defs, skeletonized=True)
    from skelc.interp import expr_to_value

    mach = evaluate(p, [expr_to_value(w)])
    assert nf == value_to_expr(mach)


def test_stepper_stuck_reports_eval_error():
    p = parse_program(
        """
hd (x:xs) = x

main = 0
"""
    )
    defs = {d.name: d for d in p.defs}
    with pytest.raises(EvalError):
        normalize_by_steps(App(FunCall("hd"), ConApp("Nil", ())), defs)
