"""Skeleton execution: sequential references, worker pool, determinism."""

import random

import pytest

from skelc import corpus
from skelc.generators import matmul_args, matmul_inputs, random_tree, tree_args
from skelc.interp import EvalError, PrimVal, evaluate, make_ctx, resolve_fun
from skelc.lift import lambda_lift
from skelc.parser import parse_program
from skelc.runtime import (
    ExecConfig,
    RunStats,
    SkeletonCall,
    SkeletonError,
    par_farm,
    par_map_reduce1,
    partition_indices,
    run,
    run_with_stats,
    seq_map,
    seq_map_reduce,
)
from skelc.syntax import ConVal, IntVal, int_list_value, values_equal


def load(name):
    return lambda_lift(parse_program(corpus.corpus_source(name)))


def fun_value(src, name):
    prog = lambda_lift(parse_program(src))
    ctx, home = make_ctx(prog)
    return resolve_fun(name, None, ctx, home)


def doubler():
    return fun_value("dbl x = x + x\nmain x = dbl x", "dbl")


def identity():
    return fun_value("idf x = x\nmain x = idf x", "idf")


def cons_list(items):
    out = ConVal("Nil", ())
    for x in reversed(items):
        out = ConVal("Cons", (x, out))
    return out


PAR4 = ExecConfig(mode="parallel", workers=4)


# ---------------------------------------------------------------------------
# configuration


def test_config_validation():
    assert ExecConfig(mode="seq").mode == "sequential"
    assert ExecConfig(mode="par").mode == "parallel"
    with pytest.raises(ValueError):
        ExecConfig(mode="distributed")
    with pytest.raises(ValueError):
        ExecConfig(workers=0)
    with pytest.raises(ValueError):
        ExecConfig(chunking="random")
    with pytest.raises(ValueError):
        ExecConfig(fuel=0)
    assert ExecConfig().resolved_workers() >= 1


def test_skeleton_call_contract():
    with pytest.raises(SkeletonError):
        SkeletonCall("mapReduce1", [], identity(), PrimVal("+"))
    with pytest.raises(SkeletonError):
        SkeletonCall("mapReduce", [IntVal(1)], identity(), None)
    SkeletonCall("farm", [], identity())  # plain farm may be empty


def test_partitioning_covers_indices_exactly_once():
    rng = random.Random(8)
    for _ in range(200):
        n = rng.randrange(0, 40)
        w = rng.randint(1, 9)
        ch = rng.choice(["rr", "block"])
        chunks = partition_indices(n, w, ch)
        assert len(chunks) <= w
        flat = sorted(i for c in chunks for i in c)
        assert flat == list(range(n))
        assert all(c for c in chunks)


def test_block_partitioning_is_contiguous():
    for c in partition_indices(10, 3, "block"):
        assert c == list(range(c[0], c[0] + len(c)))


# ---------------------------------------------------------------------------
# sequential reference skeletons


def test_seq_map_empty_and_order():
    assert seq_map([], doubler()) == []
    out = seq_map([IntVal(1), IntVal(2), IntVal(3)], doubler())
    assert [v.value for v in out] == [2, 4, 6]


def test_seq_map_reduce_unit_and_sum():
    xs = [IntVal(1), IntVal(2), IntVal(3)]
    assert seq_map_reduce([], PrimVal("+"), IntVal(0), identity()).value == 0
    assert seq_map_reduce(xs, PrimVal("+"), IntVal(0), identity()).value == 6
    assert seq_map_reduce(xs, PrimVal("+"), IntVal(0), doubler()).value == 12


# ---------------------------------------------------------------------------
# parallel operations against their sequential references


def test_par_farm_matches_seq_map():
    rng = random.Random(5)
    f = doubler()
    for _ in range(10):
        xs = [IntVal(rng.randint(-99, 99)) for _ in range(rng.randrange(12))]
        want = seq_map(xs, f)
        for w in (1, 2, 4, 8):
            for ch in ("rr", "block"):
                cfg = ExecConfig(mode="parallel", workers=w, chunking=ch)
                got = par_farm(cfg, xs, f)
                assert len(got) == len(want)
                assert all(values_equal(a, b) for a, b in zip(got, want))


def test_par_farm_workers_one_equals_seq_map():
    xs = [IntVal(i) for i in range(7)]
    cfg = ExecConfig(mode="parallel", workers=1)
    got = par_farm(cfg, xs, doubler())
    assert [v.value for v in got] == [v.value for v in seq_map(xs, doubler())]


def test_par_farm_requires_parallel_mode():
    with pytest.raises(SkeletonError):
        par_farm(ExecConfig(mode="sequential"), [IntVal(1)], doubler())


def test_par_map_reduce1_directions_agree_for_associative_op():
    xs = [IntVal(i) for i in range(1, 101)]
    r = par_map_reduce1(PAR4, xs, PrimVal("+"), identity(), direction="right")
    l = par_map_reduce1(PAR4, xs, PrimVal("+"), identity(), direction="left")
    assert r.value == l.value == 5050


def test_par_map_reduce1_singleton_applies_f_once():
    from skelc.runtime import _PoolMapper

    cfg = ExecConfig(mode="parallel", workers=4)
    mapper = _PoolMapper(cfg)
    out = mapper.images([IntVal(9)], doubler())
    assert len(out) == 1 and out[0].value == 18
    assert mapper.elements == 1 and mapper.tasks == 1
    v = par_map_reduce1(cfg, [IntVal(9)], PrimVal("+"), doubler())
    assert v.value == 18


def test_par_map_reduce1_rejects_empty():
    with pytest.raises(SkeletonError):
        par_map_reduce1(PAR4, [], PrimVal("+"), identity())


def test_par_map_reduce1_rejects_bad_direction():
    with pytest.raises(ValueError):
        par_map_reduce1(PAR4, [IntVal(1)], PrimVal("+"), identity(),
                        direction="sideways")


def test_worker_failure_names_the_element():
    prog = lambda_lift(parse_program("main w = farm (\\c. c + 1) w"))
    lst = cons_list([IntVal(1), ConVal("C2", ()), IntVal(3)])
    with pytest.raises(EvalError, match="element 1"):
        run(prog, ExecConfig(mode="parallel", workers=3), [lst])


# ---------------------------------------------------------------------------
# whole-program execution


def sample_args(name, rng):
    if name.startswith("matmul"):
        return matmul_args(*matmul_inputs(rng, rng.randint(1, 5)))
    return tree_args(random_tree(rng, rng.randrange(14)),
                     random_tree(rng, rng.randrange(14)))


def test_sequential_run_agrees_with_evaluate():
    rng = random.Random(12)
    for name in corpus.corpus_names():
        prog = load(name)
        args = sample_args(name, rng)
        assert values_equal(run(prog, ExecConfig(), args),
                            evaluate(prog, args))


def test_parallel_determinism_on_skeletonized_corpus():
    rng = random.Random(13)
    for name in ("matmul_enc_par", "tree_dot_enc_par", "matmul_farm"):
        prog = load(name)
        for _ in range(3):
            args = sample_args(name, rng)
            want = run(prog, ExecConfig(mode="sequential"), args)
            for w in (1, 2, 4, 8):
                for ch in ("rr", "block"):
                    cfg = ExecConfig(mode="parallel", workers=w, chunking=ch)
                    assert values_equal(run(prog, cfg, args), want), (name, w, ch)


def test_parallel_determinism_on_extracted_program():
    from skelc.extract import extract_program

    rng = random.Random(14)
    sk = extract_program(load("matmul_enc"))
    base = load("matmul_enc")
    for _ in range(3):
        args = sample_args("matmul_enc", rng)
        want = run(base, ExecConfig(), args)
        got = run(sk, ExecConfig(mode="parallel", workers=2), args)
        assert values_equal(got, want)


def test_stats_shape_and_task_accounting():
    rng = random.Random(15)
    prog = load("matmul_enc_par")
    args = matmul_args(*matmul_inputs(rng, 6))
    v, st = run_with_stats(prog, ExecConfig(mode="parallel", workers=3), args)
    assert isinstance(st, RunStats)
    j = st.to_json()
    assert set(j) == {"wall_ms", "per_worker_busy_ms", "tasks"}
    assert j["tasks"] >= 1 and len(j["per_worker_busy_ms"]) >= 3
    assert st.elements == 7  # six row cells plus the terminal cell
    # inner skeleton calls run inside workers, never through the engine
    assert st.nested_sequential == 0


def test_nested_skeleton_in_combine_runs_sequentially():
    src = ("main w v = mapReduce1 w "
           "(\\a. \\b. (a + b) + (mapReduce1 v (\\c. \\d. c + d) (\\x. x))) "
           "(\\x. x)")
    prog = lambda_lift(parse_program(src))
    args = [int_list_value([1, 2, 3]), int_list_value([5, 7])]
    want = run(prog, ExecConfig(), args)
    got, st = run_with_stats(prog, ExecConfig(mode="parallel", workers=2), args)
    assert values_equal(got, want) and got.value == 30
    assert st.nested_sequential >= 2  # one demotion per combine application
    assert st.tasks >= 2


def test_sequential_stats_report_no_tasks():
    prog = load("tree_dot")
    args = tree_args(random_tree(random.Random(1), 6),
                     random_tree(random.Random(2), 6))
    _, st = run_with_stats(prog, ExecConfig(), args)
    assert st.tasks == 0 and st.elements == 0
    assert st.wall_ms >= 0


def test_run_checks_argument_count():
    prog = load("matmul")
    with pytest.raises(EvalError):
        run(prog, ExecConfig(), [IntVal(1)])


# ---------------------------------------------------------------------------
# randomized determinism sweep (small-scale version of the acceptance run)


def test_randomized_parallel_sweep():
    rng = random.Random(16)
    for name in ("matmul_enc_par", "tree_dot_enc_par"):
        prog = load(name)
        for _ in range(6):
            args = sample_args(name, rng)
            want = run(prog, ExecConfig(), args)
            w = rng.choice([1, 2, 4, 8])
            ch = rng.choice(["rr", "block"])
            cfg = ExecConfig(mode="parallel", workers=w, chunking=ch)
            assert values_equal(run(prog, cfg, args), want), (name, w, ch)
