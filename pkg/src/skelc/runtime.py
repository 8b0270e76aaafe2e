"""Sequential reference skeletons and the parallel worker-pool backend.

Parallel execution forks a pool of worker processes per skeleton call
site.  The element list, the operator value and the evaluation settings
are published in a module global immediately before the fork, so the
children inherit them through process memory and only small index lists
and fully evaluated result Values ever cross the pipe.  Partitioning is
round-robin or contiguous blocks; results return to preassigned slots,
so the assembled output is identical to the sequential one no matter
how the work was spread.

Only the skeleton call in the program's top-level expression runs on
the pool.  While one is in flight, further skeleton applications —
inside the per-element operator (which executes in a worker with no
dispatcher installed) or inside the combine fold (which executes here,
behind the engine's re-entrancy guard) — fall back to the sequential
definitions, so worker processes never spawn their own pools.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from multiprocessing import get_context
from typing import Callable, Optional

from .interp import (
    DEFAULT_FUEL,
    EvalCtx,
    EvalError,
    Env,
    Thunk,
    apply_value,
    as_thunk,
    deep_force,
    eval_expr,
    force,
    list_cells,
    run_deep,
)
from .syntax import ConVal, Program, Value


class SkeletonError(EvalError):
    """A skeleton was called outside its contract."""


MODES = ("sequential", "parallel")
CHUNKINGS = ("rr", "block")
_MODE_ALIASES = {"seq": "sequential", "par": "parallel"}


@dataclass
class ExecConfig:
    mode: str = "sequential"
    workers: Optional[int] = None  # None: one per logical core
    chunking: str = "rr"
    fuel: int = DEFAULT_FUEL

    def __post_init__(self):
        self.mode = _MODE_ALIASES.get(self.mode, self.mode)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.chunking not in CHUNKINGS:
            raise ValueError(
                f"chunking must be one of {CHUNKINGS}, got {self.chunking!r}"
            )
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.fuel <= 0:
            raise ValueError("fuel must be positive")

    @property
    def parallel(self) -> bool:
        return self.mode == "parallel"

    def resolved_workers(self) -> int:
        return self.workers if self.workers is not None else os.cpu_count() or 1


@dataclass
class SkeletonCall:
    """One skeleton application: elements plus operator values."""

    name: str  # farm | map | mapReduce | mapReduce1
    elements: list  # element thunks or Values
    f: Value
    g: Optional[Value] = None

    def __post_init__(self):
        if self.name in ("map", "mapReduce", "mapReduce1") and not self.elements:
            raise SkeletonError(
                f"{self.name} skeleton needs a non-empty call structure"
            )
        if self.name in ("mapReduce", "mapReduce1") and self.g is None:
            raise SkeletonError(f"{self.name} skeleton needs a combine operator")


@dataclass
class RunStats:
    wall_ms: float = 0.0
    per_worker_busy_ms: list = field(default_factory=list)
    tasks: int = 0
    elements: int = 0  # f applications performed by the pool
    nested_sequential: int = 0  # skeleton calls demoted by the guard

    def to_json(self) -> dict:
        return {
            "wall_ms": self.wall_ms,
            "per_worker_busy_ms": self.per_worker_busy_ms,
            "tasks": self.tasks,
        }


def partition_indices(n: int, workers: int, chunking: str) -> list[list[int]]:
    """Non-empty per-worker index lists covering range(n) exactly once."""
    if n <= 0:
        return []
    if chunking == "rr":
        chunks = [list(range(k, n, workers)) for k in range(workers)]
    else:
        base, extra = divmod(n, workers)
        chunks, at = [], 0
        for k in range(workers):
            size = base + (1 if k < extra else 0)
            chunks.append(list(range(at, at + size)))
            at += size
    return [c for c in chunks if c]


# ---------------------------------------------------------------------------
# sequential reference operations


def _bare_ctx(fuel: int, skeletonized: bool = True) -> EvalCtx:
    return EvalCtx({}, skeletonized, fuel)


def _apply1(fv: Value, x, ctx: EvalCtx) -> Value:
    return apply_value(force(fv), as_thunk(x), ctx)


def _apply2(gv: Value, a, b, ctx: EvalCtx) -> Value:
    return apply_value(apply_value(force(gv), as_thunk(a), ctx), as_thunk(b), ctx)


def seq_map(xs: list, f: Value, fuel: int = DEFAULT_FUEL) -> list[Value]:
    """Order-preserving application of f to every element."""
    ctx = _bare_ctx(fuel)
    return [deep_force(_apply1(f, x, ctx)) for x in xs]


def seq_map_reduce(
    xs: list, g: Value, v: Value, f: Value, fuel: int = DEFAULT_FUEL
) -> Value:
    """Right fold of g over the images of f, with unit v."""
    ctx = _bare_ctx(fuel)
    acc: Value = v
    for x in reversed(xs):
        acc = _apply2(g, _apply1(f, x, ctx), acc, ctx)
    return deep_force(acc)


# ---------------------------------------------------------------------------
# the worker pool
#
# _TASK is published by the parent immediately before each pool fork and
# cleared right after; children read their inherited copy.  Tasks and
# results crossing the pipe are index lists and deep-forced Values.

_TASK = None  # (elements, f value, skeletonized, fuel)


def _worker_chunk(idxs: list[int]):
    elements, fv, skeletonized, fuel = _TASK
    t0 = time.perf_counter()

    def go():
        out = []
        for i in idxs:
            try:
                ctx = EvalCtx({}, skeletonized, fuel)
                out.append(deep_force(_apply1(fv, elements[i], ctx)))
            except Exception as exc:
                return ("err", i, f"{type(exc).__name__}: {exc}")
        return ("ok", out)

    r = run_deep(go)
    busy = (time.perf_counter() - t0) * 1000.0
    if r[0] == "err":
        return ("err", r[1], r[2], os.getpid(), busy)
    return ("ok", idxs, r[1], os.getpid(), busy)


class _PoolMapper:
    """Maps an operator value over elements across forked workers."""

    def __init__(self, cfg: ExecConfig, skeletonized: bool = True):
        self.cfg = cfg
        self.skeletonized = skeletonized
        self.tasks = 0
        self.elements = 0
        self._busy: dict[int, float] = {}  # worker slot -> busy ms
        self._slot_of: dict[int, int] = {}  # pid -> worker slot

    def _note(self, pid: int, busy: float) -> None:
        slot = self._slot_of.setdefault(pid, len(self._slot_of))
        self._busy[slot] = self._busy.get(slot, 0.0) + busy

    def busy_list(self) -> list[float]:
        n = max(self.cfg.resolved_workers(), len(self._busy))
        return [round(self._busy.get(k, 0.0), 3) for k in range(n)]

    def images(self, elements: list, f: Value) -> list[Value]:
        n = len(elements)
        if n == 0:
            return []
        self.elements += n
        workers = self.cfg.resolved_workers()
        fv = force(f)
        if workers == 1 or n == 1:
            t0 = time.perf_counter()
            ctx = EvalCtx({}, self.skeletonized, self.cfg.fuel)
            out = [deep_force(_apply1(fv, x, ctx)) for x in elements]
            self.tasks += 1
            self._note(os.getpid(), (time.perf_counter() - t0) * 1000.0)
            return out

        global _TASK
        chunks = partition_indices(n, workers, self.cfg.chunking)
        _TASK = (elements, fv, self.skeletonized, self.cfg.fuel)
        try:
            with get_context("fork").Pool(processes=len(chunks)) as pool:
                results = pool.map(_worker_chunk, chunks)
        finally:
            _TASK = None
        self.tasks += len(chunks)

        slots: list = [None] * n
        failure = None
        for r in results:
            if r[0] == "err":
                _, i, msg, pid, busy = r
                self._note(pid, busy)
                if failure is None:
                    failure = (i, msg)
                continue
            _, idxs, images, pid, busy = r
            self._note(pid, busy)
            for i, img in zip(idxs, images):
                slots[i] = img
        if failure is not None:
            raise EvalError(
                f"parallel worker failed at element {failure[0]}: {failure[1]}"
            )
        return slots


def _require_parallel(cfg: ExecConfig) -> None:
    if not cfg.parallel:
        raise SkeletonError("parallel skeleton called with a sequential config")


def par_farm(cfg: ExecConfig, xs: list, f: Value) -> list[Value]:
    """Partition xs across workers, apply f, reassemble in order."""
    _require_parallel(cfg)
    return _PoolMapper(cfg).images(list(xs), f)


def par_map_reduce1(
    cfg: ExecConfig, xs: list, g: Value, f: Value, direction: str = "right"
) -> Value:
    """Parallel map, then a sequential unit-less fold of g."""
    _require_parallel(cfg)
    if not xs:
        raise SkeletonError("mapReduce1 skeleton needs a non-empty element list")
    if direction not in ("right", "left"):
        raise ValueError(f"direction must be right or left, got {direction!r}")
    images = _PoolMapper(cfg).images(list(xs), f)
    ctx = _bare_ctx(cfg.fuel)
    if direction == "right":
        acc = images[-1]
        for img in reversed(images[:-1]):
            acc = _apply2(g, img, acc, ctx)
    else:
        acc = images[0]
        for img in images[1:]:
            acc = _apply2(g, acc, img, ctx)
    return deep_force(acc)


# ---------------------------------------------------------------------------
# program execution


class _Engine:
    """Intrinsic interceptor installed on the top-level context.

    Dispatches full skeleton applications to the pool; while one is in
    flight the guard demotes any further application back to the
    sequential intrinsic (the combine fold runs up here, so a skeleton
    call inside g lands in this branch; per-element work runs inside
    workers, which have no interceptor at all).
    """

    def __init__(self, cfg: ExecConfig, skeletonized: bool):
        self.cfg = cfg
        self.mapper = _PoolMapper(cfg, skeletonized)
        self.active = False
        self.nested_sequential = 0

    def stats(self, wall_ms: float) -> RunStats:
        return RunStats(
            wall_ms=round(wall_ms, 3),
            per_worker_busy_ms=self.mapper.busy_list(),
            tasks=self.mapper.tasks,
            elements=self.mapper.elements,
            nested_sequential=self.nested_sequential,
        )

    def __call__(self, name: str, args, ctx: EvalCtx) -> Optional[Value]:
        if self.active:
            self.nested_sequential += 1
            return None
        self.active = True
        try:
            if name == "farm":
                f, xs = args
                call = SkeletonCall("farm", list_cells(xs, "farm"), force(f))
                images = self.mapper.images(call.elements, call.f)
                out: Value = ConVal("Nil", ())
                for img in reversed(images):
                    out = ConVal("Cons", (img, out))
                return out
            if name == "map":
                w, f = args
                call = SkeletonCall("map", list_cells(w, "map"), force(f))
                images = self.mapper.images(call.elements, call.f)
                out = images[-1]  # terminal image is the tail
                for img in reversed(images[:-1]):
                    out = ConVal("Cons", (img, out))
                return out
            if name in ("mapReduce", "mapReduce1"):
                w, g, f = args
                call = SkeletonCall(
                    name, list_cells(w, name), force(f), force(g)
                )
                images = self.mapper.images(call.elements, call.f)
                acc = images[-1]  # terminal image seeds the right fold
                for img in reversed(images[:-1]):
                    acc = _apply2(call.g, img, acc, ctx)
                return acc
            return None
        finally:
            self.active = False


def run_with_stats(
    program: Program,
    cfg: Optional[ExecConfig] = None,
    args=None,
) -> tuple[Value, RunStats]:
    """Evaluate the program's main under the configured backend."""
    cfg = cfg if cfg is not None else ExecConfig()
    if program.main is None:
        raise EvalError("program has no main expression")
    args = list(args or [])
    if len(args) != len(program.main_params):
        raise EvalError(
            f"main takes {len(program.main_params)} arguments, got {len(args)}"
        )
    home = {d.name: d for d in program.defs}
    engine = _Engine(cfg, program.skeletonized)
    hook = engine if cfg.parallel else None
    ctx = EvalCtx(home, program.skeletonized, cfg.fuel, hook)
    env = Env(
        {n: Thunk.of(v) for n, v in zip(program.main_params, args)}, None
    )
    t0 = time.perf_counter()
    value = run_deep(
        lambda: deep_force(eval_expr(program.main, env, ctx, home))
    )
    wall = (time.perf_counter() - t0) * 1000.0
    return value, engine.stats(wall)


def run(
    program: Program, cfg: Optional[ExecConfig] = None, args=None
) -> Value:
    return run_with_stats(program, cfg, args)[0]
