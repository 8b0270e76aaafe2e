"""Benchmark harness over the bundled corpus.

Runs chosen program variants across input sizes and worker counts,
records median wall time over repeated runs, and reports speedups
against the family's sequential baseline program run on identical
inputs.  One failing or slow cell never aborts the sweep.
"""

from __future__ import annotations

import random
import statistics
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import corpus
from .generators import matmul_args, matmul_inputs, random_tree, tree_args
from .interp import DEFAULT_FUEL, INTRINSIC_ARITY, EvalError, FuelError
from .lift import lambda_lift
from .parser import parse_program
from .runtime import CHUNKINGS, ExecConfig, run
from .syntax import Program, free_fun_names

# Calls that reach the parallel dispatcher regardless of the program's
# skeleton marker (plain `map` only does under the marker).
_PARALLEL_CALLS = frozenset(INTRINSIC_ARITY) - {"map"}


@dataclass
class BenchCell:
    variant: str
    size: int
    workers: int
    median_ms: Optional[float]
    speedup: Optional[float]
    reps_done: int
    timed_out: bool = False
    error: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "size": self.size,
            "workers": self.workers,
            "median_ms": None if self.median_ms is None
            else round(self.median_ms, 3),
            "speedup": None if self.speedup is None
            else round(self.speedup, 3),
            "reps_done": self.reps_done,
            "timed_out": self.timed_out,
            "error": self.error,
        }


@dataclass
class BenchReport:
    cells: list[BenchCell] = field(default_factory=list)
    reps: int = 5
    chunking: str = "rr"
    seed: int = 0

    def to_csv(self) -> str:
        lines = ["variant,size,workers,median_ms,speedup"]
        for c in self.cells:
            if c.median_ms is None:
                continue  # nothing to plot; the error stays in the JSON
            spd = "" if c.speedup is None else f"{c.speedup:.3f}"
            lines.append(
                f"{c.variant},{c.size},{c.workers},{c.median_ms:.3f},{spd}"
            )
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "reps": self.reps,
            "chunking": self.chunking,
            "seed": self.seed,
            "cells": [c.to_json() for c in self.cells],
        }


def _family(variant: str) -> str:
    if variant in corpus.MATMUL_VARIANTS:
        return "matmul"
    if variant in corpus.TREE_VARIANTS:
        return "tree_dot"
    raise ValueError(f"unknown corpus variant: {variant}")


def bench_inputs(family: str, size: int, seed: int = 0) -> list:
    """Inputs for one (family, size) cell — identical across variants."""
    rng = random.Random(f"{seed}:{family}:{size}")
    if family == "matmul":
        return matmul_args(*matmul_inputs(rng, size))
    return tree_args(random_tree(rng, size), random_tree(rng, size))


def uses_parallel_backend(program: Program) -> bool:
    names: set[str] = set()
    for d in program.defs:
        for cl in d.clauses:
            names |= free_fun_names(cl.body)
    if program.main is not None:
        names |= free_fun_names(program.main)
    if names & _PARALLEL_CALLS:
        return True
    return program.skeletonized and "map" in names


def _measure(
    program: Program,
    args: list,
    cfg: ExecConfig,
    reps: int,
    timeout_s: Optional[float],
) -> tuple[list[float], bool]:
    """Wall times in ms for up to `reps` runs; True when the cell ran
    out of time budget before finishing them (checked between runs —
    a started run always completes)."""
    times: list[float] = []
    timed_out = False
    for _ in range(reps):
        t0 = time.perf_counter()
        run(program, cfg, args)
        times.append((time.perf_counter() - t0) * 1000.0)
        if (
            timeout_s is not None
            and sum(times) >= timeout_s * 1000.0
            and len(times) < reps
        ):
            timed_out = True
            break
    return times, timed_out


def bench(
    entries: Sequence[str],
    sizes: Sequence[int],
    workers: Sequence[int] = (1, 2, 4),
    reps: int = 5,
    chunking: str = "rr",
    seed: int = 0,
    fuel: int = DEFAULT_FUEL,
    timeout_s: Optional[float] = None,
) -> BenchReport:
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if chunking not in CHUNKINGS:
        raise ValueError(f"unknown chunking: {chunking!r}")
    report = BenchReport(reps=reps, chunking=chunking, seed=seed)

    programs: dict[str, Program] = {}

    def load(variant: str) -> Program:
        if variant not in programs:
            programs[variant] = lambda_lift(
                parse_program(corpus.corpus_source(variant))
            )
        return programs[variant]

    families = {_family(v) for v in entries}

    # Baseline: the family's sequential original on the same inputs.
    baseline_ms: dict[tuple[str, int], Optional[float]] = {}
    baseline_cells: dict[tuple[str, int], BenchCell] = {}
    seq = ExecConfig(mode="sequential", fuel=fuel)
    for family in sorted(families):
        base = corpus.BASELINES[family]
        prog = load(base)
        for size in sizes:
            args = bench_inputs(family, size, seed)
            cell = BenchCell(base, size, 1, None, None, 0)
            try:
                times, cell.timed_out = _measure(
                    prog, args, seq, reps, timeout_s
                )
                cell.reps_done = len(times)
                cell.median_ms = statistics.median(times)
                cell.speedup = 1.0
            except (EvalError, FuelError) as exc:
                cell.error = f"{type(exc).__name__}: {exc}"
            baseline_ms[(family, size)] = cell.median_ms
            baseline_cells[(family, size)] = cell

    for variant in entries:
        family = _family(variant)
        prog = load(variant)
        parallel = uses_parallel_backend(prog)
        worker_counts = list(workers) if parallel else [1]
        for size in sizes:
            args = bench_inputs(family, size, seed)
            base = baseline_ms[(family, size)]
            if variant == corpus.BASELINES[family]:
                # already measured as the baseline; reuse that cell so
                # its speedup is exactly 1.0
                report.cells.append(baseline_cells[(family, size)])
                continue
            for w in worker_counts:
                cfg = (
                    ExecConfig(
                        mode="parallel",
                        workers=w,
                        chunking=chunking,
                        fuel=fuel,
                    )
                    if parallel
                    else ExecConfig(mode="sequential", fuel=fuel)
                )
                cell = BenchCell(variant, size, w, None, None, 0)
                try:
                    times, cell.timed_out = _measure(
                        prog, args, cfg, reps, timeout_s
                    )
                    cell.reps_done = len(times)
                    cell.median_ms = statistics.median(times)
                    if base is not None and cell.median_ms > 0:
                        cell.speedup = base / cell.median_ms
                except (EvalError, FuelError) as exc:
                    cell.error = f"{type(exc).__name__}: {exc}"
                report.cells.append(cell)
    return report
