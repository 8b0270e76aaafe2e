"""The whole source-to-source pipeline as one call.

parse -> lift -> validate -> encode -> identify -> extract, with an
optional randomized equivalence check of the final program against the
input.  A parse failure aborts; a validation failure only flags the
report (encoding is still attempted); any later stage error is recorded
on its stage and the stages after it are skipped.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from .distilled import DistilledReport, validate_distilled
from .encode import EncodeError, EquivReport, check_equivalence, encode_program
from .extract import extract_program
from .interp import DEFAULT_FUEL, EvalError, FuelError
from .lift import lambda_lift
from .lts import LtsError
from .matching import identify
from .parser import ParseError, parse_program
from .syntax import Program
from .templates import SkeletonTemplate

STAGES = ("parse", "lift", "validate", "encode", "identify", "extract",
          "equivalence")


@dataclass
class StageStatus:
    stage: str
    ok: bool
    detail: str = ""
    wall_ms: float = 0.0


@dataclass
class PipelineReport:
    name: str
    stages: list[StageStatus] = field(default_factory=list)
    program: Optional[Program] = None  # parsed and lifted input
    encoded: Optional[Program] = None
    extracted: Optional[Program] = None
    encoded_types: tuple[str, ...] = ()  # type declarations encode added
    identification: tuple[tuple[str, Optional[str]], ...] = ()
    validation: Optional[DistilledReport] = None
    equivalence: Optional[EquivReport] = None
    flagged: bool = False  # validation failed but the run continued

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.stages)

    def stage(self, name: str) -> Optional[StageStatus]:
        for s in self.stages:
            if s.stage == name:
                return s
        return None

    def format(self) -> str:
        lines = [f"pipeline: {self.name}"]
        for s in self.stages:
            mark = "ok" if s.ok else "FAILED"
            note = f"  ({s.detail})" if s.detail else ""
            lines.append(f"  {s.stage:<12} {mark:<7} {s.wall_ms:8.1f} ms{note}")
        if self.identification:
            lines.append("  identified skeletons:")
            for fname, skel in self.identification:
                lines.append(f"    {fname} -> {skel or '-'}")
        if self.flagged:
            lines.append("  warning: input does not have the distilled shape")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "ok": self.ok,
            "flagged": self.flagged,
            "stages": [
                {
                    "stage": s.stage,
                    "ok": s.ok,
                    "detail": s.detail,
                    "wall_ms": round(s.wall_ms, 3),
                }
                for s in self.stages
            ],
            "encoded_types": list(self.encoded_types),
            "identification": [
                {"function": f, "skeleton": t} for f, t in self.identification
            ],
            "equivalence": None
            if self.equivalence is None
            else {
                "trials": self.equivalence.trials,
                "failures": list(self.equivalence.failures),
            },
        }


def run_pipeline(
    source: str,
    name: str = "<input>",
    seed: int = 0,
    trials: int = 20,
    size: int = 6,
    fuel: int = DEFAULT_FUEL,
    templates: Optional[tuple[SkeletonTemplate, ...]] = None,
) -> PipelineReport:
    report = PipelineReport(name)

    def stage(label: str, fn):
        t0 = time.perf_counter()
        try:
            out = fn()
        except (ParseError, EncodeError, LtsError, EvalError, FuelError,
                ValueError) as exc:
            report.stages.append(
                StageStatus(label, False, f"{type(exc).__name__}: {exc}",
                            (time.perf_counter() - t0) * 1000.0)
            )
            return None, False
        report.stages.append(
            StageStatus(label, True, "", (time.perf_counter() - t0) * 1000.0)
        )
        return out, True

    parsed, ok = stage("parse", lambda: parse_program(source))
    if not ok:
        return report

    lifted, ok = stage("lift", lambda: lambda_lift(parsed))
    if not ok:
        return report
    report.program = lifted

    shape, ok = stage("validate", lambda: validate_distilled(lifted))
    if ok:
        report.validation = shape
        if not shape.ok:
            report.flagged = True
            report.stages[-1].detail = (
                f"{len(shape.violations)} violation(s); continuing"
            )

    enc, ok = stage("encode", lambda: encode_program(lifted))
    if not ok:
        return report
    before = {d.name for d in lifted.type_decls}
    report.encoded = lambda_lift(enc.program)
    report.encoded_types = tuple(
        d.name for d in enc.program.type_decls if d.name not in before
    )
    if enc.notes:
        report.stages[-1].detail = "; ".join(enc.notes)

    table, ok = stage("identify", lambda: identify(report.encoded))
    if not ok:
        return report
    report.identification = tuple(table)
    covered = {fname for fname, _ in table}
    missing = [
        e.new_name
        for e in enc.encoded.values()
        if e.new_name not in covered
    ]
    if missing:
        report.stages[-1].ok = False
        report.stages[-1].detail = (
            "identification table misses encoded functions: "
            + ", ".join(missing)
        )
        return report

    extracted, ok = stage(
        "extract", lambda: extract_program(report.encoded, templates)
    )
    if not ok:
        return report
    report.extracted = extracted

    def equiv():
        try:
            return check_equivalence(
                lifted, extracted, seed=seed, trials=trials, size=size,
                fuel=fuel,
            )
        except EncodeError as exc:
            # input generation needs a signed entry point; absence is a
            # property of the input, not a pipeline failure
            report.stages.append(
                StageStatus("equivalence", True, f"skipped: {exc}", 0.0)
            )
            return None

    t0 = time.perf_counter()
    try:
        eq = equiv()
    except (EvalError, FuelError) as exc:
        report.stages.append(
            StageStatus("equivalence", False, f"{type(exc).__name__}: {exc}",
                        (time.perf_counter() - t0) * 1000.0)
        )
        return report
    if eq is not None:
        report.equivalence = eq
        report.stages.append(
            StageStatus(
                "equivalence",
                eq.ok,
                eq.format() if not eq.ok else f"{eq.trials} trials agree",
                (time.perf_counter() - t0) * 1000.0,
            )
        )
    return report
