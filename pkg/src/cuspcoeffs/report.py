"""Check records, verification reports and deterministic JSON.

Every float is written with 17 significant digits and every mapping keeps its
insertion order, so two runs of the same command give byte-identical output.
Complex numbers become {"re": .., "im": ..}.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = ["PROVENANCES", "Check", "VerificationReport", "to_jsonable", "dumps"]

PROVENANCES = ("input", "oracle", "product_formula", "closed_form")


@dataclass
class Check:
    id: str
    contract: str
    passed: bool
    residual: float | None = None
    tolerance: float | None = None
    inputs: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)  # quantity -> one of PROVENANCES
    values: dict = field(default_factory=dict)
    skipped: str = ""
    seconds: float | None = None  # wall time; kept out of JSON so output stays reproducible

    @property
    def status(self) -> str:
        if self.skipped:
            return "skip"
        return "pass" if self.passed else "fail"


@dataclass
class VerificationReport:
    suite: str
    checks: list = field(default_factory=list)

    def sorted(self) -> "VerificationReport":
        return VerificationReport(self.suite, sorted(self.checks, key=lambda c: c.id))

    @property
    def summary(self) -> dict:
        counts = {"pass": 0, "fail": 0, "skip": 0}
        for c in self.checks:
            counts[c.status] += 1
        counts["total"] = len(self.checks)
        return counts

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "summary": self.summary,
            "passed": self.passed,
            "checks": [check_to_dict(c) for c in self.sorted().checks],
        }


def check_to_dict(c: Check) -> dict:
    return {
        "id": c.id,
        "status": c.status,
        "contract": c.contract,
        "residual": c.residual,
        "tolerance": c.tolerance,
        "inputs": c.inputs,
        "provenance": c.provenance,
        "values": c.values,
        "skipped": c.skipped,
    }


def to_jsonable(obj):
    """Plain Python structure with fixed key order; floats stay floats for the emitter."""
    if isinstance(obj, (bool, type(None), str, int)) and not isinstance(obj, np.integer):
        return obj
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, Check):
        return to_jsonable(check_to_dict(obj))
    if isinstance(obj, VerificationReport):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in obj]
    return str(obj)


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    # keep floats recognisable as floats when read back (1.0 not 1, -0.0 not -0)
    return text if any(ch in text for ch in ".e") else text + ".0"


def _emit(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return _float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_emit(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if not obj:
        return "[]"
    items = [pad + _emit(v, indent, level + 1) for v in obj]
    return "[\n" + ",\n".join(items) + "\n" + end + "]"


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON: insertion-ordered keys, floats as %.17g, non-finite floats as strings."""
    return _emit(to_jsonable(obj), indent, 0)
