"""Check records, reports and a deterministic JSON writer."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

SCHEMA = "halphen-lab/1"
PASS, FAIL, FLAGGED = "pass", "fail", "flagged"


@dataclass
class Check:
    id: str
    ref: str
    status: str
    residual: float
    tolerance: float
    note: str = ""
    runtime_ms: float | None = None

    def as_dict(self, timings: bool = False) -> dict:
        out = {
            "id": self.id,
            "ref": self.ref,
            "status": self.status,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "runtime_ms": self.runtime_ms if timings else None,
        }
        if self.note:
            out["note"] = self.note
        return out


def judge(residual: float, tolerance: float) -> str:
    return PASS if math.isfinite(residual) and residual <= tolerance else FAIL


@dataclass
class Report:
    suite: str
    version: str
    config: dict
    checks: list[Check] = field(default_factory=list)

    def sorted_checks(self) -> list[Check]:
        return sorted(self.checks, key=lambda c: c.id)

    @property
    def ok(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    def counts(self) -> dict[str, int]:
        out = {PASS: 0, FAIL: 0, FLAGGED: 0}
        for c in self.checks:
            out[c.status] += 1
        return out

    def as_dict(self, timings: bool = False) -> dict:
        counts = self.counts()
        return {
            "schema": SCHEMA,
            "version": self.version,
            "suite": self.suite,
            "config": self.config,
            "summary": {
                "total": len(self.checks),
                "passed": counts[PASS],
                "failed": counts[FAIL],
                "flagged": counts[FLAGGED],
                "status": PASS if self.ok else FAIL,
            },
            "checks": [c.as_dict(timings) for c in self.sorted_checks()],
        }

    def text(self) -> str:
        lines = []
        for c in self.sorted_checks():
            lines.append(f"{c.status:<8}{c.id:<44}residual={c.residual:.3e}  tol={c.tolerance:.1e}")
            if c.note:
                lines.append(f"        {c.note}")
        counts = self.counts()
        lines.append(
            f"{len(self.checks)} checks: {counts[PASS]} pass, {counts[FAIL]} fail, {counts[FLAGGED]} flagged"
        )
        return "\n".join(lines)


# -- JSON ------------------------------------------------------------------------


def _number(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    if x == int(x) and abs(x) < 1e16:
        return repr(float(x))
    return format(x, ".17g")


def to_jsonable(obj: Any) -> Any:
    """Replace complex numbers by ``{"re", "im"}`` objects, recursively."""
    import numpy as np

    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    return obj


def _is_flat_pair(x) -> bool:
    return isinstance(x, dict) and len(x) <= 2 and all(not isinstance(v, (dict, list)) for v in x.values())


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON with floats written to 17 significant digits; key order is preserved."""
    obj = to_jsonable(obj)

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if o is None:
            return "null"
        if o is True:
            return "true"
        if o is False:
            return "false"
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return _number(o)
        if isinstance(o, str):
            return json.dumps(o, ensure_ascii=False)
        if isinstance(o, dict):
            if not o:
                return "{}"
            if len(o) <= 2 and all(not isinstance(v, (dict, list)) for v in o.values()):
                return "{" + ", ".join(f"{json.dumps(k)}: {enc(v, level + 1)}" for k, v in o.items()) + "}"
            items = [f"{pad}{json.dumps(k)}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            scalars = all(not isinstance(x, (dict, list)) for x in o)
            if scalars or (len(o) <= 4 and all(_is_flat_pair(x) or not isinstance(x, (dict, list)) for x in o)):
                return "[" + ", ".join(enc(x, level + 1) for x in o) + "]"
            return "[\n" + ",\n".join(pad + enc(x, level + 1) for x in o) + "\n" + end + "]"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(obj, 0) + "\n"
