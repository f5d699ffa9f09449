"""JSON reports: a versioned schema with provenance-tagged numbers."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__

SCHEMA_VERSION = "1.0"
DIGITS = 12

COMPUTED = "computed"
CONFIGURED = "configured"
PASS = "pass"
FAIL = "fail"


def round_sig(x: float, digits: int = DIGITS):
    """Round to ``digits`` significant digits; non-finite values become strings."""
    x = float(x)
    if not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return float(f"{x:.{digits}g}")


def clean(obj: Any):
    """Make ``obj`` JSON-ready: numpy scalars and arrays, complex numbers, rounded floats."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_sig(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": round_sig(obj.real), "im": round_sig(obj.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return clean(obj.to_dict())
    return str(obj)


def tagged(value, provenance: str = COMPUTED):
    return {"value": value, "provenance": provenance}


def dumps(payload) -> str:
    return json.dumps(clean(payload), indent=2, sort_keys=True) + "\n"


def write_json(path, payload):
    with open(path, "w") as fh:
        fh.write(dumps(payload))


@dataclass
class CheckItem:
    name: str
    passed: bool
    values: dict = field(default_factory=dict)
    note: str = ""

    def to_dict(self):
        d = {"name": self.name, "verdict": PASS if self.passed else FAIL,
             "values": {k: tagged(v) for k, v in self.values.items()}}
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class VerificationReport:
    check: str
    module: str
    parameters: dict
    items: list = field(default_factory=list)
    duration: float | None = None

    @property
    def passed(self):
        return all(i.passed for i in self.items)

    def add(self, item: CheckItem):
        self.items.append(item)
        return item

    def to_dict(self, with_timing: bool = True):
        d = {
            "schema_version": SCHEMA_VERSION,
            "toolkit_version": __version__,
            "check": self.check,
            "module": self.module,
            "parameters": {k: tagged(v, CONFIGURED) for k, v in self.parameters.items()},
            "items": [i.to_dict() for i in self.items],
            "overall": PASS if self.passed else FAIL,
        }
        if with_timing and self.duration is not None:
            d["duration_s"] = self.duration
        return d


def hls_payload(report, command: dict):
    """HLS report wrapped in the common schema; no timing, so reruns are byte-identical."""
    d = report.to_dict()
    return {
        "schema_version": SCHEMA_VERSION,
        "toolkit_version": __version__,
        "check": "hls",
        "module": "inequalities",
        "parameters": {k: tagged(v, CONFIGURED) for k, v in command.items()},
        "c0_hat": tagged(report.c0_hat),
        "all_finite": report.all_finite,
        "max_scale_deviation": tagged(report.max_scale_deviation),
        "trials": d["trials"],
    }
