import json
import math

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from dbarucp import reports
from dbarucp.reports import CheckItem, VerificationReport, clean, dumps, round_sig


def test_round_sig():
    assert round_sig(math.pi) == 3.14159265359
    assert round_sig(math.inf) == "inf" and round_sig(-math.inf) == "-inf" and round_sig(math.nan) == "nan"
    assert round_sig(1.23456789e-30, 3) == 1.23e-30


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_round_sig_is_idempotent(x):
    assert round_sig(round_sig(x)) == round_sig(x)


def test_clean_handles_numpy_and_complex():
    out = clean({"a": np.float64(0.1), "b": np.arange(2), "c": 1 + 2j, "d": np.bool_(True), 3: None})
    assert out == {"a": 0.1, "b": [0, 1], "c": {"re": 1.0, "im": 2.0}, "d": True, "3": None}


def test_dumps_sorted_and_deterministic():
    s = dumps({"b": 1, "a": [1.0, 2.5]})
    assert s == dumps({"a": [1.0, 2.5], "b": 1})
    assert list(json.loads(s)) == ["a", "b"]


def test_verification_report_schema():
    rep = VerificationReport("identity", "operators", {"trials": 3})
    rep.add(CheckItem("residual", True, {"max": 1e-15}))
    d = rep.to_dict()
    assert d["schema_version"] == reports.SCHEMA_VERSION
    assert d["parameters"]["trials"] == {"value": 3, "provenance": "configured"}
    assert d["items"][0]["values"]["max"]["provenance"] == "computed"
    assert d["overall"] == "pass"
    rep.add(CheckItem("other", False, note="why"))
    assert not rep.passed and rep.to_dict()["items"][1]["note"] == "why"


def test_timing_optional():
    rep = VerificationReport("x", "y", {}, duration=1.5)
    assert "duration_s" in rep.to_dict() and "duration_s" not in rep.to_dict(with_timing=False)
