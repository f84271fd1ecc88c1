import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symlab import reports


def test_dumps_sorted_two_space():
    text = reports.dumps({"b": 1, "a": {"d": [1, 2], "c": True}})
    assert text == '{\n  "a": {\n    "c": true,\n    "d": [\n      1,\n      2\n    ]\n  },\n  "b": 1\n}\n'


def test_canonical_types():
    out = reports.canonical({"x": np.float64(0.1 + 0.2), "n": np.int64(3), "z": 1 + 2j, "arr": np.arange(3),
                             "flag": np.bool_(True), "bad": [float("nan"), float("inf"), -float("inf")]})
    assert out == {"x": 0.3, "n": 3, "z": [1.0, 2.0], "arr": [0, 1, 2], "flag": True, "bad": ["nan", "inf", "-inf"]}
    assert isinstance(out["n"], int) and isinstance(out["flag"], bool)


def test_canonical_rejects_objects():
    with pytest.raises(TypeError):
        reports.canonical({"x": object()})


@settings(max_examples=200, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_ten_digit_rounding_is_idempotent(x):
    once = reports.canonical(x)
    assert reports.canonical(once) == once
    if x != 0:
        assert abs(once - x) <= 5e-10 * abs(x)


def test_strict_json_roundtrip():
    text = reports.dumps({"v": [1e-300, 1e300, float("nan")]})
    assert json.loads(text) == {"v": [1e-300, 1e300, "nan"]}


def test_csv_format():
    text = reports.csv_text(["eta", "sigma", "ok"], [[16, 0.123456789012345, True], [64.0, float("nan"), False]])
    assert text == "eta,sigma,ok\n16,0.123456789,true\n64,nan,false\n"


def test_csv_row_length_checked():
    with pytest.raises(ValueError):
        reports.csv_text(["a", "b"], [[1]])


def test_svg_from_csv(tmp_path):
    reports.write_csv(tmp_path / "g.csv", ["eta", "sigma"], [[16, 1.8], [64, 3.6], [256, 7.2], [1024, -1.0]])
    reports.svg_from_csv(tmp_path / "g.csv", tmp_path / "g.svg", x="eta", ys=["sigma"], logx=True, logy=True,
                         title="t", fit=(0.5, 0.45))
    svg = (tmp_path / "g.svg").read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    # non-positive sample dropped on log axes: 3 data markers + 4 fit markers
    assert svg.count("<circle") == 3 + 3
    assert "stroke-dasharray" in svg


def test_svg_unknown_column(tmp_path):
    reports.write_csv(tmp_path / "g.csv", ["a", "b"], [[1, 2]])
    with pytest.raises(KeyError):
        reports.svg_from_csv(tmp_path / "g.csv", tmp_path / "g.svg", x="a", ys=["c"])


def test_report_verdict_and_schema():
    rep = reports.Report("certify", {"seed": 1})
    rep.check("one", True)
    assert rep.passed
    rep.check("two", False, "why")
    d = rep.to_dict()
    assert d["schema_version"] == reports.SCHEMA_VERSION
    assert d["pass"] is False and rep.failing == ["two"]
    assert set(d) == {"schema_version", "command", "config", "environment", "results", "evidence", "checks",
                      "pass", "files"}
    env = d["environment"]
    assert "python" in env and "numpy" in env and not any("host" in k for k in env)


def test_worker_map_preserves_order():
    with reports.worker_map(1) as m:
        assert list(m(math.sqrt, [4, 9])) == [2.0, 3.0]
    with reports.worker_map(2) as m:
        assert list(m(math.sqrt, [16, 1, 9])) == [4.0, 1.0, 3.0]
