"""Acceptance suite: one pass/fail line per criterion.

The numerical thresholds live with each criterion in ``symlab.checks``; this file drives
the full ``all-paper-checks`` run once (seed 7), asserts every verdict and runtime limit,
then reruns the command in a fresh process for the byte-identity criterion.
"""
import subprocess
import sys
import time
from pathlib import Path

import pytest

from conftest import ACCEPTANCE_LINES
from symlab import checks, cli

SEED = 7
COMMAND = "all-paper-checks"


def _line(key: int, title: str, ok: bool, seconds: float, limit: float | None, note: str = "") -> str:
    budget = f"{seconds:.1f} s / {limit:g} s" if limit else f"{seconds:.1f} s"
    tail = f"  {note}" if note else ""
    return f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {title} ({budget}){tail}"


@pytest.fixture(scope="module")
def first_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance") / "A"
    run = cli.prepare(COMMAND, {}, SEED, 1)
    rep, res = cli.execute(run)
    cli.write_outputs(run, rep, out)
    return out, res


def _summary(res: checks.CriterionResult) -> str:
    bad = [c.name for c in res.checks if not c.passed]
    if bad:
        return "failing: " + "; ".join(bad)
    return ", ".join(f"{k}={v:.4g}" for k, v in res.metrics.items() if isinstance(v, float))[:160]


@pytest.mark.parametrize("key", sorted(checks.CRITERIA))
def test_criterion(first_run, key):
    _, results = first_run
    res = results[key]
    in_time = res.seconds < res.limit
    ok = res.passed and in_time
    note = _summary(res) if in_time else f"over the {res.limit:g} s limit; " + _summary(res)
    line = _line(key, res.title, ok, res.seconds, res.limit, note)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert not res.skipped
    assert res.passed, [f"{c.name}: {c.detail}" for c in res.checks if not c.passed]
    assert in_time, f"{res.seconds:.1f} s > {res.limit:g} s"


def test_criterion_10_byte_identical_rerun(first_run):
    out_a, results = first_run
    out_b = out_a.parent / "B"
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "symlab", COMMAND, "--seed", str(SEED), "--out", str(out_b)],
                          capture_output=True, text=True)
    seconds = time.perf_counter() - t0
    names = sorted(p.name for p in out_a.iterdir())
    same = {n: (out_b / n).exists() and (out_a / n).read_bytes() == (out_b / n).read_bytes() for n in names}
    replay = results[10]
    ok = proc.returncode == 0 and all(same.values()) and replay.passed
    line = _line(10, "determinism", ok, seconds, None, f"files {names}, in-report replay {replay.metrics}")
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert proc.returncode == 0, proc.stderr[-2000:]
    assert f"{COMMAND}.json" in names
    assert all(same.values()), same
    assert replay.passed
    assert sorted(p.name for p in Path(out_b).iterdir()) == names
