"""Acceptance suite: every criterion at desk-preset parameters, one PASS/FAIL line each.

Lines are printed live and repeated in the terminal summary. Criteria 16 and 17 are
known to miss their tolerances at desk scale; they fail here rather than being relaxed.
"""
import pytest

from conftest import ACCEPTANCE_LINES
from cuspml.config import build_config, criterion_params
from cuspml.experiments import EXPERIMENTS, RunContext, run_criterion

_OWNER = {n: e for e, ns in EXPERIMENTS.items() for n in ns}
_CTX = {}


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_fmt(x)}" for k, x in v.items()) + "}"
    return str(v)


def _check(n):
    exp = _OWNER[n]
    cfg = build_config(exp, "desk")
    ctx = _CTX.setdefault(exp, RunContext(seed=cfg["seed"]))
    res = run_criterion(n, criterion_params(cfg, n), ctx)
    line = f"criterion {n:2d} {res.name:<20s} {'PASS' if res.passed else 'FAIL'}  {_fmt(res.summary)}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert res.passed, line


@pytest.mark.slow
@pytest.mark.parametrize("n", sorted(_OWNER), ids=lambda n: f"criterion_{n:02d}")
def test_acceptance(n):
    _check(n)
