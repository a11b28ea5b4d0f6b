"""Shared fixtures: the three canonical runs, built once per session.

The acceptance tests need wall-clock budgets for the *construction*
work, so each fixture captures its own build time separately from any
later checking the tests do.
"""

import time

import pytest
from hypothesis import HealthCheck, settings

from lacuna import ConstantProfile, build_report, preset, run

settings.register_profile(
    "suite",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def reference_run():
    """Dyadic plan, default constants, 16 steps, plus its full report."""
    t0 = time.perf_counter()
    state = run(preset("dyadic", N=16), ConstantProfile())
    report = build_report(state)
    elapsed = time.perf_counter() - t0
    return state, report, elapsed


@pytest.fixture(scope="session")
def stress_run():
    """Aggressive thresholds: real exclusions, then survivor collapse."""
    plan = preset("geometric", N=40, q="1.3", m_1=50)
    profile = ConstantProfile(beta=0.5, a_offset=2.0, a_slope=3.0)
    t0 = time.perf_counter()
    state = run(plan, profile, tolerate_collapse=True)
    report = build_report(state)
    elapsed = time.perf_counter() - t0
    return state, report, elapsed


@pytest.fixture(scope="session")
def corollary_runs():
    """Shrinking-width plans for three decay exponents, with reports."""
    out = {}
    for eps in (0.0, 0.5, 0.75):
        t0 = time.perf_counter()
        state = run(preset("corollary", N=14, eps=eps), ConstantProfile())
        report = build_report(state)
        out[eps] = (state, report, time.perf_counter() - t0)
    return out
