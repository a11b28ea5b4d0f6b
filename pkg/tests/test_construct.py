"""Inductive block construction: records, synthesis, persistence."""

import dataclasses
import math
from fractions import Fraction

import numpy as np
import pytest

import oracles
from lacuna import (
    ConstantProfile,
    InvalidParam,
    LambdaCollapse,
    PlanError,
    RunOptions,
    StepRecord,
    compute_a,
    init,
    load_run,
    preset,
    run,
    save_run,
    step,
    synthesize_block,
    tau_profile,
    timed_run,
    validate,
)
from lacuna.circleset import ArcSet
from lacuna.trigpoly import point_eval


def _collapsing_setup():
    """A tiny configuration whose survivor set empties within a few steps."""
    plan = preset("geometric", N=8, q="1.5", m_1=12)
    profile = ConstantProfile(beta=0.25, a_offset=1.0, a_slope=0.5)
    return plan, profile


# ---------------------------------------------------------------------------
# profile and options


def test_profile_derives_threshold_coefficient():
    p = ConstantProfile()
    assert p.beta == pytest.approx(7.0 * math.sqrt(2.0))
    assert p.is_reference
    q = ConstantProfile(c_h=2.0)
    assert q.beta == pytest.approx(14.0)
    assert not q.is_reference


def test_profile_beta_override_flagged():
    p = ConstantProfile(beta=0.5)
    assert p.beta == 0.5
    assert p.beta_overridden
    assert not p.is_reference
    back = ConstantProfile.from_json_obj(p.to_json_obj())
    assert back.beta == 0.5 and back.beta_overridden


def test_profile_round_trip_keeps_derived_beta():
    p = ConstantProfile(c_h=3.0)
    back = ConstantProfile.from_json_obj(p.to_json_obj())
    assert back.beta == pytest.approx(p.beta)
    assert not back.beta_overridden


def test_profile_rejects_nonpositive():
    with pytest.raises(InvalidParam):
        ConstantProfile(alpha=0.0)
    with pytest.raises(InvalidParam):
        ConstantProfile(beta=-1.0)


def test_run_options_validation_and_env(monkeypatch):
    with pytest.raises(InvalidParam):
        RunOptions(norm_oversample=4)
    with pytest.raises(InvalidParam):
        RunOptions(tol_x=0.0)
    monkeypatch.setenv("LACUNA_THREADS", "3")
    assert RunOptions().resolved_threads() == 3
    monkeypatch.setenv("LACUNA_THREADS", "zero")
    with pytest.raises(InvalidParam):
        RunOptions().resolved_threads()
    monkeypatch.delenv("LACUNA_THREADS")
    assert RunOptions(threads=2).resolved_threads() == 2
    assert RunOptions().resolved_threads() >= 1


def test_exclusion_age_formula():
    plan = preset("dyadic", N=4)
    prof = ConstantProfile()
    reduced = init(plan, prof).plan
    b = reduced.block(3)
    expect = 45.0 + 30.0 * math.log(b.m / b.d_eff) / math.log(2.0)
    assert compute_a(3, reduced, prof) == pytest.approx(expect)


# ---------------------------------------------------------------------------
# block synthesis


def test_synthesize_full_lattice_collapses_to_single_mode():
    m, d = 64, 23
    ls = np.arange(1, d + 1)
    p = synthesize_block(m, d, ls)
    K = (d - 1) // 2
    assert p.min_freq == p.max_freq == m + K
    assert p.coeffs[0] == 0.5 + 0.0j
    assert p.carrier == m + K


@pytest.mark.parametrize("d", [5, 8, 13])
def test_synthesize_partial_matches_double_sum(d):
    rng = np.random.default_rng(d)
    m = 40
    ls = np.sort(rng.choice(np.arange(1, d + 1), size=d - 2, replace=False))
    p = synthesize_block(m, d, ls)
    brute = oracles.brute_block_coeffs_pure(m, d, ls)
    K = (d - 1) // 2
    assert p.min_freq == m
    assert p.max_freq == m + 2 * K
    for idx, freq in enumerate(range(p.min_freq, p.max_freq + 1)):
        assert p.coeffs[idx] == pytest.approx(brute[freq], abs=1e-14)


def test_synthesize_spectrum_inside_window():
    for d in (4, 9, 17):
        p = synthesize_block(100, d, np.arange(1, d))
        assert 100 <= p.min_freq
        assert p.max_freq < 100 + d


def test_synthesize_rejects_foreign_lattice_points():
    with pytest.raises(ValueError):
        synthesize_block(10, 5, np.array([0]))
    with pytest.raises(ValueError):
        synthesize_block(10, 5, np.array([6]))


# ---------------------------------------------------------------------------
# stepping


def test_init_builds_synthetic_first_record():
    state = init(preset("dyadic", N=3), ConstantProfile())
    assert state.steps_completed == 1
    rec = state.records[0]
    assert rec.n == 1
    assert rec.block_l1_exact == Fraction(1)
    assert rec.survivor_count == state.plan.block(1).d_eff
    assert rec.synthetic_survivors
    d1 = state.delta(1)
    assert d1.min_freq == state.plan.block(1).m and len(d1) == 1
    assert rec.partial_sup.lower == pytest.approx(1.0, abs=1e-12)


def test_init_auto_reduces_widths():
    plan = preset("dyadic", N=3)  # preset widths are unreduced
    state = init(plan, ConstantProfile())
    assert state.plan.is_reduced
    assert state.plan.block(1).d_eff == math.floor(4 * math.log(2.0))


def test_step_appends_consistent_records():
    state = init(preset("dyadic", N=5), ConstantProfile())
    while state.steps_completed < 5:
        rec = step(state)
        n = rec.n
        b = state.plan.block(n)
        assert rec.threshold == pytest.approx(state.profile.beta * math.sqrt(n))
        assert rec.survivor_count == rec.survivor_set().size
        assert rec.block_l1_exact == Fraction(rec.survivor_count, 2 * b.d_eff)
        assert rec.a_n == pytest.approx(compute_a(n, state.plan, state.profile))
        assert rec.partial_sup is not None and rec.partial_l2 is not None
    from lacuna.errors import LacunaError
    with pytest.raises(LacunaError):
        step(state)  # plan exhausted


def test_step_requires_initialized_state():
    plan = preset("dyadic", N=3)
    state = init(plan, ConstantProfile())
    state.records.clear()
    state.partials.clear()
    state.deltas.clear()
    from lacuna.errors import LacunaError
    with pytest.raises(LacunaError):
        step(state)


def test_run_collapse_raises_without_tolerance():
    plan, profile = _collapsing_setup()
    with pytest.raises(LambdaCollapse) as exc:
        run(plan, profile)
    assert exc.value.record is not None
    assert exc.value.record.collapsed
    assert exc.value.record.survivor_count == 0


def test_run_collapse_tolerated_keeps_partial():
    plan, profile = _collapsing_setup()
    state = run(plan, profile, tolerate_collapse=True)
    assert state.collapsed_at is not None
    assert state.steps_completed == state.collapsed_at - 1
    assert state.collapse_record.collapsed
    # diagnostics retained for the failed step
    assert state.collapse_record.expanded_measure > 0.0


def test_run_hooks_observe_every_record():
    seen = []
    run(preset("dyadic", N=4), ConstantProfile(),
        hooks=lambda st, rec: seen.append(rec.n))
    assert seen == [1, 2, 3, 4]


def test_run_n_out_of_range():
    plan = preset("dyadic", N=3)
    with pytest.raises(PlanError):
        run(plan, ConstantProfile(), N=7)
    with pytest.raises(PlanError):
        run(plan, ConstantProfile(), N=0)


def test_timed_run_returns_elapsed():
    state, secs = timed_run(preset("dyadic", N=3), ConstantProfile())
    assert state.steps_completed == 3
    assert secs >= 0.0


# ---------------------------------------------------------------------------
# stopping profile


def test_tau_profile_on_reference(reference_run):
    state, _, _ = reference_run
    n = 10
    xs = np.linspace(0, 2 * math.pi, 64, endpoint=False)
    taus, degen = tau_profile(state, n, xs)
    assert taus.shape == xs.shape and degen.shape == xs.shape
    theta = state.profile.beta * math.sqrt(n)
    # reference thresholds dwarf the partial sums: last qualifying index
    assert not degen.any()
    assert np.all(taus == n - 1)
    # cross-check a few points directly
    for x, t in zip(xs[:5], taus[:5]):
        vals = [abs(point_eval(state.partial(j), np.array([x]))[0])
                for j in range(1, n)]
        best = max((j for j, v in enumerate(vals, start=1) if v <= theta),
                   default=0)
        assert best == t


def test_tau_profile_flags_degenerate_points(stress_run):
    state, _, _ = stress_run
    n = min(20, state.steps_completed)
    xs = np.linspace(0, 2 * math.pi, 256, endpoint=False)
    taus, degen = tau_profile(state, n, xs)
    theta = state.profile.beta * math.sqrt(n)
    stacked = np.stack([np.abs(point_eval(state.partial(j), xs))
                        for j in range(1, n)])
    ok = stacked <= theta
    expect_degen = ~ok.any(axis=0)
    assert np.array_equal(degen, expect_degen)
    assert np.all(taus[degen] == 0)
    if (~degen).any():
        last = (n - 1) - np.argmax(ok[::-1, :], axis=0)
        assert np.array_equal(taus[~degen], last[~degen])


# ---------------------------------------------------------------------------
# persistence


def test_save_load_round_trip(tmp_path):
    state, _ = timed_run(preset("dyadic", N=5), ConstantProfile())
    outdir = save_run(state, tmp_path / "r5", wall_clock=None)
    back = load_run(outdir)
    assert back.steps_completed == 5
    assert back.plan.q == state.plan.q
    for n in range(1, 6):
        a, b = state.delta(n), back.delta(n)
        assert a.min_freq == b.min_freq
        assert np.array_equal(a.coeffs, b.coeffs)
    for ra, rb in zip(state.records, back.records):
        assert ra.to_json_obj() == rb.to_json_obj()


def test_save_load_round_trip_with_collapse(tmp_path):
    plan, profile = _collapsing_setup()
    state = run(plan, profile, tolerate_collapse=True)
    outdir = save_run(state, tmp_path / "c", wall_clock=1.5)
    back = load_run(outdir)
    assert back.collapsed_at == state.collapsed_at
    assert back.collapse_record.to_json_obj() == \
        state.collapse_record.to_json_obj()


def test_save_is_deterministic(tmp_path):
    s1, _ = timed_run(preset("dyadic", N=4), ConstantProfile())
    s2, _ = timed_run(preset("dyadic", N=4), ConstantProfile())
    d1 = save_run(s1, tmp_path / "a", wall_clock=None)
    d2 = save_run(s2, tmp_path / "b", wall_clock=None)
    files1 = sorted(p.name for p in d1.iterdir())
    files2 = sorted(p.name for p in d2.iterdir())
    assert files1 == files2
    for name in files1:
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes(), name


def test_load_rejects_tampered_final_sum(tmp_path):
    state, _ = timed_run(preset("dyadic", N=3), ConstantProfile())
    outdir = save_run(state, tmp_path / "t", wall_clock=None)
    target = outdir / "S_003.lacf"
    data = bytearray(target.read_bytes())
    data[-1] ^= 0xFF
    target.write_bytes(bytes(data))
    from lacuna.errors import LacunaError
    with pytest.raises(LacunaError):
        load_run(outdir)


def test_step_record_json_round_trip():
    rec = StepRecord(
        n=3, threshold=1.5, a_n=47.0, used_j_lo=1, used_j_hi=2,
        level_stats=(), union_measure=0.25, expanded_measure=0.5,
        expanded_components=2, survivor_count=9,
        survivor_ranges=((1, 4), (7, 11)),
        block_l1_exact=Fraction(9, 22), block_sup=None, partial_sup=None,
        partial_l2=1.25,
    )
    back = StepRecord.from_json_obj(rec.to_json_obj())
    assert back.block_l1_exact == Fraction(9, 22)
    assert back.survivor_ranges == ((1, 4), (7, 11))
    assert np.array_equal(back.survivor_set(), rec.survivor_set())
