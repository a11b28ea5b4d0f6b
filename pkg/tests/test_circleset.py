"""Arc algebra on the circle, checked against dense bitmask oracles."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from lacuna import ArcSet, LevelOptions, superlevel_arcs, survivors
from lacuna.circleset import (
    DEFAULT_TOL_X,
    expand,
    superlevel_from_samples,
    union,
)
from lacuna.errors import ResolutionExceeded
from lacuna.trigpoly import TrigPoly, fejer, point_eval, sup_scan

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# construction and normalization


def test_empty_and_full():
    e = ArcSet.empty()
    assert e.is_empty and e.measure() == 0.0 and e.components() == 0
    f = ArcSet.full_circle()
    assert f.full and f.measure() == TWO_PI and f.components() == 1
    assert bool(f.contains(1.0)) and not bool(e.contains(1.0))


def test_from_arcs_merges_overlaps():
    a = ArcSet.from_arcs([(0.5, 1.5), (1.0, 2.0), (4.0, 4.5)])
    assert a.components() == 2
    assert a.measure() == pytest.approx(1.5 + 0.5)


def test_from_arcs_wrapping_arc():
    # (6.0 .. 1.0) wraps through zero; together with a mid arc
    a = ArcSet.from_arcs([(6.0, 1.0), (2.0, 3.0)])
    assert a.components() == 2
    assert a.measure() == pytest.approx((TWO_PI - 6.0) + 1.0 + 1.0)
    xs = np.array([6.1, 0.0, 0.5, 1.5, 2.5, 5.0])
    assert list(a.contains(xs)) == [True, True, True, False, True, False]


def test_wrapping_arc_keeps_interior_pieces():
    # regression: an arc poking past the wrap join must keep its far end
    a = ArcSet.from_arcs([(6.0, 1.2), (0.5, 0.8), (2.0, 3.0)])
    assert bool(a.contains(0.9)) and bool(a.contains(1.1))
    assert a.measure() == pytest.approx((TWO_PI - 6.0 + 1.2) + 1.0)


def test_zero_crossing_merge_to_full():
    a = ArcSet.from_arcs([(0.0, 3.5), (3.5 - 0.1, TWO_PI)])
    assert a.full


def test_from_arcs_degenerate_pair_wraps_to_full():
    # end <= start is read as wrapping all the way around
    assert ArcSet.from_arcs([(1.0, 1.0)]).full
    assert ArcSet.from_arcs([]).is_empty


def test_single_arc_length_two_pi_is_full():
    assert ArcSet.from_arcs([(1.0, 1.0 + TWO_PI)]).full


def test_json_round_trip():
    a = ArcSet.from_arcs([(6.0, 1.0), (2.0, 3.0)])
    b = ArcSet.from_json_obj(a.to_json_obj())
    assert np.array_equal(a.starts, b.starts)
    assert np.array_equal(a.ends, b.ends)
    assert a.full == b.full


# ---------------------------------------------------------------------------
# oracle comparison, randomized


arc_family = st.lists(
    st.tuples(st.floats(0.0, TWO_PI, allow_nan=False),
              st.floats(1e-4, 2.0, allow_nan=False)),
    min_size=1, max_size=6,
)


@given(arc_family)
def test_measure_and_contains_match_bitmask(fam):
    pairs = [(s, s + ln) for s, ln in fam]
    a = ArcSet.from_arcs(pairs)
    G = 1 << 12
    mask = oracles.bitmask_from_pairs([(s, ln) for s, ln in fam], G)
    assert a.measure() == pytest.approx(oracles.bitmask_measure(mask),
                                        abs=2 * len(fam) * TWO_PI / G)
    ours = oracles.bitmask_from_arcset(a, G)
    # disagreement only within a cell of some endpoint
    diff = np.flatnonzero(ours != mask)
    if diff.size:
        xs = diff * TWO_PI / G
        for x in xs:
            assert oracles.bitmask_boundary_distance(mask, x) <= TWO_PI / G


@given(arc_family, arc_family)
def test_union_matches_bitmask(f1, f2):
    a = ArcSet.from_arcs([(s, s + ln) for s, ln in f1])
    b = ArcSet.from_arcs([(s, s + ln) for s, ln in f2])
    u = union([a, b])
    G = 1 << 12
    mask = (oracles.bitmask_from_pairs(f1, G) | oracles.bitmask_from_pairs(f2, G))
    got = oracles.bitmask_from_arcset(u, G)
    diff = np.flatnonzero(got != mask)
    for k in diff:
        assert oracles.bitmask_boundary_distance(mask, k * TWO_PI / G) <= TWO_PI / G


@given(arc_family, st.floats(1e-4, 0.5))
def test_expand_adds_symmetric_margin(fam, eps):
    a = ArcSet.from_arcs([(s, s + ln) for s, ln in fam])
    e = expand(a, eps)
    assert e.measure() >= min(a.measure(), TWO_PI - 1e-12)
    assert e.measure() <= min(a.measure() + 2 * eps * a.components(), TWO_PI) + 1e-9
    # every point of the original is interior to the expansion
    if not a.full:
        for s, t in zip(a.starts, a.ends):
            mid = (s + t) / 2 % TWO_PI
            assert bool(e.contains(mid))


def test_expand_empty_stays_empty():
    assert expand(ArcSet.empty(), 0.5).is_empty


# ---------------------------------------------------------------------------
# lattice survivors


def test_survivors_basic():
    d = 12
    # cover lattice points 3,4,5 (angles 2*pi*l/12)
    a = ArcSet.from_arcs([(TWO_PI * 2.9 / 12, TWO_PI * 5.1 / 12)])
    got = survivors(a, d)
    expect = np.array([l for l in range(1, d + 1) if not (3 <= l <= 5)])
    assert np.array_equal(got, expect)


def test_survivors_empty_set_keeps_all():
    got = survivors(ArcSet.empty(), 7)
    assert np.array_equal(got, np.arange(1, 8))


def test_survivors_full_circle_keeps_none():
    assert survivors(ArcSet.full_circle(), 9).size == 0


def test_survivors_wrap_covers_point_d():
    d = 8
    # arc straddling angle 0 covers lattice point l = d
    a = ArcSet.from_arcs([(TWO_PI - 0.1, TWO_PI + 0.1)])
    got = survivors(a, d)
    assert d not in set(got.tolist())
    assert 4 in set(got.tolist())


def test_survivors_boundary_tolerance():
    d = 4
    x1 = TWO_PI / 4
    tol = 1e-6
    # arc ending just short of the lattice point still covers it under tol
    a = ArcSet.from_arcs([(x1 - 0.2, x1 - tol / 2)])
    got = survivors(a, d, tol=tol)
    assert 1 not in set(got.tolist())


@given(arc_family, st.integers(min_value=3, max_value=400))
def test_survivors_match_bitmask_away_from_boundaries(fam, d):
    a = ArcSet.from_arcs([(s, s + ln) for s, ln in fam])
    got = set(survivors(a, d).tolist())
    for l in range(1, d + 1):
        x = TWO_PI * l / d
        # skip lattice points that hug an endpoint
        near = min(
            (min(abs(((x - v) + math.pi) % TWO_PI - math.pi) for v in (s, t))
             for s, t in zip(np.atleast_1d(a.starts), np.atleast_1d(a.ends))),
            default=math.pi,
        ) if not a.full and not a.is_empty else math.pi
        if abs(near) < 1e-3:
            continue
        covered = bool(a.contains(x % TWO_PI))
        assert (l not in got) == covered


# ---------------------------------------------------------------------------
# superlevel extraction


def test_superlevel_certified_empty():
    p = TrigPoly(-1, [1.0, 0.0, 1.0])  # 2cos x, sup 2
    a = superlevel_arcs(p, 2.5)
    assert a.is_empty


def test_superlevel_certified_full():
    p = TrigPoly(-1, [1.0, 4.0, 1.0])  # 4 + 2cos x, range [2, 6]
    a = superlevel_arcs(p, 1.0)
    assert a.full


def test_superlevel_two_sided_cosine():
    # |2cos x| > theta on two symmetric arc pairs
    p = TrigPoly(-1, [1.0, 0.0, 1.0])
    theta = 1.0
    a = superlevel_arcs(p, theta)
    assert a.components() == 2
    # true set: (-pi/3, pi/3) and (2pi/3, 4pi/3)
    xs = np.linspace(0, TWO_PI, 20001, endpoint=False)
    truth = np.abs(2 * np.cos(xs)) > theta
    ours = a.contains(xs)
    # conservative: never misses a true point
    assert not np.any(truth & ~ours)
    # and overshoots by at most a cell per side
    assert a.measure() <= (2 * TWO_PI / 3) + 4 * (TWO_PI / 1024) + 1e-9


def test_superlevel_refined_endpoints_are_tight():
    p = TrigPoly(-1, [1.0, 0.0, 1.0])
    theta = 1.0
    a = superlevel_arcs(p, theta, LevelOptions(conservative=False))
    # endpoints should sit within tol of arccos(+-1/2) boundaries
    expect = sorted([math.pi / 3, 2 * math.pi / 3, 4 * math.pi / 3,
                     5 * math.pi / 3])
    got = sorted(float(v) % TWO_PI for v in np.concatenate([a.starts, a.ends]))
    for e, g in zip(expect, got):
        assert abs(e - g) < 1e-9


def test_superlevel_conservative_covers_refined():
    p = fejer(9)
    theta = 0.8
    cons = superlevel_arcs(p, theta)
    fine = superlevel_arcs(p, theta, LevelOptions(conservative=False))
    xs = np.linspace(0, TWO_PI, 4096, endpoint=False)
    inside_fine = fine.contains(xs)
    inside_cons = cons.contains(xs)
    assert not np.any(inside_fine & ~inside_cons)


def test_superlevel_rejects_nonpositive_threshold():
    with pytest.raises(ValueError):
        superlevel_arcs(fejer(3), 0.0)


def test_superlevel_resolution_budget():
    bracket, abs2, G = sup_scan(fejer(16), oversample=8)
    with pytest.raises(ResolutionExceeded):
        superlevel_from_samples(abs2, G, 16, 0.05, bracket.upper,
                                DEFAULT_TOL_X, max_crossings=2)


@pytest.mark.parametrize("theta", [0.2, 0.5, 1.0, 3.0])
def test_superlevel_fejer_vs_bitmask(theta):
    p = fejer(24)
    a = superlevel_arcs(p, theta)
    G = 1 << 17
    xs = TWO_PI * np.arange(G) / G
    truth = np.abs(point_eval(p, xs)) > theta
    ours = a.contains(xs)
    assert not np.any(truth & ~ours)  # superset guarantee
    # excess is confined to endpoint neighborhoods
    extra = ours & ~truth
    if extra.any():
        # 24*(4 oversample floor)*... extraction grid cell
        cell = TWO_PI / 1024
        for k in np.flatnonzero(extra):
            assert oracles.bitmask_boundary_distance(truth, xs[k]) <= 2 * cell
