"""Finite unions of arcs on the circle, with conservative superlevel sets.

Sets are stored as disjoint arcs ``[start, end)`` with ``start`` in
``[0, 2pi)`` and ``0 < end - start <= 2pi`` (an arc may wrap past 2pi).
All constructors normalize: wrap-splitting, sorting, and merging of arcs
whose gap is below a tolerance.  The tolerance exists because arc
endpoints derived from grid scans are only resolved to about one grid
cell; merging prevents spurious hairline gaps from inflating component
counts.

``superlevel_arcs`` extracts ``{x : |p(x)| > theta}`` from dense samples,
snapping each boundary *outward* to the neighbouring grid node.  The
returned set therefore contains every *sample point* that exceeds the
threshold, plus a full cell of margin at each boundary — the conservative
direction for the exceptional sets built on top of it.  The guarantee is
resolution-limited: an excursion above ``theta`` confined strictly
between two consecutive samples can evade any fixed grid, so callers who
need agreement with a denser reference must request a matching ``grid``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridTooSmall, ResolutionExceeded
from .trigpoly import TrigPoly, grid_eval, sup_scan, _next_pow2

TWO_PI = 2.0 * math.pi
DEFAULT_TOL_X = TWO_PI * 2.0**-40
MERGE_TOL = 2.0 * DEFAULT_TOL_X


@dataclass(frozen=True, eq=False)
class ArcSet:
    """Disjoint sorted arcs; ``full`` short-circuits the whole circle."""

    starts: np.ndarray
    ends: np.ndarray
    full: bool = False

    def __post_init__(self):
        s = np.asarray(self.starts, dtype=np.float64)
        e = np.asarray(self.ends, dtype=np.float64)
        s.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "starts", s)
        object.__setattr__(self, "ends", e)

    # -- constructors -------------------------------------------------

    @classmethod
    def empty(cls) -> "ArcSet":
        z = np.zeros(0)
        return cls(z, z, full=False)

    @classmethod
    def full_circle(cls) -> "ArcSet":
        z = np.zeros(0)
        return cls(z, z, full=True)

    @classmethod
    def from_arcs(cls, pairs, merge_tol: float = MERGE_TOL) -> "ArcSet":
        """Build from (start, end) pairs in radians.

        ``end <= start`` is read as a wrapping arc (end belongs to the next
        revolution).  Arcs of length >= 2pi give the full circle.
        """
        pairs = list(pairs)
        if not pairs:
            return cls.empty()
        s = np.asarray([p[0] for p in pairs], dtype=np.float64)
        e = np.asarray([p[1] for p in pairs], dtype=np.float64)
        lengths = e - s
        lengths[lengths <= 0.0] += TWO_PI
        return _normalize(s, lengths, merge_tol)

    # -- queries ------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self.full and len(self.starts) == 0

    def measure(self) -> float:
        if self.full:
            return TWO_PI
        return float(np.sum(self.ends - self.starts))

    def components(self) -> int:
        return 1 if self.full else len(self.starts)

    def contains(self, x) -> np.ndarray:
        """Vectorized membership for points (mod 2pi); half-open arcs."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64)) % TWO_PI
        if self.full:
            return np.ones(x.shape, dtype=bool)
        if len(self.starts) == 0:
            return np.zeros(x.shape, dtype=bool)
        # Split wrapping arcs at 2pi, then test with interleaved bounds:
        # position in the merged (start, end) sequence is odd inside an arc.
        s_parts = [self.starts]
        e_parts = [np.minimum(self.ends, TWO_PI)]
        wraps = self.ends > TWO_PI
        if np.any(wraps):
            s_parts.append(np.zeros(np.count_nonzero(wraps)))
            e_parts.append(self.ends[wraps] - TWO_PI)
        s = np.sort(np.concatenate(s_parts))
        e = np.sort(np.concatenate(e_parts))
        bounds = np.empty(2 * len(s))
        bounds[0::2] = s
        bounds[1::2] = e
        return np.searchsorted(bounds, x, side="right") % 2 == 1

    # -- serialization ------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "full": self.full,
            "arcs": [[float(a), float(b)] for a, b in zip(self.starts, self.ends)],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ArcSet":
        if obj.get("full"):
            return cls.full_circle()
        return cls.from_arcs([tuple(a) for a in obj.get("arcs", [])])


def _normalize(starts: np.ndarray, lengths: np.ndarray, merge_tol: float) -> ArcSet:
    """Canonicalize raw (start, length) arcs into a sorted disjoint ArcSet."""
    if np.any(lengths >= TWO_PI):
        return ArcSet.full_circle()
    starts = np.mod(starts, TWO_PI)
    ends = starts + lengths

    # Split arcs that wrap past 2pi into [s, 2pi) and [0, e - 2pi) so the
    # linear merge below sees only non-wrapping pieces; the zero-crossing
    # join at the end restores a single wrapped arc if the set touches 0.
    wraps = ends > TWO_PI
    if np.any(wraps):
        tail_ends = ends[wraps] - TWO_PI
        keep_tail = tail_ends > 0.0
        starts = np.concatenate([starts, np.zeros(np.count_nonzero(keep_tail))])
        ends = np.concatenate([np.where(wraps, TWO_PI, ends),
                               tail_ends[keep_tail]])

    order = np.argsort(starts, kind="stable")
    starts = starts[order]
    ends = ends[order]

    # Merge overlapping / nearly-touching arcs in one pass: an arc starts a
    # new group iff it begins beyond the running maximum end (plus tol).
    if len(starts) > 1:
        run_end = np.maximum.accumulate(ends)
        new_group = np.empty(len(starts), dtype=bool)
        new_group[0] = True
        new_group[1:] = starts[1:] > run_end[:-1] + merge_tol
        idx = np.flatnonzero(new_group)
        g_starts = starts[idx]
        g_ends = np.maximum.reduceat(ends, idx)
        starts, ends = g_starts, g_ends

    # Join across zero if the last arc wraps (or nearly touches) the first.
    if len(starts) >= 1:
        gap0 = TWO_PI - ends[-1] + starts[0]
        if gap0 <= merge_tol:
            if len(starts) == 1:
                return ArcSet.full_circle()
            joined_end = ends[0] + TWO_PI
            joined_len = joined_end - starts[-1]
            if joined_len >= TWO_PI:
                return ArcSet.full_circle()
            starts = np.concatenate([starts[1:-1], starts[-1:]])
            ends = np.concatenate([ends[1:-1], [joined_end]])
    return ArcSet(starts, ends)


def expand(a: ArcSet, eps: float) -> ArcSet:
    """Open eps-neighbourhood: every arc grows by eps on both sides."""
    if eps < 0:
        raise ValueError("expansion radius must be >= 0")
    if a.full or a.is_empty or eps == 0.0:
        return a
    return ArcSet.from_arcs(zip(a.starts - eps, a.ends + eps))


def union(sets) -> ArcSet:
    sets = [s for s in sets if not s.is_empty]
    if not sets:
        return ArcSet.empty()
    if any(s.full for s in sets):
        return ArcSet.full_circle()
    pairs = []
    for s in sets:
        pairs.extend(zip(s.starts, s.ends))
    return ArcSet.from_arcs(pairs)


def survivors(a: ArcSet, d: int, tol: float = DEFAULT_TOL_X) -> np.ndarray:
    """Lattice points ``2*pi*l/d`` (l = 1..d) NOT covered by the widened set.

    Each arc is widened by ``tol`` before the test, so a lattice point
    within ``tol`` of the set counts as covered — the conservative
    direction for the construction that keeps only well-separated points.
    ``l = d`` is the point at angle 0.
    """
    if d < 1:
        raise ValueError("lattice order must be >= 1")
    if a.full:
        return np.zeros(0, dtype=np.int64)
    out_of = np.ones(d, dtype=bool)  # indexed by residue r = l mod d
    if not a.is_empty:
        scale = d / TWO_PI
        lo = np.ceil((a.starts - tol) * scale).astype(np.int64)
        hi = np.floor((a.ends + tol) * scale).astype(np.int64)
        for l0, l1 in zip(lo, hi):
            if l1 - l0 + 1 >= d:
                return np.zeros(0, dtype=np.int64)
            if l1 < l0:
                continue
            r0 = int(l0 % d)
            r1 = int(l1 % d)
            if r0 <= r1:
                out_of[r0 : r1 + 1] = False
            else:
                out_of[r0:] = False
                out_of[: r1 + 1] = False
    ls = np.flatnonzero(out_of).astype(np.int64)
    ls[ls == 0] = d
    return np.sort(ls)


@dataclass(frozen=True)
class LevelOptions:
    """Controls for superlevel extraction.

    ``grid``: explicit FFT size (power of two recommended); default picks
    ``next_pow2(4 * (deg+1) * oversample_floor)``.  ``conservative`` snaps
    boundaries outward by one grid cell instead of bisecting them to
    ``tol_x``.
    """

    grid: int | None = None
    oversample_floor: int = 2
    tol_x: float = DEFAULT_TOL_X
    conservative: bool = True
    merge_tol: float | None = None


def superlevel_arcs(p: TrigPoly, theta: float,
                    opts: LevelOptions = LevelOptions()) -> ArcSet:
    """Arcs covering the threshold exceedances of ``p`` seen on the grid.

    Every grid sample with ``|p| > theta`` lies inside the result, with one
    cell of outward margin per boundary.  Sub-cell excursions between
    samples are invisible at the chosen resolution; raise ``opts.grid`` to
    tighten the guarantee.
    """
    if theta <= 0:
        raise ValueError("threshold must be positive")
    deg = p.degree()
    floor_ = max(int(opts.oversample_floor), 1)
    G = opts.grid or _next_pow2(max(4 * (deg + 1) * floor_, 1024))
    if G <= 4 * deg * floor_:
        raise GridTooSmall(
            f"grid {G} too coarse for degree {deg} at oversample {floor_}")
    bracket, abs2, G = sup_scan(p, oversample=max(8, G // max(deg + 1, 1)))
    refine_fn = None
    if not opts.conservative:
        refine_fn = lambda xs: np.abs(_point_eval_cached(p, xs))  # noqa: E731
    return superlevel_from_samples(
        abs2, G, deg, theta,
        sup_upper=bracket.upper,
        tol_x=opts.tol_x,
        conservative=opts.conservative,
        merge_tol=opts.merge_tol,
        refine_fn=refine_fn,
    )


def _point_eval_cached(p: TrigPoly, xs):
    from .trigpoly import point_eval
    return point_eval(p, xs)


def superlevel_from_samples(
    abs2: np.ndarray,
    G: int,
    deg: int,
    theta: float,
    sup_upper: float,
    tol_x: float = DEFAULT_TOL_X,
    conservative: bool = True,
    merge_tol: float | None = None,
    refine_fn=None,
    max_crossings: int | None = None,
) -> ArcSet:
    """Superlevel set from precomputed ``|p|^2`` samples on the uniform grid.

    The samples are accepted in any real dtype (a float32 cache is fine);
    crossings are located between consecutive grid nodes.  With
    ``conservative`` each boundary snaps one full cell outward; otherwise
    ``refine_fn`` (mapping x-array to |p|-array in float64) is bisected to
    ``tol_x``.
    """
    if theta <= 0:
        raise ValueError("threshold must be positive")
    if max_crossings is None:
        max_crossings = max(8 * deg, 16)
    if merge_tol is None:
        merge_tol = max(MERGE_TOL, 2 * tol_x)
    cell = TWO_PI / G

    # Certified-empty: even the certified upper bound stays below theta.
    if sup_upper <= theta:
        return ArcSet.empty()
    # Certified-full: the minimum sample minus the maximal cell variation
    # (Lipschitz constant deg * sup) still clears theta.
    min_abs = math.sqrt(float(abs2.min()))
    if min_abs * (1.0 - 1e-6) - deg * sup_upper * math.pi / G > theta:
        return ArcSet.full_circle()

    mask = np.asarray(abs2, dtype=np.float64) > theta * theta
    n_on = int(np.count_nonzero(mask))
    if n_on == 0:
        return ArcSet.empty()
    if n_on == G:
        return ArcSet.full_circle()

    rises = np.flatnonzero(mask & ~np.roll(mask, 1))   # first index of a run
    falls = np.flatnonzero(mask & ~np.roll(mask, -1))  # last index of a run
    if len(rises) + len(falls) > max_crossings:
        raise ResolutionExceeded(
            f"{len(rises) + len(falls)} level crossings exceed the budget "
            f"{max_crossings} for degree {deg}; refine the grid")
    # Pair each rise with the fall that ends its run (runs may wrap past G).
    if falls[0] < rises[0]:
        falls = np.roll(falls, -1)
    ends_idx = falls.astype(np.float64)
    wrap = ends_idx < rises  # the run that wraps through index 0
    ends_idx[wrap] += G

    if conservative or refine_fn is None:
        starts = (rises - 1) * cell
        ends = (ends_idx + 1) * cell
    else:
        starts = _bisect_crossing(refine_fn, theta,
                                  (rises - 1) * cell, rises * cell, tol_x,
                                  want_above_right=True)
        ends = _bisect_crossing(refine_fn, theta,
                                ends_idx * cell, (ends_idx + 1) * cell, tol_x,
                                want_above_right=False)
        starts = starts - tol_x
        ends = ends + tol_x
    return ArcSet.from_arcs(zip(starts, ends), merge_tol=merge_tol)


def _bisect_crossing(fn, theta, lo, hi, tol_x, want_above_right: bool):
    """Vectorized bisection of ``|p| = theta`` inside cells [lo, hi].

    ``want_above_right`` states which side of the bracket exceeds theta
    (True at a rising edge).  If the samples at a cell's endpoints do not
    actually straddle theta (shallow grazing), that edge falls back to the
    outward cell boundary — still a superset.
    """
    lo = np.array(lo, dtype=np.float64)
    hi = np.array(hi, dtype=np.float64)
    above_lo = fn(lo) > theta
    above_hi = fn(hi) > theta
    ok = above_lo != above_hi
    L, H = lo.copy(), hi.copy()
    for _ in range(64):
        if np.all((H - L) <= tol_x):
            break
        mid = 0.5 * (L + H)
        above_mid = fn(mid) > theta
        go_right = above_mid != want_above_right
        L = np.where(ok & go_right, mid, L)
        H = np.where(ok & ~go_right, mid, H)
    root = 0.5 * (L + H)
    fallback = lo if want_above_right else hi
    return np.where(ok, root, fallback)
