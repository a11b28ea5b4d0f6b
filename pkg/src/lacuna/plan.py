"""Validation and normalization of construction inputs.

A frequency plan fixes the growth ratio ``q``, the block base frequencies
``m_j`` and the block widths ``d_j``.  Validation enforces the growth and
width constraints exactly: ``q`` is read by its shortest decimal
representation and compared in rational arithmetic, so ``q = 1.3`` means
13/10 and ties pass.  Width reduction clamps each width to the largest
effective value ``d_eff`` compatible with ``m/d_eff >= max(1, 1/ln q)``;
that comparison mixes a rational with a logarithm, so it is decided in
60-digit arithmetic instead of native floats.

The construction consumes ``d_eff`` everywhere; the original ``d`` is kept
because the final bound's logarithmic term is stated in terms of it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import mpmath as mp

from . import _jsonio
from .errors import (
    EmptyPlan,
    InvalidParam,
    PlanError,
    PlanWarning,
    RatioViolation,
    UnknownPreset,
    UnreducibleBlock,
    WidthViolation,
)

_DPS = 60  # working precision (decimal digits) for log comparisons
_MAX_EXACT_FLOAT = 2**53


@dataclass(frozen=True)
class Block:
    m: int
    d: int
    d_eff: int


@dataclass(frozen=True)
class FrequencyPlan:
    """A validated sequence of frequency blocks with growth ratio ``q``.

    ``q_exact`` is the decimal reading of ``q`` used for all rational
    comparisons; ``q`` itself is the float used in logarithms.
    """

    q: float
    q_exact: Fraction
    blocks: tuple[Block, ...]

    def __len__(self) -> int:
        return len(self.blocks)

    def block(self, j: int) -> Block:
        """1-based block accessor (the construction indexes from 1)."""
        if not 1 <= j <= len(self.blocks):
            raise IndexError(f"block index {j} outside 1..{len(self.blocks)}")
        return self.blocks[j - 1]

    @property
    def is_reduced(self) -> bool:
        """True when every block satisfies m/d_eff >= max(1, 1/ln q)."""
        return all(
            _width_ok(b.m, b.d_eff, self.q_exact) for b in self.blocks
        )

    def log_ratio(self, x: float) -> float:
        """log base q of x."""
        return math.log(x) / math.log(self.q)


def _exact_ratio(q) -> Fraction:
    """Exact reading of the ratio; floats are taken at their shortest decimal repr."""
    if isinstance(q, Fraction):
        return q
    if isinstance(q, bool):
        raise InvalidParam("q must be a number")
    if isinstance(q, int):
        return Fraction(q)
    if isinstance(q, float):
        return Fraction(repr(q))
    if isinstance(q, str):
        return Fraction(q)
    raise InvalidParam(f"unsupported type for q: {type(q)}")


def _ln_q(q_exact: Fraction):
    return mp.log(mp.mpf(q_exact.numerator) / mp.mpf(q_exact.denominator))


def _width_cap(m: int, q_exact: Fraction) -> int:
    """Largest integer width d with m/d >= max(1, 1/ln q); 0 when none exists."""
    with mp.workdps(_DPS):
        lnq = _ln_q(q_exact)
        cap = mp.floor(m * min(mp.mpf(1), lnq))
        return max(int(cap), 0)


def _width_ok(m: int, d_eff: int, q_exact: Fraction) -> bool:
    """Exact check of m/d_eff >= max(1, 1/ln q); ties pass."""
    if d_eff < 1 or m < d_eff:
        return False
    with mp.workdps(_DPS):
        lnq = _ln_q(q_exact)
        if lnq >= 1:
            return True
        return mp.mpf(m) * lnq >= d_eff


def _as_positive_int(v, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise PlanError(f"{what} must be a positive integer, got {v!r}")
    if v < 1:
        raise PlanError(f"{what} must be a positive integer, got {v!r}")
    return v


def validate(q, pairs) -> FrequencyPlan:
    """Check growth and width constraints; returns a plan with d_eff = d.

    The ratio check ``m_{j+1} >= q*m_j`` is exact (rational arithmetic,
    ties pass).  Interior widths must satisfy ``1 <= d_j <= m_{j+1}-m_j``;
    the final width only needs ``d_N >= 1`` and triggers a warning when it
    exceeds ``m_N``.
    """
    q_exact = _exact_ratio(q)
    if q_exact <= 1:
        raise InvalidParam(f"growth ratio must exceed 1, got {q!r}")
    pairs = list(pairs)
    if not pairs:
        raise EmptyPlan("a plan needs at least one block")

    ms: list[int] = []
    ds: list[int] = []
    for j, (m, d) in enumerate(pairs, start=1):
        ms.append(_as_positive_int(m, f"block {j} frequency"))
        ds.append(_as_positive_int(d, f"block {j} width"))

    for j in range(1, len(ms)):
        if Fraction(ms[j]) < q_exact * ms[j - 1]:
            raise RatioViolation(j, ms[j - 1], ms[j], float(q_exact))

    for j in range(len(ms) - 1):
        gap = ms[j + 1] - ms[j]
        if not 1 <= ds[j] <= gap:
            raise WidthViolation(j + 1, ds[j], gap)
    if ds[-1] > ms[-1]:
        warnings.warn(
            f"final block width {ds[-1]} exceeds its frequency {ms[-1]}",
            PlanWarning,
        )

    blocks = tuple(Block(m, d, d) for m, d in zip(ms, ds))
    return FrequencyPlan(q=float(q_exact), q_exact=q_exact, blocks=blocks)


def reduce_widths(plan: FrequencyPlan) -> FrequencyPlan:
    """Clamp every width to the frequency/width ratio floor.

    Sets ``d_eff = min(d, floor(m * min(1, ln q)))`` per block; raises
    ``UnreducibleBlock`` when even width 1 would violate the floor.
    Idempotent: the clamp is computed from the original width.
    """
    new_blocks = []
    for j, b in enumerate(plan.blocks, start=1):
        cap = _width_cap(b.m, plan.q_exact)
        if cap < 1:
            raise UnreducibleBlock(j, b.m)
        new_blocks.append(Block(b.m, b.d, min(b.d, cap)))
    return FrequencyPlan(q=plan.q, q_exact=plan.q_exact, blocks=tuple(new_blocks))


# ---------------------------------------------------------------------------
# Presets


def _preset_dyadic(N: int) -> FrequencyPlan:
    ms = [2 ** (j + 1) for j in range(1, N + 1)]
    ds = [ms[j + 1] - ms[j] for j in range(N - 1)]
    ds.append(ms[-1])  # virtual next frequency 2*m_N gives the same gap
    return validate(2, list(zip(ms, ds)))


def _preset_geometric(N: int, q, m_1: int) -> FrequencyPlan:
    q_exact = _exact_ratio(q)
    if q_exact <= 1:
        raise InvalidParam(f"growth ratio must exceed 1, got {q!r}")
    m_1 = _as_positive_int(m_1, "m_1")
    ms = [m_1]
    for _ in range(N):  # one extra to size the final width
        ms.append(math.ceil(q_exact * ms[-1]))
    ds = [ms[j + 1] - ms[j] for j in range(N)]
    return validate(q_exact, list(zip(ms[:N], ds)))


def _preset_corollary(N: int, eps: float, c0: int = 1) -> FrequencyPlan:
    if not 0 <= eps < 1:
        raise InvalidParam(f"eps must lie in [0, 1), got {eps!r}")
    c0 = _as_positive_int(c0, "c0")
    pairs = []
    for j in range(1, N + 1):
        t = j + c0
        m = 2**t
        e = t - t**eps
        if e >= 62:  # beyond float53 exactness; decide the floor at high precision
            with mp.workdps(_DPS):
                d = int(mp.floor(mp.mpf(2) ** mp.mpf(e)))
        else:
            d = max(1, int(math.floor(2.0**e)))
        pairs.append((m, d))
    return reduce_widths(validate(2, pairs))


PRESETS = {
    "dyadic": {
        "build": _preset_dyadic,
        "params": {"N": "number of blocks (int >= 1)"},
        "doc": "doubling frequencies m_j = 2^(j+1) with maximal widths",
    },
    "geometric": {
        "build": _preset_geometric,
        "params": {
            "N": "number of blocks (int >= 1)",
            "q": "growth ratio (> 1, read as decimal)",
            "m_1": "first frequency (int >= 1)",
        },
        "doc": "m_{j+1} = ceil(q*m_j) with gap-filling widths",
    },
    "corollary": {
        "build": _preset_corollary,
        "params": {
            "N": "number of blocks (int >= 1)",
            "eps": "width-shrink exponent in [0, 1)",
            "c0": "frequency offset (int >= 1, default 1)",
        },
        "doc": "m_j = 2^(j+c0), d_j = max(1, floor(2^((j+c0)-(j+c0)^eps))), then width reduction",
    },
}


def preset(name: str, **params) -> FrequencyPlan:
    """Build one of the registered example plans by name."""
    if name not in PRESETS:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    entry = PRESETS[name]
    build = entry["build"]
    allowed = set(entry["params"])
    extra = set(params) - allowed
    if extra:
        raise InvalidParam(f"preset {name!r} does not accept {sorted(extra)}")
    if "N" not in params:
        raise InvalidParam(f"preset {name!r} requires N")
    N = params["N"]
    if isinstance(N, bool) or not isinstance(N, int) or N < 1:
        raise InvalidParam(f"N must be a positive integer, got {N!r}")
    try:
        return build(**params)
    except TypeError as exc:
        raise InvalidParam(f"preset {name!r}: {exc}") from None


# ---------------------------------------------------------------------------
# Serialization


def _exact_int(v, what: str) -> int:
    """Accept JSON ints, and integral floats only below 2^53."""
    if isinstance(v, bool):
        raise PlanError(f"{what} must be an integer, got {v!r}")
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        if v != int(v) or abs(v) > _MAX_EXACT_FLOAT:
            raise PlanError(
                f"{what} must be an exact integer (floats above 2^53 rejected), got {v!r}"
            )
        return int(v)
    raise PlanError(f"{what} must be an integer, got {v!r}")


def plan_to_json_obj(plan: FrequencyPlan) -> dict:
    return {
        "q": plan.q,
        "blocks": [{"m": b.m, "d": b.d, "d_eff": b.d_eff} for b in plan.blocks],
    }


def plan_from_json_obj(obj: dict) -> FrequencyPlan:
    if not isinstance(obj, dict) or "q" not in obj or "blocks" not in obj:
        raise PlanError("plan JSON needs 'q' and 'blocks'")
    q = obj["q"]
    if isinstance(q, bool) or not isinstance(q, (int, float)):
        raise PlanError(f"q must be a number, got {q!r}")
    raw = obj["blocks"]
    if not isinstance(raw, list):
        raise PlanError("'blocks' must be a list")
    pairs = []
    d_effs = []
    for i, rb in enumerate(raw, start=1):
        if not isinstance(rb, dict):
            raise PlanError(f"block {i} must be an object")
        m = _exact_int(rb.get("m"), f"block {i} m")
        d = _exact_int(rb.get("d"), f"block {i} d")
        d_eff = _exact_int(rb.get("d_eff", d), f"block {i} d_eff")
        if not 1 <= d_eff <= d:
            raise PlanError(f"block {i}: d_eff {d_eff} outside [1, d = {d}]")
        pairs.append((m, d))
        d_effs.append(d_eff)
    plan = validate(q, pairs)
    blocks = tuple(
        Block(b.m, b.d, de) for b, de in zip(plan.blocks, d_effs)
    )
    return FrequencyPlan(q=plan.q, q_exact=plan.q_exact, blocks=blocks)


def save_plan(plan: FrequencyPlan, path: str | Path) -> None:
    _jsonio.dump(plan_to_json_obj(plan), path, indent=2)


def load_plan(path: str | Path) -> FrequencyPlan:
    return plan_from_json_obj(_jsonio.load(path))
