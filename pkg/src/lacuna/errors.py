"""Exception and warning types shared across the package."""

from __future__ import annotations


class LacunaError(Exception):
    """Base class for package-specific failures."""


class PlanError(LacunaError):
    """Invalid frequency-plan input."""


class EmptyPlan(PlanError):
    """A plan must contain at least one block."""


class RatioViolation(PlanError):
    """Block frequencies grow slower than the required ratio."""

    def __init__(self, j: int, m: int, m_next: int, q: float):
        self.j = j
        super().__init__(
            f"block {j}: successor frequency {m_next} is below q*m = {q}*{m}"
        )


class WidthViolation(PlanError):
    """A block width falls outside [1, next frequency - own frequency]."""

    def __init__(self, j: int, d: int, gap: int):
        self.j = j
        super().__init__(f"block {j}: width {d} outside [1, {gap}]")


class UnreducibleBlock(PlanError):
    """No width >= 1 can satisfy the frequency/width ratio floor."""

    def __init__(self, j: int, m: int):
        self.j = j
        super().__init__(
            f"block {j}: no width >= 1 satisfies m/d >= max(1, 1/ln q) for m = {m}"
        )


class UnknownPreset(PlanError):
    """Preset name not in the registry."""


class InvalidParam(PlanError):
    """Preset or configuration parameter out of range or missing."""


class GridTooSmall(LacunaError):
    """Evaluation grid does not resolve the polynomial's spectrum."""


class ResolutionExceeded(LacunaError):
    """Threshold-set extraction detected more crossings than the degree allows."""


class LambdaCollapse(LacunaError):
    """The survivor set became empty; the construction cannot continue.

    Carries the step record of the fatal step in ``record`` so callers can
    inspect the measures that led to the collapse.
    """

    def __init__(self, n: int, record=None):
        self.n = n
        self.record = record
        super().__init__(
            f"step {n}: every lattice point fell inside the padded bad set"
        )


class DivergentInput(LacunaError):
    """Series parameter outside the region of convergence (q <= 1)."""


class PlanWarning(UserWarning):
    """Non-fatal plan irregularity (e.g. an unusually wide final block)."""
