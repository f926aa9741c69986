"""Elementary association measures for 2x2 and stratified 2x2xK count tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional


class MarginError(ValueError):
    """An exposure margin is zero, so a risk is undefined."""


@dataclass(frozen=True)
class TwoByTwo:
    exposed_cases: int
    exposed_noncases: int
    unexposed_cases: int
    unexposed_noncases: int

    def __post_init__(self):
        for name in ("exposed_cases", "exposed_noncases", "unexposed_cases", "unexposed_noncases"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError(f"{name} must be an integer count, got {value!r}")
            if value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")

    @property
    def exposed_total(self) -> int:
        return self.exposed_cases + self.exposed_noncases

    @property
    def unexposed_total(self) -> int:
        return self.unexposed_cases + self.unexposed_noncases

    def risks(self) -> tuple[float, float]:
        """Return (pr(D=1|E=1), pr(D=1|E=0))."""
        if self.exposed_total == 0 or self.unexposed_total == 0:
            raise MarginError(
                f"both exposure margins must be positive (exposed={self.exposed_total}, "
                f"unexposed={self.unexposed_total})"
            )
        return (self.exposed_cases / self.exposed_total, self.unexposed_cases / self.unexposed_total)

    def __add__(self, other: "TwoByTwo") -> "TwoByTwo":
        return TwoByTwo(
            self.exposed_cases + other.exposed_cases,
            self.exposed_noncases + other.exposed_noncases,
            self.unexposed_cases + other.unexposed_cases,
            self.unexposed_noncases + other.unexposed_noncases,
        )


@dataclass(frozen=True)
class StratifiedTable:
    """Exposure-by-outcome tables, one per confounder level 0..K-1."""

    strata: tuple[TwoByTwo, ...]

    def __post_init__(self):
        object.__setattr__(self, "strata", tuple(self.strata))
        if len(self.strata) < 2:
            raise ValueError(f"a stratified table needs K >= 2 levels, got {len(self.strata)}")

    @classmethod
    def from_levels(cls, levels: dict[int, TwoByTwo]) -> "StratifiedTable":
        k = len(levels)
        if sorted(levels) != list(range(k)):
            raise ValueError(f"confounder levels must be exactly 0..{k - 1}, got {sorted(levels)}")
        return cls(tuple(levels[i] for i in range(k)))

    @property
    def k(self) -> int:
        return len(self.strata)

    def collapse(self) -> TwoByTwo:
        total = self.strata[0]
        for t in self.strata[1:]:
            total = total + t
        return total


@dataclass(frozen=True)
class AssociationMeasures:
    """Observed-scale measures.

    ``rr_ed`` is None when both risks are zero. The stratified fields hold one entry per
    non-reference confounder level k = 1..K-1, each contrasted with level 0.
    """

    rr_ed: Optional[float]
    rd_ed: float
    rr_eu: Optional[float] = None
    rd_eu: Optional[float] = None
    rd_ud_given_e1: Optional[tuple[float, ...]] = None
    rd_ud_given_e0: Optional[tuple[float, ...]] = None
    rr_ud_given_e1: Optional[tuple[float, ...]] = None
    rr_ud_given_e0: Optional[tuple[float, ...]] = None


def _ratio(num: float, den: float) -> Optional[float]:
    if den == 0:
        return math.inf if num > 0 else None
    return num / den


def relative_risk(t: TwoByTwo) -> Optional[float]:
    """pr(D=1|E=1) / pr(D=1|E=0); +inf for a zero baseline risk, None when both are zero."""
    r1, r0 = t.risks()
    return _ratio(r1, r0)


def risk_difference(t: TwoByTwo) -> float:
    r1, r0 = t.risks()
    return r1 - r0


def measures_from_table(t: TwoByTwo) -> AssociationMeasures:
    return AssociationMeasures(rr_ed=relative_risk(t), rd_ed=risk_difference(t))


def _inv(x: Optional[float]) -> Optional[float]:
    if x is None:
        return None
    if x == 0:
        return math.inf
    if math.isinf(x):
        return 0.0
    return 1.0 / x


def flip_exposure(m: AssociationMeasures) -> AssociationMeasures:
    """Swap the coding of exposed and unexposed. Applying it twice is the identity."""
    return replace(
        m,
        rr_ed=_inv(m.rr_ed),
        rd_ed=-m.rd_ed,
        rr_eu=_inv(m.rr_eu),
        rd_eu=None if m.rd_eu is None else -m.rd_eu,
        rd_ud_given_e1=m.rd_ud_given_e0,
        rd_ud_given_e0=m.rd_ud_given_e1,
        rr_ud_given_e1=m.rr_ud_given_e0,
        rr_ud_given_e0=m.rr_ud_given_e1,
    )


def orient_exposure(m: AssociationMeasures) -> tuple[AssociationMeasures, bool]:
    """Recode exposure so that rr_ed >= 1 (equivalently rd_ed >= 0)."""
    if m.rr_ed is None:
        raise ValueError("rr_ed is undefined (both risks are zero); cannot orient exposure")
    if m.rr_ed < 1:
        return flip_exposure(m), True
    return m, False
