"""Cornfield-type thresholds on the relative-risk and risk-difference scales.

Every condition reads "some confounder strength >= threshold(observed association)" and
is a *necessary* condition for an unmeasured confounder to explain away the observed
exposure-outcome association. Conditions are identified by stable tags::

    C1-RR-EU        RR_EU >= RR_ED                          (binary U)
    C2-RR-UD        RR_UD >= RR_ED                          (binary U, conditional null)
    C-RR-A1-MAXUD   max(RR_UD|E=1, RR_UD|E=0) >= RR_ED      (binary U, average null)
    LEE-MIN         min(U_E, U_D') >= RR_ED
    LEE-MAX         max(U_E, U_D') >= (RR_ED^1/2 + (RR_ED - 1)^1/2)^2
    T1-MIN, T1-MAX  binary U, risk difference
    T2-A/B/MAXAB    K >= 3, risk difference
    T3-A/B/MAXAB    K >= 2, risk difference, monotone confounder

Inputs are assumed oriented (RR_ED >= 1, RD_ED >= 0); see
:func:`cornfield.measures.orient_exposure`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

import numpy as np

from .distribution import Assumption, AssumptionLevel, CONDITIONAL_NULL


class OrientationError(ValueError):
    """Observed measure is on the preventive side; orient the exposure first."""


class MissingStrengthError(ValueError):
    pass


class Scale(enum.Enum):
    RR = "rr"
    RD = "rd"


class Tag(str, enum.Enum):
    C1_RR_EU = "C1-RR-EU"
    C2_RR_UD = "C2-RR-UD"
    C_RR_A1_MAXUD = "C-RR-A1-MAXUD"
    LEE_MIN = "LEE-MIN"
    LEE_MAX = "LEE-MAX"
    T1_MIN = "T1-MIN"
    T1_MAX = "T1-MAX"
    T2_A = "T2-A"
    T2_B = "T2-B"
    T2_MAXAB = "T2-MAXAB"
    T3_A = "T3-A"
    T3_B = "T3-B"
    T3_MAXAB = "T3-MAXAB"

    def __str__(self):
        return self.value


RR_TAGS = (Tag.C1_RR_EU, Tag.C2_RR_UD, Tag.C_RR_A1_MAXUD, Tag.LEE_MIN, Tag.LEE_MAX)


def scale_of(tag: Tag) -> Scale:
    return Scale.RR if tag in RR_TAGS else Scale.RD


# ---------------------------------------------------------------------------
# closed-form thresholds


def _check_rr(rr_ed: float) -> float:
    rr_ed = float(rr_ed)
    if math.isnan(rr_ed) or rr_ed < 1.0:
        raise OrientationError(f"expected an oriented relative risk >= 1, got {rr_ed!r}")
    return rr_ed


def _check_rd(rd_ed: float) -> float:
    rd_ed = float(rd_ed)
    if math.isnan(rd_ed) or rd_ed < 0.0:
        raise OrientationError(f"expected an oriented risk difference >= 0, got {rd_ed!r}")
    if rd_ed > 1.0:
        raise ValueError(f"a risk difference cannot exceed 1, got {rd_ed!r}")
    return rd_ed


def _check_k(k: int, minimum: int) -> int:
    if int(k) != k or k < minimum:
        raise ValueError(f"need an integer K >= {minimum}, got {k!r}")
    return int(k)


def classical_rr_thresholds(rr_ed: float) -> tuple[float, float]:
    """Thresholds for (RR_EU, RR_UD) with a binary confounder."""
    rr_ed = _check_rr(rr_ed)
    return rr_ed, rr_ed


def rr_binary_a1_threshold(rr_ed: float) -> float:
    """Threshold for max(RR_UD|E=1, RR_UD|E=0) under the average null."""
    return _check_rr(rr_ed)


def lee_min_threshold(rr_ed: float) -> float:
    return _check_rr(rr_ed)


def _lee_max(rr):
    return (np.sqrt(rr) + np.sqrt(rr - 1.0)) ** 2


def lee_max_threshold(rr_ed: float) -> float:
    rr_ed = _check_rr(rr_ed)
    if math.isinf(rr_ed):
        return math.inf
    return float(_lee_max(rr_ed))


def rd_binary_thresholds(rd_ed: float, assumption: Optional[AssumptionLevel] = None) -> tuple[float, float]:
    """(min-threshold, max-threshold) = (RD_ED, RD_ED^1/2).

    Under the conditional null these bound RD_EU and RD_UD; under the average null RD_UD is
    replaced by max(RD_UD|E=1, RD_UD|E=0). The numbers are the same either way.
    """
    rd_ed = _check_rd(rd_ed)
    return rd_ed, math.sqrt(rd_ed)


def rd_categorical_thresholds(rd_ed: float, k: int) -> tuple[float, float, float]:
    """(A, B, max(A, B)) thresholds for K >= 3 under the average null."""
    rd_ed = _check_rd(rd_ed)
    if k == 2:
        raise ValueError("K=2 is the binary case; use rd_binary_thresholds")
    k = _check_k(k, 3)
    a = rd_ed / (k - 1)
    return a, rd_ed / 2.0, max(math.sqrt(a), rd_ed / 2.0)


def rd_monotone_thresholds(rd_ed: float, k: int) -> tuple[float, float, float]:
    """(A, B, max(A, B)) thresholds for K >= 2 when the confounder is monotone in exposure."""
    rd_ed = _check_rd(rd_ed)
    k = _check_k(k, 2)
    a = rd_ed / (k - 1)
    return a, rd_ed, max(math.sqrt(a), rd_ed)


def threshold_values(tag: Tag, observed, k: int):
    """Threshold for ``tag`` at oriented ``observed``; works elementwise on arrays."""
    x = observed
    if tag in (Tag.C1_RR_EU, Tag.C2_RR_UD, Tag.C_RR_A1_MAXUD, Tag.LEE_MIN, Tag.T1_MIN, Tag.T3_B):
        return x
    if tag is Tag.LEE_MAX:
        return _lee_max(x)
    if tag is Tag.T1_MAX:
        return np.sqrt(x)
    if tag in (Tag.T2_A, Tag.T3_A):
        return x / (k - 1)
    if tag is Tag.T2_B:
        return x / 2.0
    if tag is Tag.T2_MAXAB:
        return np.maximum(np.sqrt(x / (k - 1)), x / 2.0)
    if tag is Tag.T3_MAXAB:
        return np.maximum(np.sqrt(x / (k - 1)), x)
    raise KeyError(tag)


def threshold(tag: Tag, observed: float, k: int) -> float:
    tag = Tag(tag)
    if scale_of(tag) is Scale.RR:
        _check_rr(observed)
        if math.isinf(observed):
            return math.inf
    else:
        _check_rd(observed)
    if tag in (Tag.T2_A, Tag.T2_B, Tag.T2_MAXAB):
        _check_k(k, 3)
    return float(threshold_values(tag, float(observed), k))


# ---------------------------------------------------------------------------
# left-hand sides
#
# A left-hand side is a small expression over named strengths:
#   "name"                 a leaf
#   ("min"|"max", a, b)    combination
#   ("or", "name", expr)   use the leaf if supplied, otherwise the expression

Expr = Union[str, tuple]

STRENGTH_NAMES = (
    "rr_eu", "rr_ud", "rr_ud_e1", "rr_ud_e0",
    "u_e", "u_d", "u_d_star", "u_d_prime",
    "rd_eu", "rd_ud", "rd_ud_e1", "rd_ud_e0",
    "a", "b",
)  # fmt: skip

_MAX_RR_UD = ("max", "rr_ud_e1", "rr_ud_e0")
_MAX_RD_UD = ("max", "rd_ud_e1", "rd_ud_e0")


def _ud_expr(level: AssumptionLevel) -> Expr:
    if level.null is Assumption.CONDITIONAL_NULL:
        return ("or", "u_d", ("or", "u_d_prime", ("max", "u_d", "u_d_star")))
    return ("or", "u_d_prime", ("max", "u_d", "u_d_star"))


def _rd_ud_expr(level: AssumptionLevel) -> Expr:
    if level.null is Assumption.CONDITIONAL_NULL:
        return ("or", "rd_ud", _MAX_RD_UD)
    return _MAX_RD_UD


def lhs_expr(tag: Tag, level: AssumptionLevel) -> Expr:
    tag = Tag(tag)
    if tag is Tag.C1_RR_EU:
        return "rr_eu"
    if tag is Tag.C2_RR_UD:
        return ("or", "rr_ud", _MAX_RR_UD)
    if tag is Tag.C_RR_A1_MAXUD:
        return _MAX_RR_UD
    if tag is Tag.LEE_MIN:
        return ("min", "u_e", _ud_expr(level))
    if tag is Tag.LEE_MAX:
        return ("max", "u_e", _ud_expr(level))
    if tag is Tag.T1_MIN:
        return ("min", "rd_eu", _rd_ud_expr(level))
    if tag is Tag.T1_MAX:
        return ("max", "rd_eu", _rd_ud_expr(level))
    if tag in (Tag.T2_A, Tag.T3_A):
        return "a"
    if tag in (Tag.T2_B, Tag.T3_B):
        return "b"
    return ("max", "a", "b")


_DISPLAY = {
    "rr_eu": "RR_EU", "rr_ud": "RR_UD", "rr_ud_e1": "RR_UD|E=1", "rr_ud_e0": "RR_UD|E=0",
    "u_e": "U_E", "u_d": "U_D", "u_d_star": "U_D*", "u_d_prime": "U_D'",
    "rd_eu": "RD_EU", "rd_ud": "RD_UD", "rd_ud_e1": "RD_UD|E=1", "rd_ud_e0": "RD_UD|E=0",
    "a": "A", "b": "B",
}  # fmt: skip


def describe(expr: Expr) -> str:
    if isinstance(expr, str):
        return _DISPLAY[expr]
    op, x, y = expr
    if op == "or":
        return describe(x)
    return f"{op}({describe(x)}, {describe(y)})"


def lhs_description(tag: Tag, level: AssumptionLevel) -> str:
    return describe(lhs_expr(tag, level))


def leaves(expr: Expr) -> set[str]:
    if isinstance(expr, str):
        return {expr}
    return leaves(expr[1]) | leaves(expr[2])


def evaluate_interval(expr: Expr, values: Mapping[str, object]):
    """(lo, hi) bounds on the expression given a partial assignment of strengths.

    Works elementwise when the supplied values are arrays.
    """
    if isinstance(expr, str):
        v = values.get(expr)
        if v is None:
            return -math.inf, math.inf
        return v, v
    op, x, y = expr
    if op == "or":
        if isinstance(x, str) and values.get(x) is not None:
            return values[x], values[x]
        return evaluate_interval(y, values)
    lo1, hi1 = evaluate_interval(x, values)
    lo2, hi2 = evaluate_interval(y, values)
    fn = np.minimum if op == "min" else np.maximum
    return fn(lo1, lo2), fn(hi1, hi2)


def evaluate(expr: Expr, values: Mapping[str, object]):
    lo, hi = evaluate_interval(expr, values)
    return lo


# ---------------------------------------------------------------------------
# applicability


def applicable_tags(scale: Scale, k: int, level: AssumptionLevel = CONDITIONAL_NULL) -> list[Tag]:
    k = _check_k(k, 2)
    if scale is Scale.RR:
        if k == 2:
            second = Tag.C2_RR_UD if level.null is Assumption.CONDITIONAL_NULL else Tag.C_RR_A1_MAXUD
            return [Tag.C1_RR_EU, second, Tag.LEE_MIN, Tag.LEE_MAX]
        return [Tag.LEE_MIN, Tag.LEE_MAX]
    tags = [Tag.T1_MIN, Tag.T1_MAX] if k == 2 else [Tag.T2_A, Tag.T2_B, Tag.T2_MAXAB]
    if level.monotone:
        tags += [Tag.T3_A, Tag.T3_B, Tag.T3_MAXAB]
    return tags


def is_applicable(tag: Tag, k: int, level: AssumptionLevel) -> bool:
    return Tag(tag) in applicable_tags(scale_of(Tag(tag)), k, level)


# ---------------------------------------------------------------------------
# reports

SATISFIED = "satisfied"
VIOLATED = "violated"
NOT_EVALUATED = "not-evaluated"

MEETS = "necessary-conditions-met"
CANNOT = "cannot-explain-away"

_MEANING = {
    SATISFIED: "confounder CAN meet the necessary condition",
    VIOLATED: "confounder CANNOT explain away the association",
    NOT_EVALUATED: "no hypothesized strength determines this condition",
}


def json_number(x: Optional[float]):
    """Full-precision JSON value; non-finite floats become the strings "inf", "-inf", "nan"."""
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass(frozen=True)
class ThresholdSpec:
    scale: Scale
    k: int
    assumption: AssumptionLevel
    observed: float

    def __post_init__(self):
        object.__setattr__(self, "scale", Scale(self.scale))
        _check_k(self.k, 2)
        if self.scale is Scale.RR:
            _check_rr(self.observed)
        else:
            _check_rd(self.observed)


@dataclass(frozen=True)
class ReportEntry:
    condition_tag: Tag
    lhs: str
    threshold: float
    hypothesized: Optional[float] = None
    verdict: Optional[str] = None

    @property
    def meaning(self) -> Optional[str]:
        return _MEANING.get(self.verdict)

    def as_dict(self) -> dict:
        return {
            "condition_tag": self.condition_tag.value,
            "lhs": self.lhs,
            "threshold": json_number(self.threshold),
            "hypothesized": json_number(self.hypothesized),
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class ThresholdReport:
    spec: ThresholdSpec
    entries: tuple[ReportEntry, ...]
    verdict: Optional[str] = None
    flipped: bool = False
    notes: tuple[str, ...] = field(default=())

    @property
    def decisive(self) -> Optional[ReportEntry]:
        for e in self.entries:
            if e.verdict == VIOLATED:
                return e
        return None

    def as_dict(self) -> dict:
        return {
            "scale": self.spec.scale.value,
            "k": self.spec.k,
            "assumption": str(self.spec.assumption),
            "observed": json_number(self.spec.observed),
            "flipped": self.flipped,
            "verdict": self.verdict,
            "entries": [e.as_dict() for e in self.entries],
            "notes": list(self.notes),
        }

    def entry(self, tag) -> ReportEntry:
        tag = Tag(tag)
        for e in self.entries:
            if e.condition_tag is tag:
                return e
        raise KeyError(tag)


def thresholds(spec: ThresholdSpec) -> ThresholdReport:
    entries = tuple(
        ReportEntry(tag, lhs_description(tag, spec.assumption), threshold(tag, spec.observed, spec.k))
        for tag in applicable_tags(spec.scale, spec.k, spec.assumption)
    )
    return ThresholdReport(spec, entries)


def required_strengths(spec: ThresholdSpec) -> list[str]:
    names: set[str] = set()
    for tag in applicable_tags(spec.scale, spec.k, spec.assumption):
        names |= leaves(lhs_expr(tag, spec.assumption))
    return [n for n in STRENGTH_NAMES if n in names]


def assess(spec: ThresholdSpec, hypothesized: Mapping[str, Optional[float]]) -> ThresholdReport:
    """Check hypothesized confounder strengths against every applicable condition.

    A violated condition means the hypothesized confounder cannot explain away the
    association. If nothing is violated the verdict is only that the necessary conditions
    are met; sufficiency is never claimed. Conditions whose inputs are only partly supplied
    are still decided when the supplied values force the outcome.
    """
    supplied = {k: float(v) for k, v in hypothesized.items() if v is not None}
    unknown = sorted(set(supplied) - set(STRENGTH_NAMES))
    if unknown:
        raise MissingStrengthError(f"unknown strength names: {', '.join(unknown)}")
    required = required_strengths(spec)
    if not set(supplied) & set(required):
        raise MissingStrengthError(
            f"no relevant hypothesized strength for scale={spec.scale.value}, K={spec.k}, "
            f"{spec.assumption}; supply at least one of: {', '.join(required)}"
        )
    entries = []
    for e in thresholds(spec).entries:
        lo, hi = evaluate_interval(lhs_expr(e.condition_tag, spec.assumption), supplied)
        lo, hi = float(lo), float(hi)
        if hi < e.threshold:
            verdict = VIOLATED
        elif lo >= e.threshold:
            verdict = SATISFIED
        else:
            verdict = NOT_EVALUATED
        value = lo if lo == hi else None
        entries.append(ReportEntry(e.condition_tag, e.lhs, e.threshold, value, verdict))
    # decisive violations first, otherwise keep the fixed tag order
    entries.sort(key=lambda e: e.verdict != VIOLATED)
    overall = CANNOT if any(e.verdict == VIOLATED for e in entries) else MEETS
    return ThresholdReport(spec, tuple(entries), overall)

