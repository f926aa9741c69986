"""Joint law of (E, U, D) with a K-level confounder, and the quantities derived from it.

A law is stored in the coordinates

    p_e      = pr(E=1)
    f1[k]    = pr(U=k | E=1)
    f0[k]    = pr(U=k | E=0)
    r_star[k]= pr(D=1 | E=1, U=k)
    r[k]     = pr(D=1 | E=0, U=k)

Everything else (pr(U=k), pr(E=1|U=k), the alpha/beta contrasts, ratio summaries) is
derived. Level 0 is always the reference level for the beta contrasts; use
:func:`relabel_reference` to change it.

The ``batch_*`` functions evaluate the same quantities over stacked arrays of laws
(shape ``(n,)`` for ``p_e`` and ``(n, K)`` for the rest) and are what the oracle uses.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .measures import AssociationMeasures

DEFAULT_TOL = 1e-9
SUM_TOL = 1e-12


class Assumption(enum.Enum):
    """Which version of 'no effect of E on D' is imposed."""

    AVERAGE_NULL = "average-null"
    CONDITIONAL_NULL = "conditional-null"


@dataclass(frozen=True)
class AssumptionLevel:
    null: Assumption = Assumption.CONDITIONAL_NULL
    monotone: bool = False

    def __str__(self):
        return self.null.value + ("+monotone" if self.monotone else "")


AVERAGE_NULL = AssumptionLevel(Assumption.AVERAGE_NULL)
CONDITIONAL_NULL = AssumptionLevel(Assumption.CONDITIONAL_NULL)


class LawError(ValueError):
    """Invalid or degenerate joint law."""


class PreconditionError(ValueError):
    pass


def _as_probs(name: str, values: Iterable[float]) -> tuple[float, ...]:
    out = tuple(float(v) for v in values)
    for v in out:
        if not (0.0 <= v <= 1.0):
            raise LawError(f"{name} entries must lie in [0, 1], got {v!r}")
    return out


@dataclass(frozen=True)
class JointLaw:
    p_e: float
    f1: tuple[float, ...]
    f0: tuple[float, ...]
    r_star: tuple[float, ...]
    r: tuple[float, ...]

    def __post_init__(self):
        set_ = object.__setattr__
        for name in ("f1", "f0", "r_star", "r"):
            set_(self, name, _as_probs(name, getattr(self, name)))
        set_(self, "p_e", float(self.p_e))
        k = len(self.f1)
        if k < 2:
            raise LawError(f"need K >= 2 confounder levels, got {k}")
        if any(len(getattr(self, n)) != k for n in ("f0", "r_star", "r")):
            raise LawError("f1, f0, r_star and r must all have length K")
        if not (0.0 < self.p_e < 1.0):
            raise LawError(f"p_e must lie in (0, 1), got {self.p_e!r}")
        for name in ("f1", "f0"):
            total = math.fsum(getattr(self, name))
            if abs(total - 1.0) > SUM_TOL:
                raise LawError(f"{name} must sum to 1 (got {total!r})")
        for j, w in enumerate(self.pr_u):
            if w <= 0.0:
                raise LawError(f"confounder level {j} has zero mass; pr(E=1|U={j}) is undefined")

    @property
    def k(self) -> int:
        return len(self.f1)

    @property
    def pr_u(self) -> tuple[float, ...]:
        return tuple(self.p_e * a + (1.0 - self.p_e) * b for a, b in zip(self.f1, self.f0))

    @property
    def alpha(self) -> tuple[float, ...]:
        return tuple(a - b for a, b in zip(self.f1, self.f0))

    @classmethod
    def conditional_null(cls, p_e, f1, f0, r) -> "JointLaw":
        return cls(p_e, tuple(f1), tuple(f0), tuple(r), tuple(r))


class ConfounderSummary(NamedTuple):
    p: tuple[float, ...]
    q: tuple[float, ...]
    u_e: float
    u_d: float
    u_d_star: float
    u_d_prime: float
    alpha: tuple[float, ...]
    a_max: float
    beta1: tuple[float, ...]
    beta0: tuple[float, ...]
    b_max: float


def ratio_spread(values: Sequence[float]) -> float:
    """max/min of nonnegative values; +inf if the minimum is 0 and the maximum is not."""
    hi, lo = max(values), min(values)
    if hi == lo:
        return 1.0
    if lo == 0.0 or math.isinf(hi):
        return math.inf
    return hi / lo


def summarize(law: JointLaw) -> ConfounderSummary:
    p = tuple(law.p_e * a / w for a, w in zip(law.f1, law.pr_u))
    q = tuple(math.inf if pk >= 1.0 else pk / (1.0 - pk) for pk in p)
    u_d = ratio_spread(law.r)
    u_d_star = ratio_spread(law.r_star)
    alpha = law.alpha
    beta1 = tuple(x - law.r_star[0] for x in law.r_star)
    beta0 = tuple(x - law.r[0] for x in law.r)
    return ConfounderSummary(
        p=p,
        q=q,
        u_e=ratio_spread(q),
        u_d=u_d,
        u_d_star=u_d_star,
        u_d_prime=max(u_d, u_d_star),
        alpha=alpha,
        a_max=max(abs(a) for a in alpha[1:]),
        beta1=beta1,
        beta0=beta0,
        b_max=max(max(abs(b) for b in beta1[1:]), max(abs(b) for b in beta0[1:])),
    )


def outcome_risks(law: JointLaw) -> tuple[float, float]:
    """(pr(D=1|E=1), pr(D=1|E=0))."""
    exposed = math.fsum(rs * a for rs, a in zip(law.r_star, law.f1))
    unexposed = math.fsum(r * b for r, b in zip(law.r, law.f0))
    return exposed, unexposed


def marginal_measures(law: JointLaw) -> AssociationMeasures:
    exposed, unexposed = outcome_risks(law)
    if unexposed == 0.0:
        rr = math.inf if exposed > 0 else None
    else:
        rr = exposed / unexposed
    out = AssociationMeasures(rr_ed=rr, rd_ed=exposed - unexposed)
    if law.k == 2:
        f1, f0 = law.f1[1], law.f0[1]
        out = AssociationMeasures(
            rr_ed=out.rr_ed,
            rd_ed=out.rd_ed,
            rr_eu=(f1 / f0) if f0 > 0 else math.inf,
            rd_eu=f1 - f0,
            rd_ud_given_e1=(law.r_star[1] - law.r_star[0],),
            rd_ud_given_e0=(law.r[1] - law.r[0],),
            rr_ud_given_e1=((law.r_star[1] / law.r_star[0]) if law.r_star[0] > 0 else math.inf,),
            rr_ud_given_e0=((law.r[1] / law.r[0]) if law.r[0] > 0 else math.inf,),
        )
    return out


def average_effect(law: JointLaw) -> float:
    """Sum over k of (r*_k - r_k) pr(U=k)."""
    return math.fsum((rs - r) * w for rs, r, w in zip(law.r_star, law.r, law.pr_u))


def check_average_null(law: JointLaw, tol: float = DEFAULT_TOL) -> bool:
    return abs(average_effect(law)) <= tol


def check_conditional_null(law: JointLaw, tol: float = DEFAULT_TOL) -> bool:
    return max(abs(rs - r) for rs, r in zip(law.r_star, law.r)) <= tol


def check_assumption(law: JointLaw, level: AssumptionLevel, tol: float = DEFAULT_TOL) -> bool:
    if level.null is Assumption.CONDITIONAL_NULL:
        ok = check_conditional_null(law, tol)
    else:
        ok = check_average_null(law, tol)
    return ok and (not level.monotone or check_monotone(law.alpha, 0))


def check_monotone(summary, reference: int = 0, tol: float = 0.0) -> bool:
    """True when every non-reference level is at least as prevalent among the exposed.

    ``summary`` may be a :class:`ConfounderSummary` or a bare alpha sequence.
    """
    alpha = summary.alpha if hasattr(summary, "alpha") else tuple(summary)
    if not 0 <= reference < len(alpha):
        raise IndexError(f"reference level {reference} out of range for K={len(alpha)}")
    return all(a >= -tol for j, a in enumerate(alpha) if j != reference)


def permute_levels(law: JointLaw, order: Sequence[int]) -> JointLaw:
    """Law whose level j is the old level ``order[j]``."""
    if sorted(order) != list(range(law.k)):
        raise ValueError(f"{order!r} is not a permutation of 0..{law.k - 1}")

    def pick(xs):
        return tuple(xs[i] for i in order)

    return JointLaw(law.p_e, pick(law.f1), pick(law.f0), pick(law.r_star), pick(law.r))


def relabel_reference(law: JointLaw, new_reference: int) -> JointLaw:
    """Swap levels 0 and ``new_reference``."""
    if not 0 <= new_reference < law.k:
        raise IndexError(f"reference level {new_reference} out of range for K={law.k}")
    order = list(range(law.k))
    order[0], order[new_reference] = order[new_reference], order[0]
    return permute_levels(law, order)


def flip_law_exposure(law: JointLaw) -> JointLaw:
    """Recode E -> 1 - E. Preserves both null assumptions; inverts rr_ed."""
    return JointLaw(1.0 - law.p_e, law.f0, law.f1, law.r, law.r_star)


def orient_binary_confounder(law: JointLaw) -> JointLaw:
    """For K=2, label the levels so that pr(U=1|E=1) >= pr(U=1|E=0)."""
    if law.k != 2:
        raise ValueError("only defined for a binary confounder")
    return relabel_reference(law, 1) if law.f1[1] < law.f0[1] else law


def lemma1_decomposition(law: JointLaw, tol: float = DEFAULT_TOL) -> float:
    """RD_ED written through the alpha/beta contrasts; valid only under the average null."""
    gap = average_effect(law)
    if abs(gap) > tol:
        raise PreconditionError(f"average null fails: sum (r*_k - r_k) pr(U=k) = {gap!r}")
    alpha = law.alpha
    w1, w0 = law.p_e, 1.0 - law.p_e
    return math.fsum(
        alpha[j] * ((law.r_star[j] - law.r_star[0]) * w0 + (law.r[j] - law.r[0]) * w1)
        for j in range(1, law.k)
    )


# ---------------------------------------------------------------------------
# plain-text key=value serialization

_FIELDS = ("k", "p_e", "f1", "f0", "r_star", "r")


def law_to_text(law: JointLaw) -> str:
    def fmt(xs):
        return ",".join(repr(float(x)) for x in xs)

    return (
        f"k={law.k}\np_e={law.p_e!r}\nf1={fmt(law.f1)}\nf0={fmt(law.f0)}\n"
        f"r_star={fmt(law.r_star)}\nr={fmt(law.r)}\n"
    )


def law_from_text(text: str) -> JointLaw:
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower()
        if not sep or key not in _FIELDS:
            raise LawError(f"line {lineno}: expected one of {', '.join(_FIELDS)} as key=value")
        if key in fields:
            raise LawError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = value.strip()
    missing = [f for f in _FIELDS[1:] if f not in fields]
    if missing:
        raise LawError(f"missing keys: {', '.join(missing)}")

    def vec(name):
        return tuple(float(x) for x in fields[name].split(","))

    law = JointLaw(float(fields["p_e"]), vec("f1"), vec("f0"), vec("r_star"), vec("r"))
    if "k" in fields and int(fields["k"]) != law.k:
        raise LawError(f"k={fields['k']} disagrees with vector length {law.k}")
    return law


# ---------------------------------------------------------------------------
# vectorized forms


class LawBatch(NamedTuple):
    p_e: np.ndarray  # (n,)
    f1: np.ndarray  # (n, K)
    f0: np.ndarray
    r_star: np.ndarray
    r: np.ndarray

    @property
    def n(self) -> int:
        return self.p_e.shape[0]

    @property
    def k(self) -> int:
        return self.f1.shape[1]

    def pr_u(self) -> np.ndarray:
        pe = self.p_e[:, None]
        return pe * self.f1 + (1.0 - pe) * self.f0

    def law(self, i: int) -> JointLaw:
        return JointLaw(
            float(self.p_e[i]),
            tuple(self.f1[i].tolist()),
            tuple(self.f0[i].tolist()),
            tuple(self.r_star[i].tolist()),
            tuple(self.r[i].tolist()),
        )

    @classmethod
    def from_laws(cls, laws: Sequence[JointLaw]) -> "LawBatch":
        return cls(
            np.array([x.p_e for x in laws]),
            np.array([x.f1 for x in laws]),
            np.array([x.f0 for x in laws]),
            np.array([x.r_star for x in laws]),
            np.array([x.r for x in laws]),
        )

    def take(self, mask) -> "LawBatch":
        return LawBatch(*(a[mask] for a in self))


def batch_outcome_risks(b: LawBatch) -> tuple[np.ndarray, np.ndarray]:
    return (b.r_star * b.f1).sum(axis=1), (b.r * b.f0).sum(axis=1)


def batch_rd(b: LawBatch) -> np.ndarray:
    exposed, unexposed = batch_outcome_risks(b)
    return exposed - unexposed


def batch_rr(b: LawBatch) -> np.ndarray:
    exposed, unexposed = batch_outcome_risks(b)
    with np.errstate(divide="ignore", invalid="ignore"):
        return exposed / unexposed


def batch_average_effect(b: LawBatch) -> np.ndarray:
    return ((b.r_star - b.r) * b.pr_u()).sum(axis=1)


def batch_lemma1(b: LawBatch) -> np.ndarray:
    alpha = (b.f1 - b.f0)[:, 1:]
    beta1 = b.r_star[:, 1:] - b.r_star[:, :1]
    beta0 = b.r[:, 1:] - b.r[:, :1]
    pe = b.p_e[:, None]
    return (alpha * (beta1 * (1.0 - pe) + beta0 * pe)).sum(axis=1)


def batch_flip_exposure(b: LawBatch, mask: np.ndarray) -> LawBatch:
    m = mask[:, None]
    return LawBatch(
        np.where(mask, 1.0 - b.p_e, b.p_e),
        np.where(m, b.f0, b.f1),
        np.where(m, b.f1, b.f0),
        np.where(m, b.r, b.r_star),
        np.where(m, b.r_star, b.r),
    )


def batch_swap_levels(b: LawBatch, mask: np.ndarray, level: np.ndarray) -> LawBatch:
    """Swap level 0 with ``level[i]`` in every row where ``mask`` is set."""
    idx = np.tile(np.arange(b.k), (b.n, 1))
    rows = np.nonzero(mask)[0]
    idx[rows, 0] = level[rows]
    idx[rows, level[rows]] = 0

    def g(a):
        return np.take_along_axis(a, idx, axis=1)

    return LawBatch(b.p_e, g(b.f1), g(b.f0), g(b.r_star), g(b.r))


def _spread(x: np.ndarray) -> np.ndarray:
    hi, lo = x.max(axis=1), x.min(axis=1)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = hi / lo
    out = np.where(hi == lo, 1.0, out)
    return np.where((lo == 0) & (hi > 0), np.inf, out)


class BatchSummary(NamedTuple):
    u_e: np.ndarray
    u_d: np.ndarray
    u_d_star: np.ndarray
    u_d_prime: np.ndarray
    alpha: np.ndarray
    a_max: np.ndarray
    beta1: np.ndarray
    beta0: np.ndarray
    b_max: np.ndarray


def batch_summarize(b: LawBatch, p_cap: Optional[float] = None) -> BatchSummary:
    """Vectorized :func:`summarize`. ``p_cap`` clips pr(E=1|U=k) into [p_cap, 1 - p_cap]."""
    w = b.pr_u()
    p = b.p_e[:, None] * b.f1 / w
    if p_cap is not None:
        p = np.clip(p, p_cap, 1.0 - p_cap)
    with np.errstate(divide="ignore"):
        q = np.where(p >= 1.0, np.inf, p / (1.0 - p))
    u_d = _spread(b.r)
    u_d_star = _spread(b.r_star)
    alpha = b.f1 - b.f0
    beta1 = b.r_star - b.r_star[:, :1]
    beta0 = b.r - b.r[:, :1]
    return BatchSummary(
        u_e=_spread(q),
        u_d=u_d,
        u_d_star=u_d_star,
        u_d_prime=np.maximum(u_d, u_d_star),
        alpha=alpha,
        a_max=np.abs(alpha[:, 1:]).max(axis=1),
        beta1=beta1,
        beta0=beta0,
        b_max=np.maximum(np.abs(beta1[:, 1:]).max(axis=1), np.abs(beta0[:, 1:]).max(axis=1)),
    )
