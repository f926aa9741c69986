"""Sharpness search: find null laws whose confounder strength sits on a threshold.

The free parameters of a law split into an exposure/confounder block (p_e, f1, f0) and an
outcome-risk block (r, r_star). For fixed (p_e, f1, f0), both null assumptions and the
"reproduce this observed association" requirement are linear in the outcome risks, so
the best outcome block is found exactly: in closed form under the conditional null, by
linear programming under the average null. The outer block is searched with seeded
restarts and a derivative-free pattern search (pairwise mass transfers plus random
simplex directions, step halving on a failed sweep).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from ..conditions import Scale, Tag, evaluate, is_applicable, lhs_expr, scale_of, threshold
from ..distribution import (
    Assumption,
    AssumptionLevel,
    CONDITIONAL_NULL,
    JointLaw,
    LawBatch,
    check_assumption,
    flip_law_exposure,
    marginal_measures,
)
from .necessity import SLACK_TOL, batch_strengths, necessity_slacks
from .sampling import SamplerConfig, chunk_rng, sample_null_batch

P_CAP = 1e-9
MASS_FLOOR = 1e-12
P_E_RANGE = (1e-3, 1.0 - 1e-3)
SEED_EPS = 1e-9

BINARY_TAGS = (Tag.C1_RR_EU, Tag.C2_RR_UD, Tag.C_RR_A1_MAXUD, Tag.T1_MIN, Tag.T1_MAX)
A_TAGS = (Tag.T2_A, Tag.T3_A)
B_TAGS = (Tag.T2_B, Tag.T3_B)
MAXAB_TAGS = (Tag.T2_MAXAB, Tag.T3_MAXAB)


@dataclass
class SearchResult:
    tag: Tag
    k: int
    assumption: AssumptionLevel
    target_observed: float
    best_law: Optional[JointLaw]
    achieved_value: float
    target_bound: float
    relative_gap: float
    evaluations: int
    budget_exhausted: bool = False
    history: list = field(default_factory=list, repr=False)


# ---------------------------------------------------------------------------
# exact outcome-risk block, conditional null


def min_b_conditional(alpha: np.ndarray, rd: float):
    """Smallest max_k |r_k - r_0| with sum_k alpha_k r_k = rd and r in [0, 1]^K.

    Returns (B, r) or None when rd cannot be reproduced.
    """
    a = alpha[1:]
    pos = float(a[a > 0].sum())
    neg = float(-a[a < 0].sum())
    r = np.full(alpha.shape[0], 0.5)
    if rd == 0.0:
        return 0.0, r
    total = pos + neg
    if total <= 0.0:
        return None
    t = rd / total
    sign = np.sign(alpha)
    sign[0] = 0.0
    if t <= 0.5:
        return t, 0.5 + t * sign
    big, small = max(pos, neg), min(pos, neg)
    if big < rd or big == small:
        return None
    t = (rd - small) / (big - small)
    if t > 1.0:
        return None
    # two-valued risks: the dominant side sits a full t from r_0, the other side at the wall
    r = np.where(sign > 0, 1.0, np.where(sign < 0, 0.0, 1.0 - t if pos >= neg else t))
    r[0] = 1.0 - t if pos >= neg else t
    return t, r


def min_ud_conditional(c: np.ndarray):
    """Smallest max r / min r with sum_k c_k r_k = 0 and r > 0. Returns (U_D, r) or None."""
    cp = float(c[c > 0].sum())
    cn = float(-c[c < 0].sum())
    if cp == 0.0 and cn == 0.0:
        return 1.0, np.full(c.shape[0], 0.5)
    if cp == 0.0 or cn == 0.0:
        return None
    if cn >= cp:
        t = cn / cp
        r = np.where(c > 0, t, 1.0)
    else:
        t = cp / cn
        r = np.where(c < 0, t, 1.0)
    return t, r / t


def binary_rr_ud_conditional(c: np.ndarray):
    """r_1 / r_0 forced by c_0 r_0 + c_1 r_1 = 0 for a binary confounder."""
    c0, c1 = float(c[0]), float(c[1])
    if c0 == 0.0 or c1 == 0.0 or (c0 > 0) == (c1 > 0):
        return None
    ratio = -c0 / c1
    r = np.array([1.0, ratio]) / max(1.0, ratio)
    return ratio, r


# ---------------------------------------------------------------------------
# outcome-risk block, average null (LP)


LP_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def _linprog(c, a_ub, b_ub, a_eq, b_eq, bounds):
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds,
                  method="highs", options=LP_OPTIONS)
    return res if res.status == 0 else None


def _polish(x: np.ndarray, a_eq: np.ndarray, b_eq: np.ndarray) -> np.ndarray:
    """Minimum-norm correction onto the equality constraints, then back into the unit box."""
    resid = b_eq - a_eq @ x
    x = x + np.linalg.pinv(a_eq) @ resid
    return np.clip(x, 0.0, 1.0)


def min_rd_block_average(f1, f0, w, rd: float, mode: str, conditional: bool = False):
    """LP over (r_star, r, t). ``mode``: 'b' for B, 't1' for max(RD_UD|E=1, RD_UD|E=0),
    'none' for feasibility only. Returns (t, r_star, r) or None."""
    k = f1.shape[0]
    n = 2 * k + 1
    a_eq = [np.concatenate([f1, -f0, [0.0]])]
    b_eq = [rd]
    if conditional:
        for j in range(k):
            row = np.zeros(n)
            row[j], row[k + j] = 1.0, -1.0
            a_eq.append(row)
            b_eq.append(0.0)
    else:
        a_eq.append(np.concatenate([w, -w, [0.0]]))
        b_eq.append(0.0)
    a_ub, b_ub = [], []
    if mode in ("b", "t1"):
        signs = (1.0, -1.0) if mode == "b" else (1.0,)
        for off in (0, k):
            for j in range(1, k):
                for s in signs:
                    row = np.zeros(n)
                    row[off + j], row[off], row[-1] = s, -s, -1.0
                    a_ub.append(row)
                    b_ub.append(0.0)
    cost = np.zeros(n)
    if mode != "none":
        cost[-1] = 1.0
    bounds = [(0.0, 1.0)] * (2 * k) + [(-1.0, 1.0)]
    a_eq, b_eq = np.array(a_eq), np.array(b_eq)
    res = _linprog(cost, a_ub or None, b_ub or None, a_eq, b_eq, bounds)
    if res is None:
        return None
    x = _polish(res.x[: 2 * k], a_eq[:, : 2 * k], b_eq)
    return float(res.x[-1]), x[:k], x[k:]


def _ratio_feasible(f1, f0, w, rr: float, mode: str, t: float):
    """Feasibility of the homogeneous relative-risk constraints with every ratio <= t.

    Variables (r_star, r, m_star, m); the risks are scale-free so the box r <= 1 is dropped
    and a normalization m, m_star >= 1 fixes the scale.
    """
    k = f1.shape[0]
    n = 2 * k + 2
    a_eq = np.array([np.concatenate([f1, -rr * f0, [0.0, 0.0]]), np.concatenate([w, -w, [0.0, 0.0]])])
    b_eq = np.zeros(2)
    a_ub, b_ub = [], []
    if mode == "ud_prime":
        for off, m in ((0, 2 * k), (k, 2 * k + 1)):
            for j in range(k):
                hi = np.zeros(n)
                hi[off + j], hi[m] = 1.0, -t
                lo = np.zeros(n)
                lo[off + j], lo[m] = -1.0, 1.0
                a_ub += [hi, lo]
                b_ub += [0.0, 0.0]
        bounds = [(0.0, None)] * (2 * k) + [(1.0, None), (1.0, None)]
    elif mode == "pair":  # K=2: r*_1 <= t r*_0 and r_1 <= t r_0
        for off in (0, k):
            row = np.zeros(n)
            row[off + 1], row[off] = 1.0, -t
            a_ub.append(row)
            b_ub.append(0.0)
        bounds = [(1.0, None), (0.0, None), (1.0, None), (0.0, None), (0.0, 0.0), (0.0, 0.0)]
    else:  # feasibility with a positive unexposed risk
        row = np.concatenate([np.zeros(k), -f0, [0.0, 0.0]])
        a_ub.append(row)
        b_ub.append(-1.0)
        bounds = [(0.0, None)] * (2 * k) + [(0.0, 0.0), (0.0, 0.0)]
    res = _linprog(np.zeros(n), np.array(a_ub), np.array(b_ub), a_eq, b_eq, bounds)
    if res is None:
        return None
    x = np.maximum(res.x, 0.0)
    scale = max(float(x[: 2 * k].max()), 1e-300)
    return x[:k] / scale, x[k : 2 * k] / scale


def min_ratio_average(f1, f0, w, rr: float, mode: str, rel_tol: float = 1e-9,
                      upper: Optional[float] = None, floor: Optional[float] = None):
    """Bisection on t for the smallest feasible ratio objective. Returns (t, r_star, r) or None.

    ``upper`` is a known feasible ratio (e.g. from the conditional-null solution) and
    ``floor`` a value below which the caller does not care, which both shorten the bisection.
    """
    if mode == "none":
        sol = _ratio_feasible(f1, f0, w, rr, mode, 1.0)
        return None if sol is None else (1.0, *sol)
    lo = 1.0 if mode == "ud_prime" else 0.0
    if floor is not None and floor > lo:
        sol = _ratio_feasible(f1, f0, w, rr, mode, floor)
        if sol is not None:
            return floor, *sol
        lo = floor
    else:
        sol = _ratio_feasible(f1, f0, w, rr, mode, lo)
        if sol is not None:
            return lo, *sol
    hi = max(upper if upper is not None else 2.0, lo * 2.0, 1.0) * (1.0 + 1e-12)
    sol = _ratio_feasible(f1, f0, w, rr, mode, hi)
    while sol is None:
        hi *= 4.0
        if hi > 1e12:
            return None
        sol = _ratio_feasible(f1, f0, w, rr, mode, hi)
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        s = _ratio_feasible(f1, f0, w, rr, mode, mid)
        if s is None:
            lo = mid
        else:
            hi, sol = mid, s
    return hi, *sol


# ---------------------------------------------------------------------------
# the problem: tag + target -> objective over (p_e, f1, f0)


def capped_u_e(p_e: float, f1: np.ndarray, f0: np.ndarray, w: np.ndarray) -> float:
    p = np.clip(p_e * f1 / w, P_CAP, 1.0 - P_CAP)
    q = p / (1.0 - p)
    return float(q.max() / q.min())


class _Problem:
    def __init__(self, tag: Tag, target: float, k: int, level: AssumptionLevel):
        self.tag, self.target, self.k, self.level = tag, float(target), k, level
        self.scale = scale_of(tag)
        self.conditional = level.null is Assumption.CONDITIONAL_NULL
        self.evaluations = 0

    def _prepare(self, p_e, f1, f0):
        if self.k == 2 and self.tag in BINARY_TAGS and f1[1] < f0[1]:
            f1, f0 = f1[::-1].copy(), f0[::-1].copy()
        return p_e, f1, f0

    def solve(self, p_e: float, f1: np.ndarray, f0: np.ndarray):
        """(objective, f1, f0, r_star, r) for the best outcome block, or None if infeasible."""
        self.evaluations += 1
        p_e, f1, f0 = self._prepare(p_e, f1, f0)
        alpha = f1 - f0
        if self.level.monotone and (alpha[1:] < 0).any():
            return None
        w = p_e * f1 + (1.0 - p_e) * f0
        if w.min() <= MASS_FLOOR:
            return None
        if self.scale is Scale.RD:
            out = self._solve_rd(f1, f0, w, alpha)
        else:
            out = self._solve_rr(p_e, f1, f0, w)
        if out is None:
            return None
        value, r_star, r = out
        return value, f1, f0, r_star, r

    def _solve_rd(self, f1, f0, w, alpha):
        tag, rd = self.tag, self.target
        a_max = float(np.abs(alpha[1:]).max())
        if self.conditional:
            if tag in (Tag.T1_MIN, Tag.T1_MAX):
                if alpha[1] <= 0.0 or alpha[1] < rd:
                    return None
                t = rd / alpha[1]
                r = np.array([0.5 - t / 2, 0.5 + t / 2])
            else:
                sol = min_b_conditional(alpha, rd)
                if sol is None:
                    return None
                t, r = sol
            r_star = r
        else:
            mode = "t1" if tag in (Tag.T1_MIN, Tag.T1_MAX) else ("none" if tag in A_TAGS else "b")
            sol = min_rd_block_average(f1, f0, w, rd, mode)
            if sol is None:
                return None
            t, r_star, r = sol
        if tag is Tag.T1_MIN:
            value = min(float(alpha[1]), t)
        elif tag is Tag.T1_MAX:
            value = max(float(alpha[1]), t)
        elif tag in A_TAGS:
            value = a_max
        elif tag in B_TAGS:
            value = t
        else:
            value = max(a_max, t)
        return value, r_star, r

    def _solve_rr(self, p_e, f1, f0, w):
        tag, rr = self.tag, self.target
        c = f1 - rr * f0
        if self.conditional:
            if tag in (Tag.C2_RR_UD, Tag.C_RR_A1_MAXUD):
                sol = binary_rr_ud_conditional(c)
            else:
                sol = min_ud_conditional(c)
            if sol is None:
                return None
            t, r = sol
            r_star = r
        else:
            mode = {Tag.C1_RR_EU: "none", Tag.C_RR_A1_MAXUD: "pair"}.get(tag, "ud_prime")
            # the conditional-null optimum is feasible here too and bounds the bisection
            warm = binary_rr_ud_conditional(c) if mode == "pair" else min_ud_conditional(c)
            floor = capped_u_e(p_e, f1, f0, w) if tag is Tag.LEE_MAX else None
            sol = min_ratio_average(f1, f0, w, rr, mode, upper=None if warm is None else warm[0], floor=floor)
            if sol is None:
                return None
            t, r_star, r = sol
        if tag is Tag.C1_RR_EU:
            value = float(f1[1] / f0[1]) if f0[1] > 0 else math.inf
        elif tag in (Tag.C2_RR_UD, Tag.C_RR_A1_MAXUD):
            value = t
        elif tag is Tag.LEE_MIN:
            value = min(capped_u_e(p_e, f1, f0, w), t)
        else:
            value = max(capped_u_e(p_e, f1, f0, w), t)
        return value, r_star, r

    def value(self, p_e, f1, f0) -> float:
        out = self.solve(p_e, f1, f0)
        return math.inf if out is None else out[0]

    def law(self, p_e, f1, f0) -> Optional[JointLaw]:
        out = self.solve(p_e, f1, f0)
        if out is None:
            return None
        _, f1, f0, r_star, r = out
        return JointLaw(
            p_e,
            tuple((f1 / f1.sum()).tolist()),
            tuple((f0 / f0.sum()).tolist()),
            tuple(np.clip(r_star, 0, 1).tolist()),
            tuple(np.clip(r, 0, 1).tolist()),
        )


# ---------------------------------------------------------------------------
# restart candidates built from the equality configurations


def _normalize(v: np.ndarray) -> np.ndarray:
    v = np.maximum(v, 0.0)
    return v / v.sum()


def seed_starts(tag: Tag, target: float, k: int) -> list[tuple[float, np.ndarray, np.ndarray]]:
    """(p_e, f1, f0) near the configurations where a risk-difference bound is tight."""
    tag = Tag(tag)
    rd = float(target)
    eps = SEED_EPS
    starts = []

    def add(f1, f0):
        f1, f0 = np.asarray(f1, float), np.asarray(f0, float)
        if (f1 >= -1e-15).all() and (f0 >= -1e-15).all():
            starts.append((0.5, _normalize(f1), _normalize(f0)))

    if scale_of(tag) is Scale.RR:
        return starts
    if tag in (Tag.T1_MIN, Tag.T1_MAX):
        add([0.0, 1.0], [1.0, 0.0])
        s = math.sqrt(rd) if tag is Tag.T1_MAX else min(1.0, rd * (1 + 1e-9))
        add([(1 - s) / 2, (1 + s) / 2], [(1 + s) / 2, (1 - s) / 2])
        return starts
    m = k - 1
    # A is tight when every non-reference level gains rd/(K-1) under exposure and D is
    # perfectly predicted by U
    a = rd / m * (1 + 1e-9)
    base0 = min(1.0, max(0.5, m * a))
    rest = (1.0 - base0) / m
    f0 = np.array([base0] + [rest] * m)
    f1 = np.array([base0 - m * a] + [rest + a] * m)
    if tag in A_TAGS:
        add(f1, f0)
        return starts
    # B tight under the monotone assumption: U=0 only among the unexposed
    mono_b = (np.array([0.0] + [1.0 / m] * m), np.array([1.0] + [0.0] * m))
    # B tight without monotonicity: exposed and unexposed live on disjoint non-reference levels
    n_pos = (m + 1) // 2
    n_neg = m - n_pos
    if n_neg > 0:
        f1_b = np.array([eps] + [(1 - eps) / n_pos] * n_pos + [0.0] * n_neg)
        f0_b = np.array([eps] + [0.0] * n_pos + [(1 - eps) / n_neg] * n_neg)
    else:
        f1_b, f0_b = mono_b
    if tag is Tag.T2_B:
        add(f1_b, f0_b)
    elif tag is Tag.T3_B:
        add(*mono_b)
    elif tag is Tag.T2_MAXAB:
        if m * rd <= 4.0:
            s = math.sqrt(rd / m)
            half = m // 2
            if (m - half) * s <= 1.0 and half * s <= 1.0:
                f1 = np.array([1 - (m - half) * s] + [s] * (m - half) + [0.0] * half)
                f0 = np.array([1 - half * s] + [0.0] * (m - half) + [s] * half)
                add(f1, f0)
            if m * s <= 1.0:
                add(np.array([1 - m * s] + [s] * m), np.array([1.0] + [0.0] * m))
        else:
            half = m // 2
            f1 = np.array([eps] + [(1 - eps) / half] * half + [0.0] * (m - half))
            f0 = np.array([eps] + [0.0] * half + [(1 - eps) / (m - half)] * (m - half))
            add(f1, f0)
        add(f1_b, f0_b)
    elif tag is Tag.T3_MAXAB:
        if m * rd <= 1.0:
            s = math.sqrt(rd / m)
            add(np.array([1 - m * s] + [s] * m), np.array([1.0] + [0.0] * m))
        add(*mono_b)
    return starts


# ---------------------------------------------------------------------------
# outer pattern search


def _pack(p_e, f1, f0) -> np.ndarray:
    return np.concatenate([[p_e], f1, f0])


def _unpack(x: np.ndarray, k: int):
    return float(x[0]), x[1 : 1 + k], x[1 + k :]


def _base_directions(k: int, move_p_e: bool) -> list[np.ndarray]:
    n = 1 + 2 * k
    dirs = []
    for block in (1, 1 + k):
        for i in range(k):
            for j in range(k):
                if i != j:
                    d = np.zeros(n)
                    d[block + i], d[block + j] = -1.0, 1.0
                    dirs.append(d)
    for i in range(k):
        for j in range(k):
            if i != j:
                d = np.zeros(n)
                d[1 + i], d[1 + j] = -1.0, 1.0
                d[1 + k + j], d[1 + k + i] = -1.0, 1.0
                dirs.append(d)
                d2 = np.zeros(n)
                d2[1 + i], d2[1 + j] = -1.0, 1.0
                d2[1 + k + i], d2[1 + k + j] = -1.0, 1.0
                dirs.append(d2)
    if move_p_e:
        for s in (1.0, -1.0):
            d = np.zeros(n)
            d[0] = s
            dirs.append(d)
    return dirs


def _random_direction(rng: np.random.Generator, k: int, move_p_e: bool) -> np.ndarray:
    d = rng.standard_normal(1 + 2 * k)
    if not move_p_e:
        d[0] = 0.0
    d[1 : 1 + k] -= d[1 : 1 + k].mean()
    d[1 + k :] -= d[1 + k :].mean()
    return d / np.abs(d).max()


def _max_step(x: np.ndarray, d: np.ndarray) -> float:
    """Largest s with x + s d inside the box (p_e range, f in [0, 1])."""
    lo = np.concatenate([[P_E_RANGE[0]], np.zeros(x.shape[0] - 1)])
    hi = np.concatenate([[P_E_RANGE[1]], np.ones(x.shape[0] - 1)])
    s = math.inf
    for xi, di, l, h in zip(x, d, lo, hi):
        if di > 0:
            s = min(s, (h - xi) / di)
        elif di < 0:
            s = min(s, (l - xi) / di)
    return max(s, 0.0)


def pattern_search(problem: _Problem, x0: np.ndarray, budget: int, rng: np.random.Generator,
                   step: float = 0.1, min_step: float = 1e-13, n_random: Optional[int] = None):
    k = problem.k
    move_p_e = not problem.conditional
    base = _base_directions(k, move_p_e)
    if n_random is None:
        n_random = 2 * k
    x = x0.copy()
    v = problem.value(*_unpack(x, k))
    start = problem.evaluations
    while step >= min_step and problem.evaluations - start < budget:
        improved = False
        dirs = base + [_random_direction(rng, k, move_p_e) for _ in range(n_random)]
        for d in dirs:
            if problem.evaluations - start >= budget:
                break
            s = min(step, _max_step(x, d))
            if s <= 0.0:
                continue
            y = x + s * d
            y[1:][np.abs(y[1:]) < 1e-17] = 0.0
            vy = problem.value(*_unpack(y, k))
            if vy < v:
                x, v, improved = y, vy, True
        if not improved:
            step *= 0.5
    return x, v


def _random_start(problem: _Problem, rng: np.random.Generator, tries: int = 1000):
    k = problem.k
    for _ in range(tries):
        f1 = rng.dirichlet(np.ones(k))
        f0 = rng.dirichlet(np.ones(k))
        if problem.level.monotone:
            neg = np.nonzero(f1 - f0 < 0)[0]
            if len(neg) > 1:
                continue
            if len(neg) == 1:
                j = neg[0]
                for v in (f1, f0):
                    v[0], v[j] = v[j], v[0]
        p_e = float(rng.uniform(0.05, 0.95))
        x = _pack(p_e, f1, f0)
        if math.isfinite(problem.value(p_e, f1, f0)):
            return x
    return None


def _law_lhs(law: JointLaw, tag: Tag, level: AssumptionLevel) -> float:
    strengths = batch_strengths(LawBatch.from_laws([law]), level, p_cap=P_CAP)
    return float(np.asarray(evaluate(lhs_expr(tag, level), strengths))[0])


def attain_bound(
    condition_tag: Tag,
    target_observed: float,
    k: int,
    assumption: AssumptionLevel = CONDITIONAL_NULL,
    budget: int = 20_000,
    seed: int = 0,
    restarts: int = 6,
    use_seeds: bool = True,
) -> SearchResult:
    """Minimize the condition's left side over null laws that reproduce ``target_observed``.

    The achieved value is recomputed from the returned law through the same strength
    definitions the necessity checker uses, so the reported gap does not trust the inner
    solver.
    """
    tag = Tag(condition_tag)
    if not is_applicable(tag, k, assumption):
        raise ValueError(f"{tag} does not apply to K={k} under {assumption}")
    target_bound = threshold(tag, target_observed, k)
    problem = _Problem(tag, target_observed, k, assumption)
    rng = np.random.default_rng(seed)

    starts = []
    if use_seeds:
        for p_e, f1, f0 in seed_starts(tag, target_observed, k):
            if math.isfinite(problem.value(p_e, f1, f0)):
                starts.append(_pack(p_e, f1, f0))
    for _ in range(restarts):
        x = _random_start(problem, rng)
        if x is not None:
            starts.append(x)
    best_x, best_v = None, math.inf
    history = []
    if starts:
        share = max(1, (budget - problem.evaluations) // len(starts))
        for x0 in starts:
            remaining = budget - problem.evaluations
            if remaining <= 0:
                break
            x, v = pattern_search(problem, x0, min(share, remaining), rng)
            history.append(v)
            if v < best_v:
                best_x, best_v = x, v
    exhausted = problem.evaluations >= budget
    law = None if best_x is None else problem.law(*_unpack(best_x, k))
    if law is None:
        return SearchResult(tag, k, assumption, target_observed, None, math.inf, target_bound,
                            math.inf, problem.evaluations, exhausted, history)
    achieved = _law_lhs(law, tag, assumption)
    gap = (achieved - target_bound) / target_bound if target_bound != 0 else achieved - target_bound
    return SearchResult(tag, k, assumption, target_observed, law, achieved, target_bound, gap,
                        problem.evaluations, exhausted, history)


# ---------------------------------------------------------------------------
# separation witnesses


def _oriented(law: JointLaw) -> JointLaw:
    return flip_law_exposure(law) if marginal_measures(law).rd_ed < 0 else law


def claimed_slack(law: JointLaw, tag: Tag, level: AssumptionLevel) -> float:
    """lhs - threshold of ``tag`` evaluated on an (exposure-oriented) law."""
    tag = Tag(tag)
    law = _oriented(law)
    m = marginal_measures(law)
    observed = m.rr_ed if scale_of(tag) is Scale.RR else m.rd_ed
    return _law_lhs(law, tag, level) - threshold(tag, observed, law.k)


def _perturbations(law_f: tuple, rng: np.random.Generator, n: int, scale: float = 0.02):
    p_e, f1, f0 = law_f
    for _ in range(n):
        g1 = _normalize(f1 + scale * rng.random(f1.shape[0]) * (rng.random(f1.shape[0]) < 0.5))
        g0 = _normalize(f0 + scale * rng.random(f0.shape[0]) * (rng.random(f0.shape[0]) < 0.5))
        yield p_e, g1, g0


def counterexample_hunt(
    condition_tag_weaker: Tag,
    condition_tag_claimed: Tag,
    cfg: SamplerConfig,
    seed_targets: Sequence[float] = (0.1, 0.3, 0.5),
    tol: float = SLACK_TOL,
) -> Optional[JointLaw]:
    """Look for a law admissible under ``cfg`` that breaks the claimed condition.

    Candidates are the laws that make the weaker condition tight (and small perturbations
    of them), followed by ``cfg.n_samples`` draws from the null sampler. Every candidate
    must pass ``cfg``'s assumption check, including monotonicity at reference level 0.
    Returns the violating law deepest inside the gap between the two thresholds, or None.
    """
    weaker, claimed = Tag(condition_tag_weaker), Tag(condition_tag_claimed)
    level = cfg.assumption
    rng = chunk_rng(cfg.seed, 10_000)
    candidates: list[JointLaw] = []
    if scale_of(weaker) is scale_of(claimed) and is_applicable(weaker, cfg.k, CONDITIONAL_NULL):
        for target in seed_targets:
            if scale_of(weaker) is Scale.RR:
                target = 1.0 + 2.0 * target
            problem = _Problem(weaker, target, cfg.k, CONDITIONAL_NULL)
            for start in seed_starts(weaker, target, cfg.k):
                for p_e, f1, f0 in [start, *_perturbations(start, rng, 20)]:
                    law = problem.law(p_e, f1, f0)
                    if law is not None:
                        candidates.append(law)

    def admissible(law: JointLaw) -> bool:
        return check_assumption(law, level, cfg.tol)

    def centrality(law: JointLaw) -> float:
        # distance inside the gap: above the weaker threshold and below the claimed one
        return min(claimed_slack(law, weaker, level), -claimed_slack(law, claimed, level))

    hits = [law for law in candidates if admissible(law) and claimed_slack(law, claimed, level) < -tol]
    if hits:
        return max(hits, key=centrality)
    batch = sample_null_batch(cfg, chunk_rng(cfg.seed, 0), cfg.n_samples)
    slack = necessity_slacks(batch, claimed, level)
    hits = [batch.law(int(i)) for i in np.nonzero(~(slack >= -tol))[0]]
    hits = [law for law in hits if admissible(law)]
    return max(hits, key=centrality) if hits else None


__all__ = [
    "SearchResult",
    "attain_bound",
    "counterexample_hunt",
    "claimed_slack",
    "seed_starts",
    "min_b_conditional",
    "min_ud_conditional",
    "min_rd_block_average",
    "min_ratio_average",
]
