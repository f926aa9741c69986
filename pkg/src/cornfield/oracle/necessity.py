"""Necessity checks: no null law may violate a proven condition."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..conditions import Scale, Tag, evaluate, is_applicable, lhs_expr, scale_of, threshold_values
from ..distribution import (
    Assumption,
    AssumptionLevel,
    JointLaw,
    LawBatch,
    batch_rd,
    batch_rr,
    batch_summarize,
    batch_swap_levels,
)
from .sampling import CHUNK_SIZE, SamplerConfig, chunk_rng, chunk_sizes, sample_null_batch

SLACK_TOL = 1e-9


class InapplicableConditionError(ValueError):
    pass


def batch_strengths(b: LawBatch, level: AssumptionLevel, p_cap: Optional[float] = None) -> dict:
    """Confounder strengths of every law in the batch, keyed by strength name."""
    s = batch_summarize(b, p_cap=p_cap)
    out = {
        "u_e": s.u_e,
        "u_d": s.u_d,
        "u_d_star": s.u_d_star,
        "u_d_prime": s.u_d_prime,
        "a": s.a_max,
        "b": s.b_max,
    }
    if b.k == 2:
        # binary conditions are stated with pr(U=1|E=1) >= pr(U=1|E=0)
        o = batch_swap_levels(b, b.f1[:, 1] < b.f0[:, 1], np.ones(b.n, dtype=int))
        with np.errstate(divide="ignore", invalid="ignore"):
            out["rr_eu"] = o.f1[:, 1] / o.f0[:, 1]
            out["rr_ud_e1"] = o.r_star[:, 1] / o.r_star[:, 0]
            out["rr_ud_e0"] = o.r[:, 1] / o.r[:, 0]
        out["rd_eu"] = o.f1[:, 1] - o.f0[:, 1]
        out["rd_ud_e1"] = o.r_star[:, 1] - o.r_star[:, 0]
        out["rd_ud_e0"] = o.r[:, 1] - o.r[:, 0]
        if level.null is Assumption.CONDITIONAL_NULL:
            out["rr_ud"] = out["rr_ud_e0"]
            out["rd_ud"] = out["rd_ud_e0"]
    return out


def observed_values(b: LawBatch, scale: Scale) -> np.ndarray:
    return batch_rr(b) if scale is Scale.RR else batch_rd(b)


def necessity_slacks(
    b: LawBatch, tag: Tag, level: AssumptionLevel, threshold_scale: float = 1.0, strengths=None
) -> np.ndarray:
    """lhs - threshold for every law; ties at +inf count as zero slack."""
    tag = Tag(tag)
    if strengths is None:
        strengths = batch_strengths(b, level)
    lhs = np.asarray(evaluate(lhs_expr(tag, level), strengths), dtype=float)
    thr = threshold_values(tag, observed_values(b, scale_of(tag)), b.k) * threshold_scale
    with np.errstate(invalid="ignore"):
        slack = lhs - thr
    both_inf = np.isinf(lhs) & np.isinf(thr) & (lhs == thr)
    return np.where(both_inf, 0.0, slack)


@dataclass
class NecessityResult:
    tag: Tag
    k: int
    assumption: AssumptionLevel
    n: int
    violations: int
    worst_margin: float
    worst_law: Optional[JointLaw] = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _check_chunk(cfg, tags, index, size, threshold_scale, tol):
    b = sample_null_batch(cfg, chunk_rng(cfg.seed, index), size)
    strengths = batch_strengths(b, cfg.assumption)
    out = {}
    for tag in tags:
        slack = necessity_slacks(b, tag, cfg.assumption, threshold_scale, strengths)
        bad = ~(slack >= -tol)  # NaN counts as a violation
        i = int(np.nanargmin(slack)) if np.isfinite(slack).any() else 0
        out[tag] = (int(bad.sum()), float(slack[i]), b.law(i))
    return out


def verify_cell(
    cfg: SamplerConfig,
    tags: Sequence[Tag],
    threshold_scale: float = 1.0,
    tol: float = SLACK_TOL,
    workers: int = 1,
    chunk: int = CHUNK_SIZE,
) -> dict[Tag, NecessityResult]:
    """Check several conditions on one stream of sampled null laws.

    Chunks are reduced by summing violation counts and taking the minimum slack, so the
    result is identical for any number of workers.
    """
    tags = [Tag(t) for t in tags]
    for tag in tags:
        if not is_applicable(tag, cfg.k, cfg.assumption):
            raise InapplicableConditionError(f"{tag} does not apply to K={cfg.k} under {cfg.assumption}")
    jobs = list(enumerate(chunk_sizes(cfg.n_samples, chunk)))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda j: _check_chunk(cfg, tags, j[0], j[1], threshold_scale, tol), jobs))
    else:
        parts = [_check_chunk(cfg, tags, i, size, threshold_scale, tol) for i, size in jobs]
    results = {}
    for tag in tags:
        count = sum(p[tag][0] for p in parts)
        worst = min(parts, key=lambda p: p[tag][1])[tag]
        results[tag] = NecessityResult(tag, cfg.k, cfg.assumption, cfg.n_samples, count, worst[1], worst[2])
    return results


def verify_necessity(cfg: SamplerConfig, condition_tag: Tag, **kwargs) -> NecessityResult:
    return verify_cell(cfg, [condition_tag], **kwargs)[Tag(condition_tag)]
