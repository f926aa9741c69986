"""Seeded samplers over joint laws satisfying a null-effect assumption."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from ..distribution import (
    Assumption,
    AssumptionLevel,
    CONDITIONAL_NULL,
    DEFAULT_TOL,
    JointLaw,
    LawBatch,
    batch_average_effect,
    batch_flip_exposure,
    batch_rd,
    batch_swap_levels,
)

CHUNK_SIZE = 25_000
BOUNDARY_P_E = (0.001, 0.999)
BOUNDARY_MIN_MASS = 1e-4


class RejectionBudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    n_samples: int = 100_000
    k: int = 2
    assumption: AssumptionLevel = CONDITIONAL_NULL
    tol: float = DEFAULT_TOL
    boundary: bool = False
    retry_limit: int = 200

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.k < 2:
            raise ValueError("k must be >= 2")


def _draw(cfg: SamplerConfig, rng: np.random.Generator, n: int) -> LawBatch:
    k = cfg.k
    if cfg.boundary:
        p_e = rng.choice(np.array(BOUNDARY_P_E), size=n)
        conc = np.full(k, 0.3)
        f1 = rng.dirichlet(conc, size=n)
        f0 = rng.dirichlet(conc, size=n)
        # every level keeps at least BOUNDARY_MIN_MASS under both exposure arms
        f1 = (1.0 - k * BOUNDARY_MIN_MASS) * f1 + BOUNDARY_MIN_MASS
        f0 = (1.0 - k * BOUNDARY_MIN_MASS) * f0 + BOUNDARY_MIN_MASS
        r = rng.beta(0.3, 0.3, size=(n, k))
    else:
        p_e = rng.uniform(0.05, 0.95, size=n)
        f1 = rng.dirichlet(np.ones(k), size=n)
        f0 = rng.dirichlet(np.ones(k), size=n)
        r = rng.uniform(size=(n, k))
    if cfg.assumption.null is Assumption.CONDITIONAL_NULL:
        return LawBatch(p_e, f1, f0, r.copy(), r)
    r_star = rng.beta(0.3, 0.3, size=(n, k)) if cfg.boundary else rng.uniform(size=(n, k))
    w = p_e[:, None] * f1 + (1.0 - p_e[:, None]) * f0
    # solve the single linear average-null constraint for r*_0
    rest = ((r_star[:, 1:] - r[:, 1:]) * w[:, 1:]).sum(axis=1)
    r_star[:, 0] = r[:, 0] - rest / w[:, 0]
    return LawBatch(p_e, f1, f0, r_star, r)


def _postprocess(cfg: SamplerConfig, b: LawBatch) -> tuple[LawBatch, np.ndarray]:
    """Orient exposure, enforce monotonicity by relabeling, and return the keep-mask."""
    keep = np.ones(b.n, dtype=bool)
    if cfg.assumption.null is Assumption.AVERAGE_NULL:
        keep &= (b.r_star[:, 0] >= 0.0) & (b.r_star[:, 0] <= 1.0)
        keep &= np.abs(batch_average_effect(b)) <= min(cfg.tol, 1e-12)
    b = batch_flip_exposure(b, batch_rd(b) < 0.0)
    if cfg.assumption.monotone:
        alpha = b.f1 - b.f0
        negative = alpha < 0.0
        n_neg = negative.sum(axis=1)
        keep &= n_neg <= 1
        level = np.argmax(negative, axis=1)
        b = batch_swap_levels(b, (n_neg == 1) & (level != 0), level)
    return b, keep


def sample_null_batch(cfg: SamplerConfig, rng: np.random.Generator, n: int) -> LawBatch:
    """Draw ``n`` null laws (oriented so rd_ed >= 0) with rejection where needed."""
    parts: list[LawBatch] = []
    have = 0
    drawn = 0
    budget = cfg.retry_limit * max(n, 1)
    while have < n:
        if drawn >= budget:
            raise RejectionBudgetError(
                f"accepted {have} of {n} laws after {drawn} draws (k={cfg.k}, {cfg.assumption})"
            )
        m = max(2 * (n - have), 16)
        raw = _draw(cfg, rng, m)
        drawn += m
        b, keep = _postprocess(cfg, raw)
        b = b.take(keep)
        parts.append(b)
        have += b.n
    out = LawBatch(*(np.concatenate(cols)[:n] for cols in zip(*parts)))
    return out


def sample_null_law(cfg: SamplerConfig, rng: Optional[np.random.Generator] = None) -> JointLaw:
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    return sample_null_batch(cfg, rng, 1).law(0)


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for chunk ``index``; the same regardless of worker count."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def chunk_sizes(n: int, chunk: int = CHUNK_SIZE) -> list[int]:
    sizes = [chunk] * (n // chunk)
    if n % chunk:
        sizes.append(n % chunk)
    return sizes


def iter_null_batches(cfg: SamplerConfig, chunk: int = CHUNK_SIZE) -> Iterator[LawBatch]:
    for i, size in enumerate(chunk_sizes(cfg.n_samples, chunk)):
        yield sample_null_batch(cfg, chunk_rng(cfg.seed, i), size)
