"""Randomized verification: necessity over sampled null laws, sharpness by search."""

from .necessity import NecessityResult, verify_cell, verify_necessity
from .sampling import SamplerConfig, sample_null_batch, sample_null_law
from .search import SearchResult, attain_bound, counterexample_hunt
from .suite import run_verify
