"""Shared fixtures.

The expensive computations (per-family self-fit sweeps and the full
cross-comparison tables) are session-scoped so the module property tests
and the acceptance suite share one run.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from unifit import (
    BenchConfig,
    CurveModel,
    FitConfig,
    KIND_ORDER,
    cross_compare,
    fit,
    sample_generator_params,
    sample_series,
)
from unifit._seeds import mix64

SELF_FIT_DRAWS = 100
SELF_FIT_SEED = 2024


@pytest.fixture(scope="session")
def self_fit_rms():
    """rms of fitting each family to 100 of its own noiseless series."""
    out = {}
    for k_idx, kind in enumerate(KIND_ORDER):
        values = []
        for i in range(SELF_FIT_DRAWS):
            params = sample_generator_params(kind, mix64(SELF_FIT_SEED, k_idx, i))
            series = sample_series(CurveModel(params, 1.0), 101)
            result = fit(series, kind, FitConfig(seed=mix64(SELF_FIT_SEED, k_idx, i, 1)))
            values.append(result.rms)
        out[kind] = np.array(values)
    return out


@pytest.fixture(scope="session")
def cross_tables():
    """Full trials=100 cross-comparison tables for seeds 1, 2, 3 plus a
    repeat of seed 1, with the wall-clock time of the three primary runs."""
    tables = {}
    t0 = time.perf_counter()
    for seed in (1, 2, 3):
        cfg = BenchConfig(trials_per_cell=100, seed=seed, fit=FitConfig(seed=seed))
        tables[seed] = cross_compare(cfg, workers=2)
    elapsed = time.perf_counter() - t0
    cfg1 = BenchConfig(trials_per_cell=100, seed=1, fit=FitConfig(seed=1))
    repeat = cross_compare(cfg1, workers=2)
    return {"tables": tables, "repeat_seed1": repeat, "elapsed_3_runs": elapsed}
