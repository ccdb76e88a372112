"""Derivative-free nonlinear least-squares fitting of the model families.

The optimizer is a Nelder-Mead simplex run in unconstrained coordinates:
positive parameters go through a log transform, lower-bounded ones
through a shifted log, free ones are identity-mapped, so every point the
simplex can reach maps to valid shape parameters.  The amplitude is
profiled out analytically at every loss evaluation (closed-form 1-D
least squares against the unit-peak shape), which drops the search to at
most three dimensions.

Multi-start: initial points come from a seeded Latin hypercube over
documented per-family ranges.  The pool is built in blocks of 16 (the
default start count), so the pool for ``starts=k`` is a prefix of the
pool for any larger count with the same seed.  All starts advance in
lockstep and candidate losses are evaluated in batched vectorized calls;
each start's trajectory is identical to running it alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._seeds import mix64
from .models import (
    KIND_ORDER,
    CurveModel,
    EvalGrid,
    ModelKind,
    SampledSeries,
    ShapeParams,
    _KERNELS,
    _log_peak,
    evaluate_on,
)

__all__ = [
    "FitConfig",
    "FitResult",
    "FitFailureError",
    "ParamSpec",
    "FAMILY_PARAMS",
    "rms_loss",
    "fit",
]

_START_TAG = 0x5354  # "ST"
_START_BLOCK = 16


class FitFailureError(RuntimeError):
    """Every start diverged to a non-finite loss (or the profiled
    amplitude degenerated)."""

    def __init__(self, message: str, kind: ModelKind, start_losses: tuple[float, ...]):
        super().__init__(message)
        self.kind = kind
        self.start_losses = start_losses


@dataclass(frozen=True)
class FitConfig:
    """Optimizer settings; defaults are sized for 101-point series."""

    starts: int = 16
    max_iterations: int = 2000
    simplex_tolerance: float = 1e-12
    seed: int = 0

    def __post_init__(self) -> None:
        if self.starts < 1:
            raise ValueError(f"starts must be >= 1, got {self.starts}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.simplex_tolerance > 0.0:
            raise ValueError(
                f"simplex_tolerance must be > 0, got {self.simplex_tolerance}"
            )


@dataclass(frozen=True)
class FitResult:
    """Best fit plus per-start diagnostics.

    ``rms`` always equals ``min(start_losses)``; ``iterations_used`` is
    the total across starts and ``converged`` reports whether the winning
    start met the simplex tolerance within its iteration budget.
    """

    model: CurveModel
    rms: float
    start_losses: tuple[float, ...]
    iterations_used: int
    converged: bool


@dataclass(frozen=True)
class ParamSpec:
    """Sampling range and bound handling for one shape parameter.

    ``lo``/``hi`` bound the start/generation draws (log-uniform when
    ``log_scale``); with ``shifted`` the range applies to theta - 1.
    The constraint decides the unconstrained coordinate: ``pos`` maps
    through exp(z), ``gt1`` through 1 + exp(z), ``free`` is identity.
    """

    name: str
    constraint: str  # "pos" | "gt1" | "free"
    lo: float
    hi: float
    log_scale: bool
    shifted: bool = False


FAMILY_PARAMS: dict[ModelKind, tuple[ParamSpec, ...]] = {
    ModelKind.MAXENT: (
        ParamSpec("a", "pos", 0.05, 50.0, True),
        ParamSpec("b", "pos", 0.05, 50.0, True),
    ),
    ModelKind.BETA: (
        ParamSpec("a", "gt1", 0.05, 50.0, True, shifted=True),
        ParamSpec("b", "gt1", 0.05, 50.0, True, shifted=True),
    ),
    ModelKind.RICHARDS: (
        ParamSpec("k", "pos", 2.0, 100.0, True),
        ParamSpec("t0", "free", 0.0, 1.0, False),
        ParamSpec("nu", "pos", 0.1, 10.0, True),
    ),
    ModelKind.SKEWNORMAL: (
        ParamSpec("xi", "free", 0.0, 1.0, False),
        ParamSpec("omega", "pos", 0.02, 1.0, True),
        ParamSpec("alpha", "free", -20.0, 20.0, False),
    ),
    ModelKind.GENGAMMA: (
        ParamSpec("alpha", "pos", 0.05, 2.0, True),
        ParamSpec("d", "gt1", 1.1, 30.0, True),
        ParamSpec("p", "pos", 0.3, 10.0, True),
    ),
}

_KIND_INDEX = {kind: i for i, kind in enumerate(KIND_ORDER)}

# Initial simplex edge per coordinate: a fixed fraction of the start box
# width in unconstrained coordinates.
_STEP_FRACTION = 0.08


def _z_width(spec: ParamSpec) -> float:
    if spec.constraint == "free":
        return spec.hi - spec.lo
    if spec.constraint == "pos":
        return math.log(spec.hi) - math.log(spec.lo)
    # gt1: width of log(theta - 1) over the sampling range
    lo = spec.lo if spec.shifted else spec.lo - 1.0
    hi = spec.hi if spec.shifted else spec.hi - 1.0
    return math.log(hi) - math.log(lo)


_INITIAL_STEPS = {
    kind: np.array([_STEP_FRACTION * _z_width(s) for s in specs])
    for kind, specs in FAMILY_PARAMS.items()
}


def _theta_from_unit(spec: ParamSpec, u: np.ndarray) -> np.ndarray:
    """Map uniform draws in [0, 1) to parameter values."""
    if spec.log_scale:
        base = spec.lo * (spec.hi / spec.lo) ** u
    else:
        base = spec.lo + (spec.hi - spec.lo) * u
    return 1.0 + base if spec.shifted else base


def _z_from_theta(spec: ParamSpec, theta: np.ndarray) -> np.ndarray:
    if spec.constraint == "pos":
        return np.log(theta)
    if spec.constraint == "gt1":
        return np.log(theta - 1.0)
    return +theta


def _theta_from_z(spec: ParamSpec, z: float) -> float:
    if spec.constraint == "pos":
        return math.exp(z)
    if spec.constraint == "gt1":
        return 1.0 + math.exp(z)
    return z


# Column plan per family: one vectorized exp, then patch the shifted and
# identity-mapped columns.
_COL_GT1 = {
    kind: tuple(j for j, s in enumerate(specs) if s.constraint == "gt1")
    for kind, specs in FAMILY_PARAMS.items()
}
_COL_FREE = {
    kind: tuple(j for j, s in enumerate(specs) if s.constraint == "free")
    for kind, specs in FAMILY_PARAMS.items()
}


def _theta_matrix(kind: ModelKind, Z: np.ndarray) -> np.ndarray:
    """Unconstrained matrix (m, d) -> parameter matrix (m, d)."""
    theta = np.exp(Z)
    for j in _COL_GT1[kind]:
        theta[:, j] += 1.0
    for j in _COL_FREE[kind]:
        theta[:, j] = Z[:, j]
    return theta


def start_pool(kind: ModelKind, starts: int, seed: int) -> np.ndarray:
    """Seeded Latin-hypercube start points in unconstrained coordinates.

    Built in blocks of 16 so pools with the same seed nest: the pool for
    a smaller start count is a prefix of the pool for a larger one.
    """
    specs = FAMILY_PARAMS[kind]
    d = len(specs)
    blocks = []
    for b in range((starts + _START_BLOCK - 1) // _START_BLOCK):
        rng = np.random.default_rng(mix64(seed, _START_TAG, _KIND_INDEX[kind], b))
        u = np.empty((_START_BLOCK, d))
        for j in range(d):
            u[:, j] = (rng.permutation(_START_BLOCK) + rng.random(_START_BLOCK)) / _START_BLOCK
        blocks.append(u)
    u = np.vstack(blocks)[:starts]
    z = np.empty_like(u)
    for j, spec in enumerate(specs):
        z[:, j] = _z_from_theta(spec, _theta_from_unit(spec, u[:, j]))
    return z


def rms_loss(observed: SampledSeries, model: CurveModel) -> float:
    """Root mean squared deviation between the series and the model."""
    if len(observed) == 0:
        raise ValueError("observed series is empty")
    r = observed.ys - evaluate_on(model, observed.xs)
    return math.sqrt(float((r * r).sum()) / r.size)


def _make_batch_loss(kind: ModelKind, observed: SampledSeries):
    """Vectorized profiled-amplitude rms loss: (m, d) z-matrix -> (m,).

    Row reductions use .sum(axis=1) (not BLAS) so each row's value is
    independent of how many rows are evaluated together.
    """
    grid = EvalGrid(observed.xs)
    ys = observed.ys
    n = ys.size
    kernel = _KERNELS[kind]

    def batch_rms(Z: np.ndarray) -> np.ndarray:
        # caller holds an errstate that silences the expected warnings
        theta = _theta_matrix(kind, Z)
        ls = kernel(*(theta[:, j : j + 1] for j in range(Z.shape[1])), grid)
        peak = np.max(ls, axis=1, keepdims=True)
        s = np.exp(ls - peak)
        amp = (s * ys).sum(axis=1) / (s * s).sum(axis=1)
        np.maximum(amp, 0.0, out=amp)
        r = ys - amp[:, None] * s
        out = np.sqrt((r * r).sum(axis=1) / n)
        out[~np.isfinite(out)] = np.inf
        return out

    return batch_rms


def _profiled_amplitude(kind: ModelKind, observed: SampledSeries, params: ShapeParams) -> float:
    """Closed-form least-squares amplitude, converted to the peak-normalized
    convention (the in-loop profile normalizes by the grid maximum)."""
    grid = EvalGrid(observed.xs)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        ls = _KERNELS[kind](*params.values, grid)
    peak_grid = float(np.max(ls))
    s = np.exp(ls - peak_grid)
    amp_grid = float((s * observed.ys).sum() / (s * s).sum())
    # in-loop shapes are normalized by the grid maximum; the true peak can
    # fall between grid points, so rescale to the peak-normalized convention
    return amp_grid * math.exp(_log_peak(params) - peak_grid)


def _nm_lockstep(batch_loss, Z0: np.ndarray, steps: np.ndarray, tol: float, max_iter: int):
    """Advance independent Nelder-Mead instances in lockstep.

    Returns (best z per start, best loss, iterations, converged flags),
    ordered by start index.  Standard coefficients: reflection 1,
    expansion 2, contraction 0.5, shrink 0.5.  Non-finite losses enter as
    +inf and the simplex contracts away from them.

    Finished instances are compacted out of the working arrays, so each
    pass only touches still-active starts; every candidate evaluation for
    a pass happens in at most three batched loss calls.
    """
    S, d = Z0.shape
    nv = d + 1
    V = np.repeat(Z0[:, None, :], nv, axis=1)  # (m, nv, d), m = active starts
    for i in range(d):
        V[:, i + 1, i] += steps[i]
    old_err = np.seterr(divide="ignore", over="ignore", invalid="ignore")
    try:
        return _nm_lockstep_loop(batch_loss, V, tol, max_iter)
    finally:
        np.seterr(**old_err)


def _nm_lockstep_loop(batch_loss, V: np.ndarray, tol: float, max_iter: int):
    S, nv, d = V.shape
    F = batch_loss(V.reshape(S * nv, d)).reshape(S, nv)
    idx = np.arange(S)  # original start index per active row
    iters = np.zeros(S, dtype=np.int64)

    z_out = np.empty((S, d))
    f_out = np.full(S, np.inf)
    it_out = np.zeros(S, dtype=np.int64)
    cv_out = np.zeros(S, dtype=bool)

    while F.shape[0]:
        m = F.shape[0]
        rows = np.arange(m)[:, None]
        # keep each simplex sorted ascending (stable: ties keep prior order)
        order = np.argsort(F, axis=1, kind="stable")
        F = F[rows, order]
        V = V[rows, order]

        spread = F[:, -1] - F[:, 0]
        met_tol = spread <= tol  # NaN spread (all-inf simplex) keeps iterating
        finished = met_tol | (iters >= max_iter)
        if finished.any():
            sel = idx[finished]
            z_out[sel] = V[finished, 0]
            f_out[sel] = F[finished, 0]
            it_out[sel] = iters[finished]
            cv_out[sel] = met_tol[finished]
            keep = ~finished
            V = V[keep]
            F = F[keep]
            idx = idx[keep]
            iters = iters[keep]
            if F.shape[0] == 0:
                break
        iters += 1
        m = F.shape[0]

        cen = V[:, :-1].mean(axis=1)
        worst = V[:, -1]
        delta = cen - worst
        # speculative batch: reflection, expansion and contraction points
        # are evaluated together in one call; unused values are discarded
        cand = np.empty((3 * m, d))
        xr = cand[:m]
        np.add(cen, delta, out=xr)
        np.add(cen, 2.0 * delta, out=cand[m : 2 * m])
        np.subtract(cen, 0.5 * delta, out=cand[2 * m :])
        fcand = batch_loss(cand)
        fr = fcand[:m]
        fe = fcand[m : 2 * m]
        fc = fcand[2 * m :]

        f_best = F[:, 0]
        f_second = F[:, -2]
        f_worst = F[:, -1]
        expand = fr < f_best
        accept = ~expand & (fr < f_second)
        contract = ~(expand | accept)

        if accept.any():
            V[accept, -1] = xr[accept]
            F[accept, -1] = fr[accept]
        if expand.any():
            take_e = expand & (fe < fr)
            take_r = expand & ~take_e
            if take_e.any():
                V[take_e, -1] = cand[m : 2 * m][take_e]
                F[take_e, -1] = fe[take_e]
            if take_r.any():
                V[take_r, -1] = xr[take_r]
                F[take_r, -1] = fr[take_r]
        if contract.any():
            take_c = contract & (fc < f_worst)
            if take_c.any():
                V[take_c, -1] = cand[2 * m :][take_c]
                F[take_c, -1] = fc[take_c]
            shrink = contract & ~take_c
            if shrink.any():
                best_v = V[shrink, 0][:, None, :]
                newv = best_v + 0.5 * (V[shrink, 1:] - best_v)  # (ms, d, d)
                V[shrink, 1:] = newv
                F[shrink, 1:] = batch_loss(newv.reshape(-1, d)).reshape(-1, d)

    return z_out, f_out, it_out, cv_out


def fit(observed: SampledSeries, kind: ModelKind, config: FitConfig = FitConfig()) -> FitResult:
    """Fit one model family to a normalized series.

    The series must have xs within [0, 1] and a positive maximum no
    larger than 1.5 — unit peak plus headroom for additive noise; see
    ``dataio.normalize``.
    """
    if len(observed) < 2:
        raise ValueError("observed series must have at least 2 points")
    ymax = float(observed.ys.max())
    if not np.isfinite(observed.ys).all():
        raise ValueError("observed series contains non-finite values")
    # unit-peak data plus headroom for additive noise on synthetic series;
    # anything larger is raw unnormalized input
    if ymax > 1.5:
        raise ValueError(f"series is not normalized: max(ys) = {ymax!r} > 1.5")
    if ymax <= 0.0:
        raise FitFailureError(
            "series is identically <= 0; amplitude is degenerate",
            kind,
            (),
        )

    batch_loss = _make_batch_loss(kind, observed)
    Z0 = start_pool(kind, config.starts, config.seed)
    zb, fb, iters, conv = _nm_lockstep(
        batch_loss, Z0, _INITIAL_STEPS[kind], config.simplex_tolerance, config.max_iterations
    )

    best = int(np.argmin(fb))  # exact ties resolve to the lowest start index
    start_losses = tuple(float(v) for v in fb)
    if not math.isfinite(start_losses[best]):
        raise FitFailureError(
            f"all {config.starts} starts diverged to non-finite loss for "
            f"{kind.value}",
            kind,
            start_losses,
        )

    specs = FAMILY_PARAMS[kind]
    theta = tuple(_theta_from_z(spec, float(zb[best, j])) for j, spec in enumerate(specs))
    params = ShapeParams(kind, theta)
    amplitude = _profiled_amplitude(kind, observed, params)
    if not (math.isfinite(amplitude) and amplitude > 0.0):
        raise FitFailureError(
            f"degenerate profiled amplitude {amplitude!r} for {kind.value}",
            kind,
            start_losses,
        )

    return FitResult(
        model=CurveModel(params, amplitude),
        rms=start_losses[best],
        start_losses=start_losses,
        iterations_used=int(iters.sum()),
        converged=bool(conv[best]),
    )
