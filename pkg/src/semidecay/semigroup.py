"""Matrix semigroups, linear time stepping, and exponential-envelope fitting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (InsufficientSignalError, MagnitudeGuardError,
                     StepRejectionError)
from .spaces import DenseOperator, WeightedSpace, operator_norm

EXPM_DENSE_LIMIT = 600


def _entries(op) -> np.ndarray:
    return op.entries if isinstance(op, DenseOperator) else np.asarray(op)


def matrix_exponential(matrix) -> np.ndarray:
    """Scaling-and-squaring matrix exponential with an overflow guard."""
    with np.errstate(over="ignore", invalid="ignore"):
        result = sla.expm(np.asarray(_entries(matrix)))
    if not np.all(np.isfinite(result.real)):
        raise MagnitudeGuardError("matrix exponential overflowed; shorten the horizon")
    return result


def semigroup_apply(op, f0, t_grid) -> np.ndarray:
    """Trajectory ``e^{tT} f0`` at each requested time.

    Times must be nonnegative and increasing. Uniformly spaced grids reuse
    one propagator per step; general grids exponentiate per time.
    """
    matrix = np.asarray(_entries(op))
    t_grid = np.asarray(t_grid, dtype=float)
    f0 = np.asarray(f0)
    if t_grid.ndim != 1 or len(t_grid) == 0:
        raise ValueError("t_grid must be a nonempty one-dimensional array")
    if np.any(t_grid < 0.0) or np.any(np.diff(t_grid) <= 0.0):
        raise ValueError("t_grid must be nonnegative and strictly increasing")
    out = np.empty((len(t_grid), len(f0)), dtype=np.result_type(matrix.dtype, f0.dtype))
    steps = np.diff(np.concatenate([[0.0], t_grid]))
    uniform = np.allclose(steps, steps[0], rtol=1e-12, atol=0.0)
    if uniform:
        prop = matrix_exponential(matrix * steps[0])
        f = f0
        for i in range(len(t_grid)):
            f = prop @ f
            out[i] = f
    else:
        for i, t in enumerate(t_grid):
            out[i] = matrix_exponential(matrix * t) @ f0
    if not np.all(np.isfinite(out.real)):
        raise MagnitudeGuardError("semigroup trajectory overflowed")
    return out


def semigroup_norms(op, t_grid, space: WeightedSpace | None = None,
                    deflation=None) -> np.ndarray:
    """``||e^{tT} - sum_j e^{xi_j t} P_j||`` in the induced norm of ``space``.

    ``deflation`` is an optional list of ``(xi_j, P_j)`` pairs subtracted
    from the propagator before taking the norm; with no deflation this is
    the plain semigroup norm.
    """
    matrix = np.asarray(_entries(op))
    n = matrix.shape[0]
    if space is None:
        space = op.domain if isinstance(op, DenseOperator) else WeightedSpace.unweighted(n)
    t_grid = np.asarray(t_grid, dtype=float)
    out = np.empty(len(t_grid))
    for i, t in enumerate(t_grid):
        prop = matrix_exponential(matrix * t)
        if deflation:
            prop = prop.astype(complex)
            for xi, proj in deflation:
                prop -= np.exp(xi * t) * proj
        out[i] = operator_norm(prop, space, space)
    return out


def default_time_grid(rate_scale: float = 1.0, n: int = 200,
                      horizon_factor: float = 5.0) -> np.ndarray:
    """Uniform grid on [0, horizon_factor / |rate_scale|]."""
    t_max = horizon_factor / max(abs(rate_scale), 1e-12)
    return np.linspace(0.0, t_max, n)


@dataclass(frozen=True)
class DecayFit:
    """Certified exponential envelope ``values(t) <= prefactor * e^{rate t}``.

    The prefactor is inflated after the regression so the bound holds at
    every sample above the signal floor; prefactor >= 1 is expected and
    prefactor > 1 is meaningful (transient growth). ``residual`` is the
    largest absolute deviation of the log-values from the fitted line over
    the fit window.
    """

    prefactor: float
    rate: float
    window: tuple
    residual: float

    def envelope(self, times) -> np.ndarray:
        return self.prefactor * np.exp(self.rate * np.asarray(times))


def fit_exponential_decay(times, norms, tail_fraction: float = 0.5,
                          tol: Tolerances = DEFAULT_TOLERANCES) -> DecayFit:
    """Least-squares exponential fit with a certified envelope.

    The rate comes from a line through ``(t, log norm)`` on the designated
    tail window (last ``tail_fraction`` of the samples above the floor by
    default). The prefactor is then inflated minimally so the envelope
    holds at every sample above the floor, making the returned pair a
    certified envelope rather than a regression.

    Raises
    ------
    InsufficientSignalError
        If fewer than two samples sit above the signal floor
        ``floor_factor * eps * norms[0]``.
    """
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if len(times) != len(norms):
        raise ValueError("times and norms must have equal length")
    if len(norms) < 4:
        raise ValueError("need at least 4 samples to fit a decay envelope")
    if np.any(norms < 0.0):
        raise ValueError("norms must be nonnegative")
    if not 0.0 < tail_fraction <= 1.0:
        raise ValueError("tail_fraction must lie in (0, 1]")
    floor = tol.floor_factor * np.finfo(float).eps * norms[0]
    keep = norms > floor
    if keep.sum() < 2:
        raise InsufficientSignalError(
            f"only {int(keep.sum())} samples above the floor {floor:.3e}")
    t_kept = times[keep]
    n_kept = norms[keep]
    start = int(np.floor(len(t_kept) * (1.0 - tail_fraction)))
    start = min(start, len(t_kept) - 2)
    t_fit = t_kept[start:]
    log_fit = np.log(n_kept[start:])
    design = np.vstack([t_fit, np.ones(len(t_fit))]).T
    (rate, intercept), *_ = np.linalg.lstsq(design, log_fit, rcond=None)
    residual = float(np.max(np.abs(log_fit - (rate * t_fit + intercept))))
    prefactor = float(np.max(n_kept * np.exp(-rate * t_kept)))
    return DecayFit(prefactor=prefactor, rate=float(rate),
                    window=(float(t_fit[0]), float(t_fit[-1])),
                    residual=residual)


def envelope_prefactor(times, values, rate: float,
                       curvature_safety: float = 2.0) -> float:
    """Smallest certified C with ``values <= C e^{rate t}`` between samples too.

    The sampled maximum of ``values * e^{-rate t}`` is inflated by an
    estimate of how far the smooth curve can poke above its samples:
    for a C^2 function the inter-sample excess is at most
    ``max|y''| dt^2 / 8``, with ``y''`` estimated by second differences and
    widened by ``curvature_safety``.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    y = values * np.exp(-rate * times)
    c0 = float(np.max(y))
    if len(times) < 3 or c0 == 0.0:
        return c0
    dt = np.diff(times)
    second = np.abs(np.diff(y, 2)) / (dt[:-1] * dt[1:])
    excess = curvature_safety * float(np.max(second)) * float(np.max(dt)) ** 2 / 8.0
    return c0 + excess


def envelope_holds(times, values, prefactor, rate, slack=1e-12) -> bool:
    values = np.asarray(values, dtype=float)
    bound = prefactor * np.exp(rate * np.asarray(times, dtype=float))
    return bool(np.all(values <= bound * (1.0 + slack)))


def step_trajectory(matrix, f0, t_grid, scheme: str = "implicit-euler",
                    tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """March ``df/dt = T f`` on a uniform grid with an A-stable one-step scheme.

    Accepts dense or sparse ``matrix``. ``implicit-euler`` and
    ``crank-nicolson`` factorize once and reuse the factorization;
    ``reference-exponential`` applies the matrix exponential propagator
    and is limited to moderate dense sizes.

    The implicit solves are residual-checked each step; a violation raises
    :class:`StepRejectionError` rather than silently drifting.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if len(t_grid) < 2 or t_grid[0] != 0.0:
        raise ValueError("t_grid must start at 0 and contain at least two points")
    steps = np.diff(t_grid)
    dt = steps[0]
    if not np.allclose(steps, dt, rtol=1e-12, atol=0.0):
        raise ValueError("step_trajectory requires a uniform time grid")
    f0 = np.asarray(f0, dtype=float)
    n = len(f0)
    sparse = sp.issparse(matrix)
    out = np.empty((len(t_grid), n))
    out[0] = f0

    if scheme == "reference-exponential":
        if n > EXPM_DENSE_LIMIT:
            raise MagnitudeGuardError(
                f"reference-exponential is limited to N <= {EXPM_DENSE_LIMIT}, got {n}")
        dense = matrix.toarray() if sparse else np.asarray(matrix)
        prop = matrix_exponential(dense * dt)
        f = f0
        for i in range(1, len(t_grid)):
            f = prop @ f
            out[i] = f
        return out

    if scheme not in ("implicit-euler", "crank-nicolson"):
        raise ValueError(f"unknown scheme '{scheme}'")
    theta = 1.0 if scheme == "implicit-euler" else 0.5
    if sparse:
        eye = sp.identity(n, format="csr")
        lhs = (eye - dt * theta * matrix).tocsc()
        solver = spla.splu(lhs)
        solve = solver.solve
        lhs_mat = lhs
        rhs_mat = None if theta == 1.0 else (eye + dt * (1.0 - theta) * matrix).tocsr()
    else:
        dense = np.asarray(matrix)
        eye = np.eye(n)
        lhs_mat = eye - dt * theta * dense
        lu = sla.lu_factor(lhs_mat)
        solve = lambda b: sla.lu_solve(lu, b)
        rhs_mat = None if theta == 1.0 else eye + dt * (1.0 - theta) * dense

    f = f0
    for i in range(1, len(t_grid)):
        rhs = f if rhs_mat is None else rhs_mat @ f
        f_new = solve(rhs)
        residual = np.linalg.norm(lhs_mat @ f_new - rhs)
        if residual > 1e-8 * max(np.linalg.norm(rhs), 1e-300):
            raise StepRejectionError(
                f"implicit solve residual {residual:.3e} at step {i}")
        f = f_new
        out[i] = f
    return out
