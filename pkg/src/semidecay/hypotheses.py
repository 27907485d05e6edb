"""Checkers for the four structural hypotheses behind decay transfer.

H1 localizes the spectrum (everything left of a vertical line except k
isolated eigenvalue groups), H2 bounds the resolvent uniformly on that
line, H3 bounds the semigroup growth, and H4 certifies the splitting
T = A + B on the enlarged space. Verdicts are three-valued: eigenvalues
within the boundary margin of a decision line yield ``indeterminate``
rather than a coerced pass or fail.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import SingularityError
from .semigroup import DecayFit, default_time_grid, fit_exponential_decay, semigroup_norms
from .spaces import (DenseOperator, EmbeddedSpacePair, WeightedSpace,
                     operator_norm)
from .spectral import SpectralReport, eigen_decompose, resolvent_matrix, spectral_projector

PASS = "pass"
FAIL = "fail"
INDETERMINATE = "indeterminate"


def _entries(op):
    return op.entries if isinstance(op, DenseOperator) else np.asarray(op)


# ----------------------------------------------------------------------
# H1: localization of the spectrum


@dataclass
class H1Report:
    verdict: str
    witness: str | None
    spectral: SpectralReport

    @property
    def passed(self):
        return self.verdict == PASS

    def to_dict(self):
        return {"verdict": self.verdict, "witness": self.witness,
                "spectral": self.spectral.summary()}


def _cluster(points, radius):
    """Connected components under single linkage at distance ``radius``."""
    points = np.asarray(points)
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(points[i] - points[j]) <= radius:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [np.array(idx) for idx in groups.values()]


def check_h1(op, a: float, r: float, expected_k: int | None = None,
             tol: Tolerances = DEFAULT_TOLERANCES,
             compute_projectors: bool = True) -> H1Report:
    """Verify that the spectrum splits into {Re <= a} plus isolated balls.

    Passes iff every eigenvalue either has real part <= a or lies in one
    of k pairwise disjoint balls B(xi_j, r) strictly inside the half plane
    {Re z > a}. Eigenvalues within the boundary margin of the line give an
    indeterminate verdict.
    """
    matrix = _entries(op)
    spectral = eigen_decompose(matrix, tol)
    spectral.half_plane_abscissa = a
    spectral.isolation_radius = r
    eigvals = spectral.eigenvalues
    scale = max(1.0, float(np.max(np.abs(eigvals))) if len(eigvals) else 1.0)
    margin = tol.boundary_margin * scale

    on_boundary = np.abs(eigvals.real - a) <= margin
    if np.any(on_boundary):
        witness = eigvals[on_boundary][0]
        return H1Report(INDETERMINATE,
                        f"eigenvalue {witness} within {margin:.1e} of the line Re z = {a}",
                        spectral)

    inside = eigvals[eigvals.real > a]
    if len(inside) == 0:
        if expected_k not in (None, 0):
            return H1Report(FAIL, f"expected {expected_k} eigenvalue groups, found 0",
                            spectral)
        return H1Report(PASS, None, spectral)

    clusters = _cluster(inside, r)
    centers = []
    for idx in clusters:
        center = complex(np.mean(inside[idx]))
        radius_used = float(np.max(np.abs(inside[idx] - center)))
        if radius_used > r:
            return H1Report(
                FAIL, f"eigenvalue group around {center} has spread {radius_used:.3e} > r={r}",
                spectral)
        centers.append(center)
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            if abs(centers[i] - centers[j]) <= 2 * r:
                return H1Report(
                    FAIL, f"balls around {centers[i]} and {centers[j]} are not disjoint",
                    spectral)
    for center in centers:
        clearance = center.real - r - a
        if clearance <= 0.0:
            return H1Report(
                FAIL, f"ball around {center} is not strictly inside Re z > {a}",
                spectral)
        if clearance <= margin:
            return H1Report(
                INDETERMINATE,
                f"ball around {center} clears the line Re z = {a} by only {clearance:.1e}",
                spectral)
    if expected_k is not None and len(centers) != expected_k:
        return H1Report(FAIL,
                        f"expected {expected_k} eigenvalue groups, found {len(centers)}",
                        spectral)
    centers.sort(key=lambda z: (-z.real, z.imag))
    spectral.discrete_eigs = centers
    if compute_projectors:
        spectral.projectors = [spectral_projector(matrix, c, r, tol=tol) for c in centers]
    return H1Report(PASS, None, spectral)


# ----------------------------------------------------------------------
# H2: uniform resolvent bound on a vertical line


def make_y_grid(core_scale: float, y_max: float, n_core: int = 33,
                n_outer: int = 12) -> np.ndarray:
    """Symmetric scan grid: quadratic refinement near 0, geometric tail.

    The inner part covers [0, core_scale] with spacing that shrinks
    quadratically toward the origin (where resolvent norms peak for our
    operators); the outer part continues geometrically to ``y_max``.
    """
    u = np.linspace(0.0, 1.0, n_core)
    inner = core_scale * u**2
    if y_max > core_scale:
        outer = np.geomspace(core_scale, y_max, n_outer + 1)[1:]
        half = np.concatenate([inner, outer])
    else:
        half = inner
    return np.unique(np.concatenate([-half[::-1], half]))


@dataclass
class H2Report:
    """Uniform resolvent bound along ``Re z = a``.

    ``bound`` is the grid maximum; ``certified_bound`` additionally covers
    the gaps between grid points (via the resolvent Lipschitz estimate)
    and the tail beyond the scan truncation (via a Neumann-series
    envelope from the shifted operator norm). Segments where the
    Lipschitz certificate could not close are listed in
    ``uncertified_segments``.
    """

    bound: float
    certified_bound: float
    y_grid: np.ndarray
    norms: np.ndarray
    argmax_y: float
    tail_bound: float
    tail_valid_from: float
    shifted_norm: float
    uncertified_segments: list = field(default_factory=list)

    def to_dict(self):
        return {"bound": self.bound, "certified_bound": self.certified_bound,
                "argmax_y": self.argmax_y, "tail_bound": self.tail_bound,
                "tail_valid_from": self.tail_valid_from,
                "shifted_norm": self.shifted_norm,
                "n_grid": int(len(self.y_grid)),
                "n_uncertified_segments": len(self.uncertified_segments)}


def _line_norm(scaled_shifted, y):
    n = scaled_shifted.shape[0]
    sv = np.linalg.svd(scaled_shifted - 1j * y * np.eye(n), compute_uv=False)
    return 1.0 / sv[-1]


def check_h2(op, a: float, space: WeightedSpace | None = None,
             y_grid=None, tol: Tolerances = DEFAULT_TOLERANCES,
             max_refine_depth: int = 12) -> H2Report:
    """Scan ``||(T - a - iy)^{-1}||`` over a symmetric y grid.

    The weighted norm is obtained by scanning the diagonally congruent
    matrix in the plain spectral norm. Between grid points the bound is
    closed with ``||R(y + d)|| <= v / (1 - d v)`` and adaptive bisection;
    beyond the truncation the Neumann tail ``1 / (|y| - ||T - aI||)``
    takes over.

    Raises
    ------
    SingularityError
        If an eigenvalue lies on the scan line (within the boundary margin).
    """
    matrix = np.asarray(_entries(op), dtype=complex)
    n = matrix.shape[0]
    if space is None:
        space = op.domain if isinstance(op, DenseOperator) else WeightedSpace.unweighted(n)
    eigvals = np.linalg.eigvals(matrix)
    scale = max(1.0, float(np.max(np.abs(eigvals))) if len(eigvals) else 1.0)
    gap_to_line = float(np.min(np.abs(eigvals.real - a))) if len(eigvals) else np.inf
    if gap_to_line <= tol.boundary_margin * scale:
        witness = eigvals[np.argmin(np.abs(eigvals.real - a))]
        raise SingularityError(
            f"eigenvalue {witness} lies on the scan line Re z = {a}",
            distance=gap_to_line, witness=witness)

    scaling = space.scaling()
    scaled = (scaling[:, None] * matrix) / scaling[None, :] - a * np.eye(n)
    shifted_norm = float(np.linalg.norm(scaled, 2))
    if y_grid is None:
        core = 10.0 * max(abs(a), 1.0, float(np.max(np.abs(eigvals.imag))) if len(eigvals) else 0.0)
        y_max = max(2.0 * shifted_norm + 1.0, core)
        y_grid = make_y_grid(core, y_max)
        # norm peaks of near-normal operators sit at the eigenvalue heights
        peaks = eigvals.imag
        y_grid = np.unique(np.concatenate([y_grid, peaks, -peaks]))
    y_grid = np.asarray(y_grid, dtype=float)
    norms = np.array([_line_norm(scaled, y) for y in y_grid])
    i_max = int(np.argmax(norms))
    bound = float(norms[i_max])

    # close the gaps between grid points: ||R|| is 1-Lipschitz in log via
    # ||R(y+d)|| <= v/(1-dv); bisect until each segment certifies
    certified = bound
    uncertified = []
    stack = [(y_grid[i], y_grid[i + 1], norms[i], norms[i + 1], 0)
             for i in range(len(y_grid) - 1)]
    while stack:
        y0, y1, v0, v1, depth = stack.pop()
        half = 0.5 * (y1 - y0)
        v = max(v0, v1)
        if half * v < 0.5:
            certified = max(certified, v / (1.0 - half * v))
            continue
        if depth >= max_refine_depth:
            uncertified.append((y0, y1))
            continue
        ym = 0.5 * (y0 + y1)
        vm = _line_norm(scaled, ym)
        certified = max(certified, vm)
        stack.append((y0, ym, v0, vm, depth + 1))
        stack.append((ym, y1, vm, v1, depth + 1))

    y_max_used = float(np.max(np.abs(y_grid)))
    if y_max_used > shifted_norm:
        tail = 1.0 / (y_max_used - shifted_norm)
    else:
        tail = np.inf
        uncertified.append((y_max_used, np.inf))
    certified = max(certified, tail)
    return H2Report(bound=bound, certified_bound=float(certified),
                    y_grid=y_grid, norms=norms, argmax_y=float(y_grid[i_max]),
                    tail_bound=float(tail), tail_valid_from=y_max_used,
                    shifted_norm=shifted_norm, uncertified_segments=uncertified)


# ----------------------------------------------------------------------
# H3: coarse growth bound on the semigroup


@dataclass
class H3Report:
    fit: DecayFit
    t_grid: np.ndarray
    norms: np.ndarray

    @property
    def growth_constant(self):
        return self.fit.prefactor

    @property
    def growth_rate(self):
        return self.fit.rate

    def to_dict(self):
        return {"C_b": self.fit.prefactor, "b": self.fit.rate,
                "residual": self.fit.residual, "window": list(self.fit.window)}


def check_h3(op, space: WeightedSpace | None = None, t_grid=None,
             tol: Tolerances = DEFAULT_TOLERANCES) -> H3Report:
    """Certified envelope ``||e^{tT}|| <= C_b e^{b t}`` on a sampled horizon."""
    matrix = _entries(op)
    if space is None:
        space = op.domain if isinstance(op, DenseOperator) else WeightedSpace.unweighted(matrix.shape[0])
    if t_grid is None:
        eigvals = np.linalg.eigvals(np.asarray(matrix))
        spread = float(np.max(eigvals.real) - np.min(eigvals.real)) if len(eigvals) else 1.0
        t_grid = default_time_grid(rate_scale=max(spread, 1e-2), n=64)
    t_grid = np.asarray(t_grid, dtype=float)
    norms = semigroup_norms(matrix, t_grid, space)
    fit = fit_exponential_decay(t_grid, norms, tol=tol)
    return H3Report(fit=fit, t_grid=t_grid, norms=norms)


# ----------------------------------------------------------------------
# H4: decomposition bounds on the sampled admissible region


def sample_xi_region(a: float, r: float, xi_list, gap_scale: float | None = None,
                     eps_line: float = 1e-6, circle_factor: float = 1.05,
                     n_line: int = 21, n_circle: int = 16,
                     grid_shape=(16, 16)) -> np.ndarray:
    """Sample the region {Re z > a} minus the excluded balls.

    Three families: the vertical line ``Re = a + eps_line``, circles of
    radius ``circle_factor * r`` around each excluded center, and a
    rectangular sweep extending ``10 * gap_scale`` to the right of the
    line. Points inside any excluded ball (or left of the line) are
    dropped.
    """
    xi_list = [complex(x) for x in xi_list]
    if gap_scale is None:
        gap_scale = max(abs(a), *(abs(x - a) for x in xi_list), 1.0)
    im_extent = max(abs(a), max((abs(x.imag) for x in xi_list), default=0.0) + 2 * r, 1.0)
    samples = []
    line_im = np.linspace(-2.0 * im_extent, 2.0 * im_extent, n_line)
    samples.append((a + eps_line) + 1j * line_im)
    for center in xi_list:
        theta = 2.0 * np.pi * np.arange(n_circle) / n_circle
        samples.append(center + circle_factor * r * np.exp(1j * theta))
    re = np.linspace(a + eps_line, a + 10.0 * gap_scale, grid_shape[0])
    im = np.linspace(-2.0 * im_extent, 2.0 * im_extent, grid_shape[1])
    re_mesh, im_mesh = np.meshgrid(re, im, indexing="ij")
    samples.append((re_mesh + 1j * im_mesh).ravel())
    points = np.concatenate(samples)
    keep = points.real > a
    for center in xi_list:
        keep &= np.abs(points - center) > r * (1.0 + 1e-12)
    return points[keep]


@dataclass
class H4Report:
    """Per-sample decomposition bounds and their suprema.

    ``table`` has one row per sampled xi:
    (xi, ||B(xi)^{-1}||_amb, ||A B(xi)^{-1}||_amb->small, ||B(xi)^{-1} A||_amb->small).
    """

    verdict: str
    witness: str | None
    sup_b_inverse: float
    sup_a_b_inverse: float
    sup_b_inverse_a: float
    samples: np.ndarray
    table: np.ndarray
    ceiling: float

    @property
    def passed(self):
        return self.verdict == PASS

    def to_dict(self):
        return {"verdict": self.verdict, "witness": self.witness,
                "sup_b_inverse": self.sup_b_inverse,
                "sup_a_b_inverse": self.sup_a_b_inverse,
                "sup_b_inverse_a": self.sup_b_inverse_a,
                "n_samples": int(len(self.samples)), "ceiling": self.ceiling}


def check_h4(split, pair: EmbeddedSpacePair, a: float, r: float, xi_list,
             samples=None, tol: Tolerances = DEFAULT_TOLERANCES) -> H4Report:
    """Certify invertibility and mixed bounds of the splitting off the balls.

    For each sampled xi computes ``||B(xi)^{-1}||`` on the ambient space
    and the two mixed norms of ``A B(xi)^{-1}`` and ``B(xi)^{-1} A`` as
    maps from the ambient into the small space. Passes iff all three stay
    finite and below the configured ceiling over the whole sample.
    """
    part_a = np.asarray(split.part_a)
    part_b = np.asarray(split.part_b)
    n = part_b.shape[0]
    if samples is None:
        samples = sample_xi_region(a, r, xi_list)
    samples = np.asarray(samples, dtype=complex)
    amb, small = pair.ambient, pair.small
    rows = np.empty((len(samples), 4), dtype=complex)
    sup_b = sup_ab = sup_ba = 0.0
    for i, xi in enumerate(samples):
        try:
            b_inv = resolvent_matrix(part_b, xi, tol)
        except SingularityError as exc:
            return H4Report(FAIL, f"B - xi numerically singular at xi={xi} "
                                  f"(distance {exc.distance:.3e})",
                            np.inf, np.inf, np.inf, samples,
                            rows[:i], tol.h4_ceiling)
        nb = operator_norm(b_inv, amb, amb)
        nab = operator_norm(part_a @ b_inv, amb, small)
        nba = operator_norm(b_inv @ part_a, amb, small)
        rows[i] = (xi, nb, nab, nba)
        sup_b, sup_ab, sup_ba = max(sup_b, nb), max(sup_ab, nab), max(sup_ba, nba)
    worst = max(sup_b, sup_ab, sup_ba)
    if not np.isfinite(worst) or worst > tol.h4_ceiling:
        i_bad = int(np.argmax(np.max(rows[:, 1:].real, axis=1)))
        return H4Report(FAIL,
                        f"bound {worst:.3e} exceeds ceiling {tol.h4_ceiling:.1e} "
                        f"at xi={rows[i_bad, 0]}",
                        sup_b, sup_ab, sup_ba, samples, rows, tol.h4_ceiling)
    return H4Report(PASS, None, sup_b, sup_ab, sup_ba, samples, rows, tol.h4_ceiling)


# ----------------------------------------------------------------------


@dataclass
class HypothesisReport:
    """Aggregate of the four checks, JSON-serializable with a stable schema."""

    h1: H1Report | None = None
    h2: H2Report | None = None
    h3: H3Report | None = None
    h4: H4Report | None = None
    schema_version: int = 1

    @property
    def all_passed(self):
        parts = []
        if self.h1 is not None:
            parts.append(self.h1.verdict == PASS)
        if self.h2 is not None:
            parts.append(np.isfinite(self.h2.bound))
        if self.h3 is not None:
            parts.append(np.isfinite(self.h3.fit.prefactor))
        if self.h4 is not None:
            parts.append(self.h4.verdict == PASS)
        return bool(parts) and all(parts)

    def to_dict(self):
        return {
            "schema_version": self.schema_version,
            "h1": None if self.h1 is None else self.h1.to_dict(),
            "h2": None if self.h2 is None else self.h2.to_dict(),
            "h3": None if self.h3 is None else self.h3.to_dict(),
            "h4": None if self.h4 is None else self.h4.to_dict(),
        }
