"""Structure-preserving discretization of the drift-diffusion generator.

The generator ``div(grad f + E f)`` with ``E = grad U + F`` splits into a
part that is symmetric in the strongly weighted space (divergence-form
flux differences with geometric-mean face values, zero-flux boundaries)
and a conservative centered discretization of ``div(F f)`` that is
anti-symmetric in the enlarged space up to O(h^2).

The symmetric stencil is built so that the equilibrium node vector is a
null vector up to rounding (the flux differences of ``f = mu`` telescope
to zero) and mass is conserved exactly (columns sum to zero). Both
properties hold in any dimension because assembly works face by face.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .config import DEFAULT_TOLERANCES, FPProblem, Tolerances
from .errors import (AssemblyError, DomainTooSmallError,
                     InfeasibleParameterError, InsufficientSignalError)
from .hypotheses import H2Report, check_h2
from .semigroup import (DecayFit, envelope_prefactor, fit_exponential_decay,
                        step_trajectory)
from .spaces import WeightedSpace

_DENSE_LIMIT = 4200
_DENSE_EIG_LIMIT = 1100
TRUNCATION_GUARD = 1e-12


# ----------------------------------------------------------------------
# continuous ingredients


@dataclass(frozen=True)
class Potential:
    """Radial confining potential ``U(x) = (1 + |x|^2)^(s/2)`` with s >= 1."""

    s: float

    def __post_init__(self):
        if not self.s >= 1.0:
            raise ValueError(f"potential exponent must satisfy s >= 1, got {self.s}")

    def value(self, *coords):
        r2 = sum(np.asarray(c) ** 2 for c in coords)
        return (1.0 + r2) ** (self.s / 2.0)

    def gradient(self, *coords):
        r2 = sum(np.asarray(c) ** 2 for c in coords)
        factor = self.s * (1.0 + r2) ** (self.s / 2.0 - 1.0)
        return tuple(factor * np.asarray(c) for c in coords)


@dataclass(frozen=True)
class UniformPotential:
    """Constant surrogate potential; the symmetric part degenerates to the
    zero-flux Laplacian. Used for closed-form eigenvalue oracles. Exempt
    from the truncation guard (there is no tail to resolve)."""

    level: float = 1.0
    requires_truncation_guard = False

    def value(self, *coords):
        return np.full_like(np.asarray(coords[0], dtype=float), self.level)

    def gradient(self, *coords):
        return tuple(np.zeros_like(np.asarray(c, dtype=float)) for c in coords)


@dataclass(frozen=True)
class EnlargedWeight:
    """Composition weight ``m^{-1}(x) = theta(U(x))`` defining the large space.

    ``polynomial`` uses ``theta(u) = (1 + u^2)^(k/2)`` and requires k > d;
    ``stretched-exponential`` uses ``theta(u) = exp((1 + u^2)^(k/2))`` and
    requires k in (0, 1). Both are increasing, so the embedding constant
    of the pair (large space, strongly weighted space) is computable on
    any truncated grid.
    """

    kind: str = "polynomial"
    k: float = 3.0

    def __post_init__(self):
        if self.kind not in ("polynomial", "stretched-exponential"):
            raise ValueError(f"unknown weight kind '{self.kind}'")
        if self.kind == "stretched-exponential" and not 0.0 < self.k < 1.0:
            raise ValueError(
                f"stretched-exponential weight requires k in (0,1), got {self.k}")
        if self.k <= 0.0:
            raise ValueError("weight order must be positive")

    def validate_for_dimension(self, d: int):
        if self.kind == "polynomial" and not self.k > d:
            raise ValueError(f"polynomial weight requires k > d, got k={self.k}, d={d}")

    def theta(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "polynomial":
            return (1.0 + u**2) ** (self.k / 2.0)
        return np.exp((1.0 + u**2) ** (self.k / 2.0))

    def inverse_weight(self, potential, *coords):
        return self.theta(potential.value(*coords))


@dataclass(frozen=True)
class SwirlField:
    """Rotational force ``F = phi(U) * rot90(grad U)`` in dimension 2.

    The construction gives ``div F = 0`` and ``grad U . F = 0`` pointwise
    and ``|F| <= sup|phi| (1 + |grad U|)``; in dimension 1 the admissible
    field is identically zero.
    """

    profile: str = "inverse_linear"
    amplitude: float = 1.0

    def __post_init__(self):
        if self.profile not in ("inverse_linear", "constant"):
            raise ValueError(f"unknown swirl profile '{self.profile}'")
        if not np.isfinite(self.amplitude):
            raise ValueError("swirl amplitude must be finite (bounded profile)")

    def phi(self, u):
        u = np.asarray(u, dtype=float)
        if self.profile == "inverse_linear":
            return self.amplitude / (1.0 + u)
        return np.full_like(u, self.amplitude)

    def field(self, potential, x, y):
        u = potential.value(x, y)
        gx, gy = potential.gradient(x, y)
        amp = self.phi(u)
        return amp * (-gy), amp * gx


# ----------------------------------------------------------------------
# grid and assembly


@dataclass(frozen=True)
class FPGrid:
    """Cell-centered uniform grid on [-L, L]^d."""

    d: int
    L: float
    N: int

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        if self.N < 4:
            raise ValueError("need at least 4 cells per axis")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def n_total(self) -> int:
        return self.N ** self.d

    def axis(self) -> np.ndarray:
        return -self.L + (np.arange(self.N) + 0.5) * self.h

    def meshes(self):
        ax = self.axis()
        if self.d == 1:
            return (ax,)
        return np.meshgrid(ax, ax, indexing="ij")

    def flat_coordinate(self) -> np.ndarray:
        """Radial coordinate per flattened node (used for cutoff supports)."""
        meshes = self.meshes()
        r2 = sum(m**2 for m in meshes)
        return np.sqrt(r2).ravel()


def check_truncation(grid: FPGrid, potential, guard: float = TRUNCATION_GUARD):
    """Require the equilibrium to have decayed at the boundary."""
    if not getattr(potential, "requires_truncation_guard", True):
        return
    boundary = [np.array(grid.L)] + [np.array(0.0)] * (grid.d - 1)
    origin = [np.array(0.0)] * grid.d
    u_boundary = float(np.asarray(potential.value(*boundary)))
    u_center = float(np.asarray(potential.value(*origin)))
    ratio = np.exp(u_center - u_boundary)
    if ratio > guard:
        raise DomainTooSmallError(
            f"equilibrium boundary/center ratio {ratio:.2e} exceeds the "
            f"truncation guard {guard:.1e}; enlarge L")


def _equilibrium_nodes(grid: FPGrid, potential) -> np.ndarray:
    """Equilibrium node values, exponentiated once around the potential
    midrange so neighbor products stay representable. All consumers must
    use this one vector (up to scalar normalization): its ratios are what
    the assembled stencil telescopes against exactly."""
    meshes = grid.meshes()
    u_vals = np.asarray(potential.value(*meshes), dtype=float)
    span = float(u_vals.max() - u_vals.min())
    if span > 600.0:
        raise DomainTooSmallError(
            f"potential range {span:.0f} exceeds the representable window; "
            f"shrink L or s")
    return np.exp(-(u_vals - 0.5 * (u_vals.max() + u_vals.min())))


def assemble_symmetric_part(grid: FPGrid, potential) -> sp.csr_matrix:
    """Divergence-form stencil for ``div(grad f + grad U f)``.

    Face fluxes use the geometric mean of the neighboring equilibrium
    values; with ``g = f / mu`` the flux at a face is
    ``mu_face (g_right - g_left) / h`` and boundary fluxes are zero. The
    equilibrium kills every face difference, and summation by parts gives
    exact symmetry in the ``mu^{-1}`` inner product.
    """
    mu = _equilibrium_nodes(grid, potential)
    h = grid.h
    n = grid.n_total
    shape = mu.shape if grid.d == 2 else (grid.N,)
    idx = np.arange(n).reshape(shape)
    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(np.asarray(r).ravel())
        cols.append(np.asarray(c).ravel())
        vals.append(np.asarray(v).ravel())

    for axis in range(grid.d):
        sl_lo = [slice(None)] * grid.d
        sl_hi = [slice(None)] * grid.d
        sl_lo[axis] = slice(None, -1)
        sl_hi[axis] = slice(1, None)
        mu_lo = mu[tuple(sl_lo)]
        mu_hi = mu[tuple(sl_hi)]
        mu_face = np.sqrt(mu_lo * mu_hi)
        i_lo = idx[tuple(sl_lo)]
        i_hi = idx[tuple(sl_hi)]
        c_lo = mu_face / mu_lo / h**2     # coefficient of the left cell in the face flux
        c_hi = mu_face / mu_hi / h**2
        # flux at the face enters the left cell with +, the right cell with -
        add(i_lo, i_hi, c_hi)
        add(i_lo, i_lo, -c_lo)
        add(i_hi, i_lo, c_lo)
        add(i_hi, i_hi, -c_hi)
    matrix = sp.coo_matrix((np.concatenate(vals),
                            (np.concatenate(rows), np.concatenate(cols))),
                           shape=(n, n)).tocsr()
    matrix.sum_duplicates()
    return matrix


def assemble_skew_part(grid: FPGrid, potential, swirl: SwirlField | None
                       ) -> sp.csr_matrix:
    """Centered conservative flux discretization of ``div(F f)``.

    Returns the zero operator in dimension 1 (the admissible field
    vanishes there) or when no swirl is supplied. Columns sum to zero by
    telescoping, so mass is conserved exactly; anti-symmetry in the
    enlarged inner product holds at rate O(h^2) under refinement.
    """
    n = grid.n_total
    if grid.d == 1 or swirl is None:
        return sp.csr_matrix((n, n))
    ax = grid.axis()
    h = grid.h
    idx = np.arange(n).reshape(grid.N, grid.N)
    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(np.asarray(r).ravel())
        cols.append(np.asarray(c).ravel())
        vals.append(np.asarray(v).ravel())

    face = ax[:-1] + 0.5 * h
    # x-directed faces between (i, j) and (i+1, j)
    xf, yf = np.meshgrid(face, ax, indexing="ij")
    f_x = swirl.field(potential, xf, yf)[0]
    i_lo, i_hi = idx[:-1, :], idx[1:, :]
    add(i_lo, i_lo, f_x / (2 * h))
    add(i_lo, i_hi, f_x / (2 * h))
    add(i_hi, i_lo, -f_x / (2 * h))
    add(i_hi, i_hi, -f_x / (2 * h))
    # y-directed faces between (i, j) and (i, j+1)
    xg, yg = np.meshgrid(ax, face, indexing="ij")
    f_y = swirl.field(potential, xg, yg)[1]
    j_lo, j_hi = idx[:, :-1], idx[:, 1:]
    add(j_lo, j_lo, f_y / (2 * h))
    add(j_lo, j_hi, f_y / (2 * h))
    add(j_hi, j_lo, -f_y / (2 * h))
    add(j_hi, j_hi, -f_y / (2 * h))
    matrix = sp.coo_matrix((np.concatenate(vals),
                            (np.concatenate(rows), np.concatenate(cols))),
                           shape=(n, n)).tocsr()
    matrix.sum_duplicates()
    return matrix


@dataclass
class FPDiscretization:
    """Assembled generator with its two weighted spaces.

    The generator is kept sparse; ``dense_generator`` materializes it for
    the dense linear-algebra paths (guarded by size). All boundary fluxes
    are zeroed (zero-flux on every face of the box).
    """

    grid: FPGrid
    potential: object
    weight: EnlargedWeight
    swirl: SwirlField | None
    sym: sp.csr_matrix
    skew: sp.csr_matrix
    mu: np.ndarray                 # equilibrium node values, unit discrete mass
    space_small: WeightedSpace     # weights mu^{-1}
    space_ambient: WeightedSpace   # weights theta(U)
    zero_flux_axes: tuple = ()

    @classmethod
    def build(cls, grid: FPGrid, potential, weight: EnlargedWeight,
              swirl: SwirlField | None = None,
              guard: float = TRUNCATION_GUARD) -> "FPDiscretization":
        check_truncation(grid, potential, guard)
        weight.validate_for_dimension(grid.d)
        meshes = grid.meshes()
        u_vals = np.asarray(potential.value(*meshes), dtype=float).ravel()
        mu = _equilibrium_nodes(grid, potential).ravel()
        mu = mu / (mu.sum() * grid.h ** grid.d)
        sym = assemble_symmetric_part(grid, potential)
        skew = assemble_skew_part(grid, potential, swirl)
        coord = grid.flat_coordinate()
        w_small = 1.0 / mu
        w_ambient = weight.theta(u_vals)
        space_small = WeightedSpace(coord, w_small, grid.h ** grid.d, name="small")
        space_ambient = WeightedSpace(coord, w_ambient, grid.h ** grid.d, name="ambient")
        return cls(grid=grid, potential=potential, weight=weight, swirl=swirl,
                   sym=sym, skew=skew, mu=mu, space_small=space_small,
                   space_ambient=space_ambient,
                   zero_flux_axes=tuple(range(grid.d)))

    @property
    def generator(self) -> sp.csr_matrix:
        return (self.sym + self.skew).tocsr()

    def dense_generator(self) -> np.ndarray:
        if self.grid.n_total > _DENSE_LIMIT:
            raise ValueError(
                f"dense generator of size {self.grid.n_total} exceeds the "
                f"limit {_DENSE_LIMIT}; use the sparse paths")
        return self.generator.toarray()

    def embedding_constant(self) -> float:
        return float(np.sqrt(np.max(self.space_ambient.weights / self.space_small.weights)))


# ----------------------------------------------------------------------
# spectral gap


@dataclass
class GapReport:
    """Leading spectrum of the symmetrized generator in the small space."""

    lambda_gap: float
    leading: float
    gap_eigenvector_alignment: float
    n: int

    def to_dict(self):
        return {"lambda_gap": self.lambda_gap, "leading": self.leading,
                "gap_eigenvector_alignment": self.gap_eigenvector_alignment,
                "n": self.n}


def _symmetrize_small(matrix: sp.spmatrix, mu: np.ndarray) -> sp.csr_matrix:
    """Similarity ``S_ij = T_ij sqrt(mu_j / mu_i)`` (neighbors only, so the
    exponential weight ratios stay moderate)."""
    coo = matrix.tocoo()
    log_mu = np.log(mu)
    data = coo.data * np.exp(0.5 * (log_mu[coo.col] - log_mu[coo.row]))
    return sp.coo_matrix((data, (coo.row, coo.col)), shape=matrix.shape).tocsr()


def _top_symmetric_eigs(s_mat: sp.csr_matrix, k: int, want_vectors=False):
    """Largest k eigenvalues (descending) of a symmetric-to-rounding sparse
    matrix, with vectors on request. Deterministic: tridiagonal and dense
    paths are direct, the sparse path uses shift-invert Lanczos with a
    fixed start vector and a shift above the spectrum."""
    n = s_mat.shape[0]
    coo = s_mat.tocoo()
    if n > 1 and np.max(np.abs(coo.row - coo.col)) <= 1:
        diag = s_mat.diagonal()
        off = 0.5 * (s_mat.diagonal(-1) + s_mat.diagonal(1))
        if want_vectors:
            vals, vecs = sla.eigh_tridiagonal(diag, off, select="i",
                                              select_range=(n - k, n - 1))
            return vals[::-1], vecs[:, ::-1]
        vals = sla.eigh_tridiagonal(diag, off, select="i",
                                    select_range=(n - k, n - 1),
                                    eigvals_only=True)
        return vals[::-1], None
    if n <= _DENSE_EIG_LIMIT:
        dense = s_mat.toarray()
        dense = 0.5 * (dense + dense.T)
        if want_vectors:
            vals, vecs = sla.eigh(dense, subset_by_index=[n - k, n - 1])
            return vals[::-1], vecs[:, ::-1]
        vals = sla.eigh(dense, subset_by_index=[n - k, n - 1], eigvals_only=True)
        return vals[::-1], None
    sym = (0.5 * (s_mat + s_mat.T)).tocsc()
    v0 = np.ones(n) / np.sqrt(n)
    abs_row_sums = np.asarray(abs(sym).sum(axis=1)).ravel()
    gershgorin_top = float(np.max(sym.diagonal() + (abs_row_sums - np.abs(sym.diagonal()))))
    sigma = max(gershgorin_top, 0.0) + 1.0
    vals, vecs = spla.eigsh(sym, k=k, sigma=sigma, which="LM", v0=v0)
    order = np.argsort(vals)[::-1]
    return vals[order], (vecs[:, order] if want_vectors else None)


def spectral_gap_H(disc: FPDiscretization, tol: Tolerances = DEFAULT_TOLERANCES
                   ) -> GapReport:
    """Discrete spectral gap of the symmetric part in the small space.

    Symmetrizes by the equilibrium similarity, confirms that the leading
    eigenvalue is zero with eigenvector along sqrt(mu), and returns the
    second eigenvalue (the discrete analogue of the sharp constant in the
    weighted gradient inequality).

    Raises
    ------
    AssemblyError
        If the leading eigenvalue is not zero to tolerance, which means
        the stencil lost its built-in equilibrium.
    """
    s_mat = _symmetrize_small(disc.sym, disc.mu)
    scale = float(abs(s_mat).max())
    vals, vecs = _top_symmetric_eigs(s_mat, 2, want_vectors=True)
    leading = float(vals[0])
    if abs(leading) > tol.tol_eig * max(scale, 1.0):
        raise AssemblyError(
            f"leading symmetrized eigenvalue {leading:.3e} is not zero "
            f"(scale {scale:.3e}); the assembled stencil lost its equilibrium")
    sqrt_mu = np.sqrt(disc.mu)
    sqrt_mu /= np.linalg.norm(sqrt_mu)
    alignment = float(abs(vecs[:, 0] @ sqrt_mu)) if vecs is not None else np.nan
    if vecs is not None and alignment < 1.0 - 1e-8:
        raise AssemblyError(
            f"leading eigenvector alignment with sqrt(mu) is {alignment:.12f}")
    return GapReport(lambda_gap=float(vals[1]), leading=leading,
                     gap_eigenvector_alignment=alignment, n=disc.grid.n_total)


def gap_mode(disc: FPDiscretization) -> np.ndarray:
    """Eigenvector of the gap eigenvalue, mapped back to density variables."""
    s_mat = _symmetrize_small(disc.sym, disc.mu)
    _, vecs = _top_symmetric_eigs(s_mat, 2, want_vectors=True)
    mode = vecs[:, 1] * np.sqrt(disc.mu)
    return mode / np.linalg.norm(mode)


# ----------------------------------------------------------------------
# decomposition search


@dataclass
class DecompositionResult:
    found: bool
    M: float | None
    R: float | None
    achieved: float | None
    target: float
    part_a_diagonal: np.ndarray | None
    frontier: list

    def split_matrices(self, disc: FPDiscretization):
        gen = disc.generator
        part_a = sp.diags(self.part_a_diagonal).tocsr()
        return gen, part_a, (gen - part_a).tocsr()

    def to_dict(self):
        return {"found": self.found, "M": self.M, "R": self.R,
                "achieved": self.achieved, "target": self.target,
                "frontier": [[m, r, v] for m, r, v in self.frontier]}


def _ambient_symmetric_top(matrix: sp.spmatrix, weights: np.ndarray) -> float:
    coo = matrix.tocoo()
    log_w = np.log(weights)
    data = coo.data * np.exp(0.5 * (log_w[coo.row] - log_w[coo.col]))
    scaled = sp.coo_matrix((data, (coo.row, coo.col)), shape=matrix.shape).tocsr()
    sym = 0.5 * (scaled + scaled.T)
    vals, _ = _top_symmetric_eigs(sym.tocsr(), 1)
    return float(vals[0])


def find_decomposition(disc: FPDiscretization, target_a: float,
                       m_grid=None, r_grid=None) -> DecompositionResult:
    """Search the cutoff family ``A = M chi(|x| <= R)`` for a coercive remainder.

    Scans a logarithmic grid in the multiplier M and a linear grid in the
    cutoff radius R (deterministic order, M-major ascending), accepting
    the first pair for which the largest eigenvalue of the
    ambient-symmetrized remainder drops to ``target_a`` or below. When the
    whole box fails, the result carries the frontier of best achieved
    values so the caller can widen the search.
    """
    if not target_a < 0.0:
        raise InfeasibleParameterError("decomposition target must be negative")
    if m_grid is None:
        m_grid = np.geomspace(1.0, 100.0, 8)
    if r_grid is None:
        r_grid = np.linspace(1.0, disc.grid.L / 2.0, 6)
    coord = disc.grid.flat_coordinate()
    gen = disc.generator
    weights = disc.space_ambient.weights
    frontier = []
    for m_val in np.asarray(m_grid, dtype=float):
        for r_val in np.asarray(r_grid, dtype=float):
            chi = (coord <= r_val).astype(float)
            part_b = (gen - sp.diags(m_val * chi)).tocsr()
            top = _ambient_symmetric_top(part_b, weights)
            frontier.append((float(m_val), float(r_val), top))
            if top <= target_a:
                return DecompositionResult(found=True, M=float(m_val),
                                           R=float(r_val), achieved=top,
                                           target=target_a,
                                           part_a_diagonal=m_val * chi,
                                           frontier=frontier)
    return DecompositionResult(found=False, M=None, R=None, achieved=None,
                               target=target_a, part_a_diagonal=None,
                               frontier=frontier)


# ----------------------------------------------------------------------
# decay experiments


@dataclass
class DecayExperimentResult:
    """Trajectory of the deviation from equilibrium in both norms.

    ``fit`` is the free-fitted certified envelope of the relative ambient
    deviation; ``pinned`` certifies the envelope at a caller-requested
    rate when one is given. ``equilibrium`` marks a deviation that never
    left the noise floor (the fit is then None).
    """

    times: np.ndarray
    deviation_ambient: np.ndarray
    deviation_small: np.ndarray
    mass: np.ndarray
    scheme: str
    fit: DecayFit | None
    pinned: DecayFit | None
    equilibrium: bool

    def to_dict(self):
        out = {"scheme": self.scheme, "equilibrium": self.equilibrium,
               "n_samples": int(len(self.times))}
        if self.fit is not None:
            out["fit"] = {"rate": self.fit.rate, "prefactor": self.fit.prefactor,
                          "residual": self.fit.residual}
        if self.pinned is not None:
            out["pinned"] = {"rate": self.pinned.rate,
                             "prefactor": self.pinned.prefactor}
        return out


def initial_datum(disc: FPDiscretization, kind: str) -> np.ndarray:
    """Named initial data used by experiments and the CLI."""
    meshes = disc.grid.meshes()
    r2 = sum(m**2 for m in meshes)
    if kind == "heavy-tail":
        return ((1.0 + r2) ** (-(disc.weight.k + 1.0) / 2.0)).ravel()
    if kind == "offset-heavy-tail":
        shifted = (meshes[0] - 1.0) ** 2 + sum(m**2 for m in meshes[1:])
        return ((1.0 + shifted) ** (-(disc.weight.k + 1.0) / 2.0)).ravel()
    if kind == "equilibrium":
        return disc.mu.copy()
    if kind == "gap-mode":
        return disc.mu + 1e-3 * gap_mode(disc)
    raise ValueError(f"unknown initial datum '{kind}'")


def decay_experiment(disc: FPDiscretization, space: WeightedSpace, f0,
                     t_grid, scheme: str = "implicit-euler",
                     pinned_rate: float | None = None,
                     tol: Tolerances = DEFAULT_TOLERANCES
                     ) -> DecayExperimentResult:
    """Evolve f0, subtract the equilibrium share of its mass, fit the decay.

    The discrete mass ``sum f h^d`` is checked against the initial mass at
    every recorded time (the conservative stencils make the drift pure
    rounding). Norms are recorded in both the ambient space and the small
    space; the certified envelope is fitted to the ambient deviation
    relative to its initial value.
    """
    f0 = np.asarray(f0, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    hd = disc.grid.h ** disc.grid.d
    mass0 = float(f0.sum() * hd)
    equilibrium_share = mass0 * disc.mu
    traj = step_trajectory(disc.generator, f0, t_grid, scheme=scheme, tol=tol)
    mass = traj.sum(axis=1) * hd
    drift = np.max(np.abs(mass - mass0)) / max(abs(mass0), 1e-300)
    if drift > max(tol.mass_tol * len(t_grid), 1e-10):
        raise AssemblyError(f"mass drifted by {drift:.3e} over the trajectory")
    deviation = traj - equilibrium_share[None, :]
    dev_ambient = np.array([space.norm(g) for g in deviation])
    dev_small = np.array([disc.space_small.norm(g) for g in deviation])

    scale0 = dev_ambient[0]
    floor = tol.floor_factor * np.finfo(float).eps * max(space.norm(f0), 1e-300)
    if scale0 <= floor or np.all(dev_ambient <= floor):
        return DecayExperimentResult(times=t_grid, deviation_ambient=dev_ambient,
                                     deviation_small=dev_small, mass=mass,
                                     scheme=scheme, fit=None, pinned=None,
                                     equilibrium=True)
    rel = dev_ambient / scale0
    try:
        fit = fit_exponential_decay(t_grid, rel, tol=tol)
    except InsufficientSignalError:
        fit = None
    pinned = None
    if pinned_rate is not None:
        prefactor = envelope_prefactor(t_grid, rel, pinned_rate)
        pinned = DecayFit(prefactor=prefactor, rate=pinned_rate,
                          window=(float(t_grid[0]), float(t_grid[-1])),
                          residual=float("nan"))
    return DecayExperimentResult(times=t_grid, deviation_ambient=dev_ambient,
                                 deviation_small=dev_small, mass=mass,
                                 scheme=scheme, fit=fit, pinned=pinned,
                                 equilibrium=False)


def resolvent_scan_fp(disc: FPDiscretization, space: WeightedSpace, a: float,
                      y_grid=None, tol: Tolerances = DEFAULT_TOLERANCES
                      ) -> H2Report:
    """Uniform resolvent bound of the assembled generator along ``Re z = a``."""
    return check_h2(disc.dense_generator(), a, space, y_grid=y_grid, tol=tol)


def build_problem(problem: FPProblem) -> FPDiscretization:
    """Construct the discretization described by a validated problem config."""
    grid = FPGrid(d=problem.d, L=problem.L, N=problem.N)
    potential = Potential(s=problem.s)
    weight = EnlargedWeight(kind=problem.weight.kind, k=problem.weight.k)
    swirl = None
    if problem.swirl is not None:
        swirl = SwirlField(profile=problem.swirl.phi,
                           amplitude=problem.swirl.amplitude)
    return FPDiscretization.build(grid, potential, weight, swirl=swirl)
