import numpy as np
import numpy.testing as npt
import pytest

from semidecay.errors import AssemblyError, DomainTooSmallError
from semidecay.factorization import SplitOperator, enlargement_bound_chain
from semidecay.fokker_planck import (EnlargedWeight, FPDiscretization, FPGrid,
                                     Potential, SwirlField, UniformPotential,
                                     assemble_skew_part,
                                     assemble_symmetric_part, check_truncation,
                                     decay_experiment, find_decomposition,
                                     gap_mode, initial_datum,
                                     resolvent_scan_fp, spectral_gap_H)
from semidecay.hypotheses import PASS, check_h2, check_h4
from semidecay.spaces import EmbeddedSpacePair


class TestIngredients:
    def test_potential_validation_and_values(self):
        with pytest.raises(ValueError):
            Potential(0.5)
        pot = Potential(2.0)
        assert pot.value(np.array(0.0)) == 1.0
        x = np.array([0.7, -1.3])
        npt.assert_allclose(pot.value(x), 1 + x**2)
        npt.assert_allclose(pot.gradient(x)[0], 2 * x)

    def test_gradient_matches_finite_differences(self):
        pot = Potential(3.0)
        x = np.linspace(-2, 2, 9)
        y = np.linspace(-1, 1, 9)
        eps = 1e-6
        gx = (pot.value(x + eps, y) - pot.value(x - eps, y)) / (2 * eps)
        npt.assert_allclose(pot.gradient(x, y)[0], gx, rtol=1e-8)

    def test_weight_kind_constraints(self):
        with pytest.raises(ValueError):
            EnlargedWeight("stretched-exponential", 1.5)
        EnlargedWeight("polynomial", 3.0).validate_for_dimension(1)
        with pytest.raises(ValueError):
            EnlargedWeight("polynomial", 1.5).validate_for_dimension(2)
        w = EnlargedWeight("stretched-exponential", 0.5)
        u = np.array([1.0, 2.0, 5.0])
        assert np.all(np.diff(w.theta(u)) > 0)

    def test_swirl_structure_identities(self):
        """div F = 0 and grad U . F = 0 at second order under refinement."""
        pot = Potential(2.0)
        swirl = SwirlField("inverse_linear", 1.0)
        residuals = []
        for n in (40, 80, 160):
            ax = np.linspace(-3, 3, n)
            h = ax[1] - ax[0]
            x, y = np.meshgrid(ax, ax, indexing="ij")
            fx, fy = swirl.field(pot, x, y)
            div = ((fx[2:, 1:-1] - fx[:-2, 1:-1]) / (2 * h)
                   + (fy[1:-1, 2:] - fy[1:-1, :-2]) / (2 * h))
            residuals.append(np.max(np.abs(div)))
            gx, gy = pot.gradient(x, y)
            npt.assert_allclose(gx * fx + gy * fy, 0.0, atol=1e-14)
            bound = swirl.amplitude * (1 + np.sqrt(gx**2 + gy**2))
            assert np.all(np.sqrt(fx**2 + fy**2) <= bound + 1e-14)
        rate = np.log(residuals[0] / residuals[2]) / np.log(4.0)
        assert rate > 1.7


class TestSymmetricPart:
    def test_equilibrium_is_null_vector(self, fp_small):
        # telescoping kills f = mu; rounding only
        residual = fp_small.sym @ fp_small.mu
        scale = np.abs(fp_small.sym) @ np.abs(fp_small.mu)
        assert np.max(np.abs(residual) / np.maximum(scale, 1e-300)) <= 1e-14

    def test_constant_equilibrium_reduces_to_laplacian(self):
        grid = FPGrid(d=1, L=1.0, N=8)
        sym = assemble_symmetric_part(grid, UniformPotential()).toarray()
        h2 = grid.h ** 2
        expected = (np.diag(np.full(7, 1.0), 1) + np.diag(np.full(7, 1.0), -1)
                    - np.diag([1, 2, 2, 2, 2, 2, 2, 1])) / h2
        npt.assert_allclose(sym, expected, atol=1e-14)

    def test_exact_discrete_symmetry(self, fp_small, rng):
        t_mat = fp_small.sym
        w = fp_small.space_small.weights
        h = fp_small.grid.h
        f = rng.standard_normal(fp_small.grid.n_total)
        g = rng.standard_normal(fp_small.grid.n_total)
        lhs = np.sum((t_mat @ f) * g * w) * h
        rhs = np.sum(f * (t_mat @ g) * w) * h
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs))

    def test_mass_conservation_matrix_level(self, fp_small):
        col_sums = np.asarray(fp_small.generator.sum(axis=0)).ravel()
        assert np.max(np.abs(col_sums)) <= 1e-13 * np.max(np.abs(fp_small.generator.data))

    def test_truncation_guard(self):
        with pytest.raises(DomainTooSmallError):
            check_truncation(FPGrid(d=1, L=2.0, N=50), Potential(1.0))

    def test_nonpositivity_with_single_neutral_mode(self):
        from semidecay.fokker_planck import _symmetrize_small
        grid = FPGrid(d=1, L=8.0, N=200)
        disc = FPDiscretization.build(grid, Potential(2.0),
                                      EnlargedWeight("polynomial", 3.0))
        s_mat = _symmetrize_small(disc.sym, disc.mu).toarray()
        s_mat = 0.5 * (s_mat + s_mat.T)
        eigvals = np.linalg.eigvalsh(s_mat)
        scale = np.max(np.abs(eigvals))
        assert np.all(eigvals <= 1e-9 * scale)
        assert np.sum(np.abs(eigvals) <= 1e-9 * scale) == 1


class TestSkewPart:
    def test_zero_in_dimension_one(self, fp_small):
        assert fp_small.skew.nnz == 0

    def test_zero_without_field(self):
        grid = FPGrid(d=2, L=4.0, N=8)
        skew = assemble_skew_part(grid, Potential(2.0), None)
        assert skew.nnz == 0

    def test_conservative_column_sums(self):
        grid = FPGrid(d=2, L=8.0, N=24)
        skew = assemble_skew_part(grid, Potential(2.0), SwirlField("inverse_linear", 1.0))
        col_sums = np.asarray(skew.sum(axis=0)).ravel()
        assert np.max(np.abs(col_sums)) <= 1e-13 * np.max(np.abs(skew.data))

    def test_quadratic_form_vanishes_at_second_order(self):
        pot = Potential(2.0)
        weight = EnlargedWeight("polynomial", 3.0)
        swirl = SwirlField("inverse_linear", 1.0)
        forms = []
        for n in (50, 100, 200):
            grid = FPGrid(d=2, L=8.0, N=n)
            skew = assemble_skew_part(grid, pot, swirl)
            x, y = grid.meshes()
            w = weight.theta(pot.value(x, y)).ravel()
            f = (np.exp(-((x - 0.7)**2 + (y + 0.4)**2) / 2) * (1 + 0.3 * x)).ravel()
            q = abs(np.sum((skew @ f) * f * w)) / np.sum(f**2 * w)
            forms.append(q)
        assert forms[0] / forms[1] == pytest.approx(4.0, rel=0.4)
        assert forms[1] / forms[2] == pytest.approx(4.0, rel=0.4)


class TestSpectralGap:
    def test_quadratic_potential_gap(self):
        grid = FPGrid(d=1, L=8.0, N=1000)
        disc = FPDiscretization.build(grid, Potential(2.0),
                                      EnlargedWeight("polynomial", 3.0))
        gap = spectral_gap_H(disc)
        assert gap.lambda_gap == pytest.approx(-2.0, rel=2e-4)
        assert abs(gap.leading) <= 1e-10
        assert gap.gap_eigenvector_alignment == pytest.approx(1.0, abs=1e-10)

    def test_neumann_surrogate_closed_form(self):
        grid = FPGrid(d=1, L=8.0, N=500)
        disc = FPDiscretization.build(grid, UniformPotential(),
                                      EnlargedWeight("polynomial", 3.0))
        gap = spectral_gap_H(disc)
        exact = -(np.pi / (2 * grid.L)) ** 2
        assert gap.lambda_gap == pytest.approx(exact, rel=1e-4)

    def test_second_order_convergence(self):
        errors = []
        for n in (250, 500, 1000):
            grid = FPGrid(d=1, L=8.0, N=n)
            disc = FPDiscretization.build(grid, Potential(2.0),
                                          EnlargedWeight("polynomial", 3.0))
            errors.append(abs(spectral_gap_H(disc).lambda_gap + 2.0))
        assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.2)
        assert errors[1] / errors[2] == pytest.approx(4.0, rel=0.2)

    def test_broken_assembly_detected(self, fp_small):
        broken = FPDiscretization(grid=fp_small.grid, potential=fp_small.potential,
                                  weight=fp_small.weight, swirl=None,
                                  sym=fp_small.sym + 0.1 * __import__("scipy.sparse", fromlist=["identity"]).identity(fp_small.grid.n_total),
                                  skew=fp_small.skew, mu=fp_small.mu,
                                  space_small=fp_small.space_small,
                                  space_ambient=fp_small.space_ambient)
        with pytest.raises(AssemblyError):
            spectral_gap_H(broken)


class TestFindDecomposition:
    def test_zero_multiplier_is_rejected(self, fp_small):
        gap = spectral_gap_H(fp_small)
        result = find_decomposition(fp_small, 0.5 * gap.lambda_gap,
                                    m_grid=[0.0], r_grid=[2.0])
        assert not result.found
        assert result.frontier[0][2] > 0.5 * gap.lambda_gap

    def test_search_box_contains_feasible_pair(self, fp_small):
        gap = spectral_gap_H(fp_small)
        result = find_decomposition(fp_small, 0.5 * gap.lambda_gap)
        assert result.found
        assert 1.0 <= result.M <= 100.0
        assert 1.0 <= result.R <= fp_small.grid.L / 2
        assert result.achieved <= 0.5 * gap.lambda_gap

    def test_accepted_pair_revalidates_h4(self):
        grid = FPGrid(d=1, L=8.0, N=200)
        disc = FPDiscretization.build(grid, Potential(2.0),
                                      EnlargedWeight("polynomial", 3.0))
        gap = spectral_gap_H(disc)
        target = 0.5 * gap.lambda_gap
        result = find_decomposition(disc, target)
        assert result.found
        gen, part_a, part_b = result.split_matrices(disc)
        split = SplitOperator(full=gen.toarray(), part_a=part_a.toarray(),
                              part_b=part_b.toarray())
        pair = EmbeddedSpacePair.from_weights(
            disc.space_ambient.weights, disc.space_small.weights,
            grid=disc.space_small.grid,
            cell_measure=disc.space_small.cell_measure)
        samples = target + 1e-6 + 1j * np.linspace(-1.0, 1.0, 7)
        report = check_h4(split, pair, target, 0.1 * abs(target), [0.0 + 0.0j],
                          samples=samples)
        assert report.verdict == PASS


class TestDecayExperiment:
    def test_equilibrium_stays_flat(self, fp_small):
        t_grid = np.linspace(0.0, 1.0, 51)
        result = decay_experiment(fp_small, fp_small.space_ambient,
                                  initial_datum(fp_small, "equilibrium"), t_grid)
        assert result.equilibrium
        assert np.max(result.deviation_ambient) <= 1e-10

    def test_gap_mode_decays_at_gap_rate(self, fp_small):
        gap = spectral_gap_H(fp_small)
        t_grid = np.arange(0.0, 3.0 + 1e-9, 0.005)
        result = decay_experiment(fp_small, fp_small.space_ambient,
                                  initial_datum(fp_small, "gap-mode"), t_grid,
                                  scheme="crank-nicolson")
        assert result.fit.rate == pytest.approx(gap.lambda_gap, abs=5e-3)
        assert result.fit.prefactor == pytest.approx(1.0, abs=5e-3)

    def test_offcenter_heavy_tail_settles_on_gap_rate(self, fp_small):
        gap = spectral_gap_H(fp_small)
        t_grid = np.arange(0.0, 4.0 + 1e-9, 0.01)
        result = decay_experiment(fp_small, fp_small.space_ambient,
                                  initial_datum(fp_small, "offset-heavy-tail"),
                                  t_grid, scheme="crank-nicolson")
        assert gap.lambda_gap - 0.1 * abs(gap.lambda_gap) <= result.fit.rate < 0.0

    def test_even_heavy_tail_exhibits_transient_prefactor(self, fp_small):
        gap = spectral_gap_H(fp_small)
        t_grid = np.arange(0.0, 4.0 + 1e-9, 0.01)
        result = decay_experiment(fp_small, fp_small.space_ambient,
                                  initial_datum(fp_small, "heavy-tail"), t_grid,
                                  scheme="crank-nicolson",
                                  pinned_rate=gap.lambda_gap)
        # parity: the even datum skips the odd gap mode, so the free fit
        # lands on the next even mode while the pinned envelope still holds
        assert result.fit.rate < gap.lambda_gap
        assert result.fit.prefactor > 1.0
        rel = result.deviation_ambient / result.deviation_ambient[0]
        assert np.all(rel <= result.pinned.prefactor
                      * np.exp(result.pinned.rate * result.times) * (1 + 1e-12))

    def test_mass_recorded_and_conserved(self, fp_small):
        t_grid = np.linspace(0.0, 1.0, 101)
        f0 = initial_datum(fp_small, "heavy-tail")
        result = decay_experiment(fp_small, fp_small.space_ambient, f0, t_grid)
        drift = np.max(np.abs(result.mass - result.mass[0]))
        assert drift <= 1e-10 * abs(result.mass[0])


class TestResolventScan:
    def test_consistency_with_direct_check(self):
        grid = FPGrid(d=1, L=8.0, N=120)
        disc = FPDiscretization.build(grid, Potential(2.0),
                                      EnlargedWeight("polynomial", 3.0))
        gap = spectral_gap_H(disc)
        a_line = 0.5 * gap.lambda_gap
        scan = resolvent_scan_fp(disc, disc.space_small, a_line)
        direct = check_h2(disc.dense_generator(), a_line, disc.space_small)
        assert scan.bound == direct.bound
        npt.assert_array_equal(scan.norms, direct.norms)

    def test_enlarged_weights_scan_is_finite(self):
        grid = FPGrid(d=1, L=8.0, N=120)
        disc = FPDiscretization.build(grid, Potential(2.0),
                                      EnlargedWeight("polynomial", 3.0))
        gap = spectral_gap_H(disc)
        scan = resolvent_scan_fp(disc, disc.space_ambient, 0.5 * gap.lambda_gap)
        assert np.isfinite(scan.bound)
        assert scan.bound > 0

    def test_scan_dominated_by_bound_chain(self):
        grid = FPGrid(d=1, L=8.0, N=120)
        disc = FPDiscretization.build(grid, Potential(2.0),
                                      EnlargedWeight("polynomial", 3.0))
        gap = spectral_gap_H(disc)
        target = 0.5 * gap.lambda_gap
        decomp = find_decomposition(disc, target)
        assert decomp.found
        gen, part_a, part_b = decomp.split_matrices(disc)
        split = SplitOperator(full=gen.toarray(), part_a=part_a.toarray(),
                              part_b=part_b.toarray())
        pair = EmbeddedSpacePair.from_weights(
            disc.space_ambient.weights, disc.space_small.weights,
            grid=disc.space_small.grid,
            cell_measure=disc.space_small.cell_measure)
        ys = np.linspace(-2.0, 2.0, 9)
        samples = target + 1e-6 + 1j * ys
        chain = enlargement_bound_chain(split, pair, samples)
        assert chain.dominated
        # the certified chain bound dominates the scan on the same points
        assert chain.certified_bound >= np.max(chain.direct_values)


class TestStretchedExponentialWeight:
    def test_gap_and_decay_run_end_to_end(self):
        grid = FPGrid(d=1, L=8.0, N=300)
        disc = FPDiscretization.build(grid, Potential(2.0),
                                      EnlargedWeight("stretched-exponential", 0.5))
        gap = spectral_gap_H(disc)
        assert gap.lambda_gap == pytest.approx(-2.0, rel=2e-3)
        t_grid = np.arange(0.0, 2.0 + 1e-9, 0.01)
        result = decay_experiment(disc, disc.space_ambient,
                                  initial_datum(disc, "gap-mode"), t_grid,
                                  scheme="crank-nicolson")
        assert result.fit.rate == pytest.approx(gap.lambda_gap, abs=2e-2)

    def test_embedding_constant_finite(self):
        grid = FPGrid(d=1, L=8.0, N=100)
        disc = FPDiscretization.build(grid, Potential(2.0),
                                      EnlargedWeight("stretched-exponential", 0.5))
        c = disc.embedding_constant()
        assert np.isfinite(c) and c > 0


def test_initial_datum_shapes(fp_small):
    for kind in ("heavy-tail", "offset-heavy-tail", "equilibrium", "gap-mode"):
        f0 = initial_datum(fp_small, kind)
        assert f0.shape == (fp_small.grid.n_total,)
    with pytest.raises(ValueError):
        initial_datum(fp_small, "nope")


def test_heavy_tail_formula(fp_small):
    x = fp_small.grid.axis()
    npt.assert_allclose(initial_datum(fp_small, "heavy-tail"),
                        (1 + x**2) ** -2.0, rtol=1e-15)
