import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from semidecay.errors import DimensionMismatchError
from semidecay.spaces import (DenseOperator, EmbeddedSpacePair, WeightedSpace,
                              operator_norm, spectral_norm_power_iteration,
                              weighted_adjoint, weighted_norm)

finite_vectors = arrays(np.float64, (5,),
                        elements=st.floats(-1e6, 1e6, allow_nan=False))
positive_weights = arrays(np.float64, (5,), elements=st.floats(1e-3, 1e3))


def test_weighted_norm_mixed_weights():
    space = WeightedSpace(grid=[0.0, 1.0], weights=[1.0, 4.0])
    npt.assert_allclose(weighted_norm([1.0, 1.0], space), np.sqrt(5.0), rtol=1e-15)


def test_weighted_norm_zero_vector():
    space = WeightedSpace(grid=[0.0, 1.0, 2.0], weights=[0.3, 7.0, 2.0])
    assert weighted_norm(np.zeros(3), space) == 0.0


def test_weighted_norm_euclidean_case():
    space = WeightedSpace.unweighted(2)
    assert weighted_norm([3.0, 4.0], space) == pytest.approx(5.0, abs=1e-15)


def test_weighted_norm_dimension_mismatch():
    space = WeightedSpace.unweighted(3)
    with pytest.raises(DimensionMismatchError):
        weighted_norm([1.0, 2.0], space)


def test_nonpositive_weights_rejected():
    with pytest.raises(ValueError):
        WeightedSpace(grid=[0.0, 1.0], weights=[1.0, 0.0])
    with pytest.raises(ValueError):
        WeightedSpace(grid=[0.0], weights=[np.inf])


def test_operator_norm_identity():
    space = WeightedSpace(grid=[0.0, 1.0, 2.0], weights=[0.5, 2.0, 9.0])
    assert operator_norm(np.eye(3), space, space) == pytest.approx(1.0, rel=1e-14)


def test_operator_norm_diagonal_unweighted():
    space = WeightedSpace.unweighted(2)
    assert operator_norm(np.diag([2.0, 3.0]), space, space) == pytest.approx(3.0)


def test_operator_norm_mixed_weights():
    # oracle: largest singular value of W_cod^{1/2} M W_dom^{-1/2}
    dom = WeightedSpace(grid=[0.0, 1.0], weights=[1.0, 4.0])
    cod = WeightedSpace.unweighted(2)
    m = np.array([[0.0, 1.0], [0.0, 0.0]])
    scaled = np.diag([1.0, 1.0]) @ m @ np.diag([1.0, 0.5])
    oracle = np.linalg.svd(scaled, compute_uv=False)[0]
    assert oracle == pytest.approx(0.5)
    assert operator_norm(m, dom, cod) == pytest.approx(0.5, rel=1e-14)


def test_unit_weight_norm_matches_power_iteration(rng):
    # cross-check of the two spectral-norm paths on plain matrices
    space = WeightedSpace.unweighted(8)
    m = rng.standard_normal((8, 8))
    svd_val = operator_norm(m, space, space)
    power_val = spectral_norm_power_iteration(m)
    assert abs(svd_val - power_val) <= 1e-10 * svd_val


@given(v=finite_vectors, w=positive_weights, alpha=st.floats(-100, 100))
@settings(max_examples=50, deadline=None)
def test_norm_homogeneity(v, w, alpha):
    space = WeightedSpace(grid=np.arange(5.0), weights=w)
    npt.assert_allclose(weighted_norm(alpha * v, space),
                        abs(alpha) * weighted_norm(v, space),
                        rtol=1e-10, atol=1e-12)


@given(u=finite_vectors, v=finite_vectors, w=positive_weights)
@settings(max_examples=50, deadline=None)
def test_norm_triangle_inequality(u, v, w):
    space = WeightedSpace(grid=np.arange(5.0), weights=w)
    lhs = weighted_norm(u + v, space)
    rhs = weighted_norm(u, space) + weighted_norm(v, space)
    assert lhs <= rhs * (1 + 1e-12) + 1e-12


@given(w_dom=positive_weights, w_cod=positive_weights,
       seed=st.integers(0, 2**31 - 1))
@settings(max_examples=40, deadline=None)
def test_operator_norm_dominates_matvec(w_dom, w_cod, seed):
    gen = np.random.default_rng(seed)
    dom = WeightedSpace(grid=np.arange(5.0), weights=w_dom)
    cod = WeightedSpace(grid=np.arange(5.0), weights=w_cod)
    m = gen.standard_normal((5, 5))
    v = gen.standard_normal(5)
    bound = operator_norm(m, dom, cod)
    assert weighted_norm(m @ v, cod) <= bound * weighted_norm(v, dom) * (1 + 1e-10) + 1e-12


def test_operator_norm_power_method_agrees_with_svd(rng):
    dom = WeightedSpace(grid=np.arange(20.0), weights=rng.uniform(0.2, 5.0, 20))
    cod = WeightedSpace(grid=np.arange(20.0), weights=rng.uniform(0.2, 5.0, 20))
    m = rng.standard_normal((20, 20))
    svd_val = operator_norm(m, dom, cod)
    power_val = operator_norm(m, dom, cod, method="power")
    assert power_val == pytest.approx(svd_val, rel=1e-9)


def test_complex_inner_product_conjugates_second_argument(rng):
    space = WeightedSpace(grid=np.arange(4.0), weights=rng.uniform(0.5, 2.0, 4))
    u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    lhs = space.inner(u, v)
    assert lhs == pytest.approx(np.conjugate(space.inner(v, u)))
    assert space.inner(u, u).real == pytest.approx(weighted_norm(u, space) ** 2)


def test_weighted_adjoint_is_inner_product_adjoint(rng):
    space = WeightedSpace(grid=np.arange(6.0), weights=rng.uniform(0.1, 5.0, 6))
    m = rng.standard_normal((6, 6))
    f = rng.standard_normal(6)
    g = rng.standard_normal(6)
    lhs = space.inner(m @ f, g)
    rhs = space.inner(f, weighted_adjoint(m, space) @ g)
    npt.assert_allclose(lhs, rhs, rtol=1e-12)


def test_dense_operator_shape_checks():
    space = WeightedSpace.unweighted(3)
    with pytest.raises(DimensionMismatchError):
        DenseOperator.on(np.zeros((2, 3)), space)
    with pytest.raises(DimensionMismatchError):
        DenseOperator.on(np.zeros((2, 2)), space)


def test_embedded_pair_constant_dominates_pointwise_bound():
    pair = EmbeddedSpacePair.from_weights([1.0, 2.0], [4.0, 2.0])
    computed = pair.computed_embedding_constant()
    assert pair.embedding_constant >= computed
    # the embedding inequality holds for an arbitrary vector
    v = np.array([0.3, -1.7])
    assert (weighted_norm(v, pair.ambient)
            <= pair.embedding_constant * weighted_norm(v, pair.small) * (1 + 1e-12))


def test_embedded_pair_rejects_understated_constant():
    ambient = WeightedSpace(grid=[0.0, 1.0], weights=[4.0, 1.0])
    small = WeightedSpace(grid=[0.0, 1.0], weights=[1.0, 1.0])
    with pytest.raises(ValueError):
        EmbeddedSpacePair(ambient=ambient, small=small, embedding_constant=1.0)


def test_embedded_pair_requires_shared_index_set():
    with pytest.raises(DimensionMismatchError):
        EmbeddedSpacePair(ambient=WeightedSpace.unweighted(2),
                          small=WeightedSpace.unweighted(3),
                          embedding_constant=10.0)
