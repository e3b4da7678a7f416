import numpy as np
import pytest

from polyfm import oracle
from polyfm.kernels import anova_recursive, homogeneous


def test_brute_anova_examples():
    assert oracle.brute_anova([1, 1, 1], [1, 1, 1], 3) == 1.0
    assert oracle.brute_anova([1, 2], [1, 1], 3) == 0.0
    assert oracle.brute_anova([1, 2, 3, 4], [1, 1, 1, 1], 2) == 35.0


def test_brute_homogeneous_examples():
    assert oracle.brute_homogeneous([1, 2], [3, 4], 2) == 121.0
    assert oracle.brute_homogeneous([1, 1, 1], [1, 1, 1], 3) == 27.0


def test_budget():
    with pytest.raises(oracle.BudgetExceeded):
        oracle.brute_homogeneous(np.ones(100), np.ones(100), 4)
    with pytest.raises(oracle.BudgetExceeded):
        oracle.DenseTensor.zeros(11, 6)


def test_symmetrize_matrix(rng):
    M = rng.normal(size=(4, 4))
    S = oracle.symmetrize(oracle.DenseTensor(M))
    np.testing.assert_allclose(S.data, 0.5 * (M + M.T), rtol=0, atol=1e-15)


def test_symmetrize_fixed_points(rng):
    x = rng.normal(size=3)
    T = oracle.DenseTensor.outer_power(x, 3)
    np.testing.assert_allclose(oracle.symmetrize(T).data, T.data, atol=1e-15)
    S = oracle.symmetrize(oracle.DenseTensor(rng.normal(size=(3, 3, 3))))
    np.testing.assert_allclose(oracle.symmetrize(S).data, S.data, atol=1e-15)
    assert oracle.is_symmetric(S)


def test_permute_axes_definition(rng):
    M = oracle.DenseTensor(rng.normal(size=(3, 3, 3)))
    sigma = (2, 0, 1)
    Ms = oracle.permute_axes(M, sigma)
    for idx in np.ndindex(*M.data.shape):
        assert Ms.data[idx] == M.data[tuple(idx[s] for s in sigma)]


def test_contract_examples(rng):
    p, x = rng.normal(size=4), rng.normal(size=4)
    W = oracle.DenseTensor.outer_power(p, 2)
    assert oracle.contract(W, x, "full") == pytest.approx(homogeneous(p, x, 2), rel=1e-12)
    assert oracle.contract(W, x, "strict_upper") == pytest.approx(anova_recursive(p, x, 2), rel=1e-12)
    assert oracle.contract(oracle.DenseTensor.zeros(4, 3), x) == 0.0
    with pytest.raises(ValueError):
        oracle.contract(W, x, "lower")


@pytest.mark.parametrize("m", [2, 3, 4])
def test_symmetrization_does_not_change_contraction(rng, m):
    M = oracle.DenseTensor(rng.normal(size=(3,) * m))
    x = rng.normal(size=3)
    assert oracle.contract(oracle.symmetrize(M), x) == pytest.approx(oracle.contract(M, x), rel=1e-12)


def test_finite_diff():
    assert oracle.finite_diff(lambda v: v * v, 3.0, 1e-5) == pytest.approx(6.0, abs=1e-8)
    assert oracle.finite_diff(lambda v: 4.0, 1.0) == 0.0
    assert oracle.finite_diff(lambda v: v ** 3, 1.0, 1e-5) == pytest.approx(3.0, abs=1e-7)
    with pytest.raises(ValueError):
        oracle.finite_diff(lambda v: v, 0.0, 0.0)


def test_golden_section():
    x, fx = oracle.golden_section_min(lambda v: (v - 1.3) ** 2 + 2.0, -5, 5)
    assert x == pytest.approx(1.3, abs=1e-6)
    assert fx == pytest.approx(2.0, abs=1e-12)
