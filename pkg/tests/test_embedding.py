"""Embedding diagnostics tests: distortion measures against eigenvalue
oracles, dimension calculators against hand-computed values, and the
bilinear statistic's moments and tails against analytic targets."""

import math

import numpy as np
import pytest

from krsketch.embedding import (
    CAL_C0,
    RangeBasis,
    SigmaSpectrum,
    case2_norm_distribution_check,
    default_zeta_thresholds,
    distortion,
    embed_dim_case1,
    embed_dim_case2,
    embed_dim_gaussian,
    embedding_success_rate,
    sketch_basis,
    sup_distortion_exact,
    sup_distortion_sampled,
    zeta_sample,
    zeta_tail_bound,
)
from krsketch.sketches import IdentitySketch, gen_case2, gen_dense_gaussian
from krsketch.tensor_core import TensorVector


def _random_basis(rng, n1, n2, p_f, p_g):
    return RangeBasis(
        np.linalg.qr(rng.standard_normal((n1, p_f)))[0],
        np.linalg.qr(rng.standard_normal((n2, p_g)))[0],
    )


def test_range_basis_validates_orthonormality():
    with pytest.raises(ValueError):
        RangeBasis(np.ones((3, 2)), np.eye(2))


def test_range_basis_from_factors_spans_products():
    rng = np.random.default_rng(1)
    fac_f = rng.standard_normal((6, 3))
    fac_g = rng.standard_normal((5, 3))
    basis = RangeBasis.from_factors(fac_f, fac_g)
    assert basis.dim == 9
    # any kron(F x, G z) must lie in the span of the basis columns
    dense = np.kron(basis.u_f, basis.u_g)
    proj = dense @ dense.T
    y = np.kron(fac_f @ rng.standard_normal(3), fac_g @ rng.standard_normal(3))
    assert np.linalg.norm(proj @ y - y) <= 1e-10 * np.linalg.norm(y)


def test_expand_coeffs_is_isometric():
    rng = np.random.default_rng(2)
    basis = _random_basis(rng, 7, 6, 3, 2)
    for _ in range(20):
        coeffs = rng.standard_normal(6)
        y = basis.expand_coeffs(coeffs)
        assert np.linalg.norm(y) == pytest.approx(np.linalg.norm(coeffs), rel=1e-12)
    # and matches the dense Kronecker basis including column ordering
    coeffs = rng.standard_normal(6)
    dense = np.kron(basis.u_f, basis.u_g)
    assert np.allclose(basis.expand_coeffs(coeffs), dense @ coeffs, atol=1e-12)


def test_distortion_trivial_cases():
    sk = IdentitySketch(2, 3)
    rng = np.random.default_rng(3)
    y = rng.standard_normal(6)
    assert distortion(sk, y) <= 1e-15
    # scale invariance
    skg = gen_dense_gaussian(5, 6, 0)
    assert distortion(skg, y) == pytest.approx(distortion(skg, 3.0 * y), rel=1e-10)
    tv = TensorVector(rng.standard_normal(2), rng.standard_normal(3))
    assert distortion(skg, tv) == pytest.approx(distortion(skg, tv.expand()), rel=1e-10)
    with pytest.raises(ValueError):
        distortion(skg, np.zeros(6))


def test_sketch_basis_matches_dense_product():
    rng = np.random.default_rng(4)
    basis = _random_basis(rng, 5, 4, 2, 3)
    sk = gen_case2(11, 5, 4, seed=8)
    want = sk.materialize() @ np.kron(basis.u_f, basis.u_g)
    assert np.allclose(sketch_basis(sk, basis), want, atol=1e-12)


def test_sup_distortion_exact_matches_brute_force():
    rng = np.random.default_rng(5)
    basis = _random_basis(rng, 6, 5, 2, 2)
    sk = gen_dense_gaussian(12, 30, seed=9)
    dense_basis = np.kron(basis.u_f, basis.u_g)
    su = sk.materialize() @ dense_basis
    want = float(np.max(np.abs(np.linalg.eigvalsh(su.T @ su - np.eye(4)))))
    assert sup_distortion_exact(sk, basis) == pytest.approx(want, rel=1e-12)
    # dense orthonormal basis input takes the column-apply path
    assert sup_distortion_exact(sk, dense_basis) == pytest.approx(want, rel=1e-12)


def test_sampled_sup_bounded_by_exact_and_close():
    rng = np.random.default_rng(6)
    basis = _random_basis(rng, 8, 7, 3, 3)  # subspace dimension 9
    sk = gen_dense_gaussian(40, 56, seed=10)
    exact = sup_distortion_exact(sk, basis)
    sampled = sup_distortion_sampled(sk, basis, 10_000, seed=11)
    assert sampled <= exact + 1e-12
    assert sampled >= 0.75 * exact


def test_sampled_sup_nested_monotone():
    rng = np.random.default_rng(7)
    basis = _random_basis(rng, 6, 6, 2, 2)
    sk = gen_case2(20, 6, 6, seed=12)
    values = [sup_distortion_sampled(sk, basis, n, seed=13) for n in (1, 10, 100, 1000)]
    assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))


def test_sampled_sup_single_basis_vector_when_dim_one():
    rng = np.random.default_rng(8)
    basis = _random_basis(rng, 5, 5, 1, 1)
    sk = gen_case2(9, 5, 5, seed=14)
    single = distortion(sk, TensorVector(basis.u_f[:, 0], basis.u_g[:, 0]))
    assert sup_distortion_sampled(sk, basis, 1, seed=15) == pytest.approx(single, rel=1e-12)


def test_identity_sketch_has_zero_sup_distortion():
    rng = np.random.default_rng(9)
    basis = _random_basis(rng, 4, 5, 2, 2)
    assert sup_distortion_exact(IdentitySketch(4, 5), basis) <= 1e-12


def test_embed_dim_hand_values():
    # ceil(4 * (ln 2 + 1)) = ceil(6.772...) = 7
    assert embed_dim_gaussian(0.5, 0.5, 1, 1.0) == 7
    assert embed_dim_case1(0.5, 0.5, 1, 1.0) == (7, 7)
    # ceil(2 * (ln 2 + 36)^3) = ceil(98806.354...) = 98807
    assert embed_dim_case2(0.5, 0.5, 6, 1.0) == 98807


def test_embed_dim_monotonicity():
    assert embed_dim_gaussian(0.25, 0.1, 4) > embed_dim_gaussian(0.5, 0.1, 4)
    assert embed_dim_gaussian(0.5, 0.01, 4) > embed_dim_gaussian(0.5, 0.1, 4)
    assert embed_dim_gaussian(0.5, 0.1, 8) > embed_dim_gaussian(0.5, 0.1, 4)
    assert embed_dim_case2(0.25, 0.1, 8) > embed_dim_case2(0.5, 0.1, 8)


def test_embed_dim_argument_errors():
    for bad in ((0.0, 0.1), (0.6, 0.1), (0.5, 0.0), (0.5, 0.7)):
        with pytest.raises(ValueError):
            embed_dim_gaussian(bad[0], bad[1], 4)
    with pytest.raises(ValueError):
        embed_dim_gaussian(0.5, 0.1, 0)
    with pytest.raises(ValueError):
        embed_dim_gaussian(0.5, 0.1, 4, c=0.0)
    with pytest.warns(UserWarning, match="p >= 6"):
        embed_dim_case2(0.5, 0.1, 4)


def test_sigma_spectrum_validation():
    SigmaSpectrum(np.array([1.0]))
    with pytest.raises(ValueError):
        SigmaSpectrum(np.array([0.5, 0.5]))  # not unit sum of squares
    with pytest.raises(ValueError):
        SigmaSpectrum(np.array([0.3, 0.954]))  # increasing
    spec = SigmaSpectrum.from_values([3.0, 4.0])
    assert np.allclose(spec.values, [0.8, 0.6])
    rand = SigmaSpectrum.random(5, 0)
    assert rand.values @ rand.values == pytest.approx(1.0, abs=1e-12)
    pn = SigmaSpectrum.product_normal(4)
    assert np.array_equal(pn.values, [1.0, 0.0, 0.0, 0.0])


def test_zeta_reproducible():
    spec = SigmaSpectrum.random(6, 3)
    a = zeta_sample(spec, 10_000, seed=5)
    b = zeta_sample(spec, 10_000, seed=5)
    assert a.m2 == b.m2 and a.m4 == b.m4
    assert np.array_equal(a.tail_fracs, b.tail_fracs)


def test_zeta_product_normal_moments():
    # sigma = e1: zeta is a product of two standard normals with
    # E zeta^2 = 1 and E zeta^4 = 9 exactly
    stats = zeta_sample(SigmaSpectrum.product_normal(4), 400_000, seed=21)
    se2 = math.sqrt(stats.var_zeta2 / stats.n_draws)
    se4 = math.sqrt(stats.var_zeta4 / stats.n_draws)
    assert abs(stats.m2 - 1.0) <= 4 * se2
    assert abs(stats.m4 - 9.0) <= 4 * se4


def test_zeta_uniform_spectrum_fourth_moment():
    # E zeta^4 = 3 + 6 sum sigma^4 = 3 + 6/p for the flat spectrum
    p = 4
    spec = SigmaSpectrum.from_values(np.ones(p))
    stats = zeta_sample(spec, 400_000, seed=22)
    se4 = math.sqrt(stats.var_zeta4 / stats.n_draws)
    assert abs(stats.m4 - (3.0 + 6.0 / p)) <= 4 * se4


def test_zeta_moment_bounds_across_spectra():
    # E zeta^2 = 1, E zeta^4 <= 9, Var(zeta^2) <= 8 for any unit spectrum
    for k in range(20):
        spec = SigmaSpectrum.random(5, 100 + k)
        stats = zeta_sample(spec, 100_000, seed=200 + k)
        se2 = math.sqrt(stats.var_zeta2 / stats.n_draws)
        se4 = math.sqrt(stats.var_zeta4 / stats.n_draws)
        assert abs(stats.m2 - 1.0) <= 4 * se2
        assert stats.m4 <= 9.0 + 4 * se4
        assert stats.var_zeta2 <= 8.0 + 4 * se4


def test_zeta_tail_bound_shape():
    p = 16
    root = 4.0
    # continuous at the regime switch
    left = zeta_tail_bound(2 * root - 1e-12, p)
    right = zeta_tail_bound(2 * root + 1e-12, p)
    assert left == pytest.approx(right, rel=1e-9)
    # vacuous below sqrt(p), decreasing beyond
    assert zeta_tail_bound(root / 2, p) == 2.0
    assert zeta_tail_bound(2 * root, p) == pytest.approx(2.0 * math.exp(-1.0), rel=1e-12)
    assert zeta_tail_bound(3 * root, p) < zeta_tail_bound(2 * root, p)
    with pytest.raises(ValueError):
        zeta_tail_bound(-1.0, p)


def test_zeta_tails_respect_bound():
    for p, seed in ((4, 31), (16, 32)):
        spec = SigmaSpectrum.random(p, seed)
        stats = zeta_sample(spec, 500_000, seed=seed + 10)
        for t, frac in zip(stats.thresholds, stats.tail_fracs):
            bound = zeta_tail_bound(float(t), p)
            if bound >= 1.0:
                continue
            slack = 4 * math.sqrt(bound / stats.n_draws) + 5.0 / stats.n_draws
            assert frac <= bound + slack


def test_default_thresholds():
    assert np.allclose(default_zeta_thresholds(16), [4.0, 6.0, 8.0, 12.0])


def test_case2_norm_matches_zeta_mean_law():
    # ||S y||^2 and the mean of r zeta^2 draws should be indistinguishable
    spec = SigmaSpectrum.random(4, 40)
    check = case2_norm_distribution_check(spec, r=32, n_draws=2000, seed=41, n1=6, n2=7)
    assert check.sketch_samples.mean() == pytest.approx(1.0, abs=0.05)
    assert check.direct_samples.mean() == pytest.approx(1.0, abs=0.05)
    # two-sample KS at n = 2000: same-law samples stay well under 0.06
    assert check.ks_stat <= 0.06


def test_gaussian_embedding_dimension_is_sufficient():
    # with the calibrated constant, an unstructured sketch of
    # r = ceil(C0 / eps^2 (|ln delta| + p)) rows embeds a random
    # p-by-p-factor product subspace within eps in >= 1 - delta of draws
    eps, delta, p = 0.5, 0.1, 4
    r = embed_dim_gaussian(eps, delta, p, CAL_C0["dense-gaussian"])
    rate = embedding_success_rate(
        "dense-gaussian", eps, 10, 10, p, n_seeds=200, n_samples=2000, master_seed=77, r=r
    )
    assert rate >= 1.0 - delta
