import numpy as np
import pytest

from entropybench.blockenc import (
    BlockEncoding,
    be_power,
    be_product,
    dilate,
    encode_density,
    encoding_copy_cost,
    purified_encode,
    rescale,
)
from entropybench.numkernel import HermMatrix, mat_fun, op_norm, op_norm_dist
from entropybench.states import from_spectrum, purify_maximally_mixed, random_density


def test_encode_pure_noiseless():
    rho = from_spectrum([1.0], 2)
    be = encode_density(rho, 0.1, noiseless=True)
    assert op_norm(be.encoded) == pytest.approx(np.pi / 4, abs=1e-12)
    assert np.allclose(be.encoded.mat, np.diag([np.pi / 4, 0.0]))
    assert be.eta == 0.1


def test_encode_cost_example():
    rho = from_spectrum([0.5, 0.5], 2)
    be = encode_density(rho, 0.01, noiseless=True)
    assert be.sample_cost == 461  # ceil(100 * ln 100)
    assert encoding_copy_cost(0.01) == 461


def test_encode_noisy_perturbation_norm():
    rho = from_spectrum([0.5, 0.3, 0.2], 3)
    be = encode_density(rho, 0.01, noise_seed=7)
    assert op_norm_dist(be.encoded, be.target) == pytest.approx(0.005, abs=1e-12)
    assert op_norm_dist(be.encoded, be.target) <= be.eta


def test_encode_rejects_bad_delta():
    rho = from_spectrum([1.0], 2)
    for bad in (0.0, -0.1, 0.6):
        with pytest.raises(ValueError):
            encode_density(rho, bad)


def test_dilate_zero_block():
    be = BlockEncoding(
        encoded=HermMatrix(np.zeros((2, 2), dtype=complex)),
        target=HermMatrix(np.zeros((2, 2), dtype=complex)),
    )
    u = dilate(be).matrix
    assert np.allclose(u, np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]]))


def test_dilate_half_identity():
    h = HermMatrix(np.eye(2, dtype=complex) / 2)
    u = dilate(BlockEncoding(encoded=h, target=h)).matrix
    assert np.allclose(u[:2, :2], np.eye(2) / 2)
    assert np.linalg.norm(u.conj().T @ u - np.eye(4), 2) <= 1e-10


def test_dilate_random_density():
    rho = random_density(4, 4, seed=3)
    be = encode_density(rho, 0.05, noise_seed=1)
    u = dilate(be).matrix
    assert np.linalg.norm(u.conj().T @ u - np.eye(8), 2) <= 1e-10
    assert np.max(np.abs(u[:4, :4] - be.encoded.mat)) <= 1e-14


def test_product_squares_spectrum():
    rho = from_spectrum([0.5, 0.3, 0.2], 3)
    be = encode_density(rho, 0.01, noiseless=True)
    sq = be_product(be, be)
    expect = sorted(((np.pi * x / 4) ** 2 for x in (0.5, 0.3, 0.2)), reverse=True)
    assert np.allclose(sq.target.spectrum.eigenvalues, expect, atol=1e-12)
    assert sq.ancillas == 2
    assert sq.sample_cost == 2 * be.sample_cost


def test_product_eta_composition():
    rho = random_density(3, 3, seed=5)
    b1 = encode_density(rho, 0.02, noise_seed=1)
    b2 = encode_density(rho, 0.03, noise_seed=2)
    prod = be_product(b1, b2)
    assert prod.eta == pytest.approx(0.02 + 0.03 + 0.02 * 0.03)
    assert op_norm_dist(prod.encoded, prod.target) <= prod.eta


def test_product_exact_inputs_zero_eta():
    vec, _ = purify_maximally_mixed(2)
    be = purified_encode(vec, 2)
    assert be_product(be, be).eta == 0.0


def test_product_dimension_mismatch():
    a = encode_density(from_spectrum([1.0], 2), 0.1, noiseless=True)
    b = encode_density(from_spectrum([1.0], 4), 0.1, noiseless=True)
    with pytest.raises(ValueError):
        be_product(a, b)


def test_product_associative_noiseless():
    # commuting targets: three polynomial transforms of one random state
    rho = random_density(4, 4, seed=8)
    base = encode_density(rho, 0.1, noiseless=True)
    b1 = base
    b2 = be_product(base, base)
    b3 = be_product(b2, base)
    left = be_product(be_product(b1, b2), b3)
    right = be_product(b1, be_product(b2, b3))
    assert op_norm_dist(left.target, right.target) <= 1e-12
    assert abs(left.eta - right.eta) <= 1e-12


def test_kfold_error_accumulation():
    # per-factor budget D/k keeps the k-fold error within 1.1 * D
    rho = random_density(4, 4, seed=13)
    for k in (2, 4, 8):
        for big_delta in (0.02, 0.1):
            be = be_power(rho, k, big_delta / k, noise_seed=17)
            assert be.eta <= 1.1 * big_delta
            assert op_norm_dist(be.encoded, be.target) <= be.eta


def test_purified_bell():
    vec, _ = purify_maximally_mixed(2)
    be = purified_encode(vec, 2)
    assert np.allclose(be.encoded.mat, np.eye(2) / 2)
    assert be.eta == 0.0 and be.subnorm == 1.0


def test_purified_maximally_mixed_4():
    vec, _ = purify_maximally_mixed(4)
    be = purified_encode(vec, 4)
    assert np.max(np.abs(be.encoded.mat - np.eye(4) / 4)) <= 1e-12


def test_purified_product_state():
    psi = np.array([0.6, 0.8j], dtype=complex)
    vec = np.kron(psi, np.array([1.0, 0.0]))
    be = purified_encode(vec, 2)
    assert np.allclose(be.encoded.mat, np.outer(psi, psi.conj()))


def test_purified_rejects_unnormalized():
    with pytest.raises(ValueError):
        purified_encode(np.array([1.0, 1.0]), 2)


def test_rescale_removes_half():
    rho = from_spectrum([0.5, 0.3, 0.2], 3)
    be = encode_density(rho, 0.02, noise_seed=3)
    half = be_product(be, be)
    doubled = rescale(half, 2.0)
    assert op_norm_dist(doubled.target, mat_fun(half.target, lambda x: 2 * x)) <= 1e-12
    assert doubled.eta == pytest.approx(2 * half.eta)


def test_every_encoding_eta_never_underreports():
    rho = random_density(5, 4, seed=21)
    be = encode_density(rho, 0.05, noise_seed=9)
    prods = [be, be_product(be, be), be_power(rho, 3, 0.01, noise_seed=4)]
    for b in prods:
        assert op_norm_dist(b.encoded, b.target) <= b.eta + 1e-12


def test_three_fold_budget_split():
    # three factors at budget/3 each accumulate to at most budget + budget^2
    rho = random_density(4, 4, seed=30)
    eps = 0.09
    be = be_power(rho, 3, eps / 3, noise_seed=5)
    assert be.eta <= eps + eps**2
    assert op_norm_dist(be.encoded, be.target) <= be.eta


def test_dilated_unitary_printable():
    from entropybench.states import matrix_to_text, matrix_from_text

    rho = from_spectrum([0.5, 0.5], 2)
    u = dilate(encode_density(rho, 0.1, noiseless=True))
    back = matrix_from_text(matrix_to_text(u.matrix))
    assert np.array_equal(back, u.matrix)
