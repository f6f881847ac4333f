import math

import numpy as np
import pytest

from entropybench.blockenc import encode_density, purified_encode
from entropybench.numkernel import op_norm_dist
from entropybench.qsvtpoly import (
    DegreeCapExceeded,
    PolyApprox,
    apply_poly,
    approx_log,
    approx_neg_power,
    approx_pos_power,
    cheb_fit,
    neg_power_input_precision,
    pos_power_input_precision,
    to_monomial,
)
from entropybench.states import from_spectrum, purify_maximally_mixed, random_density


def dense_grid(lo, hi, n=400):
    return np.linspace(lo, hi, n)


def test_fit_linear_target_exact():
    p = cheb_fit(lambda x: x, 0.2, 0.9, 1e-6, 50)
    assert p.degree == 1
    assert p.eps <= 1e-6
    g = dense_grid(0.2, 0.9)
    assert np.max(np.abs(p(g) - g)) <= 1e-12


def test_fit_quadratic_target():
    p = cheb_fit(lambda x: x * x, 0.1, 1.0, 1e-12, 50)
    assert p.degree == 2


def test_fit_log_degree_bound():
    beta = 0.1
    p = cheb_fit(lambda x: math.log(1 / x) / (2 * math.log(10)), beta, 1.0, 1e-3, 10_000)
    assert p.degree <= 8 * (1 / beta) * math.log(1e3)


def test_fit_cap_exceeded_reports_best():
    with pytest.raises(DegreeCapExceeded) as exc:
        cheb_fit(lambda x: math.log(1 / x), 0.01, 1.0, 1e-12, 2)
    assert exc.value.best_err > 0


def test_approx_log_rejects_degenerate():
    with pytest.raises(ValueError):
        approx_log(1.0, 0.01)


def test_approx_log_certified():
    p = approx_log(0.1, 0.01)
    g = dense_grid(0.1, 1.0)
    target = np.log(1 / g) / (2 * np.log(10))
    assert np.max(np.abs(p(g) - target)) <= 0.01
    assert np.max(np.abs(p(g))) <= 1.0 + 1e-9


def test_approx_log_endpoint_half():
    p = approx_log(0.1, 0.01)
    assert p(0.1) == pytest.approx(0.5, abs=0.01)


def test_approx_log_degree_law():
    for beta in (0.2, 0.1, 0.05):
        for eps in (1e-2, 1e-3):
            p = approx_log(beta, eps)
            assert p.degree <= 8 * (1 / beta) * math.log(1 / eps)


def test_pos_power_endpoint():
    p = approx_pos_power(0.5, 10.0, 1e-3)
    assert p(1.0) == pytest.approx(0.5, abs=1e-3)


def test_pos_power_matches_scalar():
    eps = 1e-4
    p = approx_pos_power(0.3, 5.0, eps)
    g = dense_grid(0.2, 1.0)
    assert np.max(np.abs(2 * p(g) - g**0.3)) <= 2 * eps


def test_pos_power_input_precision_value():
    p = approx_pos_power(0.5, 10.0, 1e-3)
    expect = 1e-3 / (10 * math.log(1e4) ** 3)
    assert p.input_precision == pytest.approx(expect, rel=1e-12)
    assert expect == pytest.approx(1.28e-7, rel=0.01)
    assert pos_power_input_precision(10.0, 1e-3) == expect


def test_neg_power_endpoint_half():
    eps = 1e-4
    p = approx_neg_power(0.6, 10.0, eps)
    assert p(0.1) == pytest.approx(0.5, abs=eps)


def test_neg_power_matches_scalar():
    eps = 1e-4
    c, kappa = 0.6, 10.0
    p = approx_neg_power(c, kappa, eps)
    g = dense_grid(0.1, 1.0)
    scale = 2 * kappa**c
    assert np.max(np.abs(scale * p(g) - g ** (-c))) <= scale * eps


def test_neg_power_input_precision_formula():
    c, kappa, eps = 0.6, 10.0, 1e-3
    p = approx_neg_power(c, kappa, eps)
    expect = eps / (kappa ** (1 + c) * (1 + c) * math.log(kappa ** (1 + c) / eps) ** 3)
    assert p.input_precision == pytest.approx(expect, rel=1e-12)
    assert neg_power_input_precision(c, kappa, eps) == expect


def test_power_degenerate_domain_constant():
    p = approx_pos_power(0.5, 1.0, 1e-6)
    assert p.degree == 0
    assert p(1.0) == pytest.approx(0.5)
    q = approx_neg_power(0.5, 1.0, 1e-6)
    assert q.degree == 0 and q(1.0) == pytest.approx(0.5)


def test_apply_identity_fit():
    rho = from_spectrum([0.5, 0.3, 0.2], 3)
    be = encode_density(rho, 0.1, noiseless=True)
    p = cheb_fit(lambda x: x, 0.1, 1.0, 1e-12, 10, zero_extension=0.0)
    out = apply_poly(be, p)
    assert op_norm_dist(out.target, be.target) <= 1e-10
    assert op_norm_dist(out.encoded, be.encoded) <= 1e-10


def test_apply_pos_power_spectrum():
    rho = from_spectrum([0.5, 0.3, 0.2], 3)
    be = encode_density(rho, 0.01, noiseless=True)
    eps = 1e-6
    kappa = 4 / (np.pi * 0.2)
    p = approx_pos_power(0.5, kappa, eps)
    out = apply_poly(be, p)
    got = np.sort(out.encoded.spectrum.eigenvalues)[::-1]
    expect = np.sort([np.sqrt(np.pi * lam / 4) / 2 for lam in (0.5, 0.3, 0.2)])[::-1]
    assert np.max(np.abs(got - expect)) <= eps


def test_apply_noiseless_eta_equals_eps():
    vec, _ = purify_maximally_mixed(4)
    be = purified_encode(vec, 4)  # eta = 0 exactly
    p = approx_pos_power(0.5, 8.0, 1e-5)
    out = apply_poly(be, p)
    assert out.eta == p.eps


def test_apply_cost_scales_with_degree():
    rho = from_spectrum([0.5, 0.3, 0.2], 3)
    be = encode_density(rho, 0.01, noiseless=True)
    p = approx_pos_power(0.5, 4 / (np.pi * 0.2), 1e-6)
    out = apply_poly(be, p)
    assert out.sample_cost == be.sample_cost * 2 * p.degree


def test_apply_rejects_out_of_domain():
    rho = from_spectrum([0.5, 0.3, 0.2], 3)
    be = encode_density(rho, 0.01, noiseless=True)
    p = approx_neg_power(0.5, 4.0, 1e-6)  # domain [0.25, 1] misses pi*0.2/4
    with pytest.raises(ValueError, match="outside"):
        apply_poly(be, p)


def test_apply_commutes_with_exact_spectral_path():
    rho = random_density(6, 4, seed=2)
    be = encode_density(rho, 0.01, noiseless=True)
    kappa = 4 / (np.pi * rho.meta.rho_min)
    p = approx_pos_power(0.4, kappa, 1e-7)
    out = apply_poly(be, p)
    lam_in = be.target.spectrum.eigenvalues
    expect = np.sort([0.5 * x**0.4 if x > 1e-12 else 0.0 for x in lam_in])[::-1]
    assert np.max(np.abs(out.target.spectrum.eigenvalues - expect)) <= 1e-10


def test_to_monomial_constant_log():
    p = PolyApprox(
        coeffs=np.array([0.5]),
        degree=0,
        domain=(0.1, 1.0),
        target_tag="log_scaled",
        eps=1e-15,
        target_fn=lambda x: 0.5,
        subnorm_factor=2 * math.log(10),
    )
    mono = to_monomial(p)
    assert mono.coeffs[0] == pytest.approx(math.log(10), rel=1e-12)
    assert mono.degree == 0


def test_to_monomial_linear_exact():
    p = cheb_fit(lambda x: 0.25 + 0.5 * x, 0.1, 1.0, 1e-9, 10)
    mono = to_monomial(p)
    assert mono.coeffs == pytest.approx([0.25, 0.5], abs=1e-12)


def test_to_monomial_log_agreement():
    p = approx_log(0.2, 0.05)
    mono = to_monomial(p)
    g = dense_grid(0.2, 1.0)
    assert np.max(np.abs(mono(g) - 2 * math.log(5) * p(g))) <= 1e-8


def test_to_monomial_degree_cap():
    p = cheb_fit(lambda x: math.sin(40 * x), 0.01, 1.0, 1e-9, 200)
    assert p.degree > 30
    with pytest.raises(ValueError, match="cap"):
        to_monomial(p)


def test_serialization_text():
    p = approx_log(0.2, 0.05)
    text = p.to_text()
    lines = text.strip().splitlines()
    assert lines[0].startswith("domain ")
    assert lines[1].startswith("eps ")
    assert len(lines) == 2 + p.degree + 1


def test_apply_poly_eta_covers_noncommuting_noise():
    # a random perturbation does not commute with the state, and the
    # operator slope of a steep fit can beat its scalar slope; the
    # ledger must cover the realized distance regardless
    rho = random_density(6, 3, seed=0)
    kappa = 4 / (np.pi * rho.meta.rho_min)
    fit = approx_pos_power(0.05, kappa, 2e-3)
    be = encode_density(rho, 0.04, noise_seed=0)
    out = apply_poly(be, fit)
    realized = op_norm_dist(out.encoded, out.target)
    assert realized > fit.eps + fit.lipschitz_bound(widen=be.eta) * be.eta  # scalar bound beaten
    assert realized <= out.eta  # ledger still honest
