"""Potential, frequencies, structural hypothesis, and the vector field."""

import numpy as np
import pytest

from paranls import model as md
from paranls import spectral as sp
from paranls.errors import HypothesisError, RangeError


def test_potential_at_zero():
    p = md.PotentialParams(np.array([0.3, -0.1, 0.2]))
    assert abs(md.potential_coeff(p, 0) - (0.3 - 0.1 + 0.2)) < 1e-15


def test_potential_single_term_value():
    p = md.PotentialParams(np.array([0.5]))
    assert abs(md.potential_coeff(p, 1) - 1.0 / (4.0 * np.sqrt(2.0))) < 1e-15


def test_potential_tail():
    # p(j) <j>^3 -> m_1 with the next term O(<j>^-2)
    p = md.PotentialParams(np.array([0.41, 0.5, -0.5]))
    j = 10_000
    val = md.potential_coeff(p, j) * sp.bracket(j) ** 3
    assert abs(val - 0.41) < 1e-6


def test_potential_even_and_bounded(rng):
    p = md.random_params(4, rng)
    js = np.arange(0, 50)
    assert np.max(np.abs(md.potential_coeff(p, js) - md.potential_coeff(p, -js))) == 0.0
    assert np.max(np.abs(md.potential_coeff(p, js))) <= p.M / 2 + 1e-15


def test_params_box_enforced():
    with pytest.raises(RangeError):
        md.PotentialParams(np.array([0.7]))


def test_frequency_values():
    zero = md.PotentialParams(np.zeros(2))
    assert md.frequency(zero, 3) == -9.0
    p = md.PotentialParams(np.array([0.3, -0.1]))
    assert abs(md.frequency(p, 0) - 0.2) < 1e-15
    expected = -4.0 + 0.3 / 5.0**1.5 - 0.1 / 5.0**2.5
    assert abs(md.frequency(p, 2) - expected) < 1e-15


def test_hypothesis_gauge_cubic():
    rep = md.validate_hypothesis(md.CUBIC_GAUGE)
    assert rep.ok and not rep.violations


def test_hypothesis_fully_nonlinear():
    # d f / d z2 = |z0|^2 is real as a polynomial
    rep = md.validate_hypothesis(md.CUBIC_FULLY_NONLINEAR)
    assert rep.parity_ok and rep.schrodinger_ok and rep.reversibility_ok


def test_hypothesis_parabolic_rejected():
    # u u_xx: d f / d z2 = z0, not real valued
    f = md.Nonlinearity((md.Monomial((1, 0, 1), (0, 0, 0), 1.0),))
    rep = md.validate_hypothesis(f)
    assert not rep.schrodinger_ok
    assert rep.parity_ok


def test_hypothesis_parity_item():
    f = md.Nonlinearity((md.Monomial((1, 1, 0), (1, 0, 0), 1.0),))  # |u|^2 u_x
    rep = md.validate_hypothesis(f)
    assert not rep.parity_ok


def test_hypothesis_complex_coefficient():
    f = md.Nonlinearity((md.Monomial((2, 0, 0), (1, 0, 0), 1.0 + 1e-3j),))
    assert not md.validate_hypothesis(f).reversibility_ok


def test_nonlinearity_json_round_trip():
    text = '[{"alpha": [1, 0, 1], "beta": [1, 0, 0], "C": 2.5}]'
    f = md.nonlinearity_from_json(text)
    assert f.monomials[0].alpha == (1, 0, 1)
    assert f.monomials[0].C == 2.5
    assert md.nonlinearity_to_json(f)[0]["C"] == 2.5


def test_rhs_linear_single_mode():
    p = md.PotentialParams(np.array([0.2, 0.1]))
    u = sp.field_from_modes({1: 0.7, -1: 0.7}, 4)
    U = sp.pair_from_plus(u)
    out = md.rhs(U, p, md.ZERO_NONLINEARITY)
    lam1 = md.frequency(p, 1)
    assert abs(out.plus.coeff(1) - 1j * lam1 * 0.7) < 1e-15
    assert abs(out.minus.coeff(1) + 1j * lam1 * np.conj(u.coeff(-1))) < 1e-15


def test_rhs_cubic_single_mode_convolution():
    # |u|^2 u of eps e^{ix}/sqrt(2pi): nonlinear plus coefficient at mode 1
    # is i eps |eps|^2 / (2 pi)  [closed-form 3-mode convolution]
    eps = 0.3 + 0.1j
    p = md.PotentialParams(np.zeros(1))
    u = sp.field_from_modes({1: eps}, 4)
    U = sp.PairField(u, sp.conj_field(u))
    out = md.rhs(U, p, md.CUBIC_GAUGE)
    lin = 1j * md.frequency(p, 1) * eps
    nonlinear = out.plus.coeff(1) - lin
    assert abs(nonlinear - 1j * eps * abs(eps) ** 2 / (2.0 * np.pi)) < 1e-15


def test_rhs_preserves_evenness(rng):
    p = md.random_params(3, rng)
    U = sp.pair_from_plus(0.2 * sp.random_field(16, rng, decay=2.0, even=True))
    out = md.rhs(U, p, md.CUBIC_FULLY_NONLINEAR)
    assert sp.pair_parity_defect(out) < 1e-12
    assert sp.realification_defect(out) < 1e-12


@pytest.mark.parametrize("f", [md.CUBIC_GAUGE, md.CUBIC_FULLY_NONLINEAR])
def test_rhs_reversibility(rng, f):
    # S X(U) = -X(S U) on random realified data
    p = md.random_params(3, rng)
    U = sp.pair_from_plus(0.2 * sp.random_field(12, rng, decay=1.5))
    lhs = sp.apply_involution(md.rhs(U, p, f))
    rhs_ = md.rhs(sp.apply_involution(U), p, f)
    assert np.max(np.abs(lhs.plus.coeffs + rhs_.plus.coeffs)) < 1e-12
    assert np.max(np.abs(lhs.minus.coeffs + rhs_.minus.coeffs)) < 1e-12


def test_rhs_rejects_bad_nonlinearity(rng):
    p = md.random_params(2, rng)
    U = sp.pair_from_plus(0.1 * sp.random_field(8, rng))
    bad = md.Nonlinearity((md.Monomial((1, 0, 1), (0, 0, 0), 1.0),))
    with pytest.raises(HypothesisError):
        md.rhs(U, p, bad)
    md.rhs(U, p, bad, enforce_hypothesis=False)  # override allowed


def test_dealiasing_makes_products_exact(rng):
    # compare the pseudospectral cubic term against the exact triple product
    u = sp.random_field(16, rng, decay=1.0)
    U = sp.pair_from_plus(u)
    F = md.nonlinear_term(U, md.CUBIC_GAUGE)
    exact = sp.multiply_fields([u, u, sp.conj_field(u)], J_out=16)
    assert np.max(np.abs(F.plus.coeffs - exact.coeffs)) < 1e-13
