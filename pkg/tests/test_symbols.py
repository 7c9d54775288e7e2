"""Profiles, cut-offs, symbol operations, structure predicates."""

import numpy as np
import pytest

from paranls import spectral as sp
from paranls import symbols as sy
from paranls.errors import CapabilityError, ConfigError


def fd_derivative(profile, xi, h=1e-5):
    return (profile(xi + h) - profile(xi - h)) / (2.0 * h)


@pytest.mark.parametrize(
    "profile",
    [
        sy.profile_ixi(1),
        sy.profile_ixi(2),
        sy.profile_jap(-1.5),
        sy.profile_jap(2.0),
        sy.PolyJapProfile({(1, -3.0): 2.0, (0, 0.0): 1.0}),
    ],
)
def test_profile_derivatives_match_finite_differences(profile, rng):
    xi = rng.uniform(-20, 20, size=50)
    d = profile.derivative()
    fd = fd_derivative(profile, xi)
    scale = np.maximum(np.abs(fd), 1.0)
    assert np.max(np.abs(d(xi) - fd) / scale) < 1e-6


def test_gamma_profile_values_and_derivative(rng):
    g = sy.profile_gamma()
    xi = np.array([0.5, 1.0, -2.0, 7.5])
    assert np.max(np.abs(g(xi) - 1.0 / (1j * xi))) < 1e-15
    # odd continuation: gamma(-xi) = -gamma(xi), smooth and zero at 0
    small = np.linspace(-0.49, 0.49, 21)
    assert np.max(np.abs(g(small) + g(-small))) < 1e-15
    assert abs(g(np.array([0.0]))[0]) == 0.0
    xi_out = rng.uniform(0.6, 30.0, size=30) * rng.choice([-1, 1], size=30)
    fd = fd_derivative(g, xi_out)
    assert np.max(np.abs(g.derivative()(xi_out) - fd) / np.maximum(np.abs(fd), 1e-6)) < 1e-5
    with pytest.raises(CapabilityError):
        g.derivative().derivative()(np.array([0.2]))


def test_potential_profile_matches_model():
    from paranls import model as md

    p = md.PotentialParams(np.array([0.3, -0.2]))
    prof = sy.profile_potential(p)
    xi = np.array([0.0, 1.0, 3.7])
    expected = 0.3 * sp.bracket(xi) ** -3.0 - 0.2 * sp.bracket(xi) ** -5.0
    assert np.max(np.abs(prof(xi) - expected)) < 1e-15


def test_cutoff_plateau_and_support(cutoff):
    # delta = 1/4: chi(1, xi) = 1 iff <xi> >= 8, and 0 iff <xi> <= 4
    xi_in = np.sqrt(64.0 - 1.0)
    assert cutoff(1.0, np.array([xi_in, 10.0]))[0] == 1.0
    assert cutoff(1.0, np.array([np.sqrt(15.9)]))[0] == 0.0
    assert cutoff(0.0, np.array([0.0, 5.0, 100.0])).min() == 1.0


def test_cutoff_even(cutoff, rng):
    xp = rng.uniform(-30, 30, size=40)
    xi = rng.uniform(-30, 30, size=40)
    assert np.max(np.abs(cutoff(xp, xi) - cutoff(-xp, xi))) == 0.0
    assert np.max(np.abs(cutoff(xp, xi) - cutoff(xp, -xi))) == 0.0


def test_cutoff_monotone_transition(cutoff):
    r = np.linspace(0.0, 0.3, 200)
    vals = cutoff(r, np.zeros_like(r))
    assert np.all(np.diff(vals) <= 1e-15)
    assert np.all((vals >= 0.0) & (vals <= 1.0))


def test_cutoff_config_error():
    with pytest.raises(ConfigError):
        sy.CutoffConfig(0.0)
    with pytest.raises(ConfigError):
        sy.CutoffConfig(0.6)
    sy.admissible_cutoff(sy.CutoffConfig(0.125))


def test_symbol_evaluation_separable(rng):
    c = sp.random_field(6, rng)
    a = sy.symbol(c, sy.profile_ixi(2))
    x = sp.grid(31)
    xi = np.array([-3.0, 0.5, 2.0])
    vals = a.evaluate(x, xi)
    expected = sp.grid_values(c, 31)[:, None] * (1j * xi[None, :]) ** 2
    assert np.max(np.abs(vals - expected)) < 1e-13


def test_regularize_x_independent_unchanged(cutoff):
    a = sy.symbol_x_independent(sy.profile_ixi(2))
    reg = sy.regularize(a, cutoff)
    x = sp.grid(9)
    xi = np.linspace(-10, 10, 11)
    assert np.max(np.abs(reg.evaluate(x, xi) - a.evaluate(x, xi))) < 1e-14


def test_regularize_scales_modes_by_chi(cutoff):
    # cos(x) (i xi)^2: mode +-1 coefficient scaled by chi(1, xi)
    half = np.sqrt(2 * np.pi) / 2
    c = sp.field_from_modes({1: half, -1: half}, 1)
    a = sy.symbol(c, sy.profile_ixi(2))
    reg = sy.regularize(a, cutoff)
    x = sp.grid(17)
    xi = np.array([1.0, 8.0, 30.0])
    chi_vals = cutoff(1.0, xi)
    expected = a.evaluate(x, xi) * chi_vals[None, :]
    assert np.max(np.abs(reg.evaluate(x, xi) - expected)) < 1e-13
    # plateau: equals the raw symbol where chi = 1
    assert np.max(np.abs(reg.evaluate(x, xi[2:]) - a.evaluate(x, xi[2:]))) < 1e-13


def test_regularize_kills_high_coefficient_modes(cutoff):
    # a single x-mode above the support radius vanishes at xi = 0
    c = sp.field_from_modes({5: 1.0, -5: 1.0}, 5)
    reg = sy.regularize(sy.symbol(c), cutoff)
    x = sp.grid(21)
    assert np.max(np.abs(reg.evaluate(x, np.array([0.0])))) == 0.0


def test_regularize_idempotent_on_plateau(cutoff):
    half = np.sqrt(2 * np.pi) / 2
    c = sp.field_from_modes({1: half, -1: half}, 1)
    a = sy.symbol(c, sy.profile_ixi(1))
    once = sy.regularize(a, cutoff)
    twice = sy.regularize(once, cutoff)
    x = sp.grid(17)
    xi = np.array([0.5, 30.0, 100.0])  # chi is 0 or 1 at these
    assert np.max(np.abs(once.evaluate(x, xi) - twice.evaluate(x, xi))) < 1e-14


def test_symbol_product_and_derivatives(rng):
    c1 = sp.random_field(4, rng)
    c2 = sp.random_field(3, rng)
    a = sy.symbol(c1, sy.profile_ixi(1))
    b = sy.symbol(c2, sy.profile_jap(-1.0))
    prod = sy.symbol_product(a, b)
    x = sp.grid(41)
    xi = np.array([0.3, -2.0, 11.0])
    assert np.max(np.abs(prod.evaluate(x, xi) - a.evaluate(x, xi) * b.evaluate(x, xi))) < 1e-13
    dx = sy.symbol_x_derivative(a)
    h = 1e-6
    fd = (a.evaluate(x + h, xi) - a.evaluate(x - h, xi)) / (2 * h)
    assert np.max(np.abs(dx.evaluate(x, xi) - fd)) < 1e-6


def test_conj_and_reflect(rng):
    c = sp.random_field(4, rng)
    a = sy.symbol(c, sy.profile_ixi(1))
    x = sp.grid(17)
    xi = np.array([0.7, -1.2, 4.0])
    assert np.max(np.abs(sy.symbol_conj(a).evaluate(x, xi) - np.conj(a.evaluate(x, xi)))) < 1e-13
    assert np.max(np.abs(sy.symbol_reflect_xi(a).evaluate(x, xi) - a.evaluate(x, -xi))) < 1e-13
    refl = sy.symbol_reflect_x(a)
    direct = a.evaluate(-x, xi)
    assert np.max(np.abs(refl.evaluate(x, xi) - direct)) < 1e-12


def test_reality_predicate_diag_constant():
    A = sy.matrix_diag(sy.symbol_x_independent(sy.profile_ixi(2)))
    assert sy.is_reality_preserving(A)
    assert sy.is_parity_preserving(A)


def test_parity_predicate_odd_odd():
    # sin(x) (i xi) is parity preserving: odd times odd
    half = np.sqrt(2 * np.pi) / (2j)
    c = sp.field_from_modes({1: half, -1: -half}, 1)
    A = sy.matrix_diag(sy.symbol(c, sy.profile_ixi(1)))
    assert sy.is_parity_preserving(A)
    # cos(x) (i xi) is not
    ceven = sp.field_from_modes({1: abs(half), -1: abs(half)}, 1)
    B = sy.matrix_diag(sy.symbol(ceven, sy.profile_ixi(1)))
    assert not sy.is_parity_preserving(B)


def test_reality_predicate_violated_by_explicit_lower():
    a = sy.symbol_x_independent(sy.profile_ixi(2))
    bad = sy.SymbolMatrix2(
        a=a,
        b=sy.symbol_zero(),
        explicit_lower=(sy.symbol_zero(), sy.symbol_x_independent(sy.profile_ixi(1))),
    )
    assert not sy.is_reality_preserving(bad)


def test_reversibility_predicate_modulus_squared(rng):
    # A(U) = diag(|u|^2, |u|^2): conj(|u|^2) = |u|^2 and the swap fixes it
    def builder(U):
        dens = sp.multiply_fields([U.plus, sp.conj_field(U.plus)], J_out=2 * U.J)
        return sy.matrix_diag(sy.symbol(dens))

    U = sp.pair_from_plus(sp.random_field(8, rng))
    assert sy.is_reversibility_preserving(builder, U)


def test_reversibility_predicate_violated(rng):
    def builder(U):
        # u^2 alone: conj(u^2) != (conj u)^2 evaluated at SU ... actually it
        # is; break it with an absolute constant times i
        dens = sp.multiply_fields([U.plus, U.plus], J_out=2 * U.J)
        shifted = dens + sp.constant_field(1j, dens.J)
        return sy.matrix_diag(sy.symbol(shifted))

    U = sp.pair_from_plus(sp.random_field(8, rng))
    assert not sy.is_reversibility_preserving(builder, U)
