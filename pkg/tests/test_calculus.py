"""Composition expansion and remainder-order measurements."""

import numpy as np
import pytest

from paranls import calculus as ca
from paranls import quantize as qz
from paranls import spectral as sp
from paranls import symbols as sy
from paranls.errors import MeasurementError

SQ2PI = np.sqrt(2.0 * np.pi)


def cos_symbol(k, profile=None, J=None):
    half = SQ2PI / 2
    return sy.symbol(sp.field_from_modes({k: half, -k: half}, J or k), profile or sy.profile_one())


def test_order_zero_term_is_product(rng):
    a = sy.symbol(sp.random_field(4, rng), sy.profile_ixi(1))
    b = sy.symbol(sp.random_field(3, rng), sy.profile_jap(-1.0))
    t0 = ca.expansion_term(a, b, 0)
    x = sp.grid(33)
    xi = np.linspace(-6, 6, 13)
    assert np.max(np.abs(t0.evaluate(x, xi) - a.evaluate(x, xi) * b.evaluate(x, xi))) < 1e-12


def test_multiplier_composition_exact():
    a = sy.symbol_x_independent(sy.profile_ixi(1))
    comp = ca.compose_expansion(a, a, 2)
    x = sp.grid(9)
    xi = np.linspace(-5, 5, 11)
    expected = sy.symbol_x_independent(sy.profile_ixi(2)).evaluate(x, xi)
    assert np.max(np.abs(comp.evaluate(x, xi) - expected)) < 1e-13


def test_function_sharp_ixi_both_orders(rng):
    # matrix oracle on the unregularized Weyl quantization, no cut-off
    f = sp.random_field(6, rng)
    af = sy.symbol(f)
    bxi = sy.symbol_x_independent(sy.profile_ixi(1))
    J = 24

    lhs = qz.quantize(af, 0.5, J) @ qz.quantize(bxi, 0.5, J)
    closed = sy.symbol_add(sy.symbol(f, sy.profile_ixi(1)), sy.symbol(sp.derivative(f) * (-0.5)))
    assert np.max(np.abs(lhs.entries - qz.quantize(closed, 0.5, J).entries)) <= 1e-12
    assert (
        np.max(np.abs(lhs.entries - qz.quantize(ca.compose_expansion(af, bxi, 1), 0.5, J).entries))
        <= 1e-12
    )

    lhs2 = qz.quantize(bxi, 0.5, J) @ qz.quantize(af, 0.5, J)
    closed2 = sy.symbol_add(sy.symbol(f, sy.profile_ixi(1)), sy.symbol(sp.derivative(f) * (+0.5)))
    assert np.max(np.abs(lhs2.entries - qz.quantize(closed2, 0.5, J).entries)) <= 1e-12


def test_weyl_symmetry_termwise(rng):
    a = sy.symbol(sp.random_field(5, rng), sy.profile_ixi(1))
    b = sy.symbol(sp.random_field(5, rng), sy.profile_jap(1.0))
    x = sp.grid(41)
    xi = np.linspace(-7, 7, 15)
    for k in range(4):
        tk = ca.expansion_term(a, b, k).evaluate(x, xi)
        tk_sw = ca.expansion_term(b, a, k).evaluate(x, xi)
        assert np.max(np.abs(tk_sw - (-1.0) ** k * tk)) < 1e-10


def test_degree_tags_add(rng):
    a = sy.Symbol(sy.symbol(sp.random_field(3, rng)).terms, degree=1)
    b = sy.Symbol(sy.symbol(sp.random_field(3, rng)).terms, degree=2)
    assert ca.compose_expansion(a, b, 1).degree == 3


def test_remainder_zero_for_multipliers(cutoff):
    a = sy.symbol_x_independent(sy.profile_jap(2.0))
    b = sy.symbol_x_independent(sy.profile_jap(-1.0))
    rep = ca.remainder_order(a, b, 1, cutoff, 32)
    assert np.max(np.abs(rep.remainder.entries)) < 1e-12
    assert rep.measured_order == ca.FIT_CAP


def test_remainder_order_first_order_symbols(cutoff):
    a = cos_symbol(1, sy.profile_ixi(1))
    rep = ca.remainder_order(a, a, 3, cutoff, 128)
    assert rep.threshold == pytest.approx(0.0)
    assert rep.measured_order >= 1.0  # expected overshoot of the guarantee
    assert rep.passed


def test_remainder_order_functions(cutoff):
    half = SQ2PI / 2
    a = cos_symbol(1)
    b = sy.symbol(sp.field_from_modes({1: half / 1j, -1: -half / 1j}, 1))  # sin x
    rep = ca.remainder_order(a, b, 2, cutoff, 128)
    assert rep.measured_order >= 1.0


def test_remainder_monotone_in_rho(cutoff):
    a = cos_symbol(1, sy.profile_ixi(1))
    orders = [ca.remainder_order(a, a, rho, cutoff, 96).measured_order for rho in (1, 2, 3)]
    assert orders[1] >= orders[0] - 0.2
    assert orders[2] >= orders[1] - 0.2


def test_report_serialization(cutoff):
    rep = ca.remainder_order(cos_symbol(1), cos_symbol(1), 1, cutoff, 64)
    obj = rep.to_json()
    assert set(obj) == {"rho", "orders", "measured_order", "fit_range", "pass"}


def test_degenerate_fit_range_raises(cutoff):
    a = cos_symbol(1)
    with pytest.raises(MeasurementError):
        ca.remainder_order(a, a, 1, cutoff, 64, lo=10, hi=10)


def test_cutoff_independence_x_independent(cutoff):
    a = sy.symbol_x_independent(sy.profile_ixi(2))
    assert ca.cutoff_independence(a, cutoff, sy.CutoffConfig(0.125), 64) == ca.FIT_CAP


def test_cutoff_independence_decay(cutoff, rng):
    # smooth-coefficient symbol: the cut-off difference is a smoothing
    # operator; coefficient tail <n>^-4 gives a steep measured exponent
    c = sp.random_field(64, rng, decay=4.0)
    a = sy.symbol(c, sy.profile_ixi(2))
    expo = ca.cutoff_independence(a, cutoff, sy.CutoffConfig(0.125), 128)
    assert expo >= 2.0


def test_cutoff_independence_band_location():
    # single high x-mode: the difference lives where the two cut-offs
    # disagree, computable from the plateau/support radii
    k = 8
    half = SQ2PI / 2
    a = sy.symbol(sp.field_from_modes({k: half, -k: half}, k))
    c1, c2 = sy.CutoffConfig(0.25), sy.CutoffConfig(0.125)
    J = 128
    D = (qz.bony_weyl(a, c1, J) - qz.bony_weyl(a, c2, J)).entries
    ks = np.arange(-J, J + 1)
    K, Jm = np.meshgrid(ks, ks, indexing="ij")
    mid = sp.bracket((K + Jm) / 2.0)
    # both chi agree (=1) above k / (delta2/2) and (=0) below k / delta1
    outside = (mid <= k / c1.delta - 1e-9) | (mid >= k / (0.5 * c2.delta) + 1e-9)
    assert np.max(np.abs(D[outside & (np.abs(K - Jm) == k)])) == 0.0
    band = (mid > k / c1.delta) & (mid < k / (0.5 * c2.delta))
    assert np.max(np.abs(D[band & (np.abs(K - Jm) == k)])) > 1e-6
