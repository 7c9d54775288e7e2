"""Quantizations as matrices: identities, adjoints, support, norms."""

import numpy as np
import pytest

from paranls import quantize as qz
from paranls import spectral as sp
from paranls import symbols as sy

SQ2PI = np.sqrt(2.0 * np.pi)


@pytest.mark.parametrize("sigma", [0.0, 0.25, 0.5, 1.0])
def test_identity_symbol(sigma):
    a = sy.symbol_x_independent(sy.profile_one())
    T = qz.quantize(a, sigma, 12)
    assert np.max(np.abs(T.entries - np.eye(25))) == 0.0


@pytest.mark.parametrize("sigma", [0.0, 0.5, 1.0])
def test_ixi_is_diagonal(sigma):
    a = sy.symbol_x_independent(sy.profile_ixi(1))
    T = qz.quantize(a, sigma, 8)
    assert np.max(np.abs(T.entries - np.diag(1j * np.arange(-8, 9)))) < 1e-15


def test_exponential_shifts_modes():
    a = sy.symbol(sp.field_from_modes({1: SQ2PI}, 1))
    T = qz.quantize(a, 1.0, 6)
    expected = np.diag(np.ones(12), -1)
    assert np.max(np.abs(T.entries - expected)) < 1e-15


def test_quantization_linear_in_symbol(rng):
    a = sy.symbol(sp.random_field(5, rng), sy.profile_ixi(1))
    b = sy.symbol(sp.random_field(5, rng), sy.profile_jap(-0.5))
    lhs = qz.quantize(sy.symbol_add(a, b), 0.5, 16)
    rhs = qz.quantize(a, 0.5, 16) + qz.quantize(b, 0.5, 16)
    assert np.max(np.abs(lhs.entries - rhs.entries)) < 1e-14


def test_std_to_weyl_matrix_identity(rng):
    for _ in range(5):
        a = sy.symbol(sp.random_field(7, rng), sy.profile_jap(rng.uniform(-2, 2)))
        T1 = qz.quantize(a, 1.0, 20)
        T2 = qz.quantize(qz.std_to_weyl(a), 0.5, 20)
        assert np.max(np.abs(T1.entries - T2.entries)) <= 1e-13


def test_std_to_weyl_symbol_values():
    # e^{ix}(i xi) converts to coefficient sqrt(2pi) i (xi - 1/2) at mode 1
    a = sy.symbol(sp.field_from_modes({1: SQ2PI}, 1), sy.profile_ixi(1))
    b = qz.std_to_weyl(a)
    for xi in (0.0, 2.0, -3.5):
        val = b.evaluate_scalar(0.0, xi)
        assert abs(val - 1j * (xi - 0.5)) < 1e-14


def test_weyl_round_trip(rng):
    a = sy.symbol(sp.random_field(4, rng), sy.profile_ixi(2))
    back = qz.weyl_to_std(qz.std_to_weyl(a))
    x = sp.grid(17)
    xi = np.linspace(-4, 4, 9)
    assert np.max(np.abs(back.evaluate(x, xi) - a.evaluate(x, xi))) < 1e-13


def test_x_independent_all_sigmas_coincide(rng):
    a = sy.symbol_x_independent(sy.profile_jap(1.3))
    T0 = qz.quantize(a, 0.0, 10)
    T1 = qz.quantize(a, 1.0, 10)
    Th = qz.quantize(a, 0.5, 10)
    assert np.max(np.abs(T0.entries - T1.entries)) == 0.0
    assert np.max(np.abs(T0.entries - Th.entries)) == 0.0


def test_bony_weyl_multiplier_real_diagonal(cutoff):
    a = sy.symbol_x_independent(sy.profile_jap(-2.0))
    T = qz.bony_weyl(a, cutoff, 10)
    assert np.max(np.abs(T.entries - np.diag(np.diag(T.entries)))) == 0.0
    assert np.max(np.abs(T.entries.imag)) == 0.0


def test_bony_weyl_zero_symbol(cutoff):
    T = qz.bony_weyl(sy.symbol_zero(), cutoff, 8)
    assert np.max(np.abs(T.entries)) == 0.0


def test_bony_weyl_support_band(cutoff):
    # entries vanish unless |k-j| <= delta <(k+j)/2>
    half = SQ2PI / 2
    c = sp.field_from_modes({2: half, -2: half, 1: half, -1: half}, 2)
    T = qz.bony_weyl(sy.symbol(c, sy.profile_ixi(2)), cutoff, 32)
    ks = np.arange(-32, 33)
    K, J = np.meshgrid(ks, ks, indexing="ij")
    outside = np.abs(K - J) > cutoff.support_radius((K + J) / 2.0)
    assert np.max(np.abs(T.entries[outside])) == 0.0


def test_adjoint_defect_real_vs_complex(cutoff, rng):
    c = sp.random_field(6, rng, real=True)
    a = sy.symbol(c, sy.PolyJapProfile({(2, 0.0): 1.0, (0, -1.0): 0.3}))
    assert qz.adjoint_defect(a, cutoff, 20) <= 1e-12
    # i xi: conj symbol is -i xi, and the adjoint matches it exactly
    assert qz.adjoint_defect(sy.symbol_x_independent(sy.profile_ixi(1)), cutoff, 20) == 0.0
    a_bad = sy.symbol_add(a, sy.symbol_scale(a, 0.4j))
    T = qz.bony_weyl(a_bad, cutoff, 20)
    assert np.max(np.abs(T.entries - T.adjoint().entries)) > 1e-6


def test_conjugation_defect(cutoff, rng):
    c = sp.random_field(5, rng)
    a = sy.symbol(c, sy.profile_ixi(1))
    assert qz.conjugation_defect(a, cutoff, 16, rng) <= 1e-12


def test_action_norm_identity(cutoff):
    a = sy.symbol_x_independent(sy.profile_one())
    assert abs(qz.action_norm(a, cutoff, 2.0, 0.0, 16) - 1.0) < 1e-12


def test_action_norm_second_order_uniform(cutoff):
    a = sy.symbol_x_independent(sy.profile_ixi(2))
    norms = [qz.action_norm(a, cutoff, 3.0, 2.0, J) for J in (32, 64, 128)]
    assert max(norms) / min(norms) <= 1.05
    assert max(norms) <= 1.0 + 1e-12  # |xi|^2 <= <xi>^2


def test_action_norm_function_bounded(cutoff):
    half = SQ2PI / 2
    c = sp.field_from_modes({1: half, -1: half}, 1)
    a = sy.symbol(c)
    for s in (0.0, 2.0, 4.0):
        norms = [qz.action_norm(a, cutoff, s, 0.0, J) for J in (32, 64, 128)]
        assert max(norms) / min(norms) <= 1.05
    # s-dependence stays mild thanks to the cut-off (measured, not asserted
    # tight): report-style bound
    n0 = qz.action_norm(a, cutoff, 0.0, 0.0, 64)
    n4 = qz.action_norm(a, cutoff, 4.0, 0.0, 64)
    assert n4 / n0 <= 1.25


def test_skew_flow_preserves_h0(cutoff, rng):
    # i x (real multiplier) generates an isometry of H^0; the multiplier is
    # diagonal so its exponential is elementwise
    a = sy.symbol_x_independent(sy.profile_jap(-1.0))
    T = qz.bony_weyl(a, cutoff, 12)
    u = sp.random_field(12, rng)
    flow = np.diag(np.exp(1j * np.diag(T.entries)))
    v = sp.FourierField(flow @ u.coeffs)
    assert abs(sp.sobolev_norm(v, 0.0) - sp.sobolev_norm(u, 0.0)) < 1e-12


def test_block_operator_applies(cutoff, rng):
    A = sy.SymbolMatrix2(
        a=sy.symbol(sp.random_field(4, rng)),
        b=sy.symbol(sp.random_field(4, rng)),
    )
    B = qz.bony_weyl_matrix(A, cutoff, 8)
    U = sp.pair_from_plus(sp.random_field(8, rng))
    out = B.apply(U)
    manual_plus = (
        qz.bony_weyl(A.entry(1, 1), cutoff, 8).apply(U.plus)
        + qz.bony_weyl(A.entry(1, 2), cutoff, 8).apply(U.minus)
    )
    assert np.max(np.abs(out.plus.coeffs - manual_plus.coeffs)) < 1e-14


def test_export_operator(tmp_path, cutoff, rng):
    a = sy.symbol(sp.random_field(3, rng))
    T = qz.bony_weyl(a, cutoff, 6)
    base = str(tmp_path / "op")
    header = qz.export_operator(T, base, 0.5, cutoff.delta, sy.symbol_to_json(a))
    raw = np.fromfile(base + ".bin", dtype="<c16").reshape(13, 13)
    assert np.max(np.abs(raw - T.entries)) == 0.0
    assert header["J"] == 6 and len(header["symbol_hash"]) == 64
