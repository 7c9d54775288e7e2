"""Paraproduct splits and the paralinearization of the nonlinearity."""

import numpy as np
import pytest

from paranls import model as md
from paranls import paralin as pl
from paranls import quantize as qz
from paranls import spectral as sp
from paranls import symbols as sy
from paranls._accel import numba_enabled, set_numba_enabled
from paranls.errors import HypothesisError, MeasurementError

SQ2PI = np.sqrt(2.0 * np.pi)


def test_theta_dominant_factor(cutoff):
    assert pl.theta_cutoff(3, (100, 1, 1), cutoff) == 0.0
    assert pl.theta_cutoff(3, (1, 100, 1), cutoff) == 0.0


def test_theta_balanced(cutoff):
    assert pl.theta_cutoff(3, (5, 5, 5), cutoff) == 1.0


def test_theta_partition_identity(cutoff, rng):
    for _ in range(50):
        nvec = tuple(int(v) for v in rng.integers(0, 40, size=3))
        theta = pl.theta_cutoff(3, nvec, cutoff)
        chis = sum(pl.chi_leave_one_out(3, nvec, i, cutoff) for i in range(3))
        assert abs(1.0 - theta - chis) < 1e-15


def test_theta_vanishes_when_l1_dominates(cutoff, rng):
    # paper-level support statement, away from the all-zero corner
    for _ in range(100):
        nvec = [int(v) for v in rng.integers(0, 8, size=2)]
        big = int(8 * (sum(nvec) + 1) / cutoff.delta)
        i = int(rng.integers(0, 3))
        nvec.insert(i, big)
        assert pl.theta_cutoff(3, tuple(nvec), cutoff) == 0.0


@pytest.mark.parametrize("p", [2, 3, 4])
def test_split_sum_identity(p, cutoff, rng):
    fields = [sp.random_field(32, rng, decay=1.2) for _ in range(p)]
    split = pl.paraproduct_split(fields, cutoff)
    assert pl.split_sum_defect(split, fields) < 1e-12


def test_split_constant_factor(cutoff):
    # p=2 with u1 = 1: the whole product is the para part on the u2 side
    # (the constant coefficient sits on the chi plateau for every n2)
    one = sp.constant_field(1.0, 8)
    u2 = sp.field_from_modes({3: 1.0, -3: 1.0, 1: 0.5, -1: 0.5}, 8)
    split = pl.paraproduct_split([one, u2], cutoff)
    assert pl.split_sum_defect(split, [one, u2]) < 1e-14
    assert np.max(np.abs(split.para_parts[1].coeffs - u2.with_truncation(16).coeffs)) < 1e-14
    assert np.max(np.abs(split.para_parts[0].coeffs)) == 0.0
    assert np.max(np.abs(split.remainder_part.coeffs)) < 1e-15


def test_split_frequency_separated_pair(cutoff):
    # cos(x) vs cos(32x): fully paradifferential, no balanced remainder
    half = SQ2PI / 2
    u1 = sp.field_from_modes({1: half, -1: half}, 32)
    u2 = sp.field_from_modes({32: half, -32: half}, 32)
    split = pl.paraproduct_split([u1, u2], cutoff)
    product = sp.multiply_fields([u1, u2], J_out=64)
    assert np.max(np.abs(split.remainder_part.coeffs)) < 1e-15
    assert np.max(np.abs(split.para_parts[1].coeffs - product.coeffs)) < 1e-14


def test_para_part_backends_agree(cutoff, rng):
    fields = [sp.random_field(24, rng) for _ in range(3)]
    if not numba_enabled():
        pytest.skip("numba backend unavailable")
    fast = pl.para_part(fields, 0, cutoff)
    prev = set_numba_enabled(False)
    try:
        slow = pl.para_part(fields, 0, cutoff)
    finally:
        set_numba_enabled(prev)
    assert np.max(np.abs(fast.coeffs - slow.coeffs)) < 1e-13


def test_para_part_is_bony_quantization_p2(cutoff, rng):
    u1, u2 = sp.random_field(24, rng), sp.random_field(24, rng)
    split = pl.paraproduct_split([u1, u2], cutoff)
    T = qz.bony_std(sy.symbol(u1), cutoff, 48)
    oracle = T.apply(u2.with_truncation(48))
    assert np.max(np.abs(oracle.coeffs - split.para_parts[1].coeffs)) < 1e-13


def test_para_part_is_multilinear_quantization_p3(cutoff, rng):
    fields = [sp.random_field(12, rng) for _ in range(3)]
    split = pl.paraproduct_split(fields, cutoff)
    A = pl.multilinear_bony_matrix(fields[:2], cutoff, 36)
    oracle = A.apply(fields[2].with_truncation(36))
    assert np.max(np.abs(oracle.coeffs - split.para_parts[2].coeffs)) < 1e-13


def test_momentum_support_of_remainder(cutoff, rng):
    # the remainder of a product of single projections lives on modes
    # sum sigma_j n_j only
    u1 = sp.field_from_modes({3: 1.0, -3: 0.5}, 8)
    u2 = sp.field_from_modes({5: 1.0, -5: 2.0}, 8)
    split = pl.paraproduct_split([u1, u2], cutoff)
    allowed = {8, 2, -2, -8}
    for m in split.remainder_part.modes:
        if m not in allowed:
            assert abs(split.remainder_part.coeff(m)) == 0.0


def test_remainder_smoothing_ratio(cutoff, rng):
    fields = [sp.random_field(24, rng) for _ in range(3)]
    split = pl.paraproduct_split(fields, cutoff)
    ratio = pl.remainder_smoothing(split, rng)
    assert ratio >= cutoff.delta / 4.0


def test_remainder_smoothing_balanced_tuple(cutoff):
    assert abs(pl.theta_cutoff(3, (8, 8, 8), cutoff) - 1.0) < 1e-15
    br = sp.bracket(np.array([8, 8, 8]))
    assert np.sort(br)[-2] / np.sort(br)[-1] == 1.0


def test_remainder_smoothing_empty_support(cutoff):
    class ZeroSplit:
        p, J, cfg = 2, 0, cutoff

    with pytest.raises(MeasurementError):
        pl.remainder_smoothing(ZeroSplit(), np.random.default_rng(0), n_random=4, theta_floor=10.0)


def test_paralinearize_gauge_cubic(cutoff, rng):
    u = 0.1 * sp.random_field(20, rng, decay=2.5, even=True)
    U = sp.pair_from_plus(u)
    para = pl.paralinearize(md.CUBIC_GAUGE, U, cutoff)
    n = md.dealias_grid_size(20, 3)
    uv = sp.grid_values(u, n)
    # A2 = A1 = 0; diagonal of A0 is 2|u|^2; off-diagonal is u^2
    assert np.max(np.abs(sp.grid_values(para.diag_coeffs[2], n))) < 1e-14
    assert np.max(np.abs(sp.grid_values(para.diag_coeffs[1], n))) < 1e-14
    assert np.max(np.abs(sp.grid_values(para.diag_coeffs[0], n) - 2 * np.abs(uv) ** 2)) < 1e-13
    assert np.max(np.abs(sp.grid_values(para.off_coeffs[0], n) - uv**2)) < 1e-13
    assert pl.reconstruction_residual(para, md.CUBIC_GAUGE, U) <= 1e-11


def test_paralinearize_fully_nonlinear_a2(cutoff, rng):
    u = 0.1 * sp.random_field(16, rng, decay=2.5, even=True)
    U = sp.pair_from_plus(u)
    para = pl.paralinearize(md.CUBIC_FULLY_NONLINEAR, U, cutoff)
    n = md.dealias_grid_size(16, 3)
    uv = sp.grid_values(u, n)
    assert para.a2_imag_max <= 1e-12
    assert np.max(np.abs(sp.grid_values(para.diag_coeffs[2], n) - np.abs(uv) ** 2)) < 1e-13
    assert pl.reconstruction_residual(para, md.CUBIC_FULLY_NONLINEAR, U) <= 1e-11


def test_paralinearize_zero_state(cutoff):
    U = sp.pair_from_plus(sp.zero_field(8))
    para = pl.paralinearize(md.CUBIC_GAUGE, U, cutoff)
    for d in range(3):
        assert np.max(np.abs(para.diag_coeffs[d].coeffs)) == 0.0
    zero_rem = para.remainder_apply(U, md.CUBIC_GAUGE)
    assert np.max(np.abs(zero_rem.plus.coeffs)) == 0.0


def test_paralinearize_requires_hypothesis(cutoff, rng):
    bad = md.Nonlinearity((md.Monomial((1, 0, 1), (0, 0, 0), 1.0),))
    with pytest.raises(HypothesisError):
        pl.paralinearize(bad, sp.pair_from_plus(sp.random_field(4, rng)), cutoff)


def test_paralinearized_matrices_structure(cutoff, rng):
    u = 0.1 * sp.random_field(16, rng, decay=2.5, even=True)
    U = sp.pair_from_plus(u)
    para = pl.paralinearize(md.CUBIC_FULLY_NONLINEAR, U, cutoff)
    assert max(
        para.structure_defects[f"reality_order_{d}"] for d in range(3)
    ) <= 1e-10
    assert max(
        para.structure_defects[f"parity_order_{d}"] for d in range(3)
    ) <= 1e-10
    assert para.structure_defects["reversibility_total"] <= 1e-10


def test_paralinearized_vector_field_reversible(cutoff, rng):
    # X(U) = iE(Lambda U + Op^B(B)U + R(U)U) coincides with the model rhs by
    # the exact closure, so reversibility transfers; check the para part
    # alone transforms correctly under the involution
    u = 0.1 * sp.random_field(12, rng, decay=2.0, even=True)
    U = sp.pair_from_plus(u)
    params = md.PotentialParams(np.array([0.2, -0.3]))
    f = md.CUBIC_GAUGE
    X = md.rhs(U, params, f)
    X_S = md.rhs(sp.apply_involution(U), params, f)
    assert np.max(np.abs(sp.apply_involution(X).plus.coeffs + X_S.plus.coeffs)) < 1e-11


def test_symmetrization_no_op_for_good_builder(cutoff, rng):
    u = 0.1 * sp.random_field(10, rng, decay=2.0, even=True)
    U = sp.pair_from_plus(u)

    def builder(V):
        _, _, mats = pl.coefficient_matrices(md.CUBIC_GAUGE, V)
        return mats[0]

    sym, before, after = pl.symmetrize_reversibility(builder, U)
    assert before <= 1e-12
    assert after <= 1e-12


def test_symmetrization_repairs_bad_builder(rng):
    u = 0.1 * sp.random_field(8, rng, decay=2.0, even=True)
    U = sp.pair_from_plus(u)

    def bad_builder(V):
        # u^2 + i: the absolute imaginary constant breaks the identity
        dens = sp.multiply_fields([V.plus, sp.conj_field(V.plus)], J_out=2 * V.J)
        return sy.matrix_diag(sy.symbol(dens + sp.constant_field(0.3j, dens.J)))

    sym, before, after = pl.symmetrize_reversibility(bad_builder, U)
    assert before > 1e-3
    assert after <= 1e-12
