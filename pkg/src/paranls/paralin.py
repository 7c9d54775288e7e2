"""Paraproduct decomposition of pointwise products and the paralinearization
of the polynomial nonlinearity.

A product of p fields splits as

    u_1 ... u_p = sum_i M_i + M^Theta,

where M_i collects the mode tuples in which the i-th factor carries almost
all the frequency (weight chi(|n'|_2 / <n_i>), the joint cut-off realized
through the euclidean norm of the other modes), and M^Theta the balanced
tuples (weight Theta = 1 - sum_i chi_i).  The split telescopes exactly, and
on balanced tuples the second-largest mode is comparable to the largest,
which is what makes M^Theta smoothing.

The paralinearization writes (f(u,u_x,u_xx), conj f) as a paradifferential
matrix applied to (u, conj u) plus a remainder; the coefficient of (i xi)^d
on the diagonal is the Wirtinger derivative of f with respect to the d-th
derivative slot, and on the off-diagonal the conjugate-slot derivative.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import model as md
from . import quantize as qz
from . import spectral as sp
from . import symbols as sy
from ._accel import njit_or_plain, numba_enabled
from .errors import DimensionError, HypothesisError, MeasurementError, RangeError


def chi_leave_one_out(p, nvec, i, cfg):
    """chi_(p-1) applied to the tuple with the i-th entry left out, at xi = n_i."""
    others = np.array([nvec[j] for j in range(p) if j != i], dtype=float)
    return float(cfg(np.linalg.norm(others), nvec[i]))


def theta_cutoff(p, nvec, cfg):
    """Theta(n_1..n_p) = 1 - sum_i chi_i; zero when one factor dominates."""
    if p < 2:
        raise RangeError("paraproducts need p >= 2 factors")
    if len(nvec) != p:
        raise RangeError("tuple length must equal p")
    return 1.0 - sum(chi_leave_one_out(p, nvec, i, cfg) for i in range(p))


# ---------------------------------------------------------------------------
# Hot kernel: accumulation of the para parts over coefficient-mode tuples
# ---------------------------------------------------------------------------


@njit_or_plain
def _chi_scalar(r, delta):
    # smooth step between the plateau r <= delta/2 and the support edge delta
    if r <= 0.5 * delta:
        return 1.0
    if r >= delta:
        return 0.0
    s = (delta - r) / (0.5 * delta)
    a = math.exp(-1.0 / s)
    b = math.exp(-1.0 / (1.0 - s))
    return a / (a + b)


@njit_or_plain
def _para_part_kernel(tuple_modes, tuple_norms, coeff_mats, target, J, J_out, delta, nf):
    T, q = tuple_modes.shape
    out = np.zeros(2 * J_out + 1, dtype=np.complex128)
    nsig = 1 << q
    for t in range(T):
        nrm = tuple_norms[t]
        for smask in range(nsig):
            c = 1.0 + 0.0j
            msum = 0
            ok = True
            for j in range(q):
                n = tuple_modes[t, j]
                if (smask >> j) & 1:
                    if n == 0:
                        ok = False
                        break
                    c *= coeff_mats[j, -n + J]
                    msum -= n
                else:
                    c *= coeff_mats[j, n + J]
                    msum += n
            if not ok or c == 0.0:
                continue
            for ni in range(J + 1):
                w = _chi_scalar(nrm / math.sqrt(1.0 + ni * ni), delta)
                if w == 0.0:
                    continue
                for sgn in range(2):
                    if ni == 0 and sgn == 1:
                        continue
                    mode_i = -ni if sgn == 1 else ni
                    tc = target[mode_i + J]
                    if tc == 0.0:
                        continue
                    out[msum + mode_i + J_out] += w * c * tc * nf
    return out


def _para_part_numpy(tuple_modes, tuple_norms, coeff_mats, target, J, J_out, delta, nf):
    out = np.zeros(2 * J_out + 1, dtype=np.complex128)
    ni = np.arange(J + 1)
    chi_cache = {}
    T, q = tuple_modes.shape
    for t in range(T):
        nrm = tuple_norms[t]
        w = chi_cache.get(nrm)
        if w is None:
            w = np.array([_chi_scalar(nrm / math.sqrt(1.0 + k * k), delta) for k in ni])
            chi_cache[nrm] = w
        for smask in range(1 << q):
            c = 1.0 + 0.0j
            msum = 0
            ok = True
            for j in range(q):
                n = tuple_modes[t, j]
                if (smask >> j) & 1:
                    if n == 0:
                        ok = False
                        break
                    c *= coeff_mats[j, -n + J]
                    msum -= n
                else:
                    c *= coeff_mats[j, n + J]
                    msum += n
            if not ok or c == 0.0:
                continue
            vals_pos = w * c * nf * target[ni + J]
            np.add.at(out, msum + ni + J_out, vals_pos)
            vals_neg = w[1:] * c * nf * target[J - ni[1:]]
            np.add.at(out, msum - ni[1:] + J_out, vals_neg)
    return out


def _ball_tuples(q, J, rmax):
    """Nonnegative integer q-tuples with euclidean norm < rmax (entries <= J)."""
    limit = min(J, int(math.floor(rmax)))
    axes = [np.arange(limit + 1)] * q
    grids = np.meshgrid(*axes, indexing="ij")
    modes = np.stack([g.ravel() for g in grids], axis=1)
    norms = np.sqrt(np.sum(modes.astype(float) ** 2, axis=1))
    keep = norms < rmax
    return modes[keep].astype(np.int64), norms[keep]


def para_part(fields, i, cfg, J_out=None):
    """M_i: the paraproduct term in which the i-th factor is the high one."""
    p = len(fields)
    J = fields[0].J
    if any(f.J != J for f in fields):
        raise DimensionError("paraproduct factors must share the truncation J")
    if J_out is None:
        J_out = p * J
    coeffs = [f for j, f in enumerate(fields) if j != i]
    target = fields[i]
    modes, norms = _ball_tuples(p - 1, J, cfg.support_radius(J))
    coeff_mats = np.stack([f.coeffs for f in coeffs], axis=0)
    nf = (2.0 * np.pi) ** (-(p - 1) / 2.0)
    kernel = _para_part_kernel if numba_enabled() else _para_part_numpy
    out = kernel(modes, norms, coeff_mats, target.coeffs, J, J_out, cfg.delta, nf)
    return sp.FourierField(out)


@dataclass(frozen=True)
class ParaproductSplit:
    para_parts: tuple
    remainder_part: sp.FourierField
    p: int
    J: int
    cfg: object

    def total(self):
        s = self.remainder_part
        for m in self.para_parts:
            s = s + m
        return s


def paraproduct_split(fields, cfg):
    """Split the exact product into p para parts and the balanced remainder.

    The remainder is the telescoped complement, so the sum identity holds to
    rounding by construction; the content is that each M_i coincides with a
    paradifferential operator acting on the i-th factor and that the
    remainder only sees balanced tuples.
    """
    fields = list(fields)
    p = len(fields)
    if p < 2:
        raise RangeError("paraproducts need p >= 2 factors")
    J = fields[0].J
    J_out = p * J
    product = sp.multiply_fields(fields, J_out=J_out)
    parts = tuple(para_part(fields, i, cfg, J_out) for i in range(p))
    rem = product
    for m in parts:
        rem = rem - m
    return ParaproductSplit(parts, rem, p, J, cfg)


def split_sum_defect(split, fields):
    """Relative defect of sum(M_i) + M^Theta against the exact product."""
    product = sp.multiply_fields(list(fields), J_out=split.p * split.J)
    diff = split.total() - product
    scale = max(float(np.max(np.abs(product.coeffs))), 1e-300)
    return float(np.max(np.abs(diff.coeffs))) / scale


def multilinear_bony_matrix(coeff_fields, cfg, J_op):
    """Dense square matrix of u -> M_i(coeffs..., u) on modes -J_op..J_op.

    Entry (k, j) sums chi(|n'|_2 / <j>) weighted coefficient products over
    the coefficient-mode tuples; for a single coefficient factor this is the
    standard Bony quantization of that function.  Apply it to the target
    field padded to J_op.
    """
    q = len(coeff_fields)
    Jc = coeff_fields[0].J
    modes, norms = _ball_tuples(q, Jc, cfg.support_radius(J_op))
    nf = (2.0 * np.pi) ** (-q / 2.0)
    n_op = 2 * J_op + 1
    A = np.zeros((n_op, n_op), dtype=complex)
    js = np.arange(-J_op, J_op + 1)
    for t in range(modes.shape[0]):
        nrm = norms[t]
        w = np.array([_chi_scalar(nrm / math.sqrt(1.0 + float(j) ** 2), cfg.delta) for j in js])
        if not np.any(w):
            continue
        for smask in range(1 << q):
            c = 1.0 + 0.0j
            msum = 0
            ok = True
            for j in range(q):
                n = modes[t, j]
                if (smask >> j) & 1:
                    if n == 0:
                        ok = False
                        break
                    c *= coeff_fields[j].coeff(-n)
                    msum -= n
                else:
                    c *= coeff_fields[j].coeff(n)
                    msum += n
            if not ok or c == 0.0:
                continue
            keep = np.abs(js + msum) <= J_op
            A[js[keep] + msum + J_op, js[keep] + J_op] += w[keep] * c * nf
    return qz.OperatorMatrix(A)


def remainder_smoothing(split, rng, n_random=2000, theta_floor=1e-9):
    """Smallest max2<n>/max<n> over sampled tuples with nonzero Theta.

    On the support of Theta no factor dominates, so the ratio is bounded
    below by about delta/(2 sqrt(p-1)); the conventional pass level is
    delta/4.
    """
    p, J, cfg = split.p, split.J, split.cfg
    small = min(J, 12)
    tuples = {tuple(t) for t in np.stack(np.meshgrid(*[np.arange(small + 1)] * p), -1).reshape(-1, p)}
    tuples.update(tuple(rng.integers(0, J + 1, size=p)) for _ in range(n_random))
    best = None
    support = 0
    for nvec in tuples:
        if theta_cutoff(p, nvec, cfg) <= theta_floor:
            continue
        support += 1
        br = sp.bracket(np.array(nvec))
        order = np.sort(br)
        ratio = float(order[-2] / order[-1])
        best = ratio if best is None else min(best, ratio)
    if support == 0:
        raise MeasurementError("Theta support is empty on the sampled tuples")
    return best


# ---------------------------------------------------------------------------
# Paralinearization of the nonlinearity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Paralinearization:
    J: int
    cfg: object
    diag_coeffs: tuple  # d f / d z_d at (u, u_x, u_xx), d = 0, 1, 2
    off_coeffs: tuple  # d f / d conj(z_d)
    matrices: tuple  # SymbolMatrix2 for orders 0, 1, 2 (standard symbols)
    matrices_weyl: tuple  # same after conversion to Weyl
    op_plus_u: qz.OperatorMatrix
    op_plus_conj: qz.OperatorMatrix
    op_minus_u: qz.OperatorMatrix
    op_minus_conj: qz.OperatorMatrix
    structure_defects: dict

    def apply_para(self, V):
        """Op^B(B)[V] for the stored coefficient matrices."""
        plus = self.op_plus_u.entries @ V.plus.coeffs + self.op_plus_conj.entries @ V.minus.coeffs
        minus = self.op_minus_u.entries @ V.plus.coeffs + self.op_minus_conj.entries @ V.minus.coeffs
        return sp.PairField(sp.FourierField(plus), sp.FourierField(minus))

    def remainder_apply(self, V, f):
        """Exact complement (f(V), conj f)^T - Op^B(B)[V] (the split closure)."""
        return md.nonlinear_term(V, f) - self.apply_para(V)

    @property
    def a2_imag_max(self):
        """Pointwise imaginary part of the principal coefficient field."""
        return float(np.max(np.abs(sp.grid_values(self.diag_coeffs[2]).imag)))


def _coeff_fields(f, U, J_coeff):
    """Wirtinger-derivative coefficient fields of f at (u, u_x, u_xx)."""
    u = U.plus
    n = md.dealias_grid_size(u.J, max(f.qbar, 2))
    z0 = sp.grid_values(u, n)
    z1 = sp.grid_values(sp.derivative(u, 1), n)
    z2 = sp.grid_values(sp.derivative(u, 2), n)
    diag, off = [], []
    for d in range(3):
        diag.append(sp.forward_transform(md.evaluate_monomial_terms(f.wirtinger(d), z0, z1, z2), J=J_coeff))
        off.append(
            sp.forward_transform(
                md.evaluate_monomial_terms(f.wirtinger(d, conjugate=True), z0, z1, z2), J=J_coeff
            )
        )
    return tuple(diag), tuple(off)


def coefficient_matrices(f, U, J_coeff=None):
    """The three reality-structured coefficient matrices A_d(U;x), d = 0,1,2."""
    if J_coeff is None:
        J_coeff = max(1, (max(f.qbar, 2) - 1)) * U.J
    diag, off = _coeff_fields(f, U, J_coeff)
    mats = tuple(
        sy.SymbolMatrix2(
            a=sy.symbol(diag[d], sy.profile_ixi(d) if d else sy.profile_one()),
            b=sy.symbol(off[d], sy.profile_ixi(d) if d else sy.profile_one()),
        )
        for d in range(3)
    )
    return diag, off, mats


def symmetrize_reversibility(builder, U):
    """Lemma-style symmetrization: average the builder at U and SU.

    Returns the symmetrized matrices plus the defect before and after; a
    builder that already satisfies the autonomous reversibility-preserving
    identity is left unchanged to rounding.
    """
    before = sy.reversibility_defect(builder, U)
    A_U = builder(U)
    A_SU = builder(sp.apply_involution(U))

    def half(sym_U, sym_SU):
        mirrored = sy.symbol_conj(sy.symbol_reflect_xi(sym_SU))
        return sy.symbol_scale(sy.symbol_add(sym_U, mirrored), 0.5)

    sym = sy.SymbolMatrix2(a=half(A_U.a, A_SU.a), b=half(A_U.b, A_SU.b))

    def sym_builder(V):
        B_V = builder(V)
        B_SV = builder(sp.apply_involution(V))
        return sy.SymbolMatrix2(a=half(B_V.a, B_SV.a), b=half(B_V.b, B_SV.b))

    after = sy.reversibility_defect(sym_builder, U)
    return sym, before, after


def paralinearize(f, U, cfg, predicate_tol=1e-10):
    """Paralinearize the nonlinearity at the state U.

    The para operators use the standard (Bony) quantization, mirroring the
    construction route; ``matrices_weyl`` carries the Weyl-converted symbols
    on which the structure predicates are evaluated.  When a predicate fails
    beyond tolerance the reversibility symmetrization is applied and both
    defects are recorded in ``structure_defects``.
    """
    if not md.validate_hypothesis(f).ok:
        raise HypothesisError("paralinearization requires a hypothesis-satisfying f")
    J = U.J
    diag, off, mats = coefficient_matrices(f, U)

    def op_of(field, d):
        return qz.bony_std(sy.symbol(field, sy.profile_ixi(d) if d else sy.profile_one()), cfg, J)

    zero = qz.OperatorMatrix(np.zeros((2 * J + 1, 2 * J + 1), dtype=complex))
    op_pu, op_pc, op_mu, op_mc = zero, zero, zero, zero
    for d in range(3):
        op_pu = op_pu + op_of(diag[d], d)
        op_pc = op_pc + op_of(off[d], d)
        op_mu = op_mu + op_of(sp.conj_field(off[d]), d)
        op_mc = op_mc + op_of(sp.conj_field(diag[d]), d)

    mats_weyl = []
    defects = {}
    for d in range(3):
        Aw = sy.SymbolMatrix2(a=qz.std_to_weyl(mats[d].a), b=qz.std_to_weyl(mats[d].b))
        defects[f"reality_order_{d}"] = sy.reality_defect(Aw)
        defects[f"parity_order_{d}"] = sy.parity_defect_matrix(Aw)
        mats_weyl.append(Aw)

    def weyl_builder(V):
        _, _, m = coefficient_matrices(f, V)
        # total Weyl symbol matrix, all orders combined
        a_tot = None
        b_tot = None
        for d in range(3):
            aw = qz.std_to_weyl(m[d].a)
            bw = qz.std_to_weyl(m[d].b)
            a_tot = aw if a_tot is None else sy.symbol_add(a_tot, aw)
            b_tot = bw if b_tot is None else sy.symbol_add(b_tot, bw)
        return sy.SymbolMatrix2(a=a_tot, b=b_tot)

    defects["reversibility_total"] = sy.reversibility_defect(weyl_builder, U)
    if defects["reversibility_total"] > predicate_tol:
        _, before, after = symmetrize_reversibility(weyl_builder, U)
        defects["reversibility_before_symmetrization"] = before
        defects["reversibility_after_symmetrization"] = after

    return Paralinearization(
        J=J,
        cfg=cfg,
        diag_coeffs=diag,
        off_coeffs=off,
        matrices=mats,
        matrices_weyl=tuple(mats_weyl),
        op_plus_u=op_pu,
        op_plus_conj=op_pc,
        op_minus_u=op_mu,
        op_minus_conj=op_mc,
        structure_defects=defects,
    )


def reconstruction_residual(para, f, U):
    """sup-mode residual of Op^B(B)U + R(U)U = (f, conj f)^T (exact closure)."""
    rec = para.apply_para(U) + para.remainder_apply(U, f)
    truth = md.nonlinear_term(U, f)
    return float(
        max(
            np.max(np.abs(rec.plus.coeffs - truth.plus.coeffs)),
            np.max(np.abs(rec.minus.coeffs - truth.minus.coeffs)),
        )
    )
