"""Reduction steps: principal diagonalization, lower-order correctors, torus
straightening, order-one elimination, constant-coefficient correction, and
the paracomposition flow.

Each step is an explicit formula verified by an algebraic residual:

* the 2x2 principal matrix E(1+A2) is conjugated to E diag(l+, l+) with
  l+ = sqrt((1+a2)^2 - |b2|^2), by the matrix of eigenvectors;
* the odd corrector d1 = b1 gamma(xi) / (2(1+a2)) cancels the off-diagonal
  order-one term against the anti-commutator with (1+a2)(i xi)^2;
* the diffeomorphism y -> y + gamma(y) with
  gamma' = sqrt((1+c)/(1+a2)) - 1 and the constant c fixed by the circle
  average of 1/sqrt(1+a2) makes (1+a2)(1+gamma')^2 constant;
* s = -dx^-1(a1 / (2(1+c))) removes the order-one diagonal term;
* n0 = dx^-1(mean(a0) - a0) gamma(xi) / (2(1+c)) flattens the order-zero
  term to its x-average;
* the paracomposition flow integrates the transport-type generator
  i Op^BW(beta xi / (1 + tau beta_x)) from tau = 0 to 1.
"""

from dataclasses import dataclass

import numpy as np

from . import quantize as qz
from . import spectral as sp
from . import symbols as sy
from .errors import DegeneracyError, PreconditionError


def _odd_grid(n):
    return n if n % 2 == 1 else n + 1


@dataclass(frozen=True)
class DiagonalizationResult:
    lambda_plus: np.ndarray  # positive eigenvalue on the x-grid
    M_field: np.ndarray  # (n, 2, 2) eigenvector matrices
    M_inv_field: np.ndarray
    grid_n: int

    def inverse_defect(self):
        prod = np.einsum("nij,njk->nik", self.M_field, self.M_inv_field)
        eye = np.eye(2)
        return float(np.max(np.abs(prod - eye)))


def diagonalize_principal(a2, b2, oversample=2):
    """Pointwise diagonalization of E(1 + A2) on the x-grid.

    a2 must be real valued (principal Schrodinger structure); raises on a
    nonpositive radicand (small-data regime violated).
    """
    Jmax = max(a2.J, b2.J)
    n = _odd_grid(oversample * (2 * Jmax + 1))
    a = sp.grid_values(a2, n)
    b = sp.grid_values(b2, n)
    if np.max(np.abs(a.imag)) > 1e-10:
        raise PreconditionError("principal coefficient a2 must be real valued")
    a = a.real
    radicand = (1.0 + a) ** 2 - np.abs(b) ** 2
    if np.min(radicand) <= 0.0:
        raise DegeneracyError("(1+a2)^2 - |b2|^2 must stay positive (fields too large)")
    lam = np.sqrt(radicand)
    m = 1.0 + a + lam
    M = np.empty((n, 2, 2), dtype=complex)
    M[:, 0, 0] = m
    M[:, 0, 1] = -b
    M[:, 1, 0] = -np.conj(b)
    M[:, 1, 1] = m
    M *= 0.5
    det = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
    Minv = np.empty_like(M)
    Minv[:, 0, 0] = M[:, 1, 1] / det
    Minv[:, 0, 1] = -M[:, 0, 1] / det
    Minv[:, 1, 0] = -M[:, 1, 0] / det
    Minv[:, 1, 1] = M[:, 0, 0] / det
    return DiagonalizationResult(lam, M, Minv, n)


def diago_identity_defect(res, a2, b2):
    """sup | M^-1 E (1+A2) M - E diag(l+, l+) | on the grid."""
    n = res.grid_n
    a = sp.grid_values(a2, n).real
    b = sp.grid_values(b2, n)
    EA = np.empty((n, 2, 2), dtype=complex)
    EA[:, 0, 0] = 1.0 + a
    EA[:, 0, 1] = b
    EA[:, 1, 0] = -np.conj(b)
    EA[:, 1, 1] = -(1.0 + a)
    conj = np.einsum("nij,njk,nkl->nil", res.M_inv_field, EA, res.M_field)
    target = np.zeros_like(conj)
    target[:, 0, 0] = res.lambda_plus
    target[:, 1, 1] = -res.lambda_plus
    return float(np.max(np.abs(conj - target)))


def corrector_d1(b1, a2, oversample=2):
    """Order -1 corrector d1 = (b1 / (2 (1 + a2))) gamma(xi)."""
    Jmax = max(b1.J, a2.J)
    n = _odd_grid(oversample * (2 * Jmax + 1))
    a = sp.grid_values(a2, n)
    if np.min(1.0 + a.real) <= 0.0:
        raise DegeneracyError("1 + a2 must stay positive")
    vals = sp.grid_values(b1, n) / (2.0 * (1.0 + a))
    coeff = sp.forward_transform(vals, J=(n - 1) // 2)
    return sy.symbol(coeff, sy.profile_gamma(), degree=1)


def anticommutator_residual(d1, b1, a2, xi_samples=None):
    """sup over |xi| >= 1/2 of  2 d1 (1+a2) (i xi)^2 - b1 (i xi)."""
    if xi_samples is None:
        xi_samples = np.array([0.5, 1.0, 2.0, 5.5, 17.0, 40.0, -3.5, -11.0])
    Jmax = max(b1.J, a2.J)
    n = _odd_grid(4 * (2 * Jmax + 1))
    x = sp.grid(n)
    a_vals = sp.grid_values(a2, n).real
    b_vals = sp.grid_values(b1, n)
    d_vals = d1.evaluate(x, xi_samples)
    lhs = 2.0 * d_vals * (1.0 + a_vals)[:, None] * (1j * xi_samples[None, :]) ** 2
    rhs = b_vals[:, None] * (1j * xi_samples[None, :])
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class StraighteningResult:
    a2_const: float
    gamma_field: sp.FourierField
    beta_field: sp.FourierField
    grid_n: int

    def identity_defect(self, a2, n=None):
        """(1 + a2(y)) (1 + gamma'(y))^2 - (1 + a2_const), sup over the grid."""
        n = n or self.grid_n
        a = sp.grid_values(a2, n).real
        gp = sp.grid_values(sp.derivative(self.gamma_field), n).real
        return float(np.max(np.abs((1.0 + a) * (1.0 + gp) ** 2 - (1.0 + self.a2_const))))


def straighten(a2, oversample=8, newton_tol=1e-13, newton_max=30):
    """Choose the diffeomorphism that makes the principal coefficient constant.

    The constant is fixed by the normalization that forces the primitive's
    integrand to have zero mean, so gamma is periodic by construction; the
    inverse diffeomorphism is computed by pointwise Newton iteration.
    """
    J = a2.J
    n = _odd_grid(oversample * (2 * J + 1))
    a = sp.grid_values(a2, n)
    if np.max(np.abs(a.imag)) > 1e-10:
        raise PreconditionError("a2 must be real valued")
    if sp.parity_defect(a2) > 1e-8:
        raise PreconditionError("a2 must be even in x for the straightening step")
    a = a.real
    if np.min(1.0 + a) <= 0.0:
        raise DegeneracyError("1 + a2 must stay positive")
    inv_sqrt = 1.0 / np.sqrt(1.0 + a)
    sqrt_const = 1.0 / np.mean(inv_sqrt)  # = sqrt(1 + a2_const)
    a2_const = float(sqrt_const**2 - 1.0)
    integrand = sqrt_const * inv_sqrt - 1.0  # zero grid-mean by construction
    g = sp.forward_transform(integrand, J=(n - 1) // 2)
    gamma = sp.antiderivative(g)
    gamma_prime_min = float(np.min(sp.grid_values(sp.derivative(gamma), n).real))
    if 1.0 + gamma_prime_min <= 0.0:
        raise DegeneracyError("diffeomorphism y + gamma(y) is not invertible")

    # invert y + gamma(y) = x at the grid nodes: beta(x) = y - x
    x = sp.grid(n)
    y = x - sp.grid_values(gamma, n).real  # initial guess beta0 = -gamma
    for _ in range(newton_max):
        gy = sp.evaluate_at(gamma, y).real
        gpy = sp.evaluate_at(sp.derivative(gamma), y).real
        step = (y + gy - x) / (1.0 + gpy)
        y = y - step
        if np.max(np.abs(step)) < newton_tol:
            break
    else:
        raise DegeneracyError("Newton inversion of the diffeomorphism did not converge")
    beta = sp.forward_transform(y - x, J=(n - 1) // 2)
    return StraighteningResult(a2_const, gamma, beta, n)


def eliminate_order_one(a1, a2_const, mean_tol=1e-10):
    """s with 2 s_x (1 + a2_const) + a1 = 0; requires mean-zero a1."""
    if abs(sp.mean_value(a1)) > mean_tol:
        raise PreconditionError("order-one coefficient must have zero mean")
    if 1.0 + a2_const <= 0.0:
        raise DegeneracyError("1 + a2_const must be positive")
    return sp.antiderivative(a1) * (-1.0 / (2.0 * (1.0 + a2_const)))


def order_one_residual(s, a1, a2_const):
    r = sp.derivative(s) * (2.0 * (1.0 + a2_const)) + a1
    return float(np.max(np.abs(r.coeffs)))


def symbol_x_mean(a):
    """The x-average of a symbol (term coefficients replaced by their means)."""
    terms = []
    for t in a.terms:
        terms.append(
            sy.SymbolTerm(
                sp.constant_field(sp.mean_value(t.coeff), t.coeff.J), t.profile, t.shift, t.chis
            )
        )
    return sy.Symbol(tuple(terms), degree=a.degree)


def constant_coeff_step(a0, a2_const):
    """Corrector n0 flattening the order-zero symbol to its x-average.

    Termwise: n0 = dx^-1(mean(c) - c) / (2 (1 + a2_const)) * gamma(xi) f(xi)
    for each term c(x) f(xi) of a0.
    """
    if 1.0 + a2_const <= 0.0:
        raise DegeneracyError("1 + a2_const must be positive")
    terms = []
    for t in a0.terms:
        coeff = sp.antiderivative(t.coeff) * (-1.0 / (2.0 * (1.0 + a2_const)))
        profile = sy.profile_product(t.profile, sy.profile_gamma())
        terms.append(sy.SymbolTerm(coeff, profile, t.shift, t.chis))
    return sy.Symbol(tuple(terms), degree=a0.degree)


def constant_coeff_residual(n0, a0, a2_const, xi_samples=None):
    """Residual of 2 (n0)_x (1+a2_const)(i xi) + a0 - mean_x(a0), |xi| >= 1/2."""
    if xi_samples is None:
        xi_samples = np.array([0.5, 1.0, 2.0, 7.0, 19.5, 64.0, -1.5, -33.0])
    J = max(t.coeff.J for t in a0.terms)
    n = _odd_grid(4 * (2 * J + 1))
    x = sp.grid(n)
    n0x = sy.symbol_x_derivative(n0)
    lhs = 2.0 * n0x.evaluate(x, xi_samples) * (1.0 + a2_const) * (1j * xi_samples[None, :])
    rhs = symbol_x_mean(a0).evaluate(x, xi_samples) - a0.evaluate(x, xi_samples)
    return float(np.max(np.abs(lhs - rhs)))


def paracomposition_flow(beta, u, cfg, steps=40):
    """Integrate the paracomposition generator from tau = 0 to 1.

    Classical 4-stage explicit steps in tau; the generator at parameter tau
    is i Op^BW(b(tau, x) xi) with b = beta / (1 + tau beta_x).  For real b
    the generator is skew-adjoint, so the flow is a near-isometry of H^0.
    """
    J = u.J
    beta_x = sp.derivative(beta)
    n = _odd_grid(4 * (2 * beta.J + 1))
    bx_min = float(np.min(sp.grid_values(beta_x, n).real))
    if 1.0 + min(bx_min, 0.0) <= 0.0:
        raise DegeneracyError("1 + tau beta_x must stay positive on [0, 1]")

    def generator(tau):
        vals = sp.grid_values(beta, n) / (1.0 + tau * sp.grid_values(beta_x, n))
        coeff = sp.forward_transform(vals, J=J)
        sym = sy.symbol(coeff, sy.profile_xi())
        return 1j * qz.bony_weyl(sym, cfg, J).entries

    h = 1.0 / steps
    v = u.coeffs.copy()
    G_lo = generator(0.0)
    for k in range(steps):
        tau = k * h
        G_mid = generator(tau + 0.5 * h)
        G_hi = generator(tau + h)
        k1 = G_lo @ v
        k2 = G_mid @ (v + 0.5 * h * k1)
        k3 = G_mid @ (v + 0.5 * h * k2)
        k4 = G_hi @ (v + h * k3)
        v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        G_lo = G_hi
    return sp.FourierField(v)


def reduction_pipeline(f, U, cfg):
    """Run the reduction chain on the paralinearization of f at U.

    Returns per-step constancy and structure defects (the reduce-demo
    surface).  Steps: principal diagonalization, straightening, order-one
    corrector and elimination, order-zero flattening.
    """
    from . import paralin as pl

    para = pl.paralinearize(f, U, cfg)
    a2, b2 = para.diag_coeffs[2], para.off_coeffs[2]
    a1, b1 = para.diag_coeffs[1], para.off_coeffs[1]
    a0 = para.diag_coeffs[0]

    report = {"a2_imag_max": para.a2_imag_max}

    diag = diagonalize_principal(a2, b2)
    report["diago_inverse_defect"] = diag.inverse_defect()
    report["diago_identity_defect"] = diago_identity_defect(diag, a2, b2)

    lam_field = sp.forward_transform(diag.lambda_plus.astype(complex), J=(diag.grid_n - 1) // 2)
    a2_new = lam_field - sp.constant_field(1.0, lam_field.J)

    d1 = corrector_d1(b1, a2_new)
    report["d1_anticommutator_residual"] = anticommutator_residual(d1, b1, a2_new)

    st = straighten(a2_new)
    report["a2_const"] = st.a2_const
    report["straightening_identity_defect"] = st.identity_defect(a2_new)
    report["gamma_mean"] = abs(sp.mean_value(st.gamma_field))

    s = eliminate_order_one(a1 - sp.constant_field(sp.mean_value(a1), a1.J), st.a2_const)
    report["order_one_residual"] = order_one_residual(
        s, a1 - sp.constant_field(sp.mean_value(a1), a1.J), st.a2_const
    )

    n0 = constant_coeff_step(sy.symbol(a0), st.a2_const)
    report["order_zero_residual"] = constant_coeff_residual(n0, sy.symbol(a0), st.a2_const)
    return report
