"""Convolution potential, linear frequencies, nonlinearity structure, and the
right-hand side of the vector Schrodinger system.

The model is

    i u_t + u_xx + P * u + f(u, u_x, u_xx) = 0,        x on the circle,

recast on the pair U = (u, conj u) as U' = i E [Lambda U + (f, conj f)^T],
with E = diag(1, -1) and Lambda the Fourier multiplier with eigenvalues
lambda_j = -j^2 + p(j).  The convolution potential is diagonal on modes,

    p(j) = sum_{k=1..M} m_k / <j>^(2k+1),

with the modulation vector m in the box [-1/2, 1/2]^M.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import spectral as sp
from .errors import HypothesisError, RangeError

# polynomial structure required of f(z0, z1, z2):
#   1. parity:       f(z0, z1, z2) = f(z0, -z1, z2)
#   2. Schrodinger:  d f / d z2 is real valued
#   3. reversible:   f(z0, z1, z2) = conj(f(conj z0, conj z1, conj z2))


@dataclass(frozen=True)
class PotentialParams:
    """Modulation vector m = (m_1, ..., m_M), each entry in [-1/2, 1/2]."""

    m: np.ndarray

    def __post_init__(self):
        arr = np.atleast_1d(np.asarray(self.m, dtype=float))
        if arr.size < 1:
            raise RangeError("potential needs M >= 1 parameters")
        if np.any(np.abs(arr) > 0.5):
            raise RangeError("potential parameters must lie in [-1/2, 1/2]")
        arr.flags.writeable = False
        object.__setattr__(self, "m", arr)

    @property
    def M(self):
        return self.m.size


def random_params(M, rng):
    return PotentialParams(rng.uniform(-0.5, 0.5, size=M))


def potential_coeff(params, j):
    """Fourier coefficient p(j) = sum_k m_k / <j>^(2k+1); even in j."""
    br = np.asarray(sp.bracket(j))
    ks = np.arange(1, params.M + 1)
    terms = br[..., None] ** (-(2.0 * ks + 1.0))
    out = terms @ params.m
    return float(out) if np.ndim(j) == 0 else out


def frequency(params, j):
    """lambda_j = (i j)^2 + p(j) = -j^2 + p(j)."""
    j_arr = np.asarray(j, dtype=float)
    out = -(j_arr**2) + potential_coeff(params, j)
    return float(out) if np.ndim(j) == 0 else out


def frequencies_upto(params, J):
    """Array of lambda_j for j = -J..J (even in j)."""
    return frequency(params, np.arange(-J, J + 1))


@dataclass(frozen=True)
class Monomial:
    """C * z0^a0 conj(z0)^b0 z1^a1 conj(z1)^b1 z2^a2 conj(z2)^b2."""

    alpha: tuple
    beta: tuple
    C: complex

    def __post_init__(self):
        a = tuple(int(x) for x in self.alpha)
        b = tuple(int(x) for x in self.beta)
        if len(a) != 3 or len(b) != 3 or min(a + b) < 0:
            raise RangeError("monomial exponents must be 3 nonnegative integers each")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "C", complex(self.C))

    @property
    def degree(self):
        return sum(self.alpha) + sum(self.beta)


@dataclass(frozen=True)
class Nonlinearity:
    """Polynomial nonlinearity as a list of monomials, degrees in [2, qbar]."""

    monomials: tuple
    label: str = field(default="", compare=False)

    def __post_init__(self):
        mono = tuple(
            m if isinstance(m, Monomial) else Monomial(*m) for m in self.monomials
        )
        for m in mono:
            if m.degree < 2:
                raise RangeError("monomials must vanish at second order at the origin")
        object.__setattr__(self, "monomials", mono)

    @property
    def qbar(self):
        return max((m.degree for m in self.monomials), default=2)

    def evaluate(self, z0, z1, z2):
        """Pointwise evaluation on (arrays of) complex arguments."""
        out = np.zeros(np.broadcast(z0, z1, z2).shape, dtype=complex)
        zc0, zc1, zc2 = np.conj(z0), np.conj(z1), np.conj(z2)
        for m in self.monomials:
            a, b = m.alpha, m.beta
            out += m.C * z0**a[0] * zc0**b[0] * z1**a[1] * zc1**b[1] * z2**a[2] * zc2**b[2]
        return out

    def wirtinger(self, slot, conjugate=False):
        """Monomial list of d f / d z_slot (or d f / d conj(z_slot))."""
        terms = []
        for m in self.monomials:
            a, b = list(m.alpha), list(m.beta)
            exps = b if conjugate else a
            if exps[slot] == 0:
                continue
            coeff = m.C * exps[slot]
            exps[slot] -= 1
            terms.append((tuple(a), tuple(b), coeff))
        return terms


def evaluate_monomial_terms(terms, z0, z1, z2):
    """Evaluate a list of (alpha, beta, C) monomial terms pointwise."""
    out = np.zeros(np.broadcast(z0, z1, z2).shape, dtype=complex)
    zc0, zc1, zc2 = np.conj(z0), np.conj(z1), np.conj(z2)
    for a, b, C in terms:
        out += C * z0 ** a[0] * zc0 ** b[0] * z1 ** a[1] * zc1 ** b[1] * z2 ** a[2] * zc2 ** b[2]
    return out


ZERO_NONLINEARITY = Nonlinearity((), label="zero")

CUBIC_GAUGE = Nonlinearity(
    (Monomial((2, 0, 0), (1, 0, 0), 1.0),), label="|u|^2 u"
)

CUBIC_FULLY_NONLINEAR = Nonlinearity(
    (Monomial((1, 0, 1), (1, 0, 0), 1.0),), label="|u|^2 u_xx"
)


def nonlinearity_from_json(text_or_obj):
    """Parse a JSON list of {"alpha": [...], "beta": [...], "C": real}."""
    obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
    monos = [Monomial(tuple(e["alpha"]), tuple(e["beta"]), e["C"]) for e in obj]
    return Nonlinearity(tuple(monos))


def nonlinearity_to_json(f):
    return [
        {"alpha": list(m.alpha), "beta": list(m.beta), "C": m.C.real if m.C.imag == 0 else [m.C.real, m.C.imag]}
        for m in f.monomials
    ]


@dataclass(frozen=True)
class HypothesisReport:
    parity_ok: bool
    schrodinger_ok: bool
    reversibility_ok: bool
    violations: tuple

    @property
    def ok(self):
        return self.parity_ok and self.schrodinger_ok and self.reversibility_ok


def _polynomial_is_real(terms, tol):
    """True when sum C z^alpha conj(z)^beta equals its own conjugate.

    The conjugate of a monomial swaps alpha and beta exponents per variable
    and conjugates C, so the table must satisfy T[key] = conj(T[swap key]).
    Exponent bookkeeping is exact; only coefficients carry the tolerance.
    """
    table = {}
    for a, b, C in terms:
        key = a + b
        table[key] = table.get(key, 0.0) + C
    for (a0, a1, a2, b0, b1, b2), C in table.items():
        swapped = table.get((b0, b1, b2, a0, a1, a2), 0.0)
        if abs(C - np.conj(swapped)) > tol:
            return False
    return True


def validate_hypothesis(f, coeff_tol=1e-14):
    """Check the three structural requirements on the nonlinearity.

    Item 1 holds iff alpha_1 + beta_1 is even for every monomial; item 3
    iff every coefficient is real; item 2 is the polynomial identity
    "d f / d z2 equals its own complex conjugate", checked by exact
    exponent matching.
    """
    violations = []

    parity_ok = True
    for m in f.monomials:
        if (m.alpha[1] + m.beta[1]) % 2 != 0:
            parity_ok = False
            violations.append(("parity", m))

    reversibility_ok = True
    for m in f.monomials:
        if abs(m.C.imag) > coeff_tol:
            reversibility_ok = False
            violations.append(("reversibility", m))

    schrodinger_ok = _polynomial_is_real(f.wirtinger(2), coeff_tol)
    if not schrodinger_ok:
        violations.append(("schrodinger", "d f / d z2 is not real valued"))

    return HypothesisReport(parity_ok, schrodinger_ok, reversibility_ok, tuple(violations))


def dealias_grid_size(J, qbar):
    """Zero-padding grid for alias-free products of degree qbar.

    ceil((qbar+1)/2) times the base 2J+1 points resolves every mode of a
    degree-qbar product of J-truncated fields.
    """
    factor = -(-(qbar + 1) // 2)
    return factor * (2 * J + 1)


def nonlinear_term(U, f, grid_n=None):
    """(f(u, u_x, u_xx), conj f)^T evaluated pseudospectrally, truncated to J.

    Derivatives are spectral; the monomials are multiplied pointwise on a
    zero-padded grid sized by the polynomial degree, so the truncated
    result is free of aliasing.
    """
    u = U.plus
    J = u.J
    if not f.monomials:
        z = sp.zero_field(J)
        return sp.PairField(z, z)
    n = grid_n if grid_n is not None else dealias_grid_size(J, f.qbar)
    z0 = sp.grid_values(u, n)
    z1 = sp.grid_values(sp.derivative(u, 1), n)
    z2 = sp.grid_values(sp.derivative(u, 2), n)
    vals = f.evaluate(z0, z1, z2)
    f_plus = sp.forward_transform(vals, J=J)
    f_minus = sp.forward_transform(np.conj(vals), J=J)
    return sp.PairField(f_plus, f_minus)


def rhs(U, params, f, dealias=True, enforce_hypothesis=True, tol=1e-8):
    """Vector field U' = i E [Lambda U + (f, conj f)^T].

    ``enforce_hypothesis=False`` skips the structural check (used by the
    control experiments that deliberately break reversibility).
    """
    if enforce_hypothesis and not validate_hypothesis(f).ok:
        raise HypothesisError(
            "nonlinearity violates the structural hypothesis; pass "
            "enforce_hypothesis=False to integrate anyway"
        )
    if sp.realification_defect(U) > tol:
        raise HypothesisError("rhs expects a realified pair field")
    J = U.J
    lam = frequencies_upto(params, J)
    grid_n = None if dealias else 2 * J + 1
    F = nonlinear_term(U, f, grid_n=grid_n)
    plus = 1j * (lam * U.plus.coeffs + F.plus.coeffs)
    minus = -1j * (lam * U.minus.coeffs + F.minus.coeffs)
    return sp.PairField(sp.FourierField(plus), sp.FourierField(minus))
