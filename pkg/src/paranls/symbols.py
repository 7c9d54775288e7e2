"""Separable symbols a(x, xi), admissible cut-offs, and structure predicates.

A symbol is a finite sum of terms

    term(x, xi) = sum_k c(k) e^{i k x} / sqrt(2 pi) * chi(k, xi) * f(xi - shift*k),

where ``c`` is a FourierField in x, ``f`` a xi-profile with registered exact
derivatives, ``shift`` a per-term mode shift (used to move between
quantizations), and ``chi`` an optional stack of admissible cut-offs
(attached by regularization).  Profiles are closed under the operations the
composition expansion needs: products, exact xi-derivatives, conjugation
and xi-reflection.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import spectral as sp
from .errors import CapabilityError, ConfigError

# ---------------------------------------------------------------------------
# xi-profiles
# ---------------------------------------------------------------------------


class XiProfile:
    """Interface: evaluation, one exact derivative, conjugate, reflection."""

    order = 0.0

    def __call__(self, xi):
        raise NotImplementedError

    def derivative(self):
        raise NotImplementedError

    def conjugate(self):
        raise NotImplementedError

    def reflect(self):
        raise NotImplementedError


class PolyJapProfile(XiProfile):
    """sum_{(m,b)} c[m,b] xi^m <xi>^b  — closed under d/dxi and products.

    Covers (i xi)^k, <xi>^a, and the convolution-potential multiplier.
    """

    def __init__(self, terms):
        cleaned = {}
        for (m, b), c in terms.items():
            if c != 0:
                cleaned[(int(m), float(b))] = cleaned.get((int(m), float(b)), 0.0) + complex(c)
        self.terms = cleaned
        self.order = max((m + b for (m, b) in cleaned), default=0.0)

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        br = sp.bracket(xi)
        out = np.zeros(xi.shape, dtype=complex)
        for (m, b), c in self.terms.items():
            out += c * xi**m * br**b
        return out

    def derivative(self):
        d = {}
        for (m, b), c in self.terms.items():
            if m != 0:
                d[(m - 1, b)] = d.get((m - 1, b), 0.0) + m * c
            if b != 0.0:
                d[(m + 1, b - 2.0)] = d.get((m + 1, b - 2.0), 0.0) + b * c
        return PolyJapProfile(d)

    def conjugate(self):
        return PolyJapProfile({k: np.conj(c) for k, c in self.terms.items()})

    def reflect(self):
        return PolyJapProfile({k: c * (-1) ** k[0] for k, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, PolyJapProfile):
            prod = {}
            for (m1, b1), c1 in self.terms.items():
                for (m2, b2), c2 in other.terms.items():
                    key = (m1 + m2, b1 + b2)
                    prod[key] = prod.get(key, 0.0) + c1 * c2
            return PolyJapProfile(prod)
        if isinstance(other, (int, float, complex)):
            return PolyJapProfile({k: c * other for k, c in self.terms.items()})
        return ProductProfile([self, other])

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, PolyJapProfile):
            s = dict(self.terms)
            for k, c in other.terms.items():
                s[k] = s.get(k, 0.0) + c
            return PolyJapProfile(s)
        raise CapabilityError("can only add PolyJap profiles")

    def to_json(self):
        return {"kind": "polyjap", "terms": [[m, b, c.real, c.imag] for (m, b), c in self.terms.items()]}


def profile_one():
    return PolyJapProfile({(0, 0.0): 1.0})


def profile_ixi(k=1):
    """(i xi)^k."""
    return PolyJapProfile({(k, 0.0): 1j**k})


def profile_xi():
    return PolyJapProfile({(1, 0.0): 1.0})


def profile_jap(a):
    """<xi>^a."""
    return PolyJapProfile({(0, float(a)): 1.0})


def profile_potential(params):
    """The multiplier p(xi) = sum_k m_k <xi>^-(2k+1) extending the potential."""
    return PolyJapProfile({(0, -(2.0 * k + 1.0)): mk for k, mk in enumerate(params.m, start=1)})


class GammaProfile(XiProfile):
    """gamma(xi) = 1/(i xi) for |xi| >= 1/2, odd C-infinity continuation below.

    Continuation: gamma = -i xi / (xi^2 + w), w = (3/4) exp(1 - 1/(1-4 xi^2))
    on |xi| < 1/2 and 0 outside (a standard bump, so the junction is smooth).
    Derivatives beyond the first are only available on |xi| >= 1/2.
    """

    order = -1.0

    def __init__(self, deriv=0):
        self.deriv = int(deriv)
        self.order = -1.0 - self.deriv

    @staticmethod
    def _bump(xi):
        w = np.zeros_like(xi)
        inside = np.abs(xi) < 0.5
        z = xi[inside]
        w[inside] = 0.75 * np.exp(1.0 - 1.0 / (1.0 - 4.0 * z**2))
        return w

    @staticmethod
    def _bump_prime(xi):
        wp = np.zeros_like(xi)
        inside = np.abs(xi) < 0.5
        z = xi[inside]
        w = 0.75 * np.exp(1.0 - 1.0 / (1.0 - 4.0 * z**2))
        wp[inside] = w * (-8.0 * z) / (1.0 - 4.0 * z**2) ** 2
        return wp

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape, dtype=complex)
        outer = np.abs(xi) >= 0.5
        z = xi[outer]
        # d-th derivative of 1/(i xi) = -i (-1)^d d! xi^-(d+1)
        out[outer] = -1j * (-1.0) ** self.deriv * math.factorial(self.deriv) * z ** (-(self.deriv + 1))
        inner = ~outer
        if np.any(inner):
            zi = xi[inner]
            if self.deriv == 0:
                out[inner] = -1j * zi / (zi**2 + self._bump(zi))
            elif self.deriv == 1:
                den = zi**2 + self._bump(zi)
                out[inner] = -1j * (den - zi * (2.0 * zi + self._bump_prime(zi))) / den**2
            else:
                raise CapabilityError(
                    "gamma continuation derivatives beyond order 1 are not registered "
                    "for |xi| < 1/2"
                )
        return out

    def derivative(self):
        return GammaProfile(self.deriv + 1)

    def conjugate(self):
        return ScaledProfile(self, 1.0, conj=True)

    def reflect(self):
        # gamma is odd and its continuation is odd, so gamma(-xi) = -gamma(xi);
        # each derivative flips parity.
        return ScaledProfile(self, (-1.0) ** (self.deriv + 1), reflect=False)

    def to_json(self):
        return {"kind": "gamma", "deriv": self.deriv}


def profile_gamma():
    return GammaProfile()


class ScaledProfile(XiProfile):
    """c * f(xi), optionally conjugated or xi-reflected."""

    def __init__(self, base, scale=1.0, conj=False, reflect=False):
        self.base = base
        self.scale = complex(scale)
        self.conj = bool(conj)
        self.reflectp = bool(reflect)
        self.order = base.order

    def __call__(self, xi):
        arg = -np.asarray(xi, dtype=float) if self.reflectp else np.asarray(xi, dtype=float)
        v = self.base(arg)
        if self.conj:
            v = np.conj(v)
        return self.scale * v

    def derivative(self):
        # d/dxi [scale * T(f(arg))] = scale * sign(arg') * T(f'(arg)); conj and
        # scale commute with d/dxi on real xi.
        sign = -1.0 if self.reflectp else 1.0
        return ScaledProfile(self.base.derivative(), self.scale * sign, conj=self.conj, reflect=self.reflectp)

    def conjugate(self):
        return ScaledProfile(self.base, np.conj(self.scale), conj=not self.conj, reflect=self.reflectp)

    def reflect(self):
        return ScaledProfile(self.base, self.scale, conj=self.conj, reflect=not self.reflectp)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return ScaledProfile(self.base, self.scale * other, conj=self.conj, reflect=self.reflectp)
        return ProductProfile([self, other])

    __rmul__ = __mul__


class ProductProfile(XiProfile):
    """Lazy product of profiles (used when factors are not jointly closed)."""

    def __init__(self, factors, scale=1.0):
        self.factors = list(factors)
        self.scale = complex(scale)
        self.order = sum(f.order for f in self.factors)

    def __call__(self, xi):
        out = np.full(np.asarray(xi, dtype=float).shape, self.scale, dtype=complex)
        for f in self.factors:
            out = out * f(xi)
        return out

    def derivative(self):
        parts = []
        for i in range(len(self.factors)):
            fs = list(self.factors)
            fs[i] = fs[i].derivative()
            parts.append(ProductProfile(fs, self.scale))
        return SumProfile(parts)

    def conjugate(self):
        return ProductProfile([f.conjugate() for f in self.factors], np.conj(self.scale))

    def reflect(self):
        return ProductProfile([f.reflect() for f in self.factors], self.scale)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return ProductProfile(self.factors, self.scale * other)
        return ProductProfile(self.factors + [other], self.scale)

    __rmul__ = __mul__


class SumProfile(XiProfile):
    def __init__(self, parts):
        self.parts = list(parts)
        self.order = max((p.order for p in self.parts), default=0.0)

    def __call__(self, xi):
        out = np.zeros(np.asarray(xi, dtype=float).shape, dtype=complex)
        for p in self.parts:
            out = out + p(xi)
        return out

    def derivative(self):
        return SumProfile([p.derivative() for p in self.parts])

    def conjugate(self):
        return SumProfile([p.conjugate() for p in self.parts])

    def reflect(self):
        return SumProfile([p.reflect() for p in self.parts])


def profile_product(f, g):
    if isinstance(f, PolyJapProfile) and isinstance(g, PolyJapProfile):
        return f * g
    return ProductProfile([f, g])


# ---------------------------------------------------------------------------
# Admissible cut-offs
# ---------------------------------------------------------------------------


def _smoothstep(s):
    """C-infinity monotone step: 0 for s <= 0, 1 for s >= 1."""
    s = np.asarray(s, dtype=float)

    def g(t):
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = np.exp(-1.0 / t[pos])
        return out

    a = g(s)
    b = g(1.0 - s)
    return a / (a + b)


@dataclass(frozen=True)
class CutoffConfig:
    """Admissible cut-off chi(xi', xi) = step(|xi'| / <xi>) with plateau delta/2.

    chi = 1 for |xi'| <= (delta/2) <xi>, 0 for |xi'| >= delta <xi>, C-infinity
    and even in each argument in between.
    """

    delta: float = 0.25

    def __post_init__(self):
        if not (0.0 < self.delta <= 0.5):
            raise ConfigError(f"cut-off width delta must lie in (0, 1/2], got {self.delta}")

    def __call__(self, xi_prime, xi):
        r = np.abs(np.asarray(xi_prime, dtype=float)) / sp.bracket(xi)
        return _smoothstep((self.delta - r) / (0.5 * self.delta))

    def multi(self, xi_prime_vec, xi):
        """Joint cut-off chi_p realized through the euclidean norm of xi'."""
        norm = np.sqrt(np.sum(np.square(np.asarray(xi_prime_vec, dtype=float)), axis=0))
        return self(norm, xi)

    def plateau_radius(self, xi):
        return 0.5 * self.delta * sp.bracket(xi)

    def support_radius(self, xi):
        return self.delta * sp.bracket(xi)


def admissible_cutoff(cfg):
    """The callable chi(xi', xi) for a configuration (kept for symmetry with
    the serialization surface; the config itself is already callable)."""
    if not isinstance(cfg, CutoffConfig):
        raise ConfigError("expected a CutoffConfig")
    return cfg


# ---------------------------------------------------------------------------
# Symbols
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymbolTerm:
    coeff: sp.FourierField
    profile: XiProfile
    shift: float = 0.0
    chis: tuple = ()


@dataclass(frozen=True)
class Symbol:
    """Separable-sum symbol with an integer homogeneity tag."""

    terms: tuple
    degree: int = field(default=0, compare=False)

    @property
    def order(self):
        return max((t.profile.order for t in self.terms), default=0.0)

    @property
    def is_plain(self):
        """No shifts, no cut-offs attached: closed under products/derivatives."""
        return all(t.shift == 0.0 and not t.chis for t in self.terms)

    def evaluate(self, x, xi):
        """Dense evaluation on the tensor grid (x_i, xi_j) -> (len(x), len(xi))."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.zeros((x.size, xi.size), dtype=complex)
        for t in self.terms:
            modes = t.coeff.modes
            phases = np.exp(1j * np.outer(x, modes)) / np.sqrt(2.0 * np.pi)
            args = xi[None, :] - t.shift * modes[:, None]
            vals = t.profile(args)
            for chi in t.chis:
                vals = vals * chi(modes[:, None], xi[None, :])
            out += phases @ (t.coeff.coeffs[:, None] * vals)
        return out

    def evaluate_scalar(self, x, xi):
        return complex(self.evaluate([x], [xi])[0, 0])


def symbol(coeff, profile=None, degree=0):
    """Single-term symbol coeff(x) * profile(xi)."""
    if profile is None:
        profile = profile_one()
    return Symbol((SymbolTerm(coeff, profile),), degree=degree)


def symbol_x_independent(profile, J=0, value=1.0, degree=0):
    return symbol(sp.constant_field(value, J), profile, degree=degree)


def symbol_zero(J=0):
    return Symbol((), degree=0)


def symbol_add(a, b):
    return Symbol(a.terms + b.terms, degree=a.degree if a.degree == b.degree else 0)


def symbol_scale(a, c):
    return Symbol(tuple(replace(t, coeff=t.coeff * c) for t in a.terms), degree=a.degree)


def symbol_x_derivative(a, order=1):
    return Symbol(
        tuple(replace(t, coeff=sp.derivative(t.coeff, order)) for t in a.terms),
        degree=a.degree,
    )


def symbol_xi_derivative(a, order=1):
    terms = []
    for t in a.terms:
        if t.chis:
            raise CapabilityError("xi-derivative of a regularized symbol is not supported")
        p = t.profile
        for _ in range(order):
            p = p.derivative()
        terms.append(replace(t, profile=p))
    return Symbol(tuple(terms), degree=a.degree)


def symbol_product(a, b):
    """Pointwise product; requires plain (unshifted, cut-off-free) symbols."""
    if not (a.is_plain and b.is_plain):
        raise CapabilityError("products need plain symbols (no shifts or cut-offs)")
    terms = []
    for ta in a.terms:
        for tb in b.terms:
            coeff = sp.multiply_fields([ta.coeff, tb.coeff], J_out=ta.coeff.J + tb.coeff.J)
            terms.append(SymbolTerm(coeff, profile_product(ta.profile, tb.profile)))
    return Symbol(tuple(terms), degree=a.degree + b.degree)


def symbol_conj(a):
    """conj(a) as a function of (x, xi) on real arguments."""
    terms = []
    for t in a.terms:
        terms.append(
            SymbolTerm(sp.conj_field(t.coeff), t.profile.conjugate(), -t.shift, t.chis)
        )
    return Symbol(tuple(terms), degree=a.degree)


def symbol_reflect_xi(a):
    """a^vee(x, xi) = a(x, -xi)."""
    terms = []
    for t in a.terms:
        terms.append(SymbolTerm(t.coeff, t.profile.reflect(), -t.shift, t.chis))
    return Symbol(tuple(terms), degree=a.degree)


def symbol_reflect_x(a):
    """a(-x, xi)."""
    terms = []
    for t in a.terms:
        terms.append(SymbolTerm(sp.reflect_field(t.coeff), t.profile, -t.shift, t.chis))
    return Symbol(tuple(terms), degree=a.degree)


def regularize(a, cfg):
    """Attach the cut-off: the n-th x-coefficient is multiplied by chi(n, xi).

    Idempotent wherever chi takes the values 0 or 1 (the plateau and the
    complement of the support); on the transition band a second application
    multiplies by chi again, as the definition prescribes.
    """
    return Symbol(tuple(replace(t, chis=t.chis + (cfg,)) for t in a.terms), degree=a.degree)


# ---------------------------------------------------------------------------
# 2x2 reality-structured matrices of symbols
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymbolMatrix2:
    """Matrix [[a, b], [conj b(x,-xi), conj a(x,-xi)]].

    The lower row is stored implicitly; ``entry`` materializes any of the
    four entries.  ``explicit_lower`` allows tests to build matrices that
    deliberately break the reality structure.
    """

    a: Symbol
    b: Symbol
    explicit_lower: tuple = None  # (a21, a22) overriding the implicit row

    def entry(self, i, j):
        if (i, j) == (1, 1):
            return self.a
        if (i, j) == (1, 2):
            return self.b
        if self.explicit_lower is not None:
            return self.explicit_lower[j - 1]
        if (i, j) == (2, 1):
            return symbol_conj(symbol_reflect_xi(self.b))
        if (i, j) == (2, 2):
            return symbol_conj(symbol_reflect_xi(self.a))
        raise ConfigError("matrix indices must be in {1,2}")

    def evaluate(self, x, xi):
        """Pointwise 2x2 values, shape (len(x), len(xi), 2, 2)."""
        x = np.atleast_1d(x)
        xi = np.atleast_1d(xi)
        out = np.zeros((np.size(x), np.size(xi), 2, 2), dtype=complex)
        for i in (1, 2):
            for j in (1, 2):
                out[:, :, i - 1, j - 1] = self.entry(i, j).evaluate(x, xi)
        return out


def matrix_diag(a):
    return SymbolMatrix2(a=a, b=symbol_zero())


# ---------------------------------------------------------------------------
# Structure predicates (sampled)
# ---------------------------------------------------------------------------

PREDICATE_TOL = 1e-10


def _sample_grids(J_x=32, xi_max=24.0, n_xi=17, rng=None):
    x = sp.grid(2 * J_x + 1)
    xi = np.linspace(-xi_max, xi_max, n_xi)
    if rng is not None:
        xi = np.concatenate([xi, rng.uniform(-xi_max, xi_max, size=8)])
    return x, xi


def reality_defect(A, x=None, xi=None):
    """sup | conj(A(x,-xi)) - S A(x,xi) S | over the sample grid."""
    if x is None or xi is None:
        x, xi = _sample_grids()
    vals = A.evaluate(x, xi)
    vals_neg = A.evaluate(x, -xi)
    swapped = vals[:, :, ::-1, :][:, :, :, ::-1]  # S M S flips both indices
    return float(np.max(np.abs(np.conj(vals_neg) - swapped)))


def is_reality_preserving(A, tol=PREDICATE_TOL):
    return reality_defect(A) <= tol


def parity_defect_matrix(A, x=None, xi=None):
    """sup | A(x,xi) - A(-x,-xi) |."""
    if x is None or xi is None:
        x, xi = _sample_grids()
    vals = A.evaluate(x, xi)
    # reflected grid: A(-x,-xi); x -> -x maps the grid onto itself reversed mod 2pi
    vals_reflected = A.evaluate(-x, -xi)
    return float(np.max(np.abs(vals - vals_reflected)))


def is_parity_preserving(A, tol=PREDICATE_TOL):
    return parity_defect_matrix(A) <= tol


def reversibility_defect(builder, U, x=None, xi=None):
    """sup defect of conj(a(U; x, -xi)) = a(SU; x, xi), same for b (autonomous form).

    The xi-reflection comes from the matrix identity A(SU) = S A(U) S combined
    with the reality structure, whose (2,2) entry carries xi -> -xi; it is
    invisible on xi-even symbols.
    """
    if x is None or xi is None:
        x, xi = _sample_grids()
    A_U = builder(U)
    A_SU = builder(sp.apply_involution(U))
    d = 0.0
    for which in ("a", "b"):
        s_U = getattr(A_U, which)
        s_SU = getattr(A_SU, which)
        d = max(
            d,
            float(np.max(np.abs(np.conj(s_U.evaluate(x, -xi)) - s_SU.evaluate(x, xi)))),
        )
    return d


def is_reversibility_preserving(builder, U, tol=PREDICATE_TOL):
    return reversibility_defect(builder, U) <= tol


def symbol_to_json(a):
    out = []
    for t in a.terms:
        entry = {
            "coeff_modes": sp.field_to_json(t.coeff),
            "profile": t.profile.to_json() if hasattr(t.profile, "to_json") else {"kind": "opaque"},
            "shift": t.shift,
        }
        out.append(entry)
    return out
