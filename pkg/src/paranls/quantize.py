"""Quantizations of separable symbols as dense mode-space matrices.

The one-parameter family of quantizations acts on coefficient vectors as

    (Op_sigma(a) u)(k) = (1/sqrt(2 pi)) sum_j  a_hat(k-j, (1-sigma) k + sigma j) u(j),

where ``a_hat(n, xi)`` is the n-th x-Fourier coefficient of ``a``.  Setting
sigma = 1 gives the standard quantization (xi evaluated at the input mode),
sigma = 1/2 the Weyl quantization (xi at the mode midpoint, which may be a
half-integer — the separable-profile representation evaluates there with no
interpolation).  The paradifferential variants quantize the cut-off
regularized symbol.
"""

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from . import symbols as sy
from .errors import CapabilityError, DimensionError

SQRT2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator on the truncated mode basis (rows/cols j = -J..J)."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim != 2 or e.shape[0] != e.shape[1] or e.shape[0] % 2 != 1:
            raise DimensionError("operator matrix must be square with odd size 2J+1")
        if not np.all(np.isfinite(e)):
            raise DimensionError("non-finite operator entries")
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)

    @property
    def J(self):
        return (self.entries.shape[0] - 1) // 2

    def apply(self, u):
        if u.J != self.J:
            raise DimensionError("field truncation does not match operator")
        return sp.FourierField(self.entries @ u.coeffs)

    def __add__(self, other):
        return OperatorMatrix(self.entries + other.entries)

    def __sub__(self, other):
        return OperatorMatrix(self.entries - other.entries)

    def __matmul__(self, other):
        return OperatorMatrix(self.entries @ other.entries)

    def adjoint(self):
        return OperatorMatrix(self.entries.conj().T)


def identity_op(J):
    return OperatorMatrix(np.eye(2 * J + 1, dtype=complex))


def quantize(a, sigma, J, cfg=None):
    """Op_sigma(a) as a dense (2J+1) x (2J+1) matrix.

    Per-term mode shifts (from quantization conversions) move the evaluation
    point; cut-offs attached to the symbol — and the optional extra ``cfg`` —
    multiply entry (k, j) by chi(k - j, (1-sigma) k + sigma j).
    """
    if not 0.0 <= sigma <= 1.0:
        raise CapabilityError("sigma must lie in [0, 1]")
    n = 2 * J + 1
    ks = np.arange(-J, J + 1, dtype=float)
    K = ks[:, None]
    Jm = ks[None, :]
    diff = K - Jm
    base_arg = (1.0 - sigma) * K + sigma * Jm
    out = np.zeros((n, n), dtype=complex)
    for t in a.terms:
        Jc = t.coeff.J
        cvals = np.zeros((n, n), dtype=complex)
        mask = np.abs(diff) <= Jc
        idx = (diff[mask] + Jc).astype(int)
        cvals[mask] = t.coeff.coeffs[idx]
        arg = base_arg - t.shift * diff
        vals = t.profile(arg)
        for chi in t.chis:
            vals = vals * chi(diff, arg)
        if cfg is not None:
            vals = vals * cfg(diff, arg)
        out += cvals * vals / SQRT2PI
    return OperatorMatrix(out)


def std_to_weyl(a):
    """Symbol b with Op(a) = Op^W(b): b_hat(n, xi) = a_hat(n, xi - n/2).

    Realized by adding 1/2 to the per-term mode shift; only plain
    (cut-off-free) symbols convert, because the cut-off argument would shift
    too.
    """
    terms = []
    for t in a.terms:
        if t.chis:
            raise CapabilityError("convert symbols before regularizing them")
        terms.append(sy.SymbolTerm(t.coeff, t.profile, t.shift + 0.5, ()))
    return sy.Symbol(tuple(terms), degree=a.degree)


def weyl_to_std(a):
    terms = []
    for t in a.terms:
        if t.chis:
            raise CapabilityError("convert symbols before regularizing them")
        terms.append(sy.SymbolTerm(t.coeff, t.profile, t.shift - 0.5, ()))
    return sy.Symbol(tuple(terms), degree=a.degree)


def bony_weyl(a, cfg, J):
    """Op^BW(a) = Op^W of the cut-off regularized symbol."""
    return quantize(sy.regularize(a, cfg), 0.5, J)


def bony_std(a, cfg, J):
    """Op^B(a): standard quantization of the regularized symbol."""
    return quantize(sy.regularize(a, cfg), 1.0, J)


def adjoint_defect(a, cfg, J):
    """Frobenius-max distance between Op^BW(a)^* and Op^BW(conj a).

    Vanishes exactly when the symbol is real valued (then the operator is
    self-adjoint); used both ways, as identity check and as control.
    """
    T = bony_weyl(a, cfg, J)
    T_conj = bony_weyl(sy.symbol_conj(a), cfg, J)
    return float(np.max(np.abs(T.adjoint().entries - T_conj.entries)))


def conjugation_defect(a, cfg, J, rng, trials=5):
    """max_v | conj(Op^BW(a) v) - Op^BW(conj a^vee) conj(v) |."""
    T = bony_weyl(a, cfg, J)
    T_cv = bony_weyl(sy.symbol_conj(sy.symbol_reflect_xi(a)), cfg, J)
    worst = 0.0
    for _ in range(trials):
        v = sp.random_field(J, rng)
        lhs = sp.conj_field(T.apply(v))
        rhs = T_cv.apply(sp.conj_field(v))
        worst = max(worst, float(np.max(np.abs(lhs.coeffs - rhs.coeffs))))
    return worst


def action_norm(a, cfg, s, m, J):
    """Measured H^s -> H^(s-m) operator norm of Op^BW(a).

    Largest singular value of diag(<k>^(s-m)) T diag(<j>^(-s)).
    """
    T = bony_weyl(a, cfg, J)
    ks = np.arange(-J, J + 1)
    w_out = sp.bracket(ks) ** (s - m)
    w_in = sp.bracket(ks) ** (-s)
    weighted = w_out[:, None] * T.entries * w_in[None, :]
    return float(np.linalg.norm(weighted, 2))


def operator_norm_hs(T, s_out, s_in):
    ks = np.arange(-T.J, T.J + 1)
    weighted = sp.bracket(ks)[:, None] ** s_out * T.entries * sp.bracket(ks)[None, :] ** (-s_in)
    return float(np.linalg.norm(weighted, 2))


# ---------------------------------------------------------------------------
# 2x2 block operators acting on pair fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockOperator:
    """2x2 block matrix of OperatorMatrix acting on PairField."""

    blocks: tuple  # ((T11, T12), (T21, T22))

    @property
    def J(self):
        return self.blocks[0][0].J

    def apply(self, U):
        (T11, T12), (T21, T22) = self.blocks
        plus = sp.FourierField(T11.entries @ U.plus.coeffs + T12.entries @ U.minus.coeffs)
        minus = sp.FourierField(T21.entries @ U.plus.coeffs + T22.entries @ U.minus.coeffs)
        return sp.PairField(plus, minus)


def bony_weyl_matrix(A, cfg, J):
    """Blockwise Op^BW of a SymbolMatrix2."""
    return BlockOperator(
        (
            (bony_weyl(A.entry(1, 1), cfg, J), bony_weyl(A.entry(1, 2), cfg, J)),
            (bony_weyl(A.entry(2, 1), cfg, J), bony_weyl(A.entry(2, 2), cfg, J)),
        )
    )


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def export_operator(T, path_base, sigma, delta, symbol_json):
    """Binary row-major complex128 dump plus a JSON header."""
    raw = T.entries.astype("<c16").tobytes()
    with open(path_base + ".bin", "wb") as fh:
        fh.write(raw)
    header = {
        "J": T.J,
        "sigma": sigma,
        "delta": delta,
        "symbol_hash": hashlib.sha256(
            json.dumps(symbol_json, sort_keys=True).encode()
        ).hexdigest(),
    }
    with open(path_base + ".json", "w") as fh:
        json.dump(header, fh, indent=1, sort_keys=True)
    return header
