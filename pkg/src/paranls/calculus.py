"""Asymptotic composition of Weyl symbols and remainder-smoothing measurement.

The expansion implements

    (a # b)_rho = sum_{k<=rho} (1/k!) ((i/2) sigma(D_x,D_xi,D_y,D_eta))^k [a b],

with sigma = D_xi D_y - D_x D_eta and D = (1/i) d; written out on separable
symbols the k-th term is

    (1/k!) (-i/2)^k sum_l binom(k,l) (-1)^(k-l)
        (d_xi^l d_x^(k-l) a) (d_x^l d_xi^(k-l) b).

Term 0 is the plain product; the k = 1 term is the Poisson bracket over 2i.
The remainder Op^BW(a) Op^BW(b) - Op^BW((a#b)_rho) is measured through the
decay of its columns against the input mode.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from . import quantize as qz
from . import spectral as sp
from . import symbols as sy
from .errors import MeasurementError

FIT_CAP = 99.0  # reported exponent for identically-zero remainders


def expansion_term(a, b, k):
    """The k-th term of the composition expansion (plain symbols only)."""
    if k == 0:
        return sy.symbol_product(a, b)
    pref = (-0.5j) ** k / math.factorial(k)
    total = None
    for l in range(k + 1):
        da = sy.symbol_xi_derivative(sy.symbol_x_derivative(a, k - l), l)
        db = sy.symbol_x_derivative(sy.symbol_xi_derivative(b, k - l), l)
        piece = sy.symbol_scale(
            sy.symbol_product(da, db), pref * math.comb(k, l) * (-1.0) ** (k - l)
        )
        total = piece if total is None else sy.symbol_add(total, piece)
    return total


def compose_expansion(a, b, rho):
    """(a # b)_rho as a Symbol; order adds, homogeneity tags add."""
    out = None
    for k in range(rho + 1):
        t = expansion_term(a, b, k)
        out = t if out is None else sy.symbol_add(out, t)
    return sy.Symbol(out.terms, degree=a.degree + b.degree)


def column_decay_exponent(entries, J, lo=None, hi=None):
    """-slope of log ||column_k|| against log <k> over k in [lo, hi].

    Returns FIT_CAP when the columns vanish identically on the range (the
    operator is exactly zero there, i.e. infinitely smoothing).
    """
    if lo is None:
        lo = max(2, J // 8)
    if hi is None:
        hi = J // 2
    if hi <= lo:
        raise MeasurementError(f"degenerate fit range [{lo}, {hi}]")
    ks = np.arange(lo, hi + 1)
    norms = np.array([np.linalg.norm(entries[:, J + k]) for k in ks])
    nz = norms > 1e-300
    if not np.any(nz):
        return FIT_CAP
    if np.count_nonzero(nz) < 2:
        raise MeasurementError("fewer than two usable points in the fit range")
    x = np.log(sp.bracket(ks[nz]))
    y = np.log(norms[nz])
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)


@dataclass(frozen=True)
class CompositionReport:
    rho: int
    order_a: float
    order_b: float
    expansion: sy.Symbol
    remainder: qz.OperatorMatrix
    measured_order: float
    fit_range: tuple

    @property
    def threshold(self):
        return self.rho - self.order_a - self.order_b - 1.0

    @property
    def passed(self):
        return self.measured_order >= self.threshold

    def to_json(self):
        return {
            "rho": self.rho,
            "orders": [self.order_a, self.order_b],
            "measured_order": self.measured_order,
            "fit_range": list(self.fit_range),
            "pass": bool(self.passed),
        }

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)


def remainder_order(a, b, rho, cfg, J, lo=None, hi=None):
    """Measure the smoothing order of the composition remainder at truncation J."""
    expansion = compose_expansion(a, b, rho)
    prod = qz.bony_weyl(a, cfg, J) @ qz.bony_weyl(b, cfg, J)
    R = prod - qz.bony_weyl(expansion, cfg, J)
    if lo is None:
        lo = max(2, J // 8)
    if hi is None:
        hi = J // 2
    measured = column_decay_exponent(R.entries, J, lo, hi)
    return CompositionReport(
        rho=rho,
        order_a=float(a.order),
        order_b=float(b.order),
        expansion=expansion,
        remainder=R,
        measured_order=measured,
        fit_range=(lo, hi),
    )


def cutoff_independence(a, cfg1, cfg2, J, lo=None, hi=None):
    """Decay exponent of Op^W(a_chi1) - Op^W(a_chi2).

    The difference lives on the band where the two cut-offs disagree, so
    its columns decay like the coefficient tail; x-independent symbols give
    exactly zero (reported as FIT_CAP).
    """
    D = qz.bony_weyl(a, cfg1, J) - qz.bony_weyl(a, cfg2, J)
    return column_decay_exponent(D.entries, J, lo, hi)
