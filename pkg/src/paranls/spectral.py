"""Truncated Fourier calculus on the circle.

Conventions
-----------
A periodic function is represented by its truncated Fourier coefficients

    u(x) = sum_{|j| <= J} c(j) e^{i j x} / sqrt(2 pi),

with ``c(j)`` stored in increasing mode order ``j = -J, ..., J``.  Under
this normalization the exponentials are an orthonormal family in L^2, so
the Sobolev norm is ``sqrt(sum |c(j)|^2 <j>^(2s))`` with ``<j> = sqrt(1+j^2)``.

Grids are uniform, ``x_m = 2 pi m / n`` with ``n >= 2J+1``; transforms on
such grids are exact for band-limited data, and products computed on a
sufficiently fine grid are exact convolutions (zero-padding dealiasing).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, RangeError, StructureError

DEFAULT_TOL = 1e-10


def bracket(j):
    """Japanese bracket <j> = sqrt(1 + j^2); accepts arrays."""
    return np.sqrt(1.0 + np.asarray(j, dtype=float) ** 2)


@dataclass(frozen=True)
class FourierField:
    """Truncated complex Fourier coefficient vector, modes -J..J.

    Immutable after construction; all operations return new instances.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise DimensionError("coefficient vector must be 1-d with odd length 2J+1")
        if not np.all(np.isfinite(c)):
            raise DimensionError("non-finite Fourier coefficients")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def J(self):
        return (self.coeffs.size - 1) // 2

    @property
    def modes(self):
        return np.arange(-self.J, self.J + 1)

    def coeff(self, j):
        """Coefficient of mode j (0 outside the truncation)."""
        j = int(j)
        if abs(j) > self.J:
            return 0.0 + 0.0j
        return self.coeffs[j + self.J]

    def with_truncation(self, J_new):
        """Pad with zeros or truncate to modes -J_new..J_new."""
        J_new = int(J_new)
        out = np.zeros(2 * J_new + 1, dtype=complex)
        m = min(self.J, J_new)
        out[J_new - m : J_new + m + 1] = self.coeffs[self.J - m : self.J + m + 1]
        return FourierField(out)

    def __add__(self, other):
        J = max(self.J, other.J)
        return FourierField(
            self.with_truncation(J).coeffs + other.with_truncation(J).coeffs
        )

    def __sub__(self, other):
        J = max(self.J, other.J)
        return FourierField(
            self.with_truncation(J).coeffs - other.with_truncation(J).coeffs
        )

    def __mul__(self, scalar):
        return FourierField(self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return FourierField(-self.coeffs)


def zero_field(J):
    return FourierField(np.zeros(2 * J + 1, dtype=complex))


def constant_field(value, J):
    """The constant function ``value``; its only coefficient is value*sqrt(2 pi)."""
    c = np.zeros(2 * J + 1, dtype=complex)
    c[J] = value * np.sqrt(2.0 * np.pi)
    return FourierField(c)


def field_from_modes(mode_dict, J):
    """Build a field from a {mode: coefficient} mapping."""
    c = np.zeros(2 * J + 1, dtype=complex)
    for j, v in mode_dict.items():
        if abs(int(j)) > J:
            raise RangeError(f"mode {j} outside truncation J={J}")
        c[int(j) + J] = v
    return FourierField(c)


def grid(n):
    """Uniform grid x_m = 2 pi m / n, m = 0..n-1."""
    return 2.0 * np.pi * np.arange(n) / n


def forward_transform(samples, J=None):
    """Fourier coefficients of uniform grid samples.

    Parameters
    ----------
    samples : complex array on the grid ``2 pi m / n``.
    J : truncation; defaults to the largest value resolvable, (n-1)//2.

    The grid must satisfy ``n >= 2J+1``; the round trip with
    :func:`grid_values` is then exact to rounding.
    """
    samples = np.asarray(samples, dtype=complex)
    n = samples.size
    if J is None:
        J = (n - 1) // 2
    if n < 2 * J + 1:
        raise DimensionError(f"grid size {n} < 2J+1 = {2 * J + 1}")
    spectrum = np.fft.fft(samples) * (np.sqrt(2.0 * np.pi) / n)
    c = np.zeros(2 * J + 1, dtype=complex)
    js = np.arange(-J, J + 1)
    c[:] = spectrum[np.mod(js, n)]
    return FourierField(c)


def grid_values(u, n=None):
    """Evaluate the field on a uniform grid of n points (default 2J+1)."""
    if n is None:
        n = 2 * u.J + 1
    if n < 2 * u.J + 1:
        raise DimensionError(f"grid size {n} < 2J+1 = {2 * u.J + 1}")
    bins = np.zeros(n, dtype=complex)
    js = np.arange(-u.J, u.J + 1)
    bins[np.mod(js, n)] = u.coeffs
    return np.fft.ifft(bins) * (n / np.sqrt(2.0 * np.pi))


def evaluate_at(u, x):
    """Evaluate the trigonometric polynomial at arbitrary points x."""
    x = np.asarray(x, dtype=float)
    phases = np.exp(1j * np.outer(x, u.modes))
    return phases @ u.coeffs / np.sqrt(2.0 * np.pi)


def sobolev_norm(u, s):
    """H^s norm: sqrt(sum_j |c(j)|^2 <j>^(2s))."""
    if s < 0:
        raise RangeError("s must be nonnegative")
    w = bracket(u.modes) ** (2.0 * s)
    return float(np.sqrt(np.sum(np.abs(u.coeffs) ** 2 * w)))


def project(u, n):
    """Spectral projector onto the modes {n, -n} (mean term for n = 0)."""
    n = int(n)
    if n < 0 or n > u.J:
        raise RangeError(f"projector index {n} outside [0, {u.J}]")
    c = np.zeros_like(u.coeffs)
    c[u.J + n] = u.coeffs[u.J + n]
    c[u.J - n] = u.coeffs[u.J - n]
    return FourierField(c)


def derivative(u, order=1):
    """Spectral derivative: multiplication by (i j)^order."""
    return FourierField(u.coeffs * (1j * u.modes.astype(float)) ** order)


def antiderivative(u):
    """Periodic primitive: divide by (i j) on nonzero modes, drop the mean."""
    js = u.modes.astype(float)
    c = np.zeros_like(u.coeffs)
    nz = js != 0
    c[nz] = u.coeffs[nz] / (1j * js[nz])
    return FourierField(c)


def conj_field(u):
    """Coefficients of the complex conjugate function: conj(c(-j))."""
    return FourierField(np.conj(u.coeffs[::-1]))


def reflect_field(u):
    """Coefficients of x -> u(-x): c(-j)."""
    return FourierField(u.coeffs[::-1].copy())


def parity_defect(u):
    """max_j |c(j) - c(-j)|; zero iff the function is even in x."""
    return float(np.max(np.abs(u.coeffs - u.coeffs[::-1])))


def even_projection(u):
    """Symmetrize the coefficients: (c(j) + c(-j)) / 2."""
    return FourierField(0.5 * (u.coeffs + u.coeffs[::-1]))


def mean_value(u):
    """The x-average of the function, c(0)/sqrt(2 pi)."""
    return complex(u.coeffs[u.J]) / np.sqrt(2.0 * np.pi)


def multiply_fields(fields, J_out=None):
    """Exact pointwise product of fields via zero-padded grids.

    The working grid resolves every mode of the full convolution, so the
    result (truncated to ``J_out``) is the exact product with no aliasing.
    """
    fields = list(fields)
    if not fields:
        raise DimensionError("empty product")
    J_sum = sum(f.J for f in fields)
    if J_out is None:
        J_out = max(f.J for f in fields)
    n = 2 * max(J_sum, J_out) + 1
    vals = np.ones(n, dtype=complex)
    for f in fields:
        vals = vals * grid_values(f, n)
    return forward_transform(vals, J=min(J_sum, (n - 1) // 2)).with_truncation(J_out)


def random_field(J, rng, decay=2.0, even=False, real=False):
    """Seeded random field with |c(j)| ~ <j>^-decay envelope."""
    js = np.arange(-J, J + 1)
    amp = bracket(js) ** (-decay)
    c = amp * (rng.standard_normal(2 * J + 1) + 1j * rng.standard_normal(2 * J + 1))
    u = FourierField(c)
    if even:
        u = even_projection(u)
    if real:
        u = FourierField(0.5 * (u.coeffs + np.conj(u.coeffs[::-1])))
    return u


# ---------------------------------------------------------------------------
# Pair fields (u^+, u^-) and the slot-swap involution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairField:
    """The vector unknown (u^+, u^-); realified when u^- = conj(u^+)."""

    plus: FourierField
    minus: FourierField

    def __post_init__(self):
        if self.plus.J != self.minus.J:
            raise DimensionError("pair components must share the truncation J")

    @property
    def J(self):
        return self.plus.J

    def __add__(self, other):
        return PairField(self.plus + other.plus, self.minus + other.minus)

    def __sub__(self, other):
        return PairField(self.plus - other.plus, self.minus - other.minus)

    def __mul__(self, scalar):
        return PairField(self.plus * scalar, self.minus * scalar)

    __rmul__ = __mul__


def pair_from_plus(u):
    """Realified pair (u, conj u)."""
    return PairField(u, conj_field(u))


def realification_defect(U):
    """sup-mode distance between u^- and conj(u^+)."""
    return float(np.max(np.abs(U.minus.coeffs - conj_field(U.plus).coeffs)))


def realify(U):
    """Symmetrize onto the realified subspace, averaging the two slots."""
    avg = FourierField(0.5 * (U.plus.coeffs + conj_field(U.minus).coeffs))
    return pair_from_plus(avg)


def apply_involution(U):
    """The 2x2 slot swap S; an exact involution."""
    return PairField(U.minus, U.plus)


def pair_parity_defect(U):
    return max(parity_defect(U.plus), parity_defect(U.minus))


def project_pair(U, n):
    return PairField(project(U.plus, n), project(U.minus, n))


def project_signed(U, n, sign, tol=DEFAULT_TOL):
    """Signed projector: spectral projector composed with the slot projector.

    Requires U even in x; the plus projector keeps the first slot of
    ``project_pair(U, n)`` and zeroes the second, the minus projector the
    reverse.
    """
    if pair_parity_defect(U) > tol:
        raise StructureError("signed projectors require an even pair field")
    P = project_pair(U, n)
    if sign == "+" or sign == 1:
        return PairField(P.plus, zero_field(U.J))
    if sign == "-" or sign == -1:
        return PairField(zero_field(U.J), P.minus)
    raise RangeError(f"sign must be '+' or '-', got {sign!r}")


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def field_to_json(u):
    """JSON-serializable dict: explicit J plus [re, im] coefficient pairs."""
    return {
        "J": u.J,
        "coeffs": [[float(c.real), float(c.imag)] for c in u.coeffs],
    }


def field_from_json(obj):
    J = int(obj["J"])
    pairs = obj["coeffs"]
    if len(pairs) != 2 * J + 1:
        raise DimensionError("coefficient list length does not match J")
    return FourierField(np.array([complex(re, im) for re, im in pairs]))


def field_to_bytes(u):
    """Little-endian float64 interleaved re/im dump."""
    inter = np.empty(2 * u.coeffs.size)
    inter[0::2] = u.coeffs.real
    inter[1::2] = u.coeffs.imag
    return inter.astype("<f8").tobytes()


def field_from_bytes(raw):
    inter = np.frombuffer(raw, dtype="<f8")
    return FourierField(inter[0::2] + 1j * inter[1::2])
