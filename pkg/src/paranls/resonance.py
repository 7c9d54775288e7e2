"""Small divisors, the Vandermonde lower-bound mechanism, Monte-Carlo bad-set
measure, and the homological-equation solver of the normal-form step.

The divisor attached to a sign pattern (ell plus signs, N - ell minus) and a
tuple n is

    psi_N^ell(m, n) = sum_{j<=ell} lambda_{n_j} - sum_{j>ell} lambda_{n_j},

affine in the modulation vector m.  It vanishes identically exactly on the
paired patterns (N even, ell = N/2, equal half multisets); everywhere else
the rescaled-Vandermonde determinant of the frequency tails guarantees a
nonzero m-gradient, which is what the scans and the Monte-Carlo measure
estimates probe.

Tables are plain dicts {(ell, n_tuple): complex}; the homological solver
divides by psi off the kernel and leaves kernel entries untouched (zeroed
in the solution), with a per-tuple safety floor.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import model as md
from . import spectral as sp
from ._accel import njit_or_plain, numba_enabled
from .errors import (
    EnumerationBudgetError,
    PreconditionError,
    RangeError,
    SmallDivisorError,
)


@dataclass(frozen=True)
class DivisorQuery:
    N: int
    ell: int
    nvec: tuple

    def __post_init__(self):
        if self.N < 1 or not (0 <= self.ell <= self.N):
            raise RangeError("need N >= 1 and 0 <= ell <= N")
        if len(self.nvec) != self.N or any(n < 0 for n in self.nvec):
            raise RangeError("nvec must be N nonnegative integers")
        object.__setattr__(self, "nvec", tuple(int(n) for n in self.nvec))


def small_divisor(params, query):
    lam = md.frequency(params, np.array(query.nvec))
    return float(np.sum(lam[: query.ell]) - np.sum(lam[query.ell :]))


def pairing_excluded(query):
    """True iff N even, ell = N/2 and the halves agree as multisets."""
    if query.N % 2 != 0 or query.ell != query.N // 2:
        return False
    return sorted(query.nvec[: query.ell]) == sorted(query.nvec[query.ell :])


def divisor_coefficients(nvec, ell, M):
    """(a_0, a_1..a_M) with psi = a_0 + sum_k m_k a_k; exact affine form."""
    nvec = np.asarray(nvec)
    signs = np.where(np.arange(nvec.size) < ell, 1.0, -1.0)
    a0 = float(np.sum(signs * (-(nvec.astype(float) ** 2))))
    br = sp.bracket(nvec)
    ks = np.arange(1, M + 1)
    ak = np.array([float(np.sum(signs * br ** (-(2.0 * k + 1.0)))) for k in ks])
    return a0, ak


def vandermonde_det(nvals):
    """Determinant of the matrix with rows 1/<n_j>^(2k+1), k = 1..q.

    Closed form: factoring 1/<n_j>^3 out of each column leaves a Vandermonde
    matrix in x_j = 1/<n_j>^2, so

        det = prod_j <n_j>^-3 * prod_{i<k} (x_k - x_i).

    The orientation matches the literal determinant (LU agrees including
    sign); entries must be pairwise distinct.
    """
    nvals = [int(n) for n in nvals]
    if len(set(nvals)) != len(nvals):
        raise PreconditionError("Vandermonde nodes must be pairwise distinct")
    br = sp.bracket(np.array(nvals))
    x = br**-2.0
    det = float(np.prod(br**-3.0))
    for i in range(len(nvals)):
        for k in range(i + 1, len(nvals)):
            det *= x[k] - x[i]
    return det


def vandermonde_matrix(nvals):
    br = sp.bracket(np.array(nvals))
    q = len(nvals)
    ks = np.arange(1, q + 1)
    return br[None, :] ** (-(2.0 * ks[:, None] + 1.0))


def lu_determinant(A):
    """Determinant by pivoted Gaussian elimination in extended precision.

    The frequency-tail matrices are badly conditioned for elimination (their
    columns cluster as the modes grow), so the float64 library determinant
    loses ~7 digits at q = 6; 80-bit arithmetic keeps the comparison against
    the closed form meaningful.
    """
    A = np.array(A, dtype=np.longdouble)
    n = A.shape[0]
    det = np.longdouble(1.0)
    for i in range(n):
        p = i + int(np.argmax(np.abs(A[i:, i])))
        if p != i:
            A[[i, p]] = A[[p, i]]
            det = -det
        if A[i, i] == 0.0:
            return 0.0
        det *= A[i, i]
        A[i + 1 :, i:] -= np.outer(A[i + 1 :, i] / A[i, i], A[i, i:])
    return float(det)


# ---------------------------------------------------------------------------
# Non-resonance scan (hot kernel, numba + numpy backends)
# ---------------------------------------------------------------------------


@njit_or_plain
def _scan_kernel(lam, ell, N, n_max, N0):
    """Scan canonical tuples (each half ascending); returns
    (gamma_hat, worst_tuple, excluded_count, scanned_count)."""
    n = np.zeros(N, dtype=np.int64)
    worst = np.zeros(N, dtype=np.int64)
    best = np.inf
    excluded = 0
    scanned = 0
    check_pair = N % 2 == 0 and ell == N // 2
    while True:
        scanned += 1
        paired = False
        if check_pair:
            paired = True
            for j in range(ell):
                if n[j] != n[ell + j]:
                    paired = False
                    break
        if paired:
            excluded += 1
        else:
            psi = 0.0
            for j in range(ell):
                psi += lam[n[j]]
            for j in range(ell, N):
                psi -= lam[n[j]]
            mx = 0
            for j in range(N):
                if n[j] > mx:
                    mx = n[j]
            val = abs(psi) * (1.0 + float(mx) * float(mx)) ** (0.5 * N0)
            if val < best:
                best = val
                for j in range(N):
                    worst[j] = n[j]
        # canonical odometer: within each half entries are ascending
        j = N - 1
        while j >= 0:
            n[j] += 1
            if n[j] <= n_max:
                for k in range(j + 1, N):
                    half_start = 0 if k < ell else ell
                    n[k] = n[k - 1] if k > half_start else 0
                break
            j -= 1
        if j < 0:
            break
    return best, worst, excluded, scanned


def _canonical_halves(n_max, m):
    if m == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(
        list(itertools.combinations_with_replacement(range(n_max + 1), m)), dtype=np.int64
    )


def _scan_numpy(lam, ell, N, n_max, N0):
    half_a = _canonical_halves(n_max, ell)
    half_b = _canonical_halves(n_max, N - ell)
    sum_a = lam[half_a].sum(axis=1) if ell else np.zeros(1)
    sum_b = lam[half_b].sum(axis=1) if N - ell else np.zeros(1)
    max_a = half_a.max(axis=1) if ell else np.zeros(1, dtype=np.int64)
    max_b = half_b.max(axis=1) if N - ell else np.zeros(1, dtype=np.int64)
    psi = sum_a[:, None] - sum_b[None, :]
    mx = np.maximum(max_a[:, None], max_b[None, :]).astype(float)
    val = np.abs(psi) * (1.0 + mx * mx) ** (0.5 * N0)
    excluded = 0
    if N % 2 == 0 and ell == N // 2:
        # canonical halves are equal iff they are the same row
        idx = np.arange(half_a.shape[0])
        val[idx, idx] = np.inf
        excluded = half_a.shape[0]
    flat = np.argmin(val)
    ia, ib = np.unravel_index(flat, val.shape)
    worst = np.concatenate([half_a[ia], half_b[ib]])
    scanned = half_a.shape[0] * half_b.shape[0]
    return float(val[ia, ib]), worst, excluded, scanned


@dataclass(frozen=True)
class NonresonanceReport:
    gamma_hat: float
    N0: int
    worst_tuple: DivisorQuery
    excluded_paired: int
    scanned: int
    per_ell: tuple

    def to_json(self):
        return {
            "gamma_hat": self.gamma_hat,
            "N0": self.N0,
            "worst_tuple": {
                "N": self.worst_tuple.N,
                "ell": self.worst_tuple.ell,
                "n": list(self.worst_tuple.nvec),
            },
            "excluded_paired": self.excluded_paired,
            "scanned": self.scanned,
        }


def default_N0(N):
    """Scan default; generous against the b + 2 + N requirement of the proof."""
    return 2 * N + 6


def scan_nonresonance(params, N, n_max, N0=None, budget=20_000_000):
    """gamma_hat = min |psi| max<n>^N0 over canonical non-paired tuples."""
    if N0 is None:
        N0 = default_N0(N)
    total = 0
    for ell in range(N + 1):
        total += math.comb(n_max + ell, ell) * math.comb(n_max + N - ell, N - ell)
    if total > budget:
        raise EnumerationBudgetError(f"{total} tuples exceed the budget {budget}")
    lam = md.frequency(params, np.arange(n_max + 1))
    gamma_hat = np.inf
    worst = None
    excluded_total = 0
    scanned_total = 0
    per_ell = []
    kernel = _scan_kernel if numba_enabled() else _scan_numpy
    for ell in range(N + 1):
        best, wtuple, excluded, scanned = kernel(lam, ell, N, n_max, float(N0))
        per_ell.append((ell, float(best)))
        excluded_total += int(excluded)
        scanned_total += int(scanned)
        if best < gamma_hat:
            gamma_hat = best
            worst = DivisorQuery(N, ell, tuple(int(v) for v in wtuple))
    return NonresonanceReport(
        gamma_hat=float(gamma_hat),
        N0=int(N0),
        worst_tuple=worst,
        excluded_paired=excluded_total,
        scanned=scanned_total,
        per_ell=tuple(per_ell),
    )


def paired_count(N, n_max):
    """Closed-form number of canonical paired tuples across all ell."""
    if N % 2 != 0:
        return 0
    return math.comb(n_max + N // 2, N // 2)


def find_zero_divisors(params, N, n_max, tol=0.0, limit=32):
    """Tuples (non-paired) with |psi| <= tol, distinct-entry ones first."""
    hits = []
    for ell in range(N + 1):
        for a in itertools.combinations_with_replacement(range(n_max + 1), ell):
            for b in itertools.combinations_with_replacement(range(n_max + 1), N - ell):
                q = DivisorQuery(N, ell, a + b)
                if pairing_excluded(q):
                    continue
                if abs(small_divisor(params, q)) <= tol:
                    hits.append(q)
    hits.sort(key=lambda q: (len(set(q.nvec)) != q.N, 0 in q.nvec, q.nvec))
    return hits[:limit]


# ---------------------------------------------------------------------------
# Monte-Carlo bad-set measure
# ---------------------------------------------------------------------------


@njit_or_plain
def _mc_kernel(samples, a0, ak, threshold):
    count = 0
    S, M = samples.shape
    for i in range(S):
        psi = a0
        for k in range(M):
            psi += samples[i, k] * ak[k]
        if abs(psi) < threshold:
            count += 1
    return count


def _mc_numpy(samples, a0, ak, threshold):
    psi = a0 + samples @ ak
    return int(np.count_nonzero(np.abs(psi) < threshold))


def wilson_interval(hits, n, z=1.96):
    if n == 0:
        return (0.0, 1.0)
    p = hits / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class BadSetEstimate:
    fraction: float
    ci_low: float
    ci_high: float
    samples: int
    gamma: float
    threshold: float


def bad_set_measure_mc(M, nvec, ell, gamma, N0, samples, rng):
    """Fraction of m in [-1/2,1/2]^M with |psi| < gamma max<n>^-N0 (Wilson CI)."""
    if samples < 1000:
        raise RangeError("use at least 10^3 Monte-Carlo samples")
    a0, ak = divisor_coefficients(np.asarray(nvec), ell, M)
    mx = float(np.max(sp.bracket(np.asarray(nvec))))
    threshold = gamma * mx ** (-float(N0))
    draws = rng.uniform(-0.5, 0.5, size=(samples, M))
    kernel = _mc_kernel if numba_enabled() else _mc_numpy
    hits = int(kernel(draws, a0, ak, threshold))
    lo, hi = wilson_interval(hits, samples)
    return BadSetEstimate(hits / samples, lo, hi, samples, gamma, threshold)


def bad_set_gamma_scaling(M, nvec, ell, gammas, N0, samples, rng):
    """Measure the estimate at several gamma values and fit the linear law."""
    ests = [bad_set_measure_mc(M, nvec, ell, g, N0, samples, rng) for g in gammas]
    x = np.array(gammas)
    y = np.array([e.fraction for e in ests])
    slope = float(np.polyfit(x, y, 1)[0]) if np.any(y > 0) else 0.0
    return ests, slope


# ---------------------------------------------------------------------------
# Homological equation and kernel projection on tuple tables
# ---------------------------------------------------------------------------


def solve_homological(table, params, N0=None, floor_scale=1e-10):
    """Solve psi * f = -mp per tuple; kernel tuples are zeroed, never divided.

    Raises SmallDivisorError when a non-kernel divisor falls below the
    safety floor floor_scale * max<n>^-N0 (reported, never regularized).
    """
    if N0 is None:
        Ns = {len(nvec) for (_, nvec) in table}
        N0 = default_N0(max(Ns)) if Ns else 6
    solution = {}
    for (ell, nvec), mp in table.items():
        q = DivisorQuery(len(nvec), ell, nvec)
        if pairing_excluded(q):
            solution[(ell, nvec)] = 0.0
            continue
        psi = small_divisor(params, q)
        floor = floor_scale * float(np.max(sp.bracket(np.asarray(nvec)))) ** (-float(N0))
        if abs(psi) < floor:
            raise SmallDivisorError(
                f"divisor {psi:.3e} below safety floor {floor:.3e} at {(ell, nvec)}",
                tuple_=(ell, nvec),
                value=psi,
            )
        solution[(ell, nvec)] = -mp / psi
    return solution


def homological_residual(solution, table, params):
    """max |psi f + mp| over solved (non-kernel) tuples; exact substitution."""
    worst = 0.0
    for (ell, nvec), f in solution.items():
        q = DivisorQuery(len(nvec), ell, nvec)
        if pairing_excluded(q):
            continue
        psi = small_divisor(params, q)
        mp = table[(ell, nvec)]
        denom = max(abs(mp), 1e-300)
        worst = max(worst, abs(psi * f + mp) / denom)
    return worst


def kernel_project(table):
    """Keep exactly the paired tuples (the kernel of the adjoint action)."""
    return {
        key: val
        for key, val in table.items()
        if pairing_excluded(DivisorQuery(len(key[1]), key[0], key[1]))
    }


def mean_pairing_table(U, p, ell, n_max, weight=1.0):
    """x-averaged products of signed projections, as a tuple table.

    T[(ell, n)] = weight * mean_x( prod_{j<=ell} (P_{n_j} u) *
                                   prod_{j>ell} (P_{n_j} conj u) ).

    This is the evaluation of a reversibility- and parity-preserving
    x-independent p-homogeneous symbol at the projected tuple; on paired
    tuples the conjugations cancel, which is why those entries are real.
    """
    u = U.plus
    table = {}
    norm = (2.0 * np.pi) ** (-p / 2.0)
    halves_a = itertools.combinations_with_replacement(range(n_max + 1), ell)
    for half_a in halves_a:
        for half_b in itertools.combinations_with_replacement(range(n_max + 1), p - ell):
            nvec = half_a + half_b
            total = 0.0 + 0.0j
            for signs in itertools.product(*[(1, -1) if n else (1,) for n in nvec]):
                if sum(s * n for s, n in zip(signs, nvec)) != 0:
                    continue
                val = 1.0 + 0.0j
                for j, (s, n) in enumerate(zip(signs, nvec)):
                    if j < ell:
                        val *= u.coeff(s * n)  # mode of P_n u
                    else:
                        val *= np.conj(u.coeff(-s * n))  # mode of P_n conj(u)
                total += val
            table[(ell, nvec)] = weight * total * norm
    return table
