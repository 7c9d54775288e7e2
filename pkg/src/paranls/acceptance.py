"""The acceptance battery: one function per criterion, shared by the test
suite and the ``verify`` CLI verb.

Each criterion returns a dict with ``passed``, the measured quantities, the
pinned thresholds and the elapsed time; ``passed`` requires both the
measurement and the runtime budget.  ``quick=True`` shrinks truncations and
grids (for CI smoke runs) without touching any tolerance.
"""

import time

import numpy as np

from . import calculus as ca
from . import evolve as ev
from . import model as md
from . import paralin as pl
from . import quantize as qz
from . import reduce as rd
from . import resonance as rs
from . import spectral as sp
from . import symbols as sy
from .errors import SmallDivisorError


def _random_separable_symbol(rng, J_coeff=12, real=False):
    c = sp.random_field(J_coeff, rng, decay=1.5, real=real)
    kind = rng.integers(0, 3)
    if kind == 0:
        prof = sy.profile_ixi(int(rng.integers(0, 3)))
        if real:
            prof = sy.PolyJapProfile({(2, 0.0): 1.0}) if rng.random() < 0.5 else sy.profile_one()
    elif kind == 1:
        prof = sy.profile_jap(float(rng.uniform(-2.0, 2.0)))
    else:
        prof = sy.PolyJapProfile({(0, 0.0): 1.0, (2, -1.0): float(rng.uniform(-1, 1))})
    return sy.symbol(c, prof)


def _result(cid, name, passed, measured, threshold, t0, budget, details=None):
    seconds = time.perf_counter() - t0
    return {
        "id": cid,
        "name": name,
        "passed": bool(passed) and seconds <= budget,
        "measured": measured,
        "threshold": threshold,
        "seconds": round(seconds, 3),
        "budget_seconds": budget,
        "details": details or {},
    }


def criterion_01_quantization_identity(quick=False):
    """Standard vs Weyl quantization after the symbol shift, entrywise."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    J = 32 if quick else 64
    worst = 0.0
    for _ in range(20):
        a = _random_separable_symbol(rng)
        T_std = qz.quantize(a, 1.0, J)
        T_weyl = qz.quantize(qz.std_to_weyl(a), 0.5, J)
        worst = max(worst, float(np.max(np.abs(T_std.entries - T_weyl.entries))))
    return _result(
        1, "quantization identity std vs weyl", worst <= 1e-13, worst, 1e-13, t0, 10.0
    )


def criterion_02_self_adjointness(quick=False):
    """Op^BW of real symbols is Hermitian; complex symbols are the control."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(102)
    J = 32 if quick else 64
    cfg = sy.CutoffConfig(0.25)
    worst_real = 0.0
    worst_control = np.inf
    for _ in range(20):
        a = _random_separable_symbol(rng, real=True)
        T = qz.bony_weyl(a, cfg, J)
        worst_real = max(worst_real, float(np.max(np.abs(T.adjoint().entries - T.entries))))
        a_c = sy.symbol_add(a, sy.symbol_scale(a, 0.5j))
        T_c = qz.bony_weyl(a_c, cfg, J)
        worst_control = min(
            worst_control, float(np.max(np.abs(T_c.adjoint().entries - T_c.entries)))
        )
    ok = worst_real <= 1e-12 and worst_control > 1e-6
    return _result(
        2,
        "self-adjointness of real symbols",
        ok,
        {"hermitian_defect": worst_real, "control_defect": worst_control},
        {"hermitian_defect": 1e-12, "control_defect": "> 1e-6"},
        t0,
        10.0,
    )


def criterion_03_moyal_exactness(quick=False):
    """f(x) # (i xi) at rho = 1 equals f i xi - f'/2; odd-term antisymmetry."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(103)
    J = 24 if quick else 48
    f_field = sp.random_field(10, rng, decay=1.5)
    a = sy.symbol(f_field)
    b = sy.symbol_x_independent(sy.profile_ixi(1), J=0)
    comp = ca.compose_expansion(a, b, 1)
    expected = sy.symbol_add(
        sy.symbol(f_field, sy.profile_ixi(1)),
        sy.symbol(sp.derivative(f_field) * (-0.5)),
    )
    lhs = qz.quantize(a, 0.5, J) @ qz.quantize(b, 0.5, J)
    rhs = qz.quantize(comp, 0.5, J)
    rhs_closed = qz.quantize(expected, 0.5, J)
    res_matrix = float(np.max(np.abs(lhs.entries - rhs.entries)))
    res_closed = float(np.max(np.abs(lhs.entries - rhs_closed.entries)))

    # odd expansion terms change sign when the factors are swapped
    g_field = sp.random_field(10, rng, decay=1.5)
    a2 = sy.symbol(f_field, sy.profile_ixi(1))
    b2 = sy.symbol(g_field, sy.profile_ixi(1))
    x = sp.grid(65)
    xi = np.linspace(-8, 8, 21)
    anti = 0.0
    for k in (1, 3):
        tk_ab = ca.expansion_term(a2, b2, k).evaluate(x, xi)
        tk_ba = ca.expansion_term(b2, a2, k).evaluate(x, xi)
        anti = max(anti, float(np.max(np.abs(tk_ab + tk_ba))))
    ok = res_matrix <= 1e-12 and res_closed <= 1e-12 and anti <= 1e-10
    return _result(
        3,
        "Moyal expansion exactness at order one",
        ok,
        {"matrix_residual": res_matrix, "closed_form_residual": res_closed, "antisymmetry": anti},
        {"matrix_residual": 1e-12, "antisymmetry": 1e-10},
        t0,
        5.0,
    )


def criterion_04_remainder_smoothing(quick=False):
    """Composition remainder decays at least like the guaranteed order."""
    t0 = time.perf_counter()
    J = 64 if quick else 128
    cfg = sy.CutoffConfig(0.25)
    c = sp.field_from_modes({1: np.sqrt(2 * np.pi) / 2, -1: np.sqrt(2 * np.pi) / 2}, 1)
    a = sy.symbol(c, sy.profile_ixi(1))
    rep = ca.remainder_order(a, a, 3, cfg, J)
    ok = rep.measured_order >= rep.threshold
    return _result(
        4,
        "composition remainder smoothing order",
        ok,
        rep.measured_order,
        rep.threshold,
        t0,
        60.0,
        details=rep.to_json(),
    )


def criterion_05_paraproduct_exactness(quick=False):
    """sum M_i + M^Theta reproduces the product for p = 2, 3, 4."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(105)
    J = 32 if quick else 64
    cfg = sy.CutoffConfig(0.25)
    worst = 0.0
    for p in (2, 3, 4):
        fields = [sp.random_field(J, rng, decay=1.2) for _ in range(p)]
        split = pl.paraproduct_split(fields, cfg)
        worst = max(worst, pl.split_sum_defect(split, fields))
    return _result(
        5, "paraproduct split exactness", worst <= 1e-12, worst, 1e-12, t0, 10.0
    )


def criterion_06_paralinearization(quick=False):
    """Reconstruction plus the principal-coefficient identity."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(106)
    J = 24 if quick else 32
    cfg = sy.CutoffConfig(0.25)
    u = 0.1 * sp.random_field(J, rng, decay=2.5, even=True)
    U = sp.pair_from_plus(u)
    worst_rec = 0.0
    worst_a2 = 0.0
    for f in (md.CUBIC_GAUGE, md.CUBIC_FULLY_NONLINEAR):
        para = pl.paralinearize(f, U, cfg)
        worst_rec = max(worst_rec, pl.reconstruction_residual(para, f, U))
        n = md.dealias_grid_size(J, f.qbar)
        uvals = sp.grid_values(u, n)
        expected_a2 = np.abs(uvals) ** 2 if f is md.CUBIC_FULLY_NONLINEAR else np.zeros(n)
        a2_vals = sp.grid_values(para.diag_coeffs[2], n)
        worst_a2 = max(
            worst_a2,
            float(np.max(np.abs(a2_vals - expected_a2))),
            float(np.max(np.abs(a2_vals.imag))),
        )
    ok = worst_rec <= 1e-11 and worst_a2 <= 1e-12
    return _result(
        6,
        "paralinearization reconstruction",
        ok,
        {"reconstruction": worst_rec, "a2_identity": worst_a2},
        {"reconstruction": 1e-11, "a2_identity": 1e-12},
        t0,
        10.0,
    )


def criterion_07_reduction_formulas(quick=False):
    """Diagonalization, straightening, order-one and order-zero residuals."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(107)
    J = 12 if quick else 16
    a2 = 0.1 * sp.random_field(J, rng, decay=2.0, even=True, real=True)
    b2 = 0.1 * sp.random_field(J, rng, decay=2.0, even=True)
    diag = rd.diagonalize_principal(a2, b2)
    d_inv = diag.inverse_defect()
    d_conj = rd.diago_identity_defect(diag, a2, b2)

    st = rd.straighten(a2)
    d_straight = st.identity_defect(a2)
    gamma_endpoint = abs(
        sp.evaluate_at(st.gamma_field, np.array([0.0]))[0]
        - sp.evaluate_at(st.gamma_field, np.array([2.0 * np.pi]))[0]
    )

    a1_raw = sp.random_field(J, rng, decay=2.0, real=True)
    a1 = a1_raw - sp.constant_field(sp.mean_value(a1_raw), J)
    s_corr = rd.eliminate_order_one(a1, st.a2_const)
    d_order1 = rd.order_one_residual(s_corr, a1, st.a2_const)

    a0 = sy.symbol(sp.random_field(J, rng, decay=1.5))
    n0 = rd.constant_coeff_step(a0, st.a2_const)
    d_order0 = rd.constant_coeff_residual(n0, a0, st.a2_const)

    ok = (
        d_inv <= 1e-12
        and d_conj <= 1e-12
        and d_straight <= 1e-10
        and gamma_endpoint <= 1e-12
        and d_order1 <= 1e-11
        and d_order0 <= 1e-11
    )
    return _result(
        7,
        "reduction formulas",
        ok,
        {
            "diago_inverse": d_inv,
            "diago_identity": d_conj,
            "straightening": d_straight,
            "gamma_periodicity": gamma_endpoint,
            "order_one_residual": d_order1,
            "order_zero_residual": d_order0,
        },
        {"diago": 1e-12, "straightening": 1e-10, "homological": 1e-11},
        t0,
        10.0,
    )


def criterion_08_vandermonde(quick=False):
    """Closed-form determinant against LU for q <= 6."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(108)
    worst = 0.0
    for _ in range(100):
        q = int(rng.integers(1, 7))
        nodes = rng.choice(np.arange(0, 40), size=q, replace=False)
        closed = rs.vandermonde_det(nodes)
        lu = rs.lu_determinant(rs.vandermonde_matrix(list(nodes)))
        worst = max(worst, abs(closed - lu) / max(abs(lu), 1e-300))
    return _result(
        8, "Vandermonde closed form vs LU", worst <= 1e-10, worst, 1e-10, t0, 5.0
    )


def criterion_09_nonresonance_scan(quick=False):
    """Generic potentials are non-resonant on the scanned range; the
    unperturbed one has an exact zero divisor."""
    t0 = time.perf_counter()
    n_max = 15 if quick else 30
    seeds = 5 if quick else 20
    min_gamma = np.inf
    for seed in range(seeds):
        rng = np.random.default_rng(900 + seed)
        params = md.random_params(5, rng)
        rep = rs.scan_nonresonance(params, 3, n_max, N0=12)
        min_gamma = min(min_gamma, rep.gamma_hat)
    zero_params = md.PotentialParams(np.zeros(5))
    zeros = rs.find_zero_divisors(zero_params, 3, max(n_max, 13), tol=0.0)
    pythagorean = [q for q in zeros if len(set(q.nvec)) == 3 and 0 not in q.nvec]
    ok = min_gamma > 0.0 and len(pythagorean) > 0
    return _result(
        9,
        "non-resonance scan",
        ok,
        {
            "min_gamma_hat": float(min_gamma),
            "zero_divisor_example": list(pythagorean[0].nvec) if pythagorean else None,
        },
        {"min_gamma_hat": "> 0", "zero_divisor": "exists for m = 0"},
        t0,
        120.0,
    )


def criterion_10_homological_solver(quick=False):
    """Division residuals, kernel preservation, kernel-entry reality."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(110)
    params = md.random_params(5, rng)
    n_max = 10 if quick else 20

    table = {}
    for ell in range(4):
        for _ in range(200):
            nvec = tuple(sorted(rng.integers(0, n_max + 1, size=ell))) + tuple(
                sorted(rng.integers(0, n_max + 1, size=3 - ell))
            )
            table[(ell, nvec)] = complex(rng.standard_normal(), rng.standard_normal())
    try:
        sol = rs.solve_homological(table, params, N0=12)
        residual = rs.homological_residual(sol, table, params)
    except SmallDivisorError:
        sol, residual = None, np.inf

    # kernel preservation on an even-p table
    table4 = {}
    for _ in range(100):
        half = tuple(sorted(rng.integers(0, n_max + 1, size=2)))
        other = tuple(sorted(rng.integers(0, n_max + 1, size=2)))
        table4[(2, half + other)] = complex(rng.standard_normal(), rng.standard_normal())
        table4[(2, half + half)] = complex(rng.standard_normal(), rng.standard_normal())
    sol4 = rs.solve_homological(table4, params, N0=12)
    kernel_ok = all(
        sol4[key] == 0.0
        for key in table4
        if rs.pairing_excluded(rs.DivisorQuery(4, key[0], key[1]))
    )

    u = sp.random_field(12, rng, decay=2.0, even=True)
    U = sp.pair_from_plus(u)
    ktab = rs.kernel_project(rs.mean_pairing_table(U, 2, 1, 8, weight=2.0))
    ktab4 = rs.kernel_project(rs.mean_pairing_table(U, 4, 2, 5))
    kernel_imag = max(
        max((abs(v.imag) for v in ktab.values()), default=0.0),
        max((abs(v.imag) for v in ktab4.values()), default=0.0),
    )
    ok = residual <= 1e-12 and kernel_ok and kernel_imag <= 1e-12
    return _result(
        10,
        "homological solver",
        ok,
        {"residual": float(residual), "kernel_untouched": kernel_ok, "kernel_imag": kernel_imag},
        {"residual": 1e-12, "kernel_imag": 1e-12},
        t0,
        30.0,
    )


def criterion_11_energy_cancellation(quick=False):
    """Kernel-projected real perturbations conserve the norm; complex ones
    visibly do not."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(111)
    J = 24 if quick else 32
    params = md.random_params(5, rng)
    z = 0.3 * sp.random_field(J, rng, decay=2.0, even=True)
    Z0 = sp.pair_from_plus(z)

    u = sp.random_field(12, rng, decay=2.0, even=True)
    ktab = rs.kernel_project(rs.mean_pairing_table(sp.pair_from_plus(u), 2, 1, 8, weight=2.0))
    level = sum(v.real for v in ktab.values())
    js = np.arange(-J, J + 1)
    a_real = level * (1.0 + sp.bracket(js) ** -2.0)  # real, even in xi
    T = 2.0 if quick else 10.0
    drift_real = ev.linear_model_energy(Z0, params, 0.05, a_real, T, dt=0.01, s=2.0)
    drift_ctrl = ev.linear_model_energy(
        Z0, params, 0.05, a_real + 0.01j, T, dt=0.01, s=2.0
    )
    expected_ctrl = np.expm1(0.01 * T)
    ok = drift_real <= 1e-9 and drift_ctrl > 0.5 * expected_ctrl
    return _result(
        11,
        "energy cancellation for kernel-projected symbols",
        ok,
        {"drift_real": drift_real, "drift_control": drift_ctrl},
        {"drift_real": 1e-9, "drift_control": f"> {0.5 * expected_ctrl:.3f}"},
        t0,
        60.0,
    )


def criterion_12_evolution_sanity(quick=False):
    """Linear isometry, structure preservation, reversibility defect."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(112)
    J = 32 if quick else 64
    params = md.random_params(5, rng)
    u0 = 0.05 * sp.random_field(J, rng, decay=3.0, even=True)
    U0 = sp.pair_from_plus(u0)

    rec_lin = ev.integrate(
        U0, params, md.ZERO_NONLINEARITY, [2.0], {"t_max": 2.0 if quick else 10.0},
        dt_policy={"mode": "fixed", "dt": 0.05},
    )
    iso = float(np.max(np.abs(rec_lin.norm(2.0) / rec_lin.norm(2.0)[0] - 1.0)))

    rec_nl = ev.integrate(
        U0, params, md.CUBIC_GAUGE, [4.0], {"t_max": 2.0 if quick else 10.0},
        dt_policy={"mode": "fixed", "dt": 2e-3},
    )
    parity = float(np.max(rec_nl.parity_defects))
    realdef = float(np.max(rec_nl.realification_defects))

    T_rev = 1.0 if quick else 5.0
    rev = ev.reversibility_test(U0, params, md.CUBIC_GAUGE, T_rev, dt=1e-3)
    ok = iso <= 1e-11 and parity <= 1e-9 and realdef <= 1e-9 and rev <= 1e-6
    return _result(
        12,
        "evolution sanity",
        ok,
        {"linear_isometry": iso, "parity": parity, "realification": realdef, "reversibility": rev},
        {"linear_isometry": 1e-11, "parity": 1e-9, "realification": 1e-9, "reversibility": 1e-6},
        t0,
        120.0,
    )


def criterion_13_lifespan_scaling(quick=False):
    """Doubling-time scaling for the gauge cubic nonlinearity.

    Runs the scan as specified (eps in {0.1, 0.05, 0.025, 0.0125}, J = 64,
    s = 4, doubling threshold 2x) with budget t_max = 4 eps^-2; censored
    runs are excluded from the fit and an all-censored scan is reported as
    inconclusive (a failed criterion, not an exception).
    """
    from . import harness as hn

    t0 = time.perf_counter()
    eps_grid = [0.1, 0.05] if quick else [0.1, 0.05, 0.025, 0.0125]
    J = 32 if quick else 64
    # 4 eps^-2 reaches well beyond the local-theory window at every amplitude;
    # the absolute cap keeps the scan inside the stated runtime budget.
    cap = 200.0 if quick else 4000.0
    rng = np.random.default_rng(113)
    params = md.random_params(5, rng)
    fit = hn.lifespan_scan(
        params,
        md.CUBIC_GAUGE,
        eps_grid,
        J=J,
        s=4.0,
        norm_factor=2.0,
        t_max_fn=lambda eps: min(4.0 * eps**-2, cap),
        dt_policy={"mode": "adaptive", "rtol": 1e-8, "dt0": 1e-2, "dt_max": 0.25},
    )
    zero_fit = hn.lifespan_scan(
        md.PotentialParams(np.zeros(5)),
        md.CUBIC_GAUGE,
        eps_grid[:2],
        J=J,
        s=4.0,
        norm_factor=2.0,
        t_max_fn=lambda eps: min(400.0, cap),
        dt_policy={"mode": "adaptive", "rtol": 1e-8, "dt0": 1e-2, "dt_max": 0.25},
    )
    ok = fit.status == "ok" and fit.slope is not None and fit.slope <= -1.5
    return _result(
        13,
        "lifespan scaling (bounded claim)",
        ok,
        {
            "status": fit.status,
            "slope": fit.slope,
            "doubling_times": fit.doubling_times,
            "censored": fit.censored,
            "zero_potential_status": zero_fit.status,
            "zero_potential_doubling": zero_fit.doubling_times,
        },
        {"slope": "<= -1.5 on uncensored fit"},
        t0,
        900.0,
    )


ALL_CRITERIA = [
    criterion_01_quantization_identity,
    criterion_02_self_adjointness,
    criterion_03_moyal_exactness,
    criterion_04_remainder_smoothing,
    criterion_05_paraproduct_exactness,
    criterion_06_paralinearization,
    criterion_07_reduction_formulas,
    criterion_08_vandermonde,
    criterion_09_nonresonance_scan,
    criterion_10_homological_solver,
    criterion_11_energy_cancellation,
    criterion_12_evolution_sanity,
    criterion_13_lifespan_scaling,
]


def run_all(quick=False, skip=()):
    results = []
    for fn in ALL_CRITERIA:
        cid = int(fn.__name__.split("_")[1])
        if cid in skip:
            continue
        results.append(fn(quick=quick))
    return results
