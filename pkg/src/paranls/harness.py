"""Experiment drivers: configuration, simulation, lifespan scans, resonance
scans, and report emission.

Determinism contract: every run is a pure function of (config, seed); CSV
floats are written with repr-precision and JSON with sorted keys, so
identical inputs give byte-identical outputs.  Every summary embeds the
resolved config, its hash and the package version.
"""

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from . import evolve as ev
from . import model as md
from . import resonance as rs
from . import spectral as sp
from .errors import ConfigError

CODE_VERSION = "0.1.0"

NONLINEARITY_PRESETS = {
    "zero": md.ZERO_NONLINEARITY,
    "cubic_gauge": md.CUBIC_GAUGE,
    "cubic_fully_nonlinear": md.CUBIC_FULLY_NONLINEAR,
}


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

DEFAULT_CONFIG = {
    "J": 64,
    "s": [4.0],
    "delta": 0.25,
    "dt": {"mode": "adaptive", "rtol": 1e-9, "dt0": 1e-2},
    "params": {"seed": 7, "M": 5},
    "nonlinearity": "cubic_gauge",
    "eps": 0.05,
    "eps_grid": [0.1, 0.05, 0.025, 0.0125],
    "stop": {"t_max": 10.0, "norm_factor": None},
    "resonance": {"N": 3, "n_max": 30, "N0": 12, "seeds": 20},
    "seed": 1234,
}


def _fail(path, message):
    raise ConfigError(f"config.{path}: {message}")


def _expect_number(obj, path, positive=False):
    if not isinstance(obj, (int, float)) or isinstance(obj, bool):
        _fail(path, f"expected a number, got {type(obj).__name__}")
    if positive and obj <= 0:
        _fail(path, f"expected a positive number, got {obj}")
    return float(obj)


def _expect_int(obj, path, minimum=None):
    if not isinstance(obj, int) or isinstance(obj, bool):
        _fail(path, f"expected an integer, got {type(obj).__name__}")
    if minimum is not None and obj < minimum:
        _fail(path, f"expected >= {minimum}, got {obj}")
    return obj


def validate_config(raw):
    """Merge over the defaults and validate; raises ConfigError with the
    offending key path."""
    if not isinstance(raw, dict):
        raise ConfigError("config: expected a JSON object at top level")
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))
    for key, val in raw.items():
        if key not in DEFAULT_CONFIG:
            _fail(key, "unknown key")
        if isinstance(DEFAULT_CONFIG[key], dict) and isinstance(val, dict):
            cfg[key].update(val)
        else:
            cfg[key] = val

    _expect_int(cfg["J"], "J", minimum=4)
    if not isinstance(cfg["s"], list) or not cfg["s"]:
        _fail("s", "expected a nonempty list of Sobolev indices")
    cfg["s"] = [_expect_number(v, f"s[{i}]") for i, v in enumerate(cfg["s"])]
    d = _expect_number(cfg["delta"], "delta", positive=True)
    if d > 0.5:
        _fail("delta", "cut-off width must be <= 1/2")

    dt = cfg["dt"]
    if dt.get("mode") not in ("fixed", "adaptive"):
        _fail("dt.mode", "expected 'fixed' or 'adaptive'")
    if dt["mode"] == "fixed":
        _expect_number(dt.get("dt", 0), "dt.dt", positive=True)

    p = cfg["params"]
    if "values" in p:
        if not isinstance(p["values"], list) or not p["values"]:
            _fail("params.values", "expected a nonempty list")
        for i, v in enumerate(p["values"]):
            x = _expect_number(v, f"params.values[{i}]")
            if abs(x) > 0.5:
                _fail(f"params.values[{i}]", "must lie in [-1/2, 1/2]")
    else:
        _expect_int(p.get("seed", 0), "params.seed", minimum=0)
        _expect_int(p.get("M", 0), "params.M", minimum=1)

    nl = cfg["nonlinearity"]
    if isinstance(nl, str):
        if nl not in NONLINEARITY_PRESETS:
            _fail("nonlinearity", f"unknown preset {nl!r}; use one of {sorted(NONLINEARITY_PRESETS)}")
    elif isinstance(nl, list):
        try:
            md.nonlinearity_from_json(nl)
        except Exception as exc:
            _fail("nonlinearity", f"invalid monomial list ({exc})")
    else:
        _fail("nonlinearity", "expected a preset name or a monomial list")

    _expect_number(cfg["eps"], "eps", positive=True)
    if not isinstance(cfg["eps_grid"], list) or len(cfg["eps_grid"]) < 1:
        _fail("eps_grid", "expected a list of amplitudes")
    stop = cfg["stop"]
    _expect_number(stop.get("t_max", 0), "stop.t_max", positive=True)
    if stop.get("norm_factor") is not None:
        _expect_number(stop["norm_factor"], "stop.norm_factor", positive=True)
    r = cfg["resonance"]
    _expect_int(r.get("N", 0), "resonance.N", minimum=2)
    _expect_int(r.get("n_max", 0), "resonance.n_max", minimum=1)
    _expect_int(r.get("N0", 0), "resonance.N0", minimum=1)
    _expect_int(cfg["seed"], "seed", minimum=0)
    return cfg


def load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    return validate_config(raw)


def config_hash(cfg):
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


def resolve_params(cfg):
    p = cfg["params"]
    if "values" in p:
        return md.PotentialParams(np.array(p["values"], dtype=float))
    rng = np.random.default_rng(p["seed"])
    return md.random_params(p["M"], rng)


def resolve_nonlinearity(cfg):
    nl = cfg["nonlinearity"]
    if isinstance(nl, str):
        return NONLINEARITY_PRESETS[nl]
    return md.nonlinearity_from_json(nl)


# ---------------------------------------------------------------------------
# Shared pieces
# ---------------------------------------------------------------------------


def initial_data(J, eps, s):
    """Fixed even three-cosine profile scaled to H^s norm eps."""
    half = np.sqrt(2.0 * np.pi) / 2.0
    shape = sp.field_from_modes(
        {1: half, -1: half, 2: 0.6 * half, -2: 0.6 * half, 3: 0.25 * half, -3: 0.25 * half},
        J,
    )
    return shape * (eps / sp.sobolev_norm(shape, s))


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True, default=float)
        fh.write("\n")


def _summary_base(cfg):
    return {"config": cfg, "config_hash": config_hash(cfg), "code_version": CODE_VERSION}


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------


def cmd_simulate(cfg, outdir):
    os.makedirs(outdir, exist_ok=True)
    params = resolve_params(cfg)
    f = resolve_nonlinearity(cfg)
    u0 = initial_data(cfg["J"], cfg["eps"], cfg["s"][0])
    U0 = sp.pair_from_plus(u0)
    stop = {"t_max": cfg["stop"]["t_max"]}
    if cfg["stop"].get("norm_factor"):
        stop["norm_factor"] = cfg["stop"]["norm_factor"]
    rec = ev.integrate(U0, params, f, cfg["s"], stop, dt_policy=cfg["dt"])
    header, rows = rec.to_rows()
    _write_csv(os.path.join(outdir, "trajectory.csv"), header, rows)
    summary = _summary_base(cfg)
    summary.update(
        {
            "terminal_reason": rec.terminal_reason,
            "steps": rec.steps_taken,
            "t_final": float(rec.times[-1]),
            "norm_initial": float(rec.norm(cfg["s"][0])[0]),
            "norm_final": float(rec.norm(cfg["s"][0])[-1]),
            "max_parity_defect": float(np.max(rec.parity_defects)),
            "max_realification_defect": float(np.max(rec.realification_defects)),
        }
    )
    _write_json(os.path.join(outdir, "summary.json"), summary)
    return summary


@dataclass
class LifespanFit:
    eps_values: list
    doubling_times: list
    censored: list
    slope: float
    intercept: float
    stderr: float
    status: str

    def to_json(self):
        return {
            "eps_values": self.eps_values,
            "doubling_times": self.doubling_times,
            "censored": self.censored,
            "slope": self.slope,
            "intercept": self.intercept,
            "stderr": self.stderr,
            "status": self.status,
        }


def lifespan_scan(params, f, eps_grid, J, s, norm_factor, t_max_fn, dt_policy):
    """Doubling times over an amplitude grid, with a censored-aware fit.

    A run is censored when it reaches its time budget without the norm
    hitting norm_factor times its initial value; censored runs are excluded
    from the log-log fit.  Status: "ok" for >= 4 uncensored points spanning
    a decade, "partial" when some fit is possible, "inconclusive" when all
    runs are censored.
    """
    doubling, censored = [], []
    for eps in eps_grid:
        u0 = initial_data(J, eps, s)
        U0 = sp.pair_from_plus(u0)
        rec = ev.integrate(
            U0,
            params,
            f,
            [s],
            {"t_max": t_max_fn(eps), "norm_factor": norm_factor},
            dt_policy=dt_policy,
        )
        if rec.terminal_reason == "norm_threshold":
            doubling.append(float(rec.times[-1]))
            censored.append(False)
        else:
            doubling.append(float(rec.times[-1]))
            censored.append(True)
    xs = [math.log(e) for e, c in zip(eps_grid, censored) if not c]
    ys = [math.log(t) for t, c in zip(doubling, censored) if not c]
    if len(xs) >= 2:
        coeffs, cov = np.polyfit(xs, ys, 1, cov=True)
        slope, intercept = float(coeffs[0]), float(coeffs[1])
        stderr = float(np.sqrt(max(cov[0, 0], 0.0)))
        span = max(xs) - min(xs)
        status = "ok" if len(xs) >= 4 and span >= math.log(10.0) - 1e-9 else "partial"
    else:
        slope = intercept = stderr = None
        status = "inconclusive"
    return LifespanFit(list(eps_grid), doubling, censored, slope, intercept, stderr, status)


def cmd_lifespan_scan(cfg, outdir):
    os.makedirs(outdir, exist_ok=True)
    params = resolve_params(cfg)
    f = resolve_nonlinearity(cfg)
    t_max = cfg["stop"]["t_max"]
    fit = lifespan_scan(
        params,
        f,
        cfg["eps_grid"],
        J=cfg["J"],
        s=cfg["s"][0],
        norm_factor=cfg["stop"].get("norm_factor") or 2.0,
        t_max_fn=lambda eps: t_max,
        dt_policy=cfg["dt"],
    )
    summary = _summary_base(cfg)
    summary["fit"] = fit.to_json()
    _write_json(os.path.join(outdir, "lifespan.json"), summary)
    _write_csv(
        os.path.join(outdir, "lifespan.csv"),
        ["eps", "T_double", "censored"],
        [[e, t, int(c)] for e, t, c in zip(fit.eps_values, fit.doubling_times, fit.censored)],
    )
    return summary


def cmd_resonance_scan(cfg, outdir):
    os.makedirs(outdir, exist_ok=True)
    r = cfg["resonance"]
    params = resolve_params(cfg)
    rep = rs.scan_nonresonance(params, r["N"], r["n_max"], N0=r["N0"])
    rows = []
    for ell, gamma in rep.per_ell:
        rows.append([r["N"], ell, " ".join(map(str, rep.worst_tuple.nvec)), gamma])
    _write_csv(
        os.path.join(outdir, "resonance.csv"),
        ["N", "ell", "worst_tuple", "gamma_hat_ell"],
        rows,
    )
    summary = _summary_base(cfg)
    summary["report"] = rep.to_json()
    _write_json(os.path.join(outdir, "resonance.json"), summary)
    return summary


def cmd_verify(outdir, quick=False, skip=()):
    from . import acceptance

    os.makedirs(outdir, exist_ok=True)
    results = acceptance.run_all(quick=quick, skip=skip)
    report = {
        "quick": quick,
        "code_version": CODE_VERSION,
        "criteria": results,
        "all_passed": all(r["passed"] for r in results),
    }
    _write_json(os.path.join(outdir, "verify.json"), report)
    return report
