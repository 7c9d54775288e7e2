"""Command-line interface.

Verbs: simulate, lifespan-scan, resonance-scan, calculus-verify,
paralinearize-check, reduce-demo, verify.  Exit codes: 0 pass, 1 failure,
2 configuration error.
"""

import argparse
import json
import sys

import numpy as np

from . import harness as hn
from . import model as md
from . import paralin as pl
from . import reduce as rd
from . import spectral as sp
from . import symbols as sy
from .errors import ConfigError, ParanlsError


def _load(args):
    if args.config:
        cfg = hn.load_config(args.config)
    else:
        cfg = hn.validate_config({})
    if args.seed is not None:
        cfg["seed"] = args.seed
    return cfg


def _emit(obj):
    print(json.dumps(obj, indent=1, sort_keys=True, default=float))


def cmd_simulate(args):
    cfg = _load(args)
    summary = hn.cmd_simulate(cfg, args.out)
    _emit(summary)
    return 0


def cmd_lifespan_scan(args):
    cfg = _load(args)
    summary = hn.cmd_lifespan_scan(cfg, args.out)
    _emit(summary)
    return 0 if summary["fit"]["status"] != "inconclusive" else 1


def cmd_resonance_scan(args):
    cfg = _load(args)
    summary = hn.cmd_resonance_scan(cfg, args.out)
    _emit(summary)
    return 0


def cmd_calculus_verify(args):
    from . import acceptance

    cfg = _load(args)  # noqa: F841 - verbs share the flag surface
    results = [
        acceptance.criterion_01_quantization_identity(quick=args.quick),
        acceptance.criterion_02_self_adjointness(quick=args.quick),
        acceptance.criterion_03_moyal_exactness(quick=args.quick),
        acceptance.criterion_04_remainder_smoothing(quick=args.quick),
    ]
    for r in results:
        print(f"[{'PASS' if r['passed'] else 'FAIL'}] {r['id']:02d} {r['name']} ({r['seconds']}s)")
    _emit({"criteria": results})
    return 0 if all(r["passed"] for r in results) else 1


def cmd_paralinearize_check(args):
    cfg = _load(args)
    f = hn.resolve_nonlinearity(cfg)
    rng = np.random.default_rng(cfg["seed"])
    u = 0.1 * sp.random_field(cfg["J"], rng, decay=2.5, even=True)
    U = sp.pair_from_plus(u)
    cut = sy.CutoffConfig(cfg["delta"])
    para = pl.paralinearize(f, U, cut)
    report = {
        "nonlinearity": f.label or "custom",
        "reconstruction_residual": pl.reconstruction_residual(para, f, U),
        "a2_imag_max": para.a2_imag_max,
        "structure_defects": para.structure_defects,
    }
    _emit(report)
    ok = report["reconstruction_residual"] <= 1e-11 and report["a2_imag_max"] <= 1e-12
    return 0 if ok else 1


def cmd_reduce_demo(args):
    cfg = _load(args)
    f = hn.resolve_nonlinearity(cfg)
    if not f.monomials:
        f = md.CUBIC_FULLY_NONLINEAR
    rng = np.random.default_rng(cfg["seed"])
    u = 0.1 * sp.random_field(min(cfg["J"], 24), rng, decay=2.5, even=True)
    U = sp.pair_from_plus(u)
    report = rd.reduction_pipeline(f, U, sy.CutoffConfig(cfg["delta"]))
    _emit(report)
    return 0


def cmd_verify(args):
    skip = tuple(int(x) for x in (args.skip.split(",") if args.skip else []) if x)
    report = hn.cmd_verify(args.out, quick=args.quick, skip=skip)
    for r in report["criteria"]:
        status = "PASS" if r["passed"] else "FAIL"
        print(f"[{status}] {r['id']:02d} {r['name']} ({r['seconds']}s)")
    print("all passed" if report["all_passed"] else "FAILURES present")
    return 0 if report["all_passed"] else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="paranls",
        description="Paradifferential calculus and normal-form experiments for "
        "fully nonlinear Schrodinger equations on the circle",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    verbs = {
        "simulate": cmd_simulate,
        "lifespan-scan": cmd_lifespan_scan,
        "resonance-scan": cmd_resonance_scan,
        "calculus-verify": cmd_calculus_verify,
        "paralinearize-check": cmd_paralinearize_check,
        "reduce-demo": cmd_reduce_demo,
        "verify": cmd_verify,
    }
    for name, fn in verbs.items():
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None, help="JSON config path")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", type=str, default="out", help="output directory")
        p.add_argument("--quick", action="store_true", help="reduced sizes for CI")
        if name == "verify":
            p.add_argument("--skip", type=str, default="", help="comma-separated criterion ids")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        code = args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ParanlsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return code


if __name__ == "__main__":
    sys.exit(main())
