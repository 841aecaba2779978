"""Command-line front end: ``verify``, ``classify`` and ``submersion``.

Settings resolve as flag > environment variable > default.  Environment
variables: ``CURVRIGID_SEED``, ``CURVRIGID_TOL``, ``CURVRIGID_MAX_DIM``,
``CURVRIGID_JSON`` (1/true/yes) and ``CURVRIGID_FIXTURE`` (comma separated).

Exit codes: 0 all checks pass, 1 at least one FAIL, 2 configuration or
schema error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import curvature as cv
from .errors import CurvRigidError
from .suites import SuiteConfig, run_battery

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
REPORT_VERSION = 1


class ConfigError(Exception):
    pass


def _parse_int(text, what: str) -> int:
    try:
        if isinstance(text, int):
            return text
        return int(str(text), 10)
    except ValueError as exc:
        raise ConfigError(f"{what} must be an integer, got {text!r}") from exc


def _parse_float(text, what: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"{what} must be a number, got {text!r}") from exc


def build_config(args: argparse.Namespace, environ=None) -> tuple[SuiteConfig, bool]:
    """Resolve flags and environment into a validated config and the JSON switch."""
    env = os.environ if environ is None else environ

    def pick(flag, key):
        if flag is not None:
            return flag
        v = env.get(key)
        return None if v in (None, "") else v

    seed = pick(args.seed, "CURVRIGID_SEED")
    tol = pick(args.tol, "CURVRIGID_TOL")
    max_dim = pick(args.max_dim, "CURVRIGID_MAX_DIM")
    fixtures = args.fixture or None
    if fixtures is None and env.get("CURVRIGID_FIXTURE"):
        fixtures = [f for f in env["CURVRIGID_FIXTURE"].split(",") if f]
    as_json = bool(args.json)
    if not as_json and env.get("CURVRIGID_JSON", "").lower() in ("1", "true", "yes"):
        as_json = True
    try:
        cfg = SuiteConfig(
            seed=_parse_int(seed, "seed") if seed is not None else 0,
            tol=_parse_float(tol, "tol") if tol is not None else None,
            max_dim=_parse_int(max_dim, "max-dim") if max_dim is not None else 8,
            fixtures=tuple(fixtures or ()),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg, as_json


def _emit(report: dict, as_json: bool, text_lines: list[str], out) -> None:
    out = sys.stdout if out is None else out
    if as_json:
        out.write(json.dumps(report, indent=1, sort_keys=True) + "\n")
    else:
        out.write("\n".join(text_lines) + "\n")


def cmd_verify(args, out=None, environ=None) -> int:
    try:
        cfg, as_json = build_config(args, environ)
        results = run_battery(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CurvRigidError, OSError, KeyError) as exc:
        print(f"fixture error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    n_fail = sum(r.status == "FAIL" for r in results)
    report = {
        "version": REPORT_VERSION,
        "config": {"seed": cfg.seed, "tol": cfg.tol, "max_dim": cfg.max_dim,
                   "fixtures": list(cfg.fixtures)},
        "summary": {"total": len(results), "fail": n_fail,
                    "skip": sum(r.status == "SKIP" for r in results),
                    "pass": sum(r.status == "PASS" for r in results)},
        "results": [r.to_dict() for r in results],
    }
    lines = [f"{r.status:4s}  {r.suite:24s} {r.case:28s} residual={r.residual:.3e}"
             for r in results]
    lines.append(f"{len(results)} checks, {n_fail} failed")
    _emit(report, as_json, lines, out)
    return EXIT_FAIL if n_fail else EXIT_OK


def cmd_classify(args, out=None) -> int:
    from .holonomy import classify

    try:
        r = cv.load(args.path)
    except (CurvRigidError, OSError, ValueError) as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    seed = args.seed if args.seed is not None else 0
    report: dict = {"n": r.n, "claims": {"psd": r.psd_ok, "bianchi": r.bianchi_ok}}
    lines = [f"operator on Lambda^2 R^{r.n}: psd={r.psd_ok} bianchi={r.bianchi_ok}"]
    try:
        cv.require_valid(r)
        dec = classify(r, seed=seed)
    except CurvRigidError as exc:
        report["error"] = f"{type(exc).__name__}: {exc}"
        report["verdict"] = "FAIL"
        lines.append(f"FAIL  {report['error']}")
        _emit(report, args.json, lines, out)
        return EXIT_FAIL
    blocks = []
    ok = True
    for i, blk in enumerate(dec.blocks):
        entry = {"dim": blk.dim, "type": blk.kind, "algebra_dim": blk.algebra.dim,
                 "lambda": round(blk.casimir_value, 12),
                 "p_dim": int(blk.p_basis.shape[0]),
                 "intertwiners": blk.disjointness_dim,
                 "averaged_image_distance": float(f"{blk.rtilde_report['image_distance']:.3g}")}
        if blk.kind == "complex":
            entry["unit_in_algebra"] = blk.unit_distance <= 1e-8
            ok &= entry["unit_in_algebra"]
        ok &= blk.disjointness_dim == 0
        blocks.append(entry)
        extra = f" I in g: {entry['unit_in_algebra']}" if blk.kind == "complex" else ""
        lines.append(f"block {i}: dim {blk.dim}, {blk.kind}, g_i dim {blk.algebra.dim}, "
                     f"lambda {blk.casimir_value:.6g}{extra}")
    report["blocks"] = blocks
    report["algebra_dim"] = dec.algebra.dim
    report["verdict"] = "PASS" if ok else "FAIL"
    lines.append(report["verdict"])
    _emit(report, args.json, lines, out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_submersion(args, out=None) -> int:
    from . import submersion as sb

    fixtures = {"hopf": sb.hopf_fixture, "product": sb.product_fixture,
                "mapping-torus": sb.mapping_torus_fixture}
    name = args.name
    try:
        sp = fixtures[name]() if name in fixtures else sb.load(name)
    except (OSError, KeyError, ValueError, CurvRigidError) as exc:
        print(f"unknown fixture or bad file {name!r}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        defects = [sb.oneill_ricci_defect(sp, x) for x in np.eye(sp.n)]
        verdict = sb.rigidity_conclusion(sp)
    except CurvRigidError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    h = sb.mean_curvature(sp)
    report = {"fixture": name, "m": sp.m, "n": sp.n,
              "defects": [float(f"{d:.12g}") for d in defects],
              "mean_curvature_norm": float(np.linalg.norm(h)),
              "verdict": verdict.kind, "witness": verdict.witness,
              "details": {k: float(f"{v:.12g}") if isinstance(v, float) else v
                          for k, v in sorted((verdict.details or {}).items())}}
    lines = [f"fixture {name}: m={sp.m}, n={sp.n}",
             "O'Neill defects: " + ", ".join(f"{d:.3e}" for d in defects),
             f"|H| = {np.linalg.norm(h):.3e}",
             f"verdict: {verdict.kind}" + (f" ({verdict.witness})" if verdict.witness else "")]
    for k, v in sorted((verdict.details or {}).items()):
        lines.append(f"  {k}: {v}")
    _emit(report, args.json, lines, out)
    ok = max((abs(d) for d in defects), default=0.0) <= 1e-9
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", default=None, help="integer RNG seed (default 0)")
    common.add_argument("--json", action="store_true", help="emit a JSON report")
    parser = argparse.ArgumentParser(prog="curvrigid",
                                     description="Numerical checks for curvature and Clifford identities.")
    sub = parser.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", parents=[common], help="run the full identity battery")
    v.add_argument("--tol", default=None, help="override every check threshold")
    v.add_argument("--max-dim", dest="max_dim", default=None,
                   help="largest m+n for Clifford checks (2..10, default 8)")
    v.add_argument("--fixture", action="append", default=None,
                   help="curvature fixture name or JSON path (repeatable)")
    c = sub.add_parser("classify", parents=[common], help="classify a curvature operator JSON file")
    c.add_argument("path")
    s = sub.add_parser("submersion", parents=[common], help="O'Neill report for a submersion fixture")
    s.add_argument("name", help="hopf, product, mapping-torus or a JSON path")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command == "verify":
        return cmd_verify(args)
    if args.seed is not None:
        try:
            args.seed = _parse_int(args.seed, "seed")
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    if args.command == "classify":
        return cmd_classify(args)
    return cmd_submersion(args)


if __name__ == "__main__":
    sys.exit(main())
