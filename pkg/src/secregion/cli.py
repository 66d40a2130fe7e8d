"""Command-line front end: build / project / verify / fme / plot-data.

Every stage reads and writes plain JSON/CSV artifacts so runs are
reproducible and diffable; identical inputs and flags produce
byte-identical files (wall-clock timings go to stdout only).

Exit codes: 0 success, 2 parse/validation/dimension error, 3 iteration
cap reached (partial polytope still written), 4 FME size guard.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import verify as verify_mod
from .network import ParseError, RegSpec, ValidationError, parse_case_json, parse_matpower_subset
from .projector import (DepaExhausted, Polytope, ProjectionConfig,
                        project_polytope)
from .region import LinearRegion, build_linear_region, BuildOptions

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ITERATION_CAP = 3
EXIT_SIZE_GUARD = 4


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParseError(f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: malformed JSON: {exc}")


def _load_region(path: str) -> LinearRegion:
    doc = _load_json(path)
    try:
        return LinearRegion.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: not a region artifact: {exc}")


def _load_polytope(path: str) -> Polytope:
    doc = _load_json(path)
    try:
        return Polytope.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: not a polytope artifact: {exc}")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_float_list(text: str):
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_build(args) -> int:
    path = Path(args.case)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        print(f"error: no such file: {args.case}", file=sys.stderr)
        return EXIT_INPUT
    try:
        if path.suffix.lower() == ".m":
            case, warnings = parse_matpower_subset(text)
            for w in warnings:
                print(f"warning: {w}", file=sys.stderr)
        else:
            case = parse_case_json(text)
        nodes = [int(v) for v in args.reg.split(",") if v.strip()]
        wmax = _parse_float_list(args.wmax)
        if len(wmax) == 1:
            wmax = wmax * len(nodes)
        reg = RegSpec(tuple(nodes), tuple(wmax))
        region = build_linear_region(
            case, reg, BuildOptions(include_ramp=args.ramp,
                                    reverse_branch_rows=args.reverse_flows))
    except (ParseError, ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    out = _out_dir(args)
    target = out / "region.json"
    _write_json(target, region.to_dict())
    print(f"region: {region.a_eq.shape[0]} equalities, {region.a_in.shape[0]} inequalities, "
          f"{region.n_vars} variables ({region.n_w} projected) -> {target}")
    return EXIT_OK


def cmd_project(args) -> int:
    try:
        region = _load_region(args.region)
        config = ProjectionConfig(max_angle_deg=args.phi, eps=args.eps,
                                  max_iterations=args.max_iterations, seed=args.seed)
        t0 = time.perf_counter()
        polytope, stats = project_polytope(region, config=config)
        elapsed = time.perf_counter() - t0
    except (ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DepaExhausted as exc:
        print(f"error: exterior-point reselection exhausted: {exc}", file=sys.stderr)
        return EXIT_INPUT

    out = _out_dir(args)
    target = out / "polytope.json"
    _write_json(target, polytope.to_dict(stats))
    print(f"polytope: {stats.facets_initial} box + {stats.facets_discovered} discovered facets, "
          f"{stats.lp_solves} LP solves, {elapsed:.3f}s -> {target}")
    if stats.hit_iteration_cap:
        print("warning: iteration cap reached; polytope is partial", file=sys.stderr)
        return EXIT_ITERATION_CAP
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        region = _load_region(args.region)
        polytope = _load_polytope(args.polytope)
        if polytope.dim != region.n_w:
            raise ParseError(f"dimension mismatch: region n_w={region.n_w}, "
                             f"polytope dimension={polytope.dim}")
        samples, report = verify_mod.classify_samples(region, polytope,
                                                      args.samples, args.seed)
    except (ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    out = _out_dir(args)
    _write_json(out / "report.json", report.to_dict())
    verify_mod.write_samples_csv(samples, out / "samples.csv")
    er = "undefined" if report.error_pct is None else f"{report.error_pct:.4f}%"
    print(f"E_r = {er}  ({report.n_agreeing}/{report.n_in_polytope} agreeing inside, "
          f"{report.n_boundary_excluded} boundary excluded) -> {out / 'report.json'}")
    return EXIT_OK


def cmd_fme(args) -> int:
    try:
        region = _load_region(args.region)
        oracle = verify_mod.fme_project(region)
    except verify_mod.SizeGuardExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE_GUARD
    except (ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    out = _out_dir(args)
    target = out / "fme_polytope.json"
    _write_json(target, oracle.to_dict())
    print(f"oracle polytope: {len(oracle.facets)} facets -> {target}")
    if args.compare:
        try:
            other = _load_polytope(args.compare)
            verdict = verify_mod.regions_equivalent(oracle, other, tol=1e-6)
        except (ParseError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        word = "equal" if verdict["equal"] else "not-equal"
        print(f"comparison: {word}, max_violation = {verdict['max_violation']:.3e}")
    return EXIT_OK


def cmd_plot_data(args) -> int:
    try:
        polytope = _load_polytope(args.polytope)
        region = _load_region(args.region)
        if polytope.dim > 3:
            print(f"error: plot data supports dimensions 2-3, got {polytope.dim}",
                  file=sys.stderr)
            return EXIT_INPUT
        vertices = verify_mod.enumerate_vertices(polytope)
        samples, _ = verify_mod.classify_samples(region, polytope,
                                                 args.samples, args.seed)
    except (ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    out = _out_dir(args)
    verify_mod.write_vertices_csv(vertices, out / "vertices.csv")
    verify_mod.write_samples_csv(samples, out / "samples.csv")
    print(f"{len(vertices)} vertices, {len(samples)} classified samples -> {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secregion",
        description="Exact projection of linear operating regions onto "
                    "renewable-injection subspaces")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a region artifact from a case file")
    p.add_argument("case", help="case file (.m MATPOWER subset or .json)")
    p.add_argument("--reg", required=True, help="comma list of REG bus ids")
    p.add_argument("--wmax", required=True,
                   help="per-node capacity, scalar or comma list (per-unit)")
    p.add_argument("--ramp", action="store_true", help="include generator ramp rows")
    p.add_argument("--reverse-flows", action="store_true",
                   help="also limit branch flows in the reverse orientation")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("project", help="project a region artifact to a polytope")
    p.add_argument("region", help="region artifact (JSON)")
    p.add_argument("--phi", type=float, default=0.0,
                   help="maximum tolerated facet angle in degrees (default 0)")
    p.add_argument("--eps", type=float, default=1e-6,
                   help="point-identity tolerance (default 1e-6)")
    p.add_argument("--seed", type=int, default=42, help="jitter seed (default 42)")
    p.add_argument("--max-iterations", type=int, default=10000)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("verify", help="Monte-Carlo certification of a polytope")
    p.add_argument("region", help="region artifact (JSON)")
    p.add_argument("polytope", help="polytope artifact (JSON)")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fme", help="Fourier-Motzkin oracle projection")
    p.add_argument("region", help="region artifact (JSON)")
    p.add_argument("--compare", help="polytope artifact to compare against")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_fme)

    p = sub.add_parser("plot-data", help="vertex/sample CSV bundle for plotting")
    p.add_argument("polytope", help="polytope artifact (JSON)")
    p.add_argument("region", help="region artifact (JSON)")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_plot_data)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
