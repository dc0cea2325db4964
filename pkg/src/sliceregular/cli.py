"""Command line front end: evaluate series, run certifications, run suites.

Exit codes: 0 success, 2 input/parse error, 3 domain error, 4 hypothesis
failure, 5 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import __version__
from .errors import DomainError, HypothesisError, ManifestError, SliceRegularError
from .harness import default_manifest, mutation_canary_manifest, run_manifest
from .jsonio import dumps, load_points, load_series, write_json
from .landau import GridParams, bloch_landau, landau_certify
from .quaternion import Quaternion

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DOMAIN = 3
EXIT_HYPOTHESIS = 4
EXIT_VERIFICATION = 5

SLICE_SHORTHAND = {"i": [0, 1, 0, 0], "j": [0, 0, 1, 0], "k": [0, 0, 0, 1]}


def _grid_from_args(args) -> GridParams:
    return GridParams(shells=args.shells, points_per_sphere=args.points,
                      newton_tol=args.newton_tol, max_order=args.max_order)


def _config_dict(args, command: str) -> dict:
    return {"tool": "sliceregular", "version": __version__, "command": command,
            "seed": args.seed,
            "grid": {"shells": args.shells, "points_per_sphere": args.points,
                     "newton_tol": args.newton_tol, "max_order": args.max_order}}


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_eval(args) -> int:
    try:
        series = load_series(args.series)
        points = load_points(args.points_file)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        values = series.eval_many(points)
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    config = _config_dict(args, "eval")
    if args.format == "json":
        rows = [{"q": list(map(float, q)), "f": list(map(float, v))}
                for q, v in zip(points, values)]
        _emit(dumps({"config": config, "rows": rows}), args.out)
    else:
        buf = io.StringIO()
        buf.write(f"# config {json.dumps(config, sort_keys=True)}\n")
        writer = csv.writer(buf)
        writer.writerow(["q_w", "q_x", "q_y", "q_z", "f_w", "f_x", "f_y", "f_z"])
        for q, v in zip(points, values):
            writer.writerow([repr(float(c)) for c in (*q, *v)])
        _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_landau(args) -> int:
    try:
        series = load_series(args.series)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    grid = _grid_from_args(args)
    try:
        inj, cov = landau_certify(series, grid, seed=args.seed)
    except HypothesisError as exc:
        print(f"hypothesis failure: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    doc = {"config": _config_dict(args, "landau"),
           "injectivity": inj.to_dict(), "coverage": cov.to_dict()}
    _emit(dumps(doc), args.out)
    consistent = inj.lower_bound <= inj.upper_bound + inj.grid_resolution
    if cov.all_hit and consistent:
        return EXIT_OK
    print("verification failure: "
          + ("coverage incomplete " if not cov.all_hit else "")
          + ("injectivity interval inconsistent" if not consistent else ""),
          file=sys.stderr)
    return EXIT_VERIFICATION


def cmd_bloch(args) -> int:
    try:
        series = load_series(args.series)
        slice_spec = SLICE_SHORTHAND.get(args.slice)
        if slice_spec is None:
            slice_spec = json.loads(args.slice)
        unit = Quaternion.from_array(slice_spec)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    grid = _grid_from_args(args)
    try:
        cert = bloch_landau(series, unit, grid, seed=args.seed,
                            n_targets=args.targets)
    except HypothesisError as exc:
        print(f"hypothesis failure: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    doc = {"config": _config_dict(args, "bloch"), "certificate": cert.to_dict()}
    _emit(dumps(doc), args.out)
    if cert.injectivity_verified and cert.coverage_verified:
        return EXIT_OK
    print("verification failure: certificate checks did not pass", file=sys.stderr)
    return EXIT_VERIFICATION


def cmd_verify(args) -> int:
    if args.manifest == "default":
        manifest = default_manifest(seeds=tuple(range(args.suite_seeds)),
                                    n_samples=args.samples)
    elif args.manifest == "canary":
        manifest = mutation_canary_manifest(seed=args.seed)
    else:
        try:
            with open(args.manifest, "r", encoding="utf-8") as fh:
                manifest = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"input error: {exc}", file=sys.stderr)
            return EXIT_INPUT
    try:
        reports = run_manifest(manifest)
    except ManifestError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except HypothesisError as exc:
        print(f"hypothesis failure: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS

    config = _config_dict(args, "verify")
    if args.format == "json":
        _emit(dumps({"config": config,
                     "reports": [r.to_dict() for r in reports]}), args.out)
    else:
        buf = io.StringIO()
        buf.write(f"# config {json.dumps(config, sort_keys=True)}\n")
        writer = csv.writer(buf)
        writer.writerow(["theorem_id", "fixture", "seed", "samples",
                         "worst_slack", "truncation_budget", "verdict"])
        for r in reports:
            writer.writerow([r.theorem_id, r.details.get("fixture", ""),
                             r.details.get("seed", ""), r.samples,
                             repr(r.worst_slack), repr(r.truncation_budget),
                             r.verdict])
        _emit(buf.getvalue(), args.out)
    counts = {"pass": 0, "fail": 0, "inconclusive": 0}
    for r in reports:
        counts[r.verdict] = counts.get(r.verdict, 0) + 1
    print(f"{counts['pass']} pass, {counts['fail']} fail, "
          f"{counts['inconclusive']} inconclusive", file=sys.stderr)
    return EXIT_VERIFICATION if counts["fail"] else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sliceregular",
        description="Numerics for slice regular quaternionic functions on balls.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
        p.add_argument("--shells", type=int, default=24, help="scan shells")
        p.add_argument("--points", type=int, default=400, help="points per sphere")
        p.add_argument("--newton-tol", dest="newton_tol", type=float, default=1e-10)
        p.add_argument("--max-order", dest="max_order", type=int, default=256)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p_eval = sub.add_parser("eval", help="evaluate a series at points from a file")
    p_eval.add_argument("series", help="series JSON file")
    p_eval.add_argument("points_file", help="points JSON file")
    common(p_eval)
    p_eval.set_defaults(func=cmd_eval, format="csv")

    p_landau = sub.add_parser("landau", help="Landau injectivity/covering certification")
    p_landau.add_argument("series", help="series JSON file")
    common(p_landau)
    p_landau.set_defaults(func=cmd_landau)

    p_bloch = sub.add_parser("bloch", help="Bloch-Landau certificate on one slice")
    p_bloch.add_argument("series", help="series JSON file (radius > 1)")
    p_bloch.add_argument("--slice", default="i",
                         help="imaginary unit: i, j, k, or a [w,x,y,z] JSON array")
    p_bloch.add_argument("--targets", type=int, default=200,
                         help="coverage targets (default 200)")
    common(p_bloch)
    p_bloch.set_defaults(func=cmd_bloch)

    p_verify = sub.add_parser("verify", help="run inequality suites from a manifest")
    p_verify.add_argument("manifest",
                          help="manifest JSON path, or the builtin names "
                               "'default' and 'canary'")
    p_verify.add_argument("--suite-seeds", dest="suite_seeds", type=int, default=20,
                          help="seeds for the builtin default manifest")
    p_verify.add_argument("--samples", type=int, default=500,
                          help="samples per check for the builtin default manifest")
    common(p_verify)
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SliceRegularError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
