"""Command-line interface.

Subcommands: scan, d, principal, pixton, omega (alias verify-lemmas), g7,
check.  All results are JSON with an embedded run manifest; exit codes are
0 success, 1 usage error, 2 computation guard or fit instability, 3
verification mismatch.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

from . import __version__
from .numerics import rational_str
from .pixton import (
    ComputationGuardError,
    FitInstabilityError,
    fixed_r_class,
    monomial_coefficient,
    pixton_class,
)
from .trr import (
    ExceptionalCaseError,
    SCAN_CONVENTIONS,
    d_value,
    g7_patch,
    n1_trr,
    principal_part,
    scan_zeros,
    verify_lemmas,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_GUARD = 2
EXIT_MISMATCH = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def result_digest(result) -> str:
    return hashlib.sha256(canonical_json(result).encode()).hexdigest()


def _emit(result, args, command: str, parameters: dict, started: float, extra_manifest=None):
    manifest = {
        "command": command,
        "parameters": parameters,
        "jobs": getattr(args, "jobs", 1),
        "version": __version__,
        "wall_time_s": round(time.monotonic() - started, 3),
        "result_digest": result_digest(result),
    }
    if extra_manifest:
        manifest.update(extra_manifest)
    payload = {"manifest": manifest, "result": result}
    text = json.dumps(payload, sort_keys=True, indent=1)
    out = getattr(args, "out", None)
    if out:
        tmp = out + ".tmp"
        with open(tmp, "w") as fh:
            fh.write(text + "\n")
        os.replace(tmp, out)
    else:
        print(text)
    if getattr(args, "pretty", False):
        _pretty(command, result)
    return EXIT_OK


def _pretty(command, result):
    if command == "scan":
        print(f"# scanned {result['cells_checked']} cells over g = "
              f"{result['range'][0]}..{result['range'][1]}")
        if result["zeros"]:
            for g, n, k, l in result["zeros"]:
                print(f"#   D = 0 at g={g} n={n} k={k} l={l}")
        else:
            print("#   no zeros")
    elif command == "principal":
        for term in result["principal"]:
            mono = " ".join(
                f"psi{j}^{e}" for j, e in enumerate(term["exponents"], start=1) if e
            )
            print(f"#   {term['coeff']}  {mono or '1'}")
    elif command == "pixton":
        print(f"# {len(result['terms'])} decorated-graph terms")


def _parse_int_list(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(int(part) for part in text.split(","))


def cmd_scan(args, started):
    if args.g_min < 1 or args.g_max < args.g_min:
        raise UsageError("need 1 <= g-min <= g-max")
    zeros, cells = scan_zeros(args.g_min, args.g_max, jobs=args.jobs)
    result = {
        "range": [args.g_min, args.g_max],
        "conventions": SCAN_CONVENTIONS,
        "zeros": [[g, n, k, list(l)] for g, n, k, l in zeros],
        "cells_checked": cells,
    }
    params = {"g_min": args.g_min, "g_max": args.g_max}
    return _emit(result, args, "scan", params, started)


def cmd_d(args, started):
    l = _parse_int_list(args.l)
    if args.k + sum(l) != args.g:
        raise UsageError("need k + sum(l) = g")
    l_sorted = tuple(sorted(l))
    print(rational_str(d_value(args.g, args.k, l_sorted)))
    return EXIT_OK


def cmd_principal(args, started):
    l_input = _parse_int_list(args.l) if args.l else ()
    l = tuple(sorted(l_input))
    if not l:
        if args.k != args.g:
            raise UsageError("with no l the relation is for psi_1^g; need k = g")
        record = n1_trr(args.g)
    else:
        record = principal_part(args.g, args.k, l)
    result = record.to_json()
    result["provenance"]["l_input"] = list(l_input)
    result["provenance"]["l_sorted"] = list(l)
    params = {"g": args.g, "k": args.k, "l": list(l_input)}
    return _emit(result, args, "principal", params, started)


def cmd_pixton(args, started):
    if (args.a is None) == (args.b_exponents is None):
        raise UsageError("give exactly one of --a and --b-exponents")
    params = {"g": args.g, "n": args.n, "degree": args.degree}
    extra = {}
    if args.a is not None:
        a = _parse_int_list(args.a)
        if len(a) != args.n:
            raise UsageError("--a needs one value per marking")
        params["a"] = list(a)
        if args.r is not None:
            params["r"] = args.r
            element = fixed_r_class(args.g, args.n, a, args.r, args.degree)
        else:
            element = pixton_class(args.g, args.n, a, args.degree)
    else:
        b = _parse_int_list(args.b_exponents)
        params["b_exponents"] = list(b)
        element, meta = monomial_coefficient(
            args.g, args.n, b, args.degree, allow_large=args.allow_large,
            jobs=args.jobs,
        )
        extra["r_nodes"] = meta["r_nodes"]
        extra["grid_degree"] = meta["grid_degree"]
        extra["grid_evaluations"] = meta["evaluations"]
    result = {
        "g": args.g,
        "n": args.n,
        "degree": args.degree,
        "terms": element.to_json(),
    }
    return _emit(result, args, "pixton", params, started, extra_manifest=extra)


def cmd_omega(args, started):
    b = _parse_int_list(args.b) if args.b else ()
    report = verify_lemmas(
        args.g, args.n, b, allow_large=args.allow_large, jobs=args.jobs
    )
    meta = report.pop("meta", {})
    params = {"g": args.g, "n": args.n, "b": list(b)}
    code = _emit(report, args, "omega", params, started, extra_manifest=meta)
    if not report["all_match"] or not report["kappa_free"] or not report[
        "boundary_kappa_free"
    ]:
        return EXIT_MISMATCH
    return code


def cmd_g7(args, started):
    report = g7_patch()
    ok = report.get("ok", False)
    for key in ("record_psi1_3", "record_psi1_2"):
        if key in report:
            report[key] = report[key].to_json()
    code = _emit(report, args, "g7", {}, started)
    if not ok:
        return EXIT_MISMATCH
    return code


def cmd_check(args, started):
    with open(args.file) as fh:
        payload = json.load(fh)
    want = payload["manifest"]["result_digest"]
    got = result_digest(payload["result"])
    if want != got:
        print(f"digest mismatch: manifest {want}, recomputed {got}", file=sys.stderr)
        return EXIT_MISMATCH
    print("ok")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="trrkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    default_jobs = int(os.environ.get("TRR_JOBS", "1"))

    p = sub.add_parser("scan", help="scan for vanishing D coefficients")
    p.add_argument("--g-min", type=int, required=True)
    p.add_argument("--g-max", type=int, required=True)
    p.add_argument("--jobs", type=int, default=default_jobs)
    p.add_argument("--out")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("d", help="print one D coefficient")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", default="")
    p.set_defaults(func=cmd_d)

    p = sub.add_parser("principal", help="principal part of a relation")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", default="")
    p.add_argument("--out")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_principal)

    p = sub.add_parser("pixton", help="fixed-r class or monomial coefficient")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a")
    p.add_argument("--b-exponents", dest="b_exponents")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--r", type=int)
    p.add_argument("--allow-large", action="store_true")
    p.add_argument("--jobs", type=int, default=default_jobs)
    p.add_argument("--out")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_pixton)

    for name in ("omega", "verify-lemmas"):
        p = sub.add_parser(name, help="compare pipeline and closed forms")
        p.add_argument("--g", type=int, required=True)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--b", default="")
        p.add_argument("--allow-large", action="store_true")
        p.add_argument("--jobs", type=int, default=default_jobs)
        p.add_argument("--out")
        p.set_defaults(func=cmd_omega)

    p = sub.add_parser("g7", help="the genus-7 exceptional-case report")
    p.add_argument("--out")
    p.set_defaults(func=cmd_g7)

    p = sub.add_parser("check", help="re-verify a result file's digest")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    started = time.monotonic()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, started)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ExceptionalCaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ComputationGuardError, FitInstabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
