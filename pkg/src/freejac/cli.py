"""``freejac`` command-line front-end.

Every subcommand writes JSON to stdout (or ``--output``).  Exit codes:
0 success, 1 I/O failure, 2 invalid input or failed precondition (with an
error JSON object), 3 a scan found singular derivatives.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import NamedTuple

import numpy as np

from .domain import DomainSpec
from .errors import FreeJacError
from .invertibility import (KernelWitness, collision_from_kernel, jacobian_scan,
                            kernel_from_collision, newton_invert, series_inverse)
from .linearization import (derivative_matrix, singularity_certificate, sylvester_solve,
                            sylvester_unique)
from .matrixeval import (MatrixTuple, SampleConfig, eval_map, jet_eval, sample_commuting_tuple,
                         sample_tuple)
from .parser import default_names, parse_map, print_map, print_poly

EXIT_OK, EXIT_IO, EXIT_INPUT, EXIT_HITS = 0, 1, 2, 3


class UsageError(FreeJacError):
    code = "usage_error"


class InputError(FreeJacError):
    code = "invalid_input"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_map(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("-m", "--map", help="map source text, e.g. 'vars X; (X^2)'")
    g.add_argument("--map-file", help="file holding the map source")


def _add_common(p):
    p.add_argument("-o", "--output", help="write the result here instead of stdout")
    p.add_argument("--pretty", action="store_true", help="human-readable output")


def build_parser():
    ap = _Parser(prog="freejac", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("eval", help="evaluate a map on a matrix tuple")
    _add_map(p)
    p.add_argument("-x", "--point", required=True, help="matrix-tuple JSON")
    _add_common(p)

    p = sub.add_parser("jet", help="value and directional derivative via block jets")
    _add_map(p)
    p.add_argument("-x", "--point", required=True)
    p.add_argument("-H", "--direction", required=True)
    _add_common(p)

    p = sub.add_parser("deriv-matrix", help="dense derivative matrix (column-stacking)")
    _add_map(p)
    p.add_argument("-x", "--point", required=True)
    _add_common(p)

    p = sub.add_parser("certify", help="singularity certificate of the derivative")
    _add_map(p)
    p.add_argument("-x", "--point", required=True)
    _add_common(p)

    p = sub.add_parser("sylvester", help="uniqueness test or solve of AH + HB = C")
    p.add_argument("-A", required=True, help="matrix-tuple JSON holding one matrix")
    p.add_argument("-B", required=True)
    p.add_argument("-C", help="right-hand side; without it only uniqueness is tested")
    p.add_argument("--method", choices=["kron", "schur"], default="kron")
    _add_common(p)

    p = sub.add_parser("scan", help="sampled Jacobian scan over a domain")
    _add_map(p)
    p.add_argument("-d", "--domain", help="domain JSON file (default: unconstrained)")
    p.add_argument("-n", "--sizes", required=True, help="comma-separated matrix sizes")
    p.add_argument("-s", "--seed", required=True, type=int)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--distribution", choices=["ginibre", "hermitian-ginibre"], default="ginibre")
    _add_common(p)

    p = sub.add_parser("sample", help="draw seeded matrix tuples")
    p.add_argument("-s", "--seed", required=True, type=int)
    p.add_argument("-n", "--size", required=True, type=int)
    p.add_argument("-N", "--vars", required=True, type=int, help="matrices per tuple")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("-d", "--domain")
    p.add_argument("--distribution", choices=["ginibre", "hermitian-ginibre"], default="ginibre")
    p.add_argument("--commuting", action="store_true", help="polynomials in one matrix")
    _add_common(p)

    p = sub.add_parser("witness", help="convert kernel and collision witnesses")
    _add_map(p)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--from-kernel", action="store_true",
                      help="kernel (-x, -H) -> collision pair")
    mode.add_argument("--from-collision", action="store_true",
                      help="collision (--x1, --x2) -> kernel direction")
    p.add_argument("-x", "--point")
    p.add_argument("-H", "--direction")
    p.add_argument("--x1")
    p.add_argument("--x2")
    _add_common(p)

    p = sub.add_parser("invert-series", help="truncated compositional inverse")
    _add_map(p)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--format", choices=["text", "map", "json"], default="text")
    _add_common(p)

    p = sub.add_parser("invert-newton", help="solve P(Z) = W by Newton's method")
    _add_map(p)
    p.add_argument("-w", "--target", required=True)
    p.add_argument("--z0", help="starting point (default: the target)")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--damping", action="store_true")
    _add_common(p)
    return ap


def _read_text(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_json(path):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})", path=path) from None


def _load_tuple(path):
    return MatrixTuple.from_dict(_load_json(path))


def _load_matrix(path):
    X = _load_tuple(path)
    if X.count != 1:
        raise InputError(f"{path}: expected exactly one matrix, found {X.count}", path=path)
    return X[0]


def _load_map(args):
    return parse_map(args.map if args.map is not None else _read_text(args.map_file))


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + n for n in missing))


def _matrix_rows(M):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M)]


def _scan_table(report):
    lines = [f"{'n':>4} {'samples':>8} {'min sigma':>12} {'hits':>5}"]
    for r in report.records:
        lines.append(f"{r.size:>4} {r.samples:>8} {r.min_sigma:>12.4e} {len(r.hits):>5}")
    lines.append(f"domain free: {report.free_domain}   total hits: {report.total_hits}")
    return "\n".join(lines) + "\n"


def _cert_table(cert):
    return (f"verdict    {cert.verdict}\n"
            f"sigma_min  {cert.sigma_min:.6e}\n"
            f"sigma_max  {cert.sigma_max:.6e}\n"
            f"tolerance  {cert.tolerance:.6e}\n")


class Result(NamedTuple):
    code: int
    text: str
    output: str | None = None


def run(argv=None) -> Result:
    """Execute one invocation without touching stdout."""
    args = None
    try:
        args = build_parser().parse_args(argv)
        code, payload = _dispatch(args)
    except FreeJacError as exc:
        return Result(EXIT_INPUT, json.dumps(exc.to_dict(), sort_keys=True, default=str) + "\n")
    except OSError as exc:
        err = {"error": "io_error", "message": str(exc)}
        return Result(EXIT_IO, json.dumps(err, sort_keys=True) + "\n")
    except ValueError as exc:
        err = {"error": "invalid_input", "message": str(exc)}
        return Result(EXIT_INPUT, json.dumps(err, sort_keys=True) + "\n")
    if not isinstance(payload, str):
        indent = 2 if args.pretty else None
        payload = json.dumps(payload, sort_keys=True, indent=indent) + "\n"
    return Result(code, payload, args.output)


def _dispatch(args):
    cmd = args.command
    if cmd == "eval":
        return EXIT_OK, eval_map(_load_map(args), _load_tuple(args.point)).to_dict()

    if cmd == "jet":
        jet = jet_eval(_load_map(args), _load_tuple(args.point), _load_tuple(args.direction))
        return EXIT_OK, {"value": jet.value.to_dict(), "derivative": jet.derivative.to_dict()}

    if cmd == "deriv-matrix":
        D = derivative_matrix(_load_map(args), _load_tuple(args.point))
        return EXIT_OK, {"rows": D.shape[0], "cols": D.shape[1], "n": D.size,
                         "outputs": D.num_outputs, "vars": D.num_vars,
                         "provenance": {"map": D.provenance[0], "point": D.provenance[1]},
                         "vectorization": "column-stacking",
                         "matrix": _matrix_rows(D.matrix)}

    if cmd == "certify":
        cert = singularity_certificate(derivative_matrix(_load_map(args), _load_tuple(args.point)))
        return EXIT_OK, _cert_table(cert) if args.pretty else cert.to_dict()

    if cmd == "sylvester":
        A, B = _load_matrix(args.A), _load_matrix(args.B)
        verdict = sylvester_unique(A, B)
        out = {"unique": bool(verdict.unique), "margin": verdict.margin,
               "tolerance": verdict.tolerance,
               "pair": [[z.real, z.imag] for z in verdict.pair]}
        if args.C is not None:
            H = sylvester_solve(A, B, _load_matrix(args.C), method=args.method)
            out["H"] = MatrixTuple([H]).to_dict()
        return EXIT_OK, out

    if cmd == "scan":
        P = _load_map(args)
        domain = DomainSpec.from_dict(_load_json(args.domain), P.names) if args.domain \
            else DomainSpec()
        try:
            sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
        except ValueError:
            raise UsageError(f"bad size list {args.sizes!r}") from None
        cfg = SampleConfig(size=max(sizes), count=args.samples, seed=args.seed,
                           distribution=args.distribution)
        report = jacobian_scan(P, domain, sizes, cfg)
        payload = report.to_dict()
        payload["map"] = print_map(P)
        code = EXIT_HITS if report.total_hits else EXIT_OK
        return code, _scan_table(report) if args.pretty else payload

    if cmd == "sample":
        if args.commuting:
            tuples = [sample_commuting_tuple(args.size, args.vars, args.seed + k)
                      for k in range(args.count)]
        else:
            # no map here, so named constraints refer to the default names
            domain = DomainSpec.from_dict(_load_json(args.domain), default_names(args.vars)) \
                if args.domain else None
            cfg = SampleConfig(args.size, args.count, args.seed, args.distribution, domain)
            tuples = sample_tuple(cfg, args.vars)
        return EXIT_OK, {"seed": args.seed, "tuples": [X.to_dict() for X in tuples]}

    if cmd == "witness":
        P = _load_map(args)
        if args.from_kernel:
            _require(args, "point", "direction")
            w = KernelWitness.build(P, _load_tuple(args.point), _load_tuple(args.direction))
            c = collision_from_kernel(P, w)
            return EXIT_OK, {"kind": "collision", "kernel_residual": w.residual, **c.to_dict()}
        _require(args, "x1", "x2")
        w = kernel_from_collision(P, _load_tuple(args.x1), _load_tuple(args.x2))
        return EXIT_OK, {"kind": "kernel", **w.to_dict()}

    if cmd == "invert-series":
        S = series_inverse(_load_map(args), args.degree)
        if args.format == "json":
            return EXIT_OK, {"map": print_map(S.map), "degree": S.degree, "valid": S.valid}
        if args.format == "map":
            return EXIT_OK, print_map(S.map, powers=True) + "\n"
        names = list(S.map.names)
        parts = [print_poly(c, names, powers=True) for c in S.map]
        text = parts[0] if len(parts) == 1 else "(" + ", ".join(parts) + ")"
        return EXIT_OK, text + "\n"

    if cmd == "invert-newton":
        P = _load_map(args)
        W = _load_tuple(args.target)
        Z0 = _load_tuple(args.z0) if args.z0 else W
        res = newton_invert(P, W, Z0, tol=args.tol, max_iter=args.max_iter, damping=args.damping)
        return EXIT_OK, {"Z": res.Z.to_dict(), "iterations": res.iterations,
                         "residual": res.residual}

    raise UsageError(f"unknown command {cmd!r}")  # pragma: no cover


def main(argv=None):
    res = run(argv)
    if res.output is None:
        sys.stdout.write(res.text)
        return res.code
    try:
        with open(res.output, "w", encoding="utf-8") as fh:
            fh.write(res.text)
    except OSError as exc:
        sys.stdout.write(json.dumps({"error": "io_error", "message": str(exc)}) + "\n")
        return EXIT_IO
    return res.code


if __name__ == "__main__":
    sys.exit(main())
