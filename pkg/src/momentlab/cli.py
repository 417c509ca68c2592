"""Command-line interface.

Polynomials are given as ``coeffs=[c0,c1,...]`` (ascending powers) or as
``roots=[(re,im,mult),...]``; missing conjugates of non-real roots are added.
JSON reports carry ``"schema": 1`` and are serialized with sorted keys, so equal
requests give byte-identical output.  Exit codes: 0 Moment (or success for
commands without a verdict), 3 NotMoment, 4 Undetermined, 1 error.
"""
from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .classify import MOMENT, NOT_MOMENT, UNDETERMINED, Budget, FiniteTestResult, RootCertificate, Verdict, decide_roots, exact_sequence
from .convo import ExpFamily, simplex_form, weight_via_convolution
from .divdiff import weight_via_divdiff
from .errors import MomentLabError, ParseError
from .kernelcheck import misra_report, neighborhood_edge, scan_c
from .polycore import RealPolynomial, RootMultiset, find_roots
from .weight import SignCertificate, build_weight, eval_weight, moments

SCHEMA = 1
EXIT_CODES = {MOMENT: 0, NOT_MOMENT: 3, UNDETERMINED: 4}
EXIT_ERROR = 1
COMMANDS = ("decompose", "weight", "classify", "moments", "divdiff", "convolve", "counterexample")


@dataclass(frozen=True)
class PolySpec:
    kind: str  # "coeffs" or "roots"
    values: tuple

    @classmethod
    def parse(cls, text: str) -> "PolySpec":
        text = text.strip()
        present = [k for k in ("coeffs=", "roots=") if k in text]
        if len(present) != 1:
            raise ParseError(f"expected exactly one of coeffs=[...] or roots=[...], got {text!r}")
        key = present[0]
        if not text.startswith(key):
            raise ParseError(f"polynomial text must start with {key!r}")
        try:
            body = ast.literal_eval(text[len(key):])
        except (ValueError, SyntaxError) as exc:
            raise ParseError(f"cannot read {text!r}: {exc}") from None
        if not isinstance(body, (list, tuple)) or not body:
            raise ParseError("expected a nonempty list")
        if key == "coeffs=":
            if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in body):
                raise ParseError("coefficients must be numbers")
            return cls("coeffs", tuple(float(v) for v in body))
        triples = []
        for item in body:
            if not (isinstance(item, (list, tuple)) and len(item) == 3):
                raise ParseError(f"root entries are (re, im, mult), got {item!r}")
            re_, im_, m = item
            if not isinstance(m, int) or m < 1:
                raise ParseError(f"multiplicity must be a positive integer, got {m!r}")
            triples.append((float(re_), float(im_), m))
        return cls("roots", tuple(triples))

    def format(self) -> str:
        if self.kind == "coeffs":
            return "coeffs=[" + ",".join(repr(v) for v in self.values) + "]"
        return "roots=[" + ",".join(f"({re_!r},{im_!r},{m})" for re_, im_, m in self.values) + "]"

    def roots(self) -> RootMultiset:
        if self.kind == "roots":
            try:
                return RootMultiset.from_triples(self.values)
            except ValueError as exc:
                raise ParseError(str(exc)) from None
        return find_roots(self.polynomial())

    def polynomial(self) -> RealPolynomial:
        if self.kind == "coeffs":
            return RealPolynomial(self.values)
        return self.roots().to_polynomial()


@dataclass(frozen=True)
class AnalysisRequest:
    command: str
    q: PolySpec
    p: Optional[PolySpec]
    options: dict = field(default_factory=dict)

    def echo(self) -> dict:
        return {
            "command": self.command,
            "q": self.q.format(),
            "p": self.p.format() if self.p is not None else None,
            "options": dict(sorted(self.options.items())),
        }

    @classmethod
    def from_echo(cls, data: dict) -> "AnalysisRequest":
        p = PolySpec.parse(data["p"]) if data.get("p") is not None else None
        return cls(data["command"], PolySpec.parse(data["q"]), p, dict(data.get("options", {})))


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    if not math.isfinite(v):
        return repr(v)
    return v


def _cx(z) -> list:
    z = complex(z)
    return [_num(z.real), _num(z.imag)]


def _jsonable(obj):
    if isinstance(obj, SignCertificate):
        return {
            "type": "sign_scan",
            "kind": obj.kind,
            "witness_t": None if obj.witness_t is None else _num(obj.witness_t),
            "witness_value": _num(obj.witness_value),
            "grid_size": obj.grid_size,
            "min_value": _num(obj.min_value),
            "min_location": _num(obj.min_location),
            "scale_exponent": _num(obj.scale_exponent),
            "abs_tol": _num(obj.abs_tol),
        }
    if isinstance(obj, FiniteTestResult):
        v = obj.violation
        return {
            "type": "finite_difference",
            "passed": obj.passed,
            "violation": None if v is None else {"m": v.m, "n": v.n, "value": _num(v.value)},
            "max_order": obj.max_order,
            "max_offset": obj.max_offset,
            "exact": obj.exact,
        }
    if isinstance(obj, RootCertificate):
        return {"type": "unstable_root", "root": _cx(obj.root)}
    if isinstance(obj, Verdict):
        return {
            "decision": obj.decision,
            "rule": obj.rule,
            "boundary_flag": obj.boundary_flag,
            "certificate": {"type": "rule", "rule": obj.certificate}
            if isinstance(obj.certificate, str) else _jsonable(obj.certificate),
            "scan": _jsonable(obj.scan),
            "finite_test": _jsonable(obj.finite_test),
            "details": _jsonable(obj.details),
        }
    if isinstance(obj, str):
        return obj
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return _cx(obj)
    if obj is None:
        return None
    return _num(obj)


def _grid(n: int) -> np.ndarray:
    if n < 1:
        raise ParseError("--grid must be positive")
    return np.arange(1, n + 1) / n


def _rows_to_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def run(request: AnalysisRequest) -> tuple[dict, int, Optional[tuple[list, list]]]:
    """Execute a request; returns ``(report, exit_code, table)``.

    ``table`` holds ``(header, rows)`` for commands that also have CSV output.
    """
    opts = request.options
    q = request.q.polynomial()
    report: dict = {"schema": SCHEMA, "request": request.echo()}
    table = None
    code = 0
    cmd = request.command

    if cmd == "counterexample":
        c = float(opts.get("c", 1.0))
        budget = Budget(grid_size=int(opts.get("grid", 4000)))
        order = int(opts.get("max_order", 30))
        rep = misra_report(c, budget, fd_order=order, fd_offset=order)
        report["c"] = _num(c)
        report["partial_sum_coeffs"] = [_num(v) for v in rep.partial_sum.coeffs]
        report["roots"] = [{"root": _cx(z), "mult": m} for z, m in find_roots(rep.partial_sum).entries]
        report["verdict"] = _jsonable(rep.verdict)
        report["kernel_verdict"] = _jsonable(rep.kernel_verdict)
        report["finite_difference"] = _jsonable(rep.finite_test)
        if opts.get("scan"):
            cs = [round(0.5 + 0.05 * i, 10) for i in range(31)]
            report["c_scan"] = [{"c": _num(cc), "decision": v.decision, "rule": v.rule}
                                for cc, v in scan_c(cs, budget)]
            report["neighborhood_upper_edge"] = _num(neighborhood_edge(1.0, 2.0))
        return report, EXIT_CODES[rep.verdict.decision], None

    if request.p is None:
        raise ParseError(f"{cmd} needs --p")
    roots = request.p.roots()
    report["roots"] = [{"root": _cx(z), "mult": m} for z, m in roots.entries]
    report["leading"] = _num(roots.leading)

    if cmd == "decompose":
        w = build_weight(q, roots)
        report["pfd"] = [{"pole": _cx(z), "order": j, "coefficient": _cx(a)} for z, j, a in w.pfd.terms]
    elif cmd == "weight":
        w = build_weight(q, roots)
        ts = _grid(int(opts.get("grid", 100)))
        ws = eval_weight(w, ts)
        rows = [[t, v] for t, v in zip(ts, ws)]
        report["points"] = [[_num(t), _num(v)] for t, v in rows]
        table = (["t", "w"], rows)
    elif cmd == "moments":
        w = build_weight(q, roots)
        top = int(opts.get("max_order", 20))
        reps = moments(w, range(top + 1), rtol=float(opts.get("tol", 1e-12)))
        report["moments"] = [{"n": r.n, "claimed": _num(r.claimed), "integrated": _num(r.integrated),
                              "rel_error": _num(r.rel_error)} for r in reps]
        table = (["n", "claimed", "integrated", "rel_error"], [[r.n, r.claimed, r.integrated, r.rel_error] for r in reps])
    elif cmd == "divdiff":
        w = build_weight(q, roots)
        ts = _grid(int(opts.get("grid", 20)))
        a = eval_weight(w, ts)
        b = weight_via_divdiff(q, roots, ts)
        rows = [[t, x, y] for t, x, y in zip(ts, a, b)]
        report["points"] = [{"t": _num(t), "w_pfd": _num(x), "w_divdiff": _num(y)} for t, x, y in rows]
        table = (["t", "w_pfd", "w_divdiff"], rows)
    elif cmd == "convolve":
        if q.degree != 0 or q.coeffs[0] != 1.0:
            raise ParseError("convolve works with q = 1 only")
        w = build_weight(q, roots)
        ts = _grid(int(opts.get("grid", 20)))
        a = eval_weight(w, ts)
        b = np.atleast_1d(weight_via_convolution(roots, ts))
        seed = int(opts.get("seed", 0))
        samples = int(opts.get("samples", 20000))
        rng = np.random.default_rng(seed)
        fam = ExpFamily.of_roots(roots)
        mc = []
        for t in ts:
            if len(fam.exponents) < 2:
                mc.append((float(eval_weight(w, t)), 0.0))
                continue
            est, se = simplex_form(fam, -math.log(t), samples, rng=rng)
            mc.append(((est / t / roots.leading).real, se / t / abs(roots.leading)))
        rows = [[t, x, y, m, s] for t, x, y, (m, s) in zip(ts, a, b, mc)]
        report["points"] = [{"t": _num(t), "w_pfd": _num(x), "w_convolution": _num(y), "w_simplex": _num(m),
                             "simplex_stderr": _num(s)} for t, x, y, m, s in rows]
        table = (["t", "w_pfd", "w_convolution", "w_simplex", "simplex_stderr"], rows)
    elif cmd == "classify":
        budget = Budget(grid_size=int(opts.get("grid", 4000)), fd_order=int(opts.get("max_order", 25)))
        seq = exact_sequence(q, request.p.polynomial()) if request.p.kind == "coeffs" else None
        verdict = decide_roots(q, roots, budget, sequence=seq)
        report["verdict"] = _jsonable(verdict)
        code = EXIT_CODES[verdict.decision]
    else:
        raise ParseError(f"unknown command {cmd!r}")
    return report, code, table


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_ERROR)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="momentlab", description="Hausdorff moment tests for rational sequences q(n)/p(n).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--q", default="coeffs=[1]", help="numerator: coeffs=[...] or roots=[...] (default coeffs=[1])")
        sp.add_argument("--p", help="denominator: coeffs=[...] or roots=[(re,im,mult),...]")
        sp.add_argument("--grid", type=int, help="grid size (points for tables, scan size for classify)")
        sp.add_argument("--max-order", type=int, help="largest moment or difference order")
        sp.add_argument("--tol", type=float, help="quadrature tolerance for moments")
        sp.add_argument("--seed", type=int, help="seed for Monte Carlo sampling")
        sp.add_argument("--format", choices=("json", "csv"), default=None)
        sp.add_argument("--out", help="write the report to this file")
        sp.add_argument("--timing", action="store_true", help="add wall-clock time (breaks byte-identity)")
        if name == "counterexample":
            sp.add_argument("--c", type=float, default=1.0, help="shift in (j + c)^6")
            sp.add_argument("--scan", action="store_true", help="also scan c over [0.5, 2]")
        if name == "convolve":
            sp.add_argument("--samples", type=int, help="Monte Carlo samples per point")
    return parser


def request_from_args(args) -> AnalysisRequest:
    options = {}
    for key in ("grid", "max_order", "tol", "seed", "samples", "c"):
        v = getattr(args, key, None)
        if v is not None:
            options[key] = v
    if getattr(args, "scan", False):
        options["scan"] = True
    p = PolySpec.parse(args.p) if args.p is not None else None
    return AnalysisRequest(args.command, PolySpec.parse(args.q), p, options)


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    fmt = args.format or ("csv" if args.command == "weight" else "json")
    try:
        request = request_from_args(args)
        start = time.perf_counter()
        report, code, table = run(request)
        if args.timing:
            report["timing_seconds"] = time.perf_counter() - start
    except (MomentLabError, ValueError) as exc:  # ValueError: out-of-range options rejected by the library
        print(f"momentlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if fmt == "csv":
        if table is None:
            print(f"momentlab: {args.command} has no CSV form", file=sys.stderr)
            return EXIT_ERROR
        text = _rows_to_csv(*table)
    else:
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
