"""Command-line front end: one JSON request in, one JSON document out.

Exit status is 0 for success or a passing verdict, 1 for a failing verdict
and 2 for malformed input or a domain error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Mapping

from . import constructions, functionals
from .coding import CodingFunction, HistoryCoder
from .errors import TsirelsonError
from .families import FamilySpec, family_member, is_admissible, maximal_family_subset
from .norm import norm, norm_weight_restricted
from .parameters import SpaceSpec, named_space
from .rational import fmt, jsonable, parse
from .report import FAIL, Report
from .trees import TreeFunctional, evaluate
from .vectors import FinVector, Scc, check_basic_scc, make_scc, repeated_average
from .verify import DEFAULT_SEED, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _need(payload: Mapping, key: str) -> Any:
    if key not in payload:
        raise UsageError(f"payload is missing {key!r}")
    return payload[key]


def _vector(data) -> FinVector:
    if isinstance(data, list) and data and isinstance(data[0], (int, str)) and not isinstance(data[0], list):
        return FinVector.ones(int(i) for i in data)
    return FinVector.from_json(data)


def _functional(data) -> TreeFunctional | FinVector:
    if isinstance(data, Mapping) and ("leaf" in data or "op" in data):
        return TreeFunctional.from_json(data)
    return _vector(data)


def _report_result(report: Report) -> tuple[dict, int]:
    report.finish()
    return report.to_json(), EXIT_FAIL if report.verdict == FAIL else EXIT_OK


class Context:
    def __init__(self, args: argparse.Namespace, payload: Mapping):
        self.args = args
        self.payload = payload

    @property
    def spec(self) -> SpaceSpec:
        if self.args.spec:
            return SpaceSpec.from_json(_load_json(self.args.spec))
        if "spec" in self.payload:
            return SpaceSpec.from_json(self.payload["spec"])
        return named_space("tsirelson")

    def table(self, spec: SpaceSpec) -> CodingFunction:
        if self.args.sigma_table:
            return CodingFunction.load(_load_json(self.args.sigma_table), spec.params)
        return CodingFunction(spec.params)

    def history(self, spec: SpaceSpec) -> HistoryCoder | None:
        if self.args.sigma_table:
            return HistoryCoder.load(_load_json(self.args.sigma_table), spec.params)
        return None


def _load_json(ref: str):
    path = Path(ref)
    text = path.read_text() if path.exists() else ref
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text  # bare preset name


# ---------------------------------------------------------------------------
# Subcommands


def cmd_family(ctx: Context):
    F = _need(ctx.payload, "F")
    fam = FamilySpec.parse(_need(ctx.payload, "family"))
    return {"member": family_member(F, fam), "family": str(fam)}, EXIT_OK


def cmd_maximal(ctx: Context):
    L = _need(ctx.payload, "L")
    fam = FamilySpec.parse(_need(ctx.payload, "family"))
    return {"subset": list(maximal_family_subset(L, fam)), "family": str(fam)}, EXIT_OK


def cmd_admissible(ctx: Context):
    sets = _need(ctx.payload, "sets")
    mode = ctx.payload.get("mode", "admissible")
    fam = FamilySpec.parse(_need(ctx.payload, "family"))
    return {"ok": is_admissible(sets, fam, mode), "mode": mode, "family": str(fam)}, EXIT_OK


def cmd_scc(ctx: Context):
    p = ctx.payload
    n = int(_need(p, "n"))
    eps = parse(p.get("eps", "1"))
    if "blocks" in p:
        scc = make_scc([_vector(b) for b in p["blocks"]], n, eps)
        cert = scc.certificate
        out = {"scc": scc.to_json(), "vector": scc.vector.to_json()}
    else:
        x = _vector(p["x"]) if "x" in p else repeated_average(range(int(_need(p, "start")), 10**6), n)
        cert = check_basic_scc(x, n, eps)
        out = {"vector": x.to_json()}
    out["certificate"] = cert.to_json()
    return out, EXIT_OK if cert.ok else EXIT_FAIL


def _candidates(ctx: Context, spec: SpaceSpec):
    if "candidates" in ctx.payload:
        return [TreeFunctional.from_json(c) for c in ctx.payload["candidates"]]
    return () if spec.has_undecidable_rules() else None


def cmd_norm(ctx: Context):
    spec = ctx.spec
    x = _vector(_need(ctx.payload, "x"))
    res = norm(x, spec, budget=ctx.args.budget, candidates=_candidates(ctx, spec))
    return res.to_json(), EXIT_OK


def cmd_norm_restricted(ctx: Context):
    spec = ctx.spec
    x = _vector(_need(ctx.payload, "x"))
    w = parse(_need(ctx.payload, "min_weight"))
    res = norm_weight_restricted(x, spec, w, budget=ctx.args.budget, candidates=_candidates(ctx, spec))
    return res.to_json(), EXIT_OK


def cmd_eval(ctx: Context):
    f = TreeFunctional.from_json(_need(ctx.payload, "f"))
    x = _vector(_need(ctx.payload, "x"))
    return {"value": fmt(evaluate(f, x))}, EXIT_OK


def cmd_validate_w(ctx: Context):
    spec = ctx.spec
    f = TreeFunctional.from_json(_need(ctx.payload, "f"))
    return _report_result(functionals.validate_W(f, spec, ctx.table(spec)))


def cmd_validate_w4(ctx: Context):
    spec = ctx.spec
    f = TreeFunctional.from_json(_need(ctx.payload, "f"))
    return _report_result(functionals.validate_W4(f, spec, ctx.history(spec)))


def cmd_sigma(ctx: Context):
    spec = ctx.spec
    cf = ctx.table(spec)
    seq = _need(ctx.payload, "seq")
    value = cf.sigma(seq)
    return {"value": value, "table": cf.export(), "table_hash": cf.digest()}, EXIT_OK


def cmd_g_op(ctx: Context):
    f = _functional(_need(ctx.payload, "f"))
    F = _need(ctx.payload, "F")
    out = functionals.g_operation(f, F)
    return {"result": out.to_json()}, EXIT_OK


def cmd_ris(ctx: Context):
    spec = ctx.spec
    p = ctx.payload
    cert = constructions.ris_certify(
        [_vector(b) for b in _need(p, "blocks")], _need(p, "jseq"), parse(_need(p, "C")), spec, ctx.args.budget
    )
    code = EXIT_FAIL if constructions.REFUTED in cert.status.values() else EXIT_OK
    return cert.to_json(), code


def _scc_arg(data) -> Scc | FinVector:
    if isinstance(data, Mapping) and "certificate" in data:
        return Scc.from_json(data)
    return _vector(data)


def cmd_lemma(ctx: Context):
    spec = ctx.spec
    p = ctx.payload
    kind = ctx.args.kind or p.get("kind")
    if kind == "allowable-sum":
        report = constructions.allowable_sum_check(
            _scc_arg(_need(p, "x")), parse(_need(p, "C")),
            [TreeFunctional.from_json(f) for f in p.get("family", [])], spec)
    elif kind == "ris-scc":
        report = constructions.ris_scc_check(
            _scc_arg(_need(p, "x")), _need(p, "jseq"), parse(_need(p, "C")), int(_need(p, "j")),
            TreeFunctional.from_json(_need(p, "f")), spec)
    elif kind == "ris-scc-family":
        report = constructions.ris_scc_family_check(
            _scc_arg(_need(p, "x")), _need(p, "jseq"), parse(_need(p, "C")), int(_need(p, "j")), int(_need(p, "s")),
            [TreeFunctional.from_json(f) for f in p.get("family", [])], spec)
    elif kind == "high-weight":
        report = constructions.high_weight_check(
            _scc_arg(_need(p, "u")), p.get("jseq", []), int(_need(p, "j")),
            TreeFunctional.from_json(_need(p, "f")), spec)
    else:
        raise UsageError(f"unknown lemma kind {kind!r}")
    return _report_result(report)


def _degrees(p: Mapping) -> dict:
    out = {}
    if "degrees" in p:
        out["degrees"] = tuple(int(d) for d in p["degrees"])
    if "eps" in p:
        out["eps"] = tuple(parse(e) for e in p["eps"])
    if "outer_members" in p:
        out["outer_members"] = int(p["outer_members"])
    return out


def cmd_build_pair(ctx: Context):
    spec = ctx.spec
    p = ctx.payload
    cf = ctx.table(spec)
    trace = constructions.build_dependent_pair(
        [_vector(b) for b in _need(p, "Y")], [_vector(b) for b in _need(p, "Z")], int(_need(p, "j")),
        spec, cf, ctx.args.budget, **_degrees(p))
    return trace.to_json(), EXIT_OK if trace.ok else EXIT_FAIL


def cmd_build_witness(ctx: Context):
    spec = ctx.spec
    p = ctx.payload
    cf = ctx.table(spec)
    trace = constructions.build_tight_witness(
        [_vector(b) for b in _need(p, "blocks")], int(_need(p, "j")), spec, cf, ctx.args.budget, **_degrees(p))
    return trace.to_json(), EXIT_OK if trace.ok else EXIT_FAIL


COMMANDS: dict[str, Callable[[Context], tuple[dict, int]]] = {
    "family": cmd_family,
    "maximal": cmd_maximal,
    "admissible": cmd_admissible,
    "scc": cmd_scc,
    "norm": cmd_norm,
    "norm-restricted": cmd_norm_restricted,
    "eval": cmd_eval,
    "validate-w": cmd_validate_w,
    "validate-w4": cmd_validate_w4,
    "sigma": cmd_sigma,
    "g-op": cmd_g_op,
    "ris": cmd_ris,
    "lemma": cmd_lemma,
    "build-pair": cmd_build_pair,
    "build-witness": cmd_build_witness,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsirelson", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(list(COMMANDS) + ["verify"]))
    parser.add_argument("suite", nargs="?", help="suite name for 'verify'")
    parser.add_argument("--spec", help="space description: JSON file, inline JSON or preset name")
    parser.add_argument("--sigma-table", help="frozen coding table (JSON file)")
    parser.add_argument("--budget", type=int, help="cap on dynamic-programming states")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--kind", help="checker for 'lemma'")
    parser.add_argument("--in", dest="infile", help="read the request from a file instead of stdin")
    parser.add_argument("--out", help="write the JSON result to a file")
    return parser


def _emit(doc: Any, out: str | None) -> None:
    text = json.dumps(jsonable(doc), sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _refuse_float(text: str):
    raise UsageError(f"float {text} is not exact; write rationals as \"p/q\" strings")


def _read_payload(args: argparse.Namespace) -> Mapping:
    text = Path(args.infile).read_text() if args.infile else sys.stdin.read()
    if not text.strip():
        return {}
    data = json.loads(text, parse_float=_refuse_float)
    if not isinstance(data, Mapping):
        raise UsageError("request must be a JSON object")
    return data


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code:
            _emit({"error": {"type": "usage", "message": "invalid command line"}}, None)
            return EXIT_USAGE
        return EXIT_OK
    try:
        if args.command == "verify":
            if not args.suite:
                raise UsageError("verify needs a suite name")
            summary = run_suite(args.suite, seed=args.seed)
            _emit(summary, args.out)
            return EXIT_OK if summary["ok"] else EXIT_FAIL
        payload = _read_payload(args)
        doc, code = COMMANDS[args.command](Context(args, payload))
    except (UsageError, TsirelsonError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        kind = "usage" if isinstance(exc, (UsageError, json.JSONDecodeError)) else type(exc).__name__
        _emit({"error": {"type": kind, "message": str(exc)}}, args.out)
        return EXIT_USAGE
    _emit(doc, args.out)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
