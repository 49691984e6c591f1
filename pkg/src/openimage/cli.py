"""``openimage`` command line: bounds, lie, inner, goursat and verify.

All input and output is JSON.  Reports are written with sorted keys and no
timings, so a fixed seed and input give byte-identical output.

Exit codes: 0 pass, 1 falsification or failure, 2 usage or malformed input.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from importlib import resources

import jsonschema

from . import bounds as B
from .errors import DegenerateProjection, OpenImageError, PreconditionError
from .groups import (BallSpec, FiniteMatrixGroup, ball_index, contains_ball,
                     goursat_exponents, goursat_index_bound, pairwise_exponents)
from .inner import (ApproxMorphism, construct_inner_matrix, graph_defect_depth,
                    verify_trace_congruence)
from .lattice import (kernel_component, lie_algebra_of_group,
                      sl2_containment_exponent, first_projection, special_basis)
from .matrices import Mat2, TracelessMat
from .padic import PadicContext, vp
from .suites import SUITES, run_suites

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def load_schema(name: str) -> dict:
    res = resources.files("openimage") / "schemas" / f"{name}.v{SCHEMA_VERSION}.json"
    doc = json.loads(res.read_text())
    # the only cross reference is goursat -> group
    props = doc.get("properties", {})
    for key, sub in props.items():
        if isinstance(sub, dict) and sub.get("$ref") == f"openimage/group/v{SCHEMA_VERSION}":
            props[key] = load_schema("group")
    return doc


def validate(doc, name: str):
    validator = jsonschema.Draft202012Validator(load_schema(name))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for err in errors:
            path = "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}"
                                 for p in err.absolute_path)
            lines.append(f"{path}: {err.message}")
        raise UsageError("invalid input:\n  " + "\n  ".join(lines))


def _read_input(path):
    if path is None:
        raise UsageError("--input is required")
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _apply_overrides(doc, args):
    if isinstance(doc, dict):
        if args.prime is not None:
            doc["ell"] = args.prime
        if args.precision is not None:
            doc["N"] = args.precision
    return doc


# -- bounds -----------------------------------------------------------------

CONSTANTS = {
    "gamma": {"expression": "10^13", "value": B.GAMMA},
    "delta": {"expression": "exp(exp(exp(12)))"},
    "alpha_2": {"expression": "1024*g^3 at g=2", "value": B.alpha_g(2)},
    "K_ell_cap": {"expression": "2*48^2", "value": B.K_ELL_CAP},
    "K2_cap": {"expression": "3^2*2^16", "value": B.K2_CAP},
    "zeta2_upper": {"expression": "1.644935", "value": str(B.ZETA2_UPPER)},
    "pair_index_exponent": {"expression": "10^4", "value": B.PAIR_INDEX_EXPONENT},
    "f_odd": {"expression": "2*v(b0) + 1024*max(v(D1), v(D2)) + 800",
              "constant": B.F_ODD_CONSTANT, "coefficient": B.F_ODD_COEFF},
    "f_two": {"expression": "6*v(b0) + 19008*max(v(D1), v(D2)) + 15421",
              "constant": B.F_TWO_CONSTANT, "coefficient": B.F_TWO_COEFF},
}

FORMULAS = {
    "b_iso": "((14g)^(64g^2) [K:Q] max(h, log[K:Q], 1)^2)^alpha(g), alpha(g) = 1024 g^3",
    "b_with_degree": "4^(e (d(1+log d)^2)^alpha(g)) b^(1 + alpha(g) log(d(1+log d)^2))",
    "pair_index": "b(E_i x E_j / K; 2*48^2)^(10^4)",
    "bad_primes": "30 b0(E_i;60) b0(E_i^2;2) b0(E_j;60) b0(E_j^2;2) b0(E_i x E_j;2)",
    "adelic_index": "8^(n(n-2)) zeta(2)^(n(n-1)) [K:Q] max b(E_i x E_j; 2*48^2)^(5000 n(n-1))",
    "headline": "delta^(n(n-1)) ([K:Q] H^2)^(gamma n(n-1)), H = max{1, log[K:Q], max h(E_i)}",
    "f_of_ell": "see constants f_odd and f_two",
}


def _bound_entry(name, value: B.BigLogNumber):
    out = value.to_json()
    out["formula"] = FORMULAS[name]
    return out


def cmd_bounds(args) -> tuple[dict, int]:
    doc = _read_input(args.input)
    validate(doc, "bounds_input")
    try:
        inp = B.BoundInputs.from_json(doc)
    except PreconditionError as exc:
        raise UsageError(f"invalid input: {exc}") from exc
    n = inp.n_curves
    e = n * (n - 1)
    constants = json.loads(json.dumps(CONSTANTS))
    constants["adelic_exponent"] = {"expression": "5000*n*(n-1)",
                                    "value": B.ADELIC_EXPONENT_COEFF * e}
    constants["delta"].update(B.delta_power_landmarks(1))
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            pairs.append({
                "pair": [i, j],
                "b_with_degree": _bound_entry("b_with_degree", B.pair_b(inp, i, j)),
                "pair_index": _bound_entry("pair_index", B.pair_index_bound(inp, (i, j))),
                "bad_primes": _bound_entry("bad_primes", B.bad_prime_product_bound(inp, (i, j))),
            })
    primes = {}
    for key, (vb, d1, d2) in sorted((inp.b0_valuations or {}).items(), key=lambda kv: int(kv[0])):
        ell = int(key)
        primes[key] = {"n1": B.n_j_from_valuations(ell, d1),
                       "n2": B.n_j_from_valuations(ell, d2),
                       "f": B.f_of_ell(ell, vb, d1, d2),
                       "formula": CONSTANTS["f_two" if ell == 2 else "f_odd"]["expression"]}
    holds = B.check_implication(inp)
    report = {
        "command": "bounds",
        "schema_version": SCHEMA_VERSION,
        "inputs": {"n": n, "K_degree": inp.K_degree, "heights": list(inp.heights),
                   "d": inp.d, "H": inp.H},
        "constants": constants,
        "delta_squared": B.delta_power_landmarks(2),
        "b_iso_single": _bound_entry("b_iso", B.b_iso(inp.K_degree, 1, max(map(float, inp.heights)))),
        "pairs": pairs,
        "primes": primes,
        "adelic_index": _bound_entry("adelic_index", B.adelic_index_bound(inp)),
        "headline": _bound_entry("headline", B.theorem1_bound(inp)),
        "goursat_index": {**B.goursat_index_bound(1, n).to_json(),
                          "formula": "2^(3n(n-2)) zeta(2)^(n(n-1)) c^(n(n-1)/2) at c=1"},
        "implication_holds": holds,
    }
    return report, EXIT_OK if holds else EXIT_FAIL


# -- lie --------------------------------------------------------------------

def _lattice_json(L):
    return {"basis": [list(r) for r in L.basis], "free_rank": L.rank,
            "pivot_valuations": list(L.pivot_valuations)}


def _min_val(L):
    ctx = L.ctx
    return min((vp(x, ctx.ell, ctx.N) for r in L.basis for x in r), default=ctx.N)


def cmd_lie(args) -> tuple[dict, int]:
    doc = _apply_overrides(_read_input(args.input), args)
    validate(doc, "group")
    G = FiniteMatrixGroup.from_json(doc, cap=args.cap)
    L = lie_algebra_of_group(G)
    report = {"command": "lie", "schema_version": SCHEMA_VERSION,
              "ell": G.ell, "N": G.N, "n": G.n, "group_order": G.order,
              "lattice": _lattice_json(L)}
    if G.n >= 2:
        K = kernel_component(L)
        report["kernel"] = {**_lattice_json(K), "valuation": _min_val(K)}
        report["first_projection_sl2_exponent"] = sl2_containment_exponent(first_projection(L))
    if G.n == 2:
        try:
            sb = special_basis(L)
            report["special_basis"] = sb.to_json()
            report["graph_defect_depth"] = graph_defect_depth(L)
        except DegenerateProjection as exc:
            report["special_basis"] = None
            report["graph_defect_depth"] = None
            report["special_basis_error"] = str(exc)
    return report, EXIT_OK


# -- inner ------------------------------------------------------------------

def _morphism_from_doc(doc) -> ApproxMorphism:
    if "conjugator" in doc:
        ctx = PadicContext(doc["ell"], doc["N"])
        M0 = Mat2.from_rows(doc["conjugator"], ctx)
        noise = None
        if "noise" in doc:
            noise = [TracelessMat.of(Mat2.from_rows(r, ctx)) for r in doc["noise"]]
        return ApproxMorphism.conjugation(M0, doc["s"], doc["n"], noise)
    return ApproxMorphism.from_json(doc)


def cmd_inner(args) -> tuple[dict, int]:
    doc = _apply_overrides(_read_input(args.input), args)
    validate(doc, "morphism")
    try:
        phi = _morphism_from_doc(doc)
    except (ValueError, OpenImageError) as exc:
        raise UsageError(f"invalid input: {exc}") from exc
    cert = construct_inner_matrix(phi)
    M = cert.M
    inter = all((M * g).congruent(img * M, cert.certified_precision)
                for g, img in phi.pairs())
    trace_ok = verify_trace_congruence(phi, cert, seed=args.seed)
    report = {"command": "inner", "schema_version": SCHEMA_VERSION,
              "morphism": phi.to_json(), "certificate": cert.to_json(),
              "intertwines": inter, "trace_congruence": trace_ok}
    return report, EXIT_OK if inter and trace_ok else EXIT_FAIL


# -- goursat ----------------------------------------------------------------

def cmd_goursat(args) -> tuple[dict, int]:
    doc = _read_input(args.input)
    if isinstance(doc, dict) and isinstance(doc.get("group"), dict):
        _apply_overrides(doc["group"], args)
    elif args.prime is not None and isinstance(doc, dict):
        doc["ell"] = args.prime
    validate(doc, "goursat_input")
    report = {"command": "goursat", "schema_version": SCHEMA_VERSION}
    code = EXIT_OK
    G = None
    if "group" in doc:
        G = FiniteMatrixGroup.from_json(doc["group"], cap=args.cap)
        ell, S = G.ell, pairwise_exponents(G)
        report["group_order"] = G.order
    else:
        ell, S = doc["ell"], doc["s_matrix"]
        if any(len(row) != len(S) for row in S):
            raise UsageError("invalid input:\n  $.s_matrix: must be square")
    n = len(S)
    try:
        exps = goursat_exponents(S, ell, n)
    except ValueError as exc:
        raise UsageError(f"invalid input:\n  $.s_matrix: {exc}") from exc
    c = doc.get("c") or max(ball_index(ell, S[i][j]) ** 2
                            for i in range(n) for j in range(n) if i != j)
    report.update({"ell": ell, "s_matrix": S, "exponents": exps, "c": c,
                   "exponent_formula": "sum_{j != i} s_ij + (n-2) v",
                   "index_bound": {**goursat_index_bound(c, n).to_json(),
                                   "formula": "2^(3n(n-2)) zeta(2)^(n(n-1)) c^(n(n-1)/2)"}})
    if G is not None:
        ok = contains_ball(G, BallSpec(ell, tuple(exps)))
        report["contains_ball"] = ok
        code = EXIT_OK if ok else EXIT_FAIL
    return report, code


# -- verify -----------------------------------------------------------------

def cmd_verify(args) -> tuple[dict, int]:
    names = args.suite or ["all"]
    if "all" in names:
        names = list(SUITES)
    report = run_suites(names, seed=args.seed, trials=args.trials)
    report["command"] = "verify"
    report["schema_version"] = SCHEMA_VERSION
    return report, EXIT_OK if report["passed"] else EXIT_FAIL


COMMANDS = {"bounds": cmd_bounds, "lie": cmd_lie, "inner": cmd_inner,
            "goursat": cmd_goursat, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prime", type=int, help="override the prime l in the input")
    common.add_argument("--precision", type=int, help="override the precision N in the input")
    common.add_argument("--input", help="input JSON file")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--cap", type=int, default=10 ** 7, help="closure size cap")
    parser = argparse.ArgumentParser(prog="openimage", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("bounds", "lie", "inner", "goursat"):
        sub.add_parser(name, parents=[common])
    v = sub.add_parser("verify", parents=[common])
    v.add_argument("--suite", action="append", choices=sorted(SUITES) + ["all"])
    v.add_argument("--trials", type=int, help="override the per-suite trial count")
    return parser


def _emit(report: dict, path):
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    random.seed(args.seed)
    try:
        report, code = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"openimage {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OpenImageError as exc:
        report = {"command": args.command, "schema_version": SCHEMA_VERSION,
                  "error": type(exc).__name__, "message": str(exc)}
        code = EXIT_FAIL
    _emit(report, args.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
