"""Command-line interface.

Subcommands: expand (coefficient series of a function), classify (full
dynamical report), enumerate (ergodic cubic survey mod 8), generate
(prescribed instances for p >= 5), verify (identity suites and the
counterexample catalog).  Output is JSON with residues rendered as decimal
strings.  Exit codes: 0 pass, 1 criterion false, 2 bad input or unmet
precondition, 3 internal cross-check breach.
"""

from __future__ import annotations

import argparse
import json
import random
import re
import sys

from . import analysis, criteria, dynamics, funcspace, identities
from .errors import InputError, InternalCheckError, PreconditionError
from .funcspace import CoefficientSeries, PadicFunction


# ---------------------------------------------------------------------
# function input parsing
# ---------------------------------------------------------------------

_TERM_RE = re.compile(r"^([+-]?)(\d*)(?:x(?:\^(\d+))?)?$")


def parse_polynomial_text(text: str) -> list[int]:
    """Coefficients, constant first, from forms like '1+3x+2x^3' or '1,3,0,2'."""
    text = text.replace(" ", "").replace("**", "^")
    if not text:
        raise InputError("empty polynomial")
    if "x" not in text:
        try:
            return [int(part) for part in text.replace(",", " ").split()]
        except ValueError as exc:
            raise InputError(f"bad coefficient list: {exc}") from None
    chunks = re.findall(r"[+-]?[^+-]+", text)
    coeffs: dict[int, int] = {}
    for chunk in chunks:
        m = _TERM_RE.match(chunk)
        if not m or (not m.group(2) and "x" not in chunk):
            raise InputError(f"cannot parse term {chunk!r}")
        sign = -1 if m.group(1) == "-" else 1
        coef = int(m.group(2)) if m.group(2) else 1
        if "x" not in chunk:
            exp = 0
        elif m.group(3) is not None:
            exp = int(m.group(3))
        else:
            exp = 1
        coeffs[exp] = coeffs.get(exp, 0) + sign * coef
    top = max(coeffs)
    return [coeffs.get(i, 0) for i in range(top + 1)]


def _ints(seq) -> list[int]:
    return [int(x) for x in seq]


def function_from_json(data: dict, depth: int | None) -> PadicFunction:
    try:
        kind = data["kind"]
        p = int(data["p"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed function object: {exc}") from None
    if kind == "polynomial":
        if "coeffs" not in data:
            raise InputError("polynomial object needs 'coeffs'")
        return PadicFunction.from_polynomial(
            _ints(data["coeffs"]), p, depth or funcspace.max_depth()
        )
    if kind == "table":
        if "values" not in data or "depth" not in data:
            raise InputError("table object needs 'values' and 'depth'")
        return PadicFunction.from_table(_ints(data["values"]), p, int(data["depth"]))
    if kind in ("mahler", "vdp"):
        series = CoefficientSeries.from_json_dict(data)
        ctor = PadicFunction.from_mahler if kind == "mahler" else PadicFunction.from_vdp
        return ctor(series, depth)
    raise InputError(f"unknown function kind {kind!r}")


def resolve_function(args, default_depth: int = 4) -> PadicFunction:
    text = args.function
    depth = getattr(args, "depth", None)
    if text == "-":
        data = json.load(sys.stdin)
        return function_from_json(data, depth)
    if text.startswith("@"):
        with open(text[1:]) as fh:
            data = json.load(fh)
        return function_from_json(data, depth)
    if args.prime is None:
        raise InputError("-p/--prime is required for inline polynomial input")
    coeffs = parse_polynomial_text(text)
    return PadicFunction.from_polynomial(
        coeffs, args.prime, depth if depth is not None else default_depth
    )


def _emit(payload: dict) -> None:
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")


# ---------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------


def cmd_expand(args) -> int:
    f = resolve_function(args, default_depth=min(6, funcspace.max_depth()))
    count = args.count if args.count is not None else f.prime ** 2
    extract = (
        funcspace.mahler_coefficients if args.basis == "mahler"
        else funcspace.vdp_coefficients
    )
    series = extract(f, count=count)
    out = series.to_json_dict()
    if args.normalized:
        out["normalized"] = [str(x) for x in series.normalized_terms()]
    lip = funcspace.lipschitz_check(series)
    out["lipschitz"] = lip.to_json_dict()
    _emit(out)
    return 0


def cmd_classify(args) -> int:
    f = resolve_function(args, default_depth=min(4, funcspace.max_depth()))
    if f.depth < 2:
        raise InputError("classification needs depth >= 2")
    report: dict = {
        "p": f.prime,
        "depth": f.depth,
        "kind": f.kind,
    }
    report["lipschitz"] = funcspace.lipschitz_check(
        funcspace.vdp_coefficients(f)
    ).to_json_dict()
    ud1 = analysis.ud1_equivalence_crosscheck(f)
    if not ud1["agree"]:
        raise InternalCheckError("differentiability routes disagree")
    if ud1["derived_consistent"] is False:
        raise InternalCheckError("derivative residues disagree between routes")
    is_ud1 = ud1["direct"].verdict.passed
    report["ud1"] = {
        "direct": ud1["direct"].verdict.to_json_dict(),
        "vdp": ud1["vdp"].to_json_dict(),
        "mahler": ud1["mahler"].to_json_dict(),
        "agree": ud1["agree"],
    }
    report["measure_preserving"] = dynamics.measure_preserving_vdp(
        funcspace.vdp_coefficients(f)
    ).to_json_dict()

    decision = None
    closed = None
    if f.kind == "polynomial":
        decision = dynamics.decide_ergodicity(f, mu_override=args.mu)
    if is_ud1 and (f.prime in (2, 3) and f.depth >= 3 or f.prime >= 5):
        closed = criteria.closed_form_ergodic(f, assume_ud1=True)
    if decision is not None and closed is not None:
        if decision.ergodic != closed.ergodic:
            raise InternalCheckError(
                "threshold decision and closed-form criterion disagree"
            )
    if decision is None:
        decision = closed
    if decision is None:
        oracle = dynamics.ergodic_oracle(f)
        decision = dynamics.ErgodicityDecision(
            f.prime, oracle.passed, "exhaustive-to-depth", None, {"oracle": oracle}
        )
    report["ergodicity"] = decision.to_json_dict()
    if closed is not None and closed is not decision:
        report["closed_form"] = closed.to_json_dict()
    _emit(report)
    return 0 if decision.ergodic else 1


def cmd_enumerate(args) -> int:
    if args.prime != 2 or args.degree != 3:
        raise InputError("enumeration is implemented for cubics over p=2")
    catalog = criteria.ergodic_cubic_catalog_p2()
    catalog_tables = {}
    for entry in catalog:
        g = PadicFunction.from_polynomial(entry, 2, 3)
        catalog_tables[tuple(g.value_table(3))] = entry
    classes: dict[tuple, list] = {}
    total = ergodic_count = 0
    for a in range(8):
        for b in range(8):
            for c in range(8):
                for d in range(8):
                    total += 1
                    coeffs = (d, c, b, a)
                    verdict = criteria.larin_transitive_mod8(coeffs)
                    if args.crosscheck:
                        g = PadicFunction.from_polynomial(coeffs, 2, 3)
                        mv = criteria.mahler_ergodic_p2(
                            funcspace.mahler_coefficients(g, 4)
                        )
                        vv = criteria.vdp_ergodic_p2(funcspace.vdp_coefficients(g, 4))
                        if not (verdict.passed == mv.passed == vv.passed):
                            raise InternalCheckError(
                                f"criteria disagree on {coeffs}"
                            )
                    if not verdict.passed:
                        continue
                    ergodic_count += 1
                    g = PadicFunction.from_polynomial(coeffs, 2, 3)
                    classes.setdefault(tuple(g.value_table(3)), []).append(coeffs)
    if set(classes) != set(catalog_tables):
        raise InternalCheckError("ergodic map classes do not match the catalog")
    out = {
        "p": 2,
        "degree": 3,
        "modulus": 8,
        "total": total,
        "ergodic": ergodic_count,
        "classes": [
            {
                "catalog": list(catalog_tables[table]),
                "members": [list(m) for m in sorted(classes[table])],
                "table": [str(v) for v in table],
            }
            for table in sorted(catalog_tables)
        ],
    }
    _emit(out)
    return 0


def _csv_ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


def cmd_generate(args) -> int:
    p = args.prime
    if p is None:
        raise InputError("-p/--prime is required")
    rng = random.Random(args.seed)
    instances = []
    explicit = args.phi is not None or args.bvec is not None or args.lift is not None
    count = 1 if explicit else args.count
    for _ in range(count):
        if args.route == "poly":
            alphas, Bvec, Dvec = criteria.random_power_basis_poly(p, rng)
            f = PadicFunction.from_polynomial(alphas, p, 3)
            conds = criteria.p5_conditions(f)
            oracle = dynamics.ergodic_oracle(f, 3)
            if conds["combined"].passed != oracle.passed:
                raise InternalCheckError("criterion and oracle disagree")
            instances.append(
                {
                    "route": "poly",
                    "alphas": [str(x) for x in alphas],
                    "B": [str(x) for x in Bvec],
                    "D": [str(x) for x in Dvec],
                    "conditions": {
                        k: v.to_json_dict() for k, v in conds.items()
                    },
                    "ergodic": conds["combined"].passed,
                }
            )
        else:
            if explicit:
                phi = args.phi or criteria.random_transitive_permutation(p, rng)
                bvec = args.bvec or criteria.random_unit_product_one(p, p, rng)
                lift = args.lift or (0,) * (2 * p)
            else:
                phi = criteria.random_transitive_permutation(p, rng)
                bvec = criteria.random_unit_product_one(p, p, rng)
                lift = tuple(rng.randrange(p) for _ in range(2 * p))
            form = criteria.p5_linear_form(p, phi, bvec, lift)
            inst = form["instance"]
            oracle = dynamics.ergodic_oracle(inst.function, 3)
            if inst.passed != oracle.passed:
                raise InternalCheckError("instance conditions and oracle disagree")
            if not form["agree"]:
                raise InternalCheckError("linear form missed the return residue")
            entry = inst.to_json_dict()
            entry["route"] = "mahler"
            entry["linear_form"] = {
                "formula": str(form["formula"]),
                "direct": str(form["direct"]),
                "agree": form["agree"],
            }
            entry["ergodic"] = inst.passed
            instances.append(entry)
    _emit({"p": p, "count": len(instances), "instances": instances})
    return 0


def cmd_verify(args) -> int:
    out: dict = {}
    ok = True
    names = []
    if args.suite:
        names = identities.all_suite_names() if "all" in args.suite else args.suite
    if names:
        overrides = {}
        if args.p_max is not None:
            overrides["p_max"] = args.p_max
        if args.s_max is not None:
            overrides["s_max"] = args.s_max
        reports = []
        for name in names:
            report = identities.verify_identity_suite(name, **overrides)
            reports.append(report.to_json_dict())
            ok = ok and report.passed
        out["suites"] = reports
    if args.counterexamples:
        cases = []
        for entry in criteria.counterexample_catalog():
            p = entry["p"]
            f = PadicFunction.from_polynomial(entry["coeffs"], p, entry["failing_level"])
            t_low = dynamics.transitive_mod(f, entry["transitive_level"]).passed
            t_high = dynamics.transitive_mod(f, entry["failing_level"]).passed
            cyc = dynamics.cycle_structure(f, entry["transitive_level"])
            orbit_ok = (
                cyc.transitive and tuple(cyc.cycles[0]) == tuple(entry["orbit"])
            )
            checks = {
                "transitive_below": t_low,
                "not_transitive_at": not t_high,
                "orbit": orbit_ok,
            }
            if "orbit_at_failing_level" in entry:
                got = dynamics.orbit_of(f, entry["failing_level"], 0)
                checks["orbit_at_failing_level"] = got == tuple(
                    entry["orbit_at_failing_level"]
                )
            if p in (2, 3):
                checks["rejected_by_closed_form"] = not criteria.closed_form_ergodic(
                    f
                ).ergodic
            good = all(checks.values())
            ok = ok and good
            cases.append(
                {
                    "p": p,
                    "coeffs": [str(c) for c in entry["coeffs"]],
                    "checks": checks,
                    "pass": good,
                }
            )
        for p in (2, 3, 5, 7, 11, 13):
            f = criteria.power_counterexample(p)
            good = (
                dynamics.transitive_mod(f, 1).passed
                and not dynamics.transitive_mod(f, 2).passed
            )
            ok = ok and good
            cases.append({"p": p, "family": "x^p+1", "pass": good})
        out["counterexamples"] = cases
    if not out:
        raise InputError("nothing to verify: pass --suite and/or --counterexamples")
    out["pass"] = ok
    _emit(out)
    return 0 if ok else 1


# ---------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="padic-dyn",
        description="exact coefficient-based analysis of 1-Lipschitz dynamics "
        "on the p-adic integers",
    )
    parser.add_argument(
        "--jobs",
        type=int,
        default=1,
        help="reserved for compatibility; computations run in-process",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_function_args(sp):
        sp.add_argument(
            "function",
            help="polynomial text ('1+3x+2x^3'), coefficient list ('1,3,0,2'), "
            "@file.json, or '-' for JSON on stdin",
        )
        sp.add_argument("-p", "--prime", type=int, default=None)
        sp.add_argument("--depth", type=int, default=None)

    sp = sub.add_parser("expand", help="coefficient series of a function")
    add_function_args(sp)
    sp.add_argument("--basis", choices=("mahler", "vdp"), default="vdp")
    sp.add_argument("--count", type=int, default=None)
    sp.add_argument(
        "--normalized", action="store_true", help="include terms divided by p^e(i)"
    )
    sp.set_defaults(func=cmd_expand)

    sp = sub.add_parser("classify", help="full dynamical report; exit 0 iff ergodic")
    add_function_args(sp)
    sp.add_argument("--mu", type=int, default=None, help="override the deciding depth")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("enumerate", help="survey ergodic cubics mod 8")
    sp.add_argument("-p", "--prime", type=int, default=2)
    sp.add_argument("--degree", type=int, default=3)
    sp.add_argument(
        "--crosscheck",
        action="store_true",
        help="also run the Mahler and van der Put criteria on every cubic",
    )
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("generate", help="build instances with prescribed level-1 data")
    sp.add_argument("-p", "--prime", type=int, default=None)
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--route", choices=("mahler", "poly"), default="mahler")
    sp.add_argument("--phi", type=_csv_ints, default=None)
    sp.add_argument("--bvec", type=_csv_ints, default=None)
    sp.add_argument("--lift", type=_csv_ints, default=None)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("verify", help="run identity suites and counterexample checks")
    sp.add_argument(
        "--suite",
        action="append",
        choices=list(identities.all_suite_names()) + ["all"],
        help="repeatable; 'all' runs every suite",
    )
    sp.add_argument("--p-max", type=int, default=None)
    sp.add_argument("--s-max", type=int, default=None)
    sp.add_argument("--counterexamples", action="store_true")
    sp.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InternalCheckError as exc:
        print(f"internal check failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
