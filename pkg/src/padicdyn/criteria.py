"""Closed-form ergodicity criteria per prime, and the p >= 5 generator.

For p = 2 the criteria are congruences on the first four Mahler or van der
Put coefficients (with the special cubic form for degree-3 polynomials mod
8).  For p = 3 they are selector-plus-condition case tables on nine
coefficients, shipped in data/ergodic_cases_p3.txt.  For p >= 5 ergodicity
reduces to transitivity mod p, a unit branch product, and the valuation of
the p-th return to 0; a generator solves for coefficient vectors hitting
prescribed reductions and a linear form predicts the third condition.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .arith import inverse_mod, require_prime, solve_fp
from .errors import InputError, InternalCheckError, NormalizationError, PreconditionError
from .funcspace import (
    CoefficientSeries,
    PadicFunction,
    floor_log,
    mahler_coefficients,
    vdp_coefficients,
)
from .analysis import ud1_check
from .dynamics import ErgodicityDecision, transitive_mod
from .verdict import CriterionVerdict, failing, passing
from .identities import (  # noqa: F401  (re-exported as part of this module's API)
    SuiteReport,
    all_suite_names,
    verify_identity_suite,
)

# ---------------------------------------------------------------------
# p = 2
# ---------------------------------------------------------------------

_LISTP2 = tuple(
    tuple(form) + (0,) * (3 - len(form) + 1)
    for d in (1, 3, 5, 7)
    for form in ((d, 1), (d, 5), (d, 3, 2), (d, 7, 2))
)


def ergodic_cubic_catalog_p2() -> tuple[tuple[int, int, int, int], ...]:
    """The sixteen ergodic cubic forms mod 8, constant coefficient first."""
    return _LISTP2


def larin_transitive_mod8(coeffs: Sequence[int]) -> CriterionVerdict:
    """Ergodicity of an integer cubic on Z_2 from its coefficients.

    Input is (d, c, b, a) for a x^3 + b x^2 + c x + d.  Conditions:
    a = 0 mod 4, b = 0 mod 2, b + c = 1 mod 4, d = 1 mod 2.
    """
    coeffs = tuple(int(x) for x in coeffs)
    if len(coeffs) > 4:
        raise InputError("larin_transitive_mod8 expects a cubic (4 coefficients)")
    d, c, b, a = (coeffs + (0, 0, 0, 0))[:4]
    name = "cubic-ergodic-p2"
    checks = [
        ("a-mod4", a % 4, 0),
        ("b-mod2", b % 2, 0),
        ("b+c-mod4", (b + c) % 4, 1),
        ("d-mod2", d % 2, 1),
    ]
    for label, got, want in checks:
        if got != want:
            return failing(name, label, witness={"value": got, "expected": want})
    return passing(name)


_MERG_P2 = (("a0-mod2", 0, 2, 1), ("a1-mod4", 1, 4, 1),
            ("a2-mod4", 2, 4, 0), ("a3-mod8", 3, 8, 0))


def mahler_ergodic_p2(series: CoefficientSeries) -> CriterionVerdict:
    """Ergodicity on Z_2 from raw Mahler terms:
    a_0 = 1 (2), a_1 = 1 (4), a_2 = 0 (4), a_3 = 0 (8)."""
    if series.kind != "mahler" or series.prime != 2:
        raise InputError("mahler_ergodic_p2 expects a mahler series over p=2")
    if len(series) < 4 or series.exponent < 3:
        raise InputError("need at least 4 terms at precision 2^3")
    name = "mahler-ergodic-p2"
    for label, idx, mod, want in _MERG_P2:
        got = series.term(idx) % mod
        if got != want:
            return failing(name, label, witness={"value": got, "expected": want},
                           depth=series.exponent)
    return passing(name, depth=series.exponent)


def vdp_ergodic_p2(series: CoefficientSeries) -> CriterionVerdict:
    """Ergodicity on Z_2 from normalized van der Put terms:
    b_0 = 1 (2), b_0 + b_1 = 3 (4), b_2 = 1 (2), b_2 + b_3 = 2 (4)."""
    if series.kind != "vdp" or series.prime != 2:
        raise InputError("vdp_ergodic_p2 expects a vdp series over p=2")
    if len(series) < 4 or series.exponent < 3:
        raise InputError("need at least 4 terms at precision 2^3")
    name = "vdp-ergodic-p2"
    try:
        b = [series.normalized(m, 2) for m in range(4)]
    except NormalizationError as exc:
        return failing(name, "normalization", witness={"error": str(exc)},
                       depth=series.exponent)
    checks = [
        ("b0-mod2", b[0] % 2, 1),
        ("b0+b1-mod4", (b[0] + b[1]) % 4, 3),
        ("b2-mod2", b[2] % 2, 1),
        ("b2+b3-mod4", (b[2] + b[3]) % 4, 2),
    ]
    for label, got, want in checks:
        if got != want:
            return failing(name, label, witness={"value": got, "expected": want},
                           depth=series.exponent)
    return passing(name, depth=series.exponent)


def vdp_from_mahler_p2(c: Sequence[int]) -> tuple[int, int, int, int]:
    """Exact change of basis on the first four normalized terms."""
    c0, c1, c2, c3 = (int(x) for x in c)
    return (c0, c0 + c1, c1 + c2, c1 + 3 * c2 + c3)


def mahler_from_vdp_p2(b: Sequence[int]) -> tuple[int, int, int, int]:
    b0, b1, b2, b3 = (int(x) for x in b)
    return (b0, -b0 + b1, b0 - b1 + b2, -2 * b0 + 2 * b1 - 3 * b2 + b3)


# ---------------------------------------------------------------------
# p = 3 case tables
# ---------------------------------------------------------------------


@dataclass(frozen=True)
class _Case:
    table: str
    case: str
    selector: tuple[int, ...]
    conditions: tuple[tuple[int, tuple[int, ...]], ...]


_CASES_CACHE: dict[str, tuple[_Case, ...]] | None = None


def _load_cases() -> dict[str, tuple[_Case, ...]]:
    global _CASES_CACHE
    if _CASES_CACHE is None:
        text = (
            importlib.resources.files("padicdyn")
            .joinpath("data/ergodic_cases_p3.txt")
            .read_text()
        )
        tables: dict[str, list[_Case]] = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            table, case, sel, *conds = line.split("|")
            selector = tuple(int(x) for x in sel.split(","))
            parsed = []
            for cond in conds:
                const, coefs = cond.split(":")
                parsed.append((int(const), tuple(int(x) for x in coefs.split(","))))
            tables.setdefault(table, []).append(
                _Case(table, case, selector, tuple(parsed))
            )
        _CASES_CACHE = {k: tuple(v) for k, v in tables.items()}
        for name, want in (("deg8", 8), ("ergbm", 8), ("ergbm2", 8)):
            if len(_CASES_CACHE.get(name, ())) != want:
                raise InternalCheckError(f"case table {name} is incomplete")
    return _CASES_CACHE


def _match_case(table: str, selector: Sequence[int]) -> _Case | None:
    for case in _load_cases()[table]:
        if tuple(selector) == case.selector:
            return case
    return None


def _evaluate_case(
    name: str, table: str, selector: Sequence[int], variables: Sequence[int]
) -> CriterionVerdict:
    case = _match_case(table, selector)
    if case is None:
        return failing(name, "no-case", witness={"selector": list(selector)})
    for idx, (const, coefs) in enumerate(case.conditions, start=1):
        value = (const + sum(c * v for c, v in zip(coefs, variables))) % 9
        if value == 0:
            return failing(
                name,
                f"case-{case.case}-cond{idx}",
                witness={"selector": list(selector), "value": value},
            )
    return passing(name, case=case.case)


def deg8_selector(alphas: Sequence[int]) -> tuple[int, ...]:
    a = [int(x) for x in alphas]
    a += [0] * (9 - len(a))
    A1 = sum(a[i] for i in (1, 3, 5, 7))
    A2 = sum(a[i] for i in (2, 4, 6, 8))
    D1 = sum(i * a[i] for i in range(9))
    D2 = sum(i * a[i] * (1 if (i - 1) % 2 == 0 else -1) for i in range(9))
    return tuple(x % 3 for x in (a[0], A1, A2, a[1], D1, D2))


def deg8_minimal_p3(alphas: Sequence[int]) -> CriterionVerdict:
    """Ergodicity on Z_3 of a degree <= 8 integer polynomial from its
    coefficients, via the selector/case table mod 9."""
    alphas = [int(x) for x in alphas]
    if len(alphas) > 9:
        raise InputError("deg8_minimal_p3 expects at most 9 coefficients")
    alphas += [0] * (9 - len(alphas))
    sel = deg8_selector(alphas)
    return _evaluate_case(
        "deg8-ergodic-p3", "deg8", sel, [x % 9 for x in alphas]
    )


def _nine_normals(series: CoefficientSeries) -> list[int]:
    if len(series) < 9 or series.exponent < 3:
        raise InputError("need at least 9 terms at precision 3^3")
    return [series.normalized(i, 2) for i in range(9)]


def mahler_ergodic_p3(series: CoefficientSeries) -> CriterionVerdict:
    """Ergodicity on Z_3 from normalized Mahler terms c_n = a_n / 3^e(n).

    Selector is [c_0..c_5] mod 3; the matched case's two affine forms in
    c_0..c_8 must be nonzero mod 9.  Inputs must lie in the
    differentiable-mod-3 class: 9 | a_n for n = 6..8.
    """
    if series.kind != "mahler" or series.prime != 3:
        raise InputError("mahler_ergodic_p3 expects a mahler series over p=3")
    name = "mahler-ergodic-p3"
    try:
        c = _nine_normals(series)
    except NormalizationError as exc:
        return failing(name, "normalization", witness={"error": str(exc)},
                       depth=series.exponent)
    if any(c[i] % 3 != 0 for i in (6, 7, 8)):
        return failing(
            name, "ud1-precondition",
            witness={"c6": c[6], "c7": c[7], "c8": c[8]},
            depth=series.exponent,
        )
    sel = tuple(x % 3 for x in c[:6])
    return _evaluate_case(name, "ergbm", sel, c)


def vdp_ergodic_p3(series: CoefficientSeries) -> CriterionVerdict:
    """Ergodicity on Z_3 from normalized van der Put terms b_m = B_m / 3^e(m).

    Selector is [b_0..b_5] mod 3; inputs in the differentiable-mod-3 class
    also satisfy b_{m+3} = 2 b_m mod 3 for m = 3..5, which is verified.
    """
    if series.kind != "vdp" or series.prime != 3:
        raise InputError("vdp_ergodic_p3 expects a vdp series over p=3")
    name = "vdp-ergodic-p3"
    try:
        b = _nine_normals(series)
    except NormalizationError as exc:
        return failing(name, "normalization", witness={"error": str(exc)},
                       depth=series.exponent)
    for m in (3, 4, 5):
        if (b[m + 3] - 2 * b[m]) % 3 != 0:
            return failing(
                name, "ud1-precondition",
                witness={"m": m, "b_m": b[m], "b_m3": b[m + 3]},
                depth=series.exponent,
            )
    sel = tuple(x % 3 for x in b[:6])
    return _evaluate_case(name, "ergbm2", sel, b)


def case_table_mask(table: str, variables: np.ndarray, selectors: np.ndarray) -> np.ndarray:
    """Vectorized case-table evaluation.

    variables is (N, 9) mod 9, selectors is (N, 6) mod 3; returns a boolean
    array marking rows whose selector matches a case and whose affine
    conditions are all nonzero mod 9.
    """
    variables = np.asarray(variables, dtype=np.int64) % 9
    selectors = np.asarray(selectors, dtype=np.int64) % 3
    out = np.zeros(len(variables), dtype=bool)
    for case in _load_cases()[table]:
        hit = (selectors == np.array(case.selector, dtype=np.int64)).all(axis=1)
        if not hit.any():
            continue
        good = hit.copy()
        for const, coefs in case.conditions:
            vals = (variables @ np.array(coefs, dtype=np.int64) + const) % 9
            good &= vals != 0
        out |= good
    return out


# exact basis matrices for p = 3 cross-validation ---------------------

# alpha_i from (c_0..c_5, c_6/3, c_7/3, c_8/3), upper triangular mod 9
RELPIS3 = (
    (1, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 1, 4, 1, 6, 6, 3, 0, 0),
    (0, 0, 5, 3, 7, 1, 5, 0, 0),
    (0, 0, 0, 5, 6, 2, 0, 2, 5),
    (0, 0, 0, 0, 8, 2, 5, 6, 4),
    (0, 0, 0, 0, 0, 7, 6, 2, 8),
    (0, 0, 0, 0, 0, 0, 8, 3, 1),
    (0, 0, 0, 0, 0, 0, 0, 5, 5),
    (0, 0, 0, 0, 0, 0, 0, 0, 4),
)

# [alpha_0, A1, A2, alpha_1, D1, D2] from [c_0..c_5], mod 3
SELECTOR_FROM_MAHLER_P3 = (
    (1, 0, 0, 0, 0, 0),
    (0, 1, 1, 0, 0, 0),
    (0, 0, 2, 0, 0, 0),
    (0, 1, 1, 1, 0, 0),
    (0, 1, 2, 1, 1, 0),
    (0, 1, 0, 1, 2, 1),
)

# normalized Mahler terms from normalized van der Put terms, exact integers
MMP_P3 = (
    (1, 0, 0, 0, 0, 0, 0, 0, 0),
    (-1, 1, 0, 0, 0, 0, 0, 0, 0),
    (1, -2, 1, 0, 0, 0, 0, 0, 0),
    (0, 1, -1, 1, 0, 0, 0, 0, 0),
    (-1, -1, 2, -4, 1, 0, 0, 0, 0),
    (3, 0, -3, 10, -5, 1, 0, 0, 0),
    (-6, 3, 3, -20, 15, -6, 1, 0, 0),
    (9, -9, 0, 35, -35, 21, -7, 1, 0),
    (-9, 18, -9, -56, 70, -56, 28, -8, 1),
)


def alpha_from_mahler_p3(cvec: Sequence[int]) -> tuple[int, ...]:
    """Polynomial coefficients mod 9 from (c_0..c_5, c_6/3, c_7/3, c_8/3)."""
    c = [int(x) for x in cvec]
    if len(c) != 9:
        raise InputError("expected 9 entries")
    return tuple(sum(r * v for r, v in zip(row, c)) % 9 for row in RELPIS3)


def mahler_from_alpha_p3(alphas: Sequence[int]) -> tuple[int, ...]:
    """Inverse of alpha_from_mahler_p3 (back substitution mod 9)."""
    a = [int(x) % 9 for x in alphas]
    if len(a) != 9:
        raise InputError("expected 9 entries")
    x = [0] * 9
    for i in range(8, -1, -1):
        acc = a[i]
        for j in range(i + 1, 9):
            acc -= RELPIS3[i][j] * x[j]
        x[i] = (acc * inverse_mod(RELPIS3[i][i], 9)) % 9
    return tuple(x)


def selector_from_mahler_p3(cvec6: Sequence[int]) -> tuple[int, ...]:
    c = [int(x) for x in cvec6[:6]]
    return tuple(
        sum(r * v for r, v in zip(row, c)) % 3 for row in SELECTOR_FROM_MAHLER_P3
    )


def mahler_normals_from_vdp_p3(bvec: Sequence[int]) -> tuple[int, ...]:
    """Exact integer change of basis c = M b on the first nine normals."""
    b = [int(x) for x in bvec]
    if len(b) != 9:
        raise InputError("expected 9 entries")
    return tuple(sum(r * v for r, v in zip(row, b)) for row in MMP_P3)


def vdp_normals_from_mahler_p3(cvec: Sequence[int]) -> tuple[int, ...]:
    """Exact inverse of mahler_normals_from_vdp_p3 (unit lower triangular)."""
    c = [int(x) for x in cvec]
    if len(c) != 9:
        raise InputError("expected 9 entries")
    b = [0] * 9
    for i in range(9):
        acc = c[i]
        for j in range(i):
            acc -= MMP_P3[i][j] * b[j]
        b[i] = acc
    return tuple(b)


# ---------------------------------------------------------------------
# p >= 5
# ---------------------------------------------------------------------


def _validate_phi(p: int, phi: Sequence[int]) -> tuple[int, ...]:
    phi = tuple(int(x) % p for x in phi)
    if len(phi) != p:
        raise InputError(f"phi must list {p} values")
    if sorted(phi) != list(range(p)):
        raise InputError("phi must be a permutation of 0..p-1")
    x, seen = 0, 0
    for _ in range(p):
        x = phi[x]
        seen += 1
        if x == 0:
            break
    if not (x == 0 and seen == p):
        raise InputError("phi must be a single p-cycle")
    return phi


def _validate_bvec(p: int, bvec: Sequence[int]) -> tuple[int, ...]:
    bvec = tuple(int(x) % p for x in bvec)
    if len(bvec) != p:
        raise InputError(f"bvec must list {p} values")
    if any(v == 0 for v in bvec):
        raise InputError("bvec entries must be units mod p")
    prod = 1
    for v in bvec:
        prod = (prod * v) % p
    if prod != 1:
        raise InputError("bvec must have product 1 mod p")
    return bvec


def p5_solve_base(p: int, phi: Sequence[int]) -> tuple[int, ...]:
    """First p Mahler residues from the level-1 target: solve the unit
    lower-triangular Pascal system C(i, n) e_n = phi(i) mod p."""
    phi = _validate_phi(p, phi)
    from .arith import binomial

    e = [0] * p
    for i in range(p):
        acc = phi[i]
        for n in range(i):
            acc -= binomial(i, n) * e[n]
        e[i] = acc % p
    # independent route: iterated differences of the value table mod p
    diffs = list(phi)
    for n in range(p):
        if diffs[0] % p != e[n]:
            raise InternalCheckError("Pascal solve disagrees with differences")
        diffs = [(diffs[i + 1] - diffs[i]) % p for i in range(len(diffs) - 1)]
    return tuple(e)


def p5_solve_branch(
    p: int, e_base: Sequence[int], bvec: Sequence[int]
) -> tuple[int, ...]:
    """Next p Mahler residues from branch targets via the lambda form:
    sum_n lambda_n^i e_n + sum_{n<=i} C(i,n) e_{p+n} = b_i mod p."""
    from .arith import binomial
    from .dynamics import lambda_coefficient

    bvec = _validate_bvec(p, bvec)
    e2 = [0] * p
    for i in range(p):
        acc = bvec[i]
        for n in range(p):
            acc -= lambda_coefficient(i, n, p) * e_base[n]
        for n in range(i):
            acc -= binomial(i, n) * e2[n]
        e2[i] = acc % p
    return tuple(e2)


@dataclass(frozen=True)
class P5Instance:
    prime: int
    phi: tuple[int, ...]
    bvec: tuple[int, ...]
    lift: tuple[int, ...]
    series: CoefficientSeries
    function: PadicFunction
    conditions: dict
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "p": self.prime,
            "phi": [str(x) for x in self.phi],
            "bvec": [str(x) for x in self.bvec],
            "lift": [str(x) for x in self.lift],
            "series": self.series.to_json_dict(),
            "conditions": {k: v.to_json_dict() for k, v in self.conditions.items()},
            "pass": self.passed,
        }


def p5_conditions(f: PadicFunction) -> dict:
    """The three-part criterion for p >= 5: transitivity mod p, unit branch
    product, and v_p(f^p(0)) = 1."""
    p = f.prime
    if p < 5:
        raise InputError("p5_conditions needs p >= 5")
    if f.depth < 2:
        raise InputError("need depth >= 2")
    out = {}
    out["transitive_mod_p"] = transitive_mod(f, 1)
    series = vdp_coefficients(f, count=2 * p)
    prod = 1
    for j in range(p):
        prod = (prod * series.normalized(j + p, 1)) % p
    out["branch_product"] = (
        passing("branch-product-unit", product=prod)
        if prod == 1
        else failing("branch-product-unit", "not-one", witness={"product": prod})
    )
    y = 0
    for _ in range(p):
        y = f.evaluate(y, 2)
    if y % p == 0 and y % (p * p) != 0:
        out["return_valuation"] = passing("return-valuation", value=y)
    else:
        out["return_valuation"] = failing(
            "return-valuation", "not-exactly-p", witness={"value": y}
        )
    ok = all(v.passed for v in out.values())
    out["combined"] = CriterionVerdict(ok, "ergodic-p5", None if ok else "see-parts")
    return out


def p5_instance(
    p: int,
    phi: Sequence[int],
    bvec: Sequence[int],
    lift: Sequence[int] | None = None,
) -> P5Instance:
    """Build a function with prescribed level-1 data.

    phi fixes the reduction mod p, bvec the branch residues; lift adds
    p * z_m to each Mahler residue (only z_0..z_{p-1} can influence the
    outcome mod p^2).  The resulting finite Mahler sum is automatically in
    the differentiable class, and the built-in targets are re-extracted and
    cross-checked.
    """
    require_prime(p)
    if p < 5:
        raise InputError("p5_instance needs p >= 5")
    phi = _validate_phi(p, phi)
    bvec = _validate_bvec(p, bvec)
    if lift is None:
        lift = (0,) * (2 * p)
    lift = tuple(int(x) % p for x in lift)
    if len(lift) != 2 * p:
        raise InputError(f"lift must list {2 * p} values")
    e_base = p5_solve_base(p, phi)
    e = e_base + p5_solve_branch(p, e_base, bvec)
    terms = []
    for m in range(2 * p):
        scale = p ** floor_log(m, p)
        terms.append(scale * (e[m] + p * lift[m]))
    series = CoefficientSeries("mahler", p, 3, tuple(terms))
    f = PadicFunction.from_mahler(series)
    # re-extract the targets from the built function
    for i in range(p):
        if f.evaluate(i, 1) != phi[i]:
            raise InternalCheckError(f"instance missed phi at {i}")
    check = vdp_coefficients(f, count=2 * p)
    for i in range(p):
        if check.normalized(i + p, 1) != bvec[i]:
            raise InternalCheckError(f"instance missed branch residue at {i}")
    conditions = p5_conditions(f)
    return P5Instance(
        p, phi, bvec, lift, series, f, conditions, conditions["combined"].passed
    )


def _mahler_derivative_residue(terms: Sequence[int], x: int, p: int) -> int:
    """Formal derivative of a finite Mahler sum at an integer, mod p.

    The sum is converted to the power basis over exact rationals; the
    denominators are prime to p for the lengths used here (< 2p).
    """
    coeffs: list[Fraction] = [Fraction(0)] * (len(terms) + 1)
    binom_poly = [Fraction(1)]  # C(x, 0)
    for m, a in enumerate(terms):
        if m > 0:
            # C(x, m) = C(x, m-1) * (x - m + 1) / m
            new = [Fraction(0)] * (len(binom_poly) + 1)
            for i, coef in enumerate(binom_poly):
                new[i + 1] += coef / m
                new[i] += coef * Fraction(-(m - 1), m)
            binom_poly = new
        for i, coef in enumerate(binom_poly):
            coeffs[i] += a * coef
    value = Fraction(0)
    for i in range(1, len(coeffs)):
        value += i * coeffs[i] * x ** (i - 1)
    if value.denominator % p == 0:
        raise InternalCheckError("derivative residue has p in the denominator")
    return value.numerator * inverse_mod(value.denominator % p, p) % p


def p5_linear_form(
    p: int,
    phi: Sequence[int],
    bvec: Sequence[int],
    lift: Sequence[int],
) -> dict:
    """Predict the return valuation of a lifted instance without iterating.

    With g the unlifted instance and x_j its orbit of 0 mod p, the residue
    l = g^p(0)/p + z_0 / g'(0) + sum_{i=1}^{p-1} w_i g_1(x_i) mod p,
    w_i the tail products of derivative residues, equals f^p(0)/p mod p for
    the lifted f.  Ergodicity of f is then equivalent to l != 0 together
    with the two level-1 conditions.  Derivative residues are computed both
    from branch terms and from the formal derivative, and must agree.
    """
    base = p5_instance(p, phi, bvec)
    g0 = base.function
    lift = tuple(int(x) % p for x in lift)
    lifted = p5_instance(p, phi, bvec, lift)
    series = vdp_coefficients(g0, count=2 * p)

    orbit = [0]
    for _ in range(p - 1):
        orbit.append(g0.evaluate(orbit[-1], 1))
    deriv = []
    for x in orbit:
        via_branch = series.normalized((x % p) + p, 1)
        via_formal = _mahler_derivative_residue(list(g0.payload.terms), x, p)
        if via_branch != via_formal:
            raise InternalCheckError(
                f"derivative routes disagree at x={x}: {via_branch} vs {via_formal}"
            )
        deriv.append(via_branch)

    y = 0
    for _ in range(p):
        y = g0.evaluate(y, 2)
    if y % p != 0:
        raise InternalCheckError("base instance does not return to 0 mod p")
    first = (y // p) % p

    def g1(x: int) -> int:
        from .arith import binomial

        return sum(lift[m] * binomial(x, m) for m in range(p)) % p

    w = [1] * p
    for i in range(p - 2, 0, -1):
        w[i] = (w[i + 1] * deriv[i + 1]) % p
    total = (first + g1(0) * inverse_mod(deriv[0], p)) % p
    for i in range(1, p):
        total = (total + w[i] * g1(orbit[i])) % p

    yd = 0
    for _ in range(p):
        yd = lifted.function.evaluate(yd, 2)
    direct = (yd // p) % p if yd % p == 0 else None
    return {
        "formula": total,
        "direct": direct,
        "agree": direct is not None and total == direct,
        "instance": lifted,
    }


# power-basis route: solve for polynomial coefficients from reduced data


def solve_power_basis_system(
    p: int, Bvec: Sequence[int], Dvec: Sequence[int]
) -> tuple[int, ...]:
    """Coefficients alpha_0..alpha_{2p-1} mod p of a polynomial whose
    reduction mod (x^p - x, p) is sum B_j x^j and whose derivative takes the
    values D_k at k = 0..p-1."""
    require_prime(p)
    if p < 5:
        raise InputError("solve_power_basis_system needs p >= 5")
    Bvec = [int(x) % p for x in Bvec]
    Dvec = [int(x) % p for x in Dvec]
    if len(Bvec) != p or len(Dvec) != p:
        raise InputError("Bvec and Dvec must each list p values")
    n = 2 * p
    rows = []
    rhs = []
    row = [0] * n
    row[0] = 1
    rows.append(row)
    rhs.append(Bvec[0])
    row = [0] * n
    row[1] = 1
    row[p] = 1
    row[2 * p - 1] = 1
    rows.append(row)
    rhs.append(Bvec[1])
    for j in range(2, p):
        row = [0] * n
        row[j] = 1
        row[p + j - 1] = 1
        rows.append(row)
        rhs.append(Bvec[j])
    row = [0] * n
    row[1] = 1
    rows.append(row)
    rhs.append(Dvec[0])
    for k in range(1, p):
        row = [0] * n
        acc = 1
        for i in range(1, n):
            row[i] = (i * acc) % p
            acc = (acc * k) % p
        rows.append(row)
        rhs.append(Dvec[k])
    result = solve_fp(rows, rhs, p)
    if result.status != "unique":
        raise InternalCheckError(f"power-basis system is {result.status}")
    alphas = result.solution
    # independent validation: pointwise agreement with the reduced form and
    # with the prescribed derivative values
    for x in range(p):
        full = sum(a * pow(x, i, p) for i, a in enumerate(alphas)) % p
        red = sum(B * pow(x, j, p) for j, B in enumerate(Bvec)) % p
        if full != red:
            raise InternalCheckError(f"reduced polynomial mismatch at {x}")
        der = sum(i * a * pow(x, i - 1, p) for i, a in enumerate(alphas) if i) % p
        if der != Dvec[x]:
            raise InternalCheckError(f"derivative value mismatch at {x}")
    return alphas


def random_transitive_permutation(p: int, rng) -> tuple[int, ...]:
    """Uniform single p-cycle on 0..p-1, as a value list."""
    order = list(range(1, p))
    rng.shuffle(order)
    cycle = [0] + order
    phi = [0] * p
    for i in range(p):
        phi[cycle[i]] = cycle[(i + 1) % p]
    return tuple(phi)


def random_unit_product_one(p: int, length: int, rng) -> tuple[int, ...]:
    """Uniform vector of units mod p whose product is 1."""
    vec = [rng.randrange(1, p) for _ in range(length - 1)]
    prod = 1
    for v in vec:
        prod = prod * v % p
    vec.append(inverse_mod(prod, p))
    return tuple(vec)


def interpolate_reduced_p(p: int, values: Sequence[int]) -> tuple[int, ...]:
    """Coefficients mod p of the degree < p polynomial through the given
    values at x = 0..p-1 (Vandermonde solve)."""
    values = [int(v) % p for v in values]
    if len(values) != p:
        raise InputError(f"expected {p} values")
    rows = [[pow(x, j, p) for j in range(p)] for x in range(p)]
    result = solve_fp(rows, values, p)
    if result.status != "unique":
        raise InternalCheckError("Vandermonde system not invertible")
    return result.solution


def random_p5_instance(p: int, rng, with_lift: bool = True) -> P5Instance:
    phi = random_transitive_permutation(p, rng)
    bvec = random_unit_product_one(p, p, rng)
    lift = tuple(rng.randrange(p) for _ in range(2 * p)) if with_lift else None
    return p5_instance(p, phi, bvec, lift)


def random_power_basis_poly(p: int, rng) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Random degree < 2p polynomial hitting a transitive reduction and a
    unit-product derivative profile; returns (alphas, Bvec, Dvec)."""
    phi = random_transitive_permutation(p, rng)
    Bvec = interpolate_reduced_p(p, phi)
    Dvec = random_unit_product_one(p, p, rng)
    return solve_power_basis_system(p, Bvec, Dvec), Bvec, Dvec


# ---------------------------------------------------------------------
# counterexample catalog and dispatch
# ---------------------------------------------------------------------


def counterexample_catalog() -> tuple[dict, ...]:
    """Transitive-but-not-ergodic witnesses pinning the decision thresholds."""
    return (
        {
            "p": 2,
            "coeffs": (1, 3, 0, 2),
            "transitive_level": 2,
            "failing_level": 3,
            "orbit": (0, 1, 2, 3),
        },
        {
            "p": 3,
            "coeffs": (1, 4, 0, 4, 0, 2),
            "transitive_level": 2,
            "failing_level": 3,
            "orbit": (0, 1, 2, 6, 7, 5, 3, 4, 8),
        },
        {
            "p": 5,
            "coeffs": (1, 0, 0, 0, 0, 1),
            "transitive_level": 1,
            "failing_level": 2,
            "orbit": (0, 1, 2, 3, 4),
            "orbit_at_failing_level": (0, 1, 2, 8, 19),
        },
    )


def power_counterexample(p: int, depth: int = 2) -> PadicFunction:
    """x^p + 1: transitive mod p but never mod p^2."""
    require_prime(p)
    coeffs = [1] + [0] * (p - 1) + [1]
    return PadicFunction.from_polynomial(coeffs, p, depth)


def closed_form_ergodic(f: PadicFunction, assume_ud1: bool = False) -> ErgodicityDecision:
    """Coefficient-criterion ergodicity decision for the prime at hand.

    For p in {2, 3} both the Mahler-side and van der Put-side criteria are
    evaluated and must agree; for p >= 5 the three-condition criterion is
    used.  The input must be in the differentiable-mod-p class.
    """
    p = f.prime
    if not assume_ud1:
        report = ud1_check(f)
        if not report.verdict.passed:
            raise PreconditionError(
                "closed-form criteria need a differentiable-mod-p input",
                report.verdict,
            )
    evidence = {}
    if p == 2:
        if f.depth < 3:
            raise InputError("need depth >= 3 for the p=2 criteria")
        m = mahler_ergodic_p2(mahler_coefficients(f, count=4, k=3))
        v = vdp_ergodic_p2(vdp_coefficients(f, count=4, k=3))
        if m.passed != v.passed:
            raise InternalCheckError("p=2 Mahler and van der Put criteria disagree")
        evidence["mahler"] = m
        evidence["vdp"] = v
        if f.kind == "polynomial" and len(f.payload) <= 4:
            cubic = larin_transitive_mod8(f.payload)
            if cubic.passed != m.passed:
                raise InternalCheckError("cubic criterion disagrees at p=2")
            evidence["cubic"] = cubic
        ergodic = m.passed
    elif p == 3:
        if f.depth < 3:
            raise InputError("need depth >= 3 for the p=3 criteria")
        m = mahler_ergodic_p3(mahler_coefficients(f, count=9, k=3))
        v = vdp_ergodic_p3(vdp_coefficients(f, count=9, k=3))
        if m.passed != v.passed:
            raise InternalCheckError("p=3 Mahler and van der Put criteria disagree")
        evidence["mahler"] = m
        evidence["vdp"] = v
        if f.kind == "polynomial" and len(f.payload) <= 9:
            poly = deg8_minimal_p3(f.payload)
            if poly.passed != m.passed:
                raise InternalCheckError("degree-8 criterion disagrees at p=3")
            evidence["deg8"] = poly
        ergodic = m.passed
    else:
        conditions = p5_conditions(f)
        evidence.update({k: v for k, v in conditions.items() if k != "combined"})
        ergodic = conditions["combined"].passed
    return ErgodicityDecision(p, ergodic, "closed-form", None, evidence)
