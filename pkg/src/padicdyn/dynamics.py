"""Finite-level dynamics: cycle structure, measure preservation, ergodicity.

Measure preservation at depth means the reduced map is a bijection of
Z/p^s for every level s; ergodicity means it is a single cycle at every
level.  Both are decided here through coefficient criteria, with the
brute-force reduced-map walk available as the oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .arith import binomial
from .errors import InputError, InternalCheckError, PreconditionError
from .funcspace import CoefficientSeries, PadicFunction, vdp_coefficients, mahler_coefficients
from .verdict import CriterionVerdict, failing, passing
from .analysis import ud1_check


@dataclass(frozen=True)
class CycleReport:
    """Cycle decomposition of the reduced map on Z/p^exponent."""

    prime: int
    exponent: int
    is_permutation: bool
    transitive: bool
    cycles: tuple[tuple[int, ...], ...]
    collision: dict[str, int] | None = None

    @property
    def size(self) -> int:
        return self.prime**self.exponent

    def to_json_dict(self) -> dict:
        out = {
            "p": self.prime,
            "exponent": self.exponent,
            "permutation": self.is_permutation,
            "transitive": self.transitive,
            "cycle_count": len(self.cycles),
            "cycles": [[str(x) for x in c] for c in self.cycles],
        }
        if self.collision:
            out["collision"] = {k: str(v) for k, v in self.collision.items()}
        return out


def cycle_structure(f: PadicFunction, k: int) -> CycleReport:
    table = f.reduce_map(k)
    size = len(table)
    seen = [False] * size
    image_seen = [False] * size
    collision = None
    for x, y in enumerate(table):
        if image_seen[y]:
            prev = next(i for i in range(x) if table[i] == y)
            collision = {"image": y, "first": prev, "second": x}
            break
        image_seen[y] = True
    is_perm = collision is None
    cycles = []
    if is_perm:
        for start in range(size):
            if seen[start]:
                continue
            cycle = []
            x = start
            while not seen[x]:
                seen[x] = True
                cycle.append(x)
                x = table[x]
            cycles.append(tuple(cycle))
    return CycleReport(
        f.prime, k, is_perm, is_perm and len(cycles) == 1, tuple(cycles), collision
    )


def orbit_of(f: PadicFunction, k: int, start: int = 0) -> tuple[int, ...]:
    """Forward orbit of a point mod p^k, up to (and excluding) the first repeat."""
    mod = f.prime**k
    if not 1 <= k <= f.depth:
        raise InputError(f"level {k} outside 1..{f.depth}")
    seen = set()
    orbit = []
    x = start % mod
    while x not in seen:
        seen.add(x)
        orbit.append(x)
        x = f.evaluate(x, k)
    return tuple(orbit)


def bijective_mod(f: PadicFunction, k: int) -> CriterionVerdict:
    report = cycle_structure(f, k)
    if report.is_permutation:
        return passing("bijective-mod", depth=k)
    return failing("bijective-mod", "collision", witness=report.collision, depth=k)


def transitive_mod(f: PadicFunction, k: int) -> CriterionVerdict:
    report = cycle_structure(f, k)
    if report.transitive:
        return passing("transitive-mod", depth=k, cycle_length=report.size)
    if not report.is_permutation:
        return failing("transitive-mod", "not-bijective", witness=report.collision, depth=k)
    return failing(
        "transitive-mod",
        "multiple-cycles",
        witness={"cycle_count": len(report.cycles),
                 "orbit_of_zero_length": len(report.cycles[0])},
        depth=k,
    )


def ergodic_oracle(f: PadicFunction, k_max: int | None = None) -> CriterionVerdict:
    """Transitivity at every level 1..k_max; the brute-force reference."""
    if k_max is None:
        k_max = f.depth
    if not 1 <= k_max <= f.depth:
        raise InputError(f"k_max {k_max} outside 1..{f.depth}")
    for k in range(1, k_max + 1):
        verdict = transitive_mod(f, k)
        if not verdict:
            return failing(
                "ergodic-oracle", "transitivity", witness={"level": k}, depth=k_max,
                inner=verdict.to_json_dict(),
            )
    return passing("ergodic-oracle", depth=k_max)


# -- measure preservation ---------------------------------------------


def measure_preserving_vdp(
    series: CoefficientSeries, s_max: int | None = None
) -> CriterionVerdict:
    """Bijectivity at all levels from normalized van der Put terms.

    Level 0: the residues b_0..b_{p-1} must be a complete system mod p.
    Level s >= 1: for each base k < p^s the residues b_{k + l p^s} over
    l = 1..p-1 must be distinct and nonzero mod p.
    """
    if series.kind != "vdp":
        raise InputError("measure_preserving_vdp expects a vdp series")
    p = series.prime
    name = "measure-preserving-vdp"
    if len(series) < p:
        raise InputError("series too short for the level-0 residue test")
    base = sorted(series.normalized(m, 1) for m in range(p))
    if base != list(range(p)):
        return failing(
            name,
            "complete-residues",
            witness={"residues": [series.normalized(m, 1) for m in range(p)]},
            depth=series.exponent,
        )
    limit = 0
    while p ** (limit + 2) <= len(series) and limit + 2 <= series.exponent:
        limit += 1
    if s_max is None:
        s_max = limit
    elif s_max > limit:
        raise InputError(f"s_max {s_max} exceeds what the series supports ({limit})")
    for s in range(1, s_max + 1):
        step = p**s
        for k in range(step):
            residues = [series.normalized(k + ell * step, 1) for ell in range(1, p)]
            if 0 in residues or len(set(residues)) != p - 1:
                return failing(
                    name,
                    "branch-residues",
                    witness={"s": s, "k": k, "residues": residues},
                    depth=series.exponent,
                )
    return passing(name, depth=series.exponent, s_max=s_max)


def _require_ud1(f: PadicFunction, name: str, bundle: bool):
    report = ud1_check(f)
    if report.verdict.passed:
        return None
    if bundle:
        return failing(
            name, "ud1-precondition", witness=report.verdict.witness, depth=f.depth
        )
    raise PreconditionError(f"{name} requires a UD1 input", report.verdict)


def measure_preserving_ud_p2(
    f: PadicFunction, bundle_ud1: bool = False
) -> CriterionVerdict:
    """p = 2 criterion for differentiable-mod-2 maps: three parity conditions
    on normalized van der Put terms: b_0 + b_1 odd, b_2 odd, b_3 odd."""
    if f.prime != 2:
        raise InputError("measure_preserving_ud_p2 is specific to p = 2")
    if f.depth < 2:
        raise InputError("need depth >= 2")
    name = "measure-preserving-ud-p2"
    bad = _require_ud1(f, name, bundle_ud1)
    if bad is not None:
        return bad
    series = vdp_coefficients(f, count=4)
    b = [series.normalized(m) for m in range(4)]
    checks = [
        ("b0+b1", (b[0] + b[1]) % 2, 1),
        ("b2", b[2] % 2, 1),
        ("b3", b[3] % 2, 1),
    ]
    for label, got, want in checks:
        if got != want:
            return failing(
                name, label, witness={"value": got, "expected": want}, depth=f.depth
            )
    return passing(name, depth=f.depth)


def measure_preserving_ud_p2_mahler(
    f: PadicFunction, bundle_ud1: bool = False
) -> CriterionVerdict:
    """Mahler-side equivalent of the p = 2 criterion:
    a_1 = 1 mod 2, a_2 = 0 mod 4, a_3 = 0 mod 4."""
    if f.prime != 2:
        raise InputError("measure_preserving_ud_p2_mahler is specific to p = 2")
    if f.depth < 2:
        raise InputError("need depth >= 2")
    name = "measure-preserving-ud-p2-mahler"
    bad = _require_ud1(f, name, bundle_ud1)
    if bad is not None:
        return bad
    series = mahler_coefficients(f, count=4)
    a = list(series.terms)
    checks = [
        ("a1-odd", a[1] % 2, 1),
        ("a2-mod4", a[2] % 4, 0),
        ("a3-mod4", a[3] % 4, 0),
    ]
    for label, got, want in checks:
        if got != want:
            return failing(
                name, label, witness={"value": got, "expected": want}, depth=f.depth
            )
    return passing(name, depth=f.depth)


def lambda_coefficient(i: int, n: int, p: int) -> int:
    """(C(i+p, n) - C(i, n)) / p, exactly; integrality is a Lucas consequence."""
    num = binomial(i + p, n) - binomial(i, n)
    if num % p != 0:
        raise InternalCheckError(
            f"lambda coefficient not integral at i={i}, n={n}, p={p}"
        )
    return num // p


def measure_preserving_ud_odd(
    f: PadicFunction, bundle_ud1: bool = False
) -> CriterionVerdict:
    """Odd-p criterion for differentiable-mod-p maps.

    (i) f(0..p-1) is a complete residue system mod p; (ii) every normalized
    branch term b_{i+p} is a unit mod p.  The same residues are recomputed
    from Mahler terms through the lambda form and must agree.
    """
    p = f.prime
    if p == 2:
        raise InputError("measure_preserving_ud_odd needs an odd prime")
    if f.depth < 2:
        raise InputError("need depth >= 2")
    name = "measure-preserving-ud-odd"
    bad = _require_ud1(f, name, bundle_ud1)
    if bad is not None:
        return bad
    values = sorted(f.evaluate(i, 1) for i in range(p))
    if values != list(range(p)):
        return failing(
            name,
            "complete-residues",
            witness={"residues": [f.evaluate(i, 1) for i in range(p)]},
            depth=f.depth,
        )
    vdp = vdp_coefficients(f, count=2 * p)
    mahler = mahler_coefficients(f, count=2 * p)
    c = [mahler.terms[n] for n in range(p)]
    cp = [mahler.normalized(n + p, 1) for n in range(p)]
    for i in range(p):
        b = vdp.normalized(i + p, 1)
        lam = sum(lambda_coefficient(i, n, p) * c[n] for n in range(p))
        lam += sum(binomial(i, n) * cp[n] for n in range(i + 1))
        if lam % p != b:
            raise InternalCheckError(
                f"lambda form disagrees with branch term at i={i}: {lam % p} vs {b}"
            )
        if b == 0:
            return failing(
                name, "branch-unit", witness={"i": i, "b": b}, depth=f.depth
            )
    return passing(name, depth=f.depth)


# -- ergodicity -------------------------------------------------------


def product_condition_residue(f: PadicFunction, s: int) -> int:
    """Product of normalized branch terms over one level, mod p."""
    p = f.prime
    if not 1 <= s <= f.depth - 1:
        raise InputError(f"level {s} outside 1..{f.depth - 1}")
    series = vdp_coefficients(f, count=2 * p**s)
    acc = 1
    for j in range(p**s):
        acc = (acc * series.normalized(j + p**s, 1)) % p
    return acc


def ergodic_conditions(f: PadicFunction, s_max: int | None = None) -> dict[str, Any]:
    """The four-part finite-level ergodicity bundle for 1-Lipschitz maps.

    (1) transitivity mod p; (2) measure preservation; (3) the orbit of 0
    escapes: f^(p^s)(0) != 0 mod p^(s+1); (4) the level product of
    normalized branch terms is 1 mod p.  (2) is implied by (1) and (4) but
    is still evaluated and reported.
    """
    p = f.prime
    if s_max is None:
        s_max = f.depth - 1
    if not 1 <= s_max <= f.depth - 1:
        raise InputError(f"s_max {s_max} outside 1..{f.depth - 1}")
    out: dict[str, Any] = {}
    out["transitive_mod_p"] = transitive_mod(f, 1)
    series = vdp_coefficients(f, count=2 * p**s_max)
    mp_series = vdp_coefficients(f, count=p ** (s_max + 1))
    out["measure_preserving"] = measure_preserving_vdp(mp_series, s_max=s_max)

    orbit_residues = []
    orbit_verdict = None
    for s in range(1, s_max + 1):
        mod = p ** (s + 1)
        y = 0
        for _ in range(p**s):
            y = f.evaluate(y, s + 1)
        orbit_residues.append(y % mod)
        if orbit_verdict is None and y % mod == 0:
            orbit_verdict = failing(
                "orbit-escape", "returns-to-zero", witness={"s": s}, depth=s_max
            )
    if orbit_verdict is None:
        orbit_verdict = passing("orbit-escape", depth=s_max,
                                residues=orbit_residues)
    else:
        orbit_verdict = CriterionVerdict(
            False, "orbit-escape", orbit_verdict.condition, orbit_verdict.witness,
            s_max, {"residues": orbit_residues},
        )
    out["orbit"] = orbit_verdict

    products = []
    product_verdict = None
    for s in range(1, s_max + 1):
        step = p**s
        acc = 1
        for j in range(step):
            acc = (acc * series.normalized(j + step, 1)) % p
        products.append(acc)
        if product_verdict is None and acc != 1:
            product_verdict = failing(
                "branch-product", "not-unit", witness={"s": s, "product": acc},
                depth=s_max,
            )
    if product_verdict is None:
        product_verdict = passing("branch-product", depth=s_max, products=products)
    else:
        product_verdict = CriterionVerdict(
            False, "branch-product", product_verdict.condition,
            product_verdict.witness, s_max, {"products": products},
        )
    out["product"] = product_verdict

    combined = all(
        out[key].passed
        for key in ("transitive_mod_p", "measure_preserving", "orbit", "product")
    )
    out["combined"] = CriterionVerdict(
        combined,
        "ergodic-conditions",
        None if combined else "see-parts",
        depth=s_max,
        details={"measure_preservation_redundant": "implied by transitivity mod p "
                 "together with the branch product condition"},
    )
    return out


def transitivity_threshold(p: int) -> int:
    """Depth at which transitivity already decides ergodicity."""
    return 3 if p <= 3 else 2


@dataclass(frozen=True)
class ErgodicityDecision:
    prime: int
    ergodic: bool
    method: str
    mu: int | None
    evidence: dict[str, Any]

    def __bool__(self) -> bool:
        return self.ergodic

    def to_json_dict(self) -> dict:
        out = {
            "p": self.prime,
            "ergodic": self.ergodic,
            "method": self.method,
        }
        if self.mu is not None:
            out["mu"] = self.mu
        out["evidence"] = {
            k: (v.to_json_dict() if hasattr(v, "to_json_dict") else v)
            for k, v in self.evidence.items()
        }
        return out


def decide_ergodicity(
    f: PadicFunction, mu_override: int | None = None
) -> ErgodicityDecision:
    """Decide ergodicity by transitivity at the threshold depth."""
    mu = mu_override if mu_override is not None else transitivity_threshold(f.prime)
    if mu < 1:
        raise InputError("threshold must be >= 1")
    if f.depth < mu:
        raise InputError(
            f"depth {f.depth} below the deciding threshold {mu} for p={f.prime}"
        )
    verdict = transitive_mod(f, mu)
    return ErgodicityDecision(
        f.prime, verdict.passed, "threshold", mu, {"transitive": verdict}
    )
