"""Finite-depth function space on Z_p and its two coefficient bases.

A function is carried in one of four interchangeable forms: integer
polynomial, value table mod p^depth, Mahler coefficient series, or van der
Put coefficient series.  Coefficient series live mod p^k; conversions
between the bases are exact modular identities and are cross-checked in
both directions.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Sequence

from .arith import (
    binomial,
    m_minus,
    require_nonnegative,
    require_prime,
    valuation,
)
from .errors import InputError, NormalizationError, PreconditionError
from .verdict import CriterionVerdict, failing, passing

_TABLE_LIMIT = 1 << 26

DEFAULT_MAX_DEPTH = 12


def max_depth() -> int:
    """Depth ceiling; override with the PADIC_DYN_MAX_DEPTH environment variable."""
    raw = os.environ.get("PADIC_DYN_MAX_DEPTH")
    if raw is None:
        return DEFAULT_MAX_DEPTH
    try:
        value = int(raw)
    except ValueError as exc:
        raise InputError(f"PADIC_DYN_MAX_DEPTH must be an integer, got {raw!r}") from exc
    if value < 1:
        raise InputError(f"PADIC_DYN_MAX_DEPTH must be >= 1, got {value}")
    return value


def _check_depth(depth: int) -> None:
    if not isinstance(depth, int) or depth < 1:
        raise InputError(f"depth must be a positive integer, got {depth!r}")
    if depth > max_depth():
        raise InputError(f"depth {depth} exceeds the configured ceiling {max_depth()}")


def _check_table_size(p: int, k: int) -> None:
    if p**k > _TABLE_LIMIT:
        raise InputError(f"table of size {p}^{k} exceeds the materialization limit")


def floor_log(m: int, p: int) -> int:
    """Exponent e(m) of the leading base-p digit of m, with e(0) = 0."""
    require_prime(p)
    require_nonnegative(m, "m")
    if m == 0:
        return 0
    e = 0
    while m >= p:
        m //= p
        e += 1
    return e


def chi(m: int, x: int, p: int) -> int:
    """Indicator of the ball: 1 iff x = m mod p^(e(m)+1)."""
    require_nonnegative(x, "x")
    return 1 if (x - m) % p ** (floor_log(m, p) + 1) == 0 else 0


@dataclass(frozen=True)
class CoefficientSeries:
    """A finite run of basis coefficients known mod p^exponent.

    kind is "mahler" (terms[n] = a_n) or "vdp" (terms[m] = B_m).  Terms are
    stored canonically in [0, p^exponent).  Absent terms mean exact zero: a
    series of length L denotes the finite sum over indices < L.
    """

    kind: str
    prime: int
    exponent: int
    terms: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ("mahler", "vdp"):
            raise InputError(f"unknown series kind {self.kind!r}")
        require_prime(self.prime)
        if self.exponent < 1:
            raise InputError(f"series exponent must be >= 1, got {self.exponent}")
        if len(self.terms) < 1:
            raise InputError("series needs at least one term")
        mod = self.prime**self.exponent
        object.__setattr__(self, "terms", tuple(t % mod for t in self.terms))

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def modulus(self) -> int:
        return self.prime**self.exponent

    def term(self, i: int) -> int:
        return self.terms[i]

    def normalized(self, i: int, exponent: int | None = None) -> int:
        """Term i divided by p^e(i), as a residue mod p^(self.exponent - e(i)).

        Raises NormalizationError when the stored term is not divisible by
        p^e(i), and InputError when more precision is requested than the
        series carries.
        """
        e = floor_log(i, self.prime)
        avail = self.exponent - e
        if avail < 1:
            raise InputError(
                f"term {i} has no residual precision at exponent {self.exponent}"
            )
        if exponent is None:
            exponent = avail
        elif exponent > avail:
            raise InputError(
                f"requested precision p^{exponent} for term {i}, only p^{avail} known"
            )
        t = self.terms[i]
        scale = self.prime**e
        if t % scale != 0:
            raise NormalizationError(
                f"{self.kind} term {i} = {t} is not divisible by {self.prime}^{e}"
            )
        return (t // scale) % self.prime**exponent

    def normalized_terms(self, count: int | None = None) -> list[int]:
        if count is None:
            count = len(self.terms)
        return [self.normalized(i) for i in range(count)]

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "p": self.prime,
            "k": self.exponent,
            "length": len(self.terms),
            "terms": [str(t) for t in self.terms],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "CoefficientSeries":
        try:
            kind = data["kind"]
            p = int(data["p"])
            k = int(data["k"])
            terms = tuple(int(t) for t in data["terms"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed series object: {exc}") from exc
        if "length" in data and int(data["length"]) != len(terms):
            raise InputError("series length field disagrees with terms")
        return cls(kind, p, k, terms)


class PadicFunction:
    """A function on Z_p pinned down to a finite depth.

    Polynomial and Mahler forms evaluate exactly at any nonnegative integer;
    table form folds the argument mod p^depth; van der Put form is a finite
    sum of locally constant indicators and needs no folding.
    """

    def __init__(self, kind, prime, depth, payload):
        require_prime(prime)
        _check_depth(depth)
        self.kind = kind
        self.prime = prime
        self.depth = depth
        self.payload = payload
        self._tables: dict[int, list[int]] = {}

    # -- constructors -------------------------------------------------

    @classmethod
    def from_polynomial(
        cls, coeffs: Sequence[int], prime: int, depth: int
    ) -> "PadicFunction":
        coeffs = tuple(int(c) for c in coeffs)
        if not coeffs:
            coeffs = (0,)
        return cls("polynomial", prime, depth, coeffs)

    @classmethod
    def from_table(
        cls, values: Sequence[int], prime: int, depth: int
    ) -> "PadicFunction":
        require_prime(prime)
        _check_depth(depth)
        size = prime**depth
        values = tuple(int(v) for v in values)
        if len(values) != size:
            raise InputError(
                f"table for depth {depth} needs {size} entries, got {len(values)}"
            )
        if any(not 0 <= v < size for v in values):
            raise InputError("table entries must be canonical residues mod p^depth")
        return cls("table", prime, depth, values)

    @classmethod
    def from_mahler(
        cls, series: CoefficientSeries, depth: int | None = None
    ) -> "PadicFunction":
        return cls._from_series(series, "mahler", depth)

    @classmethod
    def from_vdp(
        cls, series: CoefficientSeries, depth: int | None = None
    ) -> "PadicFunction":
        return cls._from_series(series, "vdp", depth)

    @classmethod
    def _from_series(cls, series, kind, depth):
        if not isinstance(series, CoefficientSeries) or series.kind != kind:
            raise InputError(f"expected a {kind} CoefficientSeries")
        if depth is None:
            depth = series.exponent
        if depth > series.exponent:
            raise InputError(
                f"depth {depth} exceeds series precision p^{series.exponent}"
            )
        return cls(kind, series.prime, depth, series)

    # -- evaluation ---------------------------------------------------

    def evaluate(self, x: int, k: int | None = None) -> int:
        require_nonnegative(x, "x")
        if k is None:
            k = self.depth
        if not 1 <= k <= self.depth:
            raise InputError(f"evaluation depth {k} outside 1..{self.depth}")
        mod = self.prime**k
        if self.kind == "polynomial":
            acc = 0
            for c in reversed(self.payload):
                acc = acc * x + c
            return acc % mod
        if self.kind == "table":
            return self.payload[x % self.prime**self.depth] % mod
        if self.kind == "mahler":
            total = 0
            binom = 1
            for n, a in enumerate(self.payload.terms):
                if n > 0:
                    if x < n:
                        break
                    binom = binom * (x - n + 1) // n
                total += a * binom
            return total % mod
        # vdp: walk the digit chain m_j = x mod p^(j+1), skipping zero digits
        terms = self.payload.terms
        p = self.prime
        total = terms[x % p] if x % p < len(terms) else 0
        power = p
        rest = x // p
        while rest:
            digit = rest % p
            power *= p
            if digit:
                m = x % power
                if m < len(terms):
                    total += terms[m]
            rest //= p
        return total % mod

    def value_table(self, k: int | None = None) -> list[int]:
        """Values at 0..p^depth-1, reduced mod p^k."""
        if k is None:
            k = self.depth
        if not 1 <= k <= self.depth:
            raise InputError(f"table depth {k} outside 1..{self.depth}")
        _check_table_size(self.prime, self.depth)
        if k not in self._tables:
            size = self.prime**self.depth
            self._tables[k] = [self.evaluate(x, k) for x in range(size)]
        return list(self._tables[k])

    # -- reductions and conversions -----------------------------------

    def reduce_map(self, k: int, check: bool = True) -> list[int]:
        """The induced map on Z/p^k, verified to be well defined.

        For non-polynomial forms every point of the depth window is checked
        against its representative mod p^k; a mismatch means the input is
        not 1-Lipschitz down to level k and raises PreconditionError.
        """
        if not 1 <= k <= self.depth:
            raise InputError(f"reduction depth {k} outside 1..{self.depth}")
        _check_table_size(self.prime, k)
        mod = self.prime**k
        if self.kind == "polynomial":
            return [self.evaluate(x, k) for x in range(mod)]
        values = self.value_table(k)
        table = values[:mod]
        if check:
            for x in range(mod, len(values)):
                if values[x] != table[x % mod]:
                    verdict = failing(
                        "reduction-well-defined",
                        "consistency",
                        witness={"x": x, "x_mod": x % mod,
                                 "fx": values[x], "fx_mod": table[x % mod]},
                        depth=k,
                    )
                    raise PreconditionError(
                        f"map is not well defined mod {self.prime}^{k}", verdict
                    )
        return table

    def reduce(self, k: int) -> "PadicFunction":
        """Table-backed copy of this function at a shallower depth."""
        return PadicFunction.from_table(self.reduce_map(k), self.prime, k)

    def mahler_series(self, count: int | None = None, k: int | None = None):
        return mahler_coefficients(self, count, k)

    def vdp_series(self, count: int | None = None, k: int | None = None):
        return vdp_coefficients(self, count, k)

    def __repr__(self):
        return f"PadicFunction({self.kind}, p={self.prime}, depth={self.depth})"


def _coefficient_window(f: PadicFunction, count, k):
    if k is None:
        k = f.depth
    if not 1 <= k <= f.depth:
        raise InputError(f"coefficient depth {k} outside 1..{f.depth}")
    if count is None:
        count = min(f.prime**f.depth, _TABLE_LIMIT)
    if count < 1:
        raise InputError("count must be >= 1")
    if f.kind != "polynomial" and count > f.prime**f.depth:
        raise InputError(
            f"count {count} exceeds the depth window {f.prime}^{f.depth}"
        )
    return count, k


def vdp_coefficients(
    f: PadicFunction, count: int | None = None, k: int | None = None
) -> CoefficientSeries:
    """B_m: f(m) for m < p, else f(m) - f(m with leading digit removed)."""
    count, k = _coefficient_window(f, count, k)
    p = f.prime
    out = []
    for m in range(count):
        if m < p:
            out.append(f.evaluate(m, k))
        else:
            out.append((f.evaluate(m, k) - f.evaluate(m_minus(m, p), k)))
    return CoefficientSeries("vdp", p, k, tuple(out))


def mahler_coefficients(
    f: PadicFunction, count: int | None = None, k: int | None = None
) -> CoefficientSeries:
    """a_n by iterated forward differences of the value sequence at 0,1,2,..."""
    count, k = _coefficient_window(f, count, k)
    mod = f.prime**k
    diffs = [f.evaluate(x, k) for x in range(count)]
    out = []
    for n in range(count):
        out.append(diffs[0])
        diffs = [(diffs[i + 1] - diffs[i]) % mod for i in range(len(diffs) - 1)]
    return CoefficientSeries("mahler", f.prime, k, tuple(out))


def indicator_mahler_coefficient(n: int, m: int, p: int) -> int:
    """Exact Mahler coefficient a_n(m) of the indicator chi(m, .).

    a_n(m) = sum over alpha >= 0 of (-1)^(n - m - p^M alpha) C(n, m + p^M alpha)
    with M = e(m) + 1.
    """
    require_prime(p)
    require_nonnegative(n, "n")
    require_nonnegative(m, "m")
    step = p ** (floor_log(m, p) + 1)
    total = 0
    j = m
    while j <= n:
        total += (-1) ** (n - j) * binomial(n, j)
        j += step
    return total


def binomial_vdp_coefficient(m: int, n: int, p: int) -> int:
    """Exact van der Put coefficient A_m(n) of the binomial function C(., n)."""
    require_prime(p)
    require_nonnegative(m, "m")
    require_nonnegative(n, "n")
    if m < p:
        return binomial(m, n)
    return binomial(m, n) - binomial(m_minus(m, p), n)


def vdp_to_mahler(
    series: CoefficientSeries, count: int | None = None
) -> CoefficientSeries:
    """Mahler coefficients of a finite van der Put sum, mod p^k."""
    if series.kind != "vdp":
        raise InputError("vdp_to_mahler expects a vdp series")
    if count is None:
        count = len(series)
    mod = series.modulus
    out = []
    for n in range(count):
        acc = 0
        for m in range(min(n, len(series) - 1) + 1):
            c = indicator_mahler_coefficient(n, m, series.prime)
            if c:
                acc += c * series.terms[m]
        out.append(acc % mod)
    return CoefficientSeries("mahler", series.prime, series.exponent, tuple(out))


def mahler_to_vdp(
    series: CoefficientSeries, count: int | None = None
) -> CoefficientSeries:
    """van der Put coefficients of a finite Mahler sum, mod p^k."""
    if series.kind != "mahler":
        raise InputError("mahler_to_vdp expects a mahler series")
    if count is None:
        count = len(series)
    mod = series.modulus
    out = []
    for m in range(count):
        acc = 0
        for n in range(min(m, len(series) - 1) + 1):
            c = binomial_vdp_coefficient(m, n, series.prime)
            if c:
                acc += c * series.terms[n]
        out.append(acc % mod)
    return CoefficientSeries("vdp", series.prime, series.exponent, tuple(out))


def lipschitz_check(
    obj, count: int | None = None, k: int | None = None, basis: str = "vdp"
) -> CriterionVerdict:
    """1-Lipschitz test through coefficient valuations.

    In either basis the condition is v_p(term_i) >= e(i); at precision p^k a
    term with e(i) >= k carries no information and is only required to
    vanish mod p^k.
    """
    if isinstance(obj, PadicFunction):
        series = (
            vdp_coefficients(obj, count, k)
            if basis == "vdp"
            else mahler_coefficients(obj, count, k)
        )
    elif isinstance(obj, CoefficientSeries):
        series = obj
    else:
        raise InputError("lipschitz_check expects a function or a series")
    p = series.prime
    name = f"lipschitz-{series.kind}"
    for i, t in enumerate(series.terms):
        need = min(floor_log(i, p), series.exponent)
        if t % p**need != 0:
            return failing(
                name,
                "coefficient-valuation",
                witness={"index": i, "term": t, "required_valuation": need},
                depth=series.exponent,
            )
    return passing(name, depth=series.exponent, checked_terms=len(series))


def lipschitz_direct_check(f: PadicFunction, k: int | None = None) -> CriterionVerdict:
    """Definition-level test: f(x + p^s) = f(x) mod p^s for all s < k in the window."""
    if k is None:
        k = f.depth
    if not 1 <= k <= f.depth:
        raise InputError(f"depth {k} outside 1..{f.depth}")
    _check_table_size(f.prime, k)
    values = [f.evaluate(x, k) for x in range(f.prime**k)]
    size = len(values)
    for s in range(1, k):
        step = f.prime**s
        mod = step
        for x in range(size - step):
            if (values[x + step] - values[x]) % mod != 0:
                return failing(
                    "lipschitz-direct",
                    "ball-contraction",
                    witness={"x": x, "s": s,
                             "fx": values[x], "fx_shift": values[x + step]},
                    depth=k,
                )
    return passing("lipschitz-direct", depth=k, points=size)
