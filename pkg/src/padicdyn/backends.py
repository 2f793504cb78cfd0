"""Array kernels for the heavy sweeps, in two interchangeable backends.

The numba backend JIT-compiles the hot loops; the numpy backend expresses
the same computations as vectorized array passes.  Selection is automatic
(numba when importable) and can be forced with PADIC_DYN_BACKEND=numba or
PADIC_DYN_BACKEND=numpy.  Every kernel computes exact modular integer
results; the two backends are interchangeable bit for bit.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import InputError, InternalCheckError

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


def current_backend() -> str:
    env = os.environ.get("PADIC_DYN_BACKEND")
    if env is None:
        return "numba" if HAVE_NUMBA else "numpy"
    if env not in ("numba", "numpy"):
        raise InputError(f"PADIC_DYN_BACKEND must be 'numba' or 'numpy', got {env!r}")
    if env == "numba" and not HAVE_NUMBA:
        raise InputError("PADIC_DYN_BACKEND=numba but numba is not importable")
    return env


def _check_modulus(modulus: int) -> None:
    # products (modulus-1)^2 and row sums must stay inside int64
    if modulus <= 0 or modulus > 1 << 31:
        raise InputError(f"modulus {modulus} outside the supported int64-safe range")


# -- polynomial value tables ------------------------------------------


@njit(cache=False)
def _poly_tables_numba(coeffs, npoints, modulus):  # pragma: no cover - jit
    count, ncoef = coeffs.shape
    out = np.empty((count, npoints), dtype=np.int64)
    for i in range(count):
        for x in range(npoints):
            acc = 0
            for d in range(ncoef - 1, -1, -1):
                acc = (acc * x + coeffs[i, d]) % modulus
            out[i, x] = acc
    return out


def _poly_tables_numpy(coeffs, npoints, modulus):
    xs = np.arange(npoints, dtype=np.int64)
    out = np.zeros((coeffs.shape[0], npoints), dtype=np.int64)
    for d in range(coeffs.shape[1] - 1, -1, -1):
        out = (out * xs + coeffs[:, d : d + 1]) % modulus
    return out


def poly_tables(coeffs, npoints: int, modulus: int) -> np.ndarray:
    """Values of each integer polynomial (rows of coeffs, constant first)
    at x = 0..npoints-1, mod modulus."""
    _check_modulus(modulus)
    coeffs = np.ascontiguousarray(
        np.asarray(coeffs, dtype=np.int64) % modulus
    )
    if current_backend() == "numba":
        return _poly_tables_numba(coeffs, npoints, modulus)
    return _poly_tables_numpy(coeffs, npoints, modulus)


# -- batched Mahler coefficients (difference tables) ------------------


@njit(cache=False)
def _mahler_batch_numba(values, modulus):  # pragma: no cover - jit
    count, n = values.shape
    out = np.empty((count, n), dtype=np.int64)
    work = values.copy()
    for step in range(n):
        for i in range(count):
            out[i, step] = work[i, step]
        for i in range(count):
            for j in range(n - 1, step, -1):
                work[i, j] = (work[i, j] - work[i, j - 1]) % modulus
    return out


def _mahler_batch_numpy(values, modulus):
    count, n = values.shape
    out = np.empty((count, n), dtype=np.int64)
    work = values.copy()
    for step in range(n):
        out[:, step] = work[:, step]
        if step < n - 1:
            work[:, step + 1 :] = (work[:, step + 1 :] - work[:, step:-1]) % modulus
    return out


def mahler_batch(values, modulus: int) -> np.ndarray:
    """Iterated forward differences along axis 1: column n holds the n-th
    Mahler coefficient of each row's value sequence, mod modulus."""
    _check_modulus(modulus)
    values = np.ascontiguousarray(np.asarray(values, dtype=np.int64) % modulus)
    if current_backend() == "numba":
        return _mahler_batch_numba(values, modulus)
    return _mahler_batch_numpy(values, modulus)


# -- transitivity scans ----------------------------------------------


@njit(cache=False)
def _transitive_scan_numba(tables):  # pragma: no cover - jit
    count, size = tables.shape
    out = np.zeros(count, dtype=np.uint8)
    for i in range(count):
        x = 0
        steps = 0
        for _ in range(size):
            x = tables[i, x]
            steps += 1
            if x == 0:
                break
        if steps == size and x == 0:
            out[i] = 1
    return out


def _transitive_scan_numpy(tables):
    count, size = tables.shape
    x = np.zeros(count, dtype=np.int64)
    first_return = np.zeros(count, dtype=np.int64)
    rows = np.arange(count)
    for step in range(1, size + 1):
        x = tables[rows, x]
        hit = (x == 0) & (first_return == 0)
        first_return[hit] = step
    return (first_return == size).astype(np.uint8)


def transitive_scan(tables) -> np.ndarray:
    """1 where a row, read as a self-map of 0..size-1, is a single cycle.

    A map is a full cycle exactly when the orbit of 0 first returns to 0
    after size steps, so no explicit permutation check is needed.
    """
    tables = np.ascontiguousarray(np.asarray(tables, dtype=np.int64))
    if current_backend() == "numba":
        return _transitive_scan_numba(tables)
    return _transitive_scan_numpy(tables)


def batch_transitive_polys(coeffs, p: int, k: int) -> np.ndarray:
    """Transitivity mod p^k for a batch of integer polynomials."""
    mod = p**k
    return transitive_scan(poly_tables(coeffs, mod, mod))


# -- exact value matrices for batched UD1 sweeps ----------------------


def binomial_matrix_mod(nrows: int, ncols: int, modulus: int) -> np.ndarray:
    """Pascal matrix C(x, n) mod modulus for x < nrows, n < ncols."""
    _check_modulus(modulus)
    out = np.zeros((nrows, ncols), dtype=np.int64)
    out[:, 0] = 1
    for x in range(1, nrows):
        upto = min(x + 1, ncols)
        out[x, 1:upto] = (out[x - 1, 1:upto] + out[x - 1, 0 : upto - 1]) % modulus
    return out


def mahler_value_matrix(terms, p: int, depth: int, npoints: int) -> np.ndarray:
    """Exact values of finite Mahler sums at x = 0..npoints-1, mod p^depth.

    terms is (count, length); row i holds the coefficients of one function.
    """
    mod = p**depth
    _check_modulus(mod)
    terms = np.asarray(terms, dtype=np.int64) % mod
    pascal = binomial_matrix_mod(npoints, terms.shape[1], mod)
    if terms.shape[1] * (mod - 1) * (mod - 1) > (1 << 62):
        raise InternalCheckError("mahler_value_matrix would overflow int64")
    return (pascal @ terms.T).T % mod


def ud1_table_scan(tables: np.ndarray, p: int, depth: int, s_max: int | None = None):
    """Vectorized differentiability-mod-p sweep over exact value tables.

    tables[:, x] = f(x) mod p^depth for x = 0..W-1 with
    W >= p^depth + p^(depth-1)*(p-1); returns a boolean array (True = passes).
    """
    if s_max is None:
        s_max = depth - 1
    size = p**depth
    need = size + p ** (depth - 1) * (p - 1)
    if tables.shape[1] < need:
        raise InputError(f"value window {tables.shape[1]} < required {need}")
    window = tables[:, :size]
    diff = (tables[:, p : p + size] - window) % (p**depth)
    ok = (diff % p == 0).all(axis=1)
    delta = (diff // p) % p
    for s in range(1, s_max + 1):
        step = p**s
        mod = p ** (s + 1)
        for h in range(1, p):
            lhs = tables[:, step * h : step * h + size] % mod
            rhs = (window + step * h * delta) % mod
            ok &= (lhs == rhs).all(axis=1)
    return ok


# -- exhaustive binomial congruence scan ------------------------------
#
# For odd p, s >= 2 and every n in [p^s, 2 p^s), k in [0, n]:
#     C(n, k) = sum_{j=0}^{p} C(p, j) * C(n - p^s, k - j p^(s-1))   mod p^2
# with out-of-range binomials read as zero.  Restricted to the index
# patterns k = beta + l p^(s-1) (+ p^s) this contains the three published
# digit-shift families; the full range is checked.


def _bipro_tables(p: int, s: int):
    q = p * p
    nmax = 2 * p**s + 1
    v = np.zeros(nmax, dtype=np.int64)
    u = np.zeros(nmax, dtype=np.int64)
    inv_u = np.zeros(nmax, dtype=np.int64)
    for t in range(1, nmax):
        tt = t
        vv = 0
        while tt % p == 0:
            tt //= p
            vv += 1
        v[t] = vv
        u[t] = tt % q
        inv_u[t] = pow(tt % q, -1, q)
    cp = np.array([0] * (p + 1), dtype=np.int64)
    from math import comb

    for j in range(p + 1):
        cp[j] = comb(p, j) % q
    return v, u, inv_u, cp


@njit(cache=False)
def _bipro_scan_numba(p, s, v, u, inv_u, cp, witness):  # pragma: no cover - jit
    q = p * p
    delta = p ** (s - 1)
    ps = p**s
    base = np.zeros((p, ps), dtype=np.int64)
    pairs = 0
    for alpha in range(delta):
        # base rows C(alpha + r*delta, k) mod p^2
        for r in range(p):
            m = alpha + r * delta
            val = 0
            unit = 1
            for k in range(m + 1):
                if k > 0:
                    num = m - k + 1
                    den = k
                    val += v[num] - v[den]
                    unit = (unit * u[num]) % q
                    unit = (unit * inv_u[den]) % q
                if val >= 2:
                    base[r, k] = 0
                elif val == 1:
                    base[r, k] = (unit * p) % q
                else:
                    base[r, k] = unit
            for k in range(m + 1, ps):
                base[r, k] = 0
        # target rows C(alpha + r*delta + p^s, k) checked against the taps
        for r in range(p):
            n = alpha + r * delta + ps
            val = 0
            unit = 1
            for k in range(n + 1):
                if k > 0:
                    num = n - k + 1
                    den = k
                    val += v[num] - v[den]
                    unit = (unit * u[num]) % q
                    unit = (unit * inv_u[den]) % q
                if val >= 2:
                    lhs = 0
                elif val == 1:
                    lhs = (unit * p) % q
                else:
                    lhs = unit
                rhs = 0
                for j in range(p + 1):
                    kk = k - j * delta
                    if 0 <= kk < ps:
                        rhs += cp[j] * base[r, kk]
                rhs %= q
                pairs += 1
                if lhs != rhs:
                    witness[0] = 1
                    witness[1] = n
                    witness[2] = k
                    witness[3] = lhs
                    witness[4] = rhs
                    return pairs
    return pairs


def _binomial_row_mod_q(n, v, u, inv_u, dlog, powtab, order, p, q):
    """C(n, k) mod q = p^2 for k = 0..n as one vectorized pass."""
    if n == 0:
        return np.ones(1, dtype=np.int64)
    ks = np.arange(1, n + 1)
    dv = np.cumsum(v[n - ks + 1] - v[ks])
    de = np.cumsum(dlog[u[n - ks + 1]] - dlog[u[ks]]) % order
    row = np.empty(n + 1, dtype=np.int64)
    row[0] = 1
    vals = powtab[de]
    vals = np.where(dv == 1, (vals * p) % q, vals)
    vals = np.where(dv >= 2, 0, vals)
    row[1:] = vals
    return row


def _bipro_scan_numpy(p, s, v, u, inv_u, cp, witness):
    q = p * p
    delta = p ** (s - 1)
    ps = p**s
    order = p * (p - 1)
    # discrete logs in the cyclic unit group mod p^2
    g = None
    for cand in range(2, q):
        if cand % p == 0:
            continue
        seen = 1
        x = cand % q
        k = 1
        while x != 1:
            x = (x * cand) % q
            k += 1
        if k == order:
            g = cand
            break
    dlog = np.zeros(q, dtype=np.int64)
    powtab = np.ones(order, dtype=np.int64)
    x = 1
    for e in range(order):
        powtab[e] = x
        dlog[x] = e
        x = (x * g) % q
    pairs = 0
    for alpha in range(delta):
        rows = {}
        for r in range(p):
            m = alpha + r * delta
            rows[r] = _binomial_row_mod_q(m, v, u, inv_u, dlog, powtab, order, p, q)
        for r in range(p):
            n = alpha + r * delta + ps
            lhs = _binomial_row_mod_q(n, v, u, inv_u, dlog, powtab, order, p, q)
            base = rows[r]
            rhs = np.zeros(n + 1, dtype=np.int64)
            for j in range(p + 1):
                off = j * delta
                if off > n:
                    break
                take = min(len(base), n + 1 - off)
                rhs[off : off + take] += cp[j] * base[:take]
            rhs %= q
            pairs += n + 1
            if not np.array_equal(lhs, rhs):
                k = int(np.nonzero(lhs != rhs)[0][0])
                witness[0] = 1
                witness[1] = n
                witness[2] = k
                witness[3] = int(lhs[k])
                witness[4] = int(rhs[k])
                return pairs
    return pairs


def bipro_scan(p: int, s: int):
    """Exhaustive digit-shift binomial congruence check mod p^2.

    Returns (pairs_checked, witness_or_None).
    """
    if p < 3 or p % 2 == 0:
        raise InputError("bipro_scan needs an odd prime")
    if s < 2:
        raise InputError("bipro_scan needs s >= 2")
    v, u, inv_u, cp = _bipro_tables(p, s)
    witness = np.zeros(5, dtype=np.int64)
    if current_backend() == "numba":
        pairs = _bipro_scan_numba(p, s, v, u, inv_u, cp, witness)
    else:
        pairs = _bipro_scan_numpy(p, s, v, u, inv_u, cp, witness)
    if witness[0]:
        return int(pairs), {
            "n": int(witness[1]),
            "k": int(witness[2]),
            "lhs": int(witness[3]),
            "rhs": int(witness[4]),
        }
    return int(pairs), None


def warmup() -> None:
    """Force JIT compilation of the numba kernels on tiny inputs."""
    if current_backend() != "numba":
        return
    c = np.array([[1, 1]], dtype=np.int64)
    _poly_tables_numba(c, 4, 4)
    _mahler_batch_numba(np.array([[0, 1, 2, 3]], dtype=np.int64), 4)
    _transitive_scan_numba(np.array([[1, 2, 3, 0]], dtype=np.int64))
    v, u, inv_u, cp = _bipro_tables(3, 2)
    _bipro_scan_numba(3, 2, v, u, inv_u, cp, np.zeros(5, dtype=np.int64))
