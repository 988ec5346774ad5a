"""Exact non-negative integer convolution via number-theoretic transforms.

Each product is computed modulo as many NTT-friendly primes as the
coefficient bound requires and rebuilt with Garner's mixed-radix CRT, so
the result is exact and never wraps.
"""
from __future__ import annotations

import numpy as np

# (prime, primitive root, max power-of-two transform length)
PRIMES = (
    (2013265921, 31, 2**27),
    (469762049, 3, 2**26),
    (754974721, 11, 2**24),
    (998244353, 3, 2**23),
)

_U64 = np.uint64
_twiddle_cache: dict = {}


def _bitrev(size: int) -> np.ndarray:
    bits = size.bit_length() - 1
    idx = np.arange(size, dtype=np.int64)
    rev = np.zeros(size, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def _twiddles(p: int, g: int, size: int, inverse: bool):
    key = (p, size, inverse)
    if key not in _twiddle_cache:
        w = pow(g, (p - 1) // size, p)
        if inverse:
            w = pow(w, p - 2, p)
        stages = []
        h = 1
        while h < size:
            step = pow(w, size // (2 * h), p)
            tw = np.empty(h, dtype=_U64)
            cur = 1
            for j in range(h):
                tw[j] = cur
                cur = cur * step % p
            stages.append(tw)
            h *= 2
        _twiddle_cache[key] = (_bitrev(size), stages)
    return _twiddle_cache[key]


def ntt(x: np.ndarray, p: int, g: int, inverse: bool = False) -> np.ndarray:
    """Iterative radix-2 transform of a uint64 array (length a power of two)."""
    size = len(x)
    rev, stages = _twiddles(p, g, size, inverse)
    a = x[rev].astype(_U64) % _U64(p)
    pp = _U64(p)
    h = 1
    for tw in stages:
        blk = a.reshape(-1, 2 * h)
        u = blk[:, :h]
        v = blk[:, h:] * tw % pp
        a = np.concatenate(((u + v) % pp, (u + pp - v) % pp), axis=1).reshape(-1)
        h *= 2
    if inverse:
        a = a * _U64(pow(size, p - 2, p)) % pp
    return a


def primes_for_bound(bound: int):
    """Smallest prefix of PRIMES whose product exceeds ``bound``."""
    chosen, prod = [], 1
    for prime in PRIMES:
        chosen.append(prime)
        prod *= prime[0]
        if prod > bound:
            return chosen
    raise OverflowError(f"coefficient bound {bound} exceeds the CRT range")


def _garner(residues, primes, wide: bool):
    """Rebuild non-negative integers from residues modulo pairwise coprime primes."""
    digits = []
    for i, (r, p) in enumerate(zip(residues, primes)):
        pu = _U64(p)
        x = r.copy()
        for j, d in enumerate(digits):
            pj = primes[j]
            inv = _U64(pow(pj, p - 2, p))
            x = (x + pu - d % pu) % pu * inv % pu
        digits.append(x)
    if wide:
        out = np.zeros(len(residues[0]), dtype=object)
        radix = 1
        for d, p in zip(digits, primes):
            out = out + d.astype(object) * radix
            radix *= p
        return out
    out = np.zeros(len(residues[0]), dtype=np.int64)
    radix = 1
    for d, p in zip(digits, primes):
        out += d.astype(np.int64) * np.int64(radix)
        radix *= p
    return out


def _total_and_max(x):
    if len(x) == 0:
        return 0, 0
    if x.dtype == object:
        return int(sum(x)), int(max(x))
    mx = int(x.max())
    if mx * len(x) < 2**62:
        return int(x.sum()), mx
    return int(sum(int(v) for v in x)), mx


def _residues(x, p):
    if x.dtype == object:
        return np.array([int(v) % p for v in x], dtype=_U64)
    return x.astype(_U64) % _U64(p)


def coefficient_bound(x, y) -> int:
    sx, mx = _total_and_max(x)
    sy, my = _total_and_max(y)
    return min(sx * my, mx * sy)


def convolve_exact(x, y, limit: int | None = None) -> np.ndarray:
    """Exact ``x * y`` (non-negative integer vectors), truncated to ``limit`` terms.

    Returns int64 when every coefficient fits, otherwise an object array of
    Python ints.
    """
    square = y is x
    x = np.asarray(x)
    y = x if square else np.asarray(y)
    full = len(x) + len(y) - 1
    out_len = full if limit is None else min(full, limit)
    if len(x) == 0 or len(y) == 0:
        return np.zeros(max(out_len, 0), dtype=np.int64)
    if limit is not None:
        x = x[:limit]
        y = x if square else y[:limit]
        full = len(x) + len(y) - 1
    bound = coefficient_bound(x, y)
    if bound == 0:
        return np.zeros(out_len, dtype=np.int64)
    wide = bound > 2**63 - 1
    primes = primes_for_bound(bound)
    size = 1
    while size < full:
        size *= 2
    if size > min(lim for _, _, lim in primes):
        raise ValueError(f"transform length {size} too large")
    residues = []
    for p, g, _ in primes:
        pu = _U64(p)
        xa = np.zeros(size, dtype=_U64)
        xa[:len(x)] = _residues(x, p)
        fx = ntt(xa, p, g)
        if square:
            fy = fx
        else:
            ya = np.zeros(size, dtype=_U64)
            ya[:len(y)] = _residues(y, p)
            fy = ntt(ya, p, g)
        residues.append(ntt(fx * fy % pu, p, g, inverse=True)[:out_len])
    return _garner(residues, [p for p, _, _ in primes], wide)
