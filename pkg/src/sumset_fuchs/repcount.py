"""Exact representation counts r_kA(m), their prefix sums, and sigma_n.

r_kA(m) counts *ordered* k-tuples of indices (repetition allowed) whose
sequence values sum to m, i.e. the coefficient of x**m in
``(sum_v c[v] x**v)**k`` where ``c`` is the value histogram.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ntt import convolve_exact
from .sequence import CoverageError, SampledSequence

INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class MultiplicityVector:
    n_max: int
    c: np.ndarray


@dataclass(frozen=True)
class RepSeries:
    k: int
    n_max: int
    r: np.ndarray
    S: np.ndarray


def multiplicities(seq: SampledSequence | np.ndarray, n_max: int) -> MultiplicityVector:
    """Histogram of sequence values ``0..n_max``.

    A :class:`SampledSequence` must be long enough that no missing index could
    carry a value ``<= n_max``; a bare array is taken as complete.
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    if isinstance(seq, SampledSequence):
        if not seq.covers(n_max + 1):
            raise CoverageError(f"sequence of length {seq.m} may miss values <= {n_max}")
        a = seq.a
    else:
        a = np.asarray(seq, dtype=np.int64)
    a = a[(a >= 0) & (a <= n_max)]
    return MultiplicityVector(n_max, np.bincount(a, minlength=n_max + 1).astype(np.int64))


def _wide_if_needed(c: np.ndarray, k: int) -> np.ndarray:
    total = int(c.sum()) if c.dtype != object else int(sum(c))
    if total**k > INT64_MAX:
        return c.astype(object)
    return c


def _schoolbook_mul(x: np.ndarray, y: np.ndarray, limit: int) -> np.ndarray:
    out = np.zeros(limit, dtype=x.dtype if x.dtype == object else np.int64)
    ylen = min(len(y), limit)
    for j in np.flatnonzero(x[:limit]):
        span = min(ylen, limit - j)
        out[j:j + span] += x[j] * y[:span]
    return out


def rep_counts(c: MultiplicityVector | np.ndarray, k: int, n_max: int | None = None,
               backend: str = "fast") -> RepSeries:
    """Coefficients of ``(sum_v c[v] x**v)**k`` up to ``x**n_max``.

    ``backend="schoolbook"`` multiplies term by term; ``backend="fast"`` uses
    square-and-multiply with exact NTT products.  Both truncate at ``n_max``
    after every product.  Counts that would not fit in int64 come back as
    Python ints in an object array.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    vec = c.c if isinstance(c, MultiplicityVector) else np.asarray(c)
    if n_max is None:
        n_max = c.n_max if isinstance(c, MultiplicityVector) else len(vec) - 1
    limit = n_max + 1
    base = np.zeros(limit, dtype=vec.dtype if vec.dtype == object else np.int64)
    base[:min(limit, len(vec))] = vec[:limit]
    base = _wide_if_needed(base, k)
    if backend == "schoolbook":
        r = base.copy()
        for _ in range(k - 1):
            r = _schoolbook_mul(r, base, limit)
    elif backend == "fast":
        r = None
        sq = base
        e = k
        while e:
            if e & 1:
                r = sq.copy() if r is None else convolve_exact(r, sq, limit)
            e >>= 1
            if e:
                sq = convolve_exact(sq, sq, limit)
        if base.dtype == object:
            r = r.astype(object)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    r = np.asarray(r)
    return RepSeries(k, n_max, r, summatory_array(r))


def summatory_array(r: np.ndarray) -> np.ndarray:
    if r.dtype == object:
        return np.array(list(_accumulate(r)), dtype=object)
    return np.cumsum(r, dtype=np.int64)


def _accumulate(r):
    total = 0
    for v in r:
        total += int(v)
        yield total


def summatory(rep: RepSeries | np.ndarray) -> np.ndarray:
    """Prefix sums ``S[n] = sum_{m<=n} r[m]``."""
    r = rep.r if isinstance(rep, RepSeries) else np.asarray(rep)
    return summatory_array(r)


def rep_series(seq: SampledSequence, n_max: int, backend: str = "fast") -> RepSeries:
    return rep_counts(multiplicities(seq, n_max), seq.params.k, n_max, backend)


# ---------------------------------------------------------------------------
# sigma_n: ordered k-tuples with sum theta**alpha <= n
# ---------------------------------------------------------------------------

def _partial_sums(pw: np.ndarray, depth: int, n: float, k: int) -> np.ndarray:
    """Sums of ``depth`` powers that can still be completed below ``n``.

    Summation order matches the tuple order ((x1 + x2) + x3) + ...
    """
    if depth == 0:
        return np.zeros(1)
    smallest = pw[0] if len(pw) else math.inf
    # pruning only, so it is allowed to be slightly loose
    cut = n * (1 + 1e-12) + 1e-12
    parts = pw[pw + (k - 1) * smallest <= cut]
    for level in range(2, depth + 1):
        remaining = k - level
        nxt = (parts[:, None] + pw[None, :]).reshape(-1)
        parts = nxt[nxt + remaining * smallest <= cut]
    return parts


def _count_last(parts: np.ndarray, pw: np.ndarray, n: float) -> int:
    idx = np.searchsorted(pw, n - parts, side="right")
    # settle float disagreements between (n - p >= x) and (p + x <= n)
    up = idx < len(pw)
    fix_up = np.zeros_like(idx)
    fix_up[up] = (parts[up] + pw[idx[up]] <= n)
    down = idx > 0
    fix_down = np.zeros_like(idx)
    fix_down[down] = (parts[down] + pw[idx[down] - 1] > n)
    return int((idx + fix_up - fix_down).sum())


def sigma_direct(seq: SampledSequence, n: float) -> int:
    """Number of ordered k-tuples with ``theta_i1**alpha + ... <= n`` (ties inside)."""
    k = seq.params.k
    if n < 0:
        return 0
    seq.require(n)
    pw = seq.powers()
    parts = _partial_sums(pw, k - 1, float(n), k)
    if parts.size == 0:
        return 0
    return _count_last(parts, pw, float(n))


def sigma_upto(seq: SampledSequence, n_max: int, chunk: int = 1 << 20) -> np.ndarray:
    """``sigma_n`` for every integer ``0 <= n <= n_max`` in one pass."""
    k = seq.params.k
    seq.require(n_max)
    pw = seq.powers()
    pw = pw[pw <= n_max]
    counts = np.zeros(n_max + 1, dtype=np.int64)
    parts = _partial_sums(pw, k - 1, float(n_max), k)
    order = np.argsort(parts, kind="stable")
    parts = parts[order]
    for start in range(0, len(parts), max(1, chunk // max(1, len(pw)))):
        block = parts[start:start + max(1, chunk // max(1, len(pw)))]
        sums = (block[:, None] + pw[None, :]).reshape(-1)
        sums = sums[sums <= n_max]
        # sum <= n  <=>  ceil(sum) <= n for integer n
        counts += np.bincount(np.ceil(sums).astype(np.int64), minlength=n_max + 1)[:n_max + 1]
    return np.cumsum(counts)


@dataclass(frozen=True)
class SandwichReport:
    n: int
    sigma_n: int
    S_n: int
    sigma_n_plus_k: int

    @property
    def ok(self) -> bool:
        return self.sigma_n <= self.S_n <= self.sigma_n_plus_k


def sandwich_check(seq: SampledSequence, n: int, rep: RepSeries | None = None) -> SandwichReport:
    """Check ``sigma_n <= S(n) <= sigma_{n+k}`` at one integer ``n``."""
    k = seq.params.k
    if rep is None or rep.n_max < n:
        rep = rep_series(seq, n)
    return SandwichReport(n, sigma_direct(seq, n), int(rep.S[n]), sigma_direct(seq, n + k))


def sandwich_scan(seq: SampledSequence, n_max: int) -> np.ndarray:
    """Indices ``n <= n_max`` where the sandwich fails (should be empty)."""
    k = seq.params.k
    sig = sigma_upto(seq, n_max + k)
    S = rep_series(seq, n_max).S.astype(np.int64)
    lo, hi = sig[:n_max + 1], sig[k:n_max + k + 1]
    return np.flatnonzero((lo > S) | (S > hi))


def write_rep_csv(rep: RepSeries, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "r", "S"])
        for m, (rv, sv) in enumerate(zip(rep.r, rep.S)):
            w.writerow([m, int(rv), int(sv)])
    return path
