"""Boundary shell enumeration and the band / label partition of its prefixes.

The shell at threshold ``n`` is the set of strictly decreasing k-tuples whose
unit cube straddles ``sum x_r**alpha = n``.  For a fixed prefix
``(i_1, ..., i_{k-1})`` the admissible last coordinates form an integer
interval, so fibers are stored as inclusive ``(lo, hi)`` pairs and tuples are
only materialised on request.

Prefixes are grouped into classes keyed by ``(label, primed)`` where the label
is ``(i_1 + d*i_2, ..., i_1 + d*i_{k-1})`` with ``d = floor(2 k**2 alpha) + k``
and ``primed`` is the parity of the prefix's half-band of width
``2 k alpha n**(1 - 1/alpha)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .kernel import Parameters, PowerTable, Regime

_BLOCK = 1 << 21
_MAX_EXAMPLES = 20


# ---------------------------------------------------------------------------
# interval search helpers
# ---------------------------------------------------------------------------

def _root_floor(x, alpha: float) -> np.ndarray:
    """Float estimate of floor(x**(1/alpha)) for x >= 0; -1 where x <= 0."""
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, -1, dtype=np.int64)
    pos = x > 0
    out[pos] = np.floor(x[pos] ** (1.0 / alpha)).astype(np.int64)
    return out


def _largest(pred, guess: np.ndarray, lo: int, hi: np.ndarray) -> np.ndarray:
    """Largest ``u`` in ``[lo - 1, hi]`` with ``pred(u)`` true (pred monotone true->false).

    ``guess`` should be within a couple of steps of the answer.  Returns
    ``lo - 1`` where no ``u >= lo`` qualifies.
    """
    u = np.clip(guess, lo - 1, hi)
    while True:
        cand = np.flatnonzero(u >= lo)
        bad = cand[~pred(u[cand], cand)]
        if bad.size == 0:
            break
        u[bad] -= 1
    while True:
        cand = np.flatnonzero(u < hi)
        good = cand[pred(u[cand] + 1, cand)]
        if good.size == 0:
            break
        u[good] += 1
    return u


def _expand(rows: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """Append every value of ``range(lo[j], hi[j] + 1)`` to row ``j``."""
    counts = np.maximum(hi - lo + 1, 0)
    total = int(counts.sum())
    rep = np.repeat(np.arange(len(rows)), counts)
    starts = np.cumsum(counts) - counts
    new = lo[rep] + (np.arange(total) - starts[rep])
    return np.column_stack([rows[rep], new]) if rows.shape[1] else new[:, None]


def _chunks(counts: np.ndarray, block: int):
    """Split row indices so that each chunk expands to at most ~block rows."""
    start, acc = 0, 0
    for j, c in enumerate(counts):
        if acc and acc + c > block:
            yield slice(start, j)
            start, acc = j, 0
        acc += c
    if start < len(counts):
        yield slice(start, len(counts))


# ---------------------------------------------------------------------------
# shell enumeration
# ---------------------------------------------------------------------------

@dataclass
class ShellIndex:
    """Prefixes of the boundary shell with their fibers as integer intervals."""

    params: Parameters
    n: float
    prefixes: np.ndarray  # (P, k-1) int64, lexicographically sorted
    lo: np.ndarray        # inclusive fiber bounds
    hi: np.ndarray
    v: np.ndarray         # sum of prefix coordinates**alpha (float, cached)

    @property
    def fiber_sizes(self) -> np.ndarray:
        return self.hi - self.lo + 1

    @property
    def tuple_count(self) -> int:
        return int(self.fiber_sizes.sum())

    def __len__(self):
        return len(self.prefixes)

    def prefix_set(self) -> set:
        return {tuple(int(x) for x in row) for row in self.prefixes}

    @property
    def fibers(self) -> dict:
        return {tuple(int(x) for x in row): list(range(int(a), int(b) + 1))
                for row, a, b in zip(self.prefixes, self.lo, self.hi)}

    def tuples(self) -> list:
        """Materialise the shell as sorted k-tuples (small n only)."""
        out = []
        for row, a, b in zip(self.prefixes, self.lo, self.hi):
            pre = tuple(int(x) for x in row)
            out.extend(pre + (u,) for u in range(int(a), int(b) + 1))
        return sorted(out)


def _table_for(p_alpha, n) -> PowerTable:
    top = int(float(n) ** (1.0 / float(p_alpha))) + 4
    return PowerTable(p_alpha, top + 1)


def _fibers(table: PowerTable, rows: np.ndarray, n, weights=None, capped=True):
    """Inclusive fiber bounds (lo, hi) of the last coordinate for each prefix row."""
    alpha = table.alpha_float
    cols = [rows[:, j] for j in range(rows.shape[1])]
    w = None if weights is None else list(weights)
    w_pre = None if w is None else w[:-1]
    w_last = 1 if w is None else w[-1]
    top = table.size - 2
    nf = float(n)

    # hi: largest u with  sum w*prefix**alpha + w_last*u**alpha < n
    v = table.sums(cols, w_pre) if cols else np.zeros(len(rows))
    guess = _root_floor((nf - v) / w_last, alpha)
    cap = (rows[:, -1] - 1) if capped else np.full(len(rows), top)
    cap = np.minimum(cap, top)

    def below(u, idx):
        cc = [c[idx] for c in cols] + [u]
        return table.compare(cc, n, w) < 0

    hi = _largest(below, guess, 0, cap)

    # lo: smallest u >= 0 with  sum w*(prefix+1)**alpha + w_last*(u+1)**alpha > n
    up = [c + 1 for c in cols]
    V = table.sums(up, w_pre) if cols else np.zeros(len(rows))
    guess = _root_floor((nf - V) / w_last, alpha) - 1

    def not_above(u, idx):
        cc = [c[idx] for c in up] + [u + 1]
        return table.compare(cc, n, w) <= 0

    lo = _largest(not_above, guess, 0, np.full(len(rows), top)) + 1
    return lo, hi, v


def _shell_level_ok(table, rows, n, k):
    """Exact pruning test for a partial strictly decreasing prefix."""
    r = rows.shape[1]
    cols = [rows[:, j] for j in range(r)]
    lower_ok = table.compare(cols, n) < 0
    # the k - r remaining coordinates satisfy (i + 1) <= i_r, so the upper sum is
    # at most U_r + (k - r) * i_r**alpha
    upper_cols = [c + 1 for c in cols] + [cols[-1]]
    weights = [1] * r + [k - r]
    upper_ok = table.compare(upper_cols, n, weights) > 0
    return lower_ok & upper_ok & (cols[-1] >= k - r)


def enumerate_shell(p: Parameters, n) -> ShellIndex:
    """Enumerate prefixes and fibers of the boundary shell at threshold ``n``."""
    k, alpha = p.k, p.alpha_float
    table = _table_for(p.alpha, max(float(n), 1.0))
    empty = ShellIndex(p, n, np.zeros((0, k - 1), dtype=np.int64),
                       np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0))
    if n <= 0:
        return empty
    nf = float(n)
    top = table.size - 3
    first_lo = max(k - 1, int((nf / k) ** (1.0 / alpha)) - 2)
    level = np.arange(first_lo, top + 1, dtype=np.int64)[:, None]
    level = level[_shell_level_ok(table, level, n, k)]
    out_pre, out_lo, out_hi, out_v = [], [], [], []

    def finish(rows):
        lo, hi, v = _fibers(table, rows, n)
        keep = lo <= hi
        out_pre.append(rows[keep])
        out_lo.append(lo[keep])
        out_hi.append(hi[keep])
        out_v.append(v[keep])

    def descend(rows):
        r = rows.shape[1]
        if r == k - 1:
            finish(rows)
            return
        cols = [rows[:, j] for j in range(r)]
        v = table.sums(cols)
        U = table.sums([c + 1 for c in cols])
        hi = np.minimum(rows[:, -1] - 1, _root_floor(nf - v, alpha) + 1)
        lo = np.maximum(k - r - 1, _root_floor(np.maximum(nf - U, 0) / (k - r), alpha) - 2)
        counts = np.maximum(hi - lo + 1, 0)
        for sl in _chunks(counts, _BLOCK):
            nxt = _expand(rows[sl], lo[sl], hi[sl])
            if len(nxt):
                descend(nxt[_shell_level_ok(table, nxt, n, k)])

    if k == 1:
        raise ValueError("k must be >= 2")
    if len(level):
        for sl in _chunks(np.ones(len(level), dtype=np.int64), _BLOCK):
            descend(level[sl])
    if not out_pre:
        return empty
    pre = np.concatenate(out_pre)
    lo = np.concatenate(out_lo)
    hi = np.concatenate(out_hi)
    v = np.concatenate(out_v)
    order = np.lexsort(pre.T[::-1]) if len(pre) else np.zeros(0, dtype=np.int64)
    return ShellIndex(p, n, pre[order], lo[order], hi[order], v[order])


def count_shell_general(weights, alpha, n) -> int:
    """Count non-negative k-tuples (any order) with
    ``sum w_r i_r**alpha < n < sum w_r (i_r + 1)**alpha``.
    """
    weights = [int(w) for w in weights]
    if not weights or min(weights) < 1:
        raise ValueError("weights must be positive integers")
    k = len(weights)
    af = float(alpha)
    if n <= 0:
        return 0
    nf = float(n)
    table = _table_for(alpha, nf)
    top = table.size - 3
    if k == 1:
        lo, hi, _ = _fibers(table, np.zeros((1, 0), dtype=np.int64), n, weights, capped=False)
        return int(max(hi[0] - lo[0] + 1, 0))

    total = 0

    def descend(rows):
        nonlocal total
        r = rows.shape[1]
        if r == k - 1:
            lo, hi, _ = _fibers(table, rows, n, weights, capped=False)
            total += int(np.maximum(hi - lo + 1, 0).sum())
            return
        cols = [rows[:, j] for j in range(r)]
        v = table.sums(cols, weights[:r])
        hi = np.minimum(_root_floor((nf - v) / weights[r], af) + 1, top)
        lo = np.zeros(len(rows), dtype=np.int64)
        counts = np.maximum(hi - lo + 1, 0)
        for sl in _chunks(counts, _BLOCK):
            nxt = _expand(rows[sl], lo[sl], hi[sl])
            if len(nxt):
                ok = table.compare([nxt[:, j] for j in range(r + 1)], n, weights[:r + 1]) < 0
                descend(nxt[ok])

    first = np.arange(0, top + 1, dtype=np.int64)[:, None]
    first = first[table.compare([first[:, 0]], n, weights[:1]) < 0]
    for sl in _chunks(np.full(len(first), max(1, top)), _BLOCK):
        descend(first[sl])
    return total


# ---------------------------------------------------------------------------
# bands, labels, partition
# ---------------------------------------------------------------------------

def band_width(p: Parameters, n) -> float:
    """Half-band width ``2 k alpha n**(1 - 1/alpha)``."""
    a = p.alpha_float
    return 2.0 * p.k * a * float(n) ** (1.0 - 1.0 / a)


def _band_q(v, p, n):
    return np.floor(np.asarray(v, dtype=float) / band_width(p, n)).astype(np.int64)


def band_index(prefix, p: Parameters, n, v: float | None = None):
    """Return ``(t, primed)``: the prefix lies in X'_t if primed, else X_t."""
    if v is None:
        v = float(sum(float(i) ** p.alpha_float for i in prefix))
    q = int(_band_q(v, p, n))
    return q // 2, bool(q % 2)


def label_step(p: Parameters) -> int:
    """``d = floor(2 k**2 alpha) + k``."""
    return math.floor(2 * p.k**2 * p.alpha) + p.k


def y_label(prefix, p: Parameters) -> tuple:
    d = label_step(p)
    i1 = int(prefix[0])
    return tuple(i1 + d * int(iv) for iv in prefix[1:p.k - 1])


def _labels(prefixes: np.ndarray, p: Parameters) -> np.ndarray:
    d = label_step(p)
    return prefixes[:, :1] + d * prefixes[:, 1:p.k - 1]


@dataclass
class PartitionClass:
    label: tuple            # (s_1, ..., s_{k-2}, primed)
    members: list           # prefixes, ascending in band index
    band_of: dict           # prefix -> t
    fibers: dict            # prefix -> (lo, hi) inclusive
    rows: np.ndarray = field(default=None, repr=False)

    @property
    def primed(self) -> bool:
        return bool(self.label[-1])

    def __len__(self):
        return len(self.members)


@dataclass
class Partition:
    """Class assignment for every prefix of a shell, kept in array form."""

    params: Parameters
    n: float
    shell: ShellIndex
    class_id: np.ndarray    # per prefix
    band: np.ndarray        # per prefix, t
    labels: np.ndarray      # (C, k-2)
    primed: np.ndarray      # (C,)

    def __len__(self):
        return len(self.primed)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.class_id, minlength=len(self))

    def members_of(self, c: int) -> np.ndarray:
        rows = np.flatnonzero(self.class_id == c)
        return rows[np.argsort(self.band[rows], kind="stable")]

    def __getitem__(self, c: int) -> PartitionClass:
        if c < 0:
            c += len(self)
        if not 0 <= c < len(self):
            raise IndexError(c)
        rows = self.members_of(c)
        sh = self.shell
        members = [tuple(int(x) for x in sh.prefixes[j]) for j in rows]
        return PartitionClass(
            label=tuple(int(x) for x in self.labels[c]) + (bool(self.primed[c]),),
            members=members,
            band_of={m: int(self.band[j]) for m, j in zip(members, rows)},
            fibers={m: (int(sh.lo[j]), int(sh.hi[j])) for m, j in zip(members, rows)},
            rows=rows,
        )

    def __iter__(self):
        for c in range(len(self)):
            yield self[c]

    def class_sumsq(self) -> np.ndarray:
        sizes = self.shell.fiber_sizes
        return np.bincount(self.class_id, weights=(sizes * sizes).astype(float),
                           minlength=len(self)).astype(np.int64)


def build_partition(p: Parameters, n, shell: ShellIndex) -> Partition:
    """Assign every prefix of ``shell`` to the class ``(y_label, primed)``."""
    k = p.k
    P = len(shell)
    if P == 0:
        z = np.zeros(0, dtype=np.int64)
        return Partition(p, n, shell, z, z, np.zeros((0, k - 2), dtype=np.int64), np.zeros(0, dtype=bool))
    q = _band_q(shell.v, p, n)
    t, primed = q // 2, (q % 2).astype(np.int64)
    keys = np.column_stack([_labels(shell.prefixes, p), primed])
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    return Partition(p, n, shell, inv.reshape(-1).astype(np.int64), t,
                     uniq[:, :k - 2], uniq[:, k - 2].astype(bool))


def fiber_size_bound(prefix, p: Parameters, n) -> float:
    """Upper bound ``(n - v)**(1/a) - max(n - V, 0)**(1/a) + 1`` on the fiber size."""
    a = p.alpha_float
    v = sum(float(i) ** a for i in prefix)
    V = sum(float(i + 1) ** a for i in prefix)
    return _fiber_bound_arrays(np.array([v]), np.array([V]), a, n)[0]


def _fiber_bound_arrays(v, V, a, n):
    nf = float(n)
    return np.maximum(nf - v, 0.0) ** (1.0 / a) - np.maximum(nf - V, 0.0) ** (1.0 / a) + 1.0


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def regime_rate(p: Parameters, n) -> float:
    """Growth rate claimed for the per-class sum of squared fiber sizes."""
    a, nf = p.alpha_float, float(n)
    if p.regime is Regime.ALPHA_GREATER_2:
        return nf ** (2 * (a - 1) / a**2)
    if p.regime is Regime.ALPHA_LESS_2:
        return nf ** (1 / a)
    return nf ** 0.5 * math.log(nf)


@dataclass
class PartitionReport:
    n: float
    k: int
    alpha: Fraction
    s: int
    max_class: int
    class_sumsq: np.ndarray = field(repr=False)
    D2: int
    prefix_count: int
    tuple_count: int
    fiber_overlap_pairs: int
    coord_collision_pairs: list        # per coordinate r = 1..k-1
    y_band_multiplicity: int           # members beyond the first in a (class, band) cell
    fiber_bound_violations: int
    fiber_bound_raw_excess: int        # sizes above the real-valued bound but within its ceiling
    examples: dict
    claim_ratios: dict
    asserted: bool                     # claim (3) and |Y cap X_t| <= 1 are theorems only for k >= 3
    slopes: dict = field(default_factory=dict)

    @property
    def violations(self) -> dict:
        return {
            "fiber_overlap": self.fiber_overlap_pairs,
            "coord_collision": int(sum(self.coord_collision_pairs)),
            "y_band_multiplicity": self.y_band_multiplicity,
            "fiber_bound": self.fiber_bound_violations,
        }

    @property
    def claim_violations(self) -> dict:
        """Per-claim violation example lists; only claim (3) is checkable exactly."""
        return {
            "1": [], "2": [], "4": [],
            "3": self.examples["fiber_overlap"] + self.examples["coord_collision"],
        }

    @property
    def ok(self) -> bool:
        v = self.violations
        if v["fiber_bound"]:
            return False
        if not self.asserted:
            return True
        return not (v["fiber_overlap"] or v["coord_collision"] or v["y_band_multiplicity"])

    def to_dict(self) -> dict:
        return {
            "n": int(self.n) if float(self.n).is_integer() else float(self.n),
            "k": self.k,
            "alpha": str(self.alpha),
            "s": self.s,
            "max_class": self.max_class,
            "D2": self.D2,
            "prefix_count": self.prefix_count,
            "tuple_count": self.tuple_count,
            "asserted": self.asserted,
            "violations": self.violations,
            "coord_collision_by_position": list(self.coord_collision_pairs),
            "fiber_bound_raw_excess": self.fiber_bound_raw_excess,
            "examples": self.examples,
            "claim_ratios": self.claim_ratios,
            "slopes": self.slopes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _pairs(counts: np.ndarray) -> int:
    counts = counts.astype(np.int64)
    return int((counts * (counts - 1) // 2).sum())


def _overlap_pairs(cid: np.ndarray, lo: np.ndarray, hi: np.ndarray, C: int):
    """Count intersecting fiber pairs inside each class, plus a few examples."""
    if len(cid) == 0:
        return 0, []
    span = int(max(hi.max(), lo.max())) + 2
    sizes = np.bincount(cid, minlength=C)
    starts = np.cumsum(sizes) - sizes
    hi_keys = np.sort(cid * span + hi)
    lo_keys = cid * span + lo
    # members a of the same class with hi_a < lo_b are disjoint from b
    before = np.searchsorted(hi_keys, lo_keys, side="left") - starts[cid]
    overlap = _pairs(sizes) - int(before.sum())
    examples = []
    if overlap:
        order = np.lexsort((lo, cid))
        run_hi, run_row, prev_c = -1, -1, -1
        for j in order:
            c = cid[j]
            if c != prev_c:
                prev_c, run_hi, run_row = c, hi[j], j
                continue
            if lo[j] <= run_hi:
                examples.append((int(run_row), int(j)))
                if len(examples) >= _MAX_EXAMPLES:
                    break
            if hi[j] > run_hi:
                run_hi, run_row = hi[j], j
    return overlap, examples


def _group_excess(cid: np.ndarray, other: np.ndarray):
    """For groups keyed by (cid, other): (colliding pairs, excess members, example keys)."""
    if len(cid) == 0:
        return 0, 0, []
    keys = np.column_stack([cid, other])
    uniq, counts = np.unique(keys, axis=0, return_counts=True)
    multi = counts > 1
    ex = [tuple(int(x) for x in u) for u in uniq[multi][:_MAX_EXAMPLES]]
    return _pairs(counts), int((counts[multi] - 1).sum()), ex


def verify_partition(part: Partition, shell: ShellIndex | None = None,
                     p: Parameters | None = None, n=None) -> PartitionReport:
    """Check the partition's claims exactly on this instance."""
    shell = part.shell if shell is None else shell
    p = part.params if p is None else p
    n = part.n if n is None else n
    k = p.k
    C = len(part)
    cid = part.class_id
    sizes = shell.fiber_sizes
    class_sizes = part.sizes
    sumsq = part.class_sumsq()

    overlap, ov_ex = _overlap_pairs(cid, shell.lo, shell.hi, C)
    coll, coll_ex = [], []
    for r in range(k - 1):
        pairs, _, ex = _group_excess(cid, shell.prefixes[:, r])
        coll.append(pairs)
        coll_ex += [{"class": e[0], "position": r + 1, "value": e[1]} for e in ex]
    _, y_excess, y_ex = _group_excess(cid, part.band)

    a = p.alpha_float
    V = np.zeros(len(shell))
    for r in range(k - 1):
        V += (shell.prefixes[:, r] + 1).astype(float) ** a
    bound = _fiber_bound_arrays(shell.v, V, a, n)
    # integers in an open interval of length L number at most ceil(L)
    bad = np.flatnonzero(sizes > np.ceil(bound - 1e-9))
    raw_excess = int((sizes > bound + 1e-9).sum())

    def pref(j):
        return [int(x) for x in shell.prefixes[j]]

    nf = float(n)
    examples = {
        "fiber_overlap": [{"a": pref(x), "b": pref(y)} for x, y in ov_ex],
        "coord_collision": coll_ex[:_MAX_EXAMPLES],
        "y_band_multiplicity": [{"class": c, "band": t} for c, t in y_ex],
        "fiber_bound": [{"prefix": pref(j), "size": int(sizes[j]), "bound": float(bound[j])}
                        for j in bad[:_MAX_EXAMPLES]],
    }
    D2 = int(sumsq.max()) if C else 0
    max_class = int(class_sizes.max()) if C else 0
    ratios = {}
    if nf > 1:
        ratios = {
            "s_over_n^((k-2)/alpha)": C / nf ** ((k - 2) / a),
            "max_class_over_n^(1/alpha)": max_class / nf ** (1 / a),
            "D2_over_regime_rate": D2 / regime_rate(p, nf),
        }
    return PartitionReport(
        n=n, k=k, alpha=p.alpha, s=C, max_class=max_class, class_sumsq=sumsq, D2=D2,
        prefix_count=len(shell), tuple_count=shell.tuple_count,
        fiber_overlap_pairs=overlap, coord_collision_pairs=coll,
        y_band_multiplicity=y_excess, fiber_bound_violations=int(bad.size),
        fiber_bound_raw_excess=raw_excess,
        examples=examples, claim_ratios=ratios, asserted=k >= 3,
    )
