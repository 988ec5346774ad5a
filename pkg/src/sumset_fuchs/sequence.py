"""Random and midpoint sequences ``a_i = floor(theta_i**alpha)``.

Index ``i`` runs from 0; ``theta_i`` lies in the half-open interval
``[i, i + 1)`` so ``floor(theta_i) == i`` always holds.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kernel import Parameters, as_fraction, power_floor_array


class CoverageError(ValueError):
    """The sequence is too short for the requested threshold."""


@dataclass(frozen=True)
class SampledSequence:
    params: Parameters
    seed: int | None
    thetas: np.ndarray | None
    a: np.ndarray
    mode: str = "random"

    @property
    def m(self) -> int:
        return len(self.a)

    def __len__(self):
        return len(self.a)

    def slim(self) -> "SampledSequence":
        """Copy without the theta values (enough for representation counts)."""
        return SampledSequence(self.params, self.seed, None, self.a, self.mode)

    def powers(self) -> np.ndarray:
        """``theta_i**alpha`` as floats, ascending in ``i``."""
        if self.thetas is None:
            raise ValueError("slim sequence has no theta values")
        return self.thetas ** self.params.alpha_float

    def covers(self, bound) -> bool:
        """True if every index whose theta**alpha can be <= ``bound`` is present.

        Index ``m`` has ``theta_m >= m``; it is irrelevant once ``m**alpha`` exceeds
        ``bound``.
        """
        return self.m ** self.params.alpha_float > float(bound) * (1 + 1e-12)

    def require(self, bound):
        if not self.covers(bound):
            raise CoverageError(
                f"sequence of length {self.m} does not cover threshold {bound}; "
                f"need length >= {index_bound_for_n(self.params, math.ceil(bound))}"
            )


def derive_seed(master: int, tag: str, index: int) -> int:
    """Deterministic 64-bit seed for stream ``(master, tag, index)``."""
    ss = np.random.SeedSequence([int(master), zlib.crc32(tag.encode()), int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


def sample_sequence(p: Parameters, m: int, seed: int, keep_thetas: bool = True) -> SampledSequence:
    """Draw ``theta_i = i + u_i`` with ``u_i`` uniform on ``[0, 1)``.

    ``u_i`` is the ``i``-th double of a PCG64 stream seeded with ``seed``;
    extending ``m`` never changes the prefix.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    u = np.random.Generator(np.random.PCG64(seed)).random(m)
    thetas = np.arange(m, dtype=float) + u
    # i + u can round up to i + 1 for large i
    thetas = np.minimum(thetas, np.nextafter(np.arange(1, m + 1, dtype=float), 0))
    a = power_floor_array(thetas, p.alpha)
    return SampledSequence(p, seed, thetas if keep_thetas else None, a, "random")


def midpoint_sequence(p: Parameters, m: int) -> SampledSequence:
    if m < 1:
        raise ValueError("m must be >= 1")
    thetas = np.arange(m, dtype=float) + 0.5
    return SampledSequence(p, None, thetas, power_floor_array(thetas, p.alpha), "midpoint")


def index_bound_for_n(p: Parameters, n) -> int:
    """``floor(n**(1/alpha)) + 1``: indices ``0..m-1`` hold every theta with theta**alpha <= n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    alpha = p.alpha
    r = int(float(n) ** (1.0 / float(alpha)))
    nf = as_fraction(n)
    # fix the float root so that r**alpha <= n < (r+1)**alpha exactly
    while r > 0 and _pow_exceeds(r, alpha, nf):
        r -= 1
    while not _pow_exceeds(r + 1, alpha, nf):
        r += 1
    return r + 1


def _pow_exceeds(base: int, alpha, n) -> bool:
    """Exact test ``base**alpha > n`` for rational alpha and n."""
    a = as_fraction(alpha)
    n = as_fraction(n)
    if n < 0:
        return True
    # base**(p/q) > n  <=>  base**p > n**q
    return base ** a.numerator > n ** a.denominator


def sequence_for(p: Parameters, bound, seed: int | None = None, mode: str = "random") -> SampledSequence:
    """Sequence long enough to cover ``bound`` (use ``n + k`` for sigma_{n+k})."""
    m = index_bound_for_n(p, max(1, math.ceil(bound)))
    if mode == "midpoint":
        return midpoint_sequence(p, m)
    if mode != "random":
        raise ValueError(f"unknown mode {mode!r}")
    if seed is None:
        raise ValueError("random mode needs a seed")
    return sample_sequence(p, m, seed)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def format_sequence(seq: SampledSequence) -> str:
    p = seq.params
    head = [f"k={p.k}", f"beta={p.beta}", f"alpha={p.alpha}"]
    if seq.seed is not None:
        head.append(f"seed={seq.seed}")
    head += [f"m={seq.m}", f"mode={seq.mode}"]
    lines = [" ".join(head)]
    if seq.thetas is None:
        lines += [f"{i} nan {int(v)}" for i, v in enumerate(seq.a)]
    else:
        lines += [f"{i} {t:.17g} {int(v)}" for i, (t, v) in enumerate(zip(seq.thetas, seq.a))]
    return "\n".join(lines) + "\n"


def write_sequence(seq: SampledSequence, path) -> Path:
    path = Path(path)
    path.write_text(format_sequence(seq))
    return path


def read_sequence(path) -> SampledSequence:
    lines = Path(path).read_text().splitlines()
    head = dict(tok.split("=", 1) for tok in lines[0].split())
    p = Parameters(int(head["k"]), head["beta"])
    m = int(head["m"])
    rows = [ln.split() for ln in lines[1:1 + m]]
    if len(rows) != m:
        raise ValueError(f"expected {m} rows, found {len(rows)}")
    thetas = np.array([float(r[1]) for r in rows])
    a = np.array([int(r[2]) for r in rows], dtype=np.int64)
    seed = int(head["seed"]) if "seed" in head else None
    return SampledSequence(p, seed, None if np.isnan(thetas).all() else thetas, a, head["mode"])
