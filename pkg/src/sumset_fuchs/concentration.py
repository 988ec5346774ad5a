"""Hoeffding-side quantities, empirical deviations and scaling fits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernel import Parameters, PowerTable, Regime, volume_constant
from .repcount import rep_series, sigma_direct
from .sequence import derive_seed, sequence_for
from .shell import PartitionClass, PartitionReport


# ---------------------------------------------------------------------------
# Hoeffding scale
# ---------------------------------------------------------------------------

def regime_D_rate(p: Parameters, n) -> float:
    """Growth of D with unit constant: n^((a-1)/a^2), n^(1/(2a)) or n^(1/4) sqrt(log n)."""
    a, nf = p.alpha_float, float(n)
    if p.regime is Regime.ALPHA_GREATER_2:
        return nf ** ((a - 1) / a**2)
    if p.regime is Regime.ALPHA_LESS_2:
        return nf ** (1 / (2 * a))
    return nf**0.25 * math.sqrt(math.log(nf))


def class_D(report: PartitionReport, p: Parameters, n) -> tuple[float, float]:
    """Measured ``D = max_class sqrt(sum |fiber|^2)`` and the rate it should track."""
    return math.sqrt(report.D2), regime_D_rate(p, n)


def hoeffding_y(p: Parameters, n) -> float:
    """``sqrt(((k - 2)/alpha + 2) * ln n)``; zero at ``n = 1``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.sqrt(((p.k - 2) / p.alpha_float + 2.0) * math.log(float(n)))


def predicted_deviation(p: Parameters, n, s: int, D: float) -> float:
    """Deviation envelope ``s * y * D`` for the off-diagonal part of sigma_n."""
    return s * hoeffding_y(p, n) * D


# ---------------------------------------------------------------------------
# cell volumes
# ---------------------------------------------------------------------------

def estimate_cell_volume(cube, p: Parameters | None, n, samples: int, seed: int = 0,
                         alpha=None) -> tuple[float, float]:
    """Monte-Carlo volume of ``{sum x_r**alpha <= n}`` inside the unit cube at ``cube``.

    Cubes entirely inside or outside are answered exactly without sampling.
    ``alpha`` overrides ``p`` (needed for one-dimensional checks).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    a = p.alpha if alpha is None else alpha
    cube = np.asarray(cube, dtype=np.int64)
    table = PowerTable(a, int(cube.max()) + 2)
    cols = [np.array([c]) for c in cube]
    if table.compare([c + 1 for c in cols], n)[0] <= 0:
        return 1.0, 0.0
    if table.compare(cols, n)[0] >= 0:
        return 0.0, 0.0
    rng = np.random.Generator(np.random.PCG64(seed))
    pts = cube[None, :] + rng.random((samples, len(cube)))
    inside = (pts ** float(a)).sum(axis=1) <= float(n)
    est = float(inside.mean())
    return est, math.sqrt(est * (1 - est) / samples)


# ---------------------------------------------------------------------------
# empirical deviation of sigma_n and S(n) from C n^beta
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeviationSample:
    n: int
    seed: int | None
    sigma_n: int
    S_n: int
    expected: float

    @property
    def dev_sigma(self) -> float:
        return self.sigma_n - self.expected

    @property
    def dev_S(self) -> float:
        return self.S_n - self.expected


def expected_count(p: Parameters, n) -> float:
    """``C_{k,alpha} * n**beta``."""
    return volume_constant(p) * float(n) ** p.beta_float


def deviations_for_seed(p: Parameters, n_grid, seed, mode: str = "random") -> list[DeviationSample]:
    """All grid points for one sequence (one seed, or the midpoint sequence)."""
    n_grid = [int(n) for n in n_grid]
    top = max(n_grid)
    seq = sequence_for(p, top + p.k, seed, mode)
    S = rep_series(seq.slim(), top).S
    return [DeviationSample(n, seq.seed, sigma_direct(seq, n), int(S[n]), expected_count(p, n))
            for n in n_grid]


def summarize_deviations(samples: list[DeviationSample]) -> list[dict]:
    out = []
    for n in sorted({s.n for s in samples}):
        rows = [s for s in samples if s.n == n]
        dS = np.abs([s.dev_S for s in rows])
        dsig = np.abs([s.dev_sigma for s in rows])
        out.append({
            "n": n,
            "count": len(rows),
            "median_abs_dev_S": float(np.median(dS)),
            "max_abs_dev_S": float(dS.max()),
            "median_abs_dev_sigma": float(np.median(dsig)),
            "max_abs_dev_sigma": float(dsig.max()),
            "mean_sigma": float(np.mean([s.sigma_n for s in rows])),
        })
    return out


def empirical_deviation(p: Parameters, n_grid, seeds, mode: str = "random"):
    """Deviations for every ``(n, seed)`` plus a per-n summary.

    In midpoint mode the seeds are ignored and a single deterministic
    sequence is used.
    """
    if not len(n_grid):
        raise ValueError("n_grid must be nonempty")
    seeds = [None] if mode == "midpoint" else list(seeds)
    if not seeds:
        raise ValueError("seeds must be nonempty")
    samples = []
    for seed in seeds:
        samples += deviations_for_seed(p, n_grid, seed, mode)
    return samples, summarize_deviations(samples)


# ---------------------------------------------------------------------------
# log-log regression
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    stderr: float
    r_squared: float
    points: list = field(repr=False)


def fit_scaling(points) -> ScalingFit:
    """Ordinary least squares of ``ln value`` on ``ln n``."""
    pts = [(float(n), float(v)) for n, v in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points")
    if any(v <= 0 or n <= 0 for n, v in pts):
        raise ValueError("n and value must be positive")
    x = np.log([n for n, _ in pts])
    y = np.log([v for _, v in pts])
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx == 0:
        raise ValueError("need at least two distinct n")
    slope = float(((x - xm) * (y - ym)).sum() / sxx)
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    ss_res = float((resid**2).sum())
    ss_tot = float(((y - ym) ** 2).sum())
    stderr = math.sqrt(ss_res / (len(pts) - 2) / sxx)
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return ScalingFit(slope, intercept, stderr, r2, list(zip(x.tolist(), y.tolist())))


# ---------------------------------------------------------------------------
# Hoeffding tail simulation for one class
# ---------------------------------------------------------------------------

@dataclass
class TailRow:
    y: float
    frequency: float
    bound: float
    stderr: float

    @property
    def ok(self) -> bool:
        return self.frequency <= self.bound + 3 * self.stderr


@dataclass
class HoeffdingReport:
    class_size: int
    D: float
    trials: int
    mean_eta: float
    xi: np.ndarray = field(repr=False)     # (trials, members)
    eta: np.ndarray = field(repr=False)
    rows: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)


def hoeffding_empirical(cls: PartitionClass, p: Parameters, n, trials: int, seed: int = 0,
                        ys=(0.5, 1.0, 1.5, 2.0)) -> HoeffdingReport:
    """Simulate ``eta = sum_prefix xi_prefix`` over fresh theta draws.

    Only the theta values at indices used by the class are drawn; trial ``t``
    uses the stream ``derive_seed(seed, "hoeffding", t)``.  Frequencies of
    ``|eta - mean| >= y D`` are compared with ``2 exp(-2 y^2)``.
    """
    if not cls.members:
        raise ValueError("class is empty")
    tuples, owner = [], []
    for j, m in enumerate(cls.members):
        lo, hi = cls.fibers[m]
        for u in range(lo, hi + 1):
            tuples.append(tuple(m) + (u,))
            owner.append(j)
    idx = sorted({i for t in tuples for i in t})
    pos = {i: c for c, i in enumerate(idx)}
    cols = np.array([[pos[i] for i in t] for t in tuples], dtype=np.int64)
    base = np.array(idx, dtype=float)
    a = p.alpha_float
    sizes = np.array([cls.fibers[m][1] - cls.fibers[m][0] + 1 for m in cls.members])
    D = float(math.sqrt((sizes**2).sum()))

    thetas = np.empty((trials, len(idx)))
    for t in range(trials):
        u = np.random.Generator(np.random.PCG64(derive_seed(seed, "hoeffding", t))).random(len(idx))
        thetas[t] = base + u
    pw = thetas**a
    sums = np.zeros((trials, len(tuples)))
    for c in range(cols.shape[1]):
        sums = sums + pw[:, cols[:, c]]
    delta = (sums <= float(n)).astype(np.int64)
    xi = np.zeros((trials, len(cls.members)), dtype=np.int64)
    np.add.at(xi.T, np.array(owner), delta.T)
    assert (xi >= 0).all() and (xi <= sizes[None, :]).all()
    eta = xi.sum(axis=1)
    mean = float(eta.mean())
    rows = []
    for y in ys:
        freq = float((np.abs(eta - mean) >= y * D).mean())
        b = 2.0 * math.exp(-2.0 * y * y)
        bc = min(b, 1.0)
        rows.append(TailRow(float(y), freq, b, math.sqrt(bc * (1 - bc) / trials)))
    return HoeffdingReport(len(cls.members), D, trials, mean, xi, eta, rows)
