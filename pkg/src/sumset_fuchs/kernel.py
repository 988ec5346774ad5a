"""Parameters, error-exponent formulas and guarded power primitives.

Everything here is pure and shared by the other modules.  The exponent
``alpha = k / beta`` is kept as an exact :class:`fractions.Fraction` so the
regime split at ``alpha == 2`` never depends on a floating comparison.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import mpmath
import numpy as np

INT64_MAX = 2**63 - 1

# slack (in ulps) around an integer before power_floor falls back to exact arithmetic
_FLOOR_GUARD_ULPS = 8
# relative guard for floating shell comparisons with non-integer alpha
_CMP_GUARD_ULPS = 4
_MP_DPS = 60


class Regime(enum.Enum):
    ALPHA_GREATER_2 = "alpha>2"
    ALPHA_LESS_2 = "alpha<2"
    ALPHA_EQUAL_2 = "alpha=2"


class LogFactor(enum.Enum):
    SQRT_LOG = "sqrt_log"
    LOG = "log"
    NONE = "none"


def as_fraction(x) -> Fraction:
    """Coerce ``x`` to an exact rational.

    Floats go through their shortest decimal repr, so ``1.5`` becomes
    ``3/2`` rather than the binary expansion of the double.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(float(x)))
    return Fraction(str(x).strip())


@dataclass(frozen=True)
class Parameters:
    """Construction parameters ``(k, beta)`` with ``alpha = k / beta``.

    ``beta`` may be given as an int, float, Fraction or a string such as
    ``"3/2"``; it is stored exactly.
    """

    k: int
    beta: Fraction
    alpha: Fraction = field(init=False)
    regime: Regime = field(init=False)

    def __init__(self, k, beta):
        if isinstance(k, bool) or int(k) != k:
            raise ValueError(f"k must be an integer, got {k!r}")
        k = int(k)
        beta = as_fraction(beta)
        if k < 2:
            raise ValueError(f"k must be >= 2, got {k}")
        if not 0 < beta < k:
            raise ValueError(f"beta must satisfy 0 < beta < k={k}, got {beta}")
        alpha = Fraction(k) / beta
        if alpha > 2:
            regime = Regime.ALPHA_GREATER_2
        elif alpha < 2:
            regime = Regime.ALPHA_LESS_2
        else:
            regime = Regime.ALPHA_EQUAL_2
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "regime", regime)

    @property
    def alpha_float(self) -> float:
        return float(self.alpha)

    @property
    def beta_float(self) -> float:
        return float(self.beta)

    @property
    def alpha_is_integer(self) -> bool:
        return self.alpha.denominator == 1

    def __repr__(self):
        return f"Parameters(k={self.k}, beta={self.beta}, alpha={self.alpha})"


@dataclass(frozen=True)
class ErrorPrediction:
    exponent: Fraction
    log_factor: LogFactor

    def rate(self, n):
        """Evaluate ``n**exponent`` times the log factor (natural log)."""
        n = np.asarray(n, dtype=float)
        base = n ** float(self.exponent)
        if self.log_factor is LogFactor.SQRT_LOG:
            return base * np.sqrt(np.log(n))
        if self.log_factor is LogFactor.LOG:
            return base * np.log(n)
        return base


def predicted_error_exponent(p: Parameters) -> ErrorPrediction:
    """Error exponent of ``sum_{m<=n} r_kA(m) - C n**beta`` for each regime."""
    k, beta = Fraction(p.k), p.beta
    if k > 2 * beta:
        return ErrorPrediction(beta - beta * (k + beta) / k**2, LogFactor.SQRT_LOG)
    if k < 2 * beta:
        return ErrorPrediction(beta - 3 * beta / (2 * k), LogFactor.SQRT_LOG)
    return ErrorPrediction(beta - Fraction(3, 4), LogFactor.LOG)


def volume_constant(p: Parameters | None = None, *, k: int | None = None, alpha=None) -> float:
    """Volume of ``{x >= 0 : sum x_r**alpha <= 1}`` in ``R^k``.

    Equal to ``Gamma(1 + 1/alpha)**k / Gamma(1 + k/alpha)``.  Either pass a
    :class:`Parameters` or the raw ``k`` and ``alpha`` (``k = 1`` allowed).
    """
    if p is not None:
        k, alpha = p.k, p.alpha
    if k is None or alpha is None:
        raise TypeError("volume_constant needs Parameters or both k and alpha")
    a = float(alpha)
    log_v = k * math.lgamma(1.0 + 1.0 / a) - math.lgamma(1.0 + k / a)
    return math.exp(log_v)


def hoeffding_tail(y: float) -> float:
    """One-sided Hoeffding tail ``exp(-2 y**2)``."""
    if y < 0:
        raise ValueError("y must be non-negative")
    return math.exp(-2.0 * y * y)


# ---------------------------------------------------------------------------
# guarded floor(theta**alpha)
# ---------------------------------------------------------------------------

def _exact_floor_rational_power(theta: Fraction, alpha: Fraction, near: int) -> int:
    """floor(theta**alpha) for rational alpha, given an estimate within 1."""
    p, q = alpha.numerator, alpha.denominator
    tp = theta**p
    m = near + 1
    # largest m with m**q <= theta**p
    while m > 0 and Fraction(m) ** q > tp:
        m -= 1
    while Fraction(m + 1) ** q <= tp:
        m += 1
    return m


def _exact_floor_mp(theta: float, alpha: float, near: int) -> int:
    with mpmath.workdps(_MP_DPS):
        x = mpmath.mpf(theta) ** mpmath.mpf(alpha)
        m = near + 1
        while m > 0 and mpmath.mpf(m) > x:
            m -= 1
        while mpmath.mpf(m + 1) <= x:
            m += 1
        return m


def _near_integer(x: float) -> bool:
    r = round(x)
    return abs(x - r) <= _FLOOR_GUARD_ULPS * math.ulp(max(abs(x), 1.0))


def power_floor(theta: float, alpha) -> int:
    """Return ``floor(theta**alpha)``, correct under exact arithmetic.

    Double precision is used unless ``theta**alpha`` lands within a few ulps
    of an integer; those cases are settled exactly (rational ``alpha``) or
    in 60-digit arithmetic (irrational ``alpha``).
    """
    if theta < 0:
        raise ValueError("theta must be non-negative")
    a = float(alpha)
    if a < 1:
        raise ValueError("alpha must be >= 1")
    try:
        x = float(theta) ** a
    except OverflowError:
        raise OverflowError(f"theta**alpha overflows for theta={theta}") from None
    if not math.isfinite(x) or x >= INT64_MAX:
        raise OverflowError(f"floor(theta**alpha) exceeds the int64 range (theta={theta})")
    m = math.floor(x)
    if _near_integer(x):
        near = round(x)
        if isinstance(alpha, (int, Fraction, np.integer)):
            m = _exact_floor_rational_power(Fraction(float(theta)), as_fraction(alpha), near)
        else:
            m = _exact_floor_mp(float(theta), a, near)
    return int(m)


def power_floor_array(thetas, alpha) -> np.ndarray:
    """Vectorised :func:`power_floor` over an array of thetas (int64 result)."""
    thetas = np.asarray(thetas, dtype=float)
    a = float(alpha)
    with np.errstate(over="ignore"):
        x = thetas**a
    if thetas.size and (not np.all(np.isfinite(x)) or x.max() >= INT64_MAX):
        raise OverflowError("floor(theta**alpha) exceeds the int64 range")
    out = np.floor(x).astype(np.int64)
    r = np.round(x)
    guard = _FLOOR_GUARD_ULPS * np.spacing(np.maximum(np.abs(x), 1.0))
    for idx in np.flatnonzero(np.abs(x - r) <= guard):
        out[idx] = power_floor(float(thetas[idx]), alpha)
    return out


# ---------------------------------------------------------------------------
# exact / guarded comparison of weighted power sums against a threshold
# ---------------------------------------------------------------------------

class PowerTable:
    """Powers ``i**alpha`` for ``0 <= i < size`` plus a guarded comparator.

    With integer ``alpha`` the table is exact int64 and comparisons are exact.
    Otherwise floating sums are compared with a relative guard and the rows
    that fall inside it are recomputed in 60-digit arithmetic.
    """

    def __init__(self, alpha, size: int):
        self.alpha = as_fraction(alpha) if not isinstance(alpha, float) else alpha
        self.alpha_float = float(alpha)
        self.exact = isinstance(self.alpha, Fraction) and self.alpha.denominator == 1
        self.size = int(size)
        idx = np.arange(self.size, dtype=np.int64)
        if self.exact:
            e = int(self.alpha)
            if self.size and (self.size - 1) ** e >= 2**53:
                raise OverflowError("power table exceeds exact float range")
            self.ints = idx**e
            self.values = self.ints.astype(float)
        else:
            self.ints = None
            self.values = idx.astype(float) ** self.alpha_float

    def _mp_alpha(self):
        if isinstance(self.alpha, Fraction):
            return mpmath.mpf(self.alpha.numerator) / self.alpha.denominator
        return mpmath.mpf(self.alpha)

    def sums(self, cols, weights=None) -> np.ndarray:
        """Floating weighted sums ``sum_r w_r * cols[r]**alpha``."""
        total = np.zeros(np.shape(cols[0]), dtype=float)
        for r, c in enumerate(cols):
            w = 1 if weights is None else weights[r]
            total = total + w * self.values[c]
        return total

    def compare(self, cols, n, weights=None) -> np.ndarray:
        """Sign of ``sum_r w_r * cols[r]**alpha - n`` as an int8 array."""
        n = float(n) if not isinstance(n, Fraction) else n
        if self.exact:
            total = np.zeros(np.shape(cols[0]), dtype=np.int64)
            for r, c in enumerate(cols):
                w = 1 if weights is None else int(weights[r])
                total = total + w * self.ints[c]
            # sums stay below 2**53 so the float conversion is exact
            if isinstance(n, Fraction):
                lhs = total * n.denominator
                if np.any(np.abs(lhs) >= 2**62):
                    raise OverflowError("exact comparison exceeds int64")
                return np.sign(lhs - n.numerator).astype(np.int8)
            return np.sign(total.astype(float) - n).astype(np.int8)
        nf = float(n)
        s = self.sums(cols, weights)
        out = np.sign(s - nf).astype(np.int8)
        kk = len(cols) + 1
        guard = _CMP_GUARD_ULPS * kk * np.spacing(np.maximum(np.abs(s), abs(nf)) + 1.0)
        shaky = np.flatnonzero(np.abs(s - nf) <= guard)
        if shaky.size:
            with mpmath.workdps(_MP_DPS):
                a = self._mp_alpha()
                nm = mpmath.mpf(n.numerator) / n.denominator if isinstance(n, Fraction) else mpmath.mpf(nf)
                tol = mpmath.mpf(10) ** (-(_MP_DPS - 15)) * (abs(nm) + 1)
                flat = [np.asarray(c).reshape(-1) for c in cols]
                for j in shaky:
                    t = mpmath.mpf(0)
                    for r, c in enumerate(flat):
                        w = 1 if weights is None else weights[r]
                        t += w * mpmath.mpf(int(c[j])) ** a
                    d = t - nm
                    out.reshape(-1)[j] = 0 if abs(d) <= tol else (1 if d > 0 else -1)
        return out
