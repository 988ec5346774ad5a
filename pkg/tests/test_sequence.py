import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from sumset_fuchs import (
    CoverageError, Parameters, derive_seed, index_bound_for_n, midpoint_sequence,
    read_sequence, sample_sequence, sequence_for, write_sequence,
)
from sumset_fuchs.kernel import power_floor


P2 = Parameters(2, 1)
P3 = Parameters(3, 1)


def test_reproducible():
    a = sample_sequence(P3, 5, 42)
    b = sample_sequence(P3, 5, 42)
    assert np.array_equal(a.thetas, b.thetas) and np.array_equal(a.a, b.a)


def test_prefix_stable_when_extended():
    short = sample_sequence(P2, 100, 9)
    long = sample_sequence(P2, 1000, 9)
    assert np.array_equal(short.thetas, long.thetas[:100])


@settings(max_examples=30)
@given(st.integers(0, 2**64 - 1), st.integers(1, 2000))
def test_theta_range_and_floor(seed, m):
    s = sample_sequence(Parameters(3, 2), m, seed)
    i = np.arange(m)
    assert ((s.thetas >= i) & (s.thetas < i + 1)).all()
    assert (np.diff(s.a) >= 0).all()


def test_values_match_power_floor():
    s = sample_sequence(Parameters(3, "3/2"), 300, 1)
    assert [power_floor(float(t), s.params.alpha) for t in s.thetas] == list(s.a)


def test_fractional_parts_uniform():
    s = sample_sequence(P2, 20000, derive_seed(0, "uniformity", 0))
    u = s.thetas - np.arange(s.m)
    assert stats.kstest(u, "uniform").pvalue > 1e-3
    r = np.corrcoef(u[:-1], u[1:])[0, 1]
    assert abs(r) < 4 / math.sqrt(s.m)


def test_streams_uncorrelated():
    u = [sample_sequence(P2, 20000, derive_seed(5, "sequence", i)).thetas % 1 for i in range(2)]
    assert abs(np.corrcoef(u[0], u[1])[0, 1]) < 4 / math.sqrt(20000)


def test_derive_seed_distinct():
    seeds = {derive_seed(0, tag, i) for tag in ("a", "b") for i in range(500)}
    assert len(seeds) == 1000
    assert derive_seed(3, "x", 1) == derive_seed(3, "x", 1)


@pytest.mark.parametrize("p,m,expected", [
    (P2, 4, [0, 2, 6, 12]),
    (P3, 3, [0, 3, 15]),
    (P2, 1, [0]),
    (Parameters(5, 1), 1, [0]),
])
def test_midpoint(p, m, expected):
    assert list(midpoint_sequence(p, m).a) == expected


def test_midpoint_hand_oracle():
    # (i + 1/2)**2 = i*i + i + 1/4 floors to i*(i + 1)
    assert list(midpoint_sequence(P2, 50).a) == [i * (i + 1) for i in range(50)]


@pytest.mark.parametrize("p,n,expected", [(P2, 100, 11), (P3, 1000, 11), (P2, 5, 3)])
def test_index_bound(p, n, expected):
    assert index_bound_for_n(p, n) == expected


@given(st.integers(1, 10**7))
def test_index_bound_is_tight(n):
    for p in (P2, P3, Parameters(3, 2)):
        m = index_bound_for_n(p, n)
        # index m - 1 may still matter, index m never does
        assert m**p.alpha > n >= (m - 1) ** p.alpha


def test_coverage_error():
    s = sample_sequence(P2, 3, 0)
    assert s.covers(8.9) and not s.covers(9)
    with pytest.raises(CoverageError):
        s.require(20)


def test_sequence_for_midpoint_ignores_seed():
    a = sequence_for(P2, 100, None, "midpoint")
    assert a.seed is None and a.m == 11


def test_roundtrip(tmp_path):
    s = sample_sequence(Parameters(3, "3/2"), 50, 123)
    back = read_sequence(write_sequence(s, tmp_path / "s.txt"))
    assert back.params == s.params and back.seed == 123
    assert np.array_equal(back.thetas, s.thetas) and np.array_equal(back.a, s.a)


def test_midpoint_header_has_no_seed(tmp_path):
    path = write_sequence(midpoint_sequence(P2, 4), tmp_path / "m.txt")
    head = path.read_text().splitlines()[0]
    assert "seed=" not in head and "mode=midpoint" in head
    assert read_sequence(path).seed is None


def test_slim_roundtrip(tmp_path):
    s = sample_sequence(P2, 20, 4).slim()
    back = read_sequence(write_sequence(s, tmp_path / "s.txt"))
    assert back.thetas is None and np.array_equal(back.a, s.a)
