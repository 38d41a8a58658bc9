"""Rational approximation, arc bands, and approximable-set geometry."""

from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest

from shiftwaring.dissection import (
    ARC_CLASSES,
    ArcLabel,
    DissectionParams,
    RationalApprox,
    approximable_intervals,
    approximable_measure_bound,
    best_rational,
    classify_frequency,
    is_poorly_approximable,
)
from shiftwaring.core import Instance
from shiftwaring.errors import ConfigError


def test_params_defaults_and_validation():
    p = DissectionParams(P=10_000.0, k=2)
    assert p.Q == pytest.approx(10_000.0 ** 0.25 / 4.0)
    assert p.T == pytest.approx(math.log(10_000.0))
    assert p.t_exp == pytest.approx(0.9 / 4.0)
    assert p.central_radius == pytest.approx(10_000.0 ** (0.5 - 2))
    assert p.approx_window == \
        Fraction(p.Q) / Fraction(10_000.0) ** 2
    assert p.large_sum_threshold == \
        pytest.approx(10_000.0 ** (1.0 - p.t_exp))
    with pytest.raises(ConfigError):
        DissectionParams(P=1.0, k=2)
    with pytest.raises(ConfigError):
        DissectionParams(P=100.0, k=1)
    with pytest.raises(ConfigError):
        DissectionParams(P=100.0, k=2, xi=1.0)
    with pytest.raises(ConfigError):
        DissectionParams(P=100.0, k=3)  # default Q needs P >= (2k)^4
    DissectionParams(P=100.0, k=3, Q=4.0)
    with pytest.raises(ConfigError):
        DissectionParams(P=100.0, k=2, Q=0.5)
    with pytest.raises(ConfigError):
        DissectionParams(P=100.0, k=2, Q=101.0)
    with pytest.raises(ConfigError):
        DissectionParams(P=100.0, k=2, t_exp=0.3)


def test_best_rational_matches_limit_denominator():
    rng = random.Random(1234)
    for _ in range(300):
        alpha = rng.uniform(-4.0, 4.0)
        q_max = rng.randint(1, 500)
        got = best_rational(alpha, q_max)
        ref = Fraction(alpha).limit_denominator(q_max)
        # both minimize |q alpha - a|; the scaled errors must agree
        got_err = abs(got.q * Fraction(alpha) - got.a)
        ref_err = abs(ref.denominator * Fraction(alpha) - ref.numerator)
        assert got_err <= ref_err, (alpha, q_max)
        assert got.q <= q_max
        assert math.gcd(got.a, got.q) == 1
        # Dirichlet: the best error is always below 1 / (q_max + 1)
        assert got_err * (q_max + 1) < 1


def test_best_rational_exact_fractions():
    got = best_rational(0.375, 100)
    assert (got.a, got.q) == (3, 8) and got.err == 0.0
    got = best_rational(2.0, 10)
    assert (got.a, got.q) == (2, 1)
    with pytest.raises(ConfigError):
        best_rational(0.5, 0)


def test_rational_approx_validation():
    with pytest.raises(ConfigError):
        RationalApprox(a=2, q=4, err=0.1)
    with pytest.raises(ConfigError):
        RationalApprox(a=1, q=0, err=0.1)
    with pytest.raises(ConfigError):
        RationalApprox(a=1, q=3, err=0.7)
    RationalApprox(a=1, q=1, err=0.7)


def test_membership_matches_exact_scan():
    params = DissectionParams(P=50.0, k=2, Q=6.0)
    window = params.approx_window
    rng = random.Random(42)
    for _ in range(500):
        alpha = rng.uniform(0.0, 2.0)
        frac = Fraction(alpha)
        scan_hit = any(
            abs(q * frac - round(q * frac)) <= window
            for q in range(1, 7))
        assert is_poorly_approximable(alpha, params) == (not scan_hit)


def test_membership_at_exact_window_edge():
    # dyadic P and Q make the window 4/1024 = 1/256, so the edge of the
    # q = 1 interval around 0 is an exactly representable float
    params = DissectionParams(P=32.0, k=2, Q=4.0)
    edge = params.approx_window
    assert edge == Fraction(1, 256)
    assert not is_poorly_approximable(float(edge), params)
    beyond = math.nextafter(float(edge), 1.0)
    assert is_poorly_approximable(beyond, params)


def test_classify_band_boundaries():
    params = DissectionParams(P=100.0, k=2, Q=5.0)
    rad, T = params.central_radius, params.T
    assert classify_frequency(0.0, params).band == "major"
    assert classify_frequency(0.5 * rad, params).band == "major"
    assert classify_frequency(-0.5 * rad, params).band == "major"
    # on the radius itself the point leaves the central band
    assert classify_frequency(rad, params).band == "minor"
    assert classify_frequency(T, params).band == "minor"
    assert classify_frequency(T * 1.0001, params).band == "trivial"
    assert classify_frequency(-2.0 * T, params).band == "trivial"


def test_classify_witness_layers():
    params = DissectionParams(P=100.0, k=2, Q=5.0)
    # 1/2 is approximable with witness q = 2 at any reasonable window
    lab = classify_frequency(0.5, params, with_large_sum=False)
    assert lab.band == "minor"
    assert lab.witness == ("N", 1, 2)
    assert lab.large_sum is None
    assert lab.serialize() == "minor:N:1/2"
    assert lab.coarse_class() == "minor:N"
    # the golden ratio minus 1 is badly approximable
    lab = classify_frequency((math.sqrt(5) - 1) / 2, params)
    assert lab.witness == ("n",)
    assert lab.serialize() == "minor:n"
    assert lab.coarse_class() == "minor:n"


def test_classify_large_sum_flag():
    params = DissectionParams(P=100.0, k=2, Q=5.0)
    inst = Instance.make(2, 1, 0.5, 1.0)
    # at an integer frequency the sum has modulus floor(P) = P^1, far
    # above the threshold P^(1 - t_exp)
    lab = classify_frequency(1.0, params, inst=inst)
    assert lab.witness == ("N", 1, 1)
    assert lab.large_sum is True
    # golden-shift irrational point keeps no witness, hence no flag
    lab = classify_frequency((math.sqrt(5) - 1) / 2, params, inst=inst)
    assert lab.large_sum is None


def test_arc_label_validation():
    with pytest.raises(ConfigError):
        ArcLabel(band="huge")
    with pytest.raises(ConfigError):
        ArcLabel(band="major", witness=("n",))
    with pytest.raises(ConfigError):
        ArcLabel(band="minor")
    with pytest.raises(ConfigError):
        ArcLabel(band="minor", witness=("n",), large_sum=True)
    with pytest.raises(ConfigError):
        ArcLabel(band="minor", witness=("N", 1))
    lab = ArcLabel(band="trivial", witness=("N", 3, 7), large_sum=False)
    assert lab.serialize() == "trivial:N:3/7"
    assert set(ARC_CLASSES) == {"major", "minor:N", "minor:n",
                                "trivial:N", "trivial:n"}


def test_approximable_intervals_cover_their_centres():
    params = DissectionParams(P=40.0, k=2, Q=4.0)
    intervals = approximable_intervals(params, 0.0, 2.0)
    assert intervals
    for s, e in intervals:
        assert isinstance(s, Fraction) and isinstance(e, Fraction)
        assert s < e
    # intervals are disjoint and sorted
    for (s1, e1), (s2, e2) in zip(intervals, intervals[1:]):
        assert e1 < s2
    # every a/q with q <= Q inside [0, 2] lies in some interval
    for q in range(1, 5):
        for a in range(0, 2 * q + 1):
            c = Fraction(a, q)
            assert any(s <= c <= e for s, e in intervals), (a, q)


def test_approximable_intervals_match_membership():
    params = DissectionParams(P=40.0, k=2, Q=4.0)
    intervals = approximable_intervals(params, 0.0, 1.0)
    rng = random.Random(7)
    for _ in range(400):
        alpha = rng.uniform(0.0, 1.0)
        inside = any(s <= Fraction(alpha) <= e for s, e in intervals)
        assert inside == (not is_poorly_approximable(alpha, params))
    with pytest.raises(ConfigError):
        approximable_intervals(params, 1.0, 1.0)


def test_measure_bound_dominates_exact_mass():
    # the exact union mass per unit interval stays below 2 Q^2 P^-k
    for P, k, Q in ((40.0, 2, 4.0), (100.0, 2, 7.0), (30.0, 3, 3.0)):
        params = DissectionParams(P=P, k=k, Q=Q)
        intervals = approximable_intervals(params, 0.0, 1.0)
        mass = sum(min(e, Fraction(1)) - max(s, Fraction(0))
                   for s, e in intervals)
        assert mass <= Fraction(approximable_measure_bound(params))
