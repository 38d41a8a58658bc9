"""Quadrature engine: count reconstruction, arc regrouping, moments."""

from __future__ import annotations

import math

import numpy as np
import pytest

from shiftwaring.core import Instance
from shiftwaring.counting import count_meet_middle, weighted_solution_count
from shiftwaring.dissection import ARC_CLASSES, DissectionParams
from shiftwaring.errors import ConfigError, MeshTooCoarseError
from shiftwaring.integrator import (
    QuadratureResult,
    SlopeFit,
    arc_contributions,
    default_truncation,
    dh_integral,
    dh_integral_multi,
    hua_moment,
    kernel_transform,
    minor_moment,
    slope_estimate,
)
from shiftwaring.kernels import (
    KernelParams,
    KernelSpec,
    fourier_transform,
    smoothing_scale,
)


def test_quadrature_result_validation():
    QuadratureResult(value=1.0 + 0j, tail_bound=0.1, disc_error=0.0,
                     panels=8)
    with pytest.raises(ConfigError):
        QuadratureResult(value=1.0 + 0j, tail_bound=-0.1,
                         disc_error=0.0, panels=8)
    with pytest.raises(ConfigError):
        QuadratureResult(value=1.0 + 0j, tail_bound=0.1,
                         disc_error=-1.0, panels=8)
    with pytest.raises(ConfigError):
        QuadratureResult(value=1.0 + 0j, tail_bound=0.1,
                         disc_error=0.0, panels=0)
    r = QuadratureResult(value=0j, tail_bound=0.25, disc_error=0.5,
                         panels=8)
    assert r.certified_error == 0.75


def test_slope_fit_validation():
    with pytest.raises(ConfigError):
        SlopeFit(exponent=1.0, intercept=0.0, residual=0.0,
                 points=((1.0, 1.0),))
    with pytest.raises(ConfigError):
        slope_estimate([(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)])
    with pytest.raises(ConfigError):
        slope_estimate([(1.0, 1.0), (2.0, 2.0), (3.0, 3.0),
                        (4.0, -4.0)])


def test_slope_estimate_exact_power_law():
    fit = slope_estimate([(p, 3.0 * p ** 2.5) for p in (2, 4, 8, 16)])
    assert fit.exponent == pytest.approx(2.5, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
    assert fit.residual == pytest.approx(0.0, abs=1e-12)
    assert len(fit.points) == 4


def test_default_truncation():
    assert default_truncation(1.0, 100.0) == \
        pytest.approx(max(10.0 * math.log(100.0), 1000.0))
    assert default_truncation(0.01, 100.0) == pytest.approx(100_000.0)
    # identity smoothing: T(P) = P
    assert default_truncation(1.0, 5000.0, "identity") == \
        pytest.approx(50_000.0)


def test_dh_integral_reconstructs_weighted_count():
    # independent of the acceptance sweep: two fixed instances
    for inst, tau, A in (
            (Instance.make(2, 2, ("golden", "sqrt2"), 1.0), 50.0, 300.0),
            (Instance.make(2, 1, 0.25, 0.8), 90.0, 400.0),
            (Instance.make(3, 2, (0.5, "e2"), 0.9), 60.0, 500.0)):
        spec = KernelSpec("dh", KernelParams(inst.eta, 0.5 * inst.eta))
        res = dh_integral(inst, tau, spec, A=A)
        if inst.s >= 2:
            w = count_meet_middle(inst, tau, weighted=True).value
        else:
            w = weighted_solution_count(inst, tau)
        assert abs(res.value.real - w) <= res.certified_error
        assert abs(res.value.imag) <= res.certified_error
        assert res.panels >= 8


def test_dh_integral_multi_matches_single():
    inst = Instance.make(2, 2, "golden", 1.0)
    params = KernelParams(1.0, 0.5)
    specs = [KernelSpec("dh", params), KernelSpec("k1", params)]
    multi = dh_integral_multi(inst, 30.0, specs, A=200.0)
    single = dh_integral(inst, 30.0, specs[0], A=200.0)
    assert multi[0].value == single.value
    assert multi[0].tail_bound == single.tail_bound
    with pytest.raises(ConfigError):
        dh_integral_multi(inst, 30.0, [], A=200.0)


def test_dh_integral_workers_bit_identical():
    inst = Instance.make(2, 2, ("golden", 0.5), 1.0)
    spec = KernelSpec("dh", KernelParams(1.0, 0.5))
    one = dh_integral(inst, 40.0, spec, A=220.0, workers=1)
    four = dh_integral(inst, 40.0, spec, A=220.0, workers=4)
    assert one.value == four.value
    assert one.disc_error == four.disc_error


def test_truncation_tail_monotone():
    # doubling A must not grow the certified truncation term, and the
    # two values should agree within their combined certified errors
    inst = Instance.make(2, 1, "golden", 1.0)
    spec = KernelSpec("dh", KernelParams(1.0, 0.5))
    near = dh_integral(inst, 25.0, spec, A=150.0)
    far = dh_integral(inst, 25.0, spec, A=300.0)
    assert far.tail_bound < near.tail_bound
    assert abs(far.value - near.value) <= \
        near.certified_error + far.certified_error


def test_mesh_cap_enforced():
    inst = Instance.make(2, 2, "golden", 1.0)
    spec = KernelSpec("dh", KernelParams(1.0, 0.5))
    with pytest.raises(MeshTooCoarseError):
        dh_integral(inst, 50.0, spec, A=100.0, mesh=1.0)
    # a mesh below the cap is accepted
    rate = 50.0 + 2 * 50.0
    dh_integral(inst, 50.0, spec, A=2.0, mesh=0.5 / (8.0 * rate))


def test_arc_contributions_partition_the_integral():
    inst = Instance.make(2, 2, "golden", 1.0)
    tau = 36.0
    P = 6.0
    spec = KernelSpec("dh", KernelParams(1.0, 0.5))
    params = DissectionParams(P=P, k=2, Q=3.0)
    parts = arc_contributions(inst, tau, spec, params, A=120.0)
    assert set(parts) == set(ARC_CLASSES)
    whole = dh_integral(inst, tau, spec, A=120.0)
    regrouped = sum(parts[c].value for c in ARC_CLASSES)
    assert abs(regrouped - whole.value) < 1e-9 * max(
        1.0, abs(whole.value))
    # the truncation tail is attributed to the far unapproximable class
    assert parts["trivial:n"].tail_bound == whole.tail_bound
    for name in ("major", "minor:N", "minor:n", "trivial:N"):
        assert parts[name].tail_bound == 0.0


def test_arc_contributions_requires_consistent_P():
    inst = Instance.make(2, 2, "golden", 1.0)
    spec = KernelSpec("dh", KernelParams(1.0, 0.5))
    with pytest.raises(ConfigError):
        arc_contributions(inst, 36.0, spec,
                          DissectionParams(P=7.0, k=2, Q=3.0), A=120.0)
    with pytest.raises(ConfigError):
        arc_contributions(inst, 36.0, spec,
                          DissectionParams(P=6.0, k=2, Q=3.0), A=1.0)


def test_minor_moment_basic_properties():
    spec = KernelSpec("dh", KernelParams(1.0, 0.5))
    params = DissectionParams(P=16.0, k=2, Q=2.0)
    res = minor_moment("golden", 4, 2, 16.0, spec, params, A=30.0)
    assert res.value.imag == 0.0
    assert res.value.real > 0.0
    assert res.tail_bound == pytest.approx(
        2.0 / (math.pi ** 2 * 1.0 * 30.0) * 16.0 ** 4)
    with pytest.raises(ConfigError):
        minor_moment("golden", 3, 2, 16.0, spec, params, A=30.0)
    with pytest.raises(ConfigError):
        minor_moment("golden", 4, 2, 17.0, spec, params, A=30.0)
    with pytest.raises(ConfigError):
        minor_moment("golden", 4, 2, 16.0, spec, params, A=0.5)


def test_minor_moment_below_whole_line_moment():
    spec = KernelSpec("dh", KernelParams(1.0, 0.5))
    params = DissectionParams(P=16.0, k=2, Q=2.0)
    restricted = minor_moment("golden", 6, 2, 16.0, spec, params,
                              A=50.0)
    full = hua_moment("golden", 2, 2, 16.0, 1.0, A=50.0)
    assert 0.0 < restricted.value.real <= full.value.real * (1 + 1e-9)


def test_hua_moment_first_level_matches_diagonal():
    # j = 1: moment of order 2 counts solution pairs of
    # (x - th)^k = (y - th)^k within the kernel window, which is the
    # diagonal count floor(P), up to the certified error
    for P in (12.0, 20.0):
        res = hua_moment("golden", 1, 2, P, 1.0, A=400.0)
        assert abs(res.value.real - math.floor(P)) <= \
            res.certified_error + 1e-6 * P
    with pytest.raises(ConfigError):
        hua_moment("golden", 0, 2, 12.0, 1.0, A=50.0)
    with pytest.raises(ConfigError):
        hua_moment("golden", 1, 2, 12.0, 0.0, A=50.0)


def test_hua_moment_growth_sweep():
    # order-2 moments grow like P: the fitted exponent sits near 1
    pts = []
    for P in (8.0, 16.0, 32.0, 64.0):
        res = hua_moment("golden", 1, 2, P, 1.0, A=200.0)
        pts.append((P, res.value.real))
    fit = slope_estimate(pts)
    assert abs(fit.exponent - 1.0) < 0.05


def test_kernel_transform_matches_closed_forms():
    params = KernelParams(0.5, 0.2)
    for kind in ("dh", "k1", "k2plus", "k2minus"):
        spec = KernelSpec(kind, params)
        for t in (0.0, 0.13, 0.5, 1.2):
            res = kernel_transform(spec, t)
            assert abs(res.value.real - fourier_transform(spec, t)) \
                <= 1e-7, (kind, t)
            assert res.value.imag == 0.0
    # signed kernels integrate numerically even without a closed form
    res = kernel_transform(KernelSpec("plus", params), 0.0)
    # transform at zero is the signed mass: integral of K_plus equals
    # (2 eta + delta) * 1 at t = 0 sandwiched around 1
    assert 0.9 <= res.value.real <= 1.3


def test_smoothing_scale_consistency_with_integrator():
    # from_length and default_truncation should use the same L
    P = 2000.0
    params = KernelParams.from_length(1.0, P)
    assert params.delta == pytest.approx(1.0 / smoothing_scale(P))
