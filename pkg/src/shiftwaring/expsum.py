"""Exponential sums, their rational-point approximations, and the
oscillatory integrals that replace them on major arcs.

The generating sum is f(alpha) = sum_{1 <= x <= P} e(alpha (x - theta)^k).
Expanding the binomial turns the shifted monomial phase into an ordinary
polynomial with coefficient vector alpha_j = alpha C(k,j) (-theta)^(k-j),
so rational approximation happens simultaneously in all k coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _backend
from ._util import LD, frac_ld, nearest_int_distance, split_ld
from .core import Instance, resolve_shift
from .errors import ConfigError, HypothesisViolationError, \
    NonConvergenceError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(7)


def shifted_exp_sum(alpha: float, theta, k: int, P: float) -> complex:
    """f(alpha) = sum over integer x in [1, P] of e(alpha (x - theta)^k)."""
    th = resolve_shift(theta)
    hi, lo = split_ld(th)
    return _backend.f_point(float(alpha), hi, lo, float(P), int(k))


def exp_sum_product(alpha: float, inst: Instance, P: float) -> complex:
    """Product of the per-coordinate sums; repeated shifts are evaluated
    once and raised to their multiplicity."""
    counts = {}
    for hi, lo in inst.theta_pairs():
        counts[(hi, lo)] = counts.get((hi, lo), 0) + 1
    out = complex(1.0, 0.0)
    for (hi, lo), m in counts.items():
        val = _backend.f_point(float(alpha), hi, lo, float(P), inst.k)
        out *= val ** m
    return out


def complete_exp_sum(q: int, coeffs) -> complex:
    """Full sum over residues: sum_{x=1}^{q} e(poly(x) / q) where
    poly(x) = c_1 x + c_2 x^2 + ... with integer coefficients.

    The polynomial is reduced mod q in exact integer arithmetic, so q of
    any size is a table lookup into the q-th roots of unity.
    """
    q = int(q)
    if q < 1:
        raise ConfigError("modulus must be >= 1")
    cs = [int(c) % q for c in coeffs]
    if not cs:
        raise ConfigError("need at least one coefficient")
    roots = np.exp(2j * math.pi * np.arange(q) / q)
    total = 0.0 + 0.0j
    for x in range(1, q + 1):
        acc = 0
        for c in reversed(cs):
            acc = (acc + c) * x % q
        total += roots[acc]
    return complex(total)


def poly_phase_integral(coeffs, P: float, tol: Optional[float] = None,
                        node_budget: int = 10_000_000) -> complex:
    """I = integral over [0, P] of e(c_1 g + c_2 g^2 + ...) dg.

    Panels are sized so the phase advances at most 1/8 cycle per panel;
    the answer is accepted once halving the mesh moves it by less than
    tol (default 1e-9 P).
    """
    if P <= 0.0:
        raise ConfigError("upper limit must be positive")
    if tol is None:
        tol = 1e-9 * P
    cs = [LD(c) for c in coeffs]
    freq = sum((j + 1) * abs(float(c)) * max(1.0, P) ** j
               for j, c in enumerate(cs))
    panels = max(16, int(math.ceil(8.0 * freq * P)))

    def run(n_panels: int) -> complex:
        edges = np.linspace(0.0, P, n_panels + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        mids = 0.5 * (edges[1:] + edges[:-1])
        pts = (mids[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
        g = pts.astype(np.longdouble)
        phase = np.zeros_like(g)
        for c in reversed(cs):
            phase = (phase + c) * g
        fr = frac_ld(phase)
        vals = np.exp(2j * math.pi * fr)
        w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
        return complex(np.sum(w * vals))

    prev = None
    while True:
        if panels * len(_GL_NODES) > node_budget:
            raise NonConvergenceError(
                "oscillatory integral did not settle within node budget")
        cur = run(panels)
        if prev is not None and abs(cur - prev) <= tol:
            return cur
        prev = cur
        panels *= 2


@dataclass(frozen=True)
class CoeffVector:
    """Polynomial phase coefficients (c_0, c_1, ..., c_k); c_0 is the
    constant term contributing only a global phase."""

    values: tuple

    @property
    def degree(self) -> int:
        return len(self.values) - 1

    def constant(self) -> float:
        return self.values[0]

    def leading(self) -> float:
        return self.values[-1]


@dataclass(frozen=True)
class RationalCoeffs:
    """Common denominator q with numerators (a_1, ..., a_k)."""

    q: int
    numerators: tuple

    def __post_init__(self):
        if self.q < 1:
            raise ConfigError("denominator must be >= 1")

    @property
    def joint_divisor(self) -> int:
        """gcd of q with the numerators above the linear one."""
        d = self.q
        for a in self.numerators[1:]:
            d = math.gcd(d, int(a))
        return d


def shift_polynomial_coeffs(alpha: float, theta, k: int) -> CoeffVector:
    """Expand alpha (x - theta)^k into sum_j c_j x^j at extended
    precision, returning doubles."""
    th = resolve_shift(theta)
    a = LD(alpha)
    vals = []
    for j in range(k + 1):
        c = a * LD(math.comb(k, j)) * (-th) ** (k - j)
        vals.append(float(c))
    return CoeffVector(values=tuple(vals))


def hypothesis_bound(k: int, P: float, j: int) -> float:
    """Closeness demanded of the j-th coefficient: P^(1-j) / (2 k^2)."""
    return P ** (1 - j) / (2.0 * k * k)


def simultaneous_rational_fit(vec: CoeffVector, P: float,
                              q_max: Optional[int] = None,
                              zeta: Optional[float] = None) \
        -> Optional[RationalCoeffs]:
    """Least q putting every coefficient c_1..c_k within its closeness
    bound of a fraction a_j / q; None when no q works.

    Two window families: with q_max, the replacement-lemma bounds
    P^(1-j) / (2 k^2); with zeta, the narrower simultaneous-search
    windows P^(1-j-zeta) scanned up to q <= P^(1-zeta).

    Minimality of q forces gcd(q, a_1, ..., a_k) = 1: dividing a common
    factor out would produce a smaller admissible q.
    """
    k = vec.degree
    if k < 1:
        raise ConfigError("need degree >= 1")
    if (q_max is None) == (zeta is None):
        raise ConfigError("pass exactly one of q_max, zeta")
    if zeta is not None:
        if not 0.0 < zeta < 1.0:
            raise ConfigError("zeta must lie in (0, 1)")
        q_max = int(math.floor(P ** (1.0 - zeta)))
        bounds = [P ** (1.0 - j - zeta) for j in range(1, k + 1)]
    else:
        bounds = [hypothesis_bound(k, P, j) for j in range(1, k + 1)]
    for q in range(1, int(q_max) + 1):
        nums = []
        for j in range(1, k + 1):
            target = q * vec.values[j]
            a = round(target)
            if abs(target - a) > bounds[j - 1]:
                nums = None
                break
            nums.append(int(a))
        if nums is not None:
            g = q
            for a in nums:
                g = math.gcd(g, a)
            if g != 1:
                raise AssertionError("least q should be jointly reduced")
            return RationalCoeffs(q=q, numerators=tuple(nums))
    return None


def hypothesis_fit(alpha: float, theta, k: int, P: float,
                   q_max: Optional[int] = None,
                   zeta: Optional[float] = None) -> Optional[RationalCoeffs]:
    """Expand the shifted phase and fit, in one step."""
    return simultaneous_rational_fit(
        shift_polynomial_coeffs(alpha, theta, k), P,
        q_max=q_max, zeta=zeta)


@dataclass(frozen=True)
class ApproxResult:
    value: complex
    rc: RationalCoeffs
    error_scale: float


def approx_error_scale(rc: RationalCoeffs, k: int,
                       eps: float = 0.0) -> float:
    """q^(1 - 1/k + eps) d^(1/k), the shape of the replacement error."""
    d = rc.joint_divisor
    return rc.q ** (1.0 - 1.0 / k + eps) * d ** (1.0 / k)


def rational_point_approx(alpha: float, theta, k: int, P: float,
                          rc: Optional[RationalCoeffs] = None,
                          q_max: Optional[int] = None) -> ApproxResult:
    """Replace the exponential sum near a rational point by
    e(c_0) q^(-1) S(q, a) I(c - a/q).

    Every coefficient must meet its closeness bound for the given q;
    otherwise the replacement has no content and this raises.
    """
    vec = shift_polynomial_coeffs(alpha, theta, k)
    if rc is None:
        if q_max is None:
            raise ConfigError("supply either a rational fit or q_max")
        rc = simultaneous_rational_fit(vec, P, q_max)
        if rc is None:
            raise HypothesisViolationError(
                "no denominator within q_max meets the closeness bounds")
    for j in range(1, k + 1):
        err = abs(rc.q * vec.values[j] - rc.numerators[j - 1])
        if err > hypothesis_bound(k, P, j) + 1e-12:
            raise HypothesisViolationError(
                f"coefficient {j} misses its closeness bound")
    S = complete_exp_sum(rc.q, rc.numerators)
    beta = [vec.values[j] - rc.numerators[j - 1] / rc.q
            for j in range(1, k + 1)]
    I = poly_phase_integral(beta, P)
    phase = np.exp(2j * math.pi * frac_ld(np.array([LD(vec.values[0])]))[0])
    value = complex(phase) * S * I / rc.q
    return ApproxResult(value=value, rc=rc,
                        error_scale=approx_error_scale(rc, k))


def min_distance_average(mu: float, alpha_last: float, P: float,
                         k: int) -> float:
    """Average over y in [1, P] of min(P^(k-1), 1 / ||mu k y + c||),
    normalized by P; || || is distance to the nearest integer."""
    if P < 1.0:
        raise ConfigError("need P >= 1")
    return _backend.psi_avg(float(mu), float(alpha_last), float(P), int(k))


def nearest_distance(x: float) -> float:
    """Distance from x to the nearest integer."""
    return nearest_int_distance(x)
