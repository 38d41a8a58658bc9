"""Rational approximation of frequencies and arc classification.

Frequencies split three ways by magnitude (central, middling, far) and,
away from the centre, by approximability: a frequency lands in the
well-approximable family when some coprime a/q with q <= Q satisfies
|q alpha - a| <= Q P^(-k), and the poorly approximable complement is the
set the moment bounds integrate over.  Well-approximable frequencies are
further split by whether a designated coordinate's exponential sum is
large.

All approximability decisions run in exact rational arithmetic: a float
frequency is a dyadic rational, so continued fractions, witness errors,
and threshold comparisons are exact, and the verdict provably matches an
exhaustive denominator scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import ConfigError
from .kernels import smoothing_scale  # noqa: F401  (shared T/L plumbing)


def _growth_value(P: float, smoothing="log") -> float:
    """T(P) itself for the named growth function."""
    if callable(smoothing):
        return float(smoothing(P))
    if smoothing == "log":
        return math.log(P)
    if smoothing == "identity":
        return P
    if smoothing == "sqrt":
        return math.sqrt(P)
    raise ConfigError(f"unknown smoothing choice {smoothing!r}")


@dataclass(frozen=True)
class RationalApprox:
    """Reduced fraction a/q with its scaled error |q alpha - a|."""

    a: int
    q: int
    err: float

    def __post_init__(self):
        if self.q < 1:
            raise ConfigError("denominator must be positive")
        if math.gcd(self.a, self.q) != 1:
            raise ConfigError("fraction must be reduced")
        if self.q > 1 and not self.err < 0.5:
            raise ConfigError("scaled error must be below 1/2 for q > 1")


@dataclass(frozen=True)
class DissectionParams:
    """Geometry of the frequency dissection.

    xi in (0, 1) sets the central-arc radius P^(xi-k); T bounds the
    middling range; Q is the approximability depth, defaulting to
    P^(1/4) / (2k) (which presumes P >= (2k)^4) but overridable anywhere
    in [1, P]; t_exp drives the large-sum threshold P^(1 - t_exp) and
    must keep 2k(k-1) t_exp below 1.
    """

    P: float
    k: int
    xi: float = 0.5
    Q: Optional[float] = None
    T: Optional[float] = None
    t_exp: Optional[float] = None
    smoothing: str = "log"

    def __post_init__(self):
        if self.P <= 1.0:
            raise ConfigError("P must exceed 1")
        if self.k < 2:
            raise ConfigError("k must be >= 2")
        if not 0.0 < self.xi < 1.0:
            raise ConfigError("xi must lie in (0, 1)")
        if self.Q is None:
            q = self.P ** 0.25 / (2 * self.k)
            if q < 1.0:
                raise ConfigError(
                    "default Q needs P >= (2k)^4; pass Q explicitly")
            object.__setattr__(self, "Q", q)
        elif not 1.0 <= self.Q <= self.P:
            raise ConfigError("Q must lie in [1, P]")
        if self.T is None:
            object.__setattr__(
                self, "T", _growth_value(self.P, self.smoothing))
        if self.T <= 0.0:
            raise ConfigError("T must be positive")
        if self.t_exp is None:
            object.__setattr__(
                self, "t_exp", 0.9 / (2 * self.k * (self.k - 1)))
        if not 2 * self.k * (self.k - 1) * self.t_exp < 1.0:
            raise ConfigError("t_exp violates 2k(k-1) t < 1")

    @property
    def central_radius(self) -> float:
        return self.P ** (self.xi - self.k)

    @property
    def approx_window(self) -> Fraction:
        """Exact Q P^(-k), the witness-error threshold."""
        return Fraction(self.Q) / Fraction(self.P) ** self.k

    @property
    def large_sum_threshold(self) -> float:
        return self.P ** (1.0 - self.t_exp)


def _convergents(num: int, den: int):
    """Continued-fraction convergents (a, q) of num/den, in order."""
    p0, q0 = 1, 0
    p1, q1 = 0, 1
    while den != 0:
        step = num // den
        num, den = den, num - step * den
        p0, p1 = step * p0 + p1, p0
        q0, q1 = step * q0 + q1, q0
        yield p0, q0


def best_rational(alpha: float, q_max: int) -> RationalApprox:
    """Least denominator q <= q_max minimizing |q alpha - a|.

    Best approximations in the scaled sense are exactly the convergents,
    so the answer is the last convergent with q <= q_max; the scaled
    error strictly decreases along the ladder, which also makes that
    witness the least q attaining the minimum.
    """
    if q_max < 1:
        raise ConfigError("q_max must be >= 1")
    frac = Fraction(alpha)
    best = None
    for a, q in _convergents(frac.numerator, frac.denominator):
        if q > q_max:
            break
        best = (a, q)
    if best is None:
        raise AssertionError("first convergent has denominator 1")
    a, q = best
    err = abs(q * frac - a)
    approx = RationalApprox(a=a, q=q, err=float(err))
    if not err * (q_max + 1) < 1:
        raise AssertionError("Dirichlet bound violated")
    return approx


def _least_witness(alpha: float, params: DissectionParams):
    """Smallest q <= Q with |q alpha - a| within the window, or None.

    If any q <= Q satisfies the window then so does the last convergent
    below that q, so scanning convergents in order finds the least
    witness; minimality forces gcd(a, q) = 1.
    """
    frac = Fraction(alpha)
    window = params.approx_window
    q_cap = math.floor(params.Q)
    for a, q in _convergents(frac.numerator, frac.denominator):
        if q > q_cap:
            break
        err = abs(q * frac - a)
        if err <= window:
            # exact half-integer ties prefer the smaller numerator
            alt = a - 1 if q * frac - a == Fraction(-1, 2) else a
            if math.gcd(alt, q) != 1:
                raise AssertionError("least witness should be reduced")
            return alt, q, float(abs(q * frac - alt))
    return None


def is_poorly_approximable(alpha: float, params: DissectionParams) -> bool:
    """True when no denominator up to Q meets the approximation window,
    so the least one meeting it exceeds Q."""
    return _least_witness(alpha, params) is None


@dataclass(frozen=True)
class ArcLabel:
    """Dissection verdict for one frequency.

    band is "major", "minor", or "trivial".  witness is None when the
    approximability layer does not apply (major band), ("n",) for poorly
    approximable, or ("N", a, q) with the least-q witness.  large_sum is
    set only inside an ("N", a, q) witness: whether the designated
    coordinate's sum meets the P^(1 - t_exp) threshold.
    """

    band: str
    witness: Optional[tuple] = None
    large_sum: Optional[bool] = None

    def __post_init__(self):
        if self.band not in ("major", "minor", "trivial"):
            raise ConfigError(f"unknown band {self.band!r}")
        if self.band == "major":
            if self.witness is not None or self.large_sum is not None:
                raise ConfigError("major band carries no sublabels")
        else:
            if self.witness is None:
                raise ConfigError("non-major bands need a witness verdict")
            if self.witness[0] == "n":
                if self.large_sum is not None:
                    raise ConfigError(
                        "large-sum flag applies only to witnessed points")
            elif self.witness[0] != "N" or len(self.witness) != 3:
                raise ConfigError(f"bad witness {self.witness!r}")

    def serialize(self) -> str:
        if self.band == "major":
            return "major"
        if self.witness[0] == "n":
            return f"{self.band}:n"
        _, a, q = self.witness
        return f"{self.band}:N:{a}/{q}"

    def coarse_class(self) -> str:
        """Label without the (a, q) detail, for aggregation."""
        if self.band == "major":
            return "major"
        return f"{self.band}:{'n' if self.witness[0] == 'n' else 'N'}"


ARC_CLASSES = ("major", "minor:N", "minor:n", "trivial:N", "trivial:n")


def _band(alpha: float, params: DissectionParams) -> str:
    a = abs(alpha)
    if a < params.central_radius:
        return "major"
    if a <= params.T:
        return "minor"
    return "trivial"


def classify_frequency(alpha: float, params: DissectionParams,
                       inst=None, theta3_index: int = 0,
                       with_large_sum: bool = True) -> ArcLabel:
    """Full arc label for one frequency.

    The large-sum flag needs an instance to supply the designated shift;
    pass with_large_sum=False (or inst=None) to skip that evaluation when
    only the band and witness layers matter.
    """
    band = _band(alpha, params)
    if band == "major":
        return ArcLabel(band="major")
    hit = _least_witness(alpha, params)
    if hit is None:
        return ArcLabel(band=band, witness=("n",))
    a, q, _ = hit
    large = None
    if with_large_sum and inst is not None:
        from .expsum import shifted_exp_sum
        val = shifted_exp_sum(alpha, inst.theta[theta3_index],
                              inst.k, params.P)
        large = abs(val) >= params.large_sum_threshold
    return ArcLabel(band=band, witness=("N", a, q), large_sum=large)


def approximable_measure_bound(params: DissectionParams) -> float:
    """2 Q^2 P^(-k): over-count of the well-approximable measure per
    unit interval, summing window lengths 2 Q P^(-k) / q over all a, q."""
    return 2.0 * params.Q * params.Q * params.P ** (-params.k)


def approximable_intervals(params: DissectionParams, lo: float,
                           hi: float):
    """Merged exact intervals of well-approximable frequencies in
    [lo, hi]: unions of a/q +- (Q P^(-k)) / q over q <= Q.

    Returned as (Fraction, Fraction) pairs so membership at the edges
    matches the exact verdicts; interval count is O((hi - lo) Q^2).
    """
    if hi <= lo:
        raise ConfigError("need lo < hi")
    window = params.approx_window
    q_cap = math.floor(params.Q)
    raw = []
    flo, fhi = Fraction(lo), Fraction(hi)
    for q in range(1, q_cap + 1):
        half = window / q
        a_lo = math.floor((flo - half) * q)
        a_hi = math.ceil((fhi + half) * q)
        for a in range(a_lo, a_hi + 1):
            centre = Fraction(a, q)
            raw.append((centre - half, centre + half))
    raw.sort()
    merged = []
    for s, e in raw:
        if merged and s <= merged[-1][1]:
            if e > merged[-1][1]:
                merged[-1] = (merged[-1][0], e)
        else:
            merged.append((s, e))
    return [(s, e) for s, e in merged if e >= flo and s <= fhi]
