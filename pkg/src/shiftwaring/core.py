"""Problem instances and closed-form quantities.

An instance fixes (k, s, theta, eta) for the inequality

    | (x_1 - theta_1)^k + ... + (x_s - theta_s)^k - tau | < eta

over positive integers x_i.  Shift values are stored as numpy extended
floats, which on this platform carry a 64-bit significand; the named
presets are sqrt2 = sqrt(2)-1, golden = (sqrt(5)-1)/2 and e2 = e-2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._util import LD, split_ld
from .errors import ConfigError

_PRESET_VALUES = {
    "sqrt2": np.sqrt(LD(2)) - LD(1),
    "golden": (np.sqrt(LD(5)) - LD(1)) / LD(2),
    "e2": np.exp(LD(1)) - LD(2),
}


@dataclass(frozen=True)
class ShiftPreset:
    """A named shift value carried at extended precision."""

    name: str
    value: object  # np.longdouble

    def __float__(self) -> float:
        return float(self.value)


PRESETS = {name: ShiftPreset(name, val) for name, val in
           _PRESET_VALUES.items()}


def resolve_shift(spec):
    """Turn a preset name, preset object, or numeric literal into an
    extended-precision shift in (0, 1)."""
    if isinstance(spec, ShiftPreset):
        value = LD(spec.value)
    elif isinstance(spec, str):
        try:
            value = LD(PRESETS[spec].value)
        except KeyError:
            try:
                value = LD(spec)
            except ValueError:
                raise ConfigError(f"unknown shift preset {spec!r}") from None
    else:
        value = LD(spec)
    if not 0.0 < float(value) < 1.0:
        raise ConfigError(f"shift {float(value)} outside (0, 1)")
    return value


@dataclass(frozen=True)
class Instance:
    """Exponent k >= 2, variable count s >= 1, shifts in (0,1)^s, width
    eta in (0, 1]."""

    k: int
    s: int
    theta: tuple
    eta: float

    def __post_init__(self):
        if int(self.k) < 2 or int(self.k) != self.k:
            raise ConfigError("k must be an integer >= 2")
        if int(self.s) < 1 or int(self.s) != self.s:
            raise ConfigError("s must be an integer >= 1")
        if len(self.theta) != self.s:
            raise ConfigError("theta must have length s")
        for t in self.theta:
            if not 0.0 < float(t) < 1.0:
                raise ConfigError("every shift must lie in (0, 1)")
        if not 0.0 < self.eta <= 1.0:
            raise ConfigError("eta must lie in (0, 1]")

    @classmethod
    def make(cls, k, s, theta, eta) -> "Instance":
        """Build an instance, resolving preset names; a scalar theta is
        replicated across all s coordinates."""
        if isinstance(theta, (str, int, float, ShiftPreset)) or \
                isinstance(theta, np.floating):
            theta = [theta] * s
        vals = tuple(resolve_shift(t) for t in theta)
        return cls(k=int(k), s=int(s), theta=vals, eta=float(eta))

    def theta_pairs(self):
        """Shifts as (hi, lo) double pairs for backends."""
        return [split_ld(t) for t in self.theta]

    def theta64(self) -> np.ndarray:
        return np.array([float(t) for t in self.theta], dtype=np.float64)


@dataclass(frozen=True)
class Query:
    """A target tau > 0 together with the search length P = tau^(1/k)."""

    tau: float
    P: float

    @classmethod
    def from_tau(cls, inst: Instance, tau: float) -> "Query":
        if tau <= 0:
            raise ConfigError("tau must be positive")
        P = float(tau) ** (1.0 / inst.k)
        q = cls(tau=float(tau), P=P)
        if abs(P ** inst.k - tau) > 1e-12 * abs(tau):
            raise ConfigError("search length drifted from tau^(1/k)")
        return q


def shifted_power_sum(x, inst: Instance) -> float:
    """phi(x) = sum_i (x_i - theta_i)^k with compensated summation.

    Terms are formed at extended precision; the returned double is the
    rounded extended-precision total, so evaluation order cannot move the
    result by more than one ulp.
    """
    if len(x) != inst.s:
        raise ConfigError("x must have length s")
    total = LD(0)
    comp = LD(0)
    for xi, th in zip(x, inst.theta):
        term = (LD(xi) - LD(th)) ** inst.k
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return float(total + comp)


def power_sum_gap(s: int, j: int, x, k: int, theta=0.0):
    """Difference of j-th power sums between the two halves of a 2s-tuple.

    For j < k the unshifted integer value sum_i (x_i^j - x_{s+i}^j) is
    returned exactly; for j = k the halves are shifted by theta first and
    the result is a float.
    """
    if not 1 <= j <= k:
        raise ConfigError("need 1 <= j <= k")
    if len(x) != 2 * s:
        raise ConfigError("x must have length 2s")
    if j < k:
        return sum(int(x[i]) ** j - int(x[s + i]) ** j for i in range(s))
    th = resolve_shift(theta) if theta else LD(0)
    total = LD(0)
    for i in range(s):
        total += (LD(x[i]) - th) ** k - (LD(x[s + i]) - th) ** k
    return float(total)


def variable_threshold(k: int) -> Fraction:
    """Exact rational k^2 + (3k - 1)/4: variables sufficient without any
    mean-value input."""
    if k < 1:
        raise ConfigError("k must be >= 1")
    return Fraction(4 * k * k + 3 * k - 1, 4)


def conditional_threshold(k: int, j: int) -> int:
    """k^2 + k + 1 - floor((k(k+1) - j(j+1)) / (4(k-j) + 1)): variables
    sufficient under the auxiliary moment hypothesis at level j."""
    if not 1 <= j < k:
        raise ConfigError("need 1 <= j < k")
    return k * k + k + 1 - (k * (k + 1) - j * (j + 1)) // (4 * (k - j) + 1)


def best_conditional_level(k: int) -> int:
    """Nearest integer to k + 1/4 - sqrt(k/2 + 5/16), the level at which
    the conditional threshold is smallest."""
    if k < 2:
        raise ConfigError("k must be >= 2")
    j = int(math.floor(k + 0.25 - math.sqrt(0.5 * k + 0.3125) + 0.5))
    if not j < k:
        raise AssertionError("expected level below k")
    return j


def main_term_raw(k: int, s: int, eta: float, tau: float) -> float:
    """2 eta Gamma(1 + 1/k)^s Gamma(s/k)^(-1) tau^(s/k - 1).

    Gamma factors use the C library's Lanczos-class lgamma, relative error
    well under 1e-14 in this argument range.
    """
    if tau <= 0:
        raise ConfigError("tau must be positive")
    lg = s * math.lgamma(1.0 + 1.0 / k) - math.lgamma(s / k)
    return 2.0 * eta * math.exp(lg) * tau ** (s / k - 1.0)


def expected_main_term(inst: Instance, tau: float) -> float:
    """Leading-order prediction for the number of solutions at target tau."""
    return main_term_raw(inst.k, inst.s, inst.eta, tau)
