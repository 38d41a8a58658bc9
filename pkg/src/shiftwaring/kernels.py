"""Smoothing kernels for the counting integral.

Six kernels share one parameter pair (eta, delta).  The plain
Davenport-Heilbronn kernel ("dh") has a triangle transform of height 1;
the signed pair ("plus"/"minus") has trapezoid transforms squeezing the
indicator of [-eta, eta] from above and below; "k1" and "k2plus"/
"k2minus" are the nonnegative factors whose product is the squared
modulus of the signed pair.  The exact trapezoids are not exposed:
callers get the indicator sandwich, which is all downstream bounds use.

delta is tied to the search length through a smoothing scale
L = min(log T(P), log P) with delta = eta / L.  T is a configurable
growth function; the default stand-in is T(P) = log P.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, TransformUnavailableError

KINDS = ("dh", "plus", "minus", "k1", "k2plus", "k2minus")

SMOOTHING_CHOICES = ("log", "identity", "sqrt")


def smoothing_scale(P: float, smoothing="log") -> float:
    """L = min(log T(P), log P) for the selected growth function T."""
    if P <= 1.0:
        raise ConfigError("search length must exceed 1")
    if callable(smoothing):
        T = float(smoothing(P))
    elif smoothing == "log":
        T = math.log(P)
    elif smoothing == "identity":
        T = P
    elif smoothing == "sqrt":
        T = math.sqrt(P)
    else:
        raise ConfigError(f"unknown smoothing choice {smoothing!r}")
    if T <= 1.0:
        raise ConfigError("growth function must exceed 1 at this length")
    L = min(math.log(T), math.log(P))
    if L <= 0.0:
        raise ConfigError("smoothing scale must be positive")
    return L


@dataclass(frozen=True)
class KernelParams:
    """Width eta and smoothing width delta, with 0 < delta < 2 eta."""

    eta: float
    delta: float

    def __post_init__(self):
        if not self.eta > 0.0:
            raise ConfigError("eta must be positive")
        if not 0.0 < self.delta < 2.0 * self.eta:
            raise ConfigError("delta must lie in (0, 2 eta)")

    @classmethod
    def from_length(cls, eta: float, P: float, smoothing="log") \
            -> "KernelParams":
        """Derive delta = eta / L from the search length."""
        L = smoothing_scale(P, smoothing)
        return cls(eta=float(eta), delta=float(eta) / L)

    @property
    def widths(self):
        return {"dh": self.eta, "k1": self.delta,
                "k2plus": 2.0 * self.eta + self.delta,
                "k2minus": 2.0 * self.eta - self.delta}


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    params: KernelParams

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kernel kind {self.kind!r}")


def _sinc(x):
    # numpy's sinc carries the pi: np.sinc(x) = sin(pi x) / (pi x)
    return np.sinc(x)


def eval_kernel(spec: KernelSpec, alpha):
    """Pointwise kernel value, vectorized over alpha."""
    a = np.asarray(alpha, dtype=np.float64)
    eta, delta = spec.params.eta, spec.params.delta
    if spec.kind == "dh":
        out = eta * _sinc(eta * a) ** 2
    elif spec.kind == "k1":
        out = _sinc(delta * a) ** 2
    elif spec.kind in ("k2plus", "k2minus"):
        w = spec.params.widths[spec.kind]
        out = w * w * _sinc(w * a) ** 2
    else:
        w = 2.0 * eta + delta if spec.kind == "plus" else 2.0 * eta - delta
        out = w * _sinc(delta * a) * _sinc(w * a)
    if np.isscalar(alpha) or np.ndim(alpha) == 0:
        return float(out)
    return out


def fourier_transform(spec: KernelSpec, t):
    """Exact transform at frequency t; triangles only.

    The signed kernels are deliberately rejected: their transforms are
    only ever used through the two-sided indicator bounds, so exposing a
    closed form here would invite bypassing the sandwich.
    """
    if spec.kind in ("plus", "minus"):
        raise TransformUnavailableError(
            "signed kernels expose only indicator_sandwich bounds")
    tt = np.abs(np.asarray(t, dtype=np.float64))
    eta, delta = spec.params.eta, spec.params.delta
    if spec.kind == "dh":
        out = np.maximum(0.0, 1.0 - tt / eta)
    elif spec.kind == "k1":
        out = np.maximum(0.0, 1.0 - tt / delta) / delta
    else:
        w = spec.params.widths[spec.kind]
        out = np.maximum(0.0, w - tt)
    if np.isscalar(t) or np.ndim(t) == 0:
        return float(out)
    return out


def indicator_sandwich(params: KernelParams, t, kind: str):
    """(lower, upper) indicator bounds on the signed kernel's transform.

    minus: 1 on [-(eta-delta), eta-delta] from below, 1 on [-eta, eta]
    from above.  plus: 1 on [-eta, eta] from below, 1 on
    [-(eta+delta), eta+delta] from above.  Both require delta <= eta so
    the inner window is nonempty.
    """
    if kind not in ("plus", "minus"):
        raise ConfigError("sandwich applies to the signed kernels only")
    if params.delta > params.eta:
        raise ConfigError("sandwich needs delta <= eta")
    tt = abs(float(t))
    if kind == "minus":
        lo_w, hi_w = params.eta - params.delta, params.eta
    else:
        lo_w, hi_w = params.eta, params.eta + params.delta
    return (1.0 if tt <= lo_w else 0.0), (1.0 if tt <= hi_w else 0.0)


def decay_envelope(spec: KernelSpec, alpha):
    """Rigorous pointwise bound min(peak, c / alpha^2) on |kernel|."""
    a = np.abs(np.asarray(alpha, dtype=np.float64))
    eta, delta = spec.params.eta, spec.params.delta
    pi2 = math.pi ** 2
    if spec.kind == "dh":
        peak, c = eta, 1.0 / (pi2 * eta)
    elif spec.kind == "k1":
        peak, c = 1.0, 1.0 / (pi2 * delta * delta)
    elif spec.kind in ("k2plus", "k2minus"):
        w = spec.params.widths[spec.kind]
        peak, c = w * w, 1.0 / pi2
    else:
        w = 2.0 * eta + delta if spec.kind == "plus" else 2.0 * eta - delta
        peak, c = w, 1.0 / (pi2 * delta)
    with np.errstate(divide="ignore"):
        out = np.minimum(peak, c / (a * a))
    if np.isscalar(alpha) or np.ndim(alpha) == 0:
        return float(out)
    return out


def tail_mass(spec: KernelSpec, A: float) -> float:
    """Upper bound on the integral of |kernel| over |alpha| > A."""
    if A <= 0.0:
        raise ConfigError("cutoff must be positive")
    eta, delta = spec.params.eta, spec.params.delta
    pi2 = math.pi ** 2
    if spec.kind == "dh":
        return 2.0 / (pi2 * eta * A)
    if spec.kind == "k1":
        return 2.0 / (pi2 * delta * delta * A)
    if spec.kind in ("k2plus", "k2minus"):
        return 2.0 / (pi2 * A)
    return 2.0 / (pi2 * delta * A)


def mass_bound(spec: KernelSpec) -> float:
    """Upper bound on the total integral of |kernel| over the line.

    The nonnegative kernels integrate exactly to their transform at 0;
    the signed pair gets the Cauchy-Schwarz bound
    4 sqrt((2 eta +- delta) / delta) / pi.
    """
    eta, delta = spec.params.eta, spec.params.delta
    if spec.kind == "dh":
        return 1.0
    if spec.kind == "k1":
        return 1.0 / delta
    if spec.kind in ("k2plus", "k2minus"):
        return spec.params.widths[spec.kind]
    w = 2.0 * eta + delta if spec.kind == "plus" else 2.0 * eta - delta
    return 4.0 * math.sqrt(w / delta) / math.pi


def cosine_pieces(spec: KernelSpec):
    """Weights and frequencies with kernel(a) = sum w cos(2 pi c a) / a^2.

    Every kernel here is a two-term combination; the weights cancel, which
    is what keeps the value finite at a = 0.  Exact-tail quadrature leans
    on this form.
    """
    eta, delta = spec.params.eta, spec.params.delta
    pi2 = math.pi ** 2
    if spec.kind == "dh":
        pieces = [(0.5 / (pi2 * eta), 0.0), (-0.5 / (pi2 * eta), eta)]
    elif spec.kind == "k1":
        u = 0.5 / (pi2 * delta * delta)
        pieces = [(u, 0.0), (-u, delta)]
    elif spec.kind in ("k2plus", "k2minus"):
        w = spec.params.widths[spec.kind]
        pieces = [(0.5 / pi2, 0.0), (-0.5 / pi2, w)]
    elif spec.kind == "plus":
        u = 0.5 / (pi2 * delta)
        pieces = [(u, eta), (-u, eta + delta)]
    else:
        u = 0.5 / (pi2 * delta)
        pieces = [(u, eta - delta), (-u, eta)]
    assert abs(sum(w for w, _ in pieces)) < 1e-18 * max(
        abs(w) for w, _ in pieces)
    return pieces


def eval_from_pieces(spec: KernelSpec, alpha):
    """Kernel value rebuilt from the cosine pieces; cross-check path.

    Since the weights cancel, cos(2 pi c a) - 1 = -2 sin(pi c a)^2 can be
    substituted term by term, which stays fully accurate through a = 0.
    """
    a = np.asarray(alpha, dtype=np.float64)
    pieces = cosine_pieces(spec)
    zero = a == 0.0
    safe = np.where(zero, 1.0, a)
    out = np.zeros_like(a, dtype=np.float64)
    lim = 0.0
    for w, c in pieces:
        out += w * (-2.0) * np.sin(math.pi * c * safe) ** 2
        lim += w * (-2.0) * (math.pi * c) ** 2
    out /= safe * safe
    out = np.where(zero, lim, out)
    if np.isscalar(alpha) or np.ndim(alpha) == 0:
        return float(out)
    return out
