"""Pure numpy backend.

Provides the same callables as the compiled module `_speed`:

    f_point    one exponential-sum value, extended-precision phase reduction
    f_grid     exponential sum on a uniform frequency grid
    enum_count depth-first exact enumeration of inequality solutions
    psi_avg    average of min(P^(k-1), 1/||mu*k*y + a||)

Grid evaluation uses a radix split: with alpha_j = start + (j0 + B*j1)*step,
e(c*alpha_j) factors into e(c*(start + B*j1*step)) * e(c*j0*step), so the
whole grid is one complex matrix product.  Every matrix entry gets its phase
reduced mod 1 in extended precision first, which keeps the result accurate
even when c*alpha is far above 2**53.
"""

from __future__ import annotations

import math

import numpy as np

from ._util import LD, TWO_PI, frac_ld, join_ld
from .errors import BudgetExceededError

BACKEND_NAME = "py"

_RADIX = 2048
_DENSE_LIMIT = 2_000_000


def _centres(c, alphas):
    t = TWO_PI * frac_ld(np.outer(c, alphas.astype(LD)))
    return np.cos(t) + 1j * np.sin(t)


def f_point(alpha, th_hi, th_lo, P, k) -> complex:
    X = int(math.floor(P))
    if X < 1:
        return 0.0 + 0.0j
    th = join_ld(th_hi, th_lo)
    x = np.arange(1, X + 1, dtype=LD)
    c = (x - th) ** int(k)
    t = TWO_PI * frac_ld(LD(alpha) * c)
    re = math.fsum(np.cos(t).tolist())
    im = math.fsum(np.sin(t).tolist())
    return complex(re, im)


def f_grid(th_hi, th_lo, k, P, start, step, n) -> np.ndarray:
    X = int(math.floor(P))
    out = np.zeros(n, dtype=np.complex128)
    if X < 1 or n == 0:
        return out
    th = join_ld(th_hi, th_lo)
    x = np.arange(1, X + 1, dtype=LD)
    c = (x - th) ** int(k)

    if X * n <= _DENSE_LIMIT:
        alphas = LD(start) + LD(step) * np.arange(n, dtype=LD)
        t = TWO_PI * frac_ld(c[:, None] * alphas[None, :])
        np.sum(np.cos(t) + 1j * np.sin(t), axis=0, out=out)
        return out

    B = min(_RADIX, n)
    nj = -(-n // B)
    # inner factor, shared by every block of B consecutive nodes and by
    # successive calls marching along the same grid (streamed quadrature)
    key = (th_hi, th_lo, int(k), X, float(step), B)
    e0 = _E0_CACHE.get(key)
    if e0 is None:
        t0 = TWO_PI * frac_ld(
            c[:, None] * (LD(step) * np.arange(B, dtype=LD)))
        e0 = np.cos(t0) + 1j * np.sin(t0)
        try:
            while len(_E0_CACHE) >= 8:
                _E0_CACHE.pop(next(iter(_E0_CACHE)), None)
        except StopIteration:  # concurrent eviction emptied the cache
            pass
        _E0_CACHE[key] = e0
    centres = LD(start) + (LD(step) * B) * np.arange(nj, dtype=LD)
    tc = TWO_PI * frac_ld(c[:, None] * centres[None, :])
    w = np.cos(tc) + 1j * np.sin(tc)
    full = (w.T @ e0).ravel()
    out[:] = full[:n]
    return out


_E0_CACHE: dict = {}


def psi_avg(mu, alpha_last, P, k) -> float:
    X = int(math.floor(P))
    if X < 1:
        return 0.0
    cap = float(P) ** (int(k) - 1)
    y = np.arange(1, X + 1, dtype=LD)
    v = LD(mu) * int(k) * y + LD(alpha_last)
    fr = frac_ld(v)
    dist = np.minimum(fr, 1.0 - fr)
    with np.errstate(divide="ignore"):
        inv = np.where(dist > 0.0, 1.0 / np.where(dist > 0.0, dist, 1.0),
                       np.inf)
    vals = np.minimum(cap, inv)
    return float(np.sum(vals) / X)


def enum_count(theta_pairs, k, eta, tau, xmax, weighted, budget,
               x1_lo, x1_hi):
    """Exact DFS enumeration of 1 <= x_i <= xmax[i] with |phi(x)-tau| < eta.

    The first coordinate is restricted to [x1_lo, x1_hi) so callers can
    partition work into deterministic blocks.  Returns (value, examined);
    value is an int count or a float sum of tent weights.
    """
    s = len(theta_pairs)
    k = int(k)
    thetas = [join_ld(hi, lo) for hi, lo in theta_pairs]
    cmin = [float((LD(1) - th) ** k) for th in thetas]
    suffix = [0.0] * (s + 1)
    for i in range(s - 1, -1, -1):
        suffix[i] = suffix[i + 1] + cmin[i]
    upper = tau + eta
    lower = tau - eta
    state = {"examined": 0, "count": 0, "wsum": 0.0, "wcomp": 0.0}

    def add_weight(w):
        # Neumaier compensated accumulation, fixed DFS order
        t = state["wsum"] + w
        if abs(state["wsum"]) >= abs(w):
            state["wcomp"] += (state["wsum"] - t) + w
        else:
            state["wcomp"] += (w - t) + state["wsum"]
        state["wsum"] = t

    def leaf(S):
        th = thetas[s - 1]
        thf = float(th)
        rem_hi = upper - float(S)
        if rem_hi <= 0.0:
            return
        rem_lo = lower - float(S)
        r_hi = rem_hi ** (1.0 / k)
        r_lo = max(0.0, rem_lo) ** (1.0 / k) if rem_lo > 0.0 else 0.0
        x_first = max(1, int(math.floor(thf + r_lo)) - 1)
        x_last = min(xmax[s - 1], int(math.ceil(thf + r_hi)) + 1)
        for x in range(x_first, x_last + 1):
            state["examined"] += 1
            phi = float(S + (LD(x) - th) ** k)
            d = abs(phi - tau)
            if d < eta:
                if weighted:
                    add_weight(1.0 - d / eta)
                else:
                    state["count"] += 1
        if state["examined"] > budget:
            raise BudgetExceededError(
                f"enumeration visited more than {budget:g} tuples")

    def walk(depth, S):
        if depth == s - 1:
            leaf(S)
            return
        th = thetas[depth]
        lo = x1_lo if depth == 0 else 1
        hi = x1_hi if depth == 0 else xmax[depth] + 1
        tail_min = suffix[depth + 1]
        for x in range(lo, hi):
            term = (LD(x) - th) ** k
            if float(S + term) + tail_min >= upper:
                break
            state["examined"] += 1
            if state["examined"] > budget:
                raise BudgetExceededError(
                    f"enumeration visited more than {budget:g} tuples")
            walk(depth + 1, S + term)

    if s == 1:
        # single variable: the leaf handles the whole range, but honour
        # the worker split on x_1 by clipping the window to it
        th = thetas[0]
        for x in range(x1_lo, x1_hi):
            state["examined"] += 1
            if state["examined"] > budget:
                raise BudgetExceededError(
                    f"enumeration visited more than {budget:g} tuples")
            phi = float((LD(x) - th) ** k)
            if phi >= upper and x > th:
                break
            d = abs(phi - tau)
            if d < eta:
                if weighted:
                    add_weight(1.0 - d / eta)
                else:
                    state["count"] += 1
    else:
        walk(0, LD(0))

    value = (state["wsum"] + state["wcomp"]) if weighted else state["count"]
    return value, state["examined"]
