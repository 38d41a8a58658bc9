"""Exact solution counting: direct enumeration, meet-in-the-middle, and
power-moment system counts.

Counting runs sequentially over fixed blocks of the first coordinate
with a cumulative tuple budget; the heavy lifting for large targets is
the meet-in-the-middle path, which is table- rather than loop-bound.
Weighted totals are combined across blocks in a fixed pairwise order, so
results never depend on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from ._util import LD, chunk_ranges, pairwise_total
from .core import Instance, Query
from .errors import BudgetExceededError, ConfigError

DEFAULT_TUPLE_BUDGET = 100_000_000
DEFAULT_TABLE_BYTES = 2 << 30

_BLOCK = 64


@dataclass(frozen=True)
class CountResult:
    """value is an exact integer for unweighted counts, a real for
    weighted ones; tuples_examined records enumeration work."""

    value: object
    tuples_examined: int
    method: str

    def __post_init__(self):
        if self.method not in ("brute", "mitm"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.value < 0:
            raise ConfigError("counts are non-negative")


def _natural_xmax(inst: Instance, tau: float) -> int:
    """Every solution coordinate is below ceil((tau + eta)^(1/k) + 1)."""
    return int(math.ceil((tau + inst.eta) ** (1.0 / inst.k) + 1.0))


def _enumerate(inst: Instance, tau: float, xmax: int, weighted: bool,
               budget: int):
    """Blocked DFS over the first coordinate; returns (value, examined)."""
    pairs = inst.theta_pairs()
    xmaxes = [xmax] * inst.s
    parts = []
    count = 0
    examined = 0
    for lo0, hi0 in chunk_ranges(xmax, _BLOCK):
        if examined >= budget:
            raise BudgetExceededError(
                f"enumeration visited more than {budget:g} tuples")
        val, seen = _backend.enum_count(
            pairs, inst.k, inst.eta, float(tau), xmaxes, weighted,
            budget - examined, lo0 + 1, hi0 + 1)
        examined += seen
        if weighted:
            parts.append(float(val))
        else:
            count += int(val)
    value = pairwise_total(parts) if weighted else count
    return value, examined


def count_solutions(inst: Instance, tau: float,
                    budget: int = DEFAULT_TUPLE_BUDGET) -> CountResult:
    """Number of positive-integer tuples with |phi(x) - tau| < eta."""
    if tau <= 0:
        raise ConfigError("tau must be positive")
    value, seen = _enumerate(inst, tau, _natural_xmax(inst, tau), False,
                             budget)
    return CountResult(value=value, tuples_examined=seen, method="brute")


def count_solutions_boxed(inst: Instance, tau: float,
                          budget: int = DEFAULT_TUPLE_BUDGET) -> CountResult:
    """As count_solutions, restricted to the box 1 <= x_i <= P."""
    q = Query.from_tau(inst, tau)
    xmax = min(_natural_xmax(inst, tau), int(math.floor(q.P)))
    value, seen = _enumerate(inst, tau, xmax, False, budget)
    return CountResult(value=value, tuples_examined=seen, method="brute")


def weighted_solution_count(inst: Instance, tau: float,
                            budget: int = DEFAULT_TUPLE_BUDGET) -> float:
    """Tent-weighted count over the box: each tuple contributes
    max(0, 1 - |phi(x) - tau| / eta)."""
    q = Query.from_tau(inst, tau)
    xmax = min(_natural_xmax(inst, tau), int(math.floor(q.P)))
    value, _ = _enumerate(inst, tau, xmax, True, budget)
    return float(value)


def _half_sums(inst: Instance, idx, xmax: int) -> np.ndarray:
    """Float64 array of all partial sums over the selected coordinates."""
    terms = []
    x = np.arange(1, xmax + 1, dtype=LD)
    for i in idx:
        terms.append(((x - LD(inst.theta[i])) ** inst.k)
                     .astype(np.float64))
    out = terms[0]
    for t in terms[1:]:
        out = (out[:, None] + t[None, :]).ravel()
    return out


def count_meet_middle(inst: Instance, tau: float, weighted: bool = False,
                      bound: str = "box",
                      budget: int = DEFAULT_TUPLE_BUDGET,
                      table_bytes: int = DEFAULT_TABLE_BYTES) -> CountResult:
    """Split-half counting over sorted half-sum tables.

    bound "box" matches the boxed count (x_i <= P); "natural" matches the
    unboxed count.  Unweighted totals agree with enumeration exactly
    (same float64 window semantics); weighted totals to 1e-9 relative.
    """
    if inst.s < 2:
        raise ConfigError("meet-in-the-middle needs s >= 2")
    if bound not in ("box", "natural"):
        raise ConfigError(f"unknown bound {bound!r}")
    if tau <= 0:
        raise ConfigError("tau must be positive")
    xmax = _natural_xmax(inst, tau)
    if bound == "box":
        q = Query.from_tau(inst, tau)
        xmax = min(xmax, int(math.floor(q.P)))
    s1 = inst.s // 2
    left, right = list(range(s1)), list(range(s1, inst.s))
    n_left, n_right = xmax ** s1, xmax ** (inst.s - s1)
    if (n_left + n_right) * 8 > table_bytes:
        raise BudgetExceededError("half-sum tables exceed the memory cap")
    if n_left + n_right > budget:
        raise BudgetExceededError("half-sum tables exceed the tuple budget")
    U = _half_sums(inst, left, xmax)
    same = [inst.theta[i] for i in left] == \
        [inst.theta[i] for i in right[:s1]]
    if len(left) == len(right) and same:
        V = U
    else:
        V = _half_sums(inst, right, xmax)
    V = np.sort(V, kind="stable")
    ps = None
    if weighted:
        # window sums of |v - (tau - u)| need a prefix sum; extended
        # precision keeps the long accumulation exact to ~1e-13
        ps = np.concatenate(([LD(0)], np.cumsum(V.astype(LD))))
    count = 0
    parts = []
    for a, b in chunk_ranges(len(U), 1 << 20):
        u = U[a:b]
        lo = np.searchsorted(V, tau - inst.eta - u, side="right")
        hi = np.searchsorted(V, tau + inst.eta - u, side="left")
        if not weighted:
            count += int(np.sum(hi - lo, dtype=np.int64))
            continue
        mid_val = tau - u
        mid = np.searchsorted(V, mid_val, side="left")
        below = mid_val * (mid - lo) - (ps[mid] - ps[lo]).astype(np.float64)
        above = (ps[hi] - ps[mid]).astype(np.float64) - mid_val * (hi - mid)
        contrib = (hi - lo) - (below + above) / inst.eta
        parts.append(float(np.sum(contrib)))
    if not weighted:
        return CountResult(value=count,
                           tuples_examined=n_left + n_right, method="mitm")
    value = pairwise_total(parts)
    return CountResult(value=float(value),
                       tuples_examined=n_left + n_right, method="mitm")


def _moment_key(xs, k_top: int):
    return tuple(sum(x ** j for x in xs) for j in range(1, k_top + 1))


def _tuple_iter(s: int, P: int):
    idx = [1] * s
    while True:
        yield tuple(idx)
        d = s - 1
        while d >= 0 and idx[d] == P:
            idx[d] = 1
            d -= 1
        if d < 0:
            return
        idx[d] += 1


def count_power_system(s: int, k: int, P: int,
                       budget: int = DEFAULT_TUPLE_BUDGET) -> int:
    """Solutions of the simultaneous power-sum system of orders 1..k with
    both sides in [1, P]^s: sum over moment classes of multiplicity^2."""
    if s < 1 or k < 1 or P < 1:
        raise ConfigError("need s, k, P >= 1")
    if P ** s > budget:
        raise BudgetExceededError("tuple space exceeds the budget")
    if s * P ** k >= 2 ** 63:
        raise ConfigError("moment values overflow 64-bit range")
    classes = {}
    for xs in _tuple_iter(s, P):
        key = _moment_key(xs, k)
        classes[key] = classes.get(key, 0) + 1
    return sum(m * m for m in classes.values())


def count_power_system_shifted(s: int, k: int, P: int, theta,
                               eta: float,
                               budget: int = DEFAULT_TUPLE_BUDGET) -> int:
    """Solutions with exact power-sum equality at orders 1..k-1 and the
    shifted order-k sums closer than eta.

    Tuples group on their integer moments below k; within a class the
    order-k shifted sums are window-counted on a sorted list.
    """
    from .core import resolve_shift
    if s < 1 or k < 2 or P < 1:
        raise ConfigError("need s >= 1, k >= 2, P >= 1")
    if not 0.0 < eta <= 1.0:
        raise ConfigError("eta must lie in (0, 1]")
    if P ** s > budget:
        raise BudgetExceededError("tuple space exceeds the budget")
    th = resolve_shift(theta)
    powers = (np.arange(0, P + 1, dtype=LD) - th) ** k
    classes = {}
    for xs in _tuple_iter(s, P):
        key = _moment_key(xs, k - 1)
        val = float(sum(powers[x] for x in xs))
        classes.setdefault(key, []).append(val)
    total = 0
    for vals in classes.values():
        arr = np.sort(np.asarray(vals, dtype=np.float64), kind="stable")
        lo = np.searchsorted(arr, arr - eta, side="right")
        hi = np.searchsorted(arr, arr + eta, side="left")
        total += int(np.sum(hi - lo, dtype=np.int64))
    return total
