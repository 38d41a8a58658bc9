"""Exact counting paths against independent double-loop oracles."""

from __future__ import annotations

import itertools
import math
import random

import pytest

from shiftwaring.core import Instance, Query
from shiftwaring.counting import (
    CountResult,
    count_meet_middle,
    count_power_system,
    count_power_system_shifted,
    count_solutions,
    count_solutions_boxed,
    weighted_solution_count,
)
from shiftwaring.errors import BudgetExceededError, ConfigError


def _oracle_counts(inst: Instance, tau: float):
    """Plain nested-loop counts (natural, boxed, weighted-boxed)."""
    xmax = int(math.ceil((tau + inst.eta) ** (1.0 / inst.k) + 1.0))
    box = min(xmax, int(math.floor(Query.from_tau(inst, tau).P)))
    ths = [float(t) for t in inst.theta]
    natural = boxed = 0
    weighted = 0.0
    for xs in itertools.product(range(1, xmax + 1), repeat=inst.s):
        phi = sum((x - t) ** inst.k for x, t in zip(xs, ths))
        if abs(phi - tau) < inst.eta:
            natural += 1
            if all(x <= box for x in xs):
                boxed += 1
        if all(x <= box for x in xs):
            weighted += max(0.0, 1.0 - abs(phi - tau) / inst.eta)
    return natural, boxed, weighted


def test_counts_match_oracle():
    rng = random.Random(2024)
    for _ in range(25):
        k = rng.choice((2, 3))
        s = rng.choice((1, 2, 3))
        tau = rng.uniform(4.0, 120.0 if s < 3 else 60.0)
        inst = Instance.make(
            k, s, [rng.choice(("golden", 0.5, 0.25, "e2"))
                   for _ in range(s)], rng.uniform(0.4, 1.0))
        natural, boxed, weighted = _oracle_counts(inst, tau)
        got = count_solutions(inst, tau)
        assert got.value == natural and got.method == "brute"
        assert got.tuples_examined > 0
        assert count_solutions_boxed(inst, tau).value == boxed
        got_w = weighted_solution_count(inst, tau)
        assert abs(got_w - weighted) < 1e-9 * max(1.0, weighted)


def test_known_single_variable_counts():
    # k = 2, s = 1, tau = 100, eta = 1: x^2 in (99, 101) only at x = 10
    inst = Instance.make(2, 1, 0.5, 1.0)
    # shifted: (x - 1/2)^2 in (99, 101) -> x = 10.5 +- ..., x = 10:
    # 9.5^2 = 90.25 no; x = 11: 10.5^2 = 110.25 no
    assert count_solutions(inst, 100.0).value == 0
    # tau = 90.25 hits x = 10 exactly
    assert count_solutions(inst, 90.25).value == 1
    # boxed discards it: P = sqrt(90.25) = 9.5, box is x <= 9
    assert count_solutions_boxed(inst, 90.25).value == 0


def test_weighted_tent_value_by_hand():
    # x = 2, theta = 1/4, tau = 4: gap = (7/4)^2 - 4 = -15/16, inside
    # the unit tent with weight 1/16, and x = 2 <= sqrt(tau) stays in
    # the box; every value here is dyadic so the weight is exact
    inst = Instance.make(2, 1, 0.25, 1.0)
    got = weighted_solution_count(inst, 4.0)
    assert got == 0.0625


def test_mitm_agrees_with_enumeration():
    rng = random.Random(67)
    for _ in range(40):
        k = rng.choice((2, 3, 4))
        s = rng.choice((2, 3, 4))
        tau = rng.uniform(5.0, 300.0)
        inst = Instance.make(
            k, s, [rng.choice(("golden", "sqrt2", 0.5, 0.75))
                   for _ in range(s)], rng.uniform(0.3, 1.0))
        for bound in ("box", "natural"):
            ref = (count_solutions_boxed if bound == "box"
                   else count_solutions)(inst, tau)
            got = count_meet_middle(inst, tau, bound=bound)
            assert got.value == ref.value, (inst, tau, bound)
            assert got.method == "mitm"
        ref_w = weighted_solution_count(inst, tau)
        got_w = count_meet_middle(inst, tau, weighted=True).value
        assert abs(got_w - ref_w) <= 1e-9 * max(1.0, abs(ref_w))


def test_mitm_table_sharing_consistency():
    # identical halves share one table; mixed shifts build two; both
    # must agree with enumeration
    tau = 200.0
    same = Instance.make(2, 4, "golden", 0.8)
    mixed = Instance.make(2, 4, ("golden", "sqrt2", "golden", 0.5), 0.8)
    for inst in (same, mixed):
        assert count_meet_middle(inst, tau).value == \
            count_solutions_boxed(inst, tau).value


def test_mitm_validation():
    inst = Instance.make(2, 1, 0.5, 1.0)
    with pytest.raises(ConfigError):
        count_meet_middle(inst, 50.0)
    inst = Instance.make(2, 2, 0.5, 1.0)
    with pytest.raises(ConfigError):
        count_meet_middle(inst, 50.0, bound="sphere")
    with pytest.raises(ConfigError):
        count_meet_middle(inst, -1.0)


def test_budget_errors():
    inst = Instance.make(2, 3, "golden", 1.0)
    with pytest.raises(BudgetExceededError):
        count_solutions(inst, 5000.0, budget=100)
    with pytest.raises(BudgetExceededError):
        count_meet_middle(inst, 5000.0, budget=10)
    with pytest.raises(BudgetExceededError):
        count_meet_middle(inst, 10_000.0 ** 2, table_bytes=1024)
    with pytest.raises(BudgetExceededError):
        count_power_system(4, 2, 100, budget=1000)


def test_count_result_validation():
    with pytest.raises(ConfigError):
        CountResult(value=1, tuples_examined=1, method="magic")
    with pytest.raises(ConfigError):
        CountResult(value=-1, tuples_examined=1, method="brute")


def _oracle_power_system(s: int, k: int, P: int) -> int:
    count = 0
    for xs in itertools.product(range(1, P + 1), repeat=s):
        for ys in itertools.product(range(1, P + 1), repeat=s):
            if all(sum(x ** j for x in xs) == sum(y ** j for y in ys)
                   for j in range(1, k + 1)):
                count += 1
    return count


def test_power_system_small_oracle():
    for s, k, P in ((1, 2, 6), (2, 2, 5), (2, 3, 4), (3, 2, 3)):
        assert count_power_system(s, k, P) == \
            _oracle_power_system(s, k, P), (s, k, P)


def test_power_system_closed_form_s2_k2():
    # J(P) = 2 P^2 - P: diagonal pairs plus swapped pairs
    for P in (1, 2, 5, 10, 23, 50):
        assert count_power_system(2, 2, P) == 2 * P * P - P
    assert count_power_system(2, 2, 10) == 190


def test_power_system_shifted_equals_unshifted():
    rng = random.Random(5150)
    for s, k, P in ((2, 2, 9), (2, 3, 6), (3, 2, 5)):
        J = count_power_system(s, k, P)
        for _ in range(5):
            theta = rng.uniform(0.1, 0.9)
            eta = rng.choice((1.0, 0.6, 0.15))
            assert count_power_system_shifted(s, k, P, theta, eta) == J


def test_power_system_validation():
    with pytest.raises(ConfigError):
        count_power_system(0, 2, 5)
    # the tuple budget trips before any arithmetic on huge P
    with pytest.raises(BudgetExceededError):
        count_power_system(2, 2, 10 ** 10)
    with pytest.raises(ConfigError):
        count_power_system_shifted(2, 1, 5, 0.5, 1.0)
    with pytest.raises(ConfigError):
        count_power_system_shifted(2, 2, 5, 0.5, 2.0)
