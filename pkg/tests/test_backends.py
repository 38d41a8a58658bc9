"""Compiled and pure-python backends agree and are both selectable."""

from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from shiftwaring import _backend


def _both_backends():
    try:
        c = _backend.load_backend("c")
    except ImportError:
        pytest.skip("compiled backend not built")
    py = _backend.load_backend("py")
    return c, py


def test_backend_names():
    c, py = _both_backends()
    assert c.BACKEND_NAME == "c"
    assert py.BACKEND_NAME == "py"
    assert _backend.backend_name() in ("c", "py")
    with pytest.raises(ValueError):
        _backend.load_backend("fortran")


def test_f_point_agreement():
    c, py = _both_backends()
    rng = np.random.RandomState(11)
    for _ in range(60):
        alpha = float(rng.uniform(-6.0, 6.0))
        th = float(rng.uniform(0.05, 0.95))
        k = int(rng.choice([2, 3, 4, 5]))
        P = float(rng.uniform(2.0, 800.0))
        a = c.f_point(alpha, th, 0.0, P, k)
        b = py.f_point(alpha, th, 0.0, P, k)
        # the backends order the phase arithmetic differently, so they
        # agree only to a few ulps of the largest unreduced phase
        tol = 1e-12 + 5e-15 * max(1.0, abs(alpha) * (P + 1.0) ** k)
        assert abs(a - b) <= tol, (alpha, th, k, P)


def test_f_grid_agreement():
    c, py = _both_backends()
    rng = np.random.RandomState(13)
    for _ in range(12):
        th = float(rng.uniform(0.05, 0.95))
        k = int(rng.choice([2, 3]))
        P = float(rng.uniform(5.0, 300.0))
        start = float(rng.uniform(-3.0, 3.0))
        step = float(rng.uniform(1e-5, 1e-2))
        n = int(rng.randint(100, 5000))
        a = c.f_grid(th, 0.0, k, P, start, step, n)
        b = py.f_grid(th, 0.0, k, P, start, step, n)
        assert a.shape == b.shape == (n,)
        alpha_max = max(abs(start), abs(start + step * n))
        tol = 1e-12 + 5e-15 * max(1.0, alpha_max * (P + 1.0) ** k)
        assert np.max(np.abs(a - b)) <= tol


def test_f_grid_matches_f_point():
    c, py = _both_backends()
    for impl in (c, py):
        th, k, P = 0.381966, 3, 47.0
        start, step, n = -0.6, 0.013, 37
        grid = impl.f_grid(th, 0.0, k, P, start, step, n)
        for j in (0, 1, 17, 36):
            direct = impl.f_point(start + step * j, th, 0.0, P, k)
            assert abs(grid[j] - direct) <= 1e-9 * max(1.0, abs(direct))


def test_enum_count_agreement():
    c, py = _both_backends()
    pairs = [(0.61803398875, 0.0), (0.5, 0.0)]
    for weighted in (False, True):
        a = c.enum_count(pairs, 2, 0.9, 50.0, [8, 8], weighted,
                         10 ** 9, 1, 8)
        b = py.enum_count(pairs, 2, 0.9, 50.0, [8, 8], weighted,
                          10 ** 9, 1, 8)
        if weighted:
            assert abs(float(a[0]) - float(b[0])) < 1e-12
        else:
            assert int(a[0]) == int(b[0])
        assert a[1] == b[1]


def test_psi_avg_agreement():
    c, py = _both_backends()
    rng = np.random.RandomState(17)
    for _ in range(20):
        mu = float(rng.uniform(-1.0, 1.0))
        al = float(rng.uniform(-1.0, 1.0))
        P = float(rng.uniform(2.0, 400.0))
        k = int(rng.choice([2, 3]))
        a = c.psi_avg(mu, al, P, k)
        b = py.psi_avg(mu, al, P, k)
        assert abs(a - b) <= 1e-9 * max(1.0, abs(a)), (mu, al, P, k)


def test_env_var_forces_backend():
    code = ("import shiftwaring._backend as b; "
            "print(b.backend_name())")
    for requested in ("py", "c"):
        env = dict(os.environ, SHIFTWARING_BACKEND=requested)
        proc = subprocess.run([sys.executable, "-c", code],
                              capture_output=True, text=True, env=env)
        if requested == "c" and proc.returncode != 0:
            pytest.skip("compiled backend not built")
        assert proc.returncode == 0, proc.stderr
        assert proc.stdout.strip() == requested


def test_env_var_rejects_unknown():
    env = dict(os.environ, SHIFTWARING_BACKEND="cobol")
    proc = subprocess.run(
        [sys.executable, "-c", "import shiftwaring._backend"],
        capture_output=True, text=True, env=env)
    assert proc.returncode != 0
    assert "SHIFTWARING_BACKEND" in proc.stderr
