"""Small numeric helpers used across modules.

Shift values are carried as numpy extended floats (>= 60 significant bits on
x86-64 Linux).  To move such a value through an interface that only speaks
double precision, split it into a hi/lo pair of doubles; hi + lo recovers
roughly 106 bits, comfortably above the storage requirement.
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np

LD = np.longdouble
TWO_PI = 2.0 * math.pi


def split_ld(value) -> tuple[float, float]:
    """Split an extended float into (hi, lo) doubles with hi + lo == value."""
    v = LD(value)
    hi = float(v)
    lo = float(v - LD(hi))
    return hi, lo


def join_ld(hi: float, lo: float):
    return LD(hi) + LD(lo)


def frac_ld(values):
    """Fractional part in extended precision, elementwise, as float64."""
    v = np.asarray(values, dtype=LD)
    return (v - np.floor(v)).astype(np.float64)


def unit_phase(factor, start, step, n) -> np.ndarray:
    """e(factor * alpha_j) for alpha_j = start + j*step, j < n.

    The product factor*alpha can be far above 2**53, so the reduction mod 1
    happens in extended precision before any trigonometric call.
    """
    j = np.arange(n, dtype=LD)
    ph = LD(factor) * (LD(start) + LD(step) * j)
    t = TWO_PI * frac_ld(ph)
    return np.cos(t) + 1j * np.sin(t)


def nearest_int_distance(values):
    """Distance to the nearest integer, elementwise."""
    v = np.asarray(values, dtype=np.float64)
    return np.abs(v - np.round(v))


def pairwise_total(parts):
    """Fixed-order pairwise reduction of a list of partial results.

    The tree shape depends only on len(parts), never on worker scheduling,
    which keeps parallel totals bit-stable across worker counts.
    """
    items = list(parts)
    if not items:
        return 0.0
    while len(items) > 1:
        merged = []
        for i in range(0, len(items) - 1, 2):
            merged.append(items[i] + items[i + 1])
        if len(items) % 2:
            merged.append(items[-1])
        items = merged
    return items[0]


def config_digest(config: dict) -> str:
    """Stable 16-hex-digit hash of a JSON-serialisable configuration."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=True, default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def chunk_ranges(total: int, chunk: int):
    """Deterministic [start, stop) chunk decomposition of range(total)."""
    out = []
    start = 0
    while start < total:
        stop = min(total, start + chunk)
        out.append((start, stop))
        start = stop
    return out
