# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled backend: hot loops for exponential sums and exact enumeration.

Phases are reduced mod 1 in 80-bit extended precision before any libm
trigonometric call; shift values arrive as hi/lo double pairs.
"""

import numpy as np

from .errors import BudgetExceededError

cdef extern from "math.h" nogil:
    long double cosl(long double)
    long double sinl(long double)
    long double floorl(long double)
    long double fabsl(long double)
    long double powl(long double, long double)
    double floor(double)
    double ceil(double)
    double pow(double, double)

cdef double TWO_PI = 6.283185307179586476925286766559

BACKEND_NAME = "c"

cdef long double _pow_int(long double base, int k) nogil:
    cdef long double acc = 1.0
    cdef int i
    for i in range(k):
        acc *= base
    return acc

cdef inline long double _frac(long double v) nogil:
    return v - floorl(v)


def f_point(double alpha, double th_hi, double th_lo, double P, int k):
    cdef long long X = <long long>floor(P)
    if X < 1:
        return 0j
    cdef long double th = (<long double>th_hi) + (<long double>th_lo)
    cdef long double a = <long double>alpha
    cdef long double c, fr
    cdef double t
    cdef double sr = 0.0, si = 0.0, cr = 0.0, ci = 0.0, y, v
    cdef long long x
    for x in range(1, X + 1):
        c = _pow_int((<long double>x) - th, k)
        fr = _frac(a * c)
        t = TWO_PI * <double>fr
        # Kahan accumulation on both components
        y = cosl(t) - cr
        v = sr + y
        cr = (v - sr) - y
        sr = v
        y = sinl(t) - ci
        v = si + y
        ci = (v - si) - y
        si = v
    return complex(sr, si)


def f_grid(double th_hi, double th_lo, int k, double P,
           double start, double step, Py_ssize_t n):
    """Sum_{1<=x<=floor(P)} e(alpha_j (x-theta)^k) on alpha_j = start+j*step.

    Per x the nodes are swept with a unit-modulus multiplicative recurrence,
    re-anchored to an exactly reduced phase every 4096 steps so rounding
    drift stays below 1e-12.
    """
    out = np.zeros(n, dtype=np.complex128)
    cdef long long X = <long long>floor(P)
    if X < 1 or n == 0:
        return out
    # interleaved re/im view so the loop can drop the GIL
    cdef double[::1] o = out.view(np.float64)
    cdef long double th = (<long double>th_hi) + (<long double>th_lo)
    cdef long double st = <long double>start
    cdef long double sp = <long double>step
    cdef long double c, fr
    cdef double t, zr, zi, rr, ri, tmp
    cdef long long x
    cdef Py_ssize_t j
    with nogil:
        for x in range(1, X + 1):
            c = _pow_int((<long double>x) - th, k)
            fr = _frac(c * sp)
            t = TWO_PI * <double>fr
            rr = cosl(t)
            ri = sinl(t)
            zr = 0.0
            zi = 0.0
            for j in range(n):
                if (j & 4095) == 0:
                    fr = _frac(c * (st + sp * <long double>j))
                    t = TWO_PI * <double>fr
                    zr = cosl(t)
                    zi = sinl(t)
                o[2 * j] += zr
                o[2 * j + 1] += zi
                tmp = zr * rr - zi * ri
                zi = zr * ri + zi * rr
                zr = tmp
    return out


def psi_avg(double mu, double alpha_last, double P, int k):
    cdef long long X = <long long>floor(P)
    if X < 1:
        return 0.0
    cdef double cap = pow(P, k - 1)
    cdef long double m = (<long double>mu) * k
    cdef long double a = <long double>alpha_last
    cdef long double fr
    cdef double d, val, total = 0.0, comp = 0.0, y, v
    cdef long long y_
    for y_ in range(1, X + 1):
        fr = _frac(m * y_ + a)
        d = <double>fr
        if d > 0.5:
            d = 1.0 - d
        if d <= 0.0:
            val = cap
        else:
            val = 1.0 / d
            if val > cap:
                val = cap
        y = val - comp
        v = total + y
        comp = (v - total) - y
        total = v
    return total / X


def enum_count(theta_pairs, int k, double eta, double tau, xmax,
               bint weighted, double budget, long long x1_lo,
               long long x1_hi):
    cdef int s = len(theta_pairs)
    if s < 1 or s > 64:
        raise ValueError("variable count out of range")
    cdef long double[64] th
    cdef long long[64] xm
    cdef double[64] tail_min
    cdef long double[64] partial
    cdef long long[64] cursor
    cdef int i
    for i in range(s):
        th[i] = (<long double>theta_pairs[i][0]) + \
                (<long double>theta_pairs[i][1])
        xm[i] = <long long>xmax[i]
    tail_min[s] = 0.0
    for i in range(s - 1, -1, -1):
        tail_min[i] = tail_min[i + 1] + \
            <double>_pow_int(1.0 - th[i], k)
    cdef double upper = tau + eta
    cdef double lower = tau - eta
    cdef double examined = 0.0
    cdef long long count = 0
    cdef double wsum = 0.0, wcomp = 0.0, wy, wv, w
    cdef long double S, term
    cdef double phi, d, rem_hi, rem_lo, r_hi, r_lo, thf
    cdef long long x, x_first, x_last
    cdef int depth = 0
    cdef bint descend = True

    partial[0] = 0.0
    cursor[0] = x1_lo

    while depth >= 0:
        if depth == s - 1:
            # closed-form window on the last coordinate
            S = partial[depth]
            thf = <double>th[depth]
            rem_hi = upper - <double>S
            if rem_hi > 0.0:
                rem_lo = lower - <double>S
                r_hi = pow(rem_hi, 1.0 / k)
                r_lo = pow(rem_lo, 1.0 / k) if rem_lo > 0.0 else 0.0
                x_first = <long long>floor(thf + r_lo) - 1
                if s == 1 and x_first < x1_lo:
                    x_first = x1_lo
                elif x_first < 1:
                    x_first = 1
                x_last = <long long>ceil(thf + r_hi) + 1
                if s == 1 and x_last > x1_hi - 1:
                    x_last = x1_hi - 1
                if x_last > xm[depth]:
                    x_last = xm[depth]
                for x in range(x_first, x_last + 1):
                    examined += 1.0
                    phi = <double>(S + _pow_int(
                        (<long double>x) - th[depth], k))
                    d = fabsl(phi - tau)
                    if d < eta:
                        if weighted:
                            w = 1.0 - d / eta
                            wy = w - wcomp
                            wv = wsum + wy
                            wcomp = (wv - wsum) - wy
                            wsum = wv
                        else:
                            count += 1
                if examined > budget:
                    raise BudgetExceededError(
                        f"enumeration visited more than {budget:g} tuples")
            depth -= 1
            descend = False
            continue
        if descend:
            cursor[depth] = x1_lo if depth == 0 else 1
        x = cursor[depth]
        if depth == 0 and x >= x1_hi:
            depth -= 1
            descend = False
            continue
        if depth > 0 and x > xm[depth]:
            depth -= 1
            descend = False
            continue
        term = _pow_int((<long double>x) - th[depth], k)
        if <double>(partial[depth] + term) + tail_min[depth + 1] >= upper:
            depth -= 1
            descend = False
            continue
        examined += 1.0
        if examined > budget:
            raise BudgetExceededError(
                f"enumeration visited more than {budget:g} tuples")
        cursor[depth] = x + 1
        partial[depth + 1] = partial[depth] + term
        depth += 1
        descend = True

    if weighted:
        return wsum + wcomp, examined
    return count, examined
