"""Numba kernels for the grid convolution hot loop.

Scalar re-statements of the kernel, test-function and periodized-kernel
formulas, plus a per-point adaptive G7/K15 integrator.  Every formula here
has a vectorized numpy twin in ``kernel``/``funcspace``; the test-suite
checks the two agree.
"""
import math

import numpy as np

from . import _dd
from ._backend import njit
from .quad import GK_GAUSS_WEIGHTS, GK_KRONROD_WEIGHTS, GK_NODES

_opts = dict(cache=True, nogil=True)

_two_sum = njit(**_opts)(_dd.two_sum)
_quick_two_sum = njit(**_opts)(_dd.quick_two_sum)
_split = njit(**_opts)(_dd.split)


@njit(**_opts)
def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


# kernel / function codes shared with convolution.py
FEJER, RIESZ, POISSON, PICARD, GAUSS_WEIERSTRASS = 0, 1, 2, 3, 4
HOLDER_BUMP, ZMBA, COSINE, ABS_SIN, WEIERSTRASS, CONSTANT = 0, 1, 2, 3, 4, 5

_PI = math.pi
_SQRT_PI = math.sqrt(math.pi)
_NODES = GK_NODES.copy()
_WK = GK_KRONROD_WEIGHTS.copy()
_WG = GK_GAUSS_WEIGHTS.copy()
_EPS = 2.220446049250313e-16


@njit(**_opts)
def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    return _quick_two_sum(s, e + (al + bl))


@njit(**_opts)
def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    return _quick_two_sum(p, e + (ah * bl + al * bh))


@njit(**_opts)
def _dd_mul_d(ah, al, b):
    p, e = _two_prod(ah, b)
    return _quick_two_sum(p, e + al * b)


@njit(**_opts)
def _dd_div_d(ah, al, b):
    q1 = ah / b
    p, pe = _two_prod(q1, b)
    s, e = _two_sum(ah, -p)
    e = e - pe + al
    q2 = (s + e) / b
    return _quick_two_sum(q1, q2)


@njit(**_opts)
def _dd_div(ah, al, bh, bl):
    q1 = ah / bh
    ph, pl = _dd_mul_d(bh, bl, q1)
    rh, rl = _dd_add(ah, al, -ph, -pl)
    q2 = rh / bh
    ph, pl = _dd_mul_d(bh, bl, q2)
    rh, rl = _dd_add(rh, rl, -ph, -pl)
    q3 = rh / bh
    q1, q2 = _quick_two_sum(q1, q2)
    return _dd_add(q1, q2, q3, 0.0)


@njit(**_opts)
def riesz_series(gamma, t):
    t2h, t2l = _two_prod(t, t)
    th, tl = 1.0, 0.0
    s1h, s1l = 0.0, 0.0
    s2h, s2l = 0.0, 0.0
    kmin = int(t) + 2
    for k in range(600):
        dh, dl = _two_sum(2.0 * k + 1.0, gamma)
        qh, ql = _dd_div(th, tl, dh, dl)
        s1h, s1l = _dd_add(s1h, s1l, qh, ql)
        uh, ul = _dd_mul_d(th, tl, t)
        uh, ul = _dd_div_d(uh, ul, 2.0 * k + 1.0)
        dh, dl = _two_sum(2.0 * k + 2.0, gamma)
        qh, ql = _dd_div(uh, ul, dh, dl)
        s2h, s2l = _dd_add(s2h, s2l, qh, ql)
        th, tl = _dd_mul(th, tl, t2h, t2l)
        th, tl = _dd_div_d(-th, -tl, (2.0 * k + 1.0) * (2.0 * k + 2.0))
        if k >= kmin and abs(th) <= 1e-34 * abs(s1h) + 1e-300:
            break
    return (math.cos(t) * (s1h + s1l) + math.sin(t) * (s2h + s2l)) / _PI


@njit(**_opts)
def riesz_quadrature(gamma, t):
    panels = max(1, int(math.ceil(t / _PI)))
    w = 1.0 / panels
    total = 0.0
    for l in range(60):
        a = w * 2.0 ** -(l + 1)
        b = 2.0 * a
        c = 0.5 * (a + b)
        h = 0.5 * (b - a)
        for i in range(15):
            y = c + h * _NODES[i]
            total += h * _WK[i] * y ** gamma * math.cos(t * (1.0 - y))
    for p in range(1, panels):
        a = w * p
        c = a + 0.5 * w
        h = 0.5 * w
        for i in range(15):
            y = c + h * _NODES[i]
            total += h * _WK[i] * y ** gamma * math.cos(t * (1.0 - y))
    delta = w * 2.0 ** -60
    total += math.cos(t) * delta ** (gamma + 1.0) / (gamma + 1.0)
    return total / _PI


@njit(**_opts)
def kernel_value(kid, gamma, u):
    t = abs(u)
    if kid == PICARD:
        return 0.5 * math.exp(-t)
    if kid == GAUSS_WEIERSTRASS:
        return math.exp(-t * t) / _SQRT_PI
    if kid == POISSON:
        return 1.0 / (_PI * (1.0 + t * t))
    if kid == FEJER:
        if t < 1e-4:
            s = 0.5 - t * t / 48.0 + t ** 4 / 3840.0
        else:
            s = math.sin(0.5 * t) / t
        return (2.0 / _PI) * s * s
    if t <= 12.0:
        return riesz_series(gamma, t)
    return riesz_quadrature(gamma, t)


@njit(**_opts)
def periodic_constants(kid, gamma, lam):
    """Per-call constants of the periodized kernel, hoisted out of the quadrature loop."""
    if kid == POISSON:
        eps = 1.0 / lam
        out = np.empty(2)
        out[0] = math.sinh(eps)
        out[1] = math.sinh(0.5 * eps)
        return out
    if kid == PICARD:
        out = np.empty(1)
        out[0] = -math.expm1(-2.0 * _PI * lam)
        return out
    if kid == GAUSS_WEIERSTRASS:
        return np.empty(0)
    g = 1.0 if kid == FEJER else gamma
    jmax = int(math.ceil(lam))
    out = np.empty(max(jmax - 1, 0))
    for j in range(1, jmax):
        out[j - 1] = (1.0 - j / lam) ** g
    return out


@njit(**_opts)
def _periodized(kid, lam, pc, s):
    s = abs(((s + _PI) % (2.0 * _PI)) - _PI)
    if kid == POISSON:
        sh = pc[1]
        sn = math.sin(0.5 * s)
        return pc[0] / (4.0 * _PI * (sh * sh + sn * sn))
    if kid == PICARD:
        return 0.5 * lam * (math.exp(-lam * s) + math.exp(-lam * (2.0 * _PI - s))) / pc[0]
    if kid == GAUSS_WEIERSTRASS:
        kmax = int(math.ceil(7.0 / (2.0 * _PI * lam))) + 1
        acc = 0.0
        for k in range(-kmax, kmax + 1):
            z = lam * (s + 2.0 * _PI * k)
            acc += math.exp(-z * z)
        return lam * acc / _SQRT_PI
    acc = 0.0
    for j in range(pc.shape[0]):
        acc += math.cos((j + 1) * s) * pc[j]
    return (1.0 + 2.0 * acc) / (2.0 * _PI)


@njit(**_opts)
def periodized_kernel_value(kid, gamma, lam, s):
    return _periodized(kid, lam, periodic_constants(kid, gamma, lam), s)


@njit(**_opts)
def _bump(alpha, y):
    v = 1.0 - abs(y) ** alpha
    return v if v > 0.0 else 0.0


@njit(**_opts)
def _bump_integral(alpha, y):
    p = alpha + 1.0
    if y >= 1.0:
        return 2.0 - 2.0 / p
    if y <= -1.0:
        yc = -1.0
    else:
        yc = y
    ay = abs(yc) ** p
    if yc < 0.0:
        return (yc + 1.0) - (1.0 - ay) / p
    return (yc + 1.0) - (1.0 + ay) / p


@njit(**_opts)
def function_value(fid, j, fp, x):
    """j-th derivative of test function ``fid``; ``fp`` = (alpha, a, b, value, n_terms)."""
    alpha = fp[0]
    if fid == HOLDER_BUMP:
        return _bump(alpha, x)
    if fid == ZMBA:
        if j == 0:
            if abs(x) >= 2.5:
                return 0.0
            return _bump_integral(alpha, x - 1.5) - _bump_integral(alpha, x + 1.5)
        return _bump(alpha, x - 1.5) - _bump(alpha, x + 1.5)
    if fid == CONSTANT:
        return fp[3] if j == 0 else 0.0
    xr = x % (2.0 * _PI)
    if fid == COSINE:
        return math.cos(xr + 0.5 * _PI * j)
    if fid == ABS_SIN:
        return abs(math.sin(xr)) ** alpha
    a = fp[1]
    b = fp[2]
    acc = 0.0
    ak = 1.0
    bk = 1.0
    for k in range(int(fp[4])):
        acc += ak * math.cos(bk * xr)
        ak *= a
        bk *= b
    return acc


@njit(**_opts)
def integrand(kid, gamma, pc, fid, fp, lam, m, periodic, x, u):
    if periodic:
        return function_value(fid, 0, fp, x + u) * _periodized(kid, lam, pc, u)
    k = kernel_value(kid, gamma, u)
    if k == 0.0:
        return 0.0
    s = u / lam
    acc = 0.0
    coef = 1.0
    sp = 1.0
    for j in range(m + 1):
        acc += coef * function_value(fid, j, fp, x + s) * sp
        sp *= s
        coef *= -1.0 / (j + 1)
    return acc * k


@njit(**_opts)
def _gk15(kid, gamma, pc, fid, fp, lam, m, periodic, x, a, b):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    kr = 0.0
    ga = 0.0
    ab = 0.0
    for i in range(15):
        v = integrand(kid, gamma, pc, fid, fp, lam, m, periodic, x, c + h * _NODES[i])
        kr += _WK[i] * v
        ga += _WG[i] * v
        ab += _WK[i] * abs(v)
    kr *= h
    ga *= h
    ab *= abs(h)
    err = abs(kr - ga)
    floor = 50.0 * _EPS * ab
    return kr, (err if err > floor else floor)


@njit(**_opts)
def convolve_points(kid, gamma, fid, fp, lam, m, periodic, xs, edges,
                    abs_tol, rel_tol, max_depth, max_panels):
    """Adaptive integral for each x over the sorted breakpoints in ``edges[i]``.

    ``edges`` rows hold increasing breakpoints padded with NaN.  An interval
    is accepted once its G7/K15 difference is below its length share of the
    point's tolerance, at ``max_depth`` bisections, or once the point has
    used ``max_panels`` rule evaluations.  Intervals are refined level by
    level, as in the numpy backend, so an exhausted budget is spread over
    the whole range instead of the leftmost panels.
    """
    n = xs.shape[0]
    values = np.zeros(n)
    errors = np.zeros(n)
    forced = np.zeros(n, dtype=np.int64)
    pc = periodic_constants(kid, gamma, lam) if periodic else np.empty(0)
    # a level never holds more than twice the panels used so far
    cap = 2 * (edges.shape[1] + max_panels) + 8
    qa = np.empty(cap)
    qb = np.empty(cap)
    qk = np.empty(cap)
    qe = np.empty(cap)
    na = np.empty(cap)
    nb_ = np.empty(cap)
    nk = np.empty(cap)
    ne = np.empty(cap)
    for i in range(n):
        x = xs[i]
        row = edges[i]
        nb = 0
        while nb < row.shape[0] and not math.isnan(row[nb]):
            nb += 1
        if nb < 2:
            continue
        length = row[nb - 1] - row[0]
        if not length > 0.0:
            continue
        size = 0
        coarse = 0.0
        for p in range(nb - 1):
            if row[p + 1] > row[p]:
                kr, er = _gk15(kid, gamma, pc, fid, fp, lam, m, periodic, x, row[p], row[p + 1])
                qa[size] = row[p]
                qb[size] = row[p + 1]
                qk[size] = kr
                qe[size] = er
                coarse += kr
                size += 1
        used = size
        tol = abs_tol
        if rel_tol * abs(coarse) > tol:
            tol = rel_tol * abs(coarse)
        val = 0.0
        err = 0.0
        nforced = 0
        depth = 0
        while size > 0:
            over = used >= max_panels
            nsize = 0
            for q in range(size):
                a = qa[q]
                b = qb[q]
                er = qe[q]
                w = b - a
                local = tol * w / length
                tiny = w <= 4.0 * _EPS * max(abs(a), abs(b))
                if er <= local or depth >= max_depth or tiny or over:
                    val += qk[q]
                    err += er
                    if er > local:
                        nforced += 1
                else:
                    mid = 0.5 * (a + b)
                    k1, e1 = _gk15(kid, gamma, pc, fid, fp, lam, m, periodic, x, a, mid)
                    k2, e2 = _gk15(kid, gamma, pc, fid, fp, lam, m, periodic, x, mid, b)
                    na[nsize] = a
                    nb_[nsize] = mid
                    nk[nsize] = k1
                    ne[nsize] = e1
                    na[nsize + 1] = mid
                    nb_[nsize + 1] = b
                    nk[nsize + 1] = k2
                    ne[nsize + 1] = e2
                    nsize += 2
            used += nsize
            for q in range(nsize):
                qa[q] = na[q]
                qb[q] = nb_[q]
                qk[q] = nk[q]
                qe[q] = ne[q]
            size = nsize
            depth += 1
        values[i] = val
        errors[i] = err
        forced[i] = nforced
    return values, errors, forced
