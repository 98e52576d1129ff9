"""Grid evaluation of kernel convolutions, the hot loop behind every operator.

For each x the integral is taken in the substituted variable u = lam (t - x),
so the kernel sets the scale.  Two integration modes exist:

* line: int f(x + u/lam) K(u) du, with the Taylor-modified integrand when
  m >= 1.  Compactly supported f limits u to lam (supp - x); otherwise an
  exponential kernel is truncated at a radius with a known tail bound.
* periodic: int_{-pi}^{pi} f(x + s) P(s) ds with P the 2pi-periodized kernel.
  Used for periodic f under kernels with slowly decaying tails.

Both backends share the breakpoint builder and the acceptance rule (an
interval is kept once its G7/K15 difference is below its length share of the
per-point tolerance), so they refine the same intervals.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from . import funcspace as fs
from . import kernel as kn
from ._backend import max_threads, resolve_backend
from .quad import GK_GAUSS_WEIGHTS, GK_KRONROD_WEIGHTS, GK_NODES

_KERNEL_CODES = {
    kn.KernelId.FEJER: 0,
    kn.KernelId.RIESZ: 1,
    kn.KernelId.POISSON: 2,
    kn.KernelId.PICARD: 3,
    kn.KernelId.GAUSS_WEIERSTRASS: 4,
}
_FUNCTION_CODES = {
    fs.FunctionId.HOLDER_BUMP: 0,
    fs.FunctionId.ZERO_MEAN_BUMP_ANTIDERIVATIVE: 1,
    fs.FunctionId.COSINE: 2,
    fs.FunctionId.ABS_SIN_PERIODIC: 3,
    fs.FunctionId.WEIERSTRASS_PERIODIC: 4,
    fs.FunctionId.CONSTANT: 5,
}
_EPS = np.finfo(float).eps
_CHUNK = 2048
_MAX_OSCILLATION_POINTS = 4096


class UnsupportedConfiguration(ValueError):
    """The requested operator has no convergent integral representation here."""


@dataclass(frozen=True)
class ConvolutionResult:
    values: np.ndarray
    errors: np.ndarray
    converged: np.ndarray


def function_sup(f, m=0):
    """Upper bound on max_j<=m sup|f^(j)|."""
    fid = f.id
    if fid is fs.FunctionId.WEIERSTRASS_PERIODIC:
        return 1.0 / (1.0 - f.a)
    if fid is fs.FunctionId.CONSTANT:
        return abs(f.value)
    return 1.0


def integration_mode(kernel, f, m):
    """``"line"`` or ``"periodic"`` for this (kernel, f, m) combination."""
    if not f.periodic or kernel.decay_class is kn.DecayClass.EXPONENTIAL:
        return "line"
    if m > 0:
        raise UnsupportedConfiguration(
            f"the Taylor-modified operator with m={m} diverges for periodic {f.name} "
            f"under {kernel.name}, whose first moment is infinite")
    return "periodic"


def _function_params(f):
    a = f.a if f.a is not None else 0.0
    b = f.b if f.b is not None else 0.0
    return np.array([f.alpha, a, b, f.value, f.n_terms], dtype=float)


def _periodic_copies(points, x, lo, hi, lam):
    """lam (c + 2 pi k - x) for every kink c and every k landing in [lo, hi]."""
    if not points:
        return np.empty((x.size, 0))
    two_pi = 2.0 * math.pi
    span_lo = x + lo / lam
    span_hi = x + hi / lam
    kmin = int(math.floor((span_lo.min() - max(points)) / two_pi))
    kmax = int(math.ceil((span_hi.max() - min(points)) / two_pi))
    shifts = np.array([c + two_pi * k for k in range(kmin, kmax + 1) for c in points])
    return lam * (shifts[None, :] - x[:, None])


def _pow2_points(limit, scale):
    if not limit > 0:
        return np.empty(0)
    top = int(math.ceil(math.log2(max(limit / scale, 1.0)))) + 1
    k = np.arange(-3, top + 1)
    p = scale * 2.0 ** k
    return np.concatenate([-p, p])


def _sort_dedupe(cand, lo, hi):
    cand = np.where((cand >= lo[:, None]) & (cand <= hi[:, None]), cand, np.nan)
    cand = np.sort(cand, axis=1)
    dup = np.zeros_like(cand, dtype=bool)
    dup[:, 1:] = cand[:, 1:] == cand[:, :-1]
    cand[dup] = np.nan
    cand = np.sort(cand, axis=1)
    keep = ~np.all(np.isnan(cand), axis=0)
    cand = cand[:, keep]
    empty = ~(hi > lo)
    cand[empty] = np.nan
    return cand


def build_breakpoints(kernel, f, lam, m, xs, abs_tol):
    """Integration limits and initial breakpoints for each x.

    Returns ``(edges, mode, tail)``: ``edges`` is an (nx, k) array of sorted
    breakpoints padded with NaN (fewer than two entries means the integral
    vanishes), ``tail`` the truncation bound added to every error.
    """
    xs = np.asarray(xs, dtype=float)
    mode = integration_mode(kernel, f, m)
    lam = float(lam)
    nx = xs.size
    if mode == "periodic":
        lo = np.full(nx, -math.pi)
        hi = np.full(nx, math.pi)
        parts = [lo[:, None], hi[:, None], np.zeros((nx, 1))]
        parts.append(np.tile(_pow2_points(math.pi, 1.0 / lam), (nx, 1)))
        kinks = f.kinks(0)
        if kinks:
            parts.append(_periodic_copies(kinks, xs, -math.pi, math.pi, 1.0))
        return _sort_dedupe(np.concatenate(parts, axis=1), lo, hi), mode, 0.0

    tail = 0.0
    if kernel.decay_class is kn.DecayClass.EXPONENTIAL:
        sup = function_sup(f, m) * max(1.0, lam ** -m)
        R = kn.truncation_radius(kernel, abs_tol, sup, power=m)
        tail = 0.1 * abs_tol
        lo = np.full(nx, -R)
        hi = np.full(nx, R)
    else:
        lo = np.full(nx, -np.inf)
        hi = np.full(nx, np.inf)
    if not f.periodic:
        S = f.support_radius
        lo = np.maximum(lo, lam * (-S - xs))
        hi = np.minimum(hi, lam * (S - xs))
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise UnsupportedConfiguration(f"{f.name} under {kernel.name} has no finite integration range")
    reach = float(np.max(np.maximum(np.abs(lo), np.abs(hi)), initial=0.0))
    parts = [lo[:, None], hi[:, None], np.zeros((nx, 1)),
             np.tile(_pow2_points(reach, 1.0), (nx, 1))]
    kinks = sorted(set(f.kinks(0)) | (set(f.kinks(1)) if m >= 1 else set()))
    if kinks:
        if f.periodic:
            parts.append(_periodic_copies(kinks, xs, float(lo.min()), float(hi.max()), lam))
        else:
            parts.append(lam * (np.array(kinks)[None, :] - xs[:, None]))
    half = kernel.oscillation_half_period
    if half is not None:
        step = 2.0 * half if kernel.id is kn.KernelId.FEJER else half
        count = int(reach / step)
        if 0 < count <= _MAX_OSCILLATION_POINTS:
            k = np.arange(1, count + 1) * step
            parts.append(np.tile(np.concatenate([-k, k]), (nx, 1)))
    return _sort_dedupe(np.concatenate(parts, axis=1), lo, hi), mode, tail


# -- numpy backend --------------------------------------------------------------

def _integrand(kernel, f, lam, m, periodic, x, u):
    if periodic:
        return np.asarray(fs.eval_function(f, x + u)) * kn.periodized_kernel(kernel, lam, u)
    k = kn.eval_kernel(kernel, u)
    s = u / lam
    acc = np.zeros_like(u)
    coef = 1.0
    for j in range(m + 1):
        acc = acc + coef * np.asarray(fs.eval_derivative(f, j, x + s)) * s ** j
        coef *= -1.0 / (j + 1)
    return acc * k


def _gk15_batch(kernel, f, lam, m, periodic, x, a, b):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    u = c[:, None] + h[:, None] * GK_NODES
    v = _integrand(kernel, f, lam, m, periodic, np.broadcast_to(x[:, None], u.shape), u)
    kr = h * (v @ GK_KRONROD_WEIGHTS)
    ga = h * (v @ GK_GAUSS_WEIGHTS)
    ab = np.abs(h) * (np.abs(v) @ GK_KRONROD_WEIGHTS)
    return kr, np.maximum(np.abs(kr - ga), 50.0 * _EPS * ab)


def _convolve_numpy(kernel, f, lam, m, periodic, xs, edges, abs_tol, rel_tol, max_depth, max_panels):
    nx = xs.size
    values = np.zeros(nx)
    errors = np.zeros(nx)
    forced = np.zeros(nx, dtype=np.int64)
    left = edges[:, :-1]
    right = edges[:, 1:]
    valid = ~np.isnan(left) & ~np.isnan(right) & (right > left)
    owner, col = np.nonzero(valid)
    if owner.size == 0:
        return values, errors, forced
    a = left[owner, col]
    b = right[owner, col]
    nb = np.sum(~np.isnan(edges), axis=1)
    first = edges[:, 0]
    last = edges[np.arange(nx), np.maximum(nb - 1, 0)]
    length = np.where(nb >= 2, last - first, 1.0)
    kr, er = _gk15_batch(kernel, f, lam, m, periodic, xs[owner], a, b)
    coarse = np.bincount(owner, kr, minlength=nx)
    tol = np.maximum(abs_tol, rel_tol * np.abs(coarse))
    used = np.bincount(owner, minlength=nx)
    depth = np.zeros(owner.size, dtype=np.int64)
    while owner.size:
        w = b - a
        local = tol[owner] * w / length[owner]
        tiny = w <= 4.0 * _EPS * np.maximum(np.abs(a), np.abs(b))
        over = used[owner] >= max_panels
        accept = (er <= local) | (depth >= max_depth) | tiny | over
        acc_owner = owner[accept]
        values += np.bincount(acc_owner, kr[accept], minlength=nx)
        errors += np.bincount(acc_owner, er[accept], minlength=nx)
        forced += np.bincount(acc_owner[er[accept] > local[accept]], minlength=nx)
        split = ~accept
        if not split.any():
            break
        o = owner[split]
        mid = 0.5 * (a[split] + b[split])
        a = np.concatenate([a[split], mid])
        b = np.concatenate([mid, b[split]])
        owner = np.concatenate([o, o])
        depth = np.concatenate([depth[split], depth[split]]) + 1
        kr, er = _gk15_batch(kernel, f, lam, m, periodic, xs[owner], a, b)
        used += np.bincount(owner, minlength=nx)
    return values, errors, forced


# -- dispatch -----------------------------------------------------------------

def _run_numba(kernel, f, lam, m, periodic, xs, edges, abs_tol, rel_tol, max_depth, max_panels):
    from . import _accel

    kid = _KERNEL_CODES[kernel.id]
    gamma = kernel.gamma if kernel.gamma is not None else 1.0
    fid = _FUNCTION_CODES[f.id]
    fp = _function_params(f)
    edges = np.ascontiguousarray(edges)

    def run(sl):
        return _accel.convolve_points(kid, gamma, fid, fp, float(lam), int(m), bool(periodic),
                                      np.ascontiguousarray(xs[sl]), edges[sl],
                                      float(abs_tol), float(rel_tol), int(max_depth), int(max_panels))

    threads = min(max_threads(), max(1, xs.size // 256))
    if threads <= 1:
        return run(slice(None))
    bounds = np.linspace(0, xs.size, threads + 1).astype(int)
    slices = [slice(bounds[i], bounds[i + 1]) for i in range(threads)]
    with ThreadPoolExecutor(threads) as pool:
        parts = list(pool.map(run, slices))
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(3))


def convolve_grid(kernel, lam, f, xs, m=0, abs_tol=1e-9, rel_tol=1e-9, max_depth=60,
                  max_panels=5000, backend=None):
    """Evaluate the (Taylor-modified) convolution lam int f K(lam (t - x)) dt on ``xs``.

    ``max_panels`` caps the G7/K15 evaluations per point; points that hit it
    or ``max_depth`` come back with ``converged = False``.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if m > f.max_derivative_order:
        raise fs.CapabilityError(
            f"{f.name} certifies derivatives up to order {f.max_derivative_order}, requested m={m}")
    xs = np.asarray(xs, dtype=float)
    shape = xs.shape
    xs = xs.ravel()
    if not np.all(np.isfinite(xs)):
        raise ValueError("evaluation points must be finite")
    backend = resolve_backend(backend)
    values = np.empty(xs.size)
    errors = np.empty(xs.size)
    forced = np.empty(xs.size, dtype=np.int64)
    for start in range(0, xs.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        edges, mode, tail = build_breakpoints(kernel, f, lam, m, xs[sl], abs_tol)
        periodic = mode == "periodic"
        args = (kernel, f, lam, m, periodic, xs[sl], edges, abs_tol, rel_tol, max_depth, max_panels)
        if backend == "numba":
            v, e, c = _run_numba(*args)
        else:
            v, e, c = _convolve_numpy(*args)
        values[sl] = v
        errors[sl] = e + tail
        forced[sl] = c
    return ConvolutionResult(values.reshape(shape), errors.reshape(shape), (forced == 0).reshape(shape))
