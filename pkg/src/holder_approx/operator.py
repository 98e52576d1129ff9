"""Convolution operators on the line and Riesz means of Fourier series.

``apply_F`` evaluates lam int f(t) K(lam (t - x)) dt, ``apply_F_m`` its
Taylor-modified version

    sum_{j<=m} (-1)^j / j!  lam int f^(j)(x + t) t^j K(lam t) dt,

and ``taylor_remainder_error`` the double-integral remainder f - F_m f.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import funcspace as fs
from . import kernel as kn
from .convolution import UnsupportedConfiguration, convolve_grid, function_sup
from .quad import QuadConfig, QuadResult, integrate_interval

__all__ = [
    "OperatorSpec", "PeriodicMeanSpec", "UnsupportedConfiguration",
    "lambda_for_scale", "operator_for_scale", "apply_F", "apply_F_m",
    "taylor_remainder_error", "fourier_coefficients", "riesz_mean", "riesz_mean_grid",
]

DEFAULT_QUAD = QuadConfig(abs_tol=1e-10, rel_tol=1e-10)


@dataclass(frozen=True)
class OperatorSpec:
    kernel: kn.KernelSpec
    lam: float
    m: int = 0

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"lambda must be positive and finite, got {self.lam}")
        if int(self.m) != self.m or self.m < 0:
            raise ValueError(f"m must be a nonnegative integer, got {self.m}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "m", int(self.m))


@dataclass(frozen=True)
class PeriodicMeanSpec:
    gamma: float
    n: int
    coeff_grid_size: int = 4096

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        N = self.coeff_grid_size
        if int(N) != N or N < 1 or (int(N) & (int(N) - 1)):
            raise ValueError(f"coeff_grid_size must be a power of two, got {N}")
        if N < 4 * self.n:
            raise ValueError(f"coeff_grid_size must be >= 4n = {4 * self.n}, got {N}")


def lambda_for_scale(kernel, scale):
    """Map the family's natural parameter to lambda.

    Picard: r -> 1/r.  Gauss-Weierstrass: r -> 1/(2 sqrt(r)), which makes the
    operator the heat semigroup at time r.  Poisson: eps -> 1/eps.  Fejer and
    Riesz are already parametrized by lambda.
    """
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    kid = kernel.id
    if kid in (kn.KernelId.PICARD, kn.KernelId.POISSON):
        return 1.0 / scale
    if kid is kn.KernelId.GAUSS_WEIERSTRASS:
        return 0.5 / math.sqrt(scale)
    return float(scale)


def operator_for_scale(kernel, scale, m=0):
    return OperatorSpec(kernel, lambda_for_scale(kernel, scale), m)


def _evaluate(spec, f, x, cfg, backend, full_output):
    cfg = cfg or DEFAULT_QUAD
    scalar = np.ndim(x) == 0
    res = convolve_grid(spec.kernel, spec.lam, f, np.atleast_1d(np.asarray(x, dtype=float)),
                        m=spec.m, abs_tol=cfg.abs_tol, rel_tol=cfg.rel_tol, backend=backend)
    if scalar:
        value = float(res.values[0])
        if full_output:
            return QuadResult(value, float(res.errors[0]), 0, bool(res.converged[0]))
        return value
    values = res.values.reshape(np.shape(x))
    return (values, res) if full_output else values


def apply_F(spec, f, x, cfg=None, backend=None, full_output=False):
    """lam int f(t) K(lam (t - x)) dt at scalar or array ``x``.

    With ``full_output`` a scalar call returns a :class:`QuadResult` and an
    array call returns ``(values, ConvolutionResult)``.
    """
    if spec.m != 0:
        raise ValueError("apply_F needs m = 0; use apply_F_m for the modified operator")
    return _evaluate(spec, f, x, cfg, backend, full_output)


def apply_F_m(spec, f, x, cfg=None, backend=None, full_output=False):
    """The Taylor-modified operator of order ``spec.m``."""
    if spec.m > f.max_derivative_order:
        raise fs.CapabilityError(
            f"{f.name} certifies derivatives up to order {f.max_derivative_order}, requested m={spec.m}")
    return _evaluate(spec, f, x, cfg, backend, full_output)


def _remainder_inner(f, m, x, t, cfg, kinks):
    base = fs.eval_derivative(f, m, x - t)

    def g(u):
        return (1.0 - u) ** (m - 1) * (np.asarray(fs.eval_derivative(f, m, x - t + u * t)) - base)

    pts = [(c - x + t) / t for c in kinks]
    res = integrate_interval(g, 0.0, 1.0, cfg, points=pts)
    return res


def _shifted_kinks(f, m, x, reach):
    kinks = f.kinks(m)
    if not f.periodic:
        return list(kinks)
    two_pi = 2.0 * math.pi
    kmin = int(math.floor((x - reach) / two_pi)) - 1
    kmax = int(math.ceil((x + reach) / two_pi)) + 1
    return [c + two_pi * k for k in range(kmin, kmax + 1) for c in kinks]


def taylor_remainder_error(spec, f, x, cfg=None, full_output=False):
    """lam int t^m/(m-1)! int_0^1 (1-u)^(m-1) [f^(m)(x-t+ut) - f^(m)(x-t)] du K(lam t) dt.

    Equals f(x) - apply_F_m(spec, f, x).  The tolerance is split evenly
    between the outer integral and the inner integrals; the inner budget is
    scaled by the kernel moment so that its total contribution stays within
    half of ``cfg.abs_tol``.
    """
    cfg = cfg or DEFAULT_QUAD
    m = spec.m
    if m < 1:
        raise ValueError("taylor_remainder_error needs m >= 1")
    if m > f.max_derivative_order:
        raise fs.CapabilityError(
            f"{f.name} certifies derivatives up to order {f.max_derivative_order}, requested m={m}")
    kernel = spec.kernel
    if kernel.decay_class is not kn.DecayClass.EXPONENTIAL:
        raise UnsupportedConfiguration(
            f"the remainder integral is only implemented for exponentially decaying kernels, not {kernel.name}")
    lam = spec.lam
    x = float(x)
    half_abs = 0.5 * cfg.abs_tol
    sup = 2.0 * function_sup(f, m) * max(1.0, lam ** -m)
    R = kn.truncation_radius(kernel, half_abs, sup, power=m)
    weight = 2.0 * kn.kernel_moment(kernel, m) / (lam ** m * math.factorial(m - 1))
    inner_cfg = QuadConfig(half_abs / max(weight, 1e-300), 0.5 * cfg.rel_tol, cfg.max_subdivisions)
    outer_cfg = QuadConfig(half_abs, 0.5 * cfg.rel_tol, cfg.max_subdivisions)
    kinks = _shifted_kinks(f, m, x, R / lam)
    inner_err = [0.0]
    inner_ok = [True]

    def outer(v):
        v = np.asarray(v, dtype=float)
        out = np.empty(v.shape)
        for idx, vi in np.ndenumerate(v):
            t = vi / lam
            r = _remainder_inner(f, m, x, t, inner_cfg, kinks)
            w = t ** m / math.factorial(m - 1) * float(kn.eval_kernel(kernel, vi))
            inner_err[0] = max(inner_err[0], r.error_estimate * abs(w))
            inner_ok[0] &= r.converged
            out[idx] = w * r.value
        return out

    pts = [0.0] + [s * 2.0 ** k for k in range(-3, int(math.log2(R)) + 1) for s in (-1.0, 1.0)]
    pts += [lam * (x - c) for c in kinks]
    res = integrate_interval(outer, -R, R, outer_cfg, points=pts)
    # Converged inner integrals stay within their share by construction of inner_cfg;
    # otherwise fall back to the crude bound max|weight * inner error| * 2R.
    inner_bound = half_abs if inner_ok[0] else inner_err[0] * 2.0 * R
    err = res.error_estimate + 0.1 * half_abs + inner_bound
    if full_output:
        return QuadResult(res.value, err, res.subdivisions_used, res.converged and inner_ok[0])
    return res.value


def _require_periodic(f):
    if not f.periodic:
        raise ValueError(f"{f.name} is not 2pi-periodic; Fourier coefficients are undefined")


def fourier_coefficients(f, K_max, grid_size=4096):
    """c_k = (1/2pi) int_0^2pi f e^{-ikx} dx for k = -K_max..K_max (in that order).

    Computed by the equispaced trapezoid rule, i.e. an FFT of ``grid_size``
    samples.  The error is the aliased tail sum_{l != 0} c_{k + l N}.
    """
    _require_periodic(f)
    K_max = int(K_max)
    if K_max < 1:
        raise ValueError("K_max must be a positive integer")
    if grid_size < 4 * K_max:
        raise ValueError(f"grid_size must be >= 4*K_max = {4 * K_max}, got {grid_size}")
    x = 2.0 * math.pi * np.arange(grid_size) / grid_size
    c = np.fft.fft(np.asarray(fs.eval_function(f, x))) / grid_size
    k = np.arange(-K_max, K_max + 1)
    return c[k % grid_size]


def riesz_weights(gamma, n):
    k = np.arange(-n, n + 1)
    return (1.0 - np.abs(k) / n) ** gamma


def riesz_mean(spec, f, x):
    """sum_{|k|<=n} (1 - |k|/n)^gamma c_k e^{ikx} at scalar or array ``x``."""
    c = fourier_coefficients(f, spec.n, spec.coeff_grid_size)
    w = riesz_weights(spec.gamma, spec.n) * c
    k = np.arange(-spec.n, spec.n + 1)
    xa = np.asarray(x, dtype=float)
    z = np.exp(1j * np.multiply.outer(xa, k)) @ w
    _check_real(z)
    return float(z.real) if xa.ndim == 0 else z.real


def riesz_mean_grid(spec, f, grid_size):
    """Riesz mean sampled at 2 pi j / grid_size, j = 0..grid_size-1, via an inverse FFT."""
    if grid_size < 2 * spec.n + 1:
        raise ValueError(f"grid_size must exceed 2n, got {grid_size}")
    c = fourier_coefficients(f, spec.n, spec.coeff_grid_size)
    w = riesz_weights(spec.gamma, spec.n) * c
    k = np.arange(-spec.n, spec.n + 1)
    spectrum = np.zeros(grid_size, dtype=complex)
    spectrum[k % grid_size] = w
    z = np.fft.ifft(spectrum) * grid_size
    _check_real(z)
    return z.real


def _check_real(z):
    resid = float(np.max(np.abs(np.imag(z)), initial=0.0))
    if resid >= 1e-10:
        raise ArithmeticError(f"Riesz mean has imaginary residue {resid:.3e}")
