"""Fejer-type kernels: evaluation, moments and condition checks.

Five concrete kernels are supported, all normalized to unit mass on the
real line:

========================  =========================================
Fejer                     (2/pi) (sin(t/2) / t)**2
Riesz(gamma)              (1/pi) int_0^1 (1-x)**gamma cos(t x) dx
Poisson                   1 / (pi (1 + t**2))
Picard                    exp(-|t|) / 2
Gauss-Weierstrass         exp(-t**2) / sqrt(pi)
========================  =========================================
"""
from dataclasses import dataclass, field
from enum import Enum
import math

import numpy as np

from . import _dd
from .quad import GK_KRONROD_WEIGHTS, GK_NODES, QuadConfig, integrate_interval

RIESZ_SERIES_CUTOFF = 12.0
_GRADING_LEVELS = 60
_ASYMPTOTIC_MIN_RADIUS = 30.0


class KernelId(Enum):
    FEJER = "fejer"
    RIESZ = "riesz"
    POISSON = "poisson"
    PICARD = "picard"
    GAUSS_WEIERSTRASS = "gauss-weierstrass"


class DecayClass(Enum):
    EXPONENTIAL = "exponential"
    QUADRATIC = "quadratic"
    SERIES_OSCILLATORY = "series-oscillatory"


_DECAY = {
    KernelId.FEJER: DecayClass.QUADRATIC,
    KernelId.RIESZ: DecayClass.SERIES_OSCILLATORY,
    KernelId.POISSON: DecayClass.QUADRATIC,
    KernelId.PICARD: DecayClass.EXPONENTIAL,
    KernelId.GAUSS_WEIERSTRASS: DecayClass.EXPONENTIAL,
}

_ALIASES = {
    "fejer": KernelId.FEJER,
    "riesz": KernelId.RIESZ,
    "poisson": KernelId.POISSON,
    "picard": KernelId.PICARD,
    "gauss-weierstrass": KernelId.GAUSS_WEIERSTRASS,
    "gauss_weierstrass": KernelId.GAUSS_WEIERSTRASS,
    "gaussweierstrass": KernelId.GAUSS_WEIERSTRASS,
    "gw": KernelId.GAUSS_WEIERSTRASS,
    "weierstrass": KernelId.GAUSS_WEIERSTRASS,
}


class _Flag:
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name

    __str__ = __repr__


DIVERGENT = _Flag("DIVERGENT")
UNBOUNDED = _Flag("UNBOUNDED")


@dataclass(frozen=True)
class KernelSpec:
    id: KernelId
    gamma: float = None
    decay_class: DecayClass = field(default=None)

    def __post_init__(self):
        kid = KernelId(self.id)
        object.__setattr__(self, "id", kid)
        if kid is KernelId.RIESZ:
            if self.gamma is None or not (self.gamma > 0 and math.isfinite(self.gamma)):
                raise ValueError(f"Riesz kernel needs gamma > 0, got {self.gamma!r}")
            object.__setattr__(self, "gamma", float(self.gamma))
        elif self.gamma is not None:
            raise ValueError(f"gamma is only meaningful for the Riesz kernel, not {kid.value}")
        expected = _DECAY[kid]
        if self.decay_class is None:
            object.__setattr__(self, "decay_class", expected)
        elif DecayClass(self.decay_class) is not expected:
            raise ValueError(f"{kid.value} kernel has decay class {expected.value}")

    @classmethod
    def from_name(cls, name, gamma=None):
        key = name.strip().lower().replace(" ", "-")
        if key not in _ALIASES:
            raise ValueError(f"unknown kernel {name!r}; expected one of {sorted(set(_ALIASES))}")
        return cls(_ALIASES[key], gamma)

    @property
    def name(self):
        if self.id is KernelId.RIESZ:
            return f"riesz(gamma={self.gamma:g})"
        return self.id.value

    @property
    def nonnegative(self):
        if self.id is KernelId.RIESZ:
            return self.gamma >= 1.0
        return True

    @property
    def kinks(self):
        """Points where the kernel is not smooth."""
        return (0.0,) if self.id is KernelId.PICARD else ()

    @property
    def oscillation_half_period(self):
        """Half period of kernel oscillations, or None for monotone tails."""
        if self.id in (KernelId.FEJER, KernelId.RIESZ):
            return math.pi
        return None


def fejer():
    return KernelSpec(KernelId.FEJER)


def riesz(gamma):
    return KernelSpec(KernelId.RIESZ, gamma)


def poisson():
    return KernelSpec(KernelId.POISSON)


def picard():
    return KernelSpec(KernelId.PICARD)


def gauss_weierstrass():
    return KernelSpec(KernelId.GAUSS_WEIERSTRASS)


def _check_finite(t):
    t = np.asarray(t, dtype=float)
    if np.isnan(t).any():
        raise ValueError("kernel argument is NaN")
    return t


def _fejer(t):
    t = np.abs(t)
    small = t < 1e-4
    ts = np.where(small, 1.0, t)
    s = np.where(small, 0.5 - t * t / 48.0 + t ** 4 / 3840.0, np.sin(0.5 * ts) / ts)
    return (2.0 / math.pi) * s * s


def eval_kernel(spec, t):
    """Evaluate the kernel at ``t`` (scalar or array); symmetric by construction."""
    t = np.abs(_check_finite(t))
    kid = spec.id
    if kid is KernelId.PICARD:
        out = 0.5 * np.exp(-t)
    elif kid is KernelId.GAUSS_WEIERSTRASS:
        out = np.exp(-t * t) / math.sqrt(math.pi)
    elif kid is KernelId.POISSON:
        out = 1.0 / (math.pi * (1.0 + t * t))
    elif kid is KernelId.FEJER:
        out = _fejer(t)
    else:
        out = riesz_kernel_eval(spec.gamma, t)
    out = np.asarray(out)
    return out if out.ndim else float(out)


# -- Riesz kernel --------------------------------------------------------------

def _riesz_series(gamma, t):
    """Alternating double series summed in double-double arithmetic.

    Terms grow like t**(2k)/(2k)! before decaying, so plain doubles lose
    about log10(max term) digits; double-double keeps ~32.
    """
    t = np.abs(np.asarray(t, dtype=float))
    zero = np.zeros_like(t)
    t2h, t2l = _dd.two_prod(t, t)
    th, tl = np.ones_like(t), zero.copy()
    s1h, s1l = zero.copy(), zero.copy()
    s2h, s2l = zero.copy(), zero.copy()
    kmin = int(np.max(t, initial=0.0)) + 2
    for k in range(600):
        dh, dl = _dd.two_sum(2.0 * k + 1.0, gamma)
        qh, ql = _dd.dd_div(th, tl, dh + zero, dl + zero)
        s1h, s1l = _dd.dd_add(s1h, s1l, qh, ql)
        uh, ul = _dd.dd_mul_d(th, tl, t)
        uh, ul = _dd.dd_div_d(uh, ul, 2.0 * k + 1.0)
        dh, dl = _dd.two_sum(2.0 * k + 2.0, gamma)
        qh, ql = _dd.dd_div(uh, ul, dh + zero, dl + zero)
        s2h, s2l = _dd.dd_add(s2h, s2l, qh, ql)
        th, tl = _dd.dd_mul(th, tl, t2h, t2l)
        th, tl = _dd.dd_div_d(-th, -tl, (2.0 * k + 1.0) * (2.0 * k + 2.0))
        if k >= kmin and np.all(np.abs(th) <= 1e-34 * np.abs(s1h) + 1e-300):
            break
    s1 = s1h + s1l
    s2 = s2h + s2l
    return (np.cos(t) * s1 + np.sin(t) * s2) / math.pi


def _graded_panels(panel_count):
    w = 1.0 / panel_count
    lo = [w * 2.0 ** -(l + 1) for l in range(_GRADING_LEVELS)]
    hi = [w * 2.0 ** -l for l in range(_GRADING_LEVELS)]
    lo += [w * i for i in range(1, panel_count)]
    hi += [w * (i + 1) for i in range(1, panel_count)]
    return np.array(lo), np.array(hi), w * 2.0 ** -_GRADING_LEVELS


def _riesz_quadrature(gamma, t):
    """(1/pi) int_0^1 y**gamma cos(t (1 - y)) dy on half-period panels.

    The first panel is graded geometrically towards the y**gamma endpoint
    singularity; the final sliver [0, delta] is integrated in closed form.
    """
    t = np.abs(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    order = np.argsort(t, kind="stable")
    chunk = 256
    for start in range(0, t.size, chunk):
        idx = order[start:start + chunk]
        tc = t[idx]
        panels = max(1, int(math.ceil(tc.max() / math.pi)))
        a, b, delta = _graded_panels(panels)
        c = 0.5 * (a + b)
        h = 0.5 * (b - a)
        y = c[:, None] + h[:, None] * GK_NODES
        wy = (h[:, None] * GK_KRONROD_WEIGHTS) * y ** gamma
        vals = np.cos(tc[:, None, None] * (1.0 - y)[None]) * wy[None]
        total = vals.sum(axis=(1, 2))
        total += np.cos(tc) * delta ** (gamma + 1.0) / (gamma + 1.0)
        out[idx] = total / math.pi
    return out


def riesz_kernel_eval(gamma, t, regime=None):
    """Riesz kernel K_R(gamma)(t).

    ``regime`` forces ``"series"`` or ``"quadrature"``; by default the
    series is used for |t| <= 12 and the cosine integral above.
    """
    if not (gamma > 0 and math.isfinite(gamma)):
        raise ValueError(f"Riesz kernel needs gamma > 0, got {gamma!r}")
    t = np.abs(_check_finite(t))
    scalar = t.ndim == 0
    shape = t.shape
    t = np.atleast_1d(t).ravel()
    if regime == "series":
        out = _riesz_series(gamma, t)
    elif regime == "quadrature":
        out = _riesz_quadrature(gamma, t)
    elif regime is None:
        out = np.empty_like(t)
        low = t <= RIESZ_SERIES_CUTOFF
        if low.any():
            out[low] = _riesz_series(gamma, t[low])
        if (~low).any():
            out[~low] = _riesz_quadrature(gamma, t[~low])
    else:
        raise ValueError(f"unknown regime {regime!r}")
    return float(out[0]) if scalar else out.reshape(shape)


def _falling(g, n):
    out = 1.0
    for i in range(n):
        out *= g - i
    return out


def _riesz_tail(gamma, R):
    """int_R^inf K_R(gamma) from the two-endpoint asymptotic expansion."""
    smooth = 0.0
    prev = math.inf
    for n in range(1, 60, 2):
        a_n = -_falling(gamma, n) * (-1.0) ** ((n + 1) // 2)
        term = a_n / (n * R ** n)
        if abs(term) > prev:
            break
        smooth += term
        prev = abs(term)
        if prev < 1e-30:
            break
    s = gamma + 1.0
    c = 0.5 * math.pi * (gamma + 1.0)
    acc = 0j
    rising = 1.0
    prev = math.inf
    for k in range(60):
        term = 1j * (-1j) ** k * rising * R ** (-s - k)
        if abs(term) > prev:
            break
        acc += term
        prev = abs(term)
        if prev < 1e-30:
            break
        rising *= s + k
    osc = (np.exp(1j * (R - c)) * acc).real
    return (smooth + math.gamma(gamma + 1.0) * osc) / math.pi


def _riesz_asymptotic(gamma, t):
    """Leading large-|t| form of K_R(gamma)."""
    t = np.abs(np.asarray(t, dtype=float))
    c = 0.5 * math.pi * (gamma + 1.0)
    return (gamma / t ** 2 + math.gamma(gamma + 1.0) * t ** (-gamma - 1.0) * np.cos(t - c)) / math.pi


def kernel_tail_mass(spec, R):
    """int_R^inf K(u) du for R > 0 (closed form or asymptotic expansion)."""
    if not R > 0:
        raise ValueError("tail radius must be positive")
    kid = spec.id
    if kid is KernelId.PICARD:
        return 0.5 * math.exp(-R)
    if kid is KernelId.GAUSS_WEIERSTRASS:
        return 0.5 * math.erfc(R)
    if kid is KernelId.POISSON:
        return math.atan(1.0 / R) / math.pi
    if R < _ASYMPTOTIC_MIN_RADIUS:
        raise ValueError(f"asymptotic tail needs R >= {_ASYMPTOTIC_MIN_RADIUS}")
    gamma = 1.0 if kid is KernelId.FEJER else spec.gamma
    return _riesz_tail(gamma, R)


def fourier_multiplier(spec, w):
    """int K(x) exp(-i w x) dx, the kernel's Fourier transform."""
    w = np.abs(np.asarray(w, dtype=float))
    kid = spec.id
    if kid is KernelId.PICARD:
        out = 1.0 / (1.0 + w * w)
    elif kid is KernelId.GAUSS_WEIERSTRASS:
        out = np.exp(-0.25 * w * w)
    elif kid is KernelId.POISSON:
        out = np.exp(-w)
    else:
        gamma = 1.0 if kid is KernelId.FEJER else spec.gamma
        out = np.where(w < 1.0, np.abs(1.0 - w) ** gamma, 0.0)
    return out if out.ndim else float(out)


def periodized_kernel(spec, lam, s):
    """sum_k lam K(lam (s + 2 pi k)), the 2pi-periodic version of lam K(lam s)."""
    s = np.asarray(s, dtype=float)
    s = np.abs(np.remainder(s + math.pi, 2.0 * math.pi) - math.pi)
    kid = spec.id
    if kid is KernelId.POISSON:
        eps = 1.0 / lam
        sh = math.sinh(0.5 * eps)
        sn = np.sin(0.5 * s)
        out = math.sinh(eps) / (4.0 * math.pi * (sh * sh + sn * sn))
    elif kid is KernelId.PICARD:
        q = -math.expm1(-2.0 * math.pi * lam)
        out = 0.5 * lam * (np.exp(-lam * s) + np.exp(-lam * (2.0 * math.pi - s))) / q
    elif kid is KernelId.GAUSS_WEIERSTRASS:
        kmax = int(math.ceil(7.0 / (2.0 * math.pi * lam))) + 1
        k = np.arange(-kmax, kmax + 1)
        shifted = s[..., None] + 2.0 * math.pi * k
        out = (lam / math.sqrt(math.pi)) * np.exp(-(lam * shifted) ** 2).sum(axis=-1)
    else:
        gamma = 1.0 if kid is KernelId.FEJER else spec.gamma
        j = np.arange(1, int(math.ceil(lam)))
        w = (1.0 - j / lam) ** gamma
        out = (1.0 + 2.0 * (np.cos(s[..., None] * j) * w).sum(axis=-1)) / (2.0 * math.pi)
    return out if np.ndim(out) else float(out)


# -- truncation ------------------------------------------------------------------

def _exp_tail(spec, R, j):
    """Bound on int_R^inf u**j K(u) du for the exponential kernels (R > 2j)."""
    if spec.id is KernelId.PICARD:
        return R ** j * math.exp(-R)
    return R ** j * math.exp(-R * R) / (R * math.sqrt(math.pi))


def truncation_radius(spec, abs_tol, sup=1.0, power=0):
    """Radius R with sup * int_{|u|>R} |u|**power |K(u)| du <= abs_tol / 10.

    Only defined for exponentially decaying kernels.
    """
    if spec.decay_class is not DecayClass.EXPONENTIAL:
        raise ValueError(f"{spec.name} has no exponential truncation radius")
    target = abs_tol / (10.0 * max(sup, 1e-300))
    R = max(1.0, 2.0 * power + 1.0)
    while 2.0 * _exp_tail(spec, R, power) > target:
        R *= 1.1
    return R


# -- moments -------------------------------------------------------------------

@dataclass(frozen=True)
class MomentResult:
    j: int
    value: object  # float or DIVERGENT
    error_estimate: float = 0.0
    converged: bool = True


def _moment_divergent(spec, j):
    # Quadratic and Riesz kernels carry a c/u**2 tail, so u**j |K| ~ c u**(j-2).
    return spec.decay_class is not DecayClass.EXPONENTIAL and j >= 1


def _geometric_points(lo, hi, base=1.0):
    pts = []
    w = base
    while lo + w < hi:
        pts.append(lo + w)
        w *= 2.0
    return pts


def moment_result(spec, j, quad=None):
    """Absolute moment int_0^inf u**j |K(u)| du with its quadrature quality."""
    j = int(j)
    if j < 0:
        raise ValueError("moment order must be nonnegative")
    quad = quad or QuadConfig()
    if _moment_divergent(spec, j):
        return MomentResult(j, DIVERGENT, 0.0, True)
    if spec.decay_class is DecayClass.EXPONENTIAL:
        R = truncation_radius(spec, quad.abs_tol, power=j)
        res = integrate_interval(lambda u: u ** j * eval_kernel(spec, u), 0.0, R, quad,
                                 points=_geometric_points(0.0, R))
        return MomentResult(j, float(res.value), res.error_estimate + quad.abs_tol / 10, res.converged)
    # j == 0 for the slowly decaying kernels
    if spec.nonnegative:
        R = 100.0 if spec.id is KernelId.POISSON else 60.0
        res = integrate_interval(lambda u: eval_kernel(spec, u), 0.0, R, quad,
                                 points=_geometric_points(0.0, R),
                                 panel_width=spec.oscillation_half_period)
        return MomentResult(0, float(res.value + kernel_tail_mass(spec, R)), res.error_estimate, res.converged)
    return _riesz_abs_mass(spec.gamma, quad)


def _riesz_abs_mass(gamma, quad):
    """int_0^inf |K_R(gamma)| for sign-changing Riesz kernels (gamma < 1)."""
    R1, R2 = 60.0, 2.0e4
    near = integrate_interval(lambda u: np.abs(riesz_kernel_eval(gamma, u)), 0.0, R1, quad,
                              points=_geometric_points(0.0, R1), panel_width=math.pi)
    # Beyond R1 the asymptotic form is accurate to O(u**-(gamma+2)).
    far_cfg = QuadConfig(quad.abs_tol, quad.rel_tol, max(quad.max_subdivisions, 20000))
    zeros = R1 + math.pi * np.arange(1, int((R2 - R1) / math.pi))
    far = integrate_interval(lambda u: np.abs(_riesz_asymptotic(gamma, u)), R1, R2, far_cfg,
                             points=zeros)
    A = math.gamma(gamma + 1.0) / math.pi
    beyond = (2.0 / math.pi) * A * R2 ** (-gamma) / gamma
    err = near.error_estimate + far.error_estimate + beyond * (1.0 / R2 + gamma / (A * R2 ** (1 - gamma)))
    err += R1 ** (-gamma - 1.0)  # asymptotic-form truncation on [R1, R2]
    return MomentResult(0, float(near.value + far.value + beyond), err, near.converged and far.converged and err <= 1e-3)


def kernel_moment(spec, j, quad=None):
    """int_0^inf u**j |K(u)| du, or ``DIVERGENT`` when the tail forbids it."""
    return moment_result(spec, j, quad).value


def _double_factorial(n):
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def closed_form_moment(spec, j):
    """Tabulated moments of the Picard and Gauss-Weierstrass kernels."""
    if spec.id is KernelId.PICARD:
        return math.factorial(j) / 2.0
    if spec.id is KernelId.GAUSS_WEIERSTRASS:
        if j == 0:
            return 0.5
        if j % 2 == 0:
            k = j // 2
            return _double_factorial(2 * k - 1) / 2.0 ** (k + 1)
        k = (j - 1) // 2
        return math.factorial(k) / (2.0 * math.sqrt(math.pi))
    raise ValueError(f"no closed-form moments for {spec.name}")


# -- condition report ------------------------------------------------------------

@dataclass(frozen=True)
class ConditionReport:
    kernel: KernelSpec
    symmetric_max_asymmetry: float
    normalization_value: float
    sup_on_unit_interval: float
    sup_x2K: object  # float or UNBOUNDED
    moment_status: tuple  # ((j, float | DIVERGENT), ...)
    tail_moment_t2: object  # float or DIVERGENT
    quality: dict = field(default_factory=dict)

    def conditions(self, tol=1e-6):
        """Pass/fail of the even, unit-mass, bounded-core and x^2-decay conditions."""
        return {
            "symmetric": self.symmetric_max_asymmetry <= tol,
            "normalized": abs(self.normalization_value - 1.0) <= tol,
            "bounded_on_unit_interval": math.isfinite(self.sup_on_unit_interval),
            "x2_bounded": self.sup_x2K is not UNBOUNDED and math.isfinite(self.sup_x2K),
        }

    def all_pass(self, tol=1e-6):
        return all(self.conditions(tol).values())

    def moment(self, j):
        return dict(self.moment_status)[j]


def _sup_x2K_unbounded(spec):
    # Riesz kernels with gamma < 1 decay like |t|**-(1+gamma).
    return spec.id is KernelId.RIESZ and spec.gamma < 1.0


def verify_kernel_conditions(spec, quad=None, n_samples=100_000, x2_range=100.0, max_moment=6):
    """Numerically check the kernel conditions and collect moments.

    Suprema are dense-sampling lower bounds.  Quadrature failures are
    recorded in ``quality`` rather than raised.
    """
    if n_samples < 2:
        raise ValueError("need at least two samples")
    quad = quad or QuadConfig(abs_tol=1e-11, rel_tol=1e-12, max_subdivisions=5000)
    quality = {}

    t = np.linspace(0.0, x2_range, n_samples)
    kt = eval_kernel(spec, t)
    asym = float(np.max(np.abs(kt - eval_kernel(spec, -t))))

    if spec.decay_class is DecayClass.EXPONENTIAL:
        R = truncation_radius(spec, quad.abs_tol)
        res = integrate_interval(lambda u: eval_kernel(spec, u), 0.0, R, quad,
                                 points=_geometric_points(0.0, R))
        half = res.value + kernel_tail_mass(spec, R)
    else:
        R = 100.0 if spec.id is KernelId.POISSON else 60.0
        res = integrate_interval(lambda u: eval_kernel(spec, u), 0.0, R, quad,
                                 points=_geometric_points(0.0, R),
                                 panel_width=spec.oscillation_half_period)
        half = res.value + kernel_tail_mass(spec, R)
    quality["normalization"] = res.converged

    unit = np.linspace(-1.0, 1.0, n_samples)
    sup_unit = float(np.max(np.abs(eval_kernel(spec, unit))))

    if _sup_x2K_unbounded(spec):
        sup_x2 = UNBOUNDED
    else:
        sup_x2 = float(np.max(t * t * np.abs(kt)))

    moments = []
    for j in range(max_moment + 1):
        mr = moment_result(spec, j, quad)
        moments.append((j, mr.value))
        quality[f"moment_{j}"] = mr.converged

    if spec.decay_class is DecayClass.EXPONENTIAL:
        R = truncation_radius(spec, quad.abs_tol, power=1)
        tr = integrate_interval(lambda u: u * eval_kernel(spec, u), 1.0, R, quad,
                                points=_geometric_points(1.0, R))
        tail_t2 = tr.value
        quality["tail_moment_t2"] = tr.converged
    else:
        tail_t2 = DIVERGENT
        quality["tail_moment_t2"] = True

    return ConditionReport(spec, asym, 2.0 * half, sup_unit, sup_x2, tuple(moments), tail_t2, quality)
