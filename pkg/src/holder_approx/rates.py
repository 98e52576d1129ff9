"""Error sweeps over the scale parameter and empirical rate fits.

A sweep measures ||F f - f|| in the generalized Holder norm (omega*(h) =
h**beta) at each scale, then fits either a power law or the ln(lam)/lam
model.  Exponents are always the raw log-log slope in the sweep's own
parameter: positive for the shrinking parameters r and eps, negative for
the growing parameters lam and n.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from . import funcspace as fs
from . import kernel as kn
from . import norms
from . import operator as op
from ._backend import max_threads
from .convolution import UnsupportedConfiguration, convolve_grid, integration_mode
from .quad import QuadConfig

POWER = "Power"
LOG_OVER_SCALE = "LogOverScale"
SPREAD_LIMIT = 5.0
SWEEP_QUAD = QuadConfig(abs_tol=1e-10, rel_tol=1e-9)
RIESZ_COEFF_GRID = 2 ** 18
QUALITY_OK = "ok"


class DegenerateFit(ValueError):
    pass


@dataclass(frozen=True)
class LineOperator:
    kernel: kn.KernelSpec
    m: int = 0

    @property
    def scale_name(self):
        kid = self.kernel.id
        if kid in (kn.KernelId.PICARD, kn.KernelId.GAUSS_WEIERSTRASS):
            return "r"
        if kid is kn.KernelId.POISSON:
            return "eps"
        return "lambda"

    @property
    def name(self):
        return f"{self.kernel.name},m={self.m}"


@dataclass(frozen=True)
class RieszMean:
    gamma: float
    coeff_grid_size: int = RIESZ_COEFF_GRID
    scale_name = "n"

    @property
    def name(self):
        return f"riesz-mean(gamma={self.gamma:g})"


def log_scales(lo=1e-3, hi=1e-1, count=8):
    return np.logspace(math.log10(lo), math.log10(hi), count)


def dyadic_n(lo=8, hi=1024):
    return np.array([2 ** k for k in range(int(math.log2(lo)), int(math.log2(hi)) + 1)], dtype=float)


@dataclass(frozen=True)
class SweepConfig:
    family: object
    f: fs.TestFunction
    p: float = math.inf
    beta: float = 0.0
    eta: float = None
    scale_values: np.ndarray = None
    norm_grid_size: int = None
    h_grid: np.ndarray = None
    quad: QuadConfig = SWEEP_QUAD
    backend: str = None

    def __post_init__(self):
        f = self.f
        eta = f.alpha if self.eta is None else float(self.eta)
        object.__setattr__(self, "eta", eta)
        if not 0 <= self.beta < eta <= 1:
            raise ValueError(f"need 0 <= beta < eta <= 1, got beta={self.beta}, eta={eta}")
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        scales = self.scale_values
        if scales is None:
            scales = dyadic_n() if isinstance(self.family, RieszMean) else log_scales()
        scales = np.asarray(scales, dtype=float)
        if scales.ndim != 1 or scales.size < 2 or np.any(scales <= 0):
            raise ValueError("scale_values must hold at least two positive values")
        d = np.diff(scales)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("scale_values must be strictly monotone")
        object.__setattr__(self, "scale_values", scales)
        fam = self.family
        if isinstance(fam, RieszMean):
            if not f.periodic:
                raise ValueError(f"Riesz means need a periodic function, got {f.name}")
            if np.any(scales != np.rint(scales)):
                raise ValueError("Riesz mean scales n must be integers")
        elif isinstance(fam, LineOperator):
            if fam.m > f.max_derivative_order:
                raise ValueError(f"m={fam.m} exceeds the derivative order certified by {f.name}")
            if f.periodic and not math.isinf(self.p):
                raise UnsupportedConfiguration(
                    f"periodic {f.name} is not in L^{self.p}(R); only p = inf is supported on the line")
            integration_mode(fam.kernel, f, fam.m)
        else:
            raise ValueError(f"unknown operator family {fam!r}")

    @property
    def scale_name(self):
        return self.family.scale_name

    def lambdas(self):
        fam = self.family
        if isinstance(fam, RieszMean):
            return self.scale_values.copy()
        return np.array([op.lambda_for_scale(fam.kernel, s) for s in self.scale_values])

    def norm_space(self):
        return norms.NormSpace(self.p, self.beta, h_grid=self.h_grid)

    def grid(self):
        count = self.norm_grid_size
        if count is None:
            count = norms.SUP_GRID_SIZE if math.isinf(self.p) else norms.LP_GRID_SIZE
        if self.f.periodic:
            return norms.UniformGrid.periodic(count)
        lam_min = float(np.min(self.lambdas()))
        return norms.UniformGrid.symmetric(self.f.support_radius + 20.0 / lam_min, count)


@dataclass(frozen=True)
class ErrorCurve:
    scales: np.ndarray
    errors: np.ndarray
    quality: tuple
    scale_name: str = "lambda"
    tail_bounds: np.ndarray = None

    def __post_init__(self):
        if not (len(self.scales) == len(self.errors) == len(self.quality)):
            raise ValueError("scales, errors and quality must have equal length")
        if np.any(np.asarray(self.errors) < 0):
            raise ValueError("errors must be nonnegative")

    @property
    def increasing_parameter(self):
        return self.scale_name in ("lambda", "n")


@dataclass(frozen=True)
class RateReport:
    model: str
    fitted_exponent: float
    r_squared: float
    theoretical_exponent: float
    ratio_spread: float
    verdict: bool
    tolerance: float
    scale_name: str = "lambda"
    convention: str = field(default="")

    def __post_init__(self):
        if not self.convention:
            object.__setattr__(self, "convention",
                               f"error ~ C * {self.scale_name}^exponent (raw log-log slope)")


def _line_tail_bound(cfg, lam, grid):
    """Bound on the part of F f outside the window (|x| > W)."""
    f = cfg.f
    S = f.support_radius
    W = -grid.start
    R = lam * (W - S)
    kernel = cfg.family.kernel
    try:
        tail = kn.kernel_tail_mass(kernel, R)
    except ValueError:
        return math.nan
    mass = 1.0 if math.isinf(cfg.p) else (2.0 * S) ** (1.0 / cfg.p)
    return 2.0 * tail * mass


def _point_error(cfg, scale, grid, x, fx, space):
    fam = cfg.family
    kind = norms.DomainKind.PERIODIC if cfg.f.periodic else norms.DomainKind.LINE
    if isinstance(fam, RieszMean):
        spec = op.PeriodicMeanSpec(fam.gamma, int(scale), fam.coeff_grid_size)
        approx = op.riesz_mean_grid(spec, cfg.f, grid.count)
        quality, tail = QUALITY_OK, 0.0
    else:
        lam = op.lambda_for_scale(fam.kernel, scale)
        res = convolve_grid(fam.kernel, lam, cfg.f, x, m=fam.m, abs_tol=cfg.quad.abs_tol,
                            rel_tol=cfg.quad.rel_tol, backend=cfg.backend)
        approx = res.values
        bad = int(np.count_nonzero(~res.converged))
        quality = QUALITY_OK if bad == 0 else f"nonconverged:{bad}"
        tail = 0.0 if cfg.f.periodic else _line_tail_bound(cfg, lam, grid)
    g = norms.SampledFunction(approx - fx, grid, kind)
    return norms.generalized_holder_norm(g, space), quality, tail


def error_curve(cfg):
    """Measure ||F f - f|| at every scale of the sweep.

    Scale points run concurrently (up to ``HOLDER_APPROX_THREADS``) and are
    assembled in scale order.
    """
    grid = cfg.grid()
    x = grid.points()
    fx = np.asarray(fs.eval_function(cfg.f, x))
    space = cfg.norm_space()

    def run(scale):
        return _point_error(cfg, float(scale), grid, x, fx, space)

    threads = min(max_threads(), len(cfg.scale_values))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, cfg.scale_values))
    else:
        results = [run(s) for s in cfg.scale_values]
    errors = np.array([r[0] for r in results])
    quality = tuple(r[1] for r in results)
    tails = np.array([r[2] for r in results])
    return ErrorCurve(cfg.scale_values.copy(), errors, quality, cfg.scale_name, tails)


def _log_model(curve):
    lam = curve.scales if curve.increasing_parameter else 1.0 / curve.scales
    return np.log(lam) / lam


def _linear_fit(xv, yv):
    A = np.vstack([xv, np.ones_like(xv)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, yv, rcond=None)
    resid = yv - (slope * xv + intercept)
    ss_tot = float(np.sum((yv - yv.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), min(1.0, max(0.0, r2))


def fit_rate(curve, model, theoretical_exponent=math.nan, tolerance=0.1):
    """Fit ``Power`` (log-log slope) or ``LogOverScale`` (ratio spread).

    Only points with quality ``ok`` are used; at least four are required.
    """
    scales = np.asarray(curve.scales, dtype=float)
    errors = np.asarray(curve.errors, dtype=float)
    bad = [i for i, e in enumerate(errors) if not e > 0]
    if bad:
        raise DegenerateFit(f"errors must be positive; offending points: "
                            + ", ".join(f"#{i} (scale={scales[i]:g}, error={errors[i]:g})" for i in bad))
    clean = np.array([q == QUALITY_OK for q in curve.quality])
    if clean.sum() < 4:
        raise DegenerateFit(f"need at least 4 clean points, have {int(clean.sum())}")
    scales, errors = scales[clean], errors[clean]
    sub = ErrorCurve(scales, errors, tuple(QUALITY_OK for _ in scales), curve.scale_name)
    slope, r2 = _linear_fit(np.log(scales), np.log(errors))
    if model == POWER:
        verdict = abs(slope - theoretical_exponent) <= tolerance
        return RateReport(POWER, slope, r2, theoretical_exponent, math.nan, bool(verdict),
                          tolerance, curve.scale_name)
    if model == LOG_OVER_SCALE:
        ratio = errors / _log_model(sub)
        spread = float(ratio.max() / ratio.min())
        verdict = spread < tolerance
        name = curve.scale_name
        conv = f"ratio = error / (ln L / L) with L = {name if sub.increasing_parameter else '1/' + name}"
        return RateReport(LOG_OVER_SCALE, math.nan, r2, theoretical_exponent, spread, bool(verdict),
                          tolerance, curve.scale_name, conv)
    raise ValueError(f"unknown model {model!r}")


def theoretical_rate(cfg):
    """(model, exponent in the sweep parameter, default tolerance) for a sweep.

    Raises :class:`UnsupportedConfiguration` when no rate is available.
    """
    fam = cfg.family
    gap = cfg.f.alpha - cfg.beta
    log_case = abs(gap - 1.0) < 1e-12
    if isinstance(fam, RieszMean):
        if log_case:
            return LOG_OVER_SCALE, math.nan, SPREAD_LIMIT
        return POWER, -gap, 0.15
    kid = fam.kernel.id
    m = fam.m
    tol = 0.1 if m == 0 else 0.2
    if kid is kn.KernelId.PICARD:
        return POWER, gap + m, tol
    if kid is kn.KernelId.GAUSS_WEIERSTRASS:
        return POWER, 0.5 * (gap + m), tol
    if m > 0:
        raise UnsupportedConfiguration(
            f"no rate is available for {fam.kernel.name} with m={m}: its first moment diverges")
    if log_case:
        return LOG_OVER_SCALE, math.nan, SPREAD_LIMIT
    if kid is kn.KernelId.POISSON:
        return POWER, gap, tol
    return POWER, -gap, tol


def check_theorem(cfg, tolerance=None, curve=None):
    """Run the sweep and compare the fitted rate with the theoretical one."""
    model, expo, tol = theoretical_rate(cfg)
    curve = curve if curve is not None else error_curve(cfg)
    return fit_rate(curve, model, expo, tol if tolerance is None else tolerance), curve


@dataclass(frozen=True)
class BoundCheck:
    lambdas: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    constant: float
    passed: bool


def remark2_bound_check(kernel, m, f, lambdas, cfg=None, p=math.inf, grid_size=None, backend=None):
    """Check ||F_m f||_p <= C sum_j ||f^(j)||_p / (j! lam^j) with C = 2 max_j moment_j."""
    cfg = cfg or SWEEP_QUAD
    moments = []
    for j in range(m + 1):
        mj = kn.kernel_moment(kernel, j)
        if mj is kn.DIVERGENT:
            raise UnsupportedConfiguration(f"{kernel.name} has a divergent moment of order {j}")
        moments.append(float(mj))
    if m > f.max_derivative_order:
        raise fs.CapabilityError(f"{f.name} certifies derivatives up to order {f.max_derivative_order}")
    if f.periodic and not math.isinf(p):
        raise UnsupportedConfiguration(f"periodic {f.name} is not in L^{p}(R)")
    C = 2.0 * max(moments)
    lambdas = np.asarray(lambdas, dtype=float)
    count = grid_size or (norms.SUP_GRID_SIZE if math.isinf(p) else norms.LP_GRID_SIZE)
    if f.periodic:
        grid = norms.UniformGrid.periodic(count)
    else:
        grid = norms.UniformGrid.symmetric(f.support_radius + 20.0 / lambdas.min(), count)
    x = grid.points()
    deriv_norms = [norms._norm(np.asarray(fs.eval_derivative(f, j, x)), grid.step, p) for j in range(m + 1)]
    lhs, rhs = [], []
    for lam in lambdas:
        res = convolve_grid(kernel, lam, f, x, m=m, abs_tol=cfg.abs_tol, rel_tol=cfg.rel_tol, backend=backend)
        lhs.append(norms._norm(res.values, grid.step, p))
        rhs.append(sum(deriv_norms[j] / (math.factorial(j) * lam ** j) for j in range(m + 1)))
    lhs, rhs = np.array(lhs), np.array(rhs)
    return BoundCheck(lambdas, lhs, rhs, C, bool(np.all(lhs <= C * rhs)))


# -- acceptance sweep configurations -----------------------------------------------

def acceptance_sweeps():
    """Named sweep configurations with the tolerance each must meet."""
    bump = fs.holder_bump(0.5)
    r = log_scales()
    return {
        "picard-m0-bump": (SweepConfig(LineOperator(kn.picard()), bump, scale_values=r), 0.1),
        "gw-m0-bump": (SweepConfig(LineOperator(kn.gauss_weierstrass()), bump, scale_values=r), 0.1),
        "picard-m1-cosine": (SweepConfig(LineOperator(kn.picard(), 1), fs.cosine(), scale_values=r), 0.1),
        "picard-m0-bump-beta0.25": (SweepConfig(LineOperator(kn.picard()), bump, beta=0.25, scale_values=r), 0.1),
        "riesz1-abssin": (SweepConfig(RieszMean(1.0), fs.abs_sin(0.5)), 0.15),
        "riesz2-abssin": (SweepConfig(RieszMean(2.0), fs.abs_sin(0.5)), 0.15),
        "poisson-log-abssin": (SweepConfig(LineOperator(kn.poisson()), fs.abs_sin(1.0), scale_values=r),
                               SPREAD_LIMIT),
    }
