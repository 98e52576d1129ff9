"""Discrete L^p norms, moduli of continuity and generalized Holder norms.

Functions are sampled on uniform grids ``start + step * k`` (k < count).
Periodic grids cover exactly one period and shifts wrap around; line grids
drop the samples that a shift pushes off the window.
"""
from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

from . import funcspace as fs

TWO_PI = 2.0 * math.pi
SUP_GRID_SIZE = 2 ** 16
LP_GRID_SIZE = 2 ** 14
DEFAULT_H_GRID = np.logspace(-4.0, 0.0, 40)
DEFAULT_H_COUNT = 64


class DomainKind(Enum):
    LINE = "line"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class UniformGrid:
    start: float
    step: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ValueError(f"grid needs at least 2 points, got {self.count}")
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ValueError(f"grid step must be positive, got {self.step}")

    @classmethod
    def periodic(cls, count):
        return cls(0.0, TWO_PI / count, int(count))

    @classmethod
    def symmetric(cls, half_width, count):
        """[-W, W) with 0 on the grid (count even)."""
        count = int(count)
        return cls(-float(half_width), 2.0 * half_width / count, count)

    def points(self):
        return self.start + self.step * np.arange(self.count)


@dataclass(frozen=True)
class SampledFunction:
    values: np.ndarray
    grid: UniformGrid
    domain_kind: DomainKind = DomainKind.LINE

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "domain_kind", DomainKind(self.domain_kind))
        if values.ndim != 1 or values.size != self.grid.count:
            raise ValueError(f"expected {self.grid.count} samples, got shape {values.shape}")
        if self.domain_kind is DomainKind.PERIODIC:
            if abs(self.grid.step * self.grid.count - TWO_PI) > 1e-12:
                raise ValueError("periodic grid must cover exactly one period 2pi")

    def __add__(self, other):
        return SampledFunction(self.values + other.values, self.grid, self.domain_kind)

    def scaled(self, c):
        return SampledFunction(c * self.values, self.grid, self.domain_kind)


@dataclass(frozen=True)
class NormSpace:
    """L^p norm plus the seminorm sup_h ||Delta_h g||_p / omega_star(h).

    ``omega_star`` defaults to h**beta.
    """
    p: float = math.inf
    beta: float = 0.0
    omega_star: object = None
    h_grid: np.ndarray = None

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if not 0 <= self.beta < 1:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")
        h = DEFAULT_H_GRID if self.h_grid is None else np.asarray(self.h_grid, dtype=float)
        if h.ndim != 1 or h.size == 0 or np.any(h <= 0):
            raise ValueError("h_grid must be a nonempty array of positive shifts")
        object.__setattr__(self, "h_grid", h)

    def omega(self, h):
        h = np.asarray(h, dtype=float)
        if self.omega_star is None:
            return h ** self.beta
        return np.asarray(self.omega_star(h), dtype=float)


def _norm(values, step, p):
    if values.size == 0:
        raise ValueError("cannot take the norm of an empty sample")
    if math.isinf(p):
        return float(np.max(np.abs(values)))
    if p == 1:
        return float(step * np.sum(np.abs(values)))
    return float((step * np.sum(np.abs(values) ** p)) ** (1.0 / p))


def lp_norm(g, p):
    """Rectangle-rule L^p norm, or the max of |values| for p = inf."""
    return _norm(g.values, g.grid.step, p)


def _shift_difference(values, k, periodic):
    if periodic:
        return np.roll(values, -k) - values
    return values[k:] - values[:-k]


def holder_seminorm(g, space):
    """max over the space's h-grid of ||Delta_h g||_p / omega_star(h).

    Each h is rounded to a whole number of grid steps k >= 1 and the ratio
    uses the realized shift k * step.  Shifts as long as a line window are
    skipped.
    """
    step = g.grid.step
    periodic = g.domain_kind is DomainKind.PERIODIC
    ks = np.unique(np.maximum(1, np.rint(space.h_grid / step).astype(np.int64)))
    if not periodic:
        ks = ks[ks < g.grid.count]
    if ks.size == 0:
        return 0.0
    hs = ks * step
    w = space.omega(hs)
    if np.any(~(w > 0)):
        bad = hs[~(w > 0)][0]
        raise ValueError(f"omega_star must be positive on the h-grid; omega_star({bad:g}) = "
                         f"{float(space.omega(bad)):g}")
    best = 0.0
    for k, wk in zip(ks, w):
        d = _shift_difference(g.values, int(k), periodic)
        best = max(best, _norm(d, step, space.p) / wk)
    return best


def generalized_holder_norm(g, space):
    return lp_norm(g, space.p) + holder_seminorm(g, space)


def default_grid(f, p=math.inf, half_width=None):
    """Sampling grid for ``f``: one period, or [-W, W) around the support."""
    count = SUP_GRID_SIZE if math.isinf(p) else LP_GRID_SIZE
    if f.periodic:
        return UniformGrid.periodic(count)
    W = f.support_radius + 1.0 if half_width is None else half_width
    return UniformGrid.symmetric(W, count)


def sample(f, grid=None, p=math.inf):
    grid = grid or default_grid(f, p)
    kind = DomainKind.PERIODIC if f.periodic else DomainKind.LINE
    return SampledFunction(np.asarray(fs.eval_function(f, grid.points())), grid, kind)


def modulus_of_continuity(f, t, p=math.inf, grid=None, h_values=None):
    """max over h in (0, t] of ||f(. + h) - f||_p, evaluated from f directly.

    By default h runs over 64 equispaced values in (0, t].  Passing nested
    ``h_values`` (and a fixed ``grid``) makes the estimate exactly monotone
    in t.  The default line window [-L, L) with L = S + 1 + max(t, 1)
    contains the support of every difference and has 0 on the grid.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 0.0
    if h_values is None:
        h_values = np.linspace(0.0, t, DEFAULT_H_COUNT + 1)[1:]
    else:
        h_values = np.asarray(h_values, dtype=float)
        h_values = h_values[(h_values > 0) & (h_values <= t)]
    if grid is None:
        count = SUP_GRID_SIZE if math.isinf(p) else LP_GRID_SIZE
        if f.periodic:
            grid = UniformGrid.periodic(count)
        else:
            grid = UniformGrid.symmetric(f.support_radius + 1.0 + max(t, 1.0), count)
    x = grid.points()
    fx = np.asarray(fs.eval_function(f, x))
    best = 0.0
    for h in h_values:
        d = np.asarray(fs.eval_function(f, x + h)) - fx
        best = max(best, _norm(d, grid.step, p))
    return best
