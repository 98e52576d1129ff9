"""Test functions with certified Holder regularity.

Each :class:`TestFunction` carries the exponent ``alpha`` of its highest
certified derivative, the derivative order ``m`` available in closed form,
and its domain (compactly supported on the line, or 2pi-periodic).
"""
from dataclasses import dataclass, field
from enum import Enum
import math

import numpy as np

TWO_PI = 2.0 * math.pi
DERIVATIVE_CAP = 6
_BUMP_SHIFT = 1.5


class FunctionId(Enum):
    HOLDER_BUMP = "holder-bump"
    ZERO_MEAN_BUMP_ANTIDERIVATIVE = "zero-mean-bump-antiderivative"
    COSINE = "cosine"
    ABS_SIN_PERIODIC = "abs-sin"
    WEIERSTRASS_PERIODIC = "weierstrass"
    CONSTANT = "constant"


class Domain(Enum):
    LINE = "line"
    PERIODIC = "periodic"


class CapabilityError(ValueError):
    """Requested derivative order exceeds what the function certifies."""


@dataclass(frozen=True)
class HolderClass:
    alpha: float
    m: int
    domain: Domain
    support_radius: float
    admissible_p: str  # "all" or "inf-only-on-line"


@dataclass(frozen=True)
class TestFunction:
    __test__ = False  # keep pytest from collecting this class

    id: FunctionId
    alpha: float = 1.0
    a: float = None
    b: int = None
    value: float = 1.0
    n_terms: int = field(default=0, compare=False)

    def __post_init__(self):
        fid = FunctionId(self.id)
        object.__setattr__(self, "id", fid)
        if fid is FunctionId.WEIERSTRASS_PERIODIC:
            a, b = self.a, self.b
            if a is None or b is None:
                raise ValueError("Weierstrass function needs a and b")
            if not 0 < a < 1:
                raise ValueError(f"Weierstrass a must lie in (0, 1), got {a}")
            if int(b) != b or b < 3 or b % 2 == 0:
                raise ValueError(f"Weierstrass b must be an odd integer >= 3, got {b}")
            if a * b < 1:
                raise ValueError(f"Weierstrass needs a*b >= 1, got {a * b}")
            object.__setattr__(self, "b", int(b))
            object.__setattr__(self, "alpha", -math.log(a) / math.log(b))
            object.__setattr__(self, "n_terms", int(math.ceil(math.log(1e-12) / math.log(a))))
        elif fid in (FunctionId.COSINE, FunctionId.CONSTANT):
            object.__setattr__(self, "alpha", 1.0)
        elif not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")

    @property
    def domain(self):
        if self.id in (FunctionId.HOLDER_BUMP, FunctionId.ZERO_MEAN_BUMP_ANTIDERIVATIVE):
            return Domain.LINE
        return Domain.PERIODIC

    @property
    def periodic(self):
        return self.domain is Domain.PERIODIC

    @property
    def max_derivative_order(self):
        if self.id is FunctionId.ZERO_MEAN_BUMP_ANTIDERIVATIVE:
            return 1
        if self.id in (FunctionId.COSINE, FunctionId.CONSTANT):
            return DERIVATIVE_CAP
        return 0

    @property
    def support_radius(self):
        if self.id is FunctionId.HOLDER_BUMP:
            return 1.0
        if self.id is FunctionId.ZERO_MEAN_BUMP_ANTIDERIVATIVE:
            return 1.0 + _BUMP_SHIFT
        return math.inf

    @property
    def name(self):
        fid = self.id
        if fid is FunctionId.WEIERSTRASS_PERIODIC:
            return f"weierstrass(a={self.a:g},b={self.b})"
        if fid is FunctionId.COSINE:
            return "cosine"
        if fid is FunctionId.CONSTANT:
            return f"constant({self.value:g})"
        return f"{fid.value}(alpha={self.alpha:g})"

    def kinks(self, j=0):
        """Nonsmooth points of the j-th derivative (one period for periodic ids)."""
        fid = self.id
        if fid is FunctionId.HOLDER_BUMP:
            return (-1.0, 0.0, 1.0)
        if fid is FunctionId.ZERO_MEAN_BUMP_ANTIDERIVATIVE:
            s = _BUMP_SHIFT
            return (-s - 1.0, -s, -s + 1.0, s - 1.0, s, s + 1.0)
        if fid is FunctionId.ABS_SIN_PERIODIC:
            return (0.0, math.pi)
        return ()


def holder_bump(alpha):
    return TestFunction(FunctionId.HOLDER_BUMP, alpha)


def zero_mean_bump_antiderivative(alpha):
    return TestFunction(FunctionId.ZERO_MEAN_BUMP_ANTIDERIVATIVE, alpha)


def cosine():
    return TestFunction(FunctionId.COSINE)


def abs_sin(alpha):
    return TestFunction(FunctionId.ABS_SIN_PERIODIC, alpha)


def weierstrass(a, b):
    return TestFunction(FunctionId.WEIERSTRASS_PERIODIC, a=a, b=b)


def constant(value=1.0):
    return TestFunction(FunctionId.CONSTANT, value=float(value))


def from_name(name, alpha=None, a=None, b=None, value=None):
    key = name.strip().lower().replace("_", "-")
    if key in ("holder-bump", "bump"):
        return holder_bump(0.5 if alpha is None else alpha)
    if key in ("zero-mean-bump-antiderivative", "zmba", "bump-antiderivative"):
        return zero_mean_bump_antiderivative(0.5 if alpha is None else alpha)
    if key in ("cosine", "cos"):
        return cosine()
    if key in ("abs-sin", "abs-sin-periodic", "abssin"):
        return abs_sin(1.0 if alpha is None else alpha)
    if key == "weierstrass":
        return weierstrass(0.5 if a is None else a, 3 if b is None else b)
    if key in ("constant", "one"):
        return constant(1.0 if value is None else value)
    raise ValueError(f"unknown test function {name!r}")


def _bump(alpha, y):
    return np.maximum(0.0, 1.0 - np.abs(y) ** alpha)


def _bump_integral(alpha, y):
    """int_{-inf}^y max(0, 1 - |s|**alpha) ds in closed form."""
    p = alpha + 1.0
    yc = np.clip(y, -1.0, 1.0)
    ay = np.abs(yc) ** p
    inner = (yc + 1.0) - np.where(yc < 0.0, 1.0 - ay, 1.0 + ay) / p
    return np.where(y >= 1.0, 2.0 - 2.0 / p, inner)


def _reduce(x):
    return np.remainder(x, TWO_PI)


def eval_function(f, x):
    """f(x); exactly zero off the support, periodic ids reduced mod 2pi."""
    x = np.asarray(x, dtype=float)
    fid = f.id
    if fid is FunctionId.HOLDER_BUMP:
        out = _bump(f.alpha, x)
    elif fid is FunctionId.ZERO_MEAN_BUMP_ANTIDERIVATIVE:
        s = _BUMP_SHIFT
        out = _bump_integral(f.alpha, x - s) - _bump_integral(f.alpha, x + s)
        out = np.where(np.abs(x) >= f.support_radius, 0.0, out)
    elif fid is FunctionId.COSINE:
        out = np.cos(_reduce(x))
    elif fid is FunctionId.ABS_SIN_PERIODIC:
        out = np.abs(np.sin(_reduce(x))) ** f.alpha
    elif fid is FunctionId.WEIERSTRASS_PERIODIC:
        xr = _reduce(x)
        out = np.zeros_like(xr)
        for k in range(f.n_terms):
            out = out + f.a ** k * np.cos(float(f.b) ** k * xr)
    else:
        out = np.full_like(x, f.value)
    return out if out.ndim else float(out)


def eval_derivative(f, j, x):
    """Closed-form j-th derivative; ``CapabilityError`` past the certified order."""
    j = int(j)
    if j < 0:
        raise ValueError("derivative order must be nonnegative")
    if j > f.max_derivative_order:
        raise CapabilityError(
            f"{f.name} certifies derivatives up to order {f.max_derivative_order}, requested {j}")
    if j == 0:
        return eval_function(f, x)
    x = np.asarray(x, dtype=float)
    fid = f.id
    if fid is FunctionId.ZERO_MEAN_BUMP_ANTIDERIVATIVE:
        out = _bump(f.alpha, x - _BUMP_SHIFT) - _bump(f.alpha, x + _BUMP_SHIFT)
    elif fid is FunctionId.COSINE:
        out = np.cos(_reduce(x) + 0.5 * math.pi * j)
    else:
        out = np.zeros_like(x)
    return out if out.ndim else float(out)


def holder_class(f):
    """Certified metadata (alpha, m, domain, support, admissible p)."""
    admissible = "inf-only-on-line" if f.periodic else "all"
    return HolderClass(f.alpha, f.max_derivative_order, f.domain, f.support_radius, admissible)
