import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from holder_approx import _accel
from holder_approx import funcspace as fs
from holder_approx import kernel as kn
from holder_approx._backend import HAVE_NUMBA, resolve_backend
from holder_approx.convolution import (
    UnsupportedConfiguration, _FUNCTION_CODES, _KERNEL_CODES, _function_params, convolve_grid,
    integration_mode,
)

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")

KERNELS = [kn.fejer(), kn.riesz(0.5), kn.riesz(2.0), kn.poisson(), kn.picard(), kn.gauss_weierstrass()]
FUNCTIONS = [fs.holder_bump(0.5), fs.zero_mean_bump_antiderivative(0.5), fs.cosine(), fs.abs_sin(0.5),
             fs.weierstrass(0.5, 3), fs.constant(2.0)]


# high-frequency terms turn last-bit differences in b**k * x into ~1e-10 value noise
WEIERSTRASS_NOISE = 1e-8


def _code(spec):
    return _KERNEL_CODES[spec.id], spec.gamma or 0.0


def test_backend_env_flag(monkeypatch):
    monkeypatch.setenv("HOLDER_APPROX_DISABLE_NUMBA", "1")
    assert resolve_backend() == "numpy"
    monkeypatch.setenv("HOLDER_APPROX_DISABLE_NUMBA", "0")
    assert resolve_backend() == ("numba" if HAVE_NUMBA else "numpy")
    with pytest.raises(ValueError):
        resolve_backend("fortran")


@needs_numba
@pytest.mark.parametrize("spec", KERNELS, ids=lambda s: s.name)
def test_compiled_kernel_matches_numpy(spec):
    kid, gamma = _code(spec)
    t = np.concatenate([np.linspace(-40, 40, 801), [0.0, 11.99, 12.0, 12.01, 1e3]])
    got = np.array([_accel.kernel_value(kid, gamma, u) for u in t])
    np.testing.assert_allclose(got, kn.eval_kernel(spec, t), rtol=1e-12, atol=1e-15)


@needs_numba
@pytest.mark.parametrize("spec", [kn.fejer(), kn.riesz(2.0), kn.poisson()], ids=lambda s: s.name)
def test_compiled_periodized_kernel_matches_numpy(spec):
    kid, gamma = _code(spec)
    s = np.linspace(-math.pi, math.pi, 101)
    for lam in (2.0, 17.0):
        got = np.array([_accel.periodized_kernel_value(kid, gamma, lam, v) for v in s])
        np.testing.assert_allclose(got, kn.periodized_kernel(spec, lam, s), rtol=1e-11, atol=1e-14)


@needs_numba
@pytest.mark.parametrize("f", FUNCTIONS, ids=lambda f: f.name)
def test_compiled_functions_match_numpy(f):
    fid, fp = _FUNCTION_CODES[f.id], _function_params(f)
    x = np.linspace(-9, 9, 513)
    atol = WEIERSTRASS_NOISE if f.id is fs.FunctionId.WEIERSTRASS_PERIODIC else 1e-13
    for j in range(min(f.max_derivative_order, 2) + 1):
        got = np.array([_accel.function_value(fid, j, fp, v) for v in x])
        np.testing.assert_allclose(got, fs.eval_derivative(f, j, x), rtol=1e-13, atol=atol)


@needs_numba
@pytest.mark.parametrize("spec", KERNELS, ids=lambda s: s.name)
@pytest.mark.parametrize("f", FUNCTIONS, ids=lambda f: f.name)
def test_backends_agree(spec, f):
    weier = f.id is fs.FunctionId.WEIERSTRASS_PERIODIC
    xs = np.linspace(-3.0, 3.0, 3 if weier else 7)
    a = convolve_grid(spec, 5.0, f, xs, backend="numpy")
    b = convolve_grid(spec, 5.0, f, xs, backend="numba")
    np.testing.assert_allclose(a.values, b.values, rtol=1e-12, atol=WEIERSTRASS_NOISE if weier else 1e-13)
    assert np.array_equal(a.converged, b.converged)


@needs_numba
def test_backends_agree_modified():
    f = fs.zero_mean_bump_antiderivative(0.5)
    xs = np.linspace(-3.0, 3.0, 9)
    for spec in (kn.picard(), kn.gauss_weierstrass()):
        a = convolve_grid(spec, 20.0, f, xs, m=1, backend="numpy")
        b = convolve_grid(spec, 20.0, f, xs, m=1, backend="numba")
        np.testing.assert_allclose(a.values, b.values, rtol=1e-12, atol=1e-13)


def test_integration_modes():
    assert integration_mode(kn.picard(), fs.cosine(), 1) == "line"
    assert integration_mode(kn.fejer(), fs.holder_bump(0.5), 0) == "line"
    assert integration_mode(kn.fejer(), fs.cosine(), 0) == "periodic"
    with pytest.raises(UnsupportedConfiguration):
        integration_mode(kn.poisson(), fs.cosine(), 1)


def test_errors_and_shape(backend):
    xs = np.linspace(-1, 1, 6).reshape(2, 3)
    res = convolve_grid(kn.picard(), 4.0, fs.holder_bump(0.5), xs, backend=backend)
    assert res.values.shape == (2, 3) and res.errors.shape == (2, 3)
    assert np.all(res.errors >= 0) and np.all(res.converged)
    with pytest.raises(ValueError):
        convolve_grid(kn.picard(), -1.0, fs.cosine(), xs, backend=backend)
    with pytest.raises(ValueError):
        convolve_grid(kn.picard(), 1.0, fs.cosine(), [np.inf], backend=backend)
    with pytest.raises(fs.CapabilityError):
        convolve_grid(kn.picard(), 1.0, fs.holder_bump(0.5), xs, m=1, backend=backend)


def test_panel_budget_reports_nonconvergence(backend):
    res = convolve_grid(kn.picard(), 3.0, fs.weierstrass(0.5, 3), [0.3], abs_tol=1e-15, rel_tol=1e-15,
                        max_panels=20, backend=backend)
    assert not res.converged[0]
    assert np.isfinite(res.values[0])


@given(lam=st.floats(0.5, 200.0), x=st.floats(-4.0, 4.0))
def test_bump_convolution_is_bounded(lam, x):
    # a positive unit-mass kernel averages [0, 1]-valued data into [0, 1]
    v = convolve_grid(kn.gauss_weierstrass(), lam, fs.holder_bump(0.5), [x], backend="numpy").values[0]
    assert -1e-9 <= v <= 1.0 + 1e-9
