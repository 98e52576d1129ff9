import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from holder_approx import funcspace as fs
from holder_approx import kernel as kn
from holder_approx import operator as op
from holder_approx.quad import ExponentialDecay, QuadConfig, integrate_line

CFG = QuadConfig(1e-10, 1e-10)
LINE_KERNELS = [kn.fejer(), kn.riesz(2.0), kn.poisson(), kn.picard(), kn.gauss_weierstrass()]


def brute_force(spec, g, x, points=()):
    """lam int g(t) K(lam (t - x)) dt with scipy, substituted to u = lam (t - x)."""
    lam = spec.lam
    h = lambda u: g(x + u / lam) * float(kn.eval_kernel(spec.kernel, u))
    pts = sorted(lam * (p - x) for p in points)
    R = 60.0
    inner = [-R] + [p for p in pts if -R < p < R] + [R]
    return sum(integrate.quad(h, a, b, epsabs=1e-13, epsrel=1e-13, limit=400)[0]
               for a, b in zip(inner, inner[1:]))


def test_spec_validation():
    with pytest.raises(ValueError):
        op.OperatorSpec(kn.picard(), 0.0)
    with pytest.raises(ValueError):
        op.OperatorSpec(kn.picard(), 1.0, m=-1)
    with pytest.raises(ValueError):
        op.PeriodicMeanSpec(1.0, 8, coeff_grid_size=24)
    with pytest.raises(ValueError):
        op.PeriodicMeanSpec(1.0, 8, coeff_grid_size=16)
    with pytest.raises(ValueError):
        op.PeriodicMeanSpec(0.0, 8)


def test_scale_maps():
    assert op.lambda_for_scale(kn.picard(), 0.1) == pytest.approx(10.0)
    assert op.lambda_for_scale(kn.poisson(), 0.01) == pytest.approx(100.0)
    assert op.lambda_for_scale(kn.gauss_weierstrass(), 0.25) == pytest.approx(1.0)
    assert op.lambda_for_scale(kn.fejer(), 7.0) == 7.0


@pytest.mark.parametrize("spec", LINE_KERNELS, ids=lambda s: s.name)
def test_constant_is_fixed_point(spec, backend):
    xs = np.array([-2.0, 0.0, 0.7, 5.0])
    for lam in (0.5, 4.0):
        vals = op.apply_F(op.OperatorSpec(spec, lam), fs.constant(1.0), xs, CFG, backend=backend)
        np.testing.assert_allclose(vals, 1.0, atol=1e-6)


@pytest.mark.parametrize("r", [0.1, 0.5])
def test_picard_cosine(r, backend):
    xs = np.linspace(-3, 3, 7)
    got = op.apply_F(op.operator_for_scale(kn.picard(), r), fs.cosine(), xs, CFG, backend=backend)
    np.testing.assert_allclose(got, np.cos(xs) / (1 + r * r), atol=1e-9)
    # Laplace-transform oracle cross-checked by quadrature
    lap = integrate.quad(lambda t: math.cos(t) * math.exp(-t / r), 0, np.inf)[0]
    assert lap == pytest.approx(r / (1 + r * r), rel=1e-9)


@pytest.mark.parametrize("r", [0.05, 0.3])
def test_gauss_weierstrass_and_poisson_cosine(r, backend):
    xs = np.linspace(-3, 3, 7)
    gw = op.apply_F(op.operator_for_scale(kn.gauss_weierstrass(), r), fs.cosine(), xs, CFG, backend=backend)
    np.testing.assert_allclose(gw, math.exp(-r) * np.cos(xs), atol=1e-9)
    po = op.apply_F(op.operator_for_scale(kn.poisson(), r), fs.cosine(), xs, CFG, backend=backend)
    np.testing.assert_allclose(po, math.exp(-r) * np.cos(xs), atol=1e-8)


@pytest.mark.parametrize("r", [0.1, 0.5])
def test_picard_modified_cosine(r, backend):
    xs = np.linspace(-3, 3, 7)
    spec = op.operator_for_scale(kn.picard(), r, m=1)
    got = op.apply_F_m(spec, fs.cosine(), xs, CFG, backend=backend)
    np.testing.assert_allclose(got, np.cos(xs) * (1 + 3 * r * r) / (1 + r * r) ** 2, atol=1e-9)
    lam = 1 / r
    lap = integrate.quad(lambda t: t * math.sin(t) * math.exp(-lam * t), 0, np.inf)[0]
    assert lap == pytest.approx(2 * lam / (lam * lam + 1) ** 2, rel=1e-9)


def test_picard_modified_bump_antiderivative_against_brute_force():
    f = fs.zero_mean_bump_antiderivative(0.5)
    spec = op.OperatorSpec(kn.picard(), 4.0, 1)
    kinks = f.kinks(1)
    # F_1 f(x) = lam int [f(x+t) - t f'(x+t)] K(lam t) dt
    g0 = brute_force(op.OperatorSpec(kn.picard(), 4.0), lambda t: fs.eval_function(f, t), 0.0, kinks)
    g1 = brute_force(op.OperatorSpec(kn.picard(), 4.0), lambda t: t * fs.eval_derivative(f, 1, t), 0.0, kinks)
    got = op.apply_F_m(spec, f, 0.0, QuadConfig(1e-11, 1e-11))
    assert got == pytest.approx(g0 - g1, abs=1e-9)


def test_apply_F_against_brute_force_bump(backend):
    f = fs.holder_bump(0.5)
    for spec in (op.OperatorSpec(kn.picard(), 3.0), op.OperatorSpec(kn.gauss_weierstrass(), 2.0)):
        for x in (0.0, 0.4, 1.3):
            ref = brute_force(spec, lambda t: fs.eval_function(f, t), x, f.kinks())
            assert op.apply_F(spec, f, x, CFG, backend=backend) == pytest.approx(ref, abs=1e-9)


def test_full_output():
    spec = op.OperatorSpec(kn.picard(), 2.0)
    res = op.apply_F(spec, fs.cosine(), 0.3, CFG, full_output=True)
    assert res.converged and res.error_estimate >= 0
    vals, conv = op.apply_F(spec, fs.cosine(), np.array([0.0, 1.0]), CFG, full_output=True)
    assert vals.shape == (2,) and conv.converged.all()


def test_apply_F_rejects_m():
    with pytest.raises(ValueError):
        op.apply_F(op.OperatorSpec(kn.picard(), 1.0, 1), fs.cosine(), 0.0)


def test_capability_error():
    with pytest.raises(fs.CapabilityError):
        op.apply_F_m(op.OperatorSpec(kn.picard(), 1.0, 1), fs.holder_bump(0.5), 0.0)


def test_periodic_f_with_slow_kernel_and_m_is_unsupported():
    with pytest.raises(op.UnsupportedConfiguration):
        op.apply_F_m(op.OperatorSpec(kn.poisson(), 1.0, 1), fs.cosine(), 0.0)


@pytest.mark.parametrize("spec", LINE_KERNELS, ids=lambda s: s.name)
def test_m_zero_degeneracy(spec):
    xs = np.linspace(-2.5, 2.5, 20)
    f = fs.holder_bump(0.5)
    a = op.apply_F(op.OperatorSpec(spec, 3.0), f, xs, CFG)
    b = op.apply_F_m(op.OperatorSpec(spec, 3.0, 0), f, xs, CFG)
    assert np.max(np.abs(a - b)) < 1e-9


def test_taylor_remainder_cosine_closed_form():
    r = 0.3
    spec = op.operator_for_scale(kn.picard(), r, 1)
    expected = 1 - (1 + 3 * r * r) / (1 + r * r) ** 2
    assert expected == pytest.approx((r ** 4 - r * r) / (1 + r * r) ** 2)
    assert expected == pytest.approx(-0.06893, abs=1e-5)
    assert op.taylor_remainder_error(spec, fs.cosine(), 0.0, QuadConfig(1e-9, 1e-9)) == pytest.approx(expected, abs=1e-8)


def test_taylor_remainder_vanishes_off_support():
    f = fs.zero_mean_bump_antiderivative(0.5)
    spec = op.OperatorSpec(kn.gauss_weierstrass(), 50.0, 1)
    assert abs(op.taylor_remainder_error(spec, f, 40.0, QuadConfig(1e-9, 1e-9))) < 1e-9


@pytest.mark.parametrize("kernel", [kn.picard(), kn.gauss_weierstrass()], ids=lambda s: s.name)
@pytest.mark.parametrize("f", [fs.cosine(), fs.zero_mean_bump_antiderivative(0.5)], ids=lambda f: f.name)
def test_taylor_identity(kernel, f):
    cfg = QuadConfig(1e-9, 1e-9)
    spec = op.operator_for_scale(kernel, 0.1, 1)
    for x in np.linspace(-2.2, 2.2, 10):
        fm = op.apply_F_m(spec, f, x, cfg, full_output=True)
        tr = op.taylor_remainder_error(spec, f, x, cfg, full_output=True)
        gap = abs(fs.eval_function(f, x) - fm.value - tr.value)
        assert gap <= 2 * (fm.error_estimate + tr.error_estimate)


def test_taylor_remainder_rejects_slow_kernels_and_m0():
    with pytest.raises(op.UnsupportedConfiguration):
        op.taylor_remainder_error(op.OperatorSpec(kn.fejer(), 2.0, 1), fs.zero_mean_bump_antiderivative(0.5), 0.0)
    with pytest.raises(ValueError):
        op.taylor_remainder_error(op.OperatorSpec(kn.picard(), 2.0, 0), fs.cosine(), 0.0)


def combined(spec, fa, fb, ca, cb, x):
    """Operator applied to ca*fa + cb*fb through an independent line integral."""
    lam = spec.lam
    g = lambda u: (ca * fs.eval_function(fa, x + u / lam) + cb * fs.eval_function(fb, x + u / lam)) \
        * kn.eval_kernel(spec.kernel, u)
    pts = sorted({lam * (p - x) for p in fa.kinks() + fb.kinks()} | {0.0})
    return integrate_line(g, QuadConfig(1e-11, 1e-11, 5000, ExponentialDecay(1.0)), points=pts).value


@settings(max_examples=15)
@given(ca=st.floats(-3, 3), cb=st.floats(-3, 3), x=st.floats(-2, 2))
def test_linearity(ca, cb, x):
    spec = op.OperatorSpec(kn.picard(), 3.0)
    fa, fb = fs.holder_bump(0.5), fs.cosine()
    lhs = combined(spec, fa, fb, ca, cb, x)
    rhs = ca * op.apply_F(spec, fa, x, CFG) + cb * op.apply_F(spec, fb, x, CFG)
    assert lhs == pytest.approx(rhs, abs=1e-8 * (1 + abs(ca) + abs(cb)))


@settings(max_examples=15)
@given(s=st.floats(-3, 3), x=st.floats(-3, 3))
def test_translation_equivariance(s, x):
    spec = op.OperatorSpec(kn.gauss_weierstrass(), 2.5)
    f = fs.holder_bump(0.5)
    lam = spec.lam
    shifted = lambda u: fs.eval_function(f, x + u / lam - s) * kn.eval_kernel(spec.kernel, u)
    pts = sorted({lam * (p + s - x) for p in f.kinks()})
    lhs = integrate_line(shifted, QuadConfig(1e-11, 1e-11, 5000, ExponentialDecay(1.0)), points=pts).value
    assert lhs == pytest.approx(op.apply_F(spec, f, x - s, CFG), abs=1e-8)


def test_fourier_coefficients_cosine():
    c = op.fourier_coefficients(fs.cosine(), 2, 64)
    np.testing.assert_allclose(c, [0, 0.5, 0, 0.5, 0], atol=1e-12)


def test_fourier_coefficients_abs_sin():
    c = op.fourier_coefficients(fs.abs_sin(1.0), 4, 4096)
    assert c[4].real == pytest.approx(2 / math.pi, abs=1e-6)
    x = np.linspace(0, 2 * math.pi, 10 ** 6, endpoint=False)
    assert np.mean(np.abs(np.sin(x))) == pytest.approx(2 / math.pi, abs=1e-9)
    # |sin x| = 2/pi - (4/pi) sum cos(2kx)/(4k^2 - 1)
    assert c[4 + 2].real == pytest.approx(-2 / (3 * math.pi), abs=1e-6)
    assert abs(c[4 + 1]) < 1e-12


def test_fourier_coefficients_weierstrass():
    c = op.fourier_coefficients(fs.weierstrass(0.5, 3), 9, 4096)
    assert c[9 + 3].real == pytest.approx(0.25, abs=1e-6)
    assert c[9 + 9].real == pytest.approx(0.125, abs=1e-6)
    assert c[9 + 1].real == pytest.approx(0.5, abs=1e-6)
    assert abs(c[9 + 2]) < 1e-6


def test_fourier_coefficients_errors():
    with pytest.raises(ValueError):
        op.fourier_coefficients(fs.holder_bump(0.5), 4)
    with pytest.raises(ValueError):
        op.fourier_coefficients(fs.cosine(), 4, 8)


@pytest.mark.parametrize("gamma", [0.5, 1.0, 3.0])
def test_riesz_mean_n1_vanishes(gamma):
    x = np.linspace(0, 6, 9)
    np.testing.assert_allclose(op.riesz_mean(op.PeriodicMeanSpec(gamma, 1), fs.cosine(), x), 0.0, atol=1e-14)


def test_fejer_mean_cosine():
    x = np.linspace(-3, 3, 13)
    got = op.riesz_mean(op.PeriodicMeanSpec(1.0, 8), fs.cosine(), x)
    np.testing.assert_allclose(got, 0.875 * np.cos(x), atol=1e-13)


def test_riesz_mean_abs_sin_against_direct_sum():
    spec = op.PeriodicMeanSpec(2.0, 32, 4096)
    N = 10 ** 6
    xs = 2 * math.pi * np.arange(N) / N
    fx = np.abs(np.sin(xs))
    k = np.arange(-32, 33)
    total = 0.0
    for kk in k:
        ck = np.mean(fx * np.exp(-1j * kk * xs))
        total += (1 - abs(kk) / 32) ** 2 * ck * np.exp(1j * kk * math.pi / 2)
    # the default 4096-point grid carries the aliasing error of 1/k^2 coefficients
    assert op.riesz_mean(spec, fs.abs_sin(1.0), math.pi / 2) == pytest.approx(total.real, abs=2e-8)
    fine = op.PeriodicMeanSpec(2.0, 32, 2 ** 18)
    assert op.riesz_mean(fine, fs.abs_sin(1.0), math.pi / 2) == pytest.approx(total.real, abs=1e-11)


def test_riesz_mean_grid_matches_pointwise():
    spec = op.PeriodicMeanSpec(1.5, 16)
    f = fs.abs_sin(0.5)
    grid = op.riesz_mean_grid(spec, f, 64)
    x = 2 * math.pi * np.arange(64) / 64
    np.testing.assert_allclose(grid, op.riesz_mean(spec, f, x), atol=1e-12)
    with pytest.raises(ValueError):
        op.riesz_mean_grid(spec, f, 16)


@settings(max_examples=20)
@given(gamma=st.floats(0.2, 4.0), n=st.integers(1, 64), x=st.floats(-10, 10))
def test_riesz_mean_is_real(gamma, n, x):
    # _check_real raises on imaginary residue >= 1e-10
    v = op.riesz_mean(op.PeriodicMeanSpec(gamma, n, 512), fs.weierstrass(0.5, 3), x)
    assert math.isfinite(v)
