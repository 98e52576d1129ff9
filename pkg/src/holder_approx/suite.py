"""The theorem suite: every acceptance configuration as a named pass/fail check."""
from dataclasses import dataclass
import math
import os

import numpy as np

from . import funcspace as fs
from . import kernel as kn
from . import norms
from . import operator as op
from . import rates
from .quad import QuadConfig


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def fmt(v):
    """17 significant digits, keeping a decimal point on integral floats."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if not isinstance(v, (float, np.floating)):
        return str(v)
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    s = format(v, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def curve_csv(curve, report):
    """CSV text for an error curve followed by its ``#`` report block."""
    lines = ["scale,error,quality"]
    for s, e, q in zip(curve.scales, curve.errors, curve.quality):
        lines.append(f"{fmt(s)},{fmt(e)},{q}")
    fitted = "none" if math.isnan(report.fitted_exponent) else fmt(report.fitted_exponent)
    theo = "none" if math.isnan(report.theoretical_exponent) else fmt(report.theoretical_exponent)
    lines += [
        f"# model={report.model}",
        f"# fitted_exponent={fitted}",
        f"# theoretical_exponent={theo}",
        f"# verdict={'pass' if report.verdict else 'fail'}",
        f"# tolerance={fmt(report.tolerance)}",
        f"# r_squared={fmt(report.r_squared)}",
        f"# ratio_spread={fmt(report.ratio_spread)}",
        f"# scale={curve.scale_name}",
        f"# convention={report.convention}",
    ]
    return "\n".join(lines) + "\n"


_KERNELS = [kn.fejer(), kn.riesz(0.5), kn.riesz(1.0), kn.riesz(2.5), kn.poisson(), kn.picard(),
            kn.gauss_weierstrass()]


def check_normalization():
    worst = 0.0
    for spec in _KERNELS:
        rep = kn.verify_kernel_conditions(spec, n_samples=2000, max_moment=0)
        worst = max(worst, abs(rep.normalization_value - 1.0))
    return CheckResult("kernel-normalization", worst < 1e-6, f"max |int K - 1| = {fmt(worst)}")


def check_picard_moments():
    spec = kn.picard()
    worst = max(abs(kn.kernel_moment(spec, j) - math.factorial(j) / 2.0) for j in range(7))
    return CheckResult("picard-moments", worst < 1e-8, f"max deviation from j!/2 = {fmt(worst)}")


def check_gw_moments():
    spec = kn.gauss_weierstrass()
    worst = max(abs(kn.kernel_moment(spec, j) - kn.closed_form_moment(spec, j)) for j in range(6))
    return CheckResult("gauss-weierstrass-moments", worst < 1e-8, f"max deviation from table = {fmt(worst)}")


def check_riesz_fejer():
    t = np.linspace(-50.0, 50.0, 1000)
    diff = float(np.max(np.abs(kn.eval_kernel(kn.riesz(1.0), t) - kn.eval_kernel(kn.fejer(), t))))
    return CheckResult("riesz1-equals-fejer", diff < 1e-8, f"max difference = {fmt(diff)}")


def check_poisson():
    rep = kn.verify_kernel_conditions(kn.poisson(), n_samples=20000, max_moment=1)
    divergent = rep.moment(1) is kn.DIVERGENT
    ok = divergent and rep.all_pass()
    return CheckResult("poisson-divergent-moment", ok,
                       f"moment_1={rep.moment(1)} conditions={'pass' if rep.all_pass() else 'fail'}")


def check_eigenfunctions():
    cfg = QuadConfig(1e-10, 1e-10)
    xs = np.array([0.0, 1.0, 2.5])
    worst = 0.0
    for s in (0.05, 0.2):
        cases = [
            (kn.picard(), np.cos(xs) / (1.0 + s * s)),
            (kn.gauss_weierstrass(), math.exp(-s) * np.cos(xs)),
            (kn.poisson(), math.exp(-s) * np.cos(xs)),
        ]
        for spec, expected in cases:
            got = op.apply_F(op.operator_for_scale(spec, s), fs.cosine(), xs, cfg)
            worst = max(worst, float(np.max(np.abs(got - expected))))
    # Taylor-modified Picard: F_1 cos = cos (1 + 3r^2) / (1 + r^2)^2
    for s in rates.log_scales():
        got = op.apply_F_m(op.operator_for_scale(kn.picard(), s, 1), fs.cosine(), 0.0, cfg)
        expected = (1.0 + 3.0 * s * s) / (1.0 + s * s) ** 2
        worst = max(worst, abs(got - expected))
    return CheckResult("eigenfunction-identities", worst < 1e-6, f"max deviation = {fmt(worst)}")


def check_taylor_identity(points=10, scale=0.1):
    cfg = QuadConfig(1e-9, 1e-9)
    worst_ratio = 0.0
    for spec in (kn.picard(), kn.gauss_weierstrass()):
        o = op.operator_for_scale(spec, scale, 1)
        for f in (fs.cosine(), fs.zero_mean_bump_antiderivative(0.5)):
            for x in np.linspace(-2.2, 2.2, points):
                fm = op.apply_F_m(o, f, x, cfg, full_output=True)
                tr = op.taylor_remainder_error(o, f, x, cfg, full_output=True)
                budget = fm.error_estimate + tr.error_estimate
                gap = abs(fs.eval_function(f, x) - fm.value - tr.value)
                worst_ratio = max(worst_ratio, gap / (2.0 * budget))
    return CheckResult("taylor-identity", worst_ratio < 1.0,
                       f"max |gap| / (2 x tolerance budget) = {fmt(worst_ratio)}")


def run_sweep(name, out_dir=None):
    cfg, tol = rates.acceptance_sweeps()[name]
    report, curve = rates.check_theorem(cfg, tol)
    if out_dir:
        with open(os.path.join(out_dir, f"{name}.csv"), "w", newline="\n") as fh:
            fh.write(curve_csv(curve, report))
    if report.model == rates.POWER:
        detail = f"slope={fmt(report.fitted_exponent)} expected={fmt(report.theoretical_exponent)} tol={fmt(tol)}"
    else:
        detail = f"spread={fmt(report.ratio_spread)} limit={fmt(tol)}"
    return report, curve, CheckResult(f"sweep:{name}", report.verdict, detail)


def check_remark2():
    r = rates.log_scales(1e-3, 1e-1, 4)
    cases = [
        (kn.picard(), 0, fs.cosine(), math.inf),
        (kn.picard(), 1, fs.zero_mean_bump_antiderivative(0.5), 1.0),
        (kn.gauss_weierstrass(), 0, fs.holder_bump(0.5), math.inf),
        (kn.gauss_weierstrass(), 1, fs.zero_mean_bump_antiderivative(0.5), 1.0),
    ]
    worst = 0.0
    ok = True
    for spec, m, f, p in cases:
        lams = [op.lambda_for_scale(spec, s) for s in r]
        chk = rates.remark2_bound_check(spec, m, f, lams, p=p)
        ok &= chk.passed
        worst = max(worst, float(np.max(chk.lhs / (chk.constant * chk.rhs))))
    return CheckResult("remark2-bound", ok, f"max LHS / (C RHS) = {fmt(worst)}")


def check_norm_estimators():
    f = fs.holder_bump(0.5)
    grid = norms.UniformGrid.symmetric(4.0, 2 ** 14)
    hs = np.linspace(0.0, 1.0, 257)[1:]
    ts = [0.01, 0.05, 0.1, 0.5, 1.0]
    mods = [norms.modulus_of_continuity(f, t, grid=grid, h_values=hs) for t in ts]
    monotone = all(b >= a for a, b in zip(mods, mods[1:]))
    worst_slope = 0.0
    t = np.logspace(-3, -1, 6)
    for alpha in (0.3, 0.5, 0.8):
        g = fs.holder_bump(alpha)
        w = [norms.modulus_of_continuity(g, ti) for ti in t]
        slope = np.polyfit(np.log(t), np.log(w), 1)[0]
        worst_slope = max(worst_slope, abs(slope - alpha))
    space = norms.NormSpace(math.inf, 0.25)
    coarse = norms.holder_seminorm(norms.sample(f, norms.UniformGrid.symmetric(2.0, 2 ** 15)), space)
    fine = norms.holder_seminorm(norms.sample(f, norms.UniformGrid.symmetric(2.0, 2 ** 16)), space)
    change = abs(fine - coarse) / abs(fine)
    ok = monotone and worst_slope <= 0.05 and change < 0.05
    return CheckResult("norm-estimators", ok,
                       f"monotone={fmt(monotone)} max|slope-alpha|={fmt(worst_slope)} refinement_change={fmt(change)}")


def run_suite(out_dir=None, log=None):
    """Run every check in a fixed order; returns the list of results."""
    results = []

    def record(res):
        results.append(res)
        if log:
            log(f"{'PASS' if res.passed else 'FAIL'} {res.name}: {res.detail}")

    for check in (check_normalization, check_picard_moments, check_gw_moments, check_riesz_fejer,
                  check_poisson, check_eigenfunctions, check_taylor_identity):
        record(check())
    for name in rates.acceptance_sweeps():
        record(run_sweep(name, out_dir)[2])
    record(check_remark2())
    record(check_norm_estimators())
    return results
