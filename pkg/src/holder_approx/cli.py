"""Command-line front end.

Exit codes: 0 success, 1 failed verdict or check, 2 usage or configuration
error, 3 numerical non-convergence (only with ``--strict``).
"""
import argparse
import math
import os
import sys

import numpy as np

from . import funcspace as fs
from . import kernel as kn
from . import operator as op
from . import rates
from .convolution import UnsupportedConfiguration
from .quad import QuadConfig
from .suite import curve_csv, fmt, run_suite

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2, 3


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


# -- config files ------------------------------------------------------------------

_SCHEMA = {
    "schema_version": int,
    "operator": {"family": str, "kernel": str, "gamma": float, "m": int, "coeff_grid_size": int},
    "function": {"name": str, "alpha": float, "a": float, "b": int, "value": float},
    "sweep": {"p": (float, str), "beta": float, "eta": float, "scales": list,
              "scale_range": {"lo": float, "hi": float, "count": int},
              "norm_grid_size": int, "h_grid": {"lo": float, "hi": float, "count": int}},
    "quad": {"abs_tol": float, "rel_tol": float, "max_subdivisions": int},
    "output": {"path": str},
}


def _check_keys(table, schema, path):
    for key, value in table.items():
        where = f"{path}.{key}" if path else key
        if key not in schema:
            raise ConfigError(f"unknown config key '{where}'")
        expected = schema[key]
        if isinstance(expected, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key '{where}' must be a table")
            _check_keys(value, expected, where)
            continue
        types = expected if isinstance(expected, tuple) else (expected,)
        if float in types and isinstance(value, int) and not isinstance(value, bool):
            continue
        if not isinstance(value, types) or isinstance(value, bool):
            names = " or ".join(t.__name__ for t in types)
            raise ConfigError(f"config key '{where}' must be {names}, got {value!r}")


def load_config(path):
    """Parse and validate a TOML experiment file into (SweepConfig, output path)."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}")
    _check_keys(raw, _SCHEMA, "")
    if "schema_version" not in raw:
        raise ConfigError("config key 'schema_version' is required")
    if raw["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"config key 'schema_version' must be {SCHEMA_VERSION}, got {raw['schema_version']}")
    for section in ("operator", "function"):
        if section not in raw:
            raise ConfigError(f"config section '{section}' is required")
    return _build_sweep(raw), raw.get("output", {}).get("path")


def _field(table, key, section, default=None, required=False):
    if key in table:
        return table[key]
    if required:
        raise ConfigError(f"config key '{section}.{key}' is required")
    return default


def _build_sweep(raw):
    o, fn, sw, qd = raw["operator"], raw["function"], raw.get("sweep", {}), raw.get("quad", {})
    try:
        f = fs.from_name(_field(fn, "name", "function", required=True), fn.get("alpha"),
                         fn.get("a"), fn.get("b"), fn.get("value"))
    except ValueError as exc:
        raise ConfigError(f"config section 'function': {exc}")
    family_name = _field(o, "family", "operator", "line")
    try:
        if family_name == "line":
            spec = kn.KernelSpec.from_name(_field(o, "kernel", "operator", required=True), o.get("gamma"))
            family = rates.LineOperator(spec, int(o.get("m", 0)))
        elif family_name == "riesz-mean":
            family = rates.RieszMean(float(_field(o, "gamma", "operator", required=True)),
                                     int(o.get("coeff_grid_size", rates.RIESZ_COEFF_GRID)))
        else:
            raise ConfigError(f"config key 'operator.family' must be 'line' or 'riesz-mean', got {family_name!r}")
    except ValueError as exc:
        raise ConfigError(f"config section 'operator': {exc}")
    p = sw.get("p", math.inf)
    if isinstance(p, str):
        if p.strip().lower() not in ("inf", "infinity"):
            raise ConfigError(f"config key 'sweep.p' must be a number or \"inf\", got {p!r}")
        p = math.inf
    scales = None
    if "scales" in sw and "scale_range" in sw:
        raise ConfigError("config keys 'sweep.scales' and 'sweep.scale_range' are mutually exclusive")
    if "scales" in sw:
        scales = sw["scales"]
        if not all(isinstance(s, (int, float)) and not isinstance(s, bool) for s in scales):
            raise ConfigError("config key 'sweep.scales' must be a list of numbers")
    elif "scale_range" in sw:
        rg = sw["scale_range"]
        for key in ("lo", "hi", "count"):
            _field(rg, key, "sweep.scale_range", required=True)
        if not (rg["lo"] > 0 and rg["hi"] > 0 and rg["count"] >= 2):
            raise ConfigError("config key 'sweep.scale_range' needs lo, hi > 0 and count >= 2")
        scales = np.logspace(math.log10(rg["lo"]), math.log10(rg["hi"]), rg["count"])
        if isinstance(family, rates.RieszMean):
            scales = np.unique(np.rint(scales))
    h_grid = None
    if "h_grid" in sw:
        hg = sw["h_grid"]
        for key in ("lo", "hi", "count"):
            _field(hg, key, "sweep.h_grid", required=True)
        h_grid = np.logspace(math.log10(hg["lo"]), math.log10(hg["hi"]), hg["count"])
    try:
        quad = QuadConfig(qd.get("abs_tol", rates.SWEEP_QUAD.abs_tol), qd.get("rel_tol", rates.SWEEP_QUAD.rel_tol),
                          qd.get("max_subdivisions", rates.SWEEP_QUAD.max_subdivisions))
    except ValueError as exc:
        raise ConfigError(f"config section 'quad': {exc}")
    try:
        return rates.SweepConfig(family, f, p=p, beta=float(sw.get("beta", 0.0)), eta=sw.get("eta"),
                                 scale_values=scales, norm_grid_size=sw.get("norm_grid_size"),
                                 h_grid=h_grid, quad=quad)
    except ValueError as exc:
        raise ConfigError(f"config section 'sweep': {exc}")


# -- subcommands -------------------------------------------------------------------

def _kernel_from_args(args):
    try:
        return kn.KernelSpec.from_name(args.kernel, args.gamma)
    except ValueError as exc:
        raise ConfigError(f"kernel: {exc}")


def _moment_text(value):
    return str(value) if value is kn.DIVERGENT else fmt(value)


def cmd_kernel_check(args, out):
    spec = _kernel_from_args(args)
    rep = kn.verify_kernel_conditions(spec, max_moment=args.max_j)
    out(f"kernel: {spec.name}")
    out(f"symmetric_max_asymmetry: {fmt(rep.symmetric_max_asymmetry)}")
    out(f"normalization_value: {fmt(rep.normalization_value)}")
    out(f"sup_on_unit_interval: {fmt(rep.sup_on_unit_interval)}")
    out(f"sup_x2K: {_moment_text(rep.sup_x2K)}")
    out(f"tail_moment_t2: {_moment_text(rep.tail_moment_t2)}")
    out("j,moment")
    for j, value in rep.moment_status:
        out(f"{j},{_moment_text(value)}")
    conds = rep.conditions()
    for name, ok in conds.items():
        out(f"condition {name}: {'pass' if ok else 'fail'}")
    nonconverged = [k for k, ok in rep.quality.items() if not ok]
    if nonconverged:
        out(f"quality: not converged: {', '.join(nonconverged)}")
    if args.strict and nonconverged:
        return EXIT_NONCONVERGED
    return EXIT_OK if all(conds.values()) else EXIT_FAIL


def cmd_moments(args, out):
    spec = _kernel_from_args(args)
    if args.max_j < 0:
        raise ConfigError("--max-j must be nonnegative")
    out("j,moment")
    failed = False
    for j in range(args.max_j + 1):
        mr = kn.moment_result(spec, j)
        failed |= not mr.converged
        out(f"{j},{_moment_text(mr.value)}")
    return EXIT_NONCONVERGED if args.strict and failed else EXIT_OK


def _parse_x_grid(text):
    parts = text.split(":")
    try:
        if len(parts) == 3:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError
            return np.linspace(start, stop, count)
        if len(parts) == 1:
            return np.array([float(v) for v in text.split(",")])
    except ValueError:
        pass
    raise ConfigError(f"--x-grid must be 'start:stop:count' or a comma list, got {text!r}")


def cmd_approximate(args, out):
    spec = _kernel_from_args(args)
    try:
        f = fs.from_name(args.function, args.alpha)
        ospec = op.OperatorSpec(spec, args.lam, args.m)
    except ValueError as exc:
        raise ConfigError(str(exc))
    xs = _parse_x_grid(args.x_grid)
    cfg = QuadConfig(args.abs_tol, args.rel_tol)
    try:
        values, res = op.apply_F_m(ospec, f, xs, cfg, full_output=True)
    except (UnsupportedConfiguration, fs.CapabilityError) as exc:
        raise ConfigError(str(exc))
    fx = np.asarray(fs.eval_function(f, xs))
    lines = ["x,f,approx,error"]
    lines += [f"{fmt(x)},{fmt(a)},{fmt(b)},{fmt(b - a)}" for x, a, b in zip(xs, fx, values)]
    _write(args.out, "\n".join(lines) + "\n")
    bad = int(np.count_nonzero(~res.converged))
    if bad:
        out(f"warning: {bad} point(s) did not reach the quadrature tolerance")
        if args.strict:
            return EXIT_NONCONVERGED
    return EXIT_OK


def _write(path, text):
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write output file {path}: {exc}")


def cmd_rate_sweep(args, out):
    cfg, cfg_out = load_config(args.config)
    path = args.out or cfg_out
    if not path:
        raise ConfigError("no output path: pass --out or set 'output.path' in the config")
    try:
        report, curve = rates.check_theorem(cfg, args.tolerance)
    except UnsupportedConfiguration as exc:
        raise ConfigError(str(exc))
    except rates.DegenerateFit as exc:
        out(f"error: {exc}")
        return EXIT_NONCONVERGED if args.strict else EXIT_FAIL
    _write(path, curve_csv(curve, report))
    out(f"verdict: {'pass' if report.verdict else 'fail'}")
    if args.strict and any(q != rates.QUALITY_OK for q in curve.quality):
        return EXIT_NONCONVERGED
    return EXIT_OK if report.verdict else EXIT_FAIL


def cmd_theorem_suite(args, out):
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
    lines = []

    def log(line):
        lines.append(line)
        out(line)

    results = run_suite(args.out_dir, log)
    passed = sum(r.passed for r in results)
    log(f"summary: {passed}/{len(results)} passed")
    if args.out_dir:
        _write(os.path.join(args.out_dir, "summary.txt"), "\n".join(lines) + "\n")
    return EXIT_OK if passed == len(results) else EXIT_FAIL


def build_parser():
    parser = _Parser(prog="holder-approx", description="Approximation by Fejer-type singular integrals.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def kernel_args(p):
        p.add_argument("kernel", help="fejer, riesz, poisson, picard or gauss-weierstrass")
        p.add_argument("--gamma", type=float, help="Riesz exponent")
        p.add_argument("--strict", action="store_true", help="exit 3 on quadrature non-convergence")

    p = sub.add_parser("kernel-check", help="verify the kernel conditions")
    kernel_args(p)
    p.add_argument("--max-j", type=int, default=6, help="highest moment to report")
    p.set_defaults(func=cmd_kernel_check)

    p = sub.add_parser("moments", help="print the absolute moments of a kernel")
    kernel_args(p)
    p.add_argument("--max-j", type=int, required=True)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("approximate", help="evaluate the operator on a grid and write a CSV")
    kernel_args(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--function", required=True)
    p.add_argument("--alpha", type=float, help="Holder exponent of the test function")
    p.add_argument("--x-grid", required=True, help="start:stop:count or a comma list")
    p.add_argument("--abs-tol", type=float, default=1e-10)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_approximate)

    p = sub.add_parser("rate-sweep", help="run a sweep from a TOML config and fit its rate")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--tolerance", type=float, help="override the verdict tolerance")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_rate_sweep)

    p = sub.add_parser("theorem-suite", help="run every acceptance configuration")
    p.add_argument("--out-dir", help="directory for per-sweep CSV files and a summary")
    p.set_defaults(func=cmd_theorem_suite)
    return parser


def main(argv=None):
    out = print
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
