"""Command line front-end: ``roughfrac {eval,norm,weight-check,verify,sweep}``.

Every flag has a config-file equivalent (``--config run.json`` with a
``schema`` key and the flag names as keys, dashes replaced by underscores).
Flags override file values and the effective configuration is echoed into
every output. Exit status: 0 success, 1 failed verification, 2 bad
configuration or violated hypothesis.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__
from .exceptions import ConfigError, HypothesisViolation, RoughFracError
from .exponents import derive_exponents
from .functions import parse_generator, read_sfn, write_sfn
from .kernels import parse_kernel
from .norms import NormSpec, lp_norm, weak_lp_quasinorm, weighted_norm
from .operators import OPS, EvalSettings, eval_field, point_profile
from .verify import SUITES, reports_to_csv, reports_to_json, run_suite
from .weights import (
    CubeFamily,
    WeightSpec,
    ap_constant,
    apq_constant,
    cond7_constant,
    pair_alpha_constant,
    thm6_condition_constant,
)

CLI_SCHEMA = "roughfrac.cli/1"

DEFAULTS = {
    "eval": {
        "op": "I", "m": 1, "n": 1, "alpha": None, "s": None, "p": None, "kernel": "constant:1",
        "f": None, "x": None, "grid": None, "cells": 32, "interp": "nearest",
        "quad_tol": 1e-3, "rho": 4, "seed": 0, "out": None,
    },
    "norm": {
        "f": None, "kind": "strong", "p": 2.0, "w": None, "n": 1, "cells": 32,
        "interp": "nearest", "out": None,
    },
    "weight-check": {
        "cls": "ap", "w": None, "u": None, "v": None, "p": None, "q": None, "alpha": 0.0,
        "r": 2.0, "s_prime": 1.0, "m": 1, "n": 1, "root": "-1:1", "levels": "0:8",
        "random": 0, "seed": 0, "quad_tol": 1e-3, "out": None,
    },
    "verify": {
        "suite": "paper-core", "seed": 7, "out": None, "csv": None, "baseline": None,
        "write_baseline": None, "quad_tol": 1e-3, "rho": 4,
    },
    "sweep": {
        "op": "M", "m": 1, "n": 1, "alpha": None, "s": None, "p": None, "kernel": "constant:1",
        "f": None, "grid": "-2:0.5:8", "param": "alpha", "values": None, "cells": 32,
        "interp": "nearest", "quad_tol": 1e-3, "rho": 4, "seed": 0, "out": None,
    },
}


def _floats(text):
    if text is None:
        return None
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def build_parser():
    ap = argparse.ArgumentParser(prog="roughfrac", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"roughfrac {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def common(p):
        p.add_argument("--config", default=None, help="JSON file with flag values")

    def operator_flags(p, multi_x=True):
        p.add_argument("--op", choices=OPS, default=S)
        p.add_argument("--m", type=int, default=S)
        p.add_argument("--n", type=int, default=S)
        p.add_argument("--alpha", type=float, default=S)
        p.add_argument("--s", type=float, default=S, help="kernel exponent (default: inf for bounded kernels)")
        p.add_argument("--p", default=S, help="comma-separated input exponents")
        p.add_argument("--kernel", default=S, help="constant:c, power:gamma or sign[:axis]")
        p.add_argument("--f", action="append", default=S, help="generator spec or SFN path, once per factor")
        p.add_argument("--cells", type=int, default=S)
        p.add_argument("--interp", choices=("nearest", "multilinear"), default=S)
        p.add_argument("--quad-tol", dest="quad_tol", type=float, default=S)
        p.add_argument("--rho", type=int, default=S)
        p.add_argument("--seed", type=int, default=S)
        p.add_argument("--out", default=S)

    p = sub.add_parser("eval", help="evaluate an operator at points or on a grid")
    common(p)
    operator_flags(p)
    p.add_argument("--x", action="append", default=S, help="evaluation point, comma-separated coordinates")
    p.add_argument("--grid", default=S, help="origin:spacing:cells for a field (writes SFN to --out)")

    p = sub.add_parser("norm", help="Lebesgue norms of a grid function")
    common(p)
    p.add_argument("--f", default=S)
    p.add_argument("--kind", choices=("strong", "weak", "weighted_multiplier", "weighted_measure"), default=S)
    p.add_argument("--p", type=float, default=S)
    p.add_argument("--w", default=S, help="weight spec, e.g. power:0.5")
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--cells", type=int, default=S)
    p.add_argument("--interp", choices=("nearest", "multilinear"), default=S)
    p.add_argument("--out", default=S)

    p = sub.add_parser("weight-check", help="estimate a weight-class constant on a cube family")
    common(p)
    p.add_argument("--class", dest="cls", choices=("ap", "apq", "pair", "cond7", "thm6"), default=S)
    for k in ("w", "u", "v"):
        p.add_argument(f"--{k}", default=S)
    for k in ("p", "q", "alpha", "r"):
        p.add_argument(f"--{k}", type=float, default=S)
    p.add_argument("--s-prime", dest="s_prime", type=float, default=S)
    p.add_argument("--m", type=int, default=S)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--root", default=S, help="a:b root interval (cube [a,b]^n)")
    p.add_argument("--levels", default=S, help="lmin:lmax dyadic levels")
    p.add_argument("--random", type=int, default=S, help="number of random cubes")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--quad-tol", dest="quad_tol", type=float, default=S)
    p.add_argument("--out", default=S)

    p = sub.add_parser("verify", help="run a verification suite")
    common(p)
    p.add_argument("--suite", default=S, help=f"one of {sorted(SUITES)} or a suite JSON file")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--out", default=S, help="JSON summary path")
    p.add_argument("--csv", default=S, help="CSV path (default: --out with .csv)")
    p.add_argument("--baseline", default=S, help="JSON file of per-check baseline constants")
    p.add_argument("--write-baseline", dest="write_baseline", default=S)
    p.add_argument("--quad-tol", dest="quad_tol", type=float, default=S)
    p.add_argument("--rho", type=int, default=S)

    p = sub.add_parser("sweep", help="tabulate an operator over x for several parameter values")
    common(p)
    operator_flags(p)
    p.add_argument("--grid", default=S, help="origin:spacing:cells")
    p.add_argument("--param", choices=("alpha", "rho"), default=S)
    p.add_argument("--values", default=S, help="comma-separated parameter values")
    return ap


def effective_config(command, ns):
    """Merge defaults, the config file and explicit flags, in that order."""
    cfg = dict(DEFAULTS[command])
    path = getattr(ns, "config", None)
    if path:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
        except OSError as exc:
            raise ConfigError(str(exc)) from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        schema = data.pop("schema", None)
        if schema != CLI_SCHEMA:
            raise ConfigError(f"{path}: schema must be {CLI_SCHEMA!r}, got {schema!r}")
        data.pop("command", None)
        unknown = sorted(set(data) - set(cfg))
        if unknown:
            raise ConfigError(f"{path}: unknown keys {unknown}")
        cfg.update(data)
    for k, v in vars(ns).items():
        if k in cfg:
            cfg[k] = v
    cfg["command"] = command
    return cfg


def _functions(specs, m, n, cells, interp):
    if specs is None:
        raise ConfigError("at least one --f is required")
    if isinstance(specs, str):
        specs = [specs]
    if len(specs) == 1 and m > 1:
        specs = list(specs) * m
    if len(specs) != m:
        raise ConfigError(f"expected {m} functions, got {len(specs)}")
    out = []
    for s in specs:
        if os.path.exists(s):
            out.append(read_sfn(s))
        else:
            out.append(parse_generator(s, n, cells, interp))
    return tuple(out)


def _exponents(cfg, kernel_s):
    m, n = int(cfg["m"]), int(cfg["n"])
    if cfg["alpha"] is None:
        raise ConfigError("--alpha is required")
    alpha = float(cfg["alpha"])
    s = kernel_s if cfg["s"] is None else float(cfg["s"])
    p = _floats(cfg["p"])
    if p is None:
        sp = 1.0 if math.isinf(s) else s / (s - 1.0)
        hi = m * n / alpha if alpha > 0 else math.inf
        p = [0.5 * (sp + hi) if math.isfinite(hi) else 2.0 * sp] * m
    elif len(p) == 1:
        p = p * m
    return derive_exponents(m, n, alpha, s, p)


def _kernel_and_cfg(cfg):
    m, n = int(cfg["m"]), int(cfg["n"])
    s = None if cfg["s"] is None else float(cfg["s"])
    if cfg["alpha"] is not None and not 0 < float(cfg["alpha"]) < m * n:
        raise HypothesisViolation("0 < alpha < mn", f"alpha={cfg['alpha']}, mn={m * n}")
    kernel = parse_kernel(cfg["kernel"], m, n, s)
    ecfg = _exponents(cfg, kernel.s)
    return kernel, ecfg


def _grid(text, n):
    try:
        a, h, k = str(text).split(":")
        return [float(a)] * n, float(h), [int(k)] * n
    except ValueError:
        raise ConfigError(f"grid must be origin:spacing:cells, got {text!r}") from None


def _settings(cfg):
    return EvalSettings(quad_tol=float(cfg["quad_tol"]), rho=int(cfg["rho"]), seed=int(cfg["seed"]))


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_eval(cfg):
    kernel, ecfg = _kernel_and_cfg(cfg)
    fs = _functions(cfg["f"], ecfg.m, ecfg.n, int(cfg["cells"]), cfg["interp"])
    settings = _settings(cfg)
    if cfg["grid"] is not None:
        field = eval_field(cfg["op"], fs, kernel, ecfg, settings.with_grid(*_grid(cfg["grid"], ecfg.n)))
        if cfg["out"]:
            write_sfn(field, cfg["out"])
            _emit(json.dumps({"config": cfg, "written": cfg["out"]}, sort_keys=True) + "\n", None)
        else:
            from .functions import dumps_sfn

            _emit(dumps_sfn(field), None)
        return 0
    xs = cfg["x"] if cfg["x"] is not None else ["0"]
    if isinstance(xs, (str, int, float)):
        xs = [xs]
    results = []
    for x in xs:
        pt = _floats(x)
        if len(pt) != ecfg.n:
            raise ConfigError(f"point {x!r} needs {ecfg.n} coordinates")
        if cfg["op"] in ("I_smooth", "M_smooth"):
            from .kernels import KernelSpec

            kern = KernelSpec.constant(1.0, ecfg.m, ecfg.n)
        else:
            kern = kernel
        prof = point_profile(fs, kern, ecfg.alpha, pt, settings, (ecfg.alpha,))
        val = prof.I if cfg["op"].startswith("I") else prof.M[ecfg.alpha]
        results.append({"x": pt, "value": val, "err_est": prof.err_est})
    if cfg["out"]:
        doc = {"config": cfg, "results": results}
        _emit(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n", cfg["out"])
    for r in results:
        print(repr(r["value"]))
    return 0


def cmd_norm(cfg):
    n = int(cfg["n"])
    (f,) = _functions(cfg["f"], 1, n, int(cfg["cells"]), cfg["interp"])
    kind, p = cfg["kind"], float(cfg["p"])
    if kind == "strong":
        val = lp_norm(f, p)
    elif kind == "weak":
        val = weak_lp_quasinorm(f, p)
    else:
        if cfg["w"] is None:
            raise ConfigError("--w is required for weighted norms")
        val = weighted_norm(f, NormSpec(kind, p, WeightSpec.parse(cfg["w"], n)))
    if cfg["out"]:
        _emit(json.dumps({"config": cfg, "value": val}, indent=2, sort_keys=True) + "\n", cfg["out"])
    print(repr(val))
    return 0


def _family(cfg):
    n = int(cfg["n"])
    try:
        a, b = (float(v) for v in str(cfg["root"]).split(":"))
        lo, hi = (int(v) for v in str(cfg["levels"]).split(":"))
    except ValueError:
        raise ConfigError("root must be a:b and levels lmin:lmax") from None
    return CubeFamily(lower=(a,) * n, side=b - a, level_min=lo, level_max=hi,
                      random_count=int(cfg["random"]), seed=int(cfg["seed"]))


def cmd_weight_check(cfg):
    fam = _family(cfg)
    n = fam.dim
    tol = float(cfg["quad_tol"])

    def weight(key):
        if cfg[key] is None:
            raise ConfigError(f"--{key} is required for class {cfg['cls']}")
        return WeightSpec.parse(cfg[key], n)

    def need(key):
        if cfg[key] is None:
            raise ConfigError(f"--{key.replace('_', '-')} is required for class {cfg['cls']}")
        return float(cfg[key])

    cls = cfg["cls"]
    if cls == "ap":
        rep = ap_constant(weight("w"), need("p"), fam, tol)
    elif cls == "apq":
        rep = apq_constant(weight("w"), need("p"), need("q"), fam, tol)
    elif cls == "pair":
        rep = pair_alpha_constant(weight("u"), weight("v"), need("p"), need("q"), float(cfg["alpha"]), fam, tol)
    elif cls == "cond7":
        rep = cond7_constant(weight("u"), weight("v"), need("p"), need("q"), need("r"), float(cfg["alpha"]),
                             need("s_prime"), int(cfg["m"]), fam, tol)
    else:
        rep = thm6_condition_constant(weight("u"), weight("v"), need("p"), need("q"), need("r"),
                                      float(cfg["alpha"]), need("s_prime"), int(cfg["m"]), fam, tol)
    doc = {"config": cfg, "report": rep.to_dict()}
    text = json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"
    _emit(text, cfg["out"])
    if cfg["out"]:
        print(repr(rep.sup_estimate))
    return 0


def _load_baseline(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"baseline {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"baseline {path}: expected an object of check id to constant")
    return {str(k): float(v) for k, v in data.items()}


def cmd_verify(cfg):
    suite = cfg["suite"]
    if suite in SUITES:
        suite_cfg = {"schema": "roughfrac.suite/1", "suite": suite, "seed": int(cfg["seed"])}
    elif isinstance(suite, str) and os.path.exists(suite):
        try:
            with open(suite) as fh:
                suite_cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{suite}: line {exc.lineno}: {exc.msg}") from None
        suite_cfg.setdefault("seed", int(cfg["seed"]))
    else:
        raise ConfigError(f"unknown suite {suite!r}; known: {sorted(SUITES)} or a JSON file")
    settings = dict(suite_cfg.get("settings") or {})
    settings.setdefault("quad_tol", float(cfg["quad_tol"]))
    settings.setdefault("rho", int(cfg["rho"]))
    suite_cfg["settings"] = settings
    baselines = _load_baseline(cfg["baseline"])
    if baselines:
        suite_cfg["baselines"] = {**baselines, **(suite_cfg.get("baselines") or {})}
    reports, summary = run_suite(suite_cfg)
    # output paths are left out so reruns to other files stay byte-identical
    cli_echo = {k: v for k, v in cfg.items() if k not in ("out", "csv", "write_baseline")}
    echo = {"cli": cli_echo, "suite": summary["config"]}
    json_text = reports_to_json(reports, summary["suite"], summary["seed"], echo)
    csv_text = "# config " + json.dumps(echo, sort_keys=True, default=str) + "\n" + reports_to_csv(reports)
    out = cfg["out"]
    csv_path = cfg["csv"] or (os.path.splitext(out)[0] + ".csv" if out else None)
    if out:
        with open(out, "w") as fh:
            fh.write(json_text)
    else:
        sys.stdout.write(json_text)
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            fh.write(csv_text)
    if cfg["write_baseline"]:
        with open(cfg["write_baseline"], "w") as fh:
            json.dump({r.check_id: r.empirical_constant for r in reports if r.status == "ok"}, fh,
                      indent=2, sort_keys=True)
            fh.write("\n")
    for r in reports:
        flag = "PASS" if r.passed else "FAIL"
        print(f"{flag} {r.check_id} constant={r.empirical_constant!r} {r.status}", file=sys.stderr)
    if summary["hypothesis_violations"]:
        return 2
    return 0 if summary["passed"] else 1


def cmd_sweep(cfg):
    values = _floats(cfg["values"])
    if not values:
        raise ConfigError("--values is required")
    rows = ["param,value_of_param,x,operator_value"]
    for v in values:
        c = dict(cfg)
        c[cfg["param"]] = v
        kernel, ecfg = _kernel_and_cfg(c)
        fs = _functions(c["f"], ecfg.m, ecfg.n, int(c["cells"]), c["interp"])
        settings = _settings(c).with_grid(*_grid(c["grid"], ecfg.n))
        field = eval_field(c["op"], fs, kernel, ecfg, settings)
        for x, val in zip(settings.x_points(), field.values.ravel()):
            rows.append(f"{cfg['param']},{v!r},{';'.join(repr(float(t)) for t in x)},{float(val)!r}")
    text = "# config " + json.dumps(cfg, sort_keys=True, default=str) + "\n" + "\n".join(rows) + "\n"
    _emit(text, cfg["out"])
    return 0


COMMANDS = {
    "eval": cmd_eval,
    "norm": cmd_norm,
    "weight-check": cmd_weight_check,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def main(argv=None):
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        cfg = effective_config(ns.command, ns)
        return COMMANDS[ns.command](cfg)
    except (HypothesisViolation, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RoughFracError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
