"""Batch front end: ``levywh price --config job.json --out results/``.

A job file names a model, the market, a list of products with their grids,
optional numerical settings and optional validation tasks.  See README.md for
the schema.  Exit status is 0 only if every grid point was priced.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .analysis import min_abscissa
from .errors import (ConfigError, LevyWHError, ParameterDomain, ParseError, SchemaError,
                     SemanticError, StripViolation)
from .inversion import ContourConfig, working_M
from .models import Family, model_from_dict, moment_strip, path_properties
from .oracle import McConfig, mc_price, simulate_terminal_and_extrema
from .pricing import (DigitalDown, EdsSchedule, FourierConfig, LookbackCall, LookbackPut,
                      OneTouchUp, PricingRequest, default_R, price)
from .wienerhopf import wh_identity_residual

log = logging.getLogger("levywh")

PRODUCTS = {
    "lookback_call": ("K", "strikes", LookbackCall),
    "lookback_put": ("K", "strikes", LookbackPut),
    "one_touch_up": ("B", "barriers", OneTouchUp),
    "digital_down": ("B", "barriers", DigitalDown),
}
CSV_HEADER = "product,grid_param,grid_value,price,numerical_error"


# schema checks ---------------------------------------------------------------


def _need(obj, key, path, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"missing required field '{key}'", f"{path}.{key}" if path else key)
    val = obj[key]
    if kind is not None and not _is(val, kind):
        raise SchemaError(f"expected {kind}", f"{path}.{key}" if path else key)
    return val


def _is(val, kind):
    if kind == "number":
        return isinstance(val, (int, float)) and not isinstance(val, bool) and math.isfinite(val)
    if kind == "object":
        return isinstance(val, dict)
    if kind == "array":
        return isinstance(val, list)
    if kind == "string":
        return isinstance(val, str)
    if kind == "bool":
        return isinstance(val, bool)
    raise AssertionError(kind)


def _numbers(val, path, positive=True):
    if not isinstance(val, list) or not val:
        raise SchemaError("expected a nonempty array of numbers", path)
    for i, x in enumerate(val):
        if not _is(x, "number") or (positive and x <= 0):
            raise SchemaError("expected a positive number", f"{path}[{i}]")
    return [float(x) for x in val]


def _opt(obj, key, path, kind, default=None):
    if key not in obj or obj[key] is None:
        return default
    if not _is(obj[key], kind):
        raise SchemaError(f"expected {kind}", f"{path}.{key}")
    return obj[key]


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc.strerror}", str(path)) from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", str(path)) from exc
    if not isinstance(cfg, dict):
        raise SchemaError("top level must be an object", "$")
    return cfg


class Job:
    """A checked job: model, market, products and numerics."""

    def __init__(self, cfg: dict):
        self.raw = cfg
        m = _need(cfg, "model", "", "object")
        fam = _need(m, "family", "model", "string")
        try:
            Family.parse(fam)
        except ValueError as exc:
            raise SchemaError(str(exc), "model.family") from exc
        _need(m, "params", "model", "object")
        drift = m.get("drift", "auto")
        if not (drift == "auto" or _is(drift, "number")):
            raise SchemaError("expected \"auto\" or a number", "model.drift")
        try:
            self.model = model_from_dict(m)
        except ParameterDomain as exc:
            raise SemanticError(str(exc), "model.params") from exc
        except StripViolation as exc:
            raise SemanticError(str(exc), "model.drift") from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(str(exc), "model.params") from exc

        mk = _need(cfg, "market", "", "object")
        self.S0 = float(_need(mk, "S0", "market", "number"))
        self.r = float(_opt(mk, "r", "market", "number", 0.0))
        if self.S0 <= 0:
            raise SemanticError("S0 must be positive", "market.S0")
        if self.r < 0:
            raise SemanticError("r must be nonnegative", "market.r")

        num = _opt(cfg, "numerics", "", "object", {})
        c = _opt(num, "contour", "numerics", "object", {})
        try:
            self.contour = ContourConfig(
                Y=_opt(c, "Y", "numerics.contour", "number"),
                A=_opt(c, "A", "numerics.contour", "number"),
                n_nodes=int(_opt(c, "n_nodes", "numerics.contour", "number", 512)),
                tol=float(_opt(c, "tol", "numerics.contour", "number", 1e-6)),
                refinement=_opt(c, "refinement", "numerics.contour", "string", "fixed"),
            )
        except ValueError as exc:
            raise SchemaError(str(exc), "numerics.contour") from exc
        f = _opt(num, "fourier", "numerics", "object", {})
        self.fourier = FourierConfig(
            u_max=float(_opt(f, "u_max", "numerics.fourier", "number", 200.0)),
            width=_opt(f, "width", "numerics.fourier", "number"),
        )

        self.products = []
        prods = _opt(cfg, "products", "", "array", [])
        for i, p in enumerate(prods):
            self.products.append(self._product(p, f"products[{i}]"))

        val = _opt(cfg, "validation", "", "object", {})
        self.wh_identity = bool(_opt(val, "wh_identity", "validation", "bool", False))
        mc = _opt(val, "oracle_mc", "validation", "object")
        self.mc = None
        if mc is not None:
            try:
                self.mc = McConfig(int(_need(mc, "n_paths", "validation.oracle_mc", "number")),
                                   int(_need(mc, "n_steps", "validation.oracle_mc", "number")),
                                   int(_opt(mc, "seed", "validation.oracle_mc", "number", 20240601)),
                                   bool(_opt(mc, "antithetic", "validation.oracle_mc", "bool", False)))
            except ValueError as exc:
                raise SchemaError(str(exc), "validation.oracle_mc") from exc
        if not self.products and not self.wh_identity:
            raise SchemaError("at least one product or validation task is required", "products")
        self.output_dir = _opt(cfg, "output_dir", "", "string")

    def _product(self, p, path):
        kind = _need(p, "type", path, "string")
        if kind == "eds":
            dates = _numbers(_need(p, "premium_dates", path), f"{path}.premium_dates")
            if any(b <= a for a, b in zip(dates, dates[1:])):
                raise SemanticError("premium dates must be strictly ascending", f"{path}.premium_dates")
            B = float(_need(p, "barrier", path, "number"))
            C = float(_need(p, "recovery", path, "number"))
            rate = float(_opt(p, "rate", path, "number", self.r))
            if B >= self.S0:
                raise SemanticError("barrier must lie below S0 (default at inception)", f"{path}.barrier")
            if C < 0 or rate < 0 or B <= 0:
                raise SemanticError("barrier must be positive, recovery and rate nonnegative", path)
            if not path_properties(self.model.dual()).atomless_sup:
                raise SemanticError("first-passage probabilities need an atomless infimum "
                                    "(infinite variation, or infinite activity and regular downwards)", f"{path}.type")
            return {"type": kind, "schedule": EdsSchedule(tuple(dates), B, C, rate), "path": path}
        if kind not in PRODUCTS:
            raise SchemaError(f"unknown product type {kind!r}", f"{path}.type")
        param, grid_key, cls = PRODUCTS[kind]
        T = float(_need(p, "T", path, "number"))
        if T <= 0:
            raise SemanticError("T must be positive", f"{path}.T")
        grid = _numbers(_need(p, grid_key, path), f"{path}.{grid_key}")
        R = _opt(p, "R", path, "number")
        flags = path_properties(self.model)
        if kind == "one_touch_up" and not flags.atomless_sup:
            raise SemanticError("one-touch pricing needs an atomless supremum: the model must have "
                                "infinite variation, or infinite activity and be regular upwards", f"{path}.type")
        if kind == "digital_down" and not path_properties(self.model.dual()).atomless_sup:
            raise SemanticError("digital pricing needs an atomless infimum: the model must have "
                                "infinite variation, or infinite activity and be regular downwards", f"{path}.type")
        m_safe = moment_strip(self.model).M_safe
        if kind == "lookback_call" and m_safe <= 1:
            raise SemanticError("lookback call needs exponential moments above order 1", f"{path}.type")
        R_eff = R if R is not None else default_R(cls(1.0), self.model)
        lo, hi = {"lookback_call": (1.0, m_safe), "lookback_put": (-m_safe, 0.0),
                  "one_touch_up": (0.0, m_safe), "digital_down": (-m_safe, 0.0)}[kind]
        if not lo < R_eff < hi:
            raise SemanticError(f"dampening R={R_eff:g} must lie in ({lo:g}, {hi:g})", f"{path}.R")
        if self.contour.Y is not None:
            side_model = self.model if kind in ("lookback_call", "one_touch_up") else self.model.dual()
            M = working_M(side_model, [-R_eff if kind in ("lookback_call", "one_touch_up") else R_eff])
            a = min_abscissa(side_model, M)
            if self.contour.Y <= a:
                raise SemanticError(f"Y must exceed alpha*(M)={a:.6g}", "numerics.contour.Y")
        return {"type": kind, "param": param, "grid": grid, "cls": cls, "T": T, "R": R, "path": path}

    def tasks(self):
        for p in self.products:
            if p["type"] == "eds":
                yield p, "B", p["schedule"].barrier_B
            else:
                for x in p["grid"]:
                    yield p, p["param"], x

    def request(self, p, x):
        if p["type"] == "eds":
            last = p["schedule"].premium_dates[-1]
            return PricingRequest(self.model, self.S0, last, p["schedule"], contour=self.contour,
                                  fourier=self.fourier)
        return PricingRequest(self.model, self.S0, p["T"], p["cls"](x), R=p["R"], contour=self.contour,
                              discount_r=self.r, fourier=self.fourier)


def validate(config_path) -> Job:
    return Job(load_config(config_path))


# output ----------------------------------------------------------------------


def fmt(x) -> str:
    """17 significant digits; non-finite values become empty fields / null."""
    x = float(x)
    if not math.isfinite(x):
        return ""
    return format(x, ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _Num(float(obj))
    if isinstance(obj, complex):
        return {"re": _Num(obj.real), "im": _Num(obj.imag)}
    return obj if obj is None or isinstance(obj, str) else str(obj)


class _Num:
    __slots__ = ("x",)

    def __init__(self, x):
        self.x = x


def dumps(obj) -> str:
    """json.dumps with floats written at 17 significant digits."""
    marks = []

    def default(o):
        if isinstance(o, _Num):
            marks.append(fmt(o.x) or "null")
            return f"\x00{len(marks) - 1}\x00"
        raise TypeError(type(o).__name__)

    text = json.dumps(_jsonable(obj), default=default, indent=2, sort_keys=False)
    for i, m in enumerate(marks):
        text = text.replace(f'"\\u0000{i}\\u0000"', m, 1)
    return text + "\n"


def _price_point(job: Job, p, param, x):
    t0 = time.perf_counter()
    try:
        res = price(job.request(p, x))
        row = {"product": p["type"], "grid_param": param, "grid_value": x, "price": res.price,
               "numerical_error": res.numerical_error, "diagnostics": res.diagnostics, "error": None}
    except (LevyWHError, ValueError, ArithmeticError) as exc:
        row = {"product": p["type"], "grid_param": param, "grid_value": x, "price": math.nan,
               "numerical_error": math.nan, "diagnostics": {}, "error": f"{type(exc).__name__}: {exc}"}
    row["seconds"] = time.perf_counter() - t0
    return row


def run(config_path, out_dir, threads: int = 1) -> int:
    job = validate(config_path)
    out = Path(out_dir or job.output_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    tasks = list(job.tasks())
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda a: _price_point(job, *a), tasks))
    else:
        rows = [_price_point(job, *a) for a in tasks]
    for row in rows:
        log.info("%s %s=%s -> %s", row["product"], row["grid_param"], row["grid_value"],
                 row["error"] or fmt(row["price"]))

    validation = {}
    if job.wh_identity:
        m = job.model
        M = moment_strip(m).M_safe
        q = min_abscissa(m, M) + 1.0
        z = np.linspace(-20.0, 20.0, 41)
        try:
            validation["wh_identity"] = {"model": str(m), "M": M, "q": q,
                                         "residual": wh_identity_residual(m, q, z, M)}
        except LevyWHError as exc:
            validation["wh_identity"] = {"model": str(m), "error": f"{type(exc).__name__}: {exc}"}
    if job.mc is not None and job.products:
        validation["oracle_mc"] = _mc_validation(job)

    timings = {"total_seconds": time.perf_counter() - started,
               "points": [r.pop("seconds") for r in rows]}
    results = {"results": rows, "validation": validation}
    (out / "results.json").write_text(dumps(results))
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([r["product"], r["grid_param"], fmt(r["grid_value"]), fmt(r["price"]),
                               fmt(r["numerical_error"])]))
    (out / "curves.csv").write_text("\n".join(lines) + "\n")
    canonical = json.dumps(job.raw, sort_keys=True, separators=(",", ":"))
    meta = {"config_sha256": hashlib.sha256(canonical.encode()).hexdigest(),
            "versions": {"levywh": __version__, "python": platform.python_version(),
                         "numpy": np.__version__, "scipy": scipy.__version__},
            "threads": threads, "timings": timings}
    (out / "run_meta.json").write_text(dumps(meta))
    failed = sum(r["error"] is not None for r in rows)
    return 0 if failed == 0 else 1


def _mc_validation(job: Job):
    out = []
    by_T = {}
    for p in job.products:
        if p["type"] == "eds":
            continue
        by_T.setdefault(p["T"], []).append(p)
    for T, prods in by_T.items():
        samples = simulate_terminal_and_extrema(job.model, T, job.mc)
        for p in prods:
            for x in p["grid"]:
                est = mc_price(samples, p["cls"](x), math.exp(-job.r * T), job.S0)
                out.append({"product": p["type"], "grid_param": p["param"], "grid_value": x,
                            "mc_value": est.value, "std_error": est.std_error, "bias_note": est.bias_note})
    return out


# entry point -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="levywh", description="Wiener-Hopf pricing of extremum-dependent options")
    sub = ap.add_subparsers(dest="command", required=True)
    pp = sub.add_parser("price", help="price every product grid point in a job file")
    pp.add_argument("--config", required=True)
    pp.add_argument("--out", required=True, help="output directory")
    pp.add_argument("--threads", type=int, default=1)
    pp.add_argument("--verbose", action="store_true")
    vp = sub.add_parser("validate", help="check a job file without pricing")
    vp.add_argument("--config", required=True)
    vp.add_argument("--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "validate":
            job = validate(args.config)
            n = sum(1 for _ in job.tasks())
            print(f"ok: {job.model}, {len(job.products)} product(s), {n} grid point(s)")
            return 0
        if args.threads < 1:
            print("error: --threads must be at least 1", file=sys.stderr)
            return 2
        return run(args.config, args.out, args.threads)
    except ConfigError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
