"""Batch front end: ``wick-holder <command> --config PATH``.

The configuration is one JSON document.  Operators are eigenvalue lists or
the shorthand ``{"scalar": v}``; test functions are
``{"exponential": [xi...]}`` or ``{"polynomial": {"dim", "cap", "terms"}}``.
An optional ``"sweep"`` list of override objects runs the command once per
entry.  Exit status: 0 all checks passed, 1 a mathematical check failed,
2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .chaos import ChaosExpansion, ExponentialVector
from .errors import ConfigurationError, NoWitnessError, WickError
from .inequality import (
    HolderConfig,
    TOL_CLOSED,
    TOL_QUAD,
    binding_index,
    check_admissible,
    check_corollary,
    equivalent_condition,
    exp_log_ratio,
    holder_bound,
    jensen_identity_check,
    max_admissible_r,
    nelson_check,
    probe_exponent,
    sharpness_probe,
    verify_inequality,
)
from .operators import DiagonalOperator
from .quadrature import adaptive_lp_norm, gauss_hermite_rule, mc_lp_norm
from .representation import repr_check
from .serialization import dumps, format_float, to_plain

COMMANDS = ("check", "boundary", "verify", "probe", "repr", "norm", "jensen", "nelson", "corollary")

DEFAULTS = {
    "method": "auto",
    "quad_order": 40,
    "mc_samples": 200_000,
    "seed": 0,
    "u": [1.0, 2.0, 4.0],
    "l": [1.5, 2.0, 3.0, 4.0],
    "n_points": 20,
    "theta": 0.0,
}

DEFAULT_TOL = {"repr": 1e-8, "norm": 1e-8, "jensen": 1e-12}

OPERATOR_FIELDS = ("C", "D", "T", "B")
FUNCTION_FIELDS = ("phi", "psi")


# -- config parsing ----------------------------------------------------------------


def _field_error(name: str, msg: str) -> ConfigurationError:
    return ConfigurationError(f"field {name!r}: {msg}")


def _number(doc: dict, name: str) -> float:
    if name not in doc:
        raise _field_error(name, "missing")
    v = doc[name]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise _field_error(name, f"expected a number, got {v!r}")
    return float(v)


def _number_list(doc: dict, name: str) -> list:
    v = doc.get(name)
    if not isinstance(v, list) or not v:
        raise _field_error(name, f"expected a nonempty list of numbers, got {v!r}")
    if any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in v):
        raise _field_error(name, "entries must be numbers")
    return [float(x) for x in v]


def _infer_dim(doc: dict) -> int:
    if "dim" in doc:
        d = doc["dim"]
        if isinstance(d, bool) or not isinstance(d, int) or d < 1:
            raise _field_error("dim", f"expected a positive integer, got {d!r}")
        return d
    for name in OPERATOR_FIELDS:
        if isinstance(doc.get(name), list):
            return len(doc[name])
    for name in FUNCTION_FIELDS:
        entry = doc.get(name)
        if isinstance(entry, dict) and isinstance(entry.get("exponential"), list):
            return len(entry["exponential"])
        if isinstance(entry, dict) and isinstance(entry.get("polynomial"), dict) and "dim" in entry["polynomial"]:
            return int(entry["polynomial"]["dim"])
    raise _field_error("dim", "missing and cannot be inferred from any operator or function")


def _operator_eigs(doc: dict, name: str, dim: int) -> list:
    if name not in doc:
        raise _field_error(name, "missing")
    v = doc[name]
    if isinstance(v, dict):
        if set(v) != {"scalar"}:
            raise _field_error(name, f"operator objects must be {{'scalar': v}}, got keys {sorted(v)}")
        return [_number(v, "scalar")] * dim
    eigs = _number_list(doc, name)
    if len(eigs) != dim:
        raise _field_error(name, f"has {len(eigs)} eigenvalues, expected dim = {dim}")
    return eigs


def _function(doc: dict, name: str, dim: int):
    entry = doc.get(name)
    if not isinstance(entry, dict) or len(entry) != 1:
        raise _field_error(name, "expected {'exponential': [...]} or {'polynomial': {...}}")
    kind, body = next(iter(entry.items()))
    try:
        if kind == "exponential":
            f = ExponentialVector(tuple(_number_list(entry, "exponential")))
        elif kind == "polynomial":
            f = ChaosExpansion.from_dict(body)
        else:
            raise ConfigurationError(f"unknown function kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise _field_error(name, str(exc)) from None
    if f.dim != dim:
        raise _field_error(name, f"has dim {f.dim}, expected {dim}")
    return f


def _function_doc(f) -> dict:
    if isinstance(f, ExponentialVector):
        return {"exponential": list(f.xi)}
    return {"polynomial": f.to_dict()}


class Item:
    """One resolved configuration: the raw document plus typed accessors."""

    def __init__(self, doc: dict):
        self.doc = doc
        self.resolved: dict = {}
        self._dim = None

    @property
    def dim(self) -> int:
        if self._dim is None:
            self._dim = _infer_dim(self.doc)
            self.resolved["dim"] = self._dim
        return self._dim

    def number(self, name: str) -> float:
        v = _number(self.doc, name)
        self.resolved[name] = v
        return v

    def integer(self, name: str) -> int:
        v = self.doc.get(name)
        if isinstance(v, bool) or not isinstance(v, int):
            raise _field_error(name, f"expected an integer, got {v!r}")
        self.resolved[name] = v
        return v

    def numbers(self, name: str) -> list:
        v = _number_list(self.doc, name)
        self.resolved[name] = v
        return v

    def string(self, name: str, choices) -> str:
        v = self.doc.get(name)
        if v not in choices:
            raise _field_error(name, f"expected one of {list(choices)}, got {v!r}")
        self.resolved[name] = v
        return v

    def operator(self, name: str) -> DiagonalOperator:
        eigs = _operator_eigs(self.doc, name, self.dim)
        self.resolved[name] = eigs
        return DiagonalOperator(tuple(eigs))

    def function(self, name: str):
        f = _function(self.doc, name, self.dim)
        self.resolved[name] = _function_doc(f)
        return f

    def tol(self, default: float) -> float:
        if self.doc.get("tol") is None:
            self.resolved["tol"] = default
            return default
        return self.number("tol")

    def holder(self, with_b: bool = False) -> HolderConfig:
        p, q, r = self.number("p"), self.number("q"), self.number("r")
        ops = [self.operator(n) for n in ("C", "D", "T")]
        B = self.operator("B") if with_b else None
        return HolderConfig(p, q, r, *ops, B=B)


# -- commands ----------------------------------------------------------------------


def _cmd_check(it: Item, jobs: int):
    cfg = it.holder()
    tol = it.tol(TOL_CLOSED)
    rep = check_admissible(cfg, tol)
    eq = equivalent_condition(cfg, tol)
    main_hold = [r.passed for r in rep.by_condition("holder")]
    eq_hold = [r.passed for r in eq.by_condition("holder_equivalent")]
    agree = main_hold == eq_hold
    result = {
        "passed": rep.passed,
        "min_margin": rep.min_margin(),
        "forms_agree": agree,
        "records": rep.to_dict()["records"],
        "equivalent_records": eq.to_dict()["records"],
    }
    return result, 0 if rep.passed and agree else 1


def _cmd_boundary(it: Item, jobs: int):
    p, q = it.number("p"), it.number("q")
    C, D, T = (it.operator(n) for n in ("C", "D", "T"))
    HolderConfig(p, q, 2.0, C, D, T).validate_theorem()
    r_star = max_admissible_r(p, q, C, D, T)
    i = binding_index(p, q, C, D, T)
    result = {
        "r_star": r_star,
        "binding_index": i,
        "bounds": [holder_bound(p, q, a, b, t) for a, b, t in zip(C, D, T)],
    }
    if math.isfinite(r_star) and r_star > 1.0:
        quad = probe_exponent(p, q, r_star, C[i], D[i], T[i])
        result.update(sup_exponent_at_r_star=quad.f_star, vertex=quad.s_star, bounded=quad.bounded)
    return result, 0


def _norm_kwargs(it: Item, jobs: int, method: str) -> dict:
    kw = {}
    if method == "mc":
        kw = dict(samples=it.integer("mc_samples"), seed=it.integer("seed"), jobs=jobs)
    return kw


def _cmd_verify(it: Item, jobs: int):
    cfg = it.holder()
    phi, psi = it.function("phi"), it.function("psi")
    method = it.string("method", ("auto", "closed-form", "quadrature", "mc"))
    closed = isinstance(phi, ExponentialVector) and isinstance(psi, ExponentialVector) and method in ("auto", "closed-form")
    tol = it.tol(TOL_CLOSED if closed else TOL_QUAD)
    ratio = verify_inequality(cfg, phi, psi, method, tol, **_norm_kwargs(it, jobs, method))
    result = {"ratio": ratio, "passed": ratio <= 1.0 + tol}
    if closed:
        result["log_ratio"] = exp_log_ratio(cfg, phi, psi)
    return result, 0 if result["passed"] else 1


def _cmd_probe(it: Item, jobs: int):
    cfg = HolderConfig(it.number("p"), it.number("q"), it.number("r"), *(it.operator(n) for n in ("C", "D", "T")))
    u = it.numbers("u")
    res = sharpness_probe(cfg, u, it.tol(TOL_CLOSED))
    return res.to_dict(), 0


def _cmd_repr(it: Item, jobs: int):
    C, D, T = (it.operator(n) for n in ("C", "D", "T"))
    phi, psi = it.function("phi"), it.function("psi")
    order = it.integer("quad_order")
    theta = it.number("theta")
    tol = it.tol(DEFAULT_TOL["repr"])
    if "points" in it.doc:
        pts = np.array(it.doc["points"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] != it.dim:
            raise _field_error("points", f"expected a list of length-{it.dim} vectors")
    else:
        n = it.integer("n_points")
        pts = np.random.default_rng(it.integer("seed")).standard_normal((n, it.dim))
    it.resolved["points"] = pts.tolist()
    dev = repr_check(phi, psi, C, D, T, pts, gauss_hermite_rule(order), theta)
    return {"max_deviation": dev, "passed": dev <= tol}, 0 if dev <= tol else 1


def _cmd_norm(it: Item, jobs: int):
    phi = it.function("phi")
    ls = it.numbers("l")
    samples, seed = it.integer("mc_samples"), it.integer("seed")
    tol = it.tol(DEFAULT_TOL["norm"])
    rows, ok = [], True
    for l in ls:
        row = {"l": l}
        if isinstance(phi, ExponentialVector):
            row["closed_form"] = phi.lp_norm(l)
        quad = adaptive_lp_norm(phi, l, phi.dim)
        row.update(quadrature=quad.value, quadrature_order=quad.order, quadrature_converged=quad.converged)
        est, se = mc_lp_norm(phi, l, samples, seed, d=phi.dim, jobs=jobs)
        row.update(mc=est, mc_stderr=se)
        ref = row.get("closed_form", quad.value)
        quad_ok = "closed_form" not in row or abs(quad.value - ref) <= tol * abs(ref)
        mc_ok = abs(est - ref) <= 4.0 * se if se > 0 else abs(est - ref) <= tol * abs(ref)
        row.update(quadrature_agrees=quad_ok, mc_agrees=mc_ok)
        ok = ok and quad_ok and mc_ok
        rows.append(row)
    return {"norms": rows, "passed": ok}, 0 if ok else 1


def _cmd_jensen(it: Item, jobs: int):
    p, q = it.number("p"), it.number("q")
    if all(k in it.doc for k in ("alpha", "beta", "t")):
        a, b, t = it.number("alpha"), it.number("beta"), it.number("t")
    else:
        C, D, T = (it.operator(n) for n in ("C", "D", "T"))
        if it.dim != 1:
            raise _field_error("dim", "jensen works on one eigen-coordinate; give alpha, beta, t or dim 1")
        a, b, t = C[0], D[0], T[0]
    tol = it.tol(DEFAULT_TOL["jensen"])
    rep = jensen_identity_check(p, q, a, b, t)
    ok = rep.passed(tol)
    out = rep.to_dict()
    out["max_residual"] = rep.max_residual
    out["passed"] = ok
    return out, 0 if ok else 1


def _cmd_nelson(it: Item, jobs: int):
    p, r = it.number("p"), it.number("r")
    C = it.operator("C")
    phi = it.function("phi")
    method = it.string("method", ("auto", "closed-form", "quadrature", "mc"))
    closed = isinstance(phi, ExponentialVector) and method in ("auto", "closed-form")
    tol = it.tol(TOL_CLOSED if closed else TOL_QUAD)
    ratio = nelson_check(p, r, C, phi, method, tol, **_norm_kwargs(it, jobs, method))
    ok = ratio <= 1.0 + tol
    return {"ratio": ratio, "threshold": math.sqrt((r - 1.0) / (p - 1.0)), "passed": ok}, 0 if ok else 1


def _cmd_corollary(it: Item, jobs: int):
    cfg = it.holder(with_b=True)
    rep = check_corollary(cfg, it.tol(TOL_CLOSED))
    ok = rep.passed and rep.consistent
    return rep.to_dict(), 0 if ok else 1


HANDLERS = {
    "check": _cmd_check,
    "boundary": _cmd_boundary,
    "verify": _cmd_verify,
    "probe": _cmd_probe,
    "repr": _cmd_repr,
    "norm": _cmd_norm,
    "jensen": _cmd_jensen,
    "nelson": _cmd_nelson,
    "corollary": _cmd_corollary,
}


# -- driver ------------------------------------------------------------------------------


def _run_item(command: str, doc: dict, jobs: int) -> dict:
    it = Item(doc)
    try:
        result, status = HANDLERS[command](it, jobs)
    except NoWitnessError as exc:
        return {"config": it.resolved, "status": 2, "error": f"no witness: {exc}"}
    except (WickError, ValueError) as exc:
        return {"config": it.resolved, "status": 2, "error": str(exc)}
    for key in ("method", "quad_order", "mc_samples", "seed"):
        if key in doc and key not in it.resolved:
            it.resolved[key] = doc[key]
    return {"config": dict(sorted(it.resolved.items())), "status": status, "result": result}


def run(command: str, doc: dict, *, seed=None, tol=None, quad_order=None, jobs: int = 1):
    """Run ``command`` on a parsed configuration document.

    Returns ``(status, report)``; the report lists one entry per sweep item
    in input order, each embedding its fully resolved configuration.
    """
    if command not in HANDLERS:
        raise ConfigurationError(f"unknown command {command!r}")
    if not isinstance(doc, dict):
        raise ConfigurationError("the configuration document must be a JSON object")
    base = {**DEFAULTS, **{k: v for k, v in doc.items() if k != "sweep"}}
    sweep = doc.get("sweep", [{}])
    if not isinstance(sweep, list) or not all(isinstance(s, dict) for s in sweep):
        raise _field_error("sweep", "expected a list of override objects")
    flags = {"seed": seed, "tol": tol, "quad_order": quad_order}
    items = []
    for override in sweep:
        item = {**base, **override}
        item.update({k: v for k, v in flags.items() if v is not None})
        items.append(item)
    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda d: _run_item(command, d, jobs), items))
    else:
        results = [_run_item(command, d, jobs) for d in items]
    status = max(r["status"] for r in results)
    report = {"tool": "wick-holder", "version": __version__, "command": command, "status": status, "items": results}
    return status, report


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def _flatten(prefix: str, obj, out: list) -> None:
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(obj, list) and obj and all(isinstance(v, dict) for v in obj):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, out)
    elif isinstance(obj, list):
        out.append((prefix, " ".join(_csv_cell(v) for v in obj)))
    else:
        out.append((prefix, _csv_cell(obj)))


RECORD_FIELDS = ("index", "condition", "alpha", "beta", "t", "lhs", "rhs", "margin", "passed")


def to_csv(report: dict) -> str:
    """Per-eigenvalue records as rows when present, otherwise flattened key/value rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    plain = to_plain(report)
    has_records = any("records" in (it.get("result") or {}) for it in plain["items"])
    if has_records:
        w.writerow(("item", "group") + RECORD_FIELDS)
        for n, it in enumerate(plain["items"]):
            res = it.get("result") or {}
            groups = [("main", res.get("records", []))]
            if "equivalent_records" in res:
                groups.append(("equivalent", res["equivalent_records"]))
            if "mapped" in res:
                groups.append(("mapped", res["mapped"]["records"]))
            for g, recs in groups:
                for rec in recs:
                    w.writerow([n, g] + [_csv_cell(rec[f]) for f in RECORD_FIELDS])
    else:
        w.writerow(("item", "key", "value"))
        for n, it in enumerate(plain["items"]):
            rows: list = []
            _flatten("", {k: v for k, v in it.items() if k != "config"}, rows)
            for k, v in rows:
                w.writerow((n, k, v))
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wick-holder", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON configuration document")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--seed", type=int, default=None, help="overrides the document's seed")
    parser.add_argument("--tol", type=float, default=None, help="overrides the default tolerance")
    parser.add_argument("--quad-order", type=int, default=None, help="Gauss-Hermite order for repr")
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker threads")
    parser.add_argument("-o", "--output", default=None, help="write the report here instead of stdout")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        print(f"wick-holder: error: cannot read config: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"wick-holder: error: {args.config}:{exc.lineno}:{exc.colno}: {exc.msg}", file=sys.stderr)
        return 2
    if args.jobs < 1:
        print("wick-holder: error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        status, report = run(args.command, doc, seed=args.seed, tol=args.tol, quad_order=args.quad_order, jobs=args.jobs)
    except ConfigurationError as exc:
        print(f"wick-holder: error: {exc}", file=sys.stderr)
        return 2
    for n, item in enumerate(report["items"]):
        if "error" in item:
            print(f"wick-holder: item {n}: {item['error']}", file=sys.stderr)
    text = dumps(report) if args.format == "json" else to_csv(report)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
