"""Experiment configuration: a JSON document describing one reproducible run.

Shape:

    {
      "profile": {"curves": [{"triangle": {"q": 1.0, "r": 1.0}},
                             {"equal_revenue": 1.0},
                             {"point_mass": 2.0},
                             {"piecewise": [[0,0],[0.5,0.5],[1,0.25]]}],
                  "names": ["a", "b", "c", "d"]},
      "mechanism": "spa",
      "mechanism_params": {"prices": [1.0, 0.5]},
      "plan": {"mode": "all_once", "pair_constrained": true},
      "constants": {"alpha": 0.27, "beta": 0.4, "gamma": 0.2,
                    "delta": 0.1, "eps": 0.0, "k": 1},
      "checks": ["single"],
      "sampling": {"n_samples": 100000, "seed": 7, "estimator": "plain"},
      "output": {"path": "report.json", "format": "json"}
    }

Everything but "profile" is optional.  Constants named by "checks" are
validated against their formula hypotheses at parse time, so a run can
never spend samples before discovering its constants are out of range.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

from . import analysis, curves as cv
from .duplication import DuplicatePlan, extend_profile
from .errors import ConcavityViolation, ParseError
from .exante import solve_exante
from .mechanisms import NO_CONSTRAINT
from .simulate import estimate_revenue, mechanism_names

BOUND_FUNCS = {
    "single": lambda c: analysis.bound_single(c["alpha"], c["beta"]),
    "single-noisy": lambda c: analysis.bound_single_noisy(c["alpha"], c["beta"], c["eps"]),
    "sample": lambda c: analysis.bound_sample(c["alpha"], c["beta"], c["gamma"]),
    "k-free": lambda c: analysis.bound_k_free(c["beta"], c["gamma"], c["delta"]),
    "k-free-remark": lambda c: analysis.bound_k_free_remark(c["beta"], c["gamma"], c["delta"]),
    "k-constrained": lambda c: analysis.bound_k_constrained(c["beta"], c["gamma"], c["delta"]),
    "k-noisy": lambda c: analysis.bound_k_noisy(c["beta"], c["gamma"], c["delta"], c["eps"]),
    "warmup": lambda c: analysis.warmup_constant(),
}

_PLAN_MODES = {"single_of", "k_copies_of", "set_once", "all_once"}


@dataclass(frozen=True)
class ExperimentConfig:
    profile: cv.BidderProfile
    mechanism: str
    mechanism_params: dict
    plan: DuplicatePlan | None
    constants: dict
    checks: tuple
    n_samples: int
    seed: int
    estimator: str
    output_path: str | None
    output_format: str
    raw: dict


def _fail(field: str, why: str):
    raise ParseError(f"config field {field!r}: {why}")


def _curve_from_spec(spec, pos: int, name: str) -> cv.RevenueCurve:
    field = f"profile.curves[{pos}]"
    if not isinstance(spec, dict) or len(spec) != 1:
        _fail(field, "expected exactly one of triangle/piecewise/point_mass/equal_revenue")
    kind, body = next(iter(spec.items()))
    try:
        if kind == "triangle":
            return cv.make_triangle(float(body["q"]), float(body["r"]))
        if kind == "piecewise":
            return cv.make_piecewise([(float(q), float(r)) for q, r in body])
        if kind == "point_mass":
            return cv.make_point_mass(float(body))
        if kind == "equal_revenue":
            return cv.make_equal_revenue(float(body))
    except ConcavityViolation as exc:
        raise ConcavityViolation(f"curve {name!r}: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        _fail(field, f"bad {kind} body: {exc}")
    _fail(field, f"unknown curve kind {kind!r}")


def parse_config(text: str) -> ExperimentConfig:
    """Validated config from JSON text; every curve is constructed eagerly."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: line {exc.lineno} column {exc.colno}: {exc.msg}")
    if not isinstance(raw, dict):
        raise ParseError("top level must be an object")
    known = {
        "profile", "mechanism", "mechanism_params", "plan",
        "constants", "checks", "sampling", "output",
    }
    for key in raw:
        if key not in known:
            _fail(key, "unknown field")

    prof_spec = raw.get("profile")
    if not isinstance(prof_spec, dict) or "curves" not in prof_spec:
        _fail("profile", "must be an object with a 'curves' list")
    names = prof_spec.get("names")
    curve_specs = prof_spec["curves"]
    if not isinstance(curve_specs, list) or not curve_specs:
        _fail("profile.curves", "must be a nonempty list")
    if names is not None and len(names) != len(curve_specs):
        _fail("profile.names", "length must match curves")
    curves = [
        _curve_from_spec(spec, i, names[i] if names else f"#{i}")
        for i, spec in enumerate(curve_specs)
    ]
    profile = cv.make_profile(curves, tuple(names) if names else None)

    mech = raw.get("mechanism", "spa")
    if mech not in mechanism_names():
        _fail("mechanism", f"unknown mechanism {mech!r}; use one of {mechanism_names()}")

    plan = None
    if "plan" in raw:
        p = raw["plan"]
        mode = p.get("mode")
        if mode not in _PLAN_MODES:
            _fail("plan.mode", f"must be one of {sorted(_PLAN_MODES)}")
        plan = DuplicatePlan(
            mode,
            index=int(p.get("index", 0)),
            copies=int(p.get("copies", 1)),
            indices=tuple(p.get("indices", ())),
            pair_constrained=bool(p.get("pair_constrained", False)),
        )

    constants = dict(raw.get("constants", {}))
    checks = tuple(raw.get("checks", ()))
    for name in checks:
        if name not in BOUND_FUNCS:
            _fail("checks", f"unknown bound {name!r}; use one of {sorted(BOUND_FUNCS)}")
        try:
            BOUND_FUNCS[name](constants)  # hypothesis gate, before any sampling
        except KeyError as exc:
            _fail("constants", f"bound {name!r} needs constant {exc}")

    sampling = raw.get("sampling", {})
    n_samples = int(sampling.get("n_samples", 100_000))
    seed = int(sampling.get("seed", 0))
    estimator = sampling.get("estimator", "")
    if n_samples < 1:
        _fail("sampling.n_samples", "must be >= 1")

    output = raw.get("output", {})
    out_path = output.get("path")
    out_format = output.get("format", "json")
    if out_format not in ("json", "csv"):
        _fail("output.format", "must be 'json' or 'csv'")

    return ExperimentConfig(
        profile=profile,
        mechanism=mech,
        mechanism_params=dict(raw.get("mechanism_params", {})),
        plan=plan,
        constants=constants,
        checks=checks,
        n_samples=n_samples,
        seed=seed,
        estimator=estimator,
        output_path=out_path,
        output_format=out_format,
        raw=raw,
    )


def normalize(text_or_raw) -> str:
    """Canonical JSON: sorted keys, fixed separators."""
    raw = json.loads(text_or_raw) if isinstance(text_or_raw, str) else text_or_raw
    return json.dumps(raw, sort_keys=True, separators=(",", ":"))


def emit_config(config: ExperimentConfig) -> str:
    return normalize(config.raw)


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(emit_config(config).encode()).hexdigest()[:16]


def run_experiment(config: ExperimentConfig, workers: int = 0):
    """Estimate revenue, evaluate configured bound checks, build the report.

    Returns (report dict, exit_code): 0 when every check passes, 1 otherwise.
    A check passes when estimate >= ratio * exante_opt - 4 * stderr.
    """
    k = int(config.constants.get("k", 1))
    base = config.profile
    exante = solve_exante(base, k=k)
    profile, constraint = base, NO_CONSTRAINT
    if config.plan is not None:
        profile, constraint = extend_profile(base, config.plan)
    params = dict(config.mechanism_params)
    if config.mechanism in ("vcg", "vcg_constrained"):
        params.setdefault("k", k)
    est = estimate_revenue(
        profile,
        constraint,
        config.mechanism,
        config.n_samples,
        config.seed,
        config.estimator,
        workers,
        **params,
    )
    check_rows = []
    all_pass = True
    for name in config.checks:
        ratio = BOUND_FUNCS[name](config.constants)
        target = ratio * exante.opt
        passed = bool(est.mean >= target - 4.0 * est.stderr)
        all_pass &= passed
        check_rows.append(
            {"bound": name, "ratio": ratio, "target": target, "passed": passed}
        )
    report = {
        "config_hash": config_hash(config),
        "seed": config.seed,
        "mechanism": config.mechanism,
        "exante_opt": exante.opt,
        "exante_quantiles": list(exante.quantiles),
        "estimate": {
            "mean": est.mean,
            "stderr": est.stderr,
            "n_samples": est.n_samples,
            "estimator": est.estimator,
            "blocks": est.blocks,
        },
        "checks": check_rows,
    }
    return report, (0 if all_pass else 1)


def report_to_csv(report: dict) -> str:
    """Flat key,value rows; checks expand to one row per bound."""
    lines = ["key,value"]

    def emit(prefix: str, obj):
        if isinstance(obj, dict):
            for key, val in obj.items():
                emit(f"{prefix}.{key}" if prefix else str(key), val)
        elif isinstance(obj, list):
            for i, val in enumerate(obj):
                emit(f"{prefix}[{i}]", val)
        else:
            val = obj
            if isinstance(val, float) and not math.isfinite(val):
                val = repr(val)
            lines.append(f"{prefix},{val}")

    emit("", report)
    return "\n".join(lines) + "\n"
