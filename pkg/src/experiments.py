#!/usr/bin/env python3
"""
ABOUTME: Command-line experiment harness for the log-concave estimation laboratory
ABOUTME: Seeded subcommands write CSV tables, a JSON record with the config echo and optional SVG plots
"""

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from densities import density_from_spec
from estimator import CandidateClass, guarantee_harness, select
from geometry import ConvexBody, inscribed_polytope, volume_deficit
from lab_config import (
    APPROX_RUN_C_H,
    DEFAULT_C_L,
    DEFAULT_INTEGRAL_BUDGET,
    DEFAULT_MC_BUDGET,
    DEFAULT_SAMPLE_CONSTANT,
    LAB_VERSION,
    status_emoji,
)
from lab_errors import ConfigError, LabError
from lab_utils import (
    format_csv,
    loglog_fit,
    render_svg,
    run_ordered,
    spawn_seeds,
    to_json_text,
    write_text,
)
from metrics import EmpiricalDistribution, tv_distance
from structure import (
    ApproxConfig,
    approximation_error,
    build_approximation,
    domination_violations,
    integral_of_g,
    tail_mass,
    volume_sandwich_check,
)
from vclab import (
    SetFamilyHandle,
    difference_family,
    growth_count,
    toy_piecewise_grid,
    vc_dimension_bound,
    vc_estimate,
    vc_rate_experiment,
)


logger = logging.getLogger(__name__)

SUBCOMMANDS = ("polytope-rate", "approx", "estimate", "vc", "rate")

GAUSSIAN_2D = {"family": "gaussian", "dimension": 2, "params": {"mean": [0.0, 0.0]}}
UNIFORM_UNIT = {
    "family": "uniform-convex",
    "dimension": 1,
    "params": {"body": "box", "lo": [0.0], "hi": [1.0]},
}


def _gaussian_1d(mean: float, sigma: float = 1.0) -> dict:
    return {"family": "gaussian", "dimension": 1, "params": {"mean": [mean], "sigma": [sigma]}}


# Parameters used when a config file leaves them out
DEFAULT_PARAMS: dict[str, dict[str, Any]] = {
    "polytope-rate": {"body": "disk", "m_grid": [8, 16, 32, 64, 128], "mc_samples": 1_000_000},
    "approx": {
        "density": GAUSSIAN_2D,
        "epsilons": [0.4, 0.2, 0.1],
        "c_L": DEFAULT_C_L,
        "c_H": APPROX_RUN_C_H,
        "mc_budget": DEFAULT_MC_BUDGET,
        "distance_budget": 400_000,
        "sandwich_points": 10,
        "domination_points": 100_000,
    },
    "estimate": {
        "truth": _gaussian_1d(0.0),
        "candidates": [_gaussian_1d(m) for m in (-1.0, -0.5, 0.0, 0.5, 1.0)],
        "epsilon": 0.1,
        "trials": 100,
        "V": 2,
        "c": DEFAULT_SAMPLE_CONSTANT,
        "integral_budget": DEFAULT_INTEGRAL_BUDGET,
    },
    "vc": {
        "families": [{"kind": "intervals-1d"}, {"kind": "halfspaces", "dimension": 2}],
        "rate": {"density": UNIFORM_UNIT, "n_grid": [100, 1_000, 10_000, 100_000], "reps": 50},
        "growth": {"d": 1, "L": 1, "H": 1, "points": [0.1, 0.3, 0.6, 0.9]},
        "bound_epsilon": 0.1,
    },
    "rate": {
        "truth": _gaussian_1d(0.0),
        "candidates": [_gaussian_1d(m) for m in (-0.6, -0.3, 0.0, 0.3, 0.6)],
        "epsilon": 0.1,
        "n_grid": [50, 200, 800, 3_200],
        "reps": 20,
        "integral_budget": DEFAULT_INTEGRAL_BUDGET,
    },
}


def _as_int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not (
        isinstance(value, int) or (isinstance(value, float) and value.is_integer())
    ):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    return int(value)


def _at_least(minimum: int):
    def convert(value: Any, name: str) -> int:
        number = _as_int(value, name)
        if number < minimum:
            raise ConfigError(f"{name} must be at least {minimum}, got {number}")
        return number

    return convert


_as_count = _at_least(1)


def _as_float(value: Any, name: str) -> float:
    if not isinstance(value, bool) and isinstance(value, int | float):
        try:
            number = float(value)
        except OverflowError:
            number = math.inf
        if math.isfinite(number):
            return number
    raise ConfigError(f"{name} must be a finite number, got {value!r}")


def _as_text(value: Any, name: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{name} must be a string, got {value!r}")
    return value


def _as_density(value: Any, name: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{name} must be a density spec object, got {value!r}")
    density_from_spec(value)
    return value


def _as_points(value: Any, name: str) -> list:
    try:
        points = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must hold numbers: {exc}") from exc
    if points.size == 0 or not np.all(np.isfinite(points)):
        raise ConfigError(f"{name} must be a non-empty list of finite numbers")
    return points.tolist()


def _as_family(value: Any, name: str) -> dict:
    if not isinstance(value, dict) or not isinstance(value.get("kind"), str):
        raise ConfigError(f"{name} must be an object with a string \"kind\", got {value!r}")
    return value


def _list_of(item):
    def convert(value: Any, name: str) -> list:
        if not isinstance(value, list | tuple) or not value:
            raise ConfigError(f"{name} must be a non-empty list, got {value!r}")
        return [item(v, f"{name}[{k}]") for k, v in enumerate(value)]

    return convert


def _optional(convert):
    def check(value: Any, name: str):
        return None if value is None else convert(value, name)

    check.optional = True
    return check


def _section(rules: dict):
    def convert(value: Any, name: str) -> dict:
        if not isinstance(value, dict):
            raise ConfigError(f"{name} must be an object, got {value!r}")
        return _apply_rules(rules, value, f"{name}.")

    return convert


def _apply_rules(rules: dict, params: dict, prefix: str = "") -> dict:
    checked = dict(params)
    for key, convert in rules.items():
        if key not in params:
            if getattr(convert, "optional", False):
                continue
            raise ConfigError(f"parameter {prefix}{key} is required")
        checked[key] = convert(params[key], f"{prefix}{key}")
    for key in sorted(set(params) - set(rules)):
        logger.warning("ignoring unknown parameter %s%s", prefix, key)
    return checked


# Parameter types per subcommand, checked before any work starts
PARAM_RULES: dict[str, dict[str, Any]] = {
    "polytope-rate": {
        "body": _as_text,
        "m_grid": _list_of(_as_int),
        "mc_samples": _as_count,
        "scheme": _optional(_as_text),
        "axes": _optional(_list_of(_as_float)),
        "lo": _optional(_list_of(_as_float)),
        "hi": _optional(_list_of(_as_float)),
    },
    "approx": {
        "density": _as_density,
        "epsilons": _list_of(_as_float),
        "c_L": _as_float,
        "c_H": _as_float,
        "mc_budget": _as_count,
        "distance_budget": _optional(_as_count),
        "sandwich_points": _at_least(0),
        "domination_points": _as_count,
    },
    "estimate": {
        "truth": _as_density,
        "candidates": _list_of(_as_density),
        "epsilon": _as_float,
        "trials": _as_count,
        "V": _as_count,
        "c": _as_float,
        "integral_budget": _as_count,
        "n": _optional(_as_count),
    },
    "vc": {
        "families": _list_of(_as_family),
        "rate": _section(
            {"density": _as_density, "n_grid": _list_of(_as_count), "reps": _as_count}
        ),
        "growth": _section(
            {"d": _as_count, "L": _as_count, "H": _as_count, "points": _as_points}
        ),
        "bound_epsilon": _as_float,
    },
    "rate": {
        "truth": _as_density,
        "candidates": _list_of(_as_density),
        "epsilon": _as_float,
        "n_grid": _list_of(_as_count),
        "reps": _as_count,
        "integral_budget": _as_count,
    },
}


@dataclass
class ExperimentConfig:
    """One experiment run: subcommand, mandatory seed, parameters and output options."""

    subcommand: str
    seed: int
    params: dict[str, Any] = field(default_factory=dict)
    output_path: str = "results"
    emit_svg: bool = False

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if not isinstance(self.params, dict):
            raise ConfigError(f"params must be an object, got {self.params!r}")
        merged = dict(DEFAULT_PARAMS[self.subcommand])
        merged.update(self.params)
        self.params = _apply_rules(PARAM_RULES[self.subcommand], merged)

    @classmethod
    def from_sources(
        cls,
        subcommand: str,
        config_path: str | None = None,
        seed: int | None = None,
        output_path: str | None = None,
        emit_svg: bool = False,
    ) -> "ExperimentConfig":
        """Merge a JSON config file with command-line overrides (flags win)."""
        payload: dict[str, Any] = {}
        if config_path:
            try:
                payload = json.loads(Path(config_path).read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
            if not isinstance(payload, dict):
                raise ConfigError("config file must hold a JSON object")
        chosen_seed = seed if seed is not None else payload.get("seed")
        if chosen_seed is None:
            raise ConfigError("a seed is required (--seed or \"seed\" in the config)")
        return cls(
            subcommand=subcommand,
            seed=chosen_seed,
            params=payload.get("params", {}),
            output_path=output_path or payload.get("output_path", "results"),
            emit_svg=emit_svg or bool(payload.get("emit_svg", False)),
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class ResultRecord:
    """Everything a run produced, plus the config that produced it."""

    config: ExperimentConfig
    metrics: dict[str, dict[str, Any]] = field(default_factory=dict)
    tables: dict[str, str] = field(default_factory=dict)
    plots: dict[str, tuple[str, list[str], bool, bool]] = field(default_factory=dict)
    started_at: str = ""
    finished_at: str = ""
    version: str = LAB_VERSION

    def metric(self, name: str, value: Any, stderr: float | None = None) -> None:
        self.metrics[name] = {"value": value, "stderr": stderr}

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config.to_dict(),
            "metrics": self.metrics,
            "tables": self.tables,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "version": self.version,
        }


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _rate_body(params: dict) -> ConvexBody:
    name = params.get("body", "disk")
    if name == "disk":
        return ConvexBody.ball([0.0, 0.0], 1.0)
    if name == "ball-3d":
        return ConvexBody.ball([0.0, 0.0, 0.0], 1.0)
    if name == "ellipse":
        axes = params.get("axes") or [2.0, 1.0]
        if len(axes) != 2:
            raise ConfigError(f"ellipse needs two axes, got {axes}")
        a, b = axes
        return ConvexBody.ellipsoid([0.0, 0.0], np.diag([a * a, b * b]))
    if name == "box":
        return ConvexBody.box(params.get("lo", [-1.0, -1.0]), params.get("hi", [1.0, 1.0]))
    raise ConfigError(f"unknown body {name!r}; expected disk, ball-3d, ellipse or box")


def run_polytope_rate(config: ExperimentConfig) -> ResultRecord:
    """Volume deficit of inscribed polytopes against the number of directions."""
    params = config.params
    K = _rate_body(params)
    m_grid = [int(m) for m in params["m_grid"]]
    if any(m < K.dimension + 1 for m in m_grid):
        raise ConfigError(f"every m must be at least d + 1 = {K.dimension + 1}")
    seeds = spawn_seeds(config.seed, len(m_grid))

    def make_task(m: int, child):
        def task():
            if K.polytope is not None and K.polytope.facet_count <= m:
                P = K.polytope
            else:
                P = inscribed_polytope(K, m, seed=child, scheme=params.get("scheme"))
            deficit = volume_deficit(K, P, int(params["mc_samples"]), child)
            return m, P.facet_count, deficit

        return task

    results = run_ordered([make_task(m, s) for m, s in zip(m_grid, seeds, strict=True)])
    rows = [(m, facets, d.value, d.stderr, d.method) for m, facets, d in results]
    record = ResultRecord(config)
    positive = [(m, d.value) for m, _, d in results if d.value > 0]
    summary: dict[str, Any] = {"body": K.label, "dimension": K.dimension}
    if len(positive) >= 2:
        slope, intercept = loglog_fit([m for m, _ in positive], [v for _, v in positive])
        summary.update(slope=slope, constant=math.exp(intercept))
        record.metric("slope", slope)
        # Approximation theory predicts deficits ∝ m^(-2/(d-1))
        record.metric("expected_slope", -2.0 / (K.dimension - 1) if K.dimension > 1 else None)
    record.metric("max_deficit", max(r[2] for r in rows))
    record.tables["deficits"] = format_csv(
        ["m [directions]", "facets [count]", "deficit [rel]", "stderr [rel]", "method"],
        rows,
        summary,
    )
    record.plots["deficits"] = ("m [directions]", ["deficit [rel]"], True, True)
    return record


def _sandwich_levels(low: float, high: float, count: int, seed) -> list[float]:
    rng = np.random.default_rng(seed)
    return sorted(float(y) for y in rng.uniform(low, high, size=count))


def run_approx(config: ExperimentConfig) -> ResultRecord:
    """Per-ε accuracy of the piecewise-polytope approximation of one density."""
    params = config.params
    f = density_from_spec(params["density"])
    epsilons = [float(e) for e in params["epsilons"]]
    record = ResultRecord(config)
    rows = []
    for eps, child in zip(epsilons, spawn_seeds(config.seed, len(epsilons)), strict=True):
        build_seed, l1_seed, tail_seed, sandwich_seed, dom_seed, mass_seed = spawn_seeds(child, 6)
        approx = ApproxConfig(
            eps,
            c_L=float(params["c_L"]),
            c_H=float(params["c_H"]),
            mc_budget=int(params["mc_budget"]),
        )
        print(f"{status_emoji('run')} ε={eps}: building approximation")
        g = build_approximation(f, approx, build_seed)
        l1 = approximation_error(f, g, budget=params.get("distance_budget"), seed=l1_seed)
        ladder = g.ladder_values
        y_cut = ladder[-2] if len(ladder) >= 2 else ladder[0]
        tail = tail_mass(f, y_cut, int(params["mc_budget"]), tail_seed)
        low, high = g.ladder_range
        levels = _sandwich_levels(low, high, int(params["sandwich_points"]), sandwich_seed)
        checks = [
            volume_sandwich_check(f, g, y, int(params["mc_budget"]), s)
            for y, s in zip(levels, spawn_seeds(sandwich_seed, len(levels)), strict=True)
        ]
        pass_rate = sum(c.passed for c in checks) / len(checks) if checks else 1.0
        violations = domination_violations(f, g, int(params["domination_points"]), dom_seed)
        mass = integral_of_g(g, int(params["mc_budget"]), mass_seed)
        diagnostics = g.diagnostics
        rows.append(
            (
                eps,
                diagnostics["L"],
                diagnostics["H"],
                g.level_count,
                l1.value,
                l1.stderr,
                tail.value,
                tail.stderr,
                pass_rate,
                violations,
                mass.value,
                mass.stderr,
                diagnostics["over_budget_levels"],
            )
        )
    errors = [r[4] for r in rows]
    order = np.argsort(epsilons)
    monotone = all(
        errors[order[k]] <= errors[order[k + 1]] for k in range(len(order) - 1)
    )
    record.metric("l1_monotone_in_epsilon", monotone)
    record.metric("domination_violations", int(sum(r[9] for r in rows)))
    record.metric("tail_within_epsilon", all(r[6] <= r[0] + 3 * r[7] for r in rows))
    record.metric("over_budget_levels", int(sum(r[12] for r in rows)))
    record.tables["approx"] = format_csv(
        [
            "epsilon [1]",
            "L [levels]",
            "H [facets]",
            "levels_kept [count]",
            "l1_error [1]",
            "l1_stderr [1]",
            "tail_mass [1]",
            "tail_stderr [1]",
            "sandwich_pass_rate [1]",
            "domination_violations [count]",
            "integral_g [1]",
            "integral_stderr [1]",
            "over_budget_levels [count]",
        ],
        rows,
        {"family": f.family_tag, "dimension": f.dimension, "l1_monotone": monotone},
    )
    record.plots["approx"] = ("epsilon [1]", ["l1_error [1]", "tail_mass [1]"], True, True)
    return record


def _candidate_class(specs: list[dict]) -> CandidateClass:
    members = [density_from_spec(spec) for spec in specs]
    labels = [spec.get("label", f"{spec['family']}#{k}") for k, spec in enumerate(specs)]
    return CandidateClass(tuple(members), tuple(labels))


def run_estimate(config: ExperimentConfig) -> ResultRecord:
    """Guarantee harness for minimum-distance selection plus one score matrix."""
    params = config.params
    truth = density_from_spec(params["truth"])
    cls = _candidate_class(params["candidates"])
    harness_seed, demo_seed, demo_sample_seed = spawn_seeds(config.seed, 3)
    report = guarantee_harness(
        truth,
        cls,
        float(params["epsilon"]),
        int(params["trials"]),
        harness_seed,
        n=params.get("n"),
        V=int(params["V"]),
        c=float(params["c"]),
        integral_budget=int(params["integral_budget"]),
    )
    samples = EmpiricalDistribution(truth.sample(report.n, demo_sample_seed))
    demo = select(cls, samples, int(params["integral_budget"]), demo_seed)

    record = ResultRecord(config)
    record.metric("success_rate", report.success_rate)
    record.metric("opt", report.opt_estimate, report.opt_stderr)
    record.metric("threshold", report.threshold)
    record.metric("n", report.n)
    record.metric("certificate_holds", demo.certificate_holds())
    trial_rows = [
        (t, k, cls.labels[k], err, err <= report.threshold)
        for t, (k, err) in enumerate(zip(report.chosen, report.tv_errors, strict=True))
    ]
    record.tables["trials"] = format_csv(
        ["trial [index]", "chosen [index]", "label", "tv_error [1]", "success"],
        trial_rows,
        {"success_rate": report.success_rate, "opt": report.opt_estimate, "n": report.n},
    )
    score_rows = [
        (k, cls.labels[k], *demo.score_matrix[k].tolist(), float(demo.row_max[k]))
        for k in range(len(cls))
    ]
    record.tables["scores"] = format_csv(
        ["member [index]", "label", *[f"A{i}{j} [1]" for i, j in demo.set_pairs], "row_max [1]"],
        score_rows,
        {"chosen_index": demo.chosen_index},
    )
    return record


def run_vc(config: ExperimentConfig) -> ResultRecord:
    """Shattering searches, toy growth counts and the interval discrepancy rate."""
    params = config.params
    shatter_seed, rate_seed = spawn_seeds(config.seed, 2)
    record = ResultRecord(config)

    shatter_rows = []
    for spec, child in zip(
        params["families"], spawn_seeds(shatter_seed, len(params["families"])), strict=True
    ):
        spec = dict(spec)
        family = SetFamilyHandle(spec.pop("kind"), spec)
        report = vc_estimate(family, seed=child)
        shatter_rows.append(
            (family.describe(), report.shattered_size, report.exhaustive, report.point_sets_checked)
        )
        record.metric(f"vc[{family.describe()}]", report.shattered_size)
    record.tables["shatter"] = format_csv(
        ["family", "shattered_size [points]", "exhaustive", "point_sets_checked [count]"],
        shatter_rows,
    )

    growth = params["growth"]
    points = np.asarray(growth["points"], dtype=float)
    if points.size % growth["d"]:
        raise ConfigError(f"growth.points must hold whole points in R^{growth['d']}")
    points = points.reshape(-1, growth["d"])
    members = toy_piecewise_grid(growth["d"], growth["L"], growth["H"])
    family = difference_family(members, growth["L"], growth["H"])
    growth_rows = []
    for n in range(1, points.shape[0] + 1):
        result = growth_count(family, points[:n])
        growth_rows.append(
            (n, result.count, result.power_bound, result.formula_bound, result.fitted_constant)
        )
    record.tables["growth"] = format_csv(
        ["n [points]", "count [labelings]", "power_bound [labelings]", "formula_bound", "fitted_c"],
        growth_rows,
        {"members": len(members), "L": growth["L"], "H": growth["H"], "d": growth["d"]},
    )

    rate = params["rate"]
    f = density_from_spec(rate["density"])
    report = vc_rate_experiment(f, rate["n_grid"], int(rate["reps"]), rate_seed)
    record.metric("rate_slope", report.slope)
    record.metric("rate_constant", report.fitted_constant)
    record.tables["rate"] = format_csv(
        ["n [samples]", "mean_sup [1]", "stderr [1]"],
        list(zip(report.n_grid, report.means, report.stderrs, strict=True)),
        {"slope": report.slope, "constant": report.fitted_constant, "V": report.V},
    )
    record.plots["rate"] = ("n [samples]", ["mean_sup [1]"], True, True)
    eps = float(params["bound_epsilon"])
    record.metric("vc_bound_d1", vc_dimension_bound(1, eps))
    return record


def run_rate(config: ExperimentConfig) -> ResultRecord:
    """d = 1 learning curve: select among built approximations, measure TV against n."""
    params = config.params
    truth = density_from_spec(params["truth"])
    if truth.dimension != 1:
        raise ConfigError("the learning-curve experiment runs in d = 1")
    eps = float(params["epsilon"])
    build_root, tv_root, trial_root = spawn_seeds(config.seed, 3)
    specs = params["candidates"]
    approx = ApproxConfig(eps)
    members = [
        build_approximation(density_from_spec(spec), approx, s).normalized()
        for spec, s in zip(specs, spawn_seeds(build_root, len(specs)), strict=True)
    ]
    cls = CandidateClass(tuple(members))
    member_tv = run_ordered(
        [
            (lambda g=g, s=s: tv_distance(g, truth, seed=s))
            for g, s in zip(members, spawn_seeds(tv_root, len(members)), strict=True)
        ]
    )
    n_grid = [int(n) for n in params["n_grid"]]
    reps = int(params["reps"])
    seeds = spawn_seeds(trial_root, len(n_grid) * reps)

    def make_trial(n: int, child):
        def trial() -> float:
            sample_seed, select_seed = spawn_seeds(child, 2)
            samples = EmpiricalDistribution(truth.sample(n, sample_seed))
            chosen = select(cls, samples, int(params["integral_budget"]), select_seed)
            return member_tv[chosen.chosen_index].value

        return trial

    tasks = [make_trial(n, seeds[k * reps + r]) for k, n in enumerate(n_grid) for r in range(reps)]
    errors = np.array(run_ordered(tasks)).reshape(len(n_grid), reps)
    means = errors.mean(axis=1)
    stderrs = errors.std(axis=1, ddof=1) / math.sqrt(reps) if reps > 1 else np.zeros(len(n_grid))
    record = ResultRecord(config)
    summary: dict[str, Any] = {"epsilon": eps, "members": len(members)}
    if np.all(means > 0):
        slope, _ = loglog_fit(n_grid, means)
        summary["alpha"] = -slope
        record.metric("alpha", -slope)
    record.metric("best_member_tv", min(m.value for m in member_tv))
    record.tables["learning_curve"] = format_csv(
        ["n [samples]", "mean_tv [1]", "stderr [1]"],
        list(zip(n_grid, means.tolist(), stderrs.tolist(), strict=True)),
        summary,
    )
    record.plots["learning_curve"] = ("n [samples]", ["mean_tv [1]"], True, True)
    return record


RUNNERS = {
    "polytope-rate": run_polytope_rate,
    "approx": run_approx,
    "estimate": run_estimate,
    "vc": run_vc,
    "rate": run_rate,
}


def run_experiment(config: ExperimentConfig) -> ResultRecord:
    started = _now()
    record = RUNNERS[config.subcommand](config)
    record.started_at = started
    record.finished_at = _now()
    return record


def write_outputs(record: ResultRecord) -> list[Path]:
    """CSV per table, the JSON record, and SVG plots when requested."""
    out_dir = Path(record.config.output_path)
    stem = record.config.subcommand.replace("-", "_")
    written = []
    for name, text in record.tables.items():
        written.append(write_text(out_dir / f"{stem}_{name}.csv", text))
    written.append(write_text(out_dir / f"{stem}.json", to_json_text(record.to_dict())))
    if record.config.emit_svg:
        for name, (x_column, y_columns, log_x, log_y) in record.plots.items():
            svg = render_svg(record.tables[name], x_column, y_columns, f"{stem} {name}", log_x, log_y)
            written.append(write_text(out_dir / f"{stem}_{name}.svg", svg))
    return written


def main(argv: list[str] | None = None) -> int:
    """Command-line interface for the experiment harness."""
    parser = argparse.ArgumentParser(
        description="Seeded experiments for log-concave density estimation",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Deficit rate of inscribed polygons in the unit disk
  python experiments.py polytope-rate --seed 1 --out results

  # Approximation accuracy with a custom config and SVG plots
  python experiments.py approx --config approx.json --seed 7 --emit-svg

  # Selection guarantee, verbose logging
  python experiments.py estimate --seed 3 --verbose
        """,
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS, help="Experiment to run")
    parser.add_argument("--config", help="Path to a JSON config (params, seed, output_path)")
    parser.add_argument("--seed", type=int, help="Root seed (required here or in the config)")
    parser.add_argument("--out", help="Output directory (default: results)")
    parser.add_argument("--emit-svg", action="store_true", help="Also write SVG plots")
    parser.add_argument("--verbose", action="store_true", help="Debug logging")

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        config = ExperimentConfig.from_sources(
            args.subcommand, args.config, args.seed, args.out, args.emit_svg
        )
        print(f"\n{status_emoji('run')} Running {config.subcommand} (seed {config.seed})...")
        record = run_experiment(config)
        written = write_outputs(record)
    except LabError as exc:
        print(f"\n{status_emoji('fail')} {type(exc).__name__}: {exc}")
        return exc.exit_code

    print(f"\n{status_emoji('stats')} Metrics:")
    for name, metric in sorted(record.metrics.items()):
        stderr = metric["stderr"]
        suffix = f" ± {stderr:.3g}" if stderr else ""
        print(f"   {name}: {metric['value']}{suffix}")
    for path in written:
        print(f"{status_emoji('file')} {path}")
    print(f"{status_emoji('ok')} Done")
    return 0


if __name__ == "__main__":
    sys.exit(main())
