"""Config-driven sweeps, heatmaps and validations.

A config is one JSON document. Physical quantities are given in units of
gamma and angles in units of pi (``mu_over_pi``, and every mu axis of a
sweep); they are converted to absolute rates and radians here.

Example::

    {
      "model": {"lambda1": [1.5, -0.355], "lambda2": "1.4-0.645j", "m": 4,
                "mu_over_pi": 0.1171, "Delta": 2, "U": 2, "F": 0.1},
      "solver": {"method": "eigen", "dims": [4, 4]},
      "sweep": {"axis": "delta", "start": 0, "stop": 6, "points": 61},
      "output": {"format": "csv"}
    }
"""

from __future__ import annotations

import copy
import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .analytics import (
    ConditionSolution,
    cpb_at_ep,
    cpb_non_ep,
    find_eps,
    g2_analytic,
    upb_conditions,
)
from .hilbert import FockLayout
from .liouville import DEFAULT_DT, DEFAULT_T_MAX, DEFAULT_TOL, steady_state, validate_full_vs_effective
from .model import ModelParams, kerr_strength
from .observables import g2_zero, mean_occupation, photon_distribution, subspace_spectrum

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "SweepResult",
    "load_config",
    "run_sweep",
    "run_heatmap",
    "run_validate_full",
    "run_distribution",
    "run_eps",
    "run_conditions",
    "to_csv",
    "to_json",
    "FAILURE_THRESHOLD",
]

FAILURE_THRESHOLD = 0.05
AXES = ("mu", "delta")
TWO_AXIS = {"mu×delta", "mu*delta", "mu,delta", "mu-delta", "mu_delta"}

SOLVER_DEFAULTS = {
    "method": "eigen",
    "dims": [4, 4],
    "mech_dim": 8,
    "dt": DEFAULT_DT,
    "t_max": DEFAULT_T_MAX,
    "tol": DEFAULT_TOL,
    "full_tol": 1e-4,
    "check_truncation": True,
    "truncation_tol": 0.01,
    "u_tol": 1e-3,
    "decay_scale": 1.0,
}


class ConfigError(ValueError):
    """The experiment config is malformed or inconsistent."""


def _complex(value, key: str) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", "").replace("i", "j"))
        except ValueError:
            pass
    raise ConfigError(f"{key} must be a number, [re, im] or a string like '1.5-0.355j'; got {value!r}")


def _axis_values(spec: dict, name: str) -> list[float]:
    if "values" in spec:
        values = [float(v) for v in spec["values"]]
        if not values:
            raise ConfigError(f"sweep axis {name}: empty values list")
        return values
    try:
        start, stop, points = float(spec["start"]), float(spec["stop"]), int(spec["points"])
    except KeyError as exc:
        raise ConfigError(f"sweep axis {name} needs start, stop, points (or values)") from exc
    if not start < stop:
        raise ConfigError(f"sweep axis {name}: start {start} must be < stop {stop}")
    if points < 2:
        raise ConfigError(f"sweep axis {name}: points must be >= 2, got {points}")
    return np.linspace(start, stop, points).tolist()


@dataclass
class ExperimentConfig:
    """Normalized experiment description.

    ``raw`` keeps the document with defaults filled in; it is echoed into
    the output metadata and can be fed back to ``load_config``.
    """

    params: ModelParams
    solver: dict
    axes: dict[str, list[float]]
    output: dict
    workers: int
    extra: dict
    raw: dict

    @property
    def gamma(self) -> float:
        return self.params.gamma

    def grid(self) -> list[tuple[float, ...]]:
        """Grid points in axis order, row-major (first axis outermost)."""
        names = list(self.axes)
        if not names:
            return [()]
        mesh = np.meshgrid(*[self.axes[n] for n in names], indexing="ij")
        return [tuple(float(v) for v in point) for point in zip(*(m.ravel() for m in mesh))]

    def point_params(self, point: tuple[float, ...]) -> ModelParams:
        changes = {}
        for name, value in zip(self.axes, point):
            if name == "mu":
                changes["mu"] = value * math.pi
            else:
                changes["Delta"] = value * self.gamma
        return self.params.replace(**changes)

    def layout(self) -> FockLayout:
        return FockLayout(self.solver["dims"])


def load_config(source: str | dict, overrides: dict | None = None) -> ExperimentConfig:
    """Parse a config file path or dict; ``overrides`` maps dotted keys to values."""
    if isinstance(source, dict):
        doc = copy.deepcopy(source)
    else:
        try:
            with open(source) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {source}: {exc}") from exc
    for key, value in (overrides or {}).items():
        node = doc
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    if not isinstance(doc, dict) or "model" not in doc:
        raise ConfigError("config needs a 'model' section")

    model = dict(doc["model"])
    gamma = float(model.get("gamma", 1.0))
    if "mu_over_pi" in model and "mu" in model:
        raise ConfigError("give either mu_over_pi or mu, not both")
    mu = float(model["mu_over_pi"]) * math.pi if "mu_over_pi" in model else float(model.get("mu", 0.0))
    try:
        params = ModelParams(
            lambda1=_complex(model["lambda1"], "lambda1") * gamma,
            lambda2=_complex(model["lambda2"], "lambda2") * gamma,
            m=model["m"],
            mu=mu,
            Delta=float(model.get("Delta", 0.0)) * gamma,
            U=float(model.get("U", 0.0)) * gamma,
            gamma=gamma,
            F=float(model.get("F", 0.0)) * gamma,
            omega_m=None if model.get("omega_m") is None else float(model["omega_m"]) * gamma,
            g=None if model.get("g") is None else float(model["g"]) * gamma,
        )
    except KeyError as exc:
        raise ConfigError(f"model is missing {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    solver = {**SOLVER_DEFAULTS, **doc.get("solver", {})}
    unknown = set(solver) - set(SOLVER_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown solver keys {sorted(unknown)}")
    if solver["method"] not in ("eigen", "evolve"):
        raise ConfigError(f"solver.method must be eigen or evolve, got {solver['method']!r}")
    try:
        FockLayout(solver["dims"])
    except ValueError as exc:
        raise ConfigError(f"solver.dims: {exc}") from exc
    if len(solver["dims"]) != 2:
        raise ConfigError("solver.dims lists the two photonic truncations")

    axes: dict[str, list[float]] = {}
    sweep = doc.get("sweep")
    if sweep:
        axis = str(sweep.get("axis", "")).replace(" ", "")
        if axis in AXES:
            axes[axis] = _axis_values(sweep.get(axis, sweep), axis)
        elif axis in TWO_AXIS:
            for name in AXES:
                if name not in sweep:
                    raise ConfigError(f"two-axis sweep needs a '{name}' block")
                axes[name] = _axis_values(sweep[name], name)
        else:
            raise ConfigError(f"sweep.axis must be mu, delta or mu×delta, got {sweep.get('axis')!r}")

    output = {"path": None, "format": "csv", **doc.get("output", {})}
    if output["format"] not in ("csv", "json"):
        raise ConfigError(f"output.format must be csv or json, got {output['format']!r}")
    parallel = doc.get("parallelism", {})
    workers = parallel.get("workers", 1) if isinstance(parallel, dict) else parallel
    try:
        workers = int(workers)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"worker count must be an integer, got {workers!r}") from exc
    if workers < 1:
        raise ConfigError(f"worker count must be >= 1, got {workers}")

    raw = copy.deepcopy(doc)
    raw["solver"] = solver
    raw["output"] = output
    raw["parallelism"] = {"workers": workers}
    extra = {k: v for k, v in doc.items()
             if k not in ("model", "solver", "sweep", "output", "parallelism")}
    return ExperimentConfig(params, solver, axes, output, workers, extra, raw)


@dataclass
class SweepResult:
    """Rows in grid order. ``converged`` flags each row; failures are kept."""

    axes: list[str]
    columns: list[str]
    rows: list[dict]
    metadata: dict = field(default_factory=dict)

    @property
    def converged(self) -> list[bool]:
        return [bool(r["converged"]) for r in self.rows]

    @property
    def failure_fraction(self) -> float:
        if not self.rows:
            return 0.0
        return sum(not c for c in self.converged) / len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([r.get(name, np.nan) for r in self.rows], dtype=float)


def _solver_kwargs(solver: dict) -> dict:
    if solver["method"] == "evolve":
        return {"dt": solver["dt"], "t_max": solver["t_max"], "tol": solver["tol"],
                "decay_scale": solver["decay_scale"]}
    return {"decay_scale": solver["decay_scale"]}


def _axis_columns(axes: list[str], point: tuple[float, ...]) -> dict:
    names = {"mu": "mu_over_pi", "delta": "delta"}
    return {names[a]: v for a, v in zip(axes, point)}


def _observables_task(args) -> dict:
    params, solver, axes, point = args
    row = _axis_columns(axes, point)
    dims = solver["dims"]
    try:
        spec = subspace_spectrum(params, "single-excitation")
        row.update(splitting_re=spec.splitting.real, splitting_im=spec.splitting.imag,
                   overlap=spec.overlap)
        row["g2_analytic"] = g2_analytic(params)
    except Exception as exc:  # analytic columns must never sink the numeric ones
        row.setdefault("g2_analytic", math.nan)
        row["analytic_error"] = f"{type(exc).__name__}: {exc}"
    try:
        report = steady_state(params, FockLayout(dims), solver["method"], **_solver_kwargs(solver))
        rho = report.rho
        row["g2_numeric"] = g2_zero(rho, 0)
        row["n1"] = mean_occupation(rho, 0)
        row["n2"] = mean_occupation(rho, 1)
        rel = photon_distribution(rho, 0).relative
        for n in range(dims[0]):
            row[f"R{n}"] = rel[n]
        row["residual"] = report.residual
        row["converged"] = True
        row["error"] = ""
    except Exception as exc:
        row["converged"] = False
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _map(func, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(func, tasks))


def _finish(cfg: ExperimentConfig, kind: str, columns: list[str], rows: list[dict],
            started: float, axes: list[str] | None = None, **extra_meta) -> SweepResult:
    for r in rows:
        for c in columns:
            r.setdefault(c, math.nan if c not in ("converged", "error") else "")
    result = SweepResult(list(cfg.axes) if axes is None else axes, columns, rows)
    result.metadata = {
        "kind": kind,
        "config": cfg.raw,
        "rows": len(rows),
        "failed_rows": sum(not r["converged"] for r in rows),
        "max_residual": max((r["residual"] for r in rows
                             if isinstance(r.get("residual"), float) and math.isfinite(r["residual"])),
                            default=None),
        **extra_meta,
        "wall_time_s": time.perf_counter() - started,
    }
    return result


def _sweep_columns(cfg: ExperimentConfig) -> list[str]:
    axis_cols = [{"mu": "mu_over_pi", "delta": "delta"}[a] for a in cfg.axes]
    r_cols = [f"R{n}" for n in range(cfg.solver["dims"][0])]
    return axis_cols + ["g2_numeric", "g2_analytic", "n1", "n2", "splitting_re",
                        "splitting_im", "overlap", *r_cols, "residual", "converged", "error"]


def run_sweep(cfg: ExperimentConfig, workers: int | None = None) -> SweepResult:
    """Steady-state observables at every grid point, in grid order."""
    started = time.perf_counter()
    axes = list(cfg.axes)
    tasks = [(cfg.point_params(p), cfg.solver, axes, p) for p in cfg.grid()]
    rows = _map(_observables_task, tasks, workers or cfg.workers)
    return _finish(cfg, "sweep", _sweep_columns(cfg), rows, started)


def run_heatmap(cfg: ExperimentConfig, workers: int | None = None) -> SweepResult:
    """Two-axis sweep with an extra log10 g2 column (mu outer, delta inner)."""
    if list(cfg.axes) != ["mu", "delta"]:
        raise ConfigError("heatmap needs a two-axis mu×delta sweep")
    result = run_sweep(cfg, workers)
    for r in result.rows:
        g2 = r.get("g2_numeric", math.nan)
        r["log10_g2"] = math.log10(g2) if r["converged"] and g2 > 0 else math.nan
    result.columns.insert(result.columns.index("g2_analytic"), "log10_g2")
    result.metadata["kind"] = "heatmap"
    result.metadata["shape"] = [len(cfg.axes["mu"]), len(cfg.axes["delta"])]
    return result


def check_kerr_consistency(cfg: ExperimentConfig) -> float:
    p = cfg.params
    if not p.has_mechanics:
        raise ConfigError("validate-full needs model.omega_m and model.g")
    u_mech = kerr_strength(p.g, p.omega_m)
    if abs(u_mech - p.U) > cfg.solver["u_tol"] * p.gamma:
        raise ConfigError(
            f"U = {p.U / p.gamma} gamma does not match g^2/omega_m = {u_mech / p.gamma} gamma "
            f"(tolerance {cfg.solver['u_tol']})"
        )
    return u_mech


def _validate_task(args) -> dict:
    params, solver, axes, point, check = args
    row = _axis_columns(axes, point)
    try:
        cmp = validate_full_vs_effective(
            params, FockLayout(solver["dims"]), mech_dim=solver["mech_dim"],
            u_tol=solver["u_tol"], check_truncation=check,
            truncation_tol=solver["truncation_tol"], tol=solver["full_tol"],
            t_max=solver["t_max"], decay_scale=solver["decay_scale"],
        )
        row.update(g2_effective=cmp.g2_effective, g2_full=cmp.g2_full,
                   relative_deviation=cmp.relative_deviation,
                   g2_full_doubled=cmp.g2_full_doubled if cmp.g2_full_doubled is not None else math.nan,
                   truncation_change=cmp.truncation_change if cmp.truncation_change is not None else math.nan,
                   residual=cmp.full.residual, t_settle=cmp.full.t, converged=True, error="")
    except Exception as exc:
        row["converged"] = False
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_validate_full(cfg: ExperimentConfig, workers: int | None = None) -> SweepResult:
    """Effective Kerr model against the optomechanical one over the grid."""
    check_kerr_consistency(cfg)
    started = time.perf_counter()
    axes = list(cfg.axes)
    check = bool(cfg.solver["check_truncation"])
    tasks = [(cfg.point_params(p), cfg.solver, axes, p, check) for p in cfg.grid()]
    rows = _map(_validate_task, tasks, workers or cfg.workers)
    axis_cols = [{"mu": "mu_over_pi", "delta": "delta"}[a] for a in axes]
    columns = axis_cols + ["g2_effective", "g2_full", "relative_deviation", "g2_full_doubled",
                           "truncation_change", "residual", "t_settle", "converged", "error"]
    devs = [r["relative_deviation"] for r in rows if r["converged"]]
    return _finish(cfg, "validate-full", columns, rows, started,
                   max_relative_deviation=max(devs) if devs else None)


def run_distribution(cfg: ExperimentConfig, mode: int | None = None) -> SweepResult:
    """Photon-number distribution of one mode at the configured point."""
    started = time.perf_counter()
    mode = int(cfg.extra.get("distribution", {}).get("mode", 0)) if mode is None else mode
    report = steady_state(cfg.params, cfg.layout(), cfg.solver["method"], **_solver_kwargs(cfg.solver))
    dist = photon_distribution(report.rho, mode)
    rows = [
        {"n": n, "probability": float(dist.probabilities[n]), "poisson": float(dist.poisson_reference[n]),
         "relative": float(dist.relative[n]), "converged": True, "error": ""}
        for n in range(dist.probabilities.size)
    ]
    return _finish(cfg, "distribution", ["n", "probability", "poisson", "relative", "converged", "error"],
                   rows, started, axes=[], mode=mode, mean=dist.mean, g2=g2_zero(report.rho, mode),
                   residual=report.residual)


def run_eps(cfg: ExperimentConfig) -> ConditionSolution:
    opts = cfg.extra.get("conditions", {})
    p = cfg.params
    return find_eps(p.lambda1, p.lambda2, p.m, opts.get("n_range", [1]))


def run_conditions(cfg: ExperimentConfig, kind: str) -> ConditionSolution:
    opts = cfg.extra.get("conditions", {})
    if kind == "cpb":
        return cpb_at_ep(cfg.params, opts.get("n_range", [1]))
    if kind == "cpb-non-ep":
        return cpb_non_ep(cfg.params, opts.get("periods", 1))
    if kind == "upb":
        return upb_conditions(cfg.params, opts.get("periods", 1))
    raise ConfigError(f"unknown condition kind {kind!r}")


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.17g}"
    if isinstance(value, complex):
        raise TypeError("complex values must be split into _re/_im columns")
    return str(value)


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.columns)
    for r in result.rows:
        writer.writerow([_fmt(r.get(c, "")) for c in result.columns])
    return buf.getvalue()


def jsonable(obj):
    """Replace non-finite floats by the strings 'inf', '-inf', 'nan'."""
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else _fmt(value)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": jsonable(obj.real), "im": jsonable(obj.imag)}
    return obj


def to_json(result: SweepResult | ConditionSolution) -> str:
    if isinstance(result, ConditionSolution):
        doc = result.as_dict()
    else:
        doc = {
            "metadata": result.metadata,
            "columns": result.columns,
            "rows": [[r.get(c, "") for c in result.columns] for r in result.rows],
        }
    return json.dumps(jsonable(doc), indent=2, allow_nan=False) + "\n"


def default_workers() -> int | None:
    value = os.environ.get("NHBLOCKADE_WORKERS")
    if value is None or value == "":
        return None
    try:
        n = int(value)
    except ValueError as exc:
        raise ConfigError(f"NHBLOCKADE_WORKERS must be an integer, got {value!r}") from exc
    if n < 1:
        raise ConfigError(f"NHBLOCKADE_WORKERS must be >= 1, got {n}")
    return n
