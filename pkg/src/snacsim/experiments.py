"""Scenario configs, sweep expansion and result tables.

A scenario is a base parameter point plus one or more sweeps.  Every sweep
value, crossed with the optional ``series`` values and the seed list,
becomes one simulated point; points are independent and may run in a
process pool.  Frequencies in configs and outputs are linear (MHz), times
are ns and path parameters are given in units of pi.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
import yaml

from . import __version__, core
from .engine import DecoherenceParams, Trajectory, propagate_lindblad, propagate_unitary, tomography_1q, tomography_2q, transferred_population
from .models import MHZ, NS, TABLE_I, ControlModel, DeviceParams, device_from_mapping
from .noise import NoiseConfig, apply_gaussian_noise, realized_snr, sample_schedule
from .paths import (
    PathSchedule,
    inject_phase_errors,
    iswap_schedule,
    jumping_schedule,
    lzt_schedule,
    phase_ledger,
    snac_schedule,
    traditional_metric_max,
)

EXPERIMENTS = ("transfer", "gamma", "chi", "time", "noise", "decoherence_time", "phase_robustness")
MODELS = ("1q-latitude", "1q-longitude", "2q")
PROTOCOLS = ("snac", "lzt", "iswap")

# Columns that describe a point; every result row echoes all of them.
PARAM_COLUMNS = (
    "experiment",
    "model",
    "protocol",
    "gamma",
    "N",
    "T_ns",
    "lambda0_pi",
    "lambdaT_pi",
    "delta_chi_pi",
    "Omega0_mhz",
    "J_mhz",
    "delta_start_mhz",
    "delta_end_mhz",
    "lzt_steps",
    "decoherence",
    "T1_us",
    "T2_us",
    "noise_mode",
    "snr_db",
    "eta_ns",
    "shots",
    "dt_ns",
    "seed",
)
RESULT_COLUMNS = (
    "T_total_ns",
    "fidelity",
    "population",
    "realized_snr_db",
    "adiabatic_rate",
    "adiabatic_direct",
    "trace_drift",
)

BASE_DEFAULTS: dict[str, Any] = {
    "protocol": "snac",
    "gamma": 1.0,
    "N": 5,
    "T_ns": None,
    "lambda0_pi": None,
    "lambdaT_pi": None,
    "delta_chi_pi": 0.0,
    "Omega0_mhz": None,
    "J_mhz": 9.2,
    "delta_start_mhz": 230.7,
    "delta_end_mhz": -230.7,
    "lzt_steps": 2000,
    "decoherence": False,
    "devices": None,
    "T2_override_us": None,
    "noise_mode": None,
    "snr_db": None,
    "eta_ns": 1.0,
    "shots": None,
    "dt_ns": 0.1,
}
SWEEPABLE = {
    "gamma", "N", "T_ns", "delta_chi_pi", "chi_pi", "Omega0_mhz", "J_mhz", "decoherence",
    "noise_mode", "snr_db", "eta_ns", "protocol", "shots", "none",
}


class ConfigError(ValueError):
    """Invalid scenario configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class Sweep:
    axis: str
    values: list
    fixed: dict = field(default_factory=dict)


@dataclass
class ScenarioConfig:
    id: str
    experiment: str
    model: str
    base: dict
    sweeps: list[Sweep]
    series: dict = field(default_factory=dict)
    seeds: list[int] = field(default_factory=lambda: [0])
    checks: list[dict] = field(default_factory=list)
    description: str = ""
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


def _require(cond: bool, fld: str, msg: str) -> None:
    if not cond:
        raise ConfigError(fld, msg)


def parse_config(raw: Mapping[str, Any]) -> ScenarioConfig:
    """Validate a config mapping (as loaded from YAML) into a :class:`ScenarioConfig`."""
    raw = copy.deepcopy(dict(raw))
    known = {"id", "description", "experiment", "model", "params", "sweep", "sweeps", "series", "seeds", "checks"}
    extra = set(raw) - known
    _require(not extra, sorted(extra)[0] if extra else "", "unknown top-level key")
    _require(isinstance(raw.get("id"), str) and raw["id"], "id", "scenario id is required")
    experiment = raw.get("experiment", "transfer")
    _require(experiment in EXPERIMENTS, "experiment", f"must be one of {EXPERIMENTS}, got {experiment!r}")
    model = raw.get("model")
    _require(model in MODELS, "model", f"must be one of {MODELS}, got {model!r}")

    params = dict(raw.get("params") or {})
    unknown = set(params) - set(BASE_DEFAULTS)
    _require(not unknown, f"params.{sorted(unknown)[0]}" if unknown else "params", "unknown parameter")
    base = {**BASE_DEFAULTS, **params}
    _check_point(base, model, "params")

    if "sweeps" in raw:
        sweep_specs = raw["sweeps"]
        _require(isinstance(sweep_specs, list) and sweep_specs, "sweeps", "must be a non-empty list")
    else:
        sweep_specs = [raw.get("sweep", {"axis": "none", "values": [None]})]
    sweeps = []
    for i, s in enumerate(sweep_specs):
        where = "sweep" if "sweeps" not in raw else f"sweeps[{i}]"
        _require(isinstance(s, Mapping), where, "must be a mapping with axis and values")
        axis = s.get("axis")
        _require(axis in SWEEPABLE, f"{where}.axis", f"cannot sweep {axis!r}")
        values = s.get("values")
        _require(isinstance(values, list) and len(values) > 0, f"{where}.values", "sweep values must be a non-empty list")
        fixed = dict(s.get("set") or {})
        bad = set(fixed) - set(BASE_DEFAULTS)
        _require(not bad, f"{where}.set", f"unknown parameters {sorted(bad)}")
        sweeps.append(Sweep(axis, list(values), fixed))

    series = dict(raw.get("series") or {})
    for key, vals in series.items():
        _require(key in SWEEPABLE and key != "none", f"series.{key}", "not a sweepable parameter")
        _require(isinstance(vals, list) and vals, f"series.{key}", "must be a non-empty list")

    seeds = raw.get("seeds", [0])
    if isinstance(seeds, int):
        _require(seeds >= 1, "seeds", "need at least one seed")
        seeds = list(range(seeds))
    _require(isinstance(seeds, list) and seeds and all(isinstance(s, int) for s in seeds), "seeds", "must be an int or list of ints")

    checks = list(raw.get("checks") or [])
    for i, c in enumerate(checks):
        _require(isinstance(c, Mapping) and "metric" in c, f"checks[{i}]", "each check needs a metric")
        _require(any(k in c for k in ("target", "min", "max", "equals")), f"checks[{i}]", "need target/tol, min, max or equals")

    cfg = ScenarioConfig(raw["id"], experiment, model, base, sweeps, series, seeds, checks, raw.get("description", ""), raw)
    for point in expand_points(cfg):
        _check_point(point, model, "sweep")
    return cfg


def _check_point(p: dict, model: str, where: str) -> None:
    proto = p["protocol"]
    _require(proto in PROTOCOLS, f"{where}.protocol", f"must be one of {PROTOCOLS}, got {proto!r}")
    if model.startswith("1q"):
        _require(proto == "snac", f"{where}.protocol", "single-qubit runs use the jumping (snac) schedule")
        _require(p["Omega0_mhz"] is not None and p["Omega0_mhz"] > 0, f"{where}.Omega0_mhz", "single-qubit models need a positive gap")
    else:
        _require(p["J_mhz"] is not None and p["J_mhz"] > 0, f"{where}.J_mhz", "two-qubit models need a positive coupling")
        if proto == "lzt":
            _require(p["T_ns"] is not None and p["T_ns"] > 0, f"{where}.T_ns", "LZT sweeps need a positive duration")
    g = p["gamma"]
    _require(g is not None and 0.0 <= g <= 1.0, f"{where}.gamma", f"jumping ratio must lie in [0, 1], got {g!r}")
    _require(isinstance(p["N"], int) and p["N"] >= 1, f"{where}.N", "segment count must be a positive integer")
    if p["T_ns"] is not None:
        _require(p["T_ns"] > 0, f"{where}.T_ns", "duration must be positive")
    if p["noise_mode"] is not None:
        _require(p["noise_mode"] in ("calibrated", "literal"), f"{where}.noise_mode", "unknown noise mode")
        _require(p["snr_db"] is not None, f"{where}.snr_db", "noise needs an SNR")
    if p["shots"] is not None:
        _require(isinstance(p["shots"], int) and p["shots"] >= 1, f"{where}.shots", "shots must be a positive integer")
    if p["decoherence"]:
        devs = p["devices"]
        _require(isinstance(devs, (list, dict)) and devs, f"{where}.devices", "decoherence needs device names")
        n = 1 if model.startswith("1q") else 2
        _require(len(devs) == n, f"{where}.devices", f"need {n} device(s) for model {model}")


def expand_points(cfg: ScenarioConfig) -> list[dict]:
    """All simulated points of a scenario, one per (sweep value, series combo, seed)."""
    points = []
    keys = list(cfg.series)
    combos = list(itertools.product(*(cfg.series[k] for k in keys))) or [()]
    for sweep in cfg.sweeps:
        for value in sweep.values:
            for combo in combos:
                for seed in cfg.seeds:
                    p = {**cfg.base, **sweep.fixed, **dict(zip(keys, combo))}
                    if sweep.axis == "chi_pi":
                        p["delta_chi_pi"] = float(value) - 1.0
                    elif sweep.axis != "none":
                        p[sweep.axis] = value
                    p.update(experiment=cfg.experiment, model=cfg.model, seed=seed)
                    points.append(p)
    return points


# ----------------------------------------------------------------------------
# Single point
# ----------------------------------------------------------------------------


def _devices(p: dict) -> list[DeviceParams]:
    devs = p["devices"]
    if isinstance(devs, dict):
        return [device_from_mapping(name, spec or {}) for name, spec in devs.items()]
    out = []
    for name in devs:
        if name not in TABLE_I:
            raise ConfigError("devices", f"unknown device {name!r}; known: {sorted(TABLE_I)}")
        out.append(TABLE_I[name])
    return out


def decoherence_for(p: dict) -> DecoherenceParams | None:
    if not p["decoherence"]:
        return None
    override = p.get("T2_override_us")
    if override is not None:
        override = [None if v is None else v * 1e-6 for v in override]
    return DecoherenceParams.from_devices(_devices(p), override)


def control_model(p: dict) -> ControlModel:
    if p["model"] == "1q-latitude":
        return ControlModel("latitude", Omega0=p["Omega0_mhz"] * MHZ)
    if p["model"] == "1q-longitude":
        return ControlModel("longitude", Omega0=p["Omega0_mhz"] * MHZ)
    kind = {"snac": "two-qubit-varphi", "lzt": "lzt-delta", "iswap": "iswap"}[p["protocol"]]
    return ControlModel(kind, J=p["J_mhz"] * MHZ)


def _default_path(p: dict) -> tuple[float, float]:
    if p["model"].startswith("1q"):
        lo, hi = -math.pi, 0.0
    else:
        lo, hi = 0.0, math.pi
    l0 = lo if p["lambda0_pi"] is None else p["lambda0_pi"] * math.pi
    lT = hi if p["lambdaT_pi"] is None else p["lambdaT_pi"] * math.pi
    return l0, lT


def build_schedule(p: dict, model: ControlModel) -> PathSchedule:
    proto = p["protocol"]
    dchi = p["delta_chi_pi"]
    if proto == "lzt":
        return lzt_schedule(p["delta_start_mhz"] * MHZ, p["delta_end_mhz"] * MHZ, p["T_ns"] * NS, p["lzt_steps"])
    if proto == "iswap":
        if p["T_ns"] is not None:
            return iswap_schedule(model.J, p["T_ns"] * NS)
        dchi0 = dchi[0] if isinstance(dchi, (list, tuple)) else dchi
        return iswap_schedule(model.J, (math.pi + dchi0 * math.pi) / (2 * model.J))
    l0, lT = _default_path(p)
    if p["T_ns"] is None:
        if p["gamma"] != 1.0:
            raise ConfigError("T_ns", "pi-phase durations apply to gamma = 1 schedules; give T_ns for ramps")
        sched = snac_schedule(l0, lT, p["N"], model)
    else:
        sched = jumping_schedule(l0, lT, p["N"], p["gamma"], p["T_ns"] * NS, model.kind)
    deltas = np.broadcast_to(np.asarray(dchi, dtype=float) * math.pi, (sched.N,))
    if np.any(deltas != 0):
        ledger = phase_ledger(sched, model.gap)
        if p["T_ns"] is not None:
            # uniform-time schedules are first brought to pi per segment
            sched = inject_phase_errors(sched, ledger, np.zeros(sched.N))
            ledger = phase_ledger(sched, model.gap)
        sched = inject_phase_errors(sched, ledger, deltas)
    return sched


@dataclass
class PointResult:
    params: dict
    metrics: dict
    trajectory: Trajectory | None = None

    def row(self) -> dict:
        out = {k: _csv_value(self.params.get(k)) for k in PARAM_COLUMNS}
        out.update({k: self.metrics.get(k) for k in RESULT_COLUMNS})
        return out


def _csv_value(v):
    if isinstance(v, (list, tuple)):
        return ";".join(f"{x:g}" if isinstance(x, (int, float)) else str(x) for x in v)
    return v


def simulate_point(p: dict, keep_trajectory: bool = False) -> PointResult:
    """Run one fully specified point and return its metrics."""
    model = control_model(p)
    sched = build_schedule(p, model)
    dec = decoherence_for(p)
    params = dict(p)
    if dec is not None:
        params["T1_us"] = [t * 1e6 for t in dec.T1]
        params["T2_us"] = [t * 1e6 for t in dec.T2]
    metrics: dict[str, Any] = {"T_total_ns": sched.T / NS}

    if model.dim == 2:
        l0, lT = _default_path(p)
        psi0 = model.eigenstates(l0)[1]
        target = model.eigenstates(lT)[1]
    else:
        psi0 = core.ket("10")
        target = core.ket("01")

    drive = sched
    dt = p["dt_ns"] * NS
    if p["noise_mode"] is not None:
        clean = sample_schedule(sched, model)
        cfg = NoiseConfig(float(p["snr_db"]), p["eta_ns"] * NS, int(p["seed"]), p["noise_mode"])
        drive = apply_gaussian_noise(clean, cfg)
        metrics["realized_snr_db"] = realized_snr(clean, drive)
        dt = None

    if dec is None:
        traj = propagate_unitary(drive, model, psi0, dt=dt, record=keep_trajectory)
    else:
        traj = propagate_lindblad(drive, model, psi0, dec, dt=dt, record=keep_trajectory)
        metrics["trace_drift"] = traj.diagnostics["trace_drift"]

    final = traj.final
    if p["shots"] is not None:
        tomo = tomography_1q if model.dim == 2 else tomography_2q
        final = tomo(final, p["shots"], p["seed"])
    if model.dim == 2:
        metrics["fidelity"] = core.fidelity(target, final)
        metrics["population"] = metrics["fidelity"] ** 2
        # conventional metric of the continuous ramp over the same path and time
        ramp = jumping_schedule(*_default_path(p), p["N"], 0.0, sched.T, model.kind)
        tm = traditional_metric_max(ramp, model, samples=50)
        metrics["adiabatic_rate"] = tm.angular_rate
        metrics["adiabatic_direct"] = tm.direct
    else:
        metrics["population"] = transferred_population(final, "Q4")
        metrics["fidelity"] = core.fidelity(target, final)
    return PointResult(params, metrics, traj if keep_trajectory else None)


def _run_point(args):
    p, keep = args
    return simulate_point(p, keep)


# ----------------------------------------------------------------------------
# Scenario runner
# ----------------------------------------------------------------------------


def _sort_key(row: dict):
    key = []
    for k in PARAM_COLUMNS:
        v = row.get(k)
        if v is None:
            key.append((0, 0.0, ""))
        elif isinstance(v, bool):
            key.append((1, float(v), ""))
        elif isinstance(v, (int, float)):
            key.append((1, float(v), ""))
        else:
            key.append((2, 0.0, str(v)))
    return tuple(key)


GROUP_EXCLUDE = {"seed"}


@dataclass
class ResultSet:
    scenario: str
    experiment: str
    rows: list[dict]
    metadata: dict
    summary: list[dict] = field(default_factory=list)
    derived: dict = field(default_factory=dict)
    checks: list[dict] = field(default_factory=list)
    trajectories: list[tuple[dict, Trajectory]] = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def select(self, **where) -> list[dict]:
        return [r for r in self.summary if all(_matches(r.get(k), v) for k, v in where.items())]

    def write_csv(self, path: str | Path) -> None:
        cols = list(PARAM_COLUMNS) + list(RESULT_COLUMNS)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for r in self.rows:
                w.writerow(["" if r.get(c) is None else _fmt(r.get(c)) for c in cols])

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "experiment": self.experiment,
            "metadata": self.metadata,
            "derived": self.derived,
            "checks": self.checks,
            "passed": self.passed,
            "summary": self.summary,
        }

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True))


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _matches(a, b) -> bool:
    if isinstance(a, float) or isinstance(b, float):
        try:
            return a is not None and b is not None and math.isclose(float(a), float(b), rel_tol=1e-9, abs_tol=1e-12)
        except (TypeError, ValueError):
            return False
    return a == b


def summarise(rows: Sequence[dict]) -> list[dict]:
    """Mean and standard deviation of every result column over seeds."""
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        key = tuple((k, r.get(k)) for k in PARAM_COLUMNS if k not in GROUP_EXCLUDE)
        groups.setdefault(key, []).append(r)
    out = []
    for key, members in groups.items():
        entry = dict(key)
        entry["n_seeds"] = len(members)
        for col in RESULT_COLUMNS:
            vals = [m[col] for m in members if m.get(col) is not None]
            if vals:
                arr = np.array(vals, dtype=float)
                entry[col] = float(arr.mean())
                entry[f"{col}_std"] = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
        out.append(entry)
    return out


def run_scenario(
    cfg: ScenarioConfig | Mapping[str, Any],
    out_dir: str | Path | None = None,
    threads: int = 1,
    keep_trajectories: bool | None = None,
) -> ResultSet:
    """Simulate every point of a scenario; write CSV/JSON/SVG when ``out_dir`` is given."""
    if not isinstance(cfg, ScenarioConfig):
        cfg = parse_config(cfg)
    points = expand_points(cfg)
    keep = cfg.experiment == "transfer" if keep_trajectories is None else keep_trajectories
    jobs = [(p, keep) for p in points]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_point, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    else:
        results = [_run_point(j) for j in jobs]
    rows = sorted((r.row() for r in results), key=_sort_key)
    meta = {
        "config_hash": cfg.config_hash,
        "code_version": __version__,
        "seeds": cfg.seeds,
        "n_points": len(points),
        "description": cfg.description,
    }
    rs = ResultSet(cfg.id, cfg.experiment, rows, meta)
    rs.summary = sorted(summarise(rows), key=_sort_key)
    rs.trajectories = [(r.params, r.trajectory) for r in results if r.trajectory is not None]
    rs.derived = DERIVED[cfg.experiment](rs, cfg)
    rs.checks = [evaluate_check(rs, c) for c in cfg.checks]
    if out_dir is not None:
        write_outputs(rs, cfg, Path(out_dir))
    return rs


# ----------------------------------------------------------------------------
# Derived quantities per experiment
# ----------------------------------------------------------------------------


def _series(rs: ResultSet, x: str, y: str, **where) -> tuple[np.ndarray, np.ndarray]:
    rows = sorted((r for r in rs.select(**where) if r.get(x) is not None and r.get(y) is not None), key=lambda r: r[x])
    return np.array([r[x] for r in rows], dtype=float), np.array([r[y] for r in rows], dtype=float)


def _derive_transfer(rs, cfg):
    return {}


def _derive_gamma(rs, cfg):
    g, f = _series(rs, "gamma", "fidelity")
    return {
        "best_gamma": float(g[np.argmax(f)]),
        "fidelity_gamma0": float(f[g == 0][0]) if np.any(g == 0) else None,
        "fidelity_gamma1": float(f[g == 1][0]) if np.any(g == 1) else None,
        "non_decreasing": bool(np.all(np.diff(f) >= -1e-9)),
    }


def _derive_chi(rs, cfg):
    d, f = _series(rs, "delta_chi_pi", "fidelity")
    chi = 1.0 + d
    dev = [abs(f[i] - f[j]) for i in range(len(d)) for j in range(len(d)) if i < j and abs(d[i] + d[j]) < 1e-9]
    return {"best_chi_pi": float(chi[np.argmax(f)]), "symmetry_max_dev": float(max(dev)) if dev else None}


def first_crossing(T: np.ndarray, pop: np.ndarray, threshold: float) -> float | None:
    idx = np.flatnonzero(pop >= threshold)
    return float(T[idx[0]]) if idx.size else None


def settling_time(T: np.ndarray, pop: np.ndarray, threshold: float) -> float | None:
    """Smallest grid time after which the population never drops below ``threshold``."""
    below = np.flatnonzero(pop < threshold)
    if below.size == 0:
        return float(T[0])
    if below[-1] + 1 >= len(T):
        return None
    return float(T[below[-1] + 1])


def _derive_time(rs, cfg):
    out = {}
    for g in sorted({r["gamma"] for r in rs.summary}):
        T, pop = _series(rs, "T_ns", "population", gamma=g)
        out[f"first_T_099_gamma{g:g}"] = first_crossing(T, pop, 0.99)
        out[f"settle_T_099_gamma{g:g}"] = settling_time(T, pop, 0.99)
        Tr, rate = _series(rs, "T_ns", "adiabatic_rate", gamma=g)
        if np.any(np.isclose(Tr, 400.0)):
            out["adiabatic_rate_at_400ns"] = float(rate[np.isclose(Tr, 400.0)][0])
    a, b = out.get("first_T_099_gamma0"), out.get("first_T_099_gamma1")
    out["speedup_ratio"] = a / b if a and b else None
    a, b = out.get("settle_T_099_gamma0"), out.get("first_T_099_gamma1")
    out["speedup_ratio_settled"] = a / b if a and b else None
    return out


def _derive_noise(rs, cfg):
    out = {}
    base = {**cfg.base, "noise_mode": None, "experiment": cfg.experiment, "model": cfg.model, "seed": 0}
    out["noiseless_fidelity"] = simulate_point(base).metrics["fidelity"]
    axis = cfg.sweeps[0].axis
    for mode in sorted({r["noise_mode"] for r in rs.summary if r.get("noise_mode")}):
        x, f = _series(rs, axis, "fidelity", noise_mode=mode)
        out[f"mean_fidelity_{mode}"] = dict(zip([f"{v:g}" for v in x], f.tolist()))
        _, snr = _series(rs, axis, "realized_snr_db", noise_mode=mode)
        out[f"mean_realized_snr_{mode}"] = dict(zip([f"{v:g}" for v in x], snr.tolist()))
    x, f = _series(rs, axis, "fidelity", noise_mode="calibrated")
    if x.size and axis == "eta_ns" and np.any(x == 1) and np.any(x == 10):
        out["eta10_below_eta1"] = bool(f[x == 10][0] < f[x == 1][0])
    if x.size and axis == "snr_db":
        hi = x >= 10
        out["min_fidelity_snr_ge_10"] = float(f[hi].min()) if hi.any() else None
        if np.any(x == 60):
            out["gap_to_noiseless_at_60db"] = float(abs(f[x == 60][0] - out["noiseless_fidelity"]))
    return out


def combined_decay_rate(dec: DecoherenceParams, qubit: int) -> float:
    """Rough population-decay rate ``1/(2 T1) + 1/(2 Tphi)`` of one qubit (1/s)."""
    t1, tphi = dec.T1[qubit], dec.Tphi[qubit]
    return 0.5 / t1 + (0.5 / tphi if math.isfinite(tphi) else 0.0)


def _derive_decoherence(rs, cfg):
    out = {}
    T, pop = _series(rs, "T_total_ns", "population", protocol="lzt")
    if T.size:
        k = int(np.argmax(pop))
        out.update(lzt_max=float(pop[k]), lzt_argmax_T_ns=float(T[k]))
    T, pop = _series(rs, "T_total_ns", "population", protocol="snac")
    if T.size:
        out.update(snac_min_T_ns=float(T[0]), snac_pop_at_min_T=float(pop[0]), snac_monotone=bool(np.all(np.diff(pop) < 0)))
        slope, _ = np.polyfit(T * NS, np.log(pop), 1)
        out["snac_fit_rate_per_s"] = float(-slope)
        dec = decoherence_for({**cfg.base, "model": cfg.model})
        if dec is not None:
            est = combined_decay_rate(dec, len(dec.T1) - 1)
            out["combined_rate_estimate_per_s"] = est
            out["fit_rate_rel_err"] = float(abs(-slope - est) / est)
    return out


def _derive_phase(rs, cfg):
    out = {}
    _, lzt = _series(rs, "delta_chi_pi", "population", protocol="lzt")
    if lzt.size:
        out.update(lzt_mean=float(lzt.mean()), lzt_spread=float(lzt.max() - lzt.min()))
    d, isw = _series(rs, "delta_chi_pi", "population", protocol="iswap")
    if isw.size:
        out["iswap_max_err"] = float(np.max(np.abs(isw - np.sin((math.pi + d * math.pi) / 2) ** 2)))
    d, snac = _series(rs, "delta_chi_pi", "population", protocol="snac")
    if snac.size:
        near = np.abs(d) <= 0.1 + 1e-9
        out["snac_min_within_0p1pi"] = float(snac[near].min()) if near.any() else None
        if isw.size == snac.size:
            out["snac_beats_iswap_within_0p1pi"] = bool(np.all(snac[near] >= isw[near] - 1e-12))
    return out


DERIVED = {
    "transfer": _derive_transfer,
    "gamma": _derive_gamma,
    "chi": _derive_chi,
    "time": _derive_time,
    "noise": _derive_noise,
    "decoherence_time": _derive_decoherence,
    "phase_robustness": _derive_phase,
}


def evaluate_check(rs: ResultSet, check: Mapping[str, Any]) -> dict:
    """Evaluate one ``{metric, where?, target+tol | min | max | equals}`` check."""
    metric = check["metric"]
    where = check.get("where")
    if where is not None:
        hits = rs.select(**where)
        value = hits[0].get(metric) if len(hits) == 1 else None
    else:
        value = rs.derived.get(metric)
    ok = value is not None
    if ok and "equals" in check:
        ok = _matches(value, check["equals"])
    if ok and "target" in check:
        ok = abs(float(value) - check["target"]) <= check.get("tol", 0.0)
    if ok and "min" in check:
        ok = float(value) >= check["min"]
    if ok and "max" in check:
        ok = float(value) <= check["max"]
    return {**dict(check), "value": value, "passed": bool(ok)}


# ----------------------------------------------------------------------------
# Output
# ----------------------------------------------------------------------------

PLOT_AXES = {
    "gamma": ("gamma", "fidelity"),
    "chi": ("delta_chi_pi", "fidelity"),
    "time": ("T_ns", "population"),
    "decoherence_time": ("T_total_ns", "population"),
    "phase_robustness": ("delta_chi_pi", "population"),
}


def write_outputs(rs: ResultSet, cfg: ScenarioConfig, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    rs.write_csv(out_dir / f"{rs.scenario}.csv")
    rs.write_json(out_dir / f"{rs.scenario}.json")
    for i, (params, traj) in enumerate(rs.trajectories):
        traj.to_csv(out_dir / f"{rs.scenario}_trajectory_{i}.csv")
    if cfg.experiment == "noise":
        x = cfg.sweeps[0].axis
        plot_svg(rs, out_dir / f"{rs.scenario}.svg", x, "fidelity", "noise_mode")
    elif cfg.experiment in PLOT_AXES:
        x, y = PLOT_AXES[cfg.experiment]
        group = "gamma" if cfg.experiment == "time" else "protocol"
        plot_svg(rs, out_dir / f"{rs.scenario}.svg", x, y, group)


def plot_svg(rs: ResultSet, path: Path, x: str, y: str, group: str) -> None:
    """Line chart of the seed-averaged ``y`` against ``x``, one line per ``group`` value."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "snacsim"
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for gval in sorted({r.get(group) for r in rs.summary}, key=str):
        xs, ys = _series(rs, x, y, **{group: gval})
        _, err = _series(rs, x, f"{y}_std", **{group: gval})
        ax.plot(xs, ys, marker="o", ms=3, label=f"{group}={gval}")
        if err.size == ys.size and np.any(err > 0):
            ax.fill_between(xs, ys - err, ys + err, alpha=0.2)
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    ax.set_title(rs.scenario)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# ----------------------------------------------------------------------------
# Built-in scenarios and sweep helpers
# ----------------------------------------------------------------------------


def builtin_scenarios() -> dict[str, dict]:
    text = resources.files("snacsim").joinpath("data/scenarios.yaml").read_text()
    return {s["id"]: s for s in yaml.safe_load(text)}


def load_config(path: str | Path) -> dict:
    data = yaml.safe_load(Path(path).read_text())
    if not isinstance(data, Mapping):
        raise ConfigError("<root>", "config file must contain a mapping")
    return dict(data)


def merge_config(base: Mapping[str, Any], override: Mapping[str, Any]) -> dict:
    out = copy.deepcopy(dict(base))
    for k, v in override.items():
        if isinstance(v, Mapping) and isinstance(out.get(k), Mapping):
            out[k] = merge_config(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def scenario(name: str, **overrides) -> ScenarioConfig:
    table = builtin_scenarios()
    if name not in table:
        raise KeyError(f"unknown scenario {name!r}; known: {sorted(table)}")
    return parse_config(merge_config(table[name], overrides))


def _sweep_cfg(base: ScenarioConfig | Mapping, experiment: str, axis: str, values: Iterable, **extra) -> ScenarioConfig:
    raw = base.raw if isinstance(base, ScenarioConfig) else dict(base)
    raw = {k: v for k, v in raw.items() if k not in ("sweep", "sweeps", "checks")}
    raw.update(experiment=experiment, sweep={"axis": axis, "values": list(values)}, **extra)
    return parse_config(raw)


def sweep_gamma(base, gammas: Iterable[float], **kw) -> ResultSet:
    gammas = list(gammas)
    bad = [g for g in gammas if not 0.0 <= g <= 1.0]
    if bad:
        raise ConfigError("sweep.values", f"jumping ratios outside [0, 1]: {bad}")
    return run_scenario(_sweep_cfg(base, "gamma", "gamma", gammas), **kw)


def sweep_chi(base, chis_pi: Iterable[float], **kw) -> ResultSet:
    chis_pi = list(chis_pi)
    if any(c <= 0 for c in chis_pi):
        raise ConfigError("sweep.values", "dynamic phases must be positive")
    return run_scenario(_sweep_cfg(base, "chi", "chi_pi", chis_pi), **kw)


def sweep_time(base, times_ns: Iterable[float], gammas: Sequence[float] = (0.0, 1.0), **kw) -> ResultSet:
    return run_scenario(_sweep_cfg(base, "time", "T_ns", times_ns, series={"gamma": list(gammas)}), **kw)


def sweep_noise(base, axis: str, values: Iterable[float], modes: Sequence[str] = ("calibrated", "literal"), **kw) -> ResultSet:
    if axis not in ("eta_ns", "snr_db"):
        raise ConfigError("sweep.axis", "noise sweeps run over eta_ns or snr_db")
    cfg = base if isinstance(base, ScenarioConfig) else parse_config(base)
    if len(cfg.seeds) < 20:
        raise ConfigError("seeds", "noise sweeps need at least 20 seeds per point")
    return run_scenario(_sweep_cfg(cfg, "noise", axis, values, series={"noise_mode": list(modes)}), **kw)


def sweep_decoherence_time(base, lzt_times_ns: Iterable[float], snac_N: Iterable[int], **kw) -> ResultSet:
    raw = dict(base.raw if isinstance(base, ScenarioConfig) else base)
    raw = {k: v for k, v in raw.items() if k not in ("sweep", "sweeps", "checks")}
    raw["experiment"] = "decoherence_time"
    raw["sweeps"] = [
        {"axis": "T_ns", "values": list(lzt_times_ns), "set": {"protocol": "lzt"}},
        {"axis": "N", "values": list(snac_N), "set": {"protocol": "snac", "T_ns": None}},
    ]
    return run_scenario(parse_config(raw), **kw)


def sweep_phase_robustness(base, delta_chis_pi: Iterable[float], lzt_T_ns: float = 88.0, **kw) -> ResultSet:
    raw = dict(base.raw if isinstance(base, ScenarioConfig) else base)
    raw = {k: v for k, v in raw.items() if k not in ("sweep", "sweeps", "series", "checks")}
    values = list(delta_chis_pi)
    raw["experiment"] = "phase_robustness"
    raw["sweeps"] = [
        {"axis": "delta_chi_pi", "values": values, "set": {"protocol": "snac", "T_ns": None}},
        {"axis": "delta_chi_pi", "values": values, "set": {"protocol": "iswap", "T_ns": None}},
        {"axis": "delta_chi_pi", "values": values, "set": {"protocol": "lzt", "T_ns": lzt_T_ns}},
    ]
    cfg = parse_config(raw)
    if cfg.base["decoherence"]:
        raise ConfigError("params.decoherence", "phase robustness is evaluated without decoherence")
    return run_scenario(cfg, **kw)
