"""Experiment runner: config ingestion, seeded drops, dispatch, persistence.

A run config is a JSON document whose sections mirror the parameter
dataclasses field-for-field (dB fields suffixed _db, watts _w). Each drop d
derives its scenario seed as base_seed XOR d, generates a topology, builds the
coefficient tensor once, and hands the identical tensor to every requested
algorithm, so cross-algorithm comparisons are paired. Records are emitted in a
fixed column order; identical configs produce byte-identical files (wall-clock
timing is recorded only when `record_timing` is set, and is zero otherwise).
"""

import csv
import io
import json
import time
from dataclasses import dataclass, fields, replace

import numpy as np

from .defaults import table3_defaults
from .matching import (EvaluationContext, SolutionReport, evaluate, exhaustive_search,
                       llsf_assoc, nos_assoc, recp_init, trimsm, tsap_assoc)
from .netmodel import (ConfigError, FrameConfig, ScenarioParams, build_correlation,
                       generate_topology)
from .powerctl import SolverSettings, make_qos
from .powermodel import (BsPowerConfig, SubComponentSpec, SystemPowerParams,
                         network_power)

ALGORITHMS = ("trimsm-slmdb", "trimsm-fipc", "trimsm-qopc", "trimsm-eipc",
              "recp", "llsf", "tsap", "nos", "exhaustive")

SWEEPABLE = ("M", "K", "N", "L", "area_side", "r_min_bps")

RECORD_FIELDS = (
    "sweep_parameter", "sweep_value", "drop_index", "drop_seed", "algorithm",
    "feasible", "ee_bits_per_joule", "sum_rate_bps", "total_power_w",
    "ubs_active_power_w", "ubs_sleep_power_w", "fronthaul_power_w",
    "edge_cloud_power_w", "ue_power_w", "active_ubs_count", "ue_count",
    "qos_violation_count", "swap_count", "slm_iterations", "wall_time_ms",
)

AGGREGATE_FIELDS = (
    "sweep_parameter", "sweep_value", "algorithm", "drops", "feasible_drops",
    "infeasible_drops", "ee_mean", "ee_median", "active_ubs_mean",
    "qos_violation_pct", "swap_count_mean", "ee_cdf",
)


@dataclass(frozen=True)
class ResultRecord:
    sweep_parameter: str
    sweep_value: float
    drop_index: int
    drop_seed: int
    algorithm: str
    feasible: bool
    ee_bits_per_joule: float
    sum_rate_bps: float
    total_power_w: float
    ubs_active_power_w: float
    ubs_sleep_power_w: float
    fronthaul_power_w: float
    edge_cloud_power_w: float
    ue_power_w: float
    active_ubs_count: int
    ue_count: int
    qos_violation_count: int
    swap_count: int
    slm_iterations: int
    wall_time_ms: float


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioParams
    frame: FrameConfig
    bs_config: BsPowerConfig
    system: SystemPowerParams
    r_min_bps: float
    p_max_w: float
    settings: SolverSettings
    algorithms: tuple
    drops: int
    base_seed: int
    record_timing: bool = False
    sweep_parameter: str | None = None
    sweep_values: tuple = ()


def _merge(base: dict, overrides: dict, path: str = "") -> dict:
    out = dict(base)
    for key, val in overrides.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and isinstance(val, dict):
            out[key] = _merge(base[key], val, where)
        else:
            out[key] = val
    return out


def _build_dataclass(cls, section: dict, name: str):
    allowed = {f.name for f in fields(cls)}
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {name}: {sorted(unknown)}")
    return cls(**section)


def load_config(source) -> RunConfig:
    """Parse a config dict or JSON file path, filling gaps from the defaults."""
    if isinstance(source, (str, bytes)):
        with open(source) as fh:
            raw = json.load(fh)
    else:
        raw = source
    raw = dict(raw or {})
    sweep_section = raw.pop("sweep", None)
    merged = _merge(table3_defaults(), raw)

    scenario = _build_dataclass(ScenarioParams, merged["scenario"], "scenario")
    frame = _build_dataclass(FrameConfig, merged["frame"], "frame")
    bs_raw = dict(merged["power"]["bs"])
    bs_raw["rf_components"] = tuple(
        SubComponentSpec(**c) for c in bs_raw["rf_components"])
    bs_raw["bbu_components"] = tuple(
        SubComponentSpec(**c) for c in bs_raw["bbu_components"])
    bs_config = _build_dataclass(BsPowerConfig, bs_raw, "power.bs")
    system = _build_dataclass(SystemPowerParams, merged["power"]["system"], "power.system")
    settings = _build_dataclass(SolverSettings, merged["solver"], "solver")

    algorithms = merged["algorithm"]
    if isinstance(algorithms, str):
        algorithms = [algorithms]
    for alg in algorithms:
        if alg not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {alg!r}; choose from {ALGORITHMS}")

    qos_raw = merged["qos"]
    drops = int(merged["drops"])
    if drops < 1:
        raise ConfigError("drops must be >= 1")
    if scenario.K > frame.tau_p:
        raise ConfigError(
            f"K={scenario.K} exceeds tau_p={frame.tau_p}; orthogonal pilots need K <= tau_p")

    sweep_parameter = None
    sweep_values = ()
    if sweep_section:
        sweep_parameter = sweep_section.get("parameter")
        if sweep_parameter not in SWEEPABLE:
            raise ConfigError(f"sweep parameter must be one of {SWEEPABLE}")
        sweep_values = tuple(sweep_section.get("values", ()))
        if not sweep_values:
            raise ConfigError("sweep.values must be nonempty")

    return RunConfig(
        scenario=scenario, frame=frame, bs_config=bs_config, system=system,
        r_min_bps=float(qos_raw["r_min_bps"]), p_max_w=float(qos_raw["p_max_w"]),
        settings=settings, algorithms=tuple(algorithms), drops=drops,
        base_seed=int(merged["base_seed"]),
        record_timing=bool(merged["record_timing"]),
        sweep_parameter=sweep_parameter, sweep_values=sweep_values)


def _apply_sweep(config: RunConfig, value) -> RunConfig:
    param = config.sweep_parameter
    if param == "r_min_bps":
        return replace(config, r_min_bps=float(value))
    scen = config.scenario
    kwargs = {param: type(getattr(scen, param))(value)}
    if param == "M" and scen.L > value:
        kwargs["L"] = int(value)
    return replace(config, scenario=replace(scen, **kwargs))


def _make_context(config: RunConfig, drop_seed: int) -> EvaluationContext:
    if config.scenario.K > config.frame.tau_p:
        raise ConfigError(
            f"K={config.scenario.K} exceeds tau_p={config.frame.tau_p}; "
            "orthogonal pilots need K <= tau_p")
    scen = replace(config.scenario, seed=drop_seed)
    topo = generate_topology(scen)
    corr = build_correlation(topo, config.frame)
    from .statistics import mmse_statistics
    tensor = mmse_statistics(corr, config.frame)
    qos = make_qos(config.r_min_bps, scen.K, config.frame, config.p_max_w)
    return EvaluationContext(scenario=scen, frame=config.frame, corr=corr,
                             tensor=tensor, bs_config=config.bs_config,
                             system=config.system, qos=qos, settings=config.settings)


def _dispatch(algorithm: str, ctx: EvaluationContext) -> tuple[SolutionReport, EvaluationContext]:
    if algorithm.startswith("trimsm-"):
        return trimsm(ctx, algorithm.split("-", 1)[1]), ctx
    if algorithm == "nos":
        no_sleep_ctx = ctx.clone(no_sleep=True)
        return nos_assoc(no_sleep_ctx), no_sleep_ctx
    if algorithm == "exhaustive":
        return exhaustive_search(ctx), ctx
    if algorithm == "recp":
        assoc = recp_init(ctx.corr, ctx.scenario, ctx.settings.recp_delta_percent)
    elif algorithm == "llsf":
        assoc = llsf_assoc(ctx.corr, ctx.scenario)
    elif algorithm == "tsap":
        assoc = tsap_assoc(ctx.corr, ctx.scenario)
    else:
        raise ConfigError(f"unknown algorithm {algorithm!r}")
    ev = evaluate(assoc, "slmdb", ctx)
    report = SolutionReport(matching=assoc, power=ev.power, ee=ev.ee, swap_count=0,
                            evaluation_count=1, stable=False,
                            infeasible=not ev.qos_ok)
    return report, ctx


def _record(config: RunConfig, report: SolutionReport, ctx: EvaluationContext,
            algorithm: str, drop_index: int, drop_seed: int,
            sweep_value: float, wall_ms: float) -> ResultRecord:
    form = ctx.form_for(report.matching)
    breakdown = network_power(report.power.p, report.power.rates,
                              report.matching, form)
    sum_rate = float(np.sum(report.power.rates))
    qos = ctx.qos
    slack = ctx.settings.qos_rate_rtol * qos.r_min_bps
    violations = int(np.sum(report.power.rates < qos.r_min_bps - slack))
    active = ctx.scenario.M if ctx.no_sleep else report.matching.active_count
    return ResultRecord(
        sweep_parameter=config.sweep_parameter or "",
        sweep_value=float(sweep_value) if config.sweep_parameter else 0.0,
        drop_index=drop_index, drop_seed=drop_seed, algorithm=algorithm,
        feasible=not report.infeasible,
        ee_bits_per_joule=sum_rate / breakdown.total_w,
        sum_rate_bps=sum_rate, total_power_w=breakdown.total_w,
        ubs_active_power_w=breakdown.ubs_active_w,
        ubs_sleep_power_w=breakdown.ubs_sleep_w,
        fronthaul_power_w=breakdown.fronthaul_w,
        edge_cloud_power_w=breakdown.edge_cloud_w, ue_power_w=breakdown.ue_w,
        active_ubs_count=active, ue_count=ctx.scenario.K,
        qos_violation_count=violations,
        swap_count=report.swap_count,
        slm_iterations=report.power.diagnostics.slm_iterations,
        wall_time_ms=wall_ms if config.record_timing else 0.0)


def run(config: RunConfig, sweep_value: float = 0.0) -> list:
    """Execute all drops and algorithms for one parameter point."""
    records = []
    for d in range(config.drops):
        drop_seed = config.base_seed ^ d
        ctx = _make_context(config, drop_seed)
        for algorithm in config.algorithms:
            if algorithm == "exhaustive" and ctx.scenario.M * ctx.scenario.K > 16:
                raise ConfigError("exhaustive search guard: M*K must be <= 16")
            t0 = time.perf_counter()
            report, used_ctx = _dispatch(algorithm, ctx)
            wall_ms = (time.perf_counter() - t0) * 1e3
            records.append(_record(config, report, used_ctx, algorithm, d,
                                   drop_seed, sweep_value, wall_ms))
    return records


def sweep(config: RunConfig) -> tuple[list, list]:
    """Run every sweep point; returns (records, aggregate rows)."""
    if not config.sweep_parameter:
        raise ConfigError("config has no sweep section")
    records = []
    for value in config.sweep_values:
        point = _apply_sweep(config, value)
        records.extend(run(point, sweep_value=value))
    return records, aggregate(records)


def aggregate(records: list) -> list:
    """Per (sweep value, algorithm): EE statistics over feasible drops, the
    sorted EE list (CDF support), activity and violation summaries."""
    keys = []
    for r in records:
        key = (r.sweep_value, r.algorithm)
        if key not in keys:
            keys.append(key)
    rows = []
    for value, algorithm in keys:
        group = [r for r in records if (r.sweep_value, r.algorithm) == (value, algorithm)]
        feasible = [r for r in group if r.feasible]
        ees = sorted(r.ee_bits_per_joule for r in feasible)
        total_ues = sum(r.ue_count for r in group)
        violations = sum(r.qos_violation_count for r in group)
        rows.append({
            "sweep_parameter": group[0].sweep_parameter,
            "sweep_value": value,
            "algorithm": algorithm,
            "drops": len(group),
            "feasible_drops": len(feasible),
            "infeasible_drops": len(group) - len(feasible),
            "ee_mean": float(np.mean(ees)) if ees else float("nan"),
            "ee_median": float(np.median(ees)) if ees else float("nan"),
            "active_ubs_mean": float(np.mean([r.active_ubs_count for r in group])),
            "qos_violation_pct": 100.0 * violations / total_ues if total_ues else 0.0,
            "swap_count_mean": float(np.mean([r.swap_count for r in group])),
            "ee_cdf": ";".join(repr(e) for e in ees),
        })
    return rows


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit(records: list, fmt: str, path=None) -> str:
    """Serialize run records (csv or json); returns the text, optionally saved."""
    rows = [{name: getattr(r, name) for name in RECORD_FIELDS} for r in records]
    return _emit_rows(rows, RECORD_FIELDS, fmt, path)


def emit_aggregates(rows: list, fmt: str, path=None) -> str:
    return _emit_rows(rows, AGGREGATE_FIELDS, fmt, path)


def _emit_rows(rows: list, header, fmt: str, path) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(row[name]) for name in header])
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        raise ConfigError(f"unknown output format {fmt!r}")
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def read_records(path: str) -> list:
    """Round-trip loader for emitted CSV record files."""
    with open(path) as fh:
        reader = csv.DictReader(fh)
        out = []
        for row in reader:
            kwargs = {}
            for f in fields(ResultRecord):
                raw = row[f.name]
                tname = f.type if isinstance(f.type, str) else f.type.__name__
                if tname == "bool":
                    kwargs[f.name] = raw == "true"
                elif tname == "int":
                    kwargs[f.name] = int(raw)
                elif tname == "float":
                    kwargs[f.name] = float(raw)
                else:
                    kwargs[f.name] = raw
            out.append(ResultRecord(**kwargs))
    return out
