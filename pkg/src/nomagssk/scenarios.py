"""Scenario documents: parse, validate, execute, serialize.

A scenario is a JSON document naming one sweep or analysis request.  The
schema is documented in the README; defaults (beta = 0.4, gain targets,
MIMO-NOMA m_t = 2, trials = 1e5) are applied during parsing and echoed in
the parsed object.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import analysis
from .errors import ScenarioParseError, ScenarioValidationError, SimulationError
from .montecarlo import (
    Metric,
    SweepResult,
    SweepSpec,
    bound_channel,
    default_gain_targets,
    run_capacity_vs_antennas,
    run_sweep,
)
from .system import Scheme, SystemConfig, build_codebook

SWEEP_CSV_HEADER = "snr_db,scheme,metric,value,stderr,trials,seed"
CAPACITY_CSV_HEADER = "m_t,scheme,metric,value"

DEFAULT_TRIALS = 100_000
DEFAULT_SEED = 20170401
DEFAULT_MIMO_M_T = 2

_KIND_TO_METRIC = {
    "ber": Metric.CELL_EDGE_BER,
    "se": Metric.SPECTRAL_EFFICIENCY,
    "ee": Metric.ENERGY_EFFICIENCY,
    "capacity": Metric.CAPACITY_VS_ANTENNAS,
}


@dataclass
class Scenario:
    name: str
    kind: str                       # ber | se | ee | capacity | bound | table1
    specs: list                     # SweepSpec per scheme (sweep kinds)
    output: str = None
    fmt: str = "csv"
    # capacity / bound extras
    capacity_config: SystemConfig = None
    snr_db: float = None
    m_t_grid: tuple = ()
    seed: int = DEFAULT_SEED
    bound_params: dict = field(default_factory=dict)
    echo: dict = field(default_factory=dict)


def _snr_grid(raw) -> tuple:
    if isinstance(raw, dict):
        try:
            start, stop, step = float(raw["start"]), float(raw["stop"]), float(raw["step"])
        except KeyError as exc:
            raise ScenarioParseError(f"snr_db range needs start/stop/step: {exc}")
        if step <= 0 or stop < start:
            raise ScenarioValidationError("snr_db range must be increasing")
        grid, v = [], start
        while v <= stop + 1e-9:
            grid.append(round(v, 9))
            v += step
        return tuple(grid)
    if isinstance(raw, (int, float)):
        return (float(raw),)
    return tuple(float(v) for v in raw)


def _build_config(scheme: Scheme, system: dict) -> SystemConfig:
    n = int(system.get("n_noma", 2))
    k = int(system.get("k_spatial", 1))
    if scheme is Scheme.MIMO_NOMA:
        # every user rides the power domain; cell-edge folds into the SIC chain
        return SystemConfig(
            m_t=int(system.get("mimo_m_t", DEFAULT_MIMO_M_T)),
            m_a=int(system.get("mimo_m_t", DEFAULT_MIMO_M_T)),
            m_r=int(system.get("m_r", 4)),
            n_noma=n + k, k_spatial=0,
            total_power=float(system.get("total_power", 1.0)),
            mod_order=int(system.get("mod_order", 4)),
            ftpa_beta=float(system.get("ftpa_beta", 0.4)),
            scheme=scheme)
    m_a = 1 if scheme is Scheme.NOMA_SSK else int(system.get("m_a", 2))
    return SystemConfig(
        m_t=int(system.get("m_t", 4)), m_a=m_a,
        m_r=int(system.get("m_r", 4)),
        n_noma=n, k_spatial=k,
        total_power=float(system.get("total_power", 1.0)),
        mod_order=int(system.get("mod_order", 4)),
        ftpa_beta=float(system.get("ftpa_beta", 0.4)),
        scheme=scheme)


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document, applying documented defaults."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}")
    if not isinstance(doc, dict):
        raise ScenarioParseError("scenario document must be a JSON object")
    name = doc.get("name", "")
    if not name:
        raise ScenarioValidationError("scenario needs a non-empty 'name'")
    kind = doc.get("kind")
    if kind not in ("ber", "se", "ee", "capacity", "bound", "table1"):
        raise ScenarioValidationError(f"unknown scenario kind {kind!r}")
    fmt = doc.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ScenarioValidationError(f"format must be csv or json, got {fmt!r}")
    output = doc.get("output")
    seed = int(doc.get("seed", DEFAULT_SEED))

    scenario = Scenario(name=name, kind=kind, specs=[], output=output,
                        fmt=fmt, seed=seed)
    system = doc.get("system", {})

    if kind == "table1":
        return scenario

    if kind == "bound":
        params = {"m_t": int(doc.get("m_t", system.get("m_t", 4))),
                  "m_a": int(doc.get("m_a", system.get("m_a", 1))),
                  "m_r": int(doc.get("m_r", system.get("m_r", 4))),
                  "snr_db": float(doc.get("snr_db", 10.0)),
                  "gain": float(doc.get("gain", 0.4)),
                  "seed": seed}
        try:
            build_codebook(params["m_t"], params["m_a"])
        except SimulationError as exc:
            raise ScenarioValidationError(str(exc))
        scenario.bound_params = params
        return scenario

    schemes = doc.get("schemes", [doc.get("scheme", "noma_gssk")])
    try:
        schemes = [Scheme(s) for s in schemes]
    except ValueError as exc:
        raise ScenarioValidationError(f"unknown scheme: {exc}")

    if kind == "capacity":
        scheme_cfg = _build_config(Scheme.NOMA_GSSK, system)
        grid = doc.get("m_t_grid", [2, 4, 8, 16])
        scenario.capacity_config = scheme_cfg
        scenario.m_t_grid = tuple(int(m) for m in grid)
        scenario.snr_db = float(doc.get("snr_db", 20.0))
        scenario.echo["n_noma"] = scheme_cfg.n_noma
        return scenario

    metric = _KIND_TO_METRIC[kind]
    snr_grid = _snr_grid(doc.get("snr_db", {"start": 0, "stop": 20, "step": 4}))
    trials = int(doc.get("trials", DEFAULT_TRIALS))
    n = int(system.get("n_noma", 2))
    k = int(system.get("k_spatial", 1))
    gain_targets = system.get("gain_targets")
    if gain_targets is None:
        gain_targets = default_gain_targets(n, k)
    alphas = system.get("alphas")
    for scheme in schemes:
        try:
            cfg = _build_config(scheme, system)
            spec = SweepSpec(
                config=cfg,
                snr_grid_db=snr_grid,
                trials_per_point=trials,
                master_seed=seed,
                metric=metric,
                gain_targets=tuple(gain_targets),
                alphas=tuple(alphas) if alphas else None,
                constant_envelope=bool(doc.get("constant_envelope", False)),
                fixed_channel=bool(doc.get("fixed_channel", False)),
                ee_accounting=doc.get("ee_accounting", "spent"),
                noma_set_knowledge=doc.get("noma_set_knowledge", "detect"),
            )
        except SimulationError as exc:
            raise ScenarioValidationError(f"scheme {scheme.value}: {exc}")
        scenario.specs.append(spec)
        if scheme is not Scheme.MIMO_NOMA:
            scenario.echo.setdefault("n_h", {})[scheme.value] = \
                build_codebook(cfg.m_t, cfg.m_a).n_h
    scenario.echo.update({"trials": trials, "seed": seed,
                          "gain_targets": list(gain_targets)})
    return scenario


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# ---------------------------------------------------------------------------
# Execution and serialization


def _fmt(value: float, scientific: bool = False) -> str:
    return f"{value:.10e}" if scientific else f"{value:.10g}"


def sweep_results_to_csv(results: list) -> str:
    """One row per (scheme, SNR point); schema fixed for regression use."""
    lines = [SWEEP_CSV_HEADER]
    for res in results:
        meta = res.metadata
        sci = meta["metric"] == Metric.CELL_EDGE_BER.value
        for p in res.points:
            lines.append(",".join([
                _fmt(p.snr_db), meta["scheme"], meta["metric"],
                _fmt(p.value, scientific=sci), _fmt(p.stderr, scientific=sci),
                str(p.trials), str(meta["seed"]),
            ]))
    return "\n".join(lines) + "\n"


def sweep_results_to_json(results: list) -> str:
    return json.dumps([r.to_dict() for r in results], indent=2) + "\n"


def sweep_results_from_json(text: str) -> list:
    return [SweepResult.from_dict(d) for d in json.loads(text)]


def capacity_rows_to_csv(rows: list) -> str:
    lines = [CAPACITY_CSV_HEADER]
    for r in rows:
        lines.append(",".join([str(r["m_t"]), r["scheme"], "capacity_bps",
                               _fmt(r["value"])]))
    return "\n".join(lines) + "\n"


def evaluate_bound(params: dict) -> dict:
    """Eq-style closed-form set-detection BER bound for a seeded channel."""
    cb = build_codebook(params["m_t"], params["m_a"])
    ch = bound_channel(params["m_r"], params["m_t"], params["seed"],
                       gain=params["gain"])
    snr = 10.0 ** (params["snr_db"] / 10.0)
    return {
        "m_t": params["m_t"], "m_a": params["m_a"], "m_r": params["m_r"],
        "snr_db": params["snr_db"], "gain": params["gain"], "seed": params["seed"],
        "n_h": cb.n_h, "b_h": cb.b_h,
        "bound_mrc": analysis.ber_union_bound(cb, ch, snr, params["m_a"], "mrc"),
        "bound_per_branch": analysis.ber_union_bound(
            cb, ch, snr, params["m_a"], "per_branch"),
    }


def run_scenario(scenario: Scenario, threads=None) -> dict:
    """Execute a parsed scenario; returns {'text': serialized, 'data': payload}."""
    if scenario.kind == "table1":
        rows = analysis.table1_report()
        return {"text": format_table1(rows), "data": rows}
    if scenario.kind == "bound":
        data = evaluate_bound(scenario.bound_params)
        return {"text": json.dumps(data, indent=2) + "\n", "data": data}
    if scenario.kind == "capacity":
        rows = run_capacity_vs_antennas(
            scenario.capacity_config, 10.0 ** (scenario.snr_db / 10.0),
            scenario.m_t_grid, master_seed=scenario.seed)
        if scenario.fmt == "csv":
            return {"text": capacity_rows_to_csv(rows), "data": rows}
        return {"text": json.dumps(rows, indent=2) + "\n", "data": rows}
    results = [run_sweep(spec, threads=threads) for spec in scenario.specs]
    if scenario.fmt == "csv":
        text = sweep_results_to_csv(results)
    else:
        text = sweep_results_to_json(results)
    return {"text": text, "data": [r.to_dict() for r in results]}


def format_table1(rows: list) -> str:
    lines = ["scheme complexity regression vs published table", ""]
    for i, row in enumerate(rows, start=1):
        args = row["args"]
        lines.append(
            f"row {i}: N+K={args['n']} K={args['k']} Mr={args['m_r']} "
            f"Mt(noma)={args['m_t_noma']} Mt(gssk)={args['m_t_gssk']} "
            f"Ma={args['m_a']} M={args['m']}")
        for scheme, cell in row["schemes"].items():
            flag = "MATCH" if cell["match"] else "MISMATCH"
            lines.append(
                f"  {scheme:<10} printed={cell['printed']:>10,} "
                f"verbatim={cell['verbatim']:>14,.1f} "
                f"corrected={cell['corrected']:>14,.1f}  {flag}")
        lines.append("")
    return "\n".join(lines)
