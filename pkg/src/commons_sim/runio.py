"""File formats: scenario JSON, generations/agents CSV, summary, manifest, report."""
from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from . import __version__
from .agent import GaConfig
from .engine import GenerationRecord, RunResult, ScenarioConfig
from .knapsack import InvalidArgumentError, ProblemInstance, load_instance
from .metrics import (
    UtilityParams,
    consumer_series,
    cumulative,
    entropy_band_occupancy,
    exponential_utility,
    group_divide,
    linear_utility,
    max_resource_series,
    producer_series,
)

SCHEMA_VERSION = 1
GENERATIONS_CSV = "generations.csv"
AGENTS_CSV = "agents.csv"
SUMMARY_JSON = "summary.json"
MANIFEST_JSON = "manifest.json"
SCENARIO_JSON = "scenario.json"


class RunFileError(RuntimeError):
    pass


# -- canonical JSON ---------------------------------------------------------

def _canon(obj) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise InvalidArgumentError("non-finite float in canonical JSON")
        if obj.is_integer() and abs(obj) < 1e15:
            return str(int(obj))
        return format(obj, ".9g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_canon(x) for x in obj) + "]"
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(json.dumps(k) + ":" + _canon(v) for k, v in items) + "}"
    raise InvalidArgumentError(f"cannot canonicalise {type(obj).__name__}")


def canonical_json(obj) -> str:
    """Sorted keys, no whitespace, floats at 9 significant digits."""
    return _canon(obj)


def config_hash(scenario: dict) -> str:
    return hashlib.sha256(canonical_json(scenario).encode()).hexdigest()


# -- scenario files -------------------------------------------------------

def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    return {
        "agent_count": cfg.agent_count,
        "generations": cfg.generations,
        "instance": cfg.instance.to_dict(),
        "ga": asdict(cfg.ga),
        "master_seed": cfg.master_seed,
        "satisfaction_fractions": list(cfg.satisfaction_fractions),
        "accelerations": list(cfg.accelerations),
        "reserves": list(cfg.reserves),
        "halt_on_tragedy": cfg.halt_on_tragedy,
        "utility": asdict(cfg.utility),
    }


def scenario_from_dict(data: dict, base_dir: Optional[Path] = None) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise InvalidArgumentError("scenario: expected a JSON object")
    inst = data.get("instance", data.get("instance_ref"))
    if inst is None:
        raise InvalidArgumentError("scenario: missing field instance")
    if isinstance(inst, str):
        path = Path(inst)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        instance = load_instance(path)
    else:
        instance = ProblemInstance.from_dict(inst)
    required = ("agent_count", "generations", "master_seed", "satisfaction_fractions", "accelerations", "reserves")
    missing = [k for k in required if k not in data]
    if missing:
        raise InvalidArgumentError(f"scenario: missing field(s) {', '.join(missing)}")
    try:
        ga = GaConfig(**data.get("ga", {}))
        utility = UtilityParams(**data.get("utility", {}))
    except TypeError as exc:
        raise InvalidArgumentError(f"scenario: {exc}") from exc
    return ScenarioConfig(
        agent_count=int(data["agent_count"]),
        generations=int(data["generations"]),
        instance=instance,
        ga=ga,
        master_seed=int(data["master_seed"]),
        satisfaction_fractions=[float(s) for s in data["satisfaction_fractions"]],
        accelerations=[int(a) for a in data["accelerations"]],
        reserves=list(data["reserves"]),
        halt_on_tragedy=bool(data.get("halt_on_tragedy", False)),
        utility=utility,
    )


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return scenario_from_dict(data, path.parent)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- CSV ----------------------------------------------------------------------

def generations_header(item_count: int) -> list:
    return (
        ["generation"]
        + [f"consumed_r{i}" for i in range(1, item_count + 1)]
        + [f"cumulative_r{i}" for i in range(1, item_count + 1)]
        + ["entropy", "agents_at_optimum"]
    )


AGENTS_HEADER = ["generation", "agent_id", "value", "at_optimum", "bits"]


def write_generations_csv(records, item_count: int, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(generations_header(item_count))
        for r in records:
            w.writerow(
                [r.generation, *r.per_resource_consumed, *r.per_resource_cumulative, repr(r.entropy), r.agents_at_optimum]
            )


def write_agents_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGENTS_HEADER)
        for r in records:
            for j, (value, flag, bits) in enumerate(
                zip(r.per_agent_value, r.per_agent_at_optimum, r.per_agent_bits), start=1
            ):
                w.writerow([r.generation, j, repr(value), int(flag), "" if bits is None else "".join(map(str, bits))])


def _num(text: str):
    return int(text) if text.lstrip("-").isdigit() else float(text)


def read_records(run_dir) -> list:
    """Rebuild GenerationRecords from generations.csv and agents.csv."""
    run_dir = Path(run_dir)
    try:
        with open(run_dir / GENERATIONS_CSV, newline="") as fh:
            rows = list(csv.reader(fh))
        with open(run_dir / AGENTS_CSV, newline="") as fh:
            agent_rows = list(csv.reader(fh))
    except FileNotFoundError as exc:
        raise RunFileError(f"missing run file: {exc.filename}") from exc
    if not rows or rows[0][0] != "generation" or (len(rows[0]) - 3) % 2:
        raise RunFileError(f"{GENERATIONS_CSV}: unrecognised header")
    header = rows[0]
    m = (len(header) - 3) // 2
    if header != generations_header(m):
        raise RunFileError(f"{GENERATIONS_CSV}: unrecognised header")
    if not agent_rows or agent_rows[0] != AGENTS_HEADER:
        raise RunFileError(f"{AGENTS_CSV}: unrecognised header")
    per_gen: dict = {}
    for line, row in enumerate(agent_rows[1:], start=2):
        if len(row) != len(AGENTS_HEADER):
            raise RunFileError(f"{AGENTS_CSV}: line {line}: expected {len(AGENTS_HEADER)} columns")
        g, _, value, flag, bits = row
        per_gen.setdefault(int(g), []).append(
            (float(value), flag == "1", tuple(int(c) for c in bits) if bits else None)
        )
    records = []
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise RunFileError(f"{GENERATIONS_CSV}: line {line}: expected {len(header)} columns, got {len(row)}")
        try:
            g = int(row[0])
            agents = per_gen.get(g, [])
            records.append(
                GenerationRecord(
                    generation=g,
                    per_resource_consumed=[_num(x) for x in row[1 : 1 + m]],
                    per_resource_cumulative=[_num(x) for x in row[1 + m : 1 + 2 * m]],
                    entropy=float(row[1 + 2 * m]),
                    agents_at_optimum=int(row[2 + 2 * m]),
                    per_agent_value=[a[0] for a in agents],
                    per_agent_at_optimum=[a[1] for a in agents],
                    per_agent_bits=[a[2] for a in agents],
                )
            )
        except ValueError as exc:
            raise RunFileError(f"{GENERATIONS_CSV}: line {line}: {exc}") from exc
    return records


# -- run outputs ------------------------------------------------------------

def _ranges(generations) -> list:
    out = []
    for g in generations:
        if out and out[-1][1] == g - 1:
            out[-1][1] = g
        else:
            out.append([g, g])
    return out


def _expand(ranges) -> list:
    return [g for lo, hi in ranges for g in range(lo, hi + 1)]


def run_summary(result: RunResult, scenario: dict) -> dict:
    ledger = result.ledger
    i_max = max(range(len(ledger.cumulative)), key=lambda i: (ledger.cumulative[i], -i)) if result.records else None
    return {
        "schema_version": SCHEMA_VERSION,
        "master_seed": result.config.master_seed,
        "config_hash": config_hash(scenario),
        "generations_run": len(result.records),
        "optimal_value": result.optimal_value,
        "optimal_bits": "".join(map(str, result.optimal_bits)),
        "crossing_generation": list(ledger.crossing_generation),
        "final_ledger": {"cumulative": list(ledger.cumulative), "reserves": list(ledger.reserves)},
        "max_resource": None if i_max is None else i_max + 1,
        "agents_at_optimum_final": result.records[-1].agents_at_optimum if result.records else 0,
        "optimum_generation_ranges": [_ranges(g) for g in result.optimum_generations],
    }


@dataclass
class RunManifest:
    config_hash: str
    master_seed: int
    tool_version: str
    started_at: str
    finished_at: str
    output_paths: list = field(default_factory=list)
    scenario_file: str = SCENARIO_JSON
    schema_version: int = SCHEMA_VERSION
    rerun: str = ""


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_run(result: RunResult, out_dir, started_at: str) -> RunManifest:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scenario = scenario_to_dict(result.config)
    m = result.config.instance.item_count
    (out / SCENARIO_JSON).write_text(dump_json(scenario))
    write_generations_csv(result.records, m, out / GENERATIONS_CSV)
    write_agents_csv(result.records, out / AGENTS_CSV)
    (out / SUMMARY_JSON).write_text(dump_json(run_summary(result, scenario)))
    manifest = RunManifest(
        config_hash=config_hash(scenario),
        master_seed=result.config.master_seed,
        tool_version=__version__,
        started_at=started_at,
        finished_at=now_iso(),
        output_paths=[SCENARIO_JSON, GENERATIONS_CSV, AGENTS_CSV, SUMMARY_JSON, MANIFEST_JSON],
        rerun=f"commons-sim simulate {SCENARIO_JSON} --out <dir>",
    )
    (out / MANIFEST_JSON).write_text(dump_json(asdict(manifest)))
    return manifest


def _load_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise RunFileError(f"missing run file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise RunFileError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def verify_manifest(run_dir) -> bool:
    run_dir = Path(run_dir)
    manifest = _load_json(run_dir / MANIFEST_JSON)
    scenario = _load_json(run_dir / manifest.get("scenario_file", SCENARIO_JSON))
    return config_hash(scenario) == manifest["config_hash"]


# -- report ---------------------------------------------------------------------

def build_report(run_dir) -> dict:
    run_dir = Path(run_dir)
    summary = _load_json(run_dir / SUMMARY_JSON)
    cfg = load_scenario(run_dir / SCENARIO_JSON)
    records = read_records(run_dir)
    n_g = cfg.generations
    opt_sets = [_expand(r) for r in summary.get("optimum_generation_ranges", [])]
    report = {
        "schema_version": SCHEMA_VERSION,
        "config_hash": summary.get("config_hash"),
        "master_seed": summary.get("master_seed"),
        "generations": [r.generation for r in records],
        "entropy": [r.entropy for r in records],
        "entropy_band_0.5_0.8": entropy_band_occupancy([r.entropy for r in records]),
        "max_resource": None,
        "agents": [],
        "divide": {},
        "consumer_utility": [],
        "consumer_utility_cumulative": [],
        "producer_utility": [],
        "producer_utility_cumulative": [],
    }
    if not records:
        return report
    i_max, series = max_resource_series(records)
    params = cfg.utility.resolved(n_g, cfg.reserves[i_max])
    lin = [linear_utility(s, params) for s in opt_sets]
    exp = [exponential_utility(s, n_g, params) for s in opt_sets]
    report["max_resource"] = i_max + 1
    report["utility_params"] = asdict(params)
    report["agents"] = [
        {
            "agent_id": j,
            "first_optimum_generation": s[0] if s else None,
            "generations_at_optimum": len(s),
            "linear_utility": u_lin,
            "exponential_utility": u_exp,
        }
        for j, (s, u_lin, u_exp) in enumerate(zip(opt_sets, lin, exp), start=1)
    ]
    if len(opt_sets) >= 2:
        for label, utilities in (("linear", lin), ("exponential", exp)):
            for split_name, frac in (("50_50", 0.5), ("20_80", 0.8)):
                d = group_divide(utilities, frac)
                report["divide"][f"{label}_{split_name}"] = asdict(d)
    cons = consumer_series(series, params)
    prod = producer_series(series, params)
    report["max_resource_series"] = series
    report["consumer_utility"] = cons
    report["consumer_utility_cumulative"] = cumulative(cons)
    report["producer_utility"] = prod
    report["producer_utility_cumulative"] = cumulative(prod)
    return report


def write_report(report: dict, run_dir) -> list:
    run_dir = Path(run_dir)
    (run_dir / "report.json").write_text(dump_json(report))
    with open(run_dir / "report_generations.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["generation", "entropy", "max_resource_consumed", "consumer_utility",
                    "consumer_utility_cumulative", "producer_utility", "producer_utility_cumulative"])
        rows = zip(
            report["generations"],
            report["entropy"],
            report.get("max_resource_series", []),
            report["consumer_utility"],
            report["consumer_utility_cumulative"],
            report["producer_utility"],
            report["producer_utility_cumulative"],
        )
        for row in rows:
            w.writerow([row[0], *(repr(x) for x in row[1:])])
    with open(run_dir / "report_agents.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["agent_id", "first_optimum_generation", "generations_at_optimum",
                    "linear_utility", "exponential_utility"])
        for a in report["agents"]:
            first = "" if a["first_optimum_generation"] is None else a["first_optimum_generation"]
            w.writerow([a["agent_id"], first, a["generations_at_optimum"],
                        repr(a["linear_utility"]), repr(a["exponential_utility"])])
    return ["report.json", "report_generations.csv", "report_agents.csv"]
