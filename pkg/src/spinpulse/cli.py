"""Command-line front door.

Every command reads a JSON run-config document with a versioned schema;
unknown keys are rejected so a typo cannot silently corrupt a
hundreds-of-pulses run.  Outputs are a JSON run report plus CSV tables
ready for plotting; reruns with the same config and seed are byte-identical.

Config document (version 1):

    {
      "version": 1,
      "chain":  {"n_qubits": 200, "larmor_spacing": 100.0,
                 "base_larmor": 1000.0, "coupling": 1.0, "cutoff": 1e-6},
      "gate":   {"type": "cn", "rabi": 0.14, "equal_epsilon": false},
      "engine": {"kind": "perturbative", "max_qubits": 14,
                 "step": null, "norm_tol": 1e-9},
      "report": {"doubled_probabilities": true, "trace": false},
      "seed": 0,
      "jitter": {"first": 10, "last": 40, "bound": 0.05},
      "sweep":  {"spacings": {"start": 50, "stop": 1000, "points": 8,
                 "scale": "log"}, "rabis": [...], "threshold": 1e-5},
      "compare": {"vary": "spacing", "values": [...]}
    }

Instead of "gate" a config may name an existing pulse file via
"protocol_file".  The cutoff is interpreted in the reporting convention:
with doubled probabilities the stored pruning threshold is cutoff/2.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .chain import ChainConfig
from .design import build_cn_protocol, perturb_protocol
from .error_model import sweep_threshold_regions, total_error
from .exact_engine import DEFAULT_QUBIT_CAP, run_protocol_exact
from .exceptions import ConfigError, QubitCapError, SpinPulseError
from .oscillator import run_protocol_classical
from .pulses import Protocol
from .report import RunReport, band_classify, excitation_profiles, phase_report
from .sparse_engine import SparseState, run_protocol

CONFIG_VERSION = 1

_SCHEMA = {
    "version": None,
    "chain": {"n_qubits", "larmor_spacing", "base_larmor", "coupling", "cutoff"},
    "gate": {"type", "rabi", "k", "equal_epsilon"},
    "protocol_file": None,
    "engine": {"kind", "max_qubits", "step", "norm_tol"},
    "report": {"doubled_probabilities", "trace"},
    "seed": None,
    "jitter": {"first", "last", "bound"},
    "sweep": {"spacings", "rabis", "threshold"},
    "compare": {"vary", "values", "rabi", "spacing", "k"},
}


def _validate_config(doc: dict) -> None:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    if doc.get("version") != CONFIG_VERSION:
        raise ConfigError(f"config version must be {CONFIG_VERSION}")
    unknown = set(doc) - set(_SCHEMA)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key, allowed in _SCHEMA.items():
        if allowed is None or key not in doc:
            continue
        section = doc[key]
        if not isinstance(section, dict):
            raise ConfigError(f"config section {key!r} must be an object")
        extra = set(section) - allowed
        if extra:
            raise ConfigError(f"unknown keys in {key!r}: {sorted(extra)}")


def load_config(path: str | Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    _validate_config(doc)
    return doc


def chain_from_config(doc: dict) -> ChainConfig:
    chain = doc.get("chain")
    if not chain:
        raise ConfigError("config needs a 'chain' section")
    if "n_qubits" not in chain or "larmor_spacing" not in chain:
        raise ConfigError("chain section needs n_qubits and larmor_spacing")
    try:
        return ChainConfig(**chain)
    except ValueError as exc:
        raise ConfigError(str(exc))


def protocol_from_config(doc: dict, cfg: ChainConfig, config_dir: Path) -> Protocol:
    if "protocol_file" in doc:
        return Protocol.load(config_dir / doc["protocol_file"])
    gate = doc.get("gate")
    if not gate:
        raise ConfigError("config needs a 'gate' section or a protocol_file")
    if gate.get("type", "cn") != "cn":
        raise ConfigError(f"unknown gate type {gate.get('type')!r}")
    try:
        protocol = build_cn_protocol(
            cfg,
            rabi=gate.get("rabi"),
            k=gate.get("k"),
            equal_epsilon=gate.get("equal_epsilon", True),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    jitter = doc.get("jitter")
    if jitter:
        for field in ("first", "last", "bound"):
            if field not in jitter:
                raise ConfigError(f"jitter section needs {field!r}")
        protocol = perturb_protocol(
            protocol,
            (jitter["first"], jitter["last"]),
            jitter["bound"],
            int(doc.get("seed", 0)),
        )
    return protocol


def _axis_values(axis) -> list[float]:
    if isinstance(axis, list):
        return [float(v) for v in axis]
    if isinstance(axis, dict):
        extra = set(axis) - {"start", "stop", "points", "scale"}
        if extra:
            raise ConfigError(f"unknown axis keys: {sorted(extra)}")
        start, stop = float(axis["start"]), float(axis["stop"])
        points = int(axis["points"])
        if points < 2:
            raise ConfigError("axis needs at least 2 points")
        if axis.get("scale", "linear") == "log":
            ratio = (stop / start) ** (1.0 / (points - 1))
            return [start * ratio**i for i in range(points)]
        step = (stop - start) / (points - 1)
        return [start + step * i for i in range(points)]
    raise ConfigError("axis must be a list or a range object")


def _run_engine(
    engine: str,
    protocol: Protocol,
    cfg: ChainConfig,
    doc: dict,
    *,
    doubled: bool,
    trace: bool,
    cutoff_raw: float,
    seed: int,
) -> RunReport:
    initial = SparseState.from_basis(0)
    engine_opts = doc.get("engine", {})
    if engine == "perturbative":
        return run_protocol(
            initial, protocol, cfg,
            cutoff=cutoff_raw, trace=trace, doubled=doubled, seed=seed,
        )
    if engine == "exact":
        return run_protocol_exact(
            initial, protocol, cfg,
            cutoff=cutoff_raw, trace=trace, doubled=doubled, seed=seed,
            cap=engine_opts.get("max_qubits", DEFAULT_QUBIT_CAP),
        )
    if engine == "classical":
        return run_protocol_classical(
            initial, protocol, cfg,
            cutoff=cutoff_raw, trace=trace, doubled=doubled, seed=seed,
            step=engine_opts.get("step"),
            norm_tol=engine_opts.get("norm_tol", 1e-9),
        )
    raise ConfigError(f"unknown engine {engine!r}")


def _write(out_dir: Path, name: str, text: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(text)


def _report_outputs(report: RunReport, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    report.save(out_dir / "report.json")
    _write(out_dir, "unwanted.csv", report.unwanted_csv())
    if report.trace is not None:
        _write(out_dir, "trace.csv", report.trace_csv())
    records = report.unwanted_records()
    if records:
        summary = band_classify(records)
        bands = {
            "split_gap_decades": summary.split_gap,
            "bands": [
                {
                    "count": b.count,
                    "low": b.low,
                    "high": b.high,
                    "median": b.median,
                }
                for b in summary.bands
            ],
        }
        _write(out_dir, "bands.json", json.dumps(bands, indent=2) + "\n")


def cmd_simulate(args, engine_override: str | None = None) -> int:
    doc = load_config(args.config)
    cfg = chain_from_config(doc)
    report_opts = doc.get("report", {})
    doubled = bool(args.doubled_probabilities or report_opts.get("doubled_probabilities"))
    trace = bool(args.trace or report_opts.get("trace"))
    seed = int(args.seed if args.seed is not None else doc.get("seed", 0))
    cutoff = float(args.cutoff) if args.cutoff is not None else cfg.cutoff
    cutoff_raw = cutoff / 2.0 if doubled else cutoff
    engine = engine_override or args.engine or doc.get("engine", {}).get("kind", "perturbative")

    protocol = protocol_from_config(doc, cfg, Path(args.config).parent)
    report = _run_engine(
        engine, protocol, cfg, doc,
        doubled=doubled, trace=trace, cutoff_raw=cutoff_raw, seed=seed,
    )
    out_dir = Path(args.out)
    _report_outputs(report, out_dir)
    n_unwanted = len(report.unwanted_records())
    print(
        f"{engine}: {len(protocol)} pulses, {len(report.final_amps)} stored states, "
        f"{n_unwanted} unwanted, leaked {report.leaked:.3e}"
    )
    return 0


def cmd_design(args) -> int:
    doc = load_config(args.config)
    cfg = chain_from_config(doc)
    protocol = protocol_from_config(doc, cfg, Path(args.config).parent)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    protocol.save(out_dir / "protocol.json")
    base = protocol.pulses[1].rabi if len(protocol) > 1 else protocol.pulses[0].rabi
    print(f"{protocol.gate}: {len(protocol)} pulses, base rabi {base!r}")
    return 0


def cmd_sweep(args) -> int:
    doc = load_config(args.config)
    cfg = chain_from_config(doc)
    sweep = doc.get("sweep")
    if not sweep:
        raise ConfigError("config needs a 'sweep' section")
    for field in ("spacings", "rabis", "threshold"):
        if field not in sweep:
            raise ConfigError(f"sweep section needs {field!r}")
    region = sweep_threshold_regions(
        cfg,
        _axis_values(sweep["spacings"]),
        _axis_values(sweep["rabis"]),
        float(sweep["threshold"]),
    )
    out_dir = Path(args.out)
    _write(out_dir, "regions.csv", region.to_csv())
    intervals = {
        repr(dw): [
            {
                "rabi_low": iv.rabi_low,
                "rabi_high": iv.rabi_high,
                "anchor_k": iv.anchor_k,
                "anchor_rabi": iv.anchor_rabi,
            }
            for iv in row
        ]
        for dw, row in zip(region.spacings, region.intervals)
    }
    _write(out_dir, "intervals.json", json.dumps(intervals, indent=2) + "\n")
    print(
        f"sweep: {len(region.spacings)}x{len(region.rabis)} grid, "
        f"{region.accepted_cells()} accepted cells at threshold {region.threshold!r}"
    )
    return 0


def cmd_compare(args) -> int:
    doc = load_config(args.config)
    cfg = chain_from_config(doc)
    comp = doc.get("compare")
    if not comp:
        raise ConfigError("config needs a 'compare' section")
    vary = comp.get("vary")
    if vary not in ("spacing", "rabi"):
        raise ConfigError("compare.vary must be 'spacing' or 'rabi'")
    values = _axis_values(comp.get("values", []))
    if not values:
        raise ConfigError("compare.values must be non-empty")

    gate = doc.get("gate", {})
    lines = [f"{vary},p_exact,p_formula"]
    for value in values:
        if vary == "spacing":
            cfg_i = ChainConfig(
                n_qubits=cfg.n_qubits,
                larmor_spacing=value,
                base_larmor=10.0 * value,
                coupling=cfg.coupling,
                cutoff=cfg.cutoff,
            )
            rabi = comp.get("rabi", gate.get("rabi"))
            k = comp.get("k", gate.get("k"))
        else:
            cfg_i = cfg
            rabi, k = value, None
        protocol = build_cn_protocol(
            cfg_i, rabi=rabi, k=k, equal_epsilon=gate.get("equal_epsilon", True)
        )
        base_rabi = protocol.pulses[0].rabi
        report = run_protocol_exact(
            SparseState.from_basis(0), protocol, cfg_i,
            cutoff=1e-300,
            cap=doc.get("engine", {}).get("max_qubits", DEFAULT_QUBIT_CAP),
        )
        ground = protocol.initial_state
        target = protocol.target_state
        p_exact = 1.0 - report.probability(ground) - report.probability(target)
        p_formula = total_error(cfg_i, base_rabi).probability
        lines.append(f"{value!r},{p_exact!r},{p_formula!r}")
    out_dir = Path(args.out)
    _write(out_dir, "compare.csv", "\n".join(lines) + "\n")
    print(f"compare: {len(values)} points varying {vary}")
    return 0


def cmd_analyze(args) -> int:
    report = RunReport.load(args.report)
    out_dir = Path(args.out)
    records = report.unwanted_records()
    _write(out_dir, "unwanted.csv", report.unwanted_csv())
    if records:
        summary = band_classify(records)
        bands = {
            "split_gap_decades": summary.split_gap,
            "bands": [
                {"count": b.count, "low": b.low, "high": b.high, "median": b.median}
                for b in summary.bands
            ],
        }
        _write(out_dir, "bands.json", json.dumps(bands, indent=2) + "\n")
        profiles = excitation_profiles(records, report.chain)
        rows = ["state,flips,energy_above_ground,energy_class"]
        rows += [
            f"{p.bitstring},{p.flips},{p.energy_above_ground!r},{p.energy_class}"
            for p in profiles
        ]
        _write(out_dir, "profiles.csv", "\n".join(rows) + "\n")
    if args.phase_with:
        other = RunReport.load(args.phase_with)
        dev = phase_report(report, other)
        _write(
            out_dir,
            "phase.json",
            json.dumps(
                {
                    "phase_reference": dev.phase_reference,
                    "phase_other": dev.phase_other,
                    "deviation_radians": dev.deviation,
                    "relative_deviation": dev.relative_deviation,
                },
                indent=2,
            )
            + "\n",
        )
    print(f"analyze: {len(records)} unwanted records")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinpulse",
        description="Resonant-pulse quantum logic on an Ising spin chain",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="run-config JSON path")
        p.add_argument("--out", required=True, help="output directory")

    p_sim = sub.add_parser("simulate", help="run the sparse perturbative engine")
    add_common(p_sim)
    p_sim.add_argument("--engine", choices=["perturbative", "exact", "classical"])
    p_sim.add_argument("--cutoff", type=float)
    p_sim.add_argument("--doubled-probabilities", action="store_true")
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--trace", action="store_true")
    p_sim.set_defaults(func=cmd_simulate)

    p_sime = sub.add_parser("simulate-exact", help="run the exact dense engine")
    add_common(p_sime)
    p_sime.add_argument("--cutoff", type=float)
    p_sime.add_argument("--doubled-probabilities", action="store_true")
    p_sime.add_argument("--seed", type=int)
    p_sime.add_argument("--trace", action="store_true")
    p_sime.set_defaults(
        func=lambda a: cmd_simulate(a, engine_override="exact"), engine=None
    )

    p_cls = sub.add_parser("classical", help="run the oscillator-pair engine")
    add_common(p_cls)
    p_cls.add_argument("--cutoff", type=float)
    p_cls.add_argument("--doubled-probabilities", action="store_true")
    p_cls.add_argument("--seed", type=int)
    p_cls.add_argument("--trace", action="store_true")
    p_cls.set_defaults(
        func=lambda a: cmd_simulate(a, engine_override="classical"), engine=None
    )

    p_des = sub.add_parser("design", help="build a gate protocol file")
    add_common(p_des)
    p_des.set_defaults(func=cmd_design)

    p_swp = sub.add_parser("sweep", help="error-budget threshold regions")
    add_common(p_swp)
    p_swp.set_defaults(func=cmd_sweep)

    p_cmp = sub.add_parser("compare", help="exact engine vs error budget")
    add_common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_ana = sub.add_parser("analyze", help="bands, profiles, phases of a report")
    p_ana.add_argument("--report", required=True, help="report.json path")
    p_ana.add_argument("--phase-with", help="second report.json for phase comparison")
    p_ana.add_argument("--out", required=True)
    p_ana.set_defaults(func=cmd_analyze)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _emit_error(exc)
        return 2
    except (QubitCapError, SpinPulseError, ValueError) as exc:
        _emit_error(exc)
        return 3
    except OSError as exc:
        _emit_error(exc)
        return 4


def _emit_error(exc: Exception) -> None:
    record = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(record), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
