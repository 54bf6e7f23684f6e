"""Run reports: persistence, unwanted-state listings, bands, and phase checks.

A RunReport is the common output of every engine.  It carries the final
sparse amplitudes, the probability removed by pruning (or left below the
reporting cutoff for dense engines), the first-crossing pulse index of every
state that ever held probability above the cutoff, and enough provenance to
reproduce the run byte for byte.  Reports serialize to JSON (lossless float
round trip) and to CSV tables for plotting.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

from .chain import ChainConfig, basis_energy, flip_count, state_to_string
from .design import spectator_phase_increment
from .exceptions import ConfigError
from .pulses import Protocol

REPORT_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TraceEntry:
    """Per-pulse snapshot; entry 0 describes the state before any pulse."""

    pulse_index: int
    time: float
    norm: float
    leaked: float
    n_states: int
    reference_amplitude: complex | None


@dataclass(frozen=True)
class UnwantedRecord:
    """One unwanted basis state in the final superposition."""

    state: int
    bitstring: str
    probability: float
    generation: int
    energy: float
    flips: int


@dataclass
class RunReport:
    engine: str
    chain: ChainConfig
    final_amps: dict[int, complex]
    leaked: float
    time: float
    generation: dict[int, int]
    doubled: bool = False
    prune_cutoff: float | None = None
    seed: int | None = None
    protocol: dict | None = None
    trace: list[TraceEntry] | None = None
    config_hash: str = ""

    # -- queries -------------------------------------------------------------

    @property
    def convention_factor(self) -> float:
        return 2.0 if self.doubled else 1.0

    def probability(self, state: int) -> float:
        c = self.final_amps.get(state)
        if c is None:
            return 0.0
        return self.convention_factor * (c.real * c.real + c.imag * c.imag)

    def stored_norm(self) -> float:
        return math.fsum(
            c.real * c.real + c.imag * c.imag for c in self.final_amps.values()
        )

    @property
    def wanted_states(self) -> frozenset[int]:
        if not self.protocol:
            return frozenset()
        path = self.protocol.get("path") or []
        if not path:
            return frozenset()
        return frozenset({int(path[0]), int(path[-1])})

    def unwanted_records(self) -> list[UnwantedRecord]:
        """Final states above cutoff that are not protocol targets, in
        generation order (ties broken by ascending basis index)."""
        wanted = self.wanted_states
        n = self.chain.n_qubits
        records = []
        for s, c in self.final_amps.items():
            if s in wanted:
                continue
            records.append(
                UnwantedRecord(
                    state=s,
                    bitstring=state_to_string(s, n),
                    probability=self.convention_factor
                    * (c.real * c.real + c.imag * c.imag),
                    generation=self.generation.get(s, -1),
                    energy=basis_energy(s, self.chain),
                    flips=flip_count(s),
                )
            )
        records.sort(key=lambda r: (r.generation, r.state))
        return records

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": REPORT_FORMAT_VERSION,
            "engine": self.engine,
            "chain": asdict(self.chain),
            "final_amps": [
                [str(s), c.real, c.imag] for s, c in self.final_amps.items()
            ],
            "leaked": self.leaked,
            "time": self.time,
            "generation": {str(s): g for s, g in self.generation.items()},
            "doubled": self.doubled,
            "prune_cutoff": self.prune_cutoff,
            "seed": self.seed,
            "protocol": self.protocol,
            "trace": None
            if self.trace is None
            else [
                [
                    e.pulse_index,
                    e.time,
                    e.norm,
                    e.leaked,
                    e.n_states,
                    None
                    if e.reference_amplitude is None
                    else [e.reference_amplitude.real, e.reference_amplitude.imag],
                ]
                for e in self.trace
            ],
            "config_hash": self.config_hash,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        if data.get("version") != REPORT_FORMAT_VERSION:
            raise ConfigError(f"unsupported report version {data.get('version')!r}")
        trace = None
        if data.get("trace") is not None:
            trace = [
                TraceEntry(
                    pulse_index=row[0],
                    time=row[1],
                    norm=row[2],
                    leaked=row[3],
                    n_states=row[4],
                    reference_amplitude=None
                    if row[5] is None
                    else complex(row[5][0], row[5][1]),
                )
                for row in data["trace"]
            ]
        return cls(
            engine=data["engine"],
            chain=ChainConfig(**data["chain"]),
            final_amps={
                int(s): complex(re, im) for s, re, im in data["final_amps"]
            },
            leaked=data["leaked"],
            time=data["time"],
            generation={int(s): g for s, g in data["generation"].items()},
            doubled=data["doubled"],
            prune_cutoff=data.get("prune_cutoff"),
            seed=data.get("seed"),
            protocol=data.get("protocol"),
            trace=trace,
            config_hash=data.get("config_hash", ""),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "RunReport":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def unwanted_csv(self) -> str:
        """CSV of unwanted states: bitstring, probability, generation, energy, flips."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["state", "probability", "generation_pulse", "energy", "flips"])
        for r in self.unwanted_records():
            writer.writerow(
                [r.bitstring, repr(r.probability), r.generation, repr(r.energy), r.flips]
            )
        return buf.getvalue()

    def trace_csv(self) -> str:
        if self.trace is None:
            raise ValueError("run was executed without trace recording")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["pulse", "time", "norm", "leaked", "n_states", "ref_re", "ref_im"]
        )
        for e in self.trace:
            ref = e.reference_amplitude
            writer.writerow(
                [
                    e.pulse_index,
                    repr(e.time),
                    repr(e.norm),
                    repr(e.leaked),
                    e.n_states,
                    "" if ref is None else repr(ref.real),
                    "" if ref is None else repr(ref.imag),
                ]
            )
        return buf.getvalue()


def config_fingerprint(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def make_report(
    engine: str,
    cfg: ChainConfig,
    protocol: Protocol | None,
    final_amps: dict[int, complex],
    leaked: float,
    time: float,
    generation: dict[int, int],
    *,
    trace: list[TraceEntry] | None = None,
    doubled: bool = False,
    prune_cutoff: float | None = None,
    seed: int | None = None,
) -> RunReport:
    proto_dict = protocol.to_dict() if protocol is not None else None
    fingerprint = config_fingerprint(
        {
            "engine": engine,
            "chain": asdict(cfg),
            "protocol": proto_dict,
            "seed": seed,
            "doubled": doubled,
            "prune_cutoff": prune_cutoff,
        }
    )
    return RunReport(
        engine=engine,
        chain=cfg,
        final_amps=final_amps,
        leaked=leaked,
        time=time,
        generation=generation,
        doubled=doubled,
        prune_cutoff=prune_cutoff,
        seed=seed,
        protocol=proto_dict,
        trace=trace,
        config_hash=fingerprint,
    )


# -- band structure ----------------------------------------------------------

@dataclass(frozen=True)
class Band:
    count: int
    low: float
    high: float
    median: float
    histogram: tuple[tuple[float, int], ...]


@dataclass(frozen=True)
class BandSummary:
    bands: tuple[Band, ...]
    split_gap: float | None  # decades between the bands, None for one band


def _band_from_logs(logs: list[float]) -> Band:
    logs = sorted(logs)
    n = len(logs)
    median = logs[n // 2] if n % 2 else 0.5 * (logs[n // 2 - 1] + logs[n // 2])
    bin_width = 0.25
    start = math.floor(logs[0] / bin_width) * bin_width
    counts: dict[float, int] = {}
    for v in logs:
        left = start + bin_width * math.floor((v - start) / bin_width)
        counts[left] = counts.get(left, 0) + 1
    histogram = tuple(sorted(counts.items()))
    return Band(
        count=n,
        low=10.0 ** logs[0],
        high=10.0 ** logs[-1],
        median=10.0 ** median,
        histogram=histogram,
    )


def band_classify(records: list[UnwantedRecord]) -> BandSummary:
    """Split records into probability bands at the largest log10 gap.

    One band is reported when the largest gap between adjacent sorted
    log-probabilities is under one decade; otherwise the population splits
    into a lower and an upper band at that gap.
    """
    if not records:
        raise ValueError("no records to classify")
    logs = sorted(math.log10(r.probability) for r in records if r.probability > 0)
    if not logs:
        raise ValueError("all record probabilities are zero")
    gap, pos = 0.0, -1
    for i in range(len(logs) - 1):
        g = logs[i + 1] - logs[i]
        if g > gap:
            gap, pos = g, i
    if gap < 1.0 or pos < 0:
        return BandSummary(bands=(_band_from_logs(logs),), split_gap=None)
    lower, upper = logs[: pos + 1], logs[pos + 1 :]
    return BandSummary(
        bands=(_band_from_logs(lower), _band_from_logs(upper)), split_gap=gap
    )


# -- excitation profiles -----------------------------------------------------

@dataclass(frozen=True)
class ExcitationProfile:
    state: int
    bitstring: str
    flips: int
    energy_above_ground: float
    energy_class: str


def excitation_profiles(
    records: list[UnwantedRecord], cfg: ChainConfig
) -> list[ExcitationProfile]:
    """Per-record spin pattern and energy class (terciles of the record set)."""
    if not records:
        return []
    ground = basis_energy(0, cfg)
    energies = sorted(r.energy - ground for r in records)
    n = len(energies)
    lo_cut = energies[max(0, math.ceil(n / 3) - 1)]
    hi_cut = energies[max(0, math.ceil(2 * n / 3) - 1)]
    profiles = []
    for r in records:
        rel = r.energy - ground
        if rel <= lo_cut:
            cls = "low"
        elif rel <= hi_cut:
            cls = "intermediate"
        else:
            cls = "high"
        profiles.append(
            ExcitationProfile(
                state=r.state,
                bitstring=r.bitstring,
                flips=r.flips,
                energy_above_ground=rel,
                energy_class=cls,
            )
        )
    return profiles


# -- phase comparison --------------------------------------------------------

@dataclass(frozen=True)
class PhaseDeviation:
    phase_reference: float
    phase_other: float
    deviation: float       # |phase_other - phase_reference|, radians
    relative_deviation: float


def accumulated_reference_phase(report: RunReport) -> float:
    """Unwrapped phase of the reference-state amplitude over the whole run.

    The wrapped per-pulse phase steps from the trace are lifted to the real
    line using the analytic spectator increment of each pulse as the winding
    guide; the true increment stays within half a turn of the guide whenever
    the run is anywhere near its design point.
    """
    if report.trace is None:
        raise ValueError("phase accumulation needs a run recorded with trace=True")
    if not report.protocol:
        raise ValueError("phase accumulation needs protocol metadata")
    proto = Protocol.from_dict(report.protocol)
    if len(report.trace) != len(proto.pulses) + 1:
        raise ValueError("trace length does not match protocol length")
    total = 0.0
    prev = report.trace[0].reference_amplitude
    if prev is None or abs(prev) == 0.0:
        raise ValueError("reference amplitude absent at run start")
    for pulse, detuning, entry in zip(proto.pulses, proto.detunings, report.trace[1:]):
        cur = entry.reference_amplitude
        if cur is None or abs(cur) == 0.0:
            raise ValueError(
                f"reference amplitude fell below cutoff at pulse {entry.pulse_index}"
            )
        step = math.atan2(cur.imag, cur.real) - math.atan2(prev.imag, prev.real)
        guide = spectator_phase_increment(pulse.rabi, detuning, pulse.duration)
        step += 2.0 * math.pi * round((guide - step) / (2.0 * math.pi))
        total += step
        prev = cur
    return total


def phase_report(reference: RunReport, other: RunReport) -> PhaseDeviation:
    """Compare the accumulated reference-state phase of two runs.

    Both runs must trace the same protocol shape (same pulse count and
    detunings); they normally differ only in drive strength.  The relative
    deviation is taken against the first run's accumulated phase.
    """
    phi_ref = accumulated_reference_phase(reference)
    phi_other = accumulated_reference_phase(other)
    dev = abs(phi_other - phi_ref)
    rel = dev / abs(phi_ref) if phi_ref != 0.0 else (0.0 if dev == 0.0 else math.inf)
    return PhaseDeviation(
        phase_reference=phi_ref,
        phase_other=phi_other,
        deviation=dev,
        relative_deviation=rel,
    )
