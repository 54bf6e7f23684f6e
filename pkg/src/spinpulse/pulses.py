"""Rectangular rf pulses and ordered pulse sequences (protocols)."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .exceptions import ConfigError

PROTOCOL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Pulse:
    """One rectangular rf pulse.

    ``frequency`` is the drive frequency, ``rabi`` the drive strength, and
    ``duration`` the length; rabi * duration = pi for a pi-pulse and pi/2
    for a pi/2-pulse.  Phase is kept at zero throughout the protocols built
    here but stored for completeness.
    """

    frequency: float
    rabi: float
    duration: float
    phase: float = 0.0
    label: str = ""

    def __post_init__(self):
        if self.rabi <= 0:
            raise ValueError(f"rabi must be positive, got {self.rabi}")
        if self.duration <= 0:
            raise ValueError(f"duration must be positive, got {self.duration}")

    @property
    def area(self) -> float:
        return self.rabi * self.duration


@dataclass(frozen=True)
class Protocol:
    """Ordered pulse sequence with optional bookkeeping for gate protocols.

    ``path`` annotates the intended resonant trajectory: path[i] is the basis
    state the on-path amplitude occupies before pulse i, so pulse i moves
    path[i] -> path[i+1].  ``detunings`` lists each pulse's detuning from the
    nearest transition of the all-zeros state, which is what the error
    budget and phase bookkeeping need.  Both are empty for ad-hoc sequences.
    """

    pulses: tuple[Pulse, ...]
    gate: str = ""
    path: tuple[int, ...] = ()
    detunings: tuple[float, ...] = ()

    def __len__(self) -> int:
        return len(self.pulses)

    @property
    def initial_state(self) -> int | None:
        return self.path[0] if self.path else None

    @property
    def target_state(self) -> int | None:
        return self.path[-1] if self.path else None

    def with_pulses(self, pulses: tuple[Pulse, ...]) -> "Protocol":
        return replace(self, pulses=pulses)

    def to_dict(self) -> dict:
        return {
            "version": PROTOCOL_FORMAT_VERSION,
            "gate": self.gate,
            "pulses": [
                {
                    "frequency": p.frequency,
                    "rabi": p.rabi,
                    "duration": p.duration,
                    "phase": p.phase,
                    "label": p.label,
                }
                for p in self.pulses
            ],
            "path": [str(s) for s in self.path],
            "detunings": list(self.detunings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Protocol":
        if data.get("version") != PROTOCOL_FORMAT_VERSION:
            raise ConfigError(
                f"unsupported protocol format version {data.get('version')!r}"
            )
        known = {"version", "gate", "pulses", "path", "detunings"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown protocol keys: {sorted(unknown)}")
        pulses = tuple(Pulse(**entry) for entry in data["pulses"])
        return cls(
            pulses=pulses,
            gate=data.get("gate", ""),
            path=tuple(int(s) for s in data.get("path", [])),
            detunings=tuple(float(d) for d in data.get("detunings", [])),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Protocol":
        return cls.from_dict(json.loads(Path(path).read_text()))
