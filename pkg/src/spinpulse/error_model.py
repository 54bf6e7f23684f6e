"""Closed-form error budget for the end-to-end CN protocol.

Two small parameters control gate quality.  A near-resonant pulse excites
its spectator partner with probability

    eps = (rabi/lambda)^2 * sin^2(lambda * tau / 2),  lambda = sqrt(rabi^2 + Delta^2),

which vanishes on the 2pik condition.  A non-resonant spin a distance d
from the driven one leaks

    mu / d^2,   mu = (rabi / (2 * spacing))^2,

so the per-pulse leakage with resonant spin k is mu_k = mu * sum_{k' != k}
1/(k - k')^2.  The total gate error multiplies the per-pulse survival
factors along both target components: the spectator (all-zeros) branch pays
eps on every pi-pulse, both branches pay their non-resonant mu_i, interior
spins host two pi-pulses each (squared factors), and the third pulse is
driven at twice the base strength in the equal-eps convention so its
non-resonant terms carry a factor four:

    P = 1 - 1/2 (1-mu_{N-1}) (1-mu_{N-2}-eps) (1-4mu_{N-2}-eps) (1-mu_0-eps)
              * prod_{i=1}^{N-3} (1-mu_i-eps)^2
          - 1/2 (1-mu_{N-2}) (1-4mu_{N-2}) * prod_{i=0}^{N-3} (1-mu_i)^2

The budget is meaningful only for rabi << J << spacing; outside that regime
the exact engine is the arbiter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .chain import ChainConfig


def epsilon(rabi: float, delta: float, duration: float) -> float:
    """Spectator transition probability of one near-resonant pulse."""
    lam = math.hypot(rabi, delta)
    if lam == 0.0:
        return 0.0
    s = math.sin(0.5 * lam * duration)
    return (rabi / lam) ** 2 * s * s


def mu_base(rabi: float, spacing: float) -> float:
    """Leakage scale to a non-resonant spin one Larmor step away."""
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    return (rabi / (2.0 * spacing)) ** 2


def nonresonant_leak(rabi: float, spacing: float, distance: int) -> float:
    """Leakage probability to the non-resonant spin ``distance`` steps away."""
    if distance < 1:
        raise ValueError("distance must be >= 1")
    return mu_base(rabi, spacing) / (distance * distance)


@lru_cache(maxsize=64)
def _inv_square_prefix(m: int) -> tuple[float, ...]:
    """Prefix sums H[j] = sum_{d=1}^{j} 1/d^2 for j = 0..m."""
    out = [0.0]
    total = 0.0
    for d in range(1, m + 1):
        total += 1.0 / (d * d)
        out.append(total)
    return tuple(out)


def mu_k(rabi: float, spacing: float, k: int, n_qubits: int) -> float:
    """Total non-resonant leakage of one pulse whose resonant spin is k."""
    if not 0 <= k < n_qubits:
        raise ValueError(f"spin index {k} out of range for N={n_qubits}")
    prefix = _inv_square_prefix(n_qubits - 1)
    return mu_base(rabi, spacing) * (prefix[k] + prefix[n_qubits - 1 - k])


@dataclass(frozen=True)
class ErrorBudget:
    n_qubits: int
    m_pulses: int
    rabi: float
    spacing: float
    epsilon: float
    mu: float
    probability: float                  # total unwanted-state probability P
    near_resonant_only: float           # P with all mu_i set to zero
    approx_ground_probability: float    # first-order |C_0|^2 = (1 - M*eps)/2


def total_error(cfg: ChainConfig, rabi: float) -> ErrorBudget:
    """Evaluate the full error budget of the equal-eps CN protocol.

    ``rabi`` is the base drive strength; the third pulse's doubling is
    built into the factor-four terms.
    """
    n = cfg.n_qubits
    if n < 3:
        raise ValueError("error budget is defined for the CN protocol, N >= 3")
    j = cfg.coupling
    spacing = cfg.larmor_spacing
    m_pulses = 2 * n - 3

    eps = epsilon(rabi, 2.0 * j, math.pi / rabi)
    mu = mu_base(rabi, spacing)
    prefix = _inv_square_prefix(n - 1)
    mu_i = [mu * (prefix[i] + prefix[n - 1 - i]) for i in range(n)]

    spectator = 1.0 - mu_i[n - 1]
    spectator *= 1.0 - mu_i[n - 2] - eps
    spectator *= 1.0 - 4.0 * mu_i[n - 2] - eps
    spectator *= 1.0 - mu_i[0] - eps
    for i in range(1, n - 2):
        spectator *= (1.0 - mu_i[i] - eps) ** 2

    moving = (1.0 - mu_i[n - 2]) * (1.0 - 4.0 * mu_i[n - 2])
    for i in range(0, n - 2):
        moving *= (1.0 - mu_i[i]) ** 2

    probability = 1.0 - 0.5 * spectator - 0.5 * moving
    near_only = 0.5 * (1.0 - (1.0 - eps) ** m_pulses)

    return ErrorBudget(
        n_qubits=n,
        m_pulses=m_pulses,
        rabi=rabi,
        spacing=spacing,
        epsilon=eps,
        mu=mu,
        probability=probability,
        near_resonant_only=near_only,
        approx_ground_probability=0.5 * (1.0 - m_pulses * eps),
    )


@dataclass(frozen=True)
class AcceptanceInterval:
    """One contiguous accepted drive-strength interval at fixed spacing."""

    rabi_low: float
    rabi_high: float
    anchor_k: int
    anchor_rabi: float


@dataclass(frozen=True)
class RegionMap:
    """Error probability over a (spacing, rabi) grid with acceptance mask."""

    spacings: tuple[float, ...]
    rabis: tuple[float, ...]
    probabilities: np.ndarray  # shape (len(spacings), len(rabis))
    threshold: float
    intervals: tuple[tuple[AcceptanceInterval, ...], ...]  # per spacing

    @property
    def accepted(self) -> np.ndarray:
        return self.probabilities < self.threshold

    def accepted_cells(self) -> int:
        return int(self.accepted.sum())

    def to_csv(self) -> str:
        lines = ["larmor_spacing,rabi,error_probability,accepted"]
        acc = self.accepted
        for i, dw in enumerate(self.spacings):
            for j, om in enumerate(self.rabis):
                lines.append(
                    f"{dw!r},{om!r},{self.probabilities[i, j]!r},"
                    f"{int(acc[i, j])}"
                )
        return "\n".join(lines) + "\n"


def nearest_2pik_anchor(rabi: float, coupling: float = 1.0) -> tuple[int, float]:
    """Revolution count and exact drive strength of the 2pik point nearest
    ``rabi`` for the standard 2J detuning."""
    delta = 2.0 * coupling
    k = max(1, round(0.5 * math.sqrt((delta / rabi) ** 2 + 1.0)))
    return k, delta / math.sqrt(4.0 * k * k - 1.0)


def sweep_threshold_regions(
    cfg: ChainConfig,
    spacings: list[float] | tuple[float, ...],
    rabis: list[float] | tuple[float, ...],
    threshold: float,
) -> RegionMap:
    """Evaluate the error budget on a grid and find the accepted regions.

    For each spacing, contiguous runs of grid points with P below the
    threshold are summarized as intervals together with the 2pik drive
    strength they bracket.
    """
    spacings = tuple(float(s) for s in spacings)
    rabis = tuple(float(r) for r in rabis)
    probs = np.empty((len(spacings), len(rabis)))
    for i, dw in enumerate(spacings):
        cfg_i = ChainConfig(
            n_qubits=cfg.n_qubits,
            larmor_spacing=dw,
            base_larmor=10.0 * dw,
            coupling=cfg.coupling,
            cutoff=cfg.cutoff,
        )
        for jx, om in enumerate(rabis):
            probs[i, jx] = total_error(cfg_i, om).probability

    accepted = probs < threshold
    all_intervals = []
    for i in range(len(spacings)):
        row = []
        jx = 0
        while jx < len(rabis):
            if accepted[i, jx]:
                start = jx
                while jx + 1 < len(rabis) and accepted[i, jx + 1]:
                    jx += 1
                mid = 0.5 * (rabis[start] + rabis[jx])
                k, anchor = nearest_2pik_anchor(mid, cfg.coupling)
                row.append(
                    AcceptanceInterval(
                        rabi_low=rabis[start],
                        rabi_high=rabis[jx],
                        anchor_k=k,
                        anchor_rabi=anchor,
                    )
                )
            jx += 1
        all_intervals.append(tuple(row))

    return RegionMap(
        spacings=spacings,
        rabis=rabis,
        probabilities=probs,
        threshold=threshold,
        intervals=tuple(all_intervals),
    )
