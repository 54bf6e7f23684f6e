"""Exact small-chain solver via the co-rotating frame of each pulse.

In coordinates rotating at the drive frequency, a rectangular pulse has a
time-independent Hamiltonian: diagonal entries E_p - chi_p with
chi_p = -(freq/2) * sum_k s_k^p, and a constant -rabi/2 between every pair
of basis states that differ by one spin flip.  One dense symmetric
eigendecomposition per distinct pulse then evolves the amplitudes exactly,
which makes this engine the oracle for the sparse perturbative one.
Conversions between rotating-frame amplitudes A_p and interaction-picture
amplitudes C_p are pure phases, A_p = exp(-i * (E_p - chi_p) * t) * C_p,
applied at the absolute start and end time of each pulse.

Memory for the dense matrix is the binding constraint; the qubit cap is a
tunable, not a physical claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import (
    ChainConfig,
    TransitionKind,
    basis_energy,
    classify_transition,
)
from .exceptions import QubitCapError
from .pulses import Protocol, Pulse
from .report import RunReport, TraceEntry, make_report
from .sparse_engine import SparseState

DEFAULT_QUBIT_CAP = 14


def _check_cap(cfg: ChainConfig, cap: int) -> None:
    if cfg.n_qubits > cap:
        raise QubitCapError(
            f"N={cfg.n_qubits} exceeds the dense-solver cap {cap}; "
            "raise the cap explicitly if you have the memory for it"
        )


def h0_energies(cfg: ChainConfig) -> np.ndarray:
    """Static-chain energies of all 2^N basis states, indexed by bit value."""
    n = cfg.n_qubits
    dim = 1 << n
    bits = (np.arange(dim, dtype=np.int64)[:, None] >> np.arange(n)) & 1
    sigma = 1 - 2 * bits
    omegas = cfg.base_larmor + cfg.larmor_spacing * np.arange(n, dtype=np.float64)
    zeeman = sigma @ omegas
    bonds = (sigma[:, :-1] * sigma[:, 1:]).sum(axis=1)
    return -0.5 * zeeman - 0.5 * cfg.coupling * bonds


def rotating_diagonal(freq: float, cfg: ChainConfig) -> np.ndarray:
    """Diagonal of the rotating-frame Hamiltonian for a drive at ``freq``."""
    n = cfg.n_qubits
    dim = 1 << n
    bits = (np.arange(dim, dtype=np.int64)[:, None] >> np.arange(n)) & 1
    sigma_sum = (1 - 2 * bits).sum(axis=1)
    chi = -0.5 * freq * sigma_sum
    return h0_energies(cfg) - chi


@dataclass(frozen=True)
class RotatingHamiltonian:
    """Dense rotating-frame Hamiltonian of one pulse.

    Real symmetric; every row has exactly N off-diagonal entries -rabi/2,
    one per single-spin flip.
    """

    matrix: np.ndarray
    pulse: Pulse

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class EigenSystem:
    values: np.ndarray
    vectors: np.ndarray  # column q is the eigenvector for values[q]


def build_rotating_hamiltonian(
    pulse: Pulse, cfg: ChainConfig, cap: int = DEFAULT_QUBIT_CAP
) -> RotatingHamiltonian:
    _check_cap(cfg, cap)
    dim = 1 << cfg.n_qubits
    h = np.zeros((dim, dim), dtype=np.float64)
    np.fill_diagonal(h, rotating_diagonal(pulse.frequency, cfg))
    idx = np.arange(dim)
    for k in range(cfg.n_qubits):
        h[idx, idx ^ (1 << k)] = -0.5 * pulse.rabi
    return RotatingHamiltonian(matrix=h, pulse=pulse)


def diagonalize(ham: RotatingHamiltonian) -> EigenSystem:
    values, vectors = np.linalg.eigh(ham.matrix)
    return EigenSystem(values=values, vectors=vectors)


def evolve_pulse_exact(
    amps: np.ndarray,
    pulse: Pulse,
    cfg: ChainConfig,
    tau: float | None = None,
    eigensystem: EigenSystem | None = None,
    cap: int = DEFAULT_QUBIT_CAP,
) -> np.ndarray:
    """Evolve rotating-frame amplitudes through one pulse of length ``tau``."""
    if tau is None:
        tau = pulse.duration
    if eigensystem is None:
        eigensystem = diagonalize(build_rotating_hamiltonian(pulse, cfg, cap))
    v = eigensystem.vectors
    phases = np.exp(-1j * eigensystem.values * tau)
    return v @ (phases * (v.T @ amps))


def interaction_to_rotating(
    c_amps: np.ndarray, pulse: Pulse, cfg: ChainConfig, t: float
) -> np.ndarray:
    """A_p = exp(-i * (E_p - chi_p) * t) * C_p at absolute time t."""
    return np.exp(-1j * rotating_diagonal(pulse.frequency, cfg) * t) * c_amps


def rotating_to_interaction(
    a_amps: np.ndarray, pulse: Pulse, cfg: ChainConfig, t: float
) -> np.ndarray:
    return np.exp(1j * rotating_diagonal(pulse.frequency, cfg) * t) * a_amps


def two_level_block(
    state: int, pulse: Pulse, cfg: ChainConfig
) -> tuple[float, float, np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of the isolated 2x2 block of a pulse.

    ``state`` must be the lower level of its pair.  Returns
    (e_low, e_high, v_low, v_high) with eigenvectors expressed in (lower,
    upper) coordinates:

        e_low  = E_m - chi_m + Delta/2 - lambda/2,   v_low  ~ (rabi, lambda - Delta)
        e_high = E_m - chi_m + Delta/2 + lambda/2,   v_high ~ (-(lambda - Delta), rabi)
    """
    cls = classify_transition(state, pulse.frequency, cfg)
    if cls.kind is TransitionKind.NON_RESONANT:
        raise ValueError("state has no transition near the pulse; no 2x2 block")
    partner = state ^ (1 << cls.spin)
    e_state = basis_energy(state, cfg)
    e_partner = basis_energy(partner, cfg)
    if e_state > e_partner:
        raise ValueError("pass the lower level of the pair")
    n1 = bin(state).count("1")
    chi = -0.5 * pulse.frequency * (cfg.n_qubits - 2 * n1)
    script_e_m = e_state - chi
    delta = cls.detuning
    lam = math.hypot(pulse.rabi, delta)
    e_low = script_e_m + 0.5 * delta - 0.5 * lam
    e_high = script_e_m + 0.5 * delta + 0.5 * lam
    norm = math.hypot(lam - delta, pulse.rabi)
    v_low = np.array([pulse.rabi, lam - delta]) / norm
    v_high = np.array([-(lam - delta), pulse.rabi]) / norm
    return e_low, e_high, v_low, v_high


def run_protocol_exact(
    initial: SparseState | dict[int, complex] | np.ndarray,
    protocol: Protocol | list[Pulse] | tuple[Pulse, ...],
    cfg: ChainConfig,
    *,
    cutoff: float | None = None,
    trace: bool = False,
    doubled: bool = False,
    seed: int | None = None,
    cap: int = DEFAULT_QUBIT_CAP,
) -> RunReport:
    """Exact run: per pulse, convert to the rotating frame at the pulse start
    time, evolve with the diagonalized Hamiltonian, and convert back.

    Produces the same report shape as the sparse engine.  ``leaked`` here is
    the probability left below the reporting cutoff, not a dynamical loss:
    the evolution itself conserves the norm.  Eigendecompositions are cached
    per distinct (frequency, rabi) within the run.
    """
    _check_cap(cfg, cap)
    if not isinstance(protocol, Protocol):
        protocol = Protocol(pulses=tuple(protocol))
    threshold = cfg.cutoff if cutoff is None else cutoff
    dim = 1 << cfg.n_qubits

    if isinstance(initial, SparseState):
        entries = initial.amps
    elif isinstance(initial, dict):
        entries = initial
    else:
        entries = None
    if entries is not None:
        c = np.zeros(dim, dtype=np.complex128)
        for s, amp in entries.items():
            c[s] = amp
    else:
        c = np.asarray(initial, dtype=np.complex128).copy()
        if c.shape != (dim,):
            raise ValueError(f"initial vector must have length {dim}")

    ref_state = protocol.initial_state if protocol.initial_state is not None else 0
    eig_cache: dict[tuple[float, float], EigenSystem] = {}
    diag_cache: dict[float, np.ndarray] = {}

    generation: dict[int, int] = {}
    probs = (c.real**2 + c.imag**2)
    for s in np.flatnonzero(probs >= threshold):
        generation[int(s)] = 0

    trace_rows: list[TraceEntry] | None = None
    if trace:
        trace_rows = [
            TraceEntry(0, 0.0, float(probs.sum()), 0.0, len(generation), complex(c[ref_state]))
        ]

    t = 0.0
    for idx, pulse in enumerate(protocol.pulses, start=1):
        key = (pulse.frequency, pulse.rabi)
        if key not in eig_cache:
            eig_cache[key] = diagonalize(build_rotating_hamiltonian(pulse, cfg, cap))
        if pulse.frequency not in diag_cache:
            diag_cache[pulse.frequency] = rotating_diagonal(pulse.frequency, cfg)
        diag = diag_cache[pulse.frequency]

        a = np.exp(-1j * diag * t) * c
        a = evolve_pulse_exact(a, pulse, cfg, pulse.duration, eig_cache[key], cap)
        t += pulse.duration
        c = np.exp(1j * diag * t) * a

        probs = c.real**2 + c.imag**2
        for s in np.flatnonzero(probs >= threshold):
            s = int(s)
            if s not in generation:
                generation[s] = idx
        if trace_rows is not None:
            above = int((probs >= threshold).sum())
            trace_rows.append(
                TraceEntry(idx, t, float(probs.sum()), 0.0, above, complex(c[ref_state]))
            )

    probs = c.real**2 + c.imag**2
    keep = np.flatnonzero(probs >= threshold)
    final_amps = {int(s): complex(c[s]) for s in keep}
    stored = float(probs[keep].sum())
    leaked = float(probs.sum()) - stored

    return make_report(
        "exact",
        cfg,
        protocol if protocol.pulses else None,
        final_amps,
        leaked,
        t,
        generation,
        trace=trace_rows,
        doubled=doubled,
        prune_cutoff=threshold,
        seed=seed,
    )
