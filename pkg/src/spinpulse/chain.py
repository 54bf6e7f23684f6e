"""Ising spin chain: configuration, stationary-state energies, resonance tables.

The chain is a line of N spin-1/2 nuclei in a field gradient.  Spin k has
Larmor frequency omega_k = base_larmor + k * larmor_spacing and couples to
its nearest neighbours with Ising strength J (the global frequency unit,
J = 1 internally).  A basis state is an N-bit integer: bit k is the k-th
spin counted from the right of the written ket, 0 for the spin aligned
with the field and 1 for the flipped spin.  Its energy is

    E = -1/2 * sum_k omega_k * s_k  -  J/2 * sum_k s_k * s_{k+1}

with s_k = +1 for bit 0 and -1 for bit 1.

Driving a single-spin flip is resonant at |E_after - E_before|, which takes
the values omega_k +- J for end spins and omega_k, omega_k +- 2J for inner
spins depending on the neighbour configuration; a chain therefore has
3N - 2 resonant lines.  ``classify_transition`` decides, for a given basis
state and drive frequency, which spin responds and whether the transition
is resonant, near-resonant (detuning up to 4J), or non-resonant.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .exceptions import AmbiguousTransitionError

# |detuning| < RESONANCE_TOL * J counts as exactly resonant; frequencies are
# constructed, not measured, so exact cancellation is the expected case.
RESONANCE_TOL = 1e-9

# Largest detuning treated as near-resonant.  The gate protocols only ever
# produce +-2J and +-4J; anything larger is a different spin's line.
NEAR_RESONANT_MAX_J = 4.0


@dataclass(frozen=True)
class ChainConfig:
    """Static description of the chain and the simulation cutoff.

    All frequencies are in units of the Ising coupling.  ``base_larmor``
    defaults to 10 * larmor_spacing, which keeps every resonant line
    positive; only frequency differences enter the dynamics.
    """

    n_qubits: int
    larmor_spacing: float
    base_larmor: float | None = None
    coupling: float = 1.0
    cutoff: float = 1e-6

    def __post_init__(self):
        # N = 1 is allowed as a degenerate case for solver unit checks;
        # the chain proper starts at N = 2.
        if self.n_qubits < 1:
            raise ValueError(f"need at least 1 qubit, got {self.n_qubits}")
        if self.larmor_spacing <= 0:
            raise ValueError("larmor_spacing must be positive")
        if self.coupling <= 0:
            raise ValueError("coupling must be positive")
        if not 0.0 < self.cutoff < 1.0:
            raise ValueError("cutoff must lie in (0, 1)")
        if self.base_larmor is None:
            object.__setattr__(self, "base_larmor", 10.0 * self.larmor_spacing)

    def omega(self, k: int) -> float:
        """Larmor frequency of spin k."""
        if not 0 <= k < self.n_qubits:
            raise ValueError(f"spin index {k} out of range for N={self.n_qubits}")
        return self.base_larmor + k * self.larmor_spacing

    @property
    def dimension(self) -> int:
        return 1 << self.n_qubits


class TransitionKind(enum.Enum):
    RESONANT = "resonant"
    NEAR_RESONANT = "near_resonant"
    NON_RESONANT = "non_resonant"


@dataclass(frozen=True)
class TransitionClass:
    """Outcome of matching one basis state against one drive frequency.

    ``detuning`` is signed: E_upper - E_lower - frequency for the flip of
    ``spin``, where upper/lower refer to the two states of the pair.
    """

    kind: TransitionKind
    spin: int
    detuning: float

    @property
    def resonant(self) -> bool:
        return self.kind is TransitionKind.RESONANT

    @property
    def near_resonant(self) -> bool:
        return self.kind is TransitionKind.NEAR_RESONANT


# -- basis-state helpers -----------------------------------------------------

def state_from_string(bits: str) -> int:
    """Parse a written ket like '1010'; leftmost character is spin N-1."""
    return int(bits, 2)

def state_to_string(state: int, n_qubits: int) -> str:
    return format(state, f"0{n_qubits}b")

def flip_count(state: int) -> int:
    """Number of flipped spins (bits set)."""
    return state.bit_count()


def basis_energy(state: int, cfg: ChainConfig) -> float:
    """Diagonal energy of a basis state under the static chain Hamiltonian."""
    n = cfg.n_qubits
    if not 0 <= state < (1 << n):
        raise ValueError(f"state {state} does not fit in {n} bits")
    zeeman = 0.0
    for k in range(n):
        s = 1 - 2 * ((state >> k) & 1)
        zeeman += cfg.omega(k) * s
    bonds = 0
    for k in range(n - 1):
        bonds += 1 if ((state >> k) & 1) == ((state >> (k + 1)) & 1) else -1
    return -0.5 * zeeman - 0.5 * cfg.coupling * bonds


def flip_energy(state: int, k: int, cfg: ChainConfig) -> float:
    """Signed energy change when spin k of ``state`` is flipped.

    Positive when the flip raises the energy (the state is the lower level
    of the pair).  Only the flipped spin and its neighbours contribute, so
    this is O(1) and exactly consistent with ``basis_energy`` differences.
    """
    n = cfg.n_qubits
    if not 0 <= k < n:
        raise ValueError(f"spin index {k} out of range for N={n}")
    s = 1 - 2 * ((state >> k) & 1)
    neighbours = 0
    if k > 0:
        neighbours += 1 - 2 * ((state >> (k - 1)) & 1)
    if k < n - 1:
        neighbours += 1 - 2 * ((state >> (k + 1)) & 1)
    return s * cfg.omega(k) + cfg.coupling * s * neighbours


def transition_frequency(state: int, k: int, cfg: ChainConfig) -> float:
    """Resonant drive frequency for flipping spin k of ``state``."""
    return abs(flip_energy(state, k, cfg))


def resonant_frequency_table(cfg: ChainConfig) -> list[float]:
    """All 3N - 2 single-spin resonant frequencies of the chain, sorted."""
    j = cfg.coupling
    if cfg.n_qubits == 1:
        return [cfg.omega(0)]
    freqs = [cfg.omega(0) + j, cfg.omega(0) - j]
    for k in range(1, cfg.n_qubits - 1):
        w = cfg.omega(k)
        freqs.extend((w - 2 * j, w, w + 2 * j))
    w = cfg.omega(cfg.n_qubits - 1)
    freqs.extend((w - j, w + j))
    freqs.sort()
    return freqs


def _candidate_spins(freq: float, cfg: ChainConfig) -> range:
    """Spins whose Larmor frequency could be within the near-resonant window.

    A transition of spin k lies within 2J of omega_k, so for spacing well
    above the coupling only the spin nearest in frequency (plus immediate
    neighbours, to cover rounding) can compete.  For small spacings fall
    back to scanning the whole chain.
    """
    n = cfg.n_qubits
    if cfg.larmor_spacing <= 8.0 * cfg.coupling:
        return range(n)
    guess = round((freq - cfg.base_larmor) / cfg.larmor_spacing)
    lo = max(0, min(n - 1, guess - 1))
    hi = max(0, min(n - 1, guess + 1))
    return range(lo, hi + 1)


def nearest_flip(state: int, freq: float, cfg: ChainConfig) -> tuple[int, float]:
    """Spin whose transition lies closest to ``freq`` and its signed flip energy.

    Raises AmbiguousTransitionError when a second spin also falls inside the
    near-resonant window, which would invalidate the two-level reduction.
    """
    best_k = -1
    best_e = 0.0
    best_d = float("inf")
    second_d = float("inf")
    for k in _candidate_spins(freq, cfg):
        e = flip_energy(state, k, cfg)
        d = abs(abs(e) - freq)
        if d < best_d:
            second_d = best_d
            best_d, best_k, best_e = d, k, e
        elif d < second_d:
            second_d = d
    window = NEAR_RESONANT_MAX_J * cfg.coupling + RESONANCE_TOL * cfg.coupling
    if best_d <= window and second_d <= window:
        raise AmbiguousTransitionError(
            f"state {state}: two transitions within {window} of drive {freq}"
        )
    return best_k, best_e


def classify_transition(state: int, freq: float, cfg: ChainConfig) -> TransitionClass:
    """Match ``state`` against a drive at ``freq``.

    Returns the responding spin with its signed detuning
    Delta = E_upper - E_lower - freq.  Resonant means |Delta| below the
    construction tolerance; near-resonant means |Delta| up to 4J; everything
    farther is non-resonant and the state ignores the pulse.
    """
    k, e = nearest_flip(state, freq, cfg)
    delta = abs(e) - freq
    j = cfg.coupling
    if abs(delta) < RESONANCE_TOL * j:
        kind = TransitionKind.RESONANT
    elif abs(delta) <= NEAR_RESONANT_MAX_J * j + RESONANCE_TOL * j:
        kind = TransitionKind.NEAR_RESONANT
    else:
        kind = TransitionKind.NON_RESONANT
    return TransitionClass(kind=kind, spin=k, detuning=delta)
