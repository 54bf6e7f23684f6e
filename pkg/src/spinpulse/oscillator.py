"""Classical-oscillator equivalent of the chain dynamics.

The amplitude equations i dc_n/dt = E_n c_n + sum_k V_nk(t) c_k are linear,
so they can be read as Hamilton's equations for 2^N coordinate/momentum
pairs.  With c_n = x_n + i p_n the classical Hamiltonian

    H = sum_n E_n (x_n^2 + p_n^2) / 2
        + 1/2 sum_{n,k} [x_n Re(V_nk) x_k + p_n Re(V_nk) p_k + 2 p_n Im(V_nk) x_k]

yields

    dx_n/dt =  E_n p_n + sum_k [Re(V_nk) p_k + Im(V_nk) x_k]
    dp_n/dt = -E_n x_n - sum_k [Re(V_nk) x_k - Im(V_nk) p_k]

which reproduce the amplitude equations exactly.  The drive matrix couples
only single-flip pairs: V(t) = -(rabi/2) (e^{-i nu t} F + e^{+i nu t} F^T)
with F the raise-one-spin matrix, so Re V = -(rabi/2) cos(nu t) (F + F^T)
and Im V = -(rabi/2) sin(nu t) (F^T - F).

Convention: the map between amplitudes and oscillator pairs is c = x + i p,
so sum(x^2 + p^2) equals the quantum norm (one for a normalized state) and
a free pair rotates at E_n.  Any uniform rescaling of (x, p) leaves these
linear equations unchanged; the unit-sum normalization is the one the norm
check uses.

Integration is fixed-step classic Runge-Kutta.  The default step keeps the
fastest phase advance per step at or below 0.05 and tightens further until
the estimated norm drift over the whole protocol is within tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainConfig
from .exact_engine import h0_energies
from .exceptions import IntegrationStepError, QubitCapError
from .pulses import Protocol, Pulse
from .report import RunReport, TraceEntry, make_report
from .sparse_engine import SparseState

CLASSICAL_QUBIT_CAP = 8


@dataclass
class OscillatorState:
    """2^N canonical pairs: x[n] = Re c_n, p[n] = Im c_n."""

    x: np.ndarray
    p: np.ndarray
    time: float = 0.0


def to_classical(amps: np.ndarray, time: float = 0.0) -> OscillatorState:
    c = np.asarray(amps, dtype=np.complex128)
    return OscillatorState(x=c.real.copy(), p=c.imag.copy(), time=time)


def to_quantum(state: OscillatorState) -> np.ndarray:
    return state.x + 1j * state.p


def classical_norm(state: OscillatorState) -> float:
    return float(np.sum(state.x * state.x + state.p * state.p))


def _check_cap(cfg: ChainConfig, cap: int) -> None:
    if cfg.n_qubits > cap:
        raise QubitCapError(
            f"N={cfg.n_qubits} exceeds the classical cap {cap}: "
            f"the mapping needs 2^N oscillator pairs"
        )


def _coupling_matrices(cfg: ChainConfig) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric flip adjacency S = F + F^T and antisymmetric K = F^T - F."""
    dim = 1 << cfg.n_qubits
    raise_m = np.zeros((dim, dim))
    for m in range(dim):
        for k in range(cfg.n_qubits):
            if not (m >> k) & 1:
                raise_m[m | (1 << k), m] = 1.0
    return raise_m + raise_m.T, raise_m.T - raise_m


def _stage_matrices(
    energies: np.ndarray, s_mat: np.ndarray, k_mat: np.ndarray, rabi: float
) -> np.ndarray:
    """Stacked generators: dy/dt = (W0 + cos(nu t) W1 + sin(nu t) W2) y."""
    dim = energies.size
    w0 = np.zeros((2 * dim, 2 * dim))
    w0[:dim, dim:] = np.diag(energies)
    w0[dim:, :dim] = -np.diag(energies)
    w1 = np.zeros_like(w0)
    w1[:dim, dim:] = -0.5 * rabi * s_mat
    w1[dim:, :dim] = 0.5 * rabi * s_mat
    w2 = np.zeros_like(w0)
    w2[:dim, :dim] = -0.5 * rabi * k_mat
    w2[dim:, dim:] = -0.5 * rabi * k_mat
    return np.stack([w0, w1, w2])


def default_step(cfg: ChainConfig, protocol: Protocol, norm_tol: float) -> float:
    """Fixed step honouring both the 0.05-phase rule and the norm budget.

    The classic Runge-Kutta stability function on a pure oscillation of
    frequency w has modulus 1 - (wh)^6/144 + O((wh)^8), so the norm drifts
    by about T * w * (wh)^5 / 72 over a run of length T; the step is chosen
    to keep that a factor four inside the tolerance.
    """
    energies = h0_energies(cfg)
    fastest = float(np.max(np.abs(energies)))
    fastest += max(p.frequency for p in protocol.pulses)
    fastest += max(p.rabi for p in protocol.pulses)
    total_time = sum(p.duration for p in protocol.pulses)
    h = 0.05 / fastest
    budget = norm_tol * 72.0 / (4.0 * total_time * fastest)
    h = min(h, budget**0.2 / fastest)
    return h


def _integrate_pulse(
    y: np.ndarray,
    w: np.ndarray,
    freq: float,
    t_start: float,
    duration: float,
    step: float,
) -> np.ndarray:
    n_steps = max(1, math.ceil(duration / step))
    h = duration / n_steps
    w0, w1, w2 = w[0], w[1], w[2]
    cos, sin = math.cos, math.sin

    def deriv(ti: float, yi: np.ndarray) -> np.ndarray:
        a = freq * ti
        return w0 @ yi + cos(a) * (w1 @ yi) + sin(a) * (w2 @ yi)

    t = t_start
    # an oversized step blows the norm up; the caller reports that as a
    # step error, so overflow here is not an arithmetic concern
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(n_steps):
            k1 = deriv(t, y)
            k2 = deriv(t + 0.5 * h, y + 0.5 * h * k1)
            k3 = deriv(t + 0.5 * h, y + 0.5 * h * k2)
            k4 = deriv(t + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
    return y


def integrate(
    state: OscillatorState,
    protocol: Protocol | list[Pulse] | tuple[Pulse, ...],
    cfg: ChainConfig,
    step: float | None = None,
    *,
    norm_tol: float = 1e-9,
    cap: int = CLASSICAL_QUBIT_CAP,
) -> OscillatorState:
    """Integrate the oscillator pairs through a full pulse sequence.

    Raises IntegrationStepError when the norm drifts by more than
    ``norm_tol`` over the protocol, the signature of a too-large step.
    """
    _check_cap(cfg, cap)
    if not isinstance(protocol, Protocol):
        protocol = Protocol(pulses=tuple(protocol))
    if not protocol.pulses:
        return OscillatorState(x=state.x.copy(), p=state.p.copy(), time=state.time)
    if step is None:
        step = default_step(cfg, protocol, norm_tol)

    energies = h0_energies(cfg)
    s_mat, k_mat = _coupling_matrices(cfg)
    dim = energies.size
    y = np.concatenate([state.x, state.p]).astype(np.float64)
    norm_in = float(np.sum(y * y))
    t = state.time
    for pulse in protocol.pulses:
        w = _stage_matrices(energies, s_mat, k_mat, pulse.rabi)
        y = _integrate_pulse(y, w, pulse.frequency, t, pulse.duration, step)
        t += pulse.duration

    norm_out = float(np.sum(y * y))
    if not math.isfinite(norm_out) or abs(norm_out - norm_in) > norm_tol * max(1.0, norm_in):
        raise IntegrationStepError(
            f"norm drifted by {abs(norm_out - norm_in):.3e} over the protocol "
            f"(tolerance {norm_tol:.1e}); reduce the step"
        )
    return OscillatorState(x=y[:dim].copy(), p=y[dim:].copy(), time=t)


def run_protocol_classical(
    initial: SparseState | dict[int, complex] | np.ndarray,
    protocol: Protocol | list[Pulse] | tuple[Pulse, ...],
    cfg: ChainConfig,
    *,
    step: float | None = None,
    norm_tol: float = 1e-9,
    cutoff: float | None = None,
    trace: bool = False,
    doubled: bool = False,
    seed: int | None = None,
    cap: int = CLASSICAL_QUBIT_CAP,
) -> RunReport:
    """Run the oscillator system through a protocol and report |c_n|^2.

    The oscillator pairs carry laboratory-frame amplitudes; only their
    probabilities are reported, which coincide with the other engines'.
    ``leaked`` is the probability left below the reporting cutoff.
    """
    _check_cap(cfg, cap)
    if not isinstance(protocol, Protocol):
        protocol = Protocol(pulses=tuple(protocol))
    threshold = cfg.cutoff if cutoff is None else cutoff
    dim = 1 << cfg.n_qubits

    if isinstance(initial, SparseState):
        entries: dict[int, complex] | None = initial.amps
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

    if step is None and protocol.pulses:
        step = default_step(cfg, protocol, norm_tol)
    energies = h0_energies(cfg)
    s_mat, k_mat = _coupling_matrices(cfg)

    osc = to_classical(c)
    ref_state = protocol.initial_state if protocol.initial_state is not None else 0
    probs = osc.x**2 + osc.p**2
    generation = {int(s): 0 for s in np.flatnonzero(probs >= threshold)}
    trace_rows: list[TraceEntry] | None = None
    if trace:
        amp0 = complex(osc.x[ref_state], osc.p[ref_state])
        trace_rows = [TraceEntry(0, 0.0, float(probs.sum()), 0.0, len(generation), amp0)]

    y = np.concatenate([osc.x, osc.p])
    norm_in = float(np.sum(y * y))
    t = 0.0
    for idx, pulse in enumerate(protocol.pulses, start=1):
        w = _stage_matrices(energies, s_mat, k_mat, pulse.rabi)
        y = _integrate_pulse(y, w, pulse.frequency, t, pulse.duration, step)
        t += pulse.duration
        probs = y[:dim] ** 2 + y[dim:] ** 2
        for s in np.flatnonzero(probs >= threshold):
            s = int(s)
            if s not in generation:
                generation[s] = idx
        if trace_rows is not None:
            amp = complex(y[ref_state], y[dim + ref_state])
            trace_rows.append(
                TraceEntry(idx, t, float(probs.sum()), 0.0,
                           int((probs >= threshold).sum()), amp)
            )

    norm_out = float(np.sum(y * y))
    if not math.isfinite(norm_out) or abs(norm_out - norm_in) > norm_tol * max(1.0, norm_in):
        raise IntegrationStepError(
            f"norm drifted by {abs(norm_out - norm_in):.3e} over the protocol "
            f"(tolerance {norm_tol:.1e}); reduce the step"
        )

    probs = y[:dim] ** 2 + y[dim:] ** 2
    keep = np.flatnonzero(probs >= threshold)
    final_amps = {int(s): complex(y[s], y[dim + s]) for s in keep}
    leaked = float(probs.sum()) - float(probs[keep].sum())

    return make_report(
        "classical",
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
