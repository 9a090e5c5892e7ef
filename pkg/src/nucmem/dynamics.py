"""Qubit write/read storage protocol and exact-vs-effective evolution.

At resonance the ideal-boson model is block diagonal over the pairs
Z_m = {|up, m>, |down, m+1>}; each block evolves with

    U_m(t) = exp(-i omega_z m t) [[cos W_m t, -i sin W_m t],
                                  [-i sin W_m t, cos W_m t]],
    W_m = sqrt(m+1) Omega,

and the uncoupled |down, 0> acquires the phase exp(+i omega_z t).
Starting from the polarized memory, a quarter period t = pi / (2 Omega)
swaps the electron qubit into the two lowest memory levels up to the fixed
rotation W = [[0, 1], [-i exp(-i omega_z pi / (2 Omega)), 0]]; applying
W^-1 recovers the qubit exactly in the ideal model.  A memory prepared
with m > 0 quanta splits the two electron branches across different blocks
and the map no longer factorizes, which is the systematic error probed by
storage_error_sweep.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError
from .fockspace import (
    SPIN_DOWN,
    SPIN_UP,
    StateVector,
    SubspaceBasis,
    bright_fock_state,
    enumerate_sectors,
)
from .hamiltonian import (
    ModelParams,
    build_full,
    build_site_exchange,
    rabi_frequency,
    sector_energy,
)
from .spectra import dense_eig

_NORM_TOL = 1e-11


@dataclass(frozen=True)
class QubitState:
    """Normalized electron qubit alpha |up> + beta |down>."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise InvalidArgumentError(
                f"qubit amplitudes not normalized: |a|^2+|b|^2 = {norm!r}")

    @classmethod
    def make(cls, alpha, beta) -> "QubitState":
        norm = np.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
        if norm == 0.0:
            raise InvalidArgumentError("zero qubit vector")
        return cls(complex(alpha) / norm, complex(beta) / norm)

    @classmethod
    def random(cls, rng) -> "QubitState":
        v = rng.normal(size=4)
        return cls.make(v[0] + 1j * v[1], v[2] + 1j * v[3])


def write_time(params: ModelParams) -> float:
    """Design point of the write map, a quarter of the m=0 Rabi period."""
    return float(np.pi / (2.0 * rabi_frequency(params)))


def jc_block_propagator(params: ModelParams, m: int, t: float) -> np.ndarray:
    """Unitary U_m(t) on the pair (|up, m>, |down, m+1>)."""
    if m < 0:
        raise InvalidArgumentError(f"block index m must be >= 0, got {m}")
    if t < 0:
        raise InvalidArgumentError(f"time must be >= 0, got {t}")
    w_m = np.sqrt(m + 1.0) * rabi_frequency(params)
    c, s = np.cos(w_m * t), np.sin(w_m * t)
    return np.exp(-1j * params.omega_z * m * t) * np.array(
        [[c, -1j * s], [-1j * s, c]], dtype=complex)


def write_rotation(params: ModelParams) -> np.ndarray:
    """Fixed qubit-independent rotation W produced by the write map."""
    phase = np.exp(-1j * params.omega_z * write_time(params))
    return np.array([[0.0, 1.0], [-1j * phase, 0.0]], dtype=complex)


class EffectiveState:
    """Electron (x) ideal-boson composite state, dense over levels 0..L-1."""

    def __init__(self, up: np.ndarray, down: np.ndarray):
        up = np.asarray(up, dtype=complex)
        down = np.asarray(down, dtype=complex)
        if up.shape != down.shape or up.ndim != 1:
            raise InvalidArgumentError("up/down amplitude arrays must match")
        self.up = up
        self.down = down

    @property
    def levels(self) -> int:
        return self.up.size

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.linalg.norm(self.up) ** 2
                             + np.linalg.norm(self.down) ** 2))

    def padded(self, levels: int) -> "EffectiveState":
        if levels < self.levels:
            raise InvalidArgumentError("cannot shrink the level ladder")
        up = np.zeros(levels, complex); up[:self.levels] = self.up
        down = np.zeros(levels, complex); down[:self.levels] = self.down
        return EffectiveState(up, down)

    def overlap(self, other: "EffectiveState") -> complex:
        levels = max(self.levels, other.levels)
        a, b = self.padded(levels), other.padded(levels)
        return complex(np.vdot(a.up, b.up) + np.vdot(a.down, b.down))

    def fidelity(self, other: "EffectiveState") -> float:
        return abs(self.overlap(other))

    def trace_distance(self, other: "EffectiveState") -> float:
        f = min(self.fidelity(other), 1.0)
        return float(np.sqrt(1.0 - f * f))

    def down_probability(self) -> float:
        return float(np.linalg.norm(self.down) ** 2)

    def electron_rho(self) -> np.ndarray:
        rho = np.empty((2, 2), dtype=complex)
        rho[0, 0] = np.vdot(self.up, self.up)
        rho[1, 1] = np.vdot(self.down, self.down)
        rho[0, 1] = np.vdot(self.down, self.up)  # <down| traced component
        rho[1, 0] = np.conj(rho[0, 1])
        return rho

    def memory_rho(self) -> np.ndarray:
        return np.outer(self.up, self.up.conj()) + np.outer(self.down, self.down.conj())

    def memory_given_down(self) -> np.ndarray:
        """Normalized memory amplitudes after projecting the electron on down."""
        p = np.linalg.norm(self.down)
        if p == 0.0:
            raise InvalidArgumentError("no amplitude in the down branch")
        return self.down / p


def effective_evolve(params: ModelParams, electron: QubitState,
                     memory_m: int, t: float) -> EffectiveState:
    """Evolve (alpha |up> + beta |down>) (x) |m> under the ideal-boson model.

    The alpha branch lives in block Z_m, the beta branch in Z_{m-1}; for
    m = 0 the beta branch is the uncoupled |down, 0> and only picks up the
    phase exp(+i omega_z t).
    """
    if memory_m < 0:
        raise InvalidArgumentError(f"memory occupation must be >= 0, got {memory_m}")
    levels = memory_m + 2
    up = np.zeros(levels, complex)
    down = np.zeros(levels, complex)
    m = memory_m
    u_m = jc_block_propagator(params, m, t)
    up[m] += electron.alpha * u_m[0, 0]
    down[m + 1] += electron.alpha * u_m[1, 0]
    if m >= 1:
        u_prev = jc_block_propagator(params, m - 1, t)
        up[m - 1] += electron.beta * u_prev[0, 1]
        down[m] += electron.beta * u_prev[1, 1]
    else:
        down[0] += electron.beta * np.exp(1j * params.omega_z * t)
    return EffectiveState(up, down)


def _ideal_swap_target(params: ModelParams, electron: QubitState,
                       memory_m: int, t: float) -> EffectiveState:
    """Factorized target |down>(beta e^{-i w_z (m-1) t} |m> - i alpha e^{-i w_z m t} |m+1>).

    For m = 0 at the design time this is exactly the write-map output
    (the beta phase reduces to the uncoupled-state phase e^{+i w_z t}).
    """
    m = memory_m
    levels = m + 2
    up = np.zeros(levels, complex)
    down = np.zeros(levels, complex)
    wz = params.omega_z
    down[m] = electron.beta * np.exp(-1j * wz * (m - 1) * t)
    down[m + 1] = -1j * electron.alpha * np.exp(-1j * wz * m * t)
    return EffectiveState(up, down)


@dataclass
class StorageResult:
    """Outcome of the ideal-model write map at t = pi / (2 Omega)."""

    params: ModelParams
    qubit: QubitState
    time: float
    final: EffectiveState
    electron_rho: np.ndarray
    memory_rho: np.ndarray
    write_fidelity: float
    decode_fidelity: float
    leakage: float
    created_at: float = field(default_factory=_time.time)


def write_qubit(params: ModelParams, electron: QubitState) -> StorageResult:
    """Run the ideal write map and score it against the factorized target.

    write_fidelity compares the down-projected, normalized memory state
    with the target W (alpha, beta); decode_fidelity applies W^-1 to the
    memory amplitudes and compares with the input qubit.  Both are
    phase-insensitive overlap moduli; leakage is the electron population
    left outside |down>.
    """
    t = write_time(params)
    final = effective_evolve(params, electron, 0, t)
    mem = final.memory_given_down()[:2]
    target = write_rotation(params) @ np.array([electron.alpha, electron.beta])
    write_fid = abs(np.vdot(target, mem))
    decoded = np.linalg.solve(write_rotation(params), mem)
    decoded /= np.linalg.norm(decoded)
    decode_fid = abs(np.vdot(np.array([electron.alpha, electron.beta]), decoded))
    return StorageResult(
        params=params,
        qubit=electron,
        time=t,
        final=final,
        electron_rho=final.electron_rho(),
        memory_rho=final.memory_rho(),
        write_fidelity=float(write_fid),
        decode_fidelity=float(decode_fid),
        leakage=float(1.0 - final.down_probability()),
    )


class SweepRow(NamedTuple):
    t: float
    m: int
    fidelity: float
    leakage: float
    deviation: float


def storage_error_sweep(params: ModelParams, electron: QubitState,
                        m_list: Sequence[int], t_grid: Sequence[float]) -> List[SweepRow]:
    """Systematic error of the write map for excited memory states.

    For every occupation m and time t, the ideal-model state is compared
    with the factorized swap target; deviation is the pure-state trace
    distance, fidelity the overlap modulus, leakage the electron
    population outside |down>.  The m = 0 row vanishes at the design time.
    """
    rows = []
    for m in m_list:
        for t in t_grid:
            state = effective_evolve(params, electron, m, t)
            target = _ideal_swap_target(params, electron, m, t)
            fid = state.fidelity(target)
            rows.append(SweepRow(
                t=float(t), m=int(m),
                fidelity=float(fid),
                leakage=float(1.0 - state.down_probability()),
                deviation=state.trace_distance(target),
            ))
    return rows


def write_sweep_csv(rows: Sequence[SweepRow], path) -> None:
    with open(path, "w") as fh:
        fh.write("t,m,fidelity,leakage,deviation\n")
        for r in rows:
            fh.write(f"{r.t:.17g},{r.m},{r.fidelity:.17g},"
                     f"{r.leakage:.17g},{r.deviation:.17g}\n")


# ---------------------------------------------------------------------------
# exact evolution on the spin ensemble
# ---------------------------------------------------------------------------

class ExactEvolution:
    """Propagator exp(-i H t) on a basis via one dense eigendecomposition.

    The decomposition is computed once and shared by all times, so time
    grids cost one matrix-vector product per point.
    """

    def __init__(self, params: ModelParams, basis: SubspaceBasis,
                 use_full_h: bool = True, dim_cap: int = 5000):
        op = build_full(params, basis) if use_full_h else build_site_exchange(params, basis)
        self.basis = basis
        self.use_full_h = use_full_h
        self.eigenvalues, self.eigenvectors = dense_eig(op, dim_cap=dim_cap)

    def propagate(self, state: StateVector, t: float) -> StateVector:
        if state.basis is not self.basis:
            raise InvalidArgumentError("state does not live on the propagator's basis")
        coeff = self.eigenvectors.conj().T @ state.amplitudes
        out = self.eigenvectors @ (np.exp(-1j * self.eigenvalues * t) * coeff)
        result = StateVector(self.basis, out)
        drift = abs(result.norm - state.norm)
        if drift > _NORM_TOL:
            raise ArithmeticError(f"norm drift {drift:.3e} exceeds {_NORM_TOL:g}")
        return result


def exact_evolve(params: ModelParams, basis: SubspaceBasis, initial: StateVector,
                 t: float, use_full_h: bool = True) -> StateVector:
    """One-shot exp(-i H t) |initial> with H the full or exchange-only model."""
    return ExactEvolution(params, basis, use_full_h).propagate(initial, t)


def protocol_basis(params: ModelParams) -> SubspaceBasis:
    """V_0 plus the uncoupled polarized-down state, the write protocol arena."""
    return enumerate_sectors(params.N, params.I0,
                             [(SPIN_UP, 0), (SPIN_DOWN, 1), (SPIN_DOWN, 0)])


@dataclass
class ExactStorageOutcome:
    """Exact write-map run scored against the ideal-model prediction."""

    params: ModelParams
    qubit: QubitState
    time: float
    basis: SubspaceBasis
    exact: StateVector
    predicted: StateVector
    fidelity: float          # |<predicted|exact>|
    trace_distance: float    # sqrt(1 - fidelity^2)
    down_probability: float


def write_qubit_exact(params: ModelParams, electron: QubitState,
                      use_full_h: bool = True,
                      t: Optional[float] = None) -> ExactStorageOutcome:
    """Run the write protocol under the exact ensemble Hamiltonian.

    The prediction is the ideal-model output carried into the spin basis:
    the alpha branch rotates inside {|up, G>, |down, b>} with the bright
    one-quantum state b, the beta branch is the uncoupled polarized-down
    state; under the full Hamiltonian both acquire their sector phases,
    which differ by exactly omega_z at resonance.
    """
    basis = protocol_basis(params)
    if t is None:
        t = write_time(params)
    amps = np.zeros(basis.dim, complex)
    up_slice = basis.sector_slice(SPIN_UP, 0)
    down1_slice = basis.sector_slice(SPIN_DOWN, 1)
    dark_slice = basis.sector_slice(SPIN_DOWN, 0)
    amps[up_slice.start] = electron.alpha
    amps[dark_slice.start] = electron.beta
    initial = StateVector(basis, amps)
    final = ExactEvolution(params, basis, use_full_h).propagate(initial, t)

    omega = rabi_frequency(params)
    bright = bright_fock_state(params.profile, params.I0, 1).state
    if use_full_h:
        mu0 = sector_energy(params, SPIN_UP, 0)
        phase_block = np.exp(-1j * mu0 * t)
        phase_dark = np.exp(-1j * (sector_energy(params, SPIN_DOWN, 0)) * t)
    else:
        phase_block = phase_dark = 1.0
    pred = np.zeros(basis.dim, complex)
    pred[up_slice.start] = electron.alpha * phase_block * np.cos(omega * t)
    pred[down1_slice] = (electron.alpha * phase_block * (-1j)
                         * np.sin(omega * t) * bright.amplitudes)
    pred[dark_slice.start] = electron.beta * phase_dark
    predicted = StateVector(basis, pred)

    fid = abs(predicted.dot(final))
    down_prob = (float(np.linalg.norm(final.amplitudes[down1_slice]) ** 2)
                 + float(np.linalg.norm(final.amplitudes[dark_slice]) ** 2))
    return ExactStorageOutcome(
        params=params, qubit=electron, time=float(t), basis=basis,
        exact=final, predicted=predicted,
        fidelity=float(fid),
        trace_distance=float(np.sqrt(max(0.0, 1.0 - fid * fid))),
        down_probability=down_prob,
    )
