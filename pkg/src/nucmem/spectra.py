"""Exact and effective spectra, cluster analysis, and perturbation size.

The exchange Hamiltonian on V_n has, in the ideal single-mode picture, the
spectrum {+-Omega sqrt(m+1)} for bright occupation m = 0..n, each value
repeated once per way of distributing the remaining n - m quanta over the
N - 1 auxiliary modes, plus a zero eigenvalue for every down state with no
bright quantum.  The exact spin ensemble reproduces this structure with
lines shifted at relative order n/N (hardcore effect) and with fewer zero
modes, since a spin site cannot hold two quanta.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DegenerateStateError, InvalidArgumentError, ResourceCapError
from .couplings import ModeBasis
from .fockspace import (
    SPIN_DOWN,
    SPIN_UP,
    NuclearSector,
    SparseOperator,
    StateVector,
    SubspaceBasis,
    apply_collective_raising,
    ground_state,
)
from .hamiltonian import ModelParams, build_inhomogeneity, rabi_frequency

DEFAULT_DENSE_CAP = 5000
_DEGENERACY_TOL_RATIO = 1e-8
_RESIDUAL_TOL = 1e-10
DEFAULT_CLUSTER_TOL_RATIO = 0.05
_EFFECTIVE_ENTRY_CAP = 10 ** 7


class Cluster(NamedTuple):
    center: float
    count: int
    spread: float


@dataclass
class Spectrum:
    """Sorted eigenvalues plus their degeneracy clusters.

    `scale` is the unit used for relative statements (the collective Rabi
    frequency when known); `diag_offset` records a constant diagonal shift
    reported separately from the eigenvalues.
    """

    eigenvalues: np.ndarray
    clusters: List[Cluster]
    source: str
    scale: Optional[float] = None
    diag_offset: float = 0.0
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.size)

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("index,eigenvalue\n")
            for i, v in enumerate(self.eigenvalues):
                fh.write(f"{i},{v:.17g}\n")


def cluster_eigenvalues(values: np.ndarray, tol: float) -> List[Cluster]:
    """Group sorted values, splitting wherever the gap exceeds tol."""
    values = np.sort(np.asarray(values, dtype=float))
    if values.size == 0:
        return []
    groups = []
    start = 0
    for i in range(1, values.size):
        if values[i] - values[i - 1] > tol:
            groups.append(values[start:i])
            start = i
    groups.append(values[start:])
    return [Cluster(center=float(g.mean()), count=int(g.size),
                    spread=float(g[-1] - g[0])) for g in groups]


def dense_eig(op: SparseOperator, dim_cap: int = DEFAULT_DENSE_CAP,
              residual_check: bool = True):
    """Dense hermitian eigendecomposition with validation.

    Returns (eigenvalues, eigenvectors).  The residual ||A v - w v|| of
    every pair is checked against 1e-10 ||A||_2 (= 1e-10 max |w|).
    """
    if not op.hermitian:
        raise InvalidArgumentError("eigensolver requires a hermitian operator")
    dim = op.dim
    if dim > dim_cap:
        raise ResourceCapError(
            f"dense solve of dimension {dim} exceeds cap {dim_cap}",
            requested=dim, cap=dim_cap)
    dense = op.toarray()
    if np.iscomplexobj(dense) and np.abs(dense.imag).max() == 0.0:
        dense = dense.real
    w, v = np.linalg.eigh(dense)
    if residual_check and dim:
        norm = max(np.abs(w).max(), np.finfo(float).tiny)
        resid = np.linalg.norm(dense @ v - v * w, axis=0).max()
        if resid > _RESIDUAL_TOL * norm:
            raise ArithmeticError(
                f"eigensolver residual {resid:.3e} exceeds {_RESIDUAL_TOL:g} * ||A||")
    return w, v


def eigensolve(op: SparseOperator, dim_cap: int = DEFAULT_DENSE_CAP,
               scale: Optional[float] = None, source: str = "exact",
               residual_check: bool = True) -> Spectrum:
    """Full ascending spectrum of a hermitian operator, with clusters."""
    w, _ = dense_eig(op, dim_cap=dim_cap, residual_check=residual_check)
    ref = scale if scale is not None else (float(np.abs(w).max()) if w.size else 1.0)
    tol = _DEGENERACY_TOL_RATIO * max(ref, np.finfo(float).tiny)
    return Spectrum(
        eigenvalues=w,
        clusters=cluster_eigenvalues(w, tol),
        source=source,
        scale=scale,
        metadata={"degeneracy_tol": tol},
    )


def effective_spectrum(params: ModelParams, n: int) -> Spectrum:
    """Analytic ideal-boson spectrum of the exchange part on V_n.

    Values +-Omega sqrt(m+1) with multiplicity C(n - m + N - 2, N - 2)
    for m = 0..n, plus zero with multiplicity C(n + N - 1, N - 2) (down
    states carrying all n + 1 quanta in auxiliary modes).  The common
    diagonal shift n omega_z is reported in diag_offset, not mixed into
    the eigenvalues.
    """
    if not params.resonant:
        raise InvalidArgumentError("effective spectrum is defined at resonance")
    if n < 0:
        raise InvalidArgumentError(f"excitation n must be >= 0, got {n}")
    N = params.N
    omega = rabi_frequency(params)
    mult = [math.comb(n - m + N - 2, N - 2) for m in range(n + 1)]
    zeros = math.comb(n + N - 1, N - 2)
    total = 2 * sum(mult) + zeros
    if total > _EFFECTIVE_ENTRY_CAP:
        raise ResourceCapError(
            f"effective spectrum would hold {total} eigenvalues",
            requested=total, cap=_EFFECTIVE_ENTRY_CAP)
    parts = [np.zeros(zeros)]
    for m, k in enumerate(mult):
        line = omega * np.sqrt(m + 1.0)
        parts.append(np.full(k, line))
        parts.append(np.full(k, -line))
    values = np.sort(np.concatenate(parts))
    tol = _DEGENERACY_TOL_RATIO * omega
    return Spectrum(
        eigenvalues=values,
        clusters=cluster_eigenvalues(values, tol),
        source="effective",
        scale=omega,
        diag_offset=n * params.omega_z,
        metadata={"n": n, "N": N},
    )


@dataclass
class MatchedCluster:
    center_a: float
    count_a: int
    center_b: float
    count_b: int
    dev_abs: float
    dev_rel_scale: float
    dev_rel_center: float


@dataclass
class SpectrumComparison:
    """Cluster-by-cluster match between two spectra of the same system."""

    pairs: List[MatchedCluster]
    unmatched_a: List[Cluster]
    unmatched_b: List[Cluster]
    dim_a: int
    dim_b: int
    cluster_tol: float
    scale: float

    @property
    def max_rel_dev(self) -> float:
        return max((p.dev_rel_scale for p in self.pairs), default=0.0)

    @property
    def dimension_mismatch(self) -> int:
        """Total state-count disagreement (e.g. hardcore overcounting)."""
        mismatch = sum(abs(p.count_a - p.count_b) for p in self.pairs)
        mismatch += sum(c.count for c in self.unmatched_a)
        mismatch += sum(c.count for c in self.unmatched_b)
        return mismatch

    def to_json(self) -> str:
        return json.dumps({
            "scale": self.scale,
            "cluster_tol": self.cluster_tol,
            "dim_a": self.dim_a,
            "dim_b": self.dim_b,
            "dimension_mismatch": self.dimension_mismatch,
            "max_rel_dev": self.max_rel_dev,
            "pairs": [vars(p) for p in self.pairs],
            "unmatched_a": [c._asdict() for c in self.unmatched_a],
            "unmatched_b": [c._asdict() for c in self.unmatched_b],
        }, indent=2, sort_keys=True)


def compare_spectra(a: Spectrum, b: Spectrum,
                    cluster_tol: Optional[float] = None) -> SpectrumComparison:
    """Match clusters of two spectra by nearest center, injectively.

    Both spectra are re-clustered at `cluster_tol` (default 0.05 times the
    scale).  Deviations are reported both relative to the scale and
    relative to the matched center of `b`.
    """
    if a.dim == 0 or b.dim == 0:
        raise InvalidArgumentError("cannot compare empty spectra")
    scale = next((s for s in (a.scale, b.scale) if s), None)
    if scale is None:
        scale = float(max(np.abs(a.eigenvalues).max(), np.abs(b.eigenvalues).max()))
    if cluster_tol is None:
        cluster_tol = DEFAULT_CLUSTER_TOL_RATIO * scale
    ca = cluster_eigenvalues(a.eigenvalues, cluster_tol)
    cb = cluster_eigenvalues(b.eigenvalues, cluster_tol)
    cost = np.abs(np.subtract.outer([c.center for c in ca], [c.center for c in cb]))
    rows, cols = linear_sum_assignment(cost)
    pairs = []
    for i, j in zip(rows, cols):
        dev = abs(ca[i].center - cb[j].center)
        center_ref = abs(cb[j].center)
        pairs.append(MatchedCluster(
            center_a=ca[i].center, count_a=ca[i].count,
            center_b=cb[j].center, count_b=cb[j].count,
            dev_abs=dev,
            dev_rel_scale=dev / scale,
            dev_rel_center=dev / center_ref if center_ref > cluster_tol else float("nan"),
        ))
    pairs.sort(key=lambda p: p.center_a)
    matched_a = set(rows)
    matched_b = set(cols)
    return SpectrumComparison(
        pairs=pairs,
        unmatched_a=[c for i, c in enumerate(ca) if i not in matched_a],
        unmatched_b=[c for j, c in enumerate(cb) if j not in matched_b],
        dim_a=a.dim, dim_b=b.dim,
        cluster_tol=float(cluster_tol), scale=float(scale),
    )


# ---------------------------------------------------------------------------
# ideal eigenstates mapped onto the spin ensemble, and perturbation size
# ---------------------------------------------------------------------------

def effective_eigenstate(params: ModelParams, basis: SubspaceBasis,
                         modes: ModeBasis, m: int,
                         aux_occupations: Optional[dict] = None,
                         sign: int = +1) -> StateVector:
    """Ideal-model eigenstate with bright occupation m, mapped to spins.

    aux_occupations maps auxiliary mode index k (2..N) to its quantum
    number m_k; the state lives in V_n with n = m + sum(m_k).  The two
    electron branches are built as normalized nuclear states u (occupation
    n) and  A^dag u / ||A^dag u||  (occupation n + 1) and combined with
    equal weight:

        psi = (|up> u + sign |down> A^dag u) / sqrt(2).
    """
    if sign not in (+1, -1):
        raise InvalidArgumentError(f"sign must be +-1, got {sign!r}")
    aux_occupations = aux_occupations or {}
    n = m + sum(aux_occupations.values())
    if basis.n != n:
        raise InvalidArgumentError(
            f"state has total excitation {n}, basis is V_{basis.n}")
    nuc = ground_state(params.N, params.I0)
    for k, occ in sorted(aux_occupations.items()):
        vec = modes.vector(k)
        for _ in range(occ):
            nuc = apply_collective_raising(vec, nuc)
    for _ in range(m):
        nuc = apply_collective_raising(params.profile.g, nuc)
    if nuc.norm == 0.0:
        raise DegenerateStateError("requested occupation exceeds ensemble capacity")
    up = nuc.normalized()
    down = apply_collective_raising(params.profile.g, up).normalized()
    amps = np.zeros(basis.dim, dtype=complex)
    amps[basis.sector_slice(SPIN_UP, n)] = up.amplitudes / np.sqrt(2.0)
    amps[basis.sector_slice(SPIN_DOWN, n + 1)] = sign * down.amplitudes / np.sqrt(2.0)
    return StateVector(basis, amps)


class PerturbationReport(NamedTuple):
    ratio: float            # |<H_inhom>| / gap
    gap: float              # Omega sqrt(m+1)
    shift: float            # |<H_inhom>|
    shift_estimate: float   # n gbar / 4, the first-order rule of thumb
    ratio_estimate: float   # shift_estimate / gap


def perturbation_ratio(params: ModelParams, basis: SubspaceBasis,
                       state: StateVector, m: int = 0) -> PerturbationReport:
    """Size of the inhomogeneity term on an ideal eigenstate.

    Returns |<psi| H_inhom |psi>| / (Omega sqrt(m+1)), the first-order
    energy shift relative to the Rabi gap of the bright occupation-m
    doublet, together with the n gbar / 4 estimate for comparison.
    """
    if state.basis is not basis:
        raise InvalidArgumentError("state does not live on the given basis")
    gap = rabi_frequency(params) * math.sqrt(m + 1.0)
    if gap <= 0.0:
        raise DegenerateStateError("zero Rabi gap")
    h_inhom = build_inhomogeneity(params, basis)
    shift = abs(float(np.real(np.vdot(state.amplitudes,
                                      h_inhom.apply(state.amplitudes)))))
    n = basis.n if basis.n is not None else 0
    estimate = n * params.profile.mean / 4.0
    return PerturbationReport(
        ratio=shift / gap,
        gap=gap,
        shift=shift,
        shift_estimate=estimate,
        ratio_estimate=estimate / gap,
    )
