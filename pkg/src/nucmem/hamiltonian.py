"""Assembly of the central-spin Hamiltonian and its collective decomposition.

The model, in angular frequency units with Pauli electron operators, is

    H = (Omega_z/2) sigma_z + omega_z sum_j I_z^(j)
        + (sigma_z/2) sum_j g_j I_z^(j)
        + (1/2) sum_j g_j (sigma_+ I_-^(j) + sigma_- I_+^(j)).

The electron Zeeman and hyperfine sigma_z terms carry the electron
spin-1/2 factor; the exchange term carries the explicit g_j/2.  On an
invariant subspace the Hamiltonian splits into three parts:

    rabi_exchange   Omega (sigma_+ A + sigma_- A^dag), the collective
                    exchange with the bright mode A and Rabi frequency
                    Omega = sqrt(I0 sum_j g_j^2 / 2);
    sector_energy   diagonal with one constant per (electron, occupation)
                    sector, mu(spin, nu) = (Omega_z/2) spin
                    + omega_z (nu - N I0) - (spin/2) N gbar I0;
    inhomogeneity   diagonal (sigma_z/2) sum_j g_j (I_z^(j) + I0), the
                    coupling-fluctuation term driving dephasing.

Tuning the electron field to Omega_z = omega_z + N gbar I0 makes the two
sector constants of each V_n equal, so the sector energy is proportional
to the identity there and successive subspaces are spaced by omega_z.
The exchange part then acts as a resonant Jaynes-Cummings coupling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .couplings import CouplingProfile
from .errors import InvalidArgumentError
from . import fockspace as fs
from .fockspace import (
    SPIN_DOWN,
    SPIN_UP,
    SparseOperator,
    SubspaceBasis,
    _validate_spin,
    bright_mode_lowering,
    build_operator,
    nuc_minus,
    nuc_plus,
    nuc_z,
    sigma_minus,
    sigma_plus,
    sigma_z,
)

_RESONANCE_RTOL = 1e-12
_CLOSURE_TOL = 1e-13


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of one simulation instance.

    omega_z and Omega_z are the nuclear and electron Larmor frequencies;
    the resonant flag asserts Omega_z = omega_z + N gbar I0 and is
    validated at construction.
    """

    profile: CouplingProfile
    I0: float
    omega_z: float
    Omega_z: float
    resonant: bool = False

    def __post_init__(self):
        _validate_spin(self.I0)
        if self.resonant:
            target = self.omega_z + self.N * self.profile.mean * float(self.I0)
            scale = max(abs(target), 1.0)
            if abs(self.Omega_z - target) > _RESONANCE_RTOL * scale:
                raise InvalidArgumentError(
                    f"resonant flag set but Omega_z={self.Omega_z!r} != "
                    f"omega_z + N gbar I0 = {target!r}")

    @property
    def N(self) -> int:
        return self.profile.N

    @property
    def rabi(self) -> float:
        return rabi_frequency(self)

    def to_json(self) -> str:
        return json.dumps({
            "N": self.N,
            "I0": float(self.I0),
            "omega_z": self.omega_z,
            "Omega_z": self.Omega_z,
            "resonant": self.resonant,
            "profile": json.loads(self.profile.to_json()),
        }, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        data = json.loads(text)
        profile = CouplingProfile.from_json(json.dumps(data["profile"]))
        return cls(profile=profile, I0=data["I0"], omega_z=data["omega_z"],
                   Omega_z=data["Omega_z"], resonant=data.get("resonant", False))


def rabi_frequency(params: ModelParams) -> float:
    """Collective Rabi frequency Omega = sqrt(I0 sum_j g_j^2 / 2)."""
    g = params.profile.g
    return float(np.sqrt(float(params.I0) * float(g @ g) / 2.0))


def tune_resonance(params: ModelParams) -> ModelParams:
    """Set Omega_z = omega_z + N gbar I0 so both sectors of each V_n degenerate."""
    target = params.omega_z + params.N * params.profile.mean * float(params.I0)
    return replace(params, Omega_z=target, resonant=True)


def sector_energy(params: ModelParams, spin: int, nu: int) -> float:
    """Diagonal constant of the (electron spin, occupation nu) sector."""
    if spin not in (SPIN_UP, SPIN_DOWN):
        raise InvalidArgumentError(f"spin must be +-1, got {spin!r}")
    N, I0 = params.N, float(params.I0)
    gbar = params.profile.mean
    return (0.5 * params.Omega_z * spin
            + params.omega_z * (nu - N * I0)
            - 0.5 * spin * N * gbar * I0)


def composite_energy_up(params: ModelParams, n: int) -> float:
    """Sector constant of the up states of V_n."""
    return sector_energy(params, SPIN_UP, n)


def composite_energy_down(params: ModelParams, n: int) -> float:
    """Sector constant of the down states of V_n."""
    return sector_energy(params, SPIN_DOWN, n + 1)


# ---------------------------------------------------------------------------
# matrix builders
# ---------------------------------------------------------------------------

def _check_basis(params: ModelParams, basis: SubspaceBasis) -> None:
    if basis.N != params.N:
        raise InvalidArgumentError(f"basis N={basis.N} != params N={params.N}")
    if basis.two_I0 != _validate_spin(params.I0):
        raise InvalidArgumentError(
            f"basis I0={basis.two_I0/2} != params I0={params.I0}")


def full_hamiltonian_expr(params: ModelParams):
    """The Hamiltonian as an operator expression (site-by-site route)."""
    g = params.profile.g
    expr = 0.5 * params.Omega_z * sigma_z()
    for j in range(params.N):
        expr = expr + params.omega_z * nuc_z(j)
        expr = expr + 0.5 * float(g[j]) * (sigma_z() * nuc_z(j))
        expr = expr + 0.5 * float(g[j]) * (sigma_plus() * nuc_minus(j))
        expr = expr + 0.5 * float(g[j]) * (sigma_minus() * nuc_plus(j))
    return expr


def build_full(params: ModelParams, basis: SubspaceBasis) -> SparseOperator:
    """Full Hamiltonian matrix, built term by term from the sites."""
    _check_basis(params, basis)
    return build_operator(basis, full_hamiltonian_expr(params))


def build_site_exchange(params: ModelParams, basis: SubspaceBasis) -> SparseOperator:
    """Exchange part (1/2) sum_j g_j (sigma_+ I_-^(j) + sigma_- I_+^(j)).

    Equals the collective form Omega (sigma_+ A + sigma_- A^dag) exactly;
    the two constructions are kept independent as a cross-check.
    """
    _check_basis(params, basis)
    g = params.profile.g
    expr = 0.5 * float(g[0]) * (sigma_plus() * nuc_minus(0))
    expr = expr + 0.5 * float(g[0]) * (sigma_minus() * nuc_plus(0))
    for j in range(1, params.N):
        expr = expr + 0.5 * float(g[j]) * (sigma_plus() * nuc_minus(j))
        expr = expr + 0.5 * float(g[j]) * (sigma_minus() * nuc_plus(j))
    return build_operator(basis, expr)


def build_rabi_exchange(params: ModelParams, basis: SubspaceBasis) -> SparseOperator:
    """Omega (sigma_+ A + sigma_- A^dag) via the bright-mode block."""
    _check_basis(params, basis)
    if basis.n is None:
        raise InvalidArgumentError("collective exchange needs a standard V_n basis")
    block = bright_mode_lowering(basis, params.profile).matrix
    omega = rabi_frequency(params)
    n_up = basis.nuclear[0].dim
    n_down = basis.nuclear[1].dim
    upper = omega * block  # maps down sector to up sector
    matrix = sp.bmat(
        [[sp.csr_matrix((n_up, n_up)), upper],
         [upper.T, sp.csr_matrix((n_down, n_down))]],
        format="csr")
    return SparseOperator(matrix, hermitian=True)


def build_sector_energy(params: ModelParams, basis: SubspaceBasis) -> SparseOperator:
    """Diagonal part with one constant per (electron, occupation) sector."""
    _check_basis(params, basis)
    diag = np.empty(basis.dim)
    for i, (spin, nu) in enumerate(basis.sectors):
        diag[basis.offsets[i]:basis.offsets[i + 1]] = sector_energy(params, spin, nu)
    return SparseOperator(sp.diags(diag).tocsr(), hermitian=True)


def build_inhomogeneity(params: ModelParams, basis: SubspaceBasis) -> SparseOperator:
    """Diagonal fluctuation term (sigma_z/2) sum_j g_j (I_z^(j) + I0)."""
    _check_basis(params, basis)
    occ = basis.occupations().astype(float)
    diag = 0.5 * basis.electron_signs() * (occ @ params.profile.g)
    return SparseOperator(sp.diags(diag).tocsr(), hermitian=True)


@dataclass
class HamiltonianParts:
    """The Hamiltonian on one invariant subspace and its three-part split.

    full = rabi_exchange + sector_energy + inhomogeneity entrywise;
    site_exchange is the same operator as rabi_exchange built from the
    individual sites instead of the bright-mode block.
    """

    basis: SubspaceBasis
    params: ModelParams
    full: SparseOperator
    rabi_exchange: SparseOperator
    sector_energy: SparseOperator
    inhomogeneity: SparseOperator
    site_exchange: SparseOperator

    @property
    def closure_error(self) -> float:
        recombined = (self.rabi_exchange.matrix + self.sector_energy.matrix
                      + self.inhomogeneity.matrix)
        diff = (self.full.matrix - recombined).tocoo()
        return float(np.abs(diff.data).max()) if diff.nnz else 0.0

    @property
    def exchange_route_error(self) -> float:
        return self.rabi_exchange.max_abs_diff(self.site_exchange)


def build_parts(params: ModelParams, basis: SubspaceBasis) -> HamiltonianParts:
    """Assemble all parts on a standard V_n basis and verify the split.

    The full matrix is built site by site, independently of the three
    parts; their recombination is checked entrywise at build time.
    """
    _check_basis(params, basis)
    if basis.n is None:
        raise InvalidArgumentError("build_parts needs a standard V_n basis")
    parts = HamiltonianParts(
        basis=basis,
        params=params,
        full=build_full(params, basis),
        rabi_exchange=build_rabi_exchange(params, basis),
        sector_energy=build_sector_energy(params, basis),
        inhomogeneity=build_inhomogeneity(params, basis),
        site_exchange=build_site_exchange(params, basis),
    )
    scale = max(1.0, float(np.abs(parts.full.matrix.data).max()) if parts.full.nnz else 0.0)
    err = parts.closure_error
    if err > _CLOSURE_TOL * scale:
        raise AssertionError(
            f"decomposition closure violated: max entry deviation {err:.3e}")
    return parts


# ---------------------------------------------------------------------------
# effective single-mode model
# ---------------------------------------------------------------------------

def effective_index(spin: int, m: int, m_max: int) -> int:
    """Position of |spin, m> in the truncated ideal-boson ordering."""
    if not 0 <= m <= m_max:
        raise InvalidArgumentError(f"boson level {m} outside 0..{m_max}")
    base = 0 if spin == SPIN_UP else m_max + 1
    return base + m

def effective_dim(m_max: int) -> int:
    return 2 * (m_max + 1)


def build_effective_jc(params: ModelParams, m_max: int) -> SparseOperator:
    """Resonant Jaynes-Cummings Hamiltonian on the ideal-boson ladder.

    H = Omega (sigma_+ a + sigma_- a^dag) + omega_z (a^dag a + sigma_z/2 - 1/2)
    on the truncated space {|up/down> (x) |m>, m <= m_max} with exact
    bosonic elements sqrt(m+1).  Ordering: up levels 0..m_max, then down.
    The diagonal is m omega_z on |up, m> and (m - 1) omega_z on |down, m>,
    so each coupled pair (|up, m>, |down, m+1>) sits at m omega_z and the
    uncoupled |down, 0> at -omega_z.
    """
    if m_max < 1:
        raise InvalidArgumentError(f"m_max must be >= 1, got {m_max}")
    omega = rabi_frequency(params)
    wz = params.omega_z
    dim = effective_dim(m_max)
    rows, cols, vals = [], [], []
    for m in range(m_max + 1):
        iu = effective_index(SPIN_UP, m, m_max)
        idn = effective_index(SPIN_DOWN, m, m_max)
        rows.append(iu); cols.append(iu); vals.append(wz * m)
        rows.append(idn); cols.append(idn); vals.append(wz * (m - 1))
        if m + 1 <= m_max:
            jdn = effective_index(SPIN_DOWN, m + 1, m_max)
            coupling = omega * np.sqrt(m + 1.0)
            rows.append(jdn); cols.append(iu); vals.append(coupling)
            rows.append(iu); cols.append(jdn); vals.append(coupling)
    matrix = sp.csr_matrix((np.asarray(vals, float), (rows, cols)), shape=(dim, dim))
    return SparseOperator(matrix, hermitian=True)
