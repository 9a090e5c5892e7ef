"""Invariant-subspace bases and sparse operators for the central-spin model.

State space: one electron spin-1/2 tensor N nuclear spins I0.  The total
z angular momentum is conserved, so dynamics is block diagonal over
subspaces V_n spanned by

    |up>   (x) |l_1 ... l_N>  with  sum_j l_j = -N I0 + n      (up sector)
    |down> (x) |l_1 ... l_N>  with  sum_j l_j = -N I0 + n + 1  (down sector)

Site occupations are stored as integers delta_j = l_j + I0 in {0, ..., 2 I0};
the up sector of V_n has total occupation n, the down sector n + 1.

Conventions
-----------
* Nuclear ladder operators are the standard ones,
  I_pm |I0, m> = sqrt(I0 (I0 + 1) - m (m +- 1)) |I0, m +- 1>.
* Electron operators are Pauli matrices: sigma_z eigenvalues +-1,
  sigma_plus |down> = |up>.
* Basis ordering: up sector before down sector, configurations in
  descending lexicographic order of (delta_1, ..., delta_N).

The collective lowering operator along a weight vector w is

    A(w) = sum_j w_j I_-^(j) / sqrt(2 I0 sum_j w_j^2),

a rectangular map from the occupation-nu sector to the occupation-(nu-1)
sector.  With w = g it defines the bright mode whose commutator defect
F = <sum_j g_j^2 (I_z^(j) + I0)> / (I0 sum_j g_j^2) measures the deviation
from bosonic behaviour; with the Gram-Schmidt rows it defines the
auxiliary modes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .couplings import CouplingProfile, ModeBasis
from .errors import (
    DegenerateStateError,
    InvalidArgumentError,
    ResourceCapError,
    SubspaceViolationError,
)

DEFAULT_DIM_CAP = 10 ** 6

SPIN_UP = 1
SPIN_DOWN = -1

_HERMITIAN_TOL = 1e-14


def _validate_spin(I0) -> int:
    """Return 2*I0 as an int, accepting 0.5, 1, 1.5, Fraction(3, 2), ..."""
    two = Fraction(I0).limit_denominator(2) * 2
    if two.denominator != 1 or two <= 0 or abs(float(two) / 2 - float(I0)) > 0:
        raise InvalidArgumentError(f"I0 must be a positive half-integer, got {I0!r}")
    return int(two)


def ladder_matrix_element(I0, m, direction: str, convention: str = "standard") -> float:
    """Matrix element <I0, m+-1| I_pm |I0, m>.

    `direction` is "raise" or "lower".  The "half" convention multiplies
    the standard element by 1/2; it exists only as a consistency-check
    hook (the bright-mode commutator identity fails under it) and must not
    be used for physics.
    """
    two_I0 = _validate_spin(I0)
    two_m = Fraction(m) * 2
    if two_m.denominator != 1:
        raise InvalidArgumentError(f"m must be a half-integer, got {m!r}")
    two_m = int(two_m)
    if abs(two_m) > two_I0:
        raise InvalidArgumentError(f"|m| = {abs(two_m)/2} exceeds I0 = {two_I0/2}")
    if direction == "raise":
        two_target = two_m + 2
    elif direction == "lower":
        two_target = two_m - 2
    else:
        raise InvalidArgumentError(f"direction must be 'raise' or 'lower', got {direction!r}")
    if abs(two_target) > two_I0:
        raise InvalidArgumentError(
            f"target m = {two_target/2} outside [-{two_I0/2}, {two_I0/2}]")
    I0f = two_I0 / 2.0
    mf = two_m / 2.0
    pm = 1.0 if direction == "raise" else -1.0
    value = np.sqrt(I0f * (I0f + 1.0) - mf * (mf + pm))
    if convention == "half":
        value *= 0.5
    elif convention != "standard":
        raise InvalidArgumentError(f"unknown ladder convention {convention!r}")
    return float(value)


# ---------------------------------------------------------------------------
# configuration enumeration
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _count_configs(N: int, dmax: int, total: int) -> int:
    """Number of occupation vectors of length N, entries in 0..dmax, given sum."""
    if total < 0 or total > N * dmax:
        return 0
    if dmax == 1:
        return math.comb(N, total)
    counts = np.zeros(total + 1, dtype=object)
    counts[0] = 1
    for _ in range(N):
        new = np.zeros(total + 1, dtype=object)
        for s in range(total + 1):
            if counts[s]:
                for d in range(min(dmax, total - s) + 1):
                    new[s + d] += counts[s]
        counts = new
    return int(counts[total])


def _enumerate_configs(N: int, dmax: int, total: int) -> np.ndarray:
    """All occupation vectors with the given sum, descending lexicographic."""
    count = _count_configs(N, dmax, total)
    out = np.zeros((count, N), dtype=np.int8)
    if count == 0:
        return out
    if dmax == 1:
        # spin-1/2 fast path: choosing the occupied sites in ascending index
        # order is exactly descending lexicographic order of the vectors
        if total > 0:
            sites = np.fromiter(
                itertools.chain.from_iterable(itertools.combinations(range(N), total)),
                dtype=np.int64, count=count * total).reshape(count, total)
            out[np.arange(count)[:, None], sites] = 1
        return out
    row = 0
    cfg = np.zeros(N, dtype=np.int8)

    def rec(pos: int, remaining: int):
        nonlocal row
        if remaining == 0:  # suffix is all zeros, emit immediately
            out[row] = cfg
            row += 1
            return
        if pos == N - 1:
            if remaining <= dmax:
                cfg[pos] = remaining
                out[row] = cfg
                row += 1
                cfg[pos] = 0
            return
        hi = min(dmax, remaining)
        lo = max(0, remaining - (N - 1 - pos) * dmax)
        for d in range(hi, lo - 1, -1):
            cfg[pos] = d
            rec(pos + 1, remaining - d)
        cfg[pos] = 0

    rec(0, total)
    assert row == count
    return out


class NuclearSector:
    """Basis of nuclear configurations with fixed total occupation nu."""

    def __init__(self, N: int, I0, nu: int, dim_cap: int = DEFAULT_DIM_CAP):
        two_I0 = _validate_spin(I0)
        if N < 1:
            raise InvalidArgumentError(f"N must be >= 1, got {N}")
        if not 0 <= nu <= N * two_I0:
            raise InvalidArgumentError(
                f"occupation {nu} outside 0..{N * two_I0} for N={N}, I0={two_I0/2}")
        count = _count_configs(N, two_I0, nu)
        if count > dim_cap:
            raise ResourceCapError(
                f"sector dimension {count} exceeds cap {dim_cap}",
                requested=count, cap=dim_cap)
        self.N = N
        self.two_I0 = two_I0
        self.nu = nu
        self.configs = _enumerate_configs(N, two_I0, nu)
        self._index = {cfg.tobytes(): i for i, cfg in enumerate(self.configs)}

    @property
    def I0(self) -> float:
        return self.two_I0 / 2.0

    @property
    def dim(self) -> int:
        return self.configs.shape[0]

    def index(self, config: np.ndarray) -> int:
        return self._index[np.asarray(config, dtype=np.int8).tobytes()]

    def try_index(self, config_bytes: bytes) -> Optional[int]:
        return self._index.get(config_bytes)

    def __repr__(self):
        return f"NuclearSector(N={self.N}, I0={self.I0}, nu={self.nu}, dim={self.dim})"


class SubspaceBasis:
    """Electron (x) nuclear basis over explicit (spin, occupation) sectors.

    The standard invariant subspace V_n is sectors
    [(SPIN_UP, n), (SPIN_DOWN, n + 1)]; unions of several V_n (and the
    one-dimensional fully polarized down sector) are used for conservation
    checks and for the storage protocol.
    """

    def __init__(self, N: int, I0, sectors: Sequence[tuple],
                 dim_cap: int = DEFAULT_DIM_CAP, n_label: Optional[int] = None):
        two_I0 = _validate_spin(I0)
        seen = set()
        for spin, nu in sectors:
            if spin not in (SPIN_UP, SPIN_DOWN):
                raise InvalidArgumentError(f"electron sector must be +-1, got {spin!r}")
            if (spin, nu) in seen:
                raise InvalidArgumentError(f"duplicate sector {(spin, nu)}")
            seen.add((spin, nu))
        total = 0
        for _, nu in sectors:
            total += _count_configs(N, two_I0, nu)
            if total > dim_cap:
                raise ResourceCapError(
                    f"basis dimension {total}+ exceeds cap {dim_cap}",
                    requested=total, cap=dim_cap)
        self.N = N
        self.two_I0 = two_I0
        self.sectors = tuple((int(s), int(nu)) for s, nu in sectors)
        self.nuclear = [NuclearSector(N, I0, nu, dim_cap) for _, nu in self.sectors]
        self.offsets = np.concatenate([[0], np.cumsum([b.dim for b in self.nuclear])])
        self.n = n_label
        self._sector_of = {key: i for i, key in enumerate(self.sectors)}

    @property
    def I0(self) -> float:
        return self.two_I0 / 2.0

    @property
    def dim(self) -> int:
        return int(self.offsets[-1])

    @property
    def m_n(self) -> Optional[float]:
        """Total J_z eigenvalue with the electron counted as +-1/2."""
        if self.n is None:
            return None
        return -self.N * self.I0 + 0.5 + self.n

    def sector_slice(self, spin: int, nu: int) -> slice:
        i = self._sector_of[(spin, nu)]
        return slice(int(self.offsets[i]), int(self.offsets[i + 1]))

    def has_sector(self, spin: int, nu: int) -> bool:
        return (spin, nu) in self._sector_of

    def try_index(self, spin: int, nu: int, config_bytes: bytes) -> Optional[int]:
        i = self._sector_of.get((spin, nu))
        if i is None:
            return None
        j = self.nuclear[i].try_index(config_bytes)
        if j is None:
            return None
        return int(self.offsets[i]) + j

    def state_tuples(self):
        """Iterate (global index, spin, occupation nu, config row)."""
        for i, ((spin, nu), block) in enumerate(zip(self.sectors, self.nuclear)):
            off = int(self.offsets[i])
            for j in range(block.dim):
                yield off + j, spin, nu, block.configs[j]

    def electron_signs(self) -> np.ndarray:
        out = np.empty(self.dim)
        for i, (spin, _) in enumerate(self.sectors):
            out[self.offsets[i]:self.offsets[i + 1]] = spin
        return out

    def occupations(self) -> np.ndarray:
        """Per-state site occupation matrix delta_j, shape (dim, N)."""
        return np.concatenate([b.configs for b in self.nuclear], axis=0)

    def export_json(self) -> str:
        import json
        entries = []
        for _, spin, _, cfg in self.state_tuples():
            l_values = [(int(d) - self.two_I0 / 2.0) for d in cfg]
            entries.append({"electron": "up" if spin == SPIN_UP else "down",
                            "l": l_values})
        return json.dumps(entries, indent=1)

    def __repr__(self):
        return (f"SubspaceBasis(N={self.N}, I0={self.I0}, "
                f"sectors={self.sectors}, dim={self.dim})")


def enumerate_subspace(N: int, I0, n: int,
                       dim_cap: int = DEFAULT_DIM_CAP) -> SubspaceBasis:
    """Basis of the invariant subspace V_n, up sector first.

    Valid n runs from 0 to 2 N I0 - 1; the fully saturated sectors at the
    ends of the ladder are excluded.
    """
    two_I0 = _validate_spin(I0)
    if not 0 <= n <= N * two_I0 - 1:
        raise InvalidArgumentError(
            f"excitation n={n} outside 0..{N * two_I0 - 1} for N={N}, I0={two_I0/2}")
    return SubspaceBasis(N, I0, [(SPIN_UP, n), (SPIN_DOWN, n + 1)],
                         dim_cap=dim_cap, n_label=n)


def enumerate_sectors(N: int, I0, sectors: Sequence[tuple],
                      dim_cap: int = DEFAULT_DIM_CAP) -> SubspaceBasis:
    """Basis over an explicit list of (spin, occupation) sectors."""
    return SubspaceBasis(N, I0, sectors, dim_cap=dim_cap)


# ---------------------------------------------------------------------------
# sparse operator carrier
# ---------------------------------------------------------------------------

class SparseOperator:
    """Sparse matrix restricted to an enumerated basis.

    Square operators carry a hermitian flag detected at construction;
    rectangular blocks (collective mode maps between adjacent occupation
    sectors) have hermitian=False.
    """

    def __init__(self, matrix, hermitian: Optional[bool] = None):
        matrix = sp.csr_matrix(matrix)
        matrix.eliminate_zeros()
        if matrix.nnz and np.iscomplexobj(matrix.data) and np.abs(matrix.data.imag).max() == 0.0:
            matrix = sp.csr_matrix(
                (matrix.data.real, matrix.indices, matrix.indptr), shape=matrix.shape)
        self.matrix = matrix
        if hermitian is None:
            hermitian = self._detect_hermitian()
        self.hermitian = bool(hermitian)

    def _detect_hermitian(self) -> bool:
        m = self.matrix
        if m.shape[0] != m.shape[1]:
            return False
        diff = (m - m.getH()).tocoo()
        if diff.nnz == 0:
            return True
        scale = max(1.0, np.abs(m.data).max() if m.nnz else 0.0)
        return bool(np.abs(diff.data).max() <= _HERMITIAN_TOL * scale)

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def dim(self) -> int:
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise InvalidArgumentError(f"operator is rectangular {self.matrix.shape}")
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def dag(self) -> "SparseOperator":
        return SparseOperator(self.matrix.getH(), hermitian=self.hermitian)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def __add__(self, other):
        return SparseOperator(self.matrix + other.matrix)

    def __sub__(self, other):
        return SparseOperator(self.matrix - other.matrix)

    def __mul__(self, scalar):
        return SparseOperator(self.matrix * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return SparseOperator(self.matrix @ other.matrix)

    def max_abs_diff(self, other) -> float:
        diff = (self.matrix - other.matrix).tocoo()
        return float(np.abs(diff.data).max()) if diff.nnz else 0.0

    def export_triplets(self, path) -> None:
        """Coordinate text format, one "row,col,re,im" line per entry."""
        coo = self.matrix.tocoo()
        with open(path, "w") as fh:
            fh.write("row,col,re,im\n")
            order = np.lexsort((coo.col, coo.row))
            for k in order:
                v = complex(coo.data[k])
                fh.write(f"{coo.row[k]},{coo.col[k]},{v.real:.17g},{v.imag:.17g}\n")

    def __repr__(self):
        h = "hermitian" if self.hermitian else "general"
        return f"SparseOperator(shape={self.matrix.shape}, nnz={self.nnz}, {h})"


@dataclass
class StateVector:
    """Complex amplitudes over a SubspaceBasis or NuclearSector."""

    basis: Union[SubspaceBasis, NuclearSector]
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.basis.dim,):
            raise InvalidArgumentError(
                f"amplitude vector shape {amp.shape} does not match basis dim {self.basis.dim}")
        self.amplitudes = amp

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm
        if n == 0.0:
            raise DegenerateStateError("cannot normalize the zero vector")
        return StateVector(self.basis, self.amplitudes / n)

    def dot(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def ground_state(N: int, I0) -> StateVector:
    """Fully polarized nuclear state, all sites at m = -I0."""
    sector = NuclearSector(N, I0, 0)
    amp = np.ones(1, dtype=complex)
    return StateVector(sector, amp)


def random_state(basis, rng) -> StateVector:
    """Haar-ish random normalized state on the given basis."""
    v = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    return StateVector(basis, v / np.linalg.norm(v))


# ---------------------------------------------------------------------------
# operator expressions
# ---------------------------------------------------------------------------

class OperatorExpr:
    """Symbolic operator: sums and products of elementary spin operators."""

    def __add__(self, other):
        if other == 0:  # lets the builtin sum() start from 0
            return self
        return _Sum(self, _as_expr(other))

    __radd__ = __add__

    def __sub__(self, other):
        return _Sum(self, -1.0 * _as_expr(other))

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return _Scaled(complex(other), self)
        return _Product(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return _Scaled(complex(other), self)
        return _Product(other, self)

    def __neg__(self):
        return _Scaled(-1.0, self)

    def terms(self):
        """Expand into a list of (coefficient, [primitive, ...]) products."""
        raise NotImplementedError


def _as_expr(x):
    if isinstance(x, OperatorExpr):
        return x
    raise InvalidArgumentError(f"cannot combine operator with {x!r}")


class _Prim(OperatorExpr):
    def __init__(self, tag: str, site: Optional[int] = None):
        self.tag = tag
        self.site = site

    def terms(self):
        return [(1.0 + 0j, [self])]

    def __repr__(self):
        return self.tag if self.site is None else f"{self.tag}({self.site})"


class _Scaled(OperatorExpr):
    def __init__(self, coeff, inner):
        self.coeff = coeff
        self.inner = inner

    def terms(self):
        return [(self.coeff * c, prims) for c, prims in self.inner.terms()]

    def __repr__(self):
        return f"{self.coeff}*{self.inner!r}"


class _Sum(OperatorExpr):
    def __init__(self, a, b):
        self.parts = []
        for x in (a, b):
            if isinstance(x, _Sum):
                self.parts.extend(x.parts)
            else:
                self.parts.append(x)

    def terms(self):
        out = []
        for p in self.parts:
            out.extend(p.terms())
        return out

    def __repr__(self):
        return " + ".join(repr(p) for p in self.parts)


class _Product(OperatorExpr):
    def __init__(self, a, b):
        self.a = _as_expr(a)
        self.b = _as_expr(b)

    def terms(self):
        out = []
        for ca, pa in self.a.terms():
            for cb, pb in self.b.terms():
                out.append((ca * cb, pa + pb))
        return out

    def __repr__(self):
        return f"({self.a!r})*({self.b!r})"


def sigma_z() -> OperatorExpr:
    return _Prim("sigma_z")


def sigma_plus() -> OperatorExpr:
    return _Prim("sigma_plus")


def sigma_minus() -> OperatorExpr:
    return _Prim("sigma_minus")


def ident() -> OperatorExpr:
    return _Prim("ident")


def nuc_z(j: int) -> OperatorExpr:
    return _Prim("nuc_z", j)


def nuc_plus(j: int) -> OperatorExpr:
    return _Prim("nuc_plus", j)


def nuc_minus(j: int) -> OperatorExpr:
    return _Prim("nuc_minus", j)


def _apply_primitive(prim: _Prim, spin: int, cfg: np.ndarray, two_I0: int):
    """Apply one primitive; returns (spin, coeff, d_nu) with cfg mutated, or None."""
    tag = prim.tag
    if tag == "sigma_z":
        return spin, float(spin), 0
    if tag == "sigma_plus":
        if spin == SPIN_UP:
            return None
        return SPIN_UP, 1.0, 0
    if tag == "sigma_minus":
        if spin == SPIN_DOWN:
            return None
        return SPIN_DOWN, 1.0, 0
    if tag == "ident":
        return spin, 1.0, 0
    j = prim.site
    if j is None or not 0 <= j < cfg.size:
        raise InvalidArgumentError(f"site index {j!r} outside 0..{cfg.size - 1}")
    d = int(cfg[j])
    I0f = two_I0 / 2.0
    m = d - I0f
    if tag == "nuc_z":
        return spin, m, 0
    if tag == "nuc_plus":
        if d == two_I0:
            return None
        cfg[j] = d + 1
        return spin, float(np.sqrt(I0f * (I0f + 1.0) - m * (m + 1.0))), 1
    if tag == "nuc_minus":
        if d == 0:
            return None
        cfg[j] = d - 1
        return spin, float(np.sqrt(I0f * (I0f + 1.0) - m * (m - 1.0))), -1
    raise InvalidArgumentError(f"unknown primitive {tag!r}")


def build_operator(basis: SubspaceBasis, expr: OperatorExpr) -> SparseOperator:
    """Sparse matrix of an operator expression on the basis.

    Every product term must map each basis state either to zero or to
    another state of the basis; a term that lands outside raises
    SubspaceViolationError naming the term.
    """
    if not isinstance(expr, OperatorExpr):
        raise InvalidArgumentError(f"expected an operator expression, got {expr!r}")
    terms = expr.terms()
    rows, cols, vals = [], [], []
    for idx, spin, nu, cfg in basis.state_tuples():
        for coeff, prims in terms:
            s = spin
            c = coeff
            work = cfg.copy()
            d_nu = 0
            dead = False
            for prim in reversed(prims):  # products act right to left
                res = _apply_primitive(prim, s, work, basis.two_I0)
                if res is None:
                    dead = True
                    break
                s, factor, dn = res
                c *= factor
                d_nu += dn
            if dead or c == 0.0:
                continue
            target = basis.try_index(s, nu + d_nu, work.tobytes())
            if target is None:
                term_repr = "*".join(repr(p) for p in prims)
                raise SubspaceViolationError(
                    f"term {term_repr} maps a basis state to electron "
                    f"{'up' if s == SPIN_UP else 'down'}, occupation {nu + d_nu}, "
                    f"outside the basis sectors {basis.sectors}")
            rows.append(target)
            cols.append(idx)
            vals.append(c)
    matrix = sp.csr_matrix(
        (np.asarray(vals, dtype=complex), (rows, cols)),
        shape=(basis.dim, basis.dim))
    matrix.sum_duplicates()
    return SparseOperator(matrix)


# ---------------------------------------------------------------------------
# collective modes
# ---------------------------------------------------------------------------

def _collective_lowering_matrix(weights: np.ndarray, sector: NuclearSector,
                                target: NuclearSector,
                                convention: str = "standard") -> sp.csr_matrix:
    """Matrix of sum_j w_j I_-^(j) / sqrt(2 I0 sum w^2) from sector to target."""
    w = np.asarray(weights, dtype=float)
    if w.size != sector.N:
        raise InvalidArgumentError(
            f"weight vector length {w.size} does not match N={sector.N}")
    if target.nu != sector.nu - 1:
        raise InvalidArgumentError(
            f"target occupation {target.nu} must be {sector.nu - 1}")
    denom = np.sqrt(2.0 * sector.I0 * float(w @ w))
    rows, cols, vals = [], [], []
    I0f = sector.I0
    for i in range(sector.dim):
        cfg = sector.configs[i]
        for j in np.nonzero(cfg)[0]:
            d = int(cfg[j])
            m = d - I0f
            coeff = ladder_matrix_element(I0f, m, "lower", convention)
            new = cfg.copy()
            new[j] = d - 1
            rows.append(target.index(new))
            cols.append(i)
            vals.append(w[j] * coeff / denom)
    matrix = sp.csr_matrix(
        (np.asarray(vals, dtype=float), (rows, cols)),
        shape=(target.dim, sector.dim))
    matrix.sum_duplicates()
    return matrix


def _basis_sector_pair(basis: Union[SubspaceBasis, NuclearSector]):
    """(source sector, target sector) for a lowering map on `basis`."""
    if isinstance(basis, NuclearSector):
        if basis.nu == 0:
            target = None  # annihilates everything
        else:
            target = NuclearSector(basis.N, basis.I0, basis.nu - 1)
        return basis, target
    if isinstance(basis, SubspaceBasis):
        if len(basis.sectors) != 2 or basis.n is None:
            raise InvalidArgumentError(
                "collective lowering on a union basis is ambiguous; "
                "pass a NuclearSector or a standard V_n basis")
        up = basis.nuclear[0]
        down = basis.nuclear[1]
        return down, up
    raise InvalidArgumentError(f"unsupported basis type {type(basis)!r}")


def bright_mode_lowering(basis, profile: CouplingProfile,
                         convention: str = "standard") -> SparseOperator:
    """Collective lowering operator weighted by the couplings.

    On a standard V_n basis this is the rectangular block from the down
    sector's nuclear space (occupation n + 1) to the up sector's
    (occupation n), exactly the block the exchange Hamiltonian couples
    with sigma_plus.  On a NuclearSector it maps occupation nu to nu - 1.
    """
    source, target = _basis_sector_pair(basis)
    if source.N != profile.N:
        raise InvalidArgumentError(
            f"profile has N={profile.N}, basis has N={source.N}")
    if target is None:
        return SparseOperator(sp.csr_matrix((0, source.dim)), hermitian=False)
    return SparseOperator(
        _collective_lowering_matrix(profile.g, source, target, convention),
        hermitian=False)


def aux_mode_lowering(basis, modes: ModeBasis, k: int) -> SparseOperator:
    """Auxiliary collective lowering along mode vector h^[k], 2 <= k <= N."""
    if not 2 <= k <= modes.N:
        raise InvalidArgumentError(f"auxiliary mode index {k} outside 2..{modes.N}")
    source, target = _basis_sector_pair(basis)
    if source.N != modes.N:
        raise InvalidArgumentError(
            f"mode basis has N={modes.N}, state basis has N={source.N}")
    if target is None:
        return SparseOperator(sp.csr_matrix((0, source.dim)), hermitian=False)
    return SparseOperator(
        _collective_lowering_matrix(modes.vector(k), source, target),
        hermitian=False)


def apply_collective_raising(weights: np.ndarray, state: StateVector) -> StateVector:
    """Unnormalized image under sum_j w_j I_+^(j) / sqrt(2 I0 sum w^2)."""
    sector = state.basis
    if not isinstance(sector, NuclearSector):
        raise InvalidArgumentError("collective raising acts on a NuclearSector state")
    target = NuclearSector(sector.N, sector.I0, sector.nu + 1)
    lowering = _collective_lowering_matrix(np.asarray(weights, float), target, sector)
    return StateVector(target, lowering.T @ state.amplitudes)


class CommutatorDefect(NamedTuple):
    value: float
    bound: float


def commutator_defect(profile: CouplingProfile, state: StateVector) -> CommutatorDefect:
    """Deviation of the bright-mode commutator from 1 on a given state.

    Returns F = <sum_j g_j^2 (I_z^(j) + I0)> / (I0 sum_j g_j^2), so that
    <[A, A^dag]> = 1 - F, together with the rigorous upper bound
    max(g^2) <n> / (mean(g^2) I0 N) where <n> is the expected total
    occupation of the state.
    """
    basis = state.basis
    if isinstance(basis, NuclearSector):
        occ = basis.configs
    elif isinstance(basis, SubspaceBasis):
        occ = basis.occupations()
    else:
        raise InvalidArgumentError(f"unsupported basis type {type(basis)!r}")
    if basis.N != profile.N:
        raise InvalidArgumentError(
            f"profile has N={profile.N}, basis has N={basis.N}")
    weights = np.abs(state.amplitudes) ** 2
    g2 = profile.g ** 2
    I0 = basis.two_I0 / 2.0
    value = float(weights @ (occ.astype(float) @ g2)) / (I0 * g2.sum())
    n_expect = float(weights @ occ.sum(axis=1))
    bound = float(g2.max() * n_expect / (g2.mean() * I0 * profile.N))
    return CommutatorDefect(value=value, bound=bound)


class BrightFockState(NamedTuple):
    state: StateVector
    norm_defect: float


def bright_fock_state(profile: CouplingProfile, I0, m: int) -> BrightFockState:
    """Normalized m-quantum bright-mode state built on the polarized ensemble.

    Applies the collective raising operator m times to the fully polarized
    state and normalizes.  norm_defect = ||unnormalized||^2 - m!| / m!
    measures how far the spin ensemble falls short of true bosonic
    normalization (the hardcore effect); it vanishes for m <= 1.
    """
    if m < 0:
        raise InvalidArgumentError(f"quantum number m must be >= 0, got {m}")
    capacity = profile.N * _validate_spin(I0)
    if m > capacity:
        raise DegenerateStateError(
            f"m={m} quanta exceed the ensemble capacity {capacity}")
    state = ground_state(profile.N, I0)
    for _ in range(m):
        state = apply_collective_raising(profile.g, state)
        if state.norm == 0.0:
            raise DegenerateStateError(
                f"raising produced the zero vector at m={m}, N={profile.N}, I0={I0}")
    norm_sq = state.norm ** 2
    fact = float(math.factorial(m))
    defect = abs(norm_sq - fact) / fact
    return BrightFockState(state=state.normalized(), norm_defect=defect)
