"""Thermal dephasing of the stored qubit by the auxiliary collective modes.

In the quasi-homogeneous regime the inhomogeneity term couples the
electron to the N - 1 auxiliary modes as (g/2) sigma_z n_k, so a thermally
occupied mode imprints a qubit-state-dependent phase exp(-i g n_k t).
Averaging one mode over the thermal distribution p_n = (1 - q) q^n with
q = exp(-x), x = omega_z / (kB T), gives the per-mode coherence factor

    f(t) = (1 - q) sum_n q^n exp(-i g n t) = d(x, t) exp(i theta(x, t)),

    d     = (1 - q) / sqrt(1 - 2 q cos(g t) + q^2),
    theta = atan2(q sin(g t), 1 - q cos(g t)),

and the qubit off-diagonal element shrinks by the decoherence factor
D = d^(N-1), reviving fully at g t = 2 pi k.  At zero temperature q = 0
and there is no dephasing at all.  thermal_sum_oracle evaluates f by
direct summation as an independent check of the closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .dynamics import QubitState
from .errors import InvalidArgumentError, ToleranceError

_ORACLE_TAIL_TOL = 1e-14


@dataclass(frozen=True)
class ThermalParams:
    """Ensemble size and thermal parameters of the auxiliary bath.

    kB_T is the temperature in energy units (Boltzmann constant absorbed);
    kB_T = 0 flags the zero-temperature limit.  The closed form depends on
    temperature only through x = omega_z / kB_T.
    """

    N: int
    omega_z: float = 1.0
    g: float = 1.0
    kB_T: float = 1.0

    def __post_init__(self):
        if self.N < 2:
            raise InvalidArgumentError(f"need N >= 2 (N - 1 auxiliary modes), got {self.N}")
        if self.omega_z <= 0 or self.g <= 0:
            raise InvalidArgumentError("omega_z and g must be > 0")
        if self.kB_T < 0:
            raise InvalidArgumentError(f"negative temperature unsupported, kB_T={self.kB_T}")

    @classmethod
    def from_x(cls, N: int, x: float, g: float = 1.0,
               omega_z: float = 1.0) -> "ThermalParams":
        if x <= 0:
            raise InvalidArgumentError(f"x = omega_z / kB_T must be > 0, got {x}")
        return cls(N=N, omega_z=omega_z, g=g, kB_T=omega_z / x)

    @property
    def zero_temperature(self) -> bool:
        return self.kB_T == 0.0

    @property
    def x(self) -> float:
        if self.zero_temperature:
            return float("inf")
        return self.omega_z / self.kB_T


class DecoherencePoint(NamedTuple):
    d: float
    D: float
    theta: float


def _require_finite_temperature(p: ThermalParams) -> float:
    if p.zero_temperature:
        raise InvalidArgumentError(
            "closed form needs finite temperature; use zero_temperature_limit")
    return p.x


def decoherence_factor(p: ThermalParams, t: float) -> DecoherencePoint:
    """Per-mode coherence d, total factor D = d^(N-1), and phase theta.

    Evaluated through q = exp(-x), which stays finite for arbitrarily
    large x.  d = 1 exactly at g t = 2 pi k; 0 <= d <= 1 always.
    """
    x = _require_finite_temperature(p)
    if t < 0:
        raise InvalidArgumentError(f"time must be >= 0, got {t}")
    q = np.exp(-x)
    gt = p.g * t
    # (1-q)^2 + 4 q sin^2(gt/2) == 1 - 2 q cos(gt) + q^2, without the
    # cancellation that would push d above 1 near gt = 2 pi k.
    denom = np.sqrt((1.0 - q) ** 2 + 4.0 * q * np.sin(0.5 * gt) ** 2)
    d = (1.0 - q) / denom
    theta = float(np.arctan2(q * np.sin(gt), 1.0 - q * np.cos(gt)))
    return DecoherencePoint(d=float(d), D=float(d ** (p.N - 1)), theta=theta)


def zero_temperature_limit(p: ThermalParams, t: float) -> float:
    """Coherence survival at T -> 0: identically 1.

    Also spot-checks that the finite-temperature closed form approaches
    the limit, D > 1 - 1e-12 already at x = 50.
    """
    if t < 0:
        raise InvalidArgumentError(f"time must be >= 0, got {t}")
    cold = ThermalParams.from_x(p.N, 50.0, g=p.g, omega_z=p.omega_z)
    point = decoherence_factor(cold, t)
    if not point.D > 1.0 - 1e-12:
        raise ArithmeticError(
            f"closed form violates the zero-temperature limit: D(x=50) = {point.D!r}")
    return 1.0


def offdiagonal_element(p: ThermalParams, qubit: QubitState, t: float) -> complex:
    """Off-diagonal density matrix element of the stored qubit at time t.

    rho_01(t) = conj(alpha) beta * D * exp(i (N-1) theta); its modulus is
    |alpha beta| D and it returns to the initial value at g t = 2 pi k.
    """
    if p.zero_temperature:
        if t < 0:
            raise InvalidArgumentError(f"time must be >= 0, got {t}")
        return complex(np.conj(qubit.alpha) * qubit.beta)
    point = decoherence_factor(p, t)
    return complex(np.conj(qubit.alpha) * qubit.beta
                   * point.D * np.exp(1j * (p.N - 1) * point.theta))


def thermal_sum_oracle(p: ThermalParams, t: float, n_max: int = 200) -> complex:
    """(N-1)-th power of the per-mode factor by direct thermal summation.

    Sums (1 - q) q^n exp(-i g n t) term by term up to n_max, independent
    of the closed form.  Requires the neglected tail q^n_max < 1e-14.
    """
    x = _require_finite_temperature(p)
    if t < 0:
        raise InvalidArgumentError(f"time must be >= 0, got {t}")
    if n_max < 1:
        raise InvalidArgumentError(f"n_max must be >= 1, got {n_max}")
    q = np.exp(-x)
    tail = q ** n_max
    if not tail < _ORACLE_TAIL_TOL:
        raise ToleranceError(
            f"truncation tail q^n_max = {tail:.3e} not below {_ORACLE_TAIL_TOL:g}; "
            f"increase n_max", bound=float(tail))
    n = np.arange(n_max + 1)
    f = (1.0 - q) * np.sum((q ** n) * np.exp(-1j * p.g * t * n))
    return complex(f ** (p.N - 1))


@dataclass
class DecoherenceCurve:
    """D(T, t) and friends sampled on a rectangular (x, g t) grid."""

    params: ThermalParams
    x: np.ndarray        # temperatures as x = omega_z / kB_T, shape (nx,)
    gt: np.ndarray       # dimensionless times g t, shape (nt,)
    d: np.ndarray        # per-mode coherence, shape (nx, nt)
    theta: np.ndarray    # per-mode phase, shape (nx, nt)
    D: np.ndarray        # total factor d^(N-1), shape (nx, nt)

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("x_or_T,gt,d,theta,D\n")
            for i, xv in enumerate(self.x):
                for j, tv in enumerate(self.gt):
                    fh.write(f"{xv:.17g},{tv:.17g},{self.d[i, j]:.17g},"
                             f"{self.theta[i, j]:.17g},{self.D[i, j]:.17g}\n")


def surface_grid(p: ThermalParams,
                 t_range: Optional[Tuple[float, float]] = None,
                 x_range: Tuple[float, float] = (0.1, 10.0),
                 steps: Tuple[int, int] = (100, 100)) -> DecoherenceCurve:
    """Dense D(T, t) surface over two revival periods by default.

    t_range is in time units (converted to g t in the output); x_range
    spans the inverse-temperature axis.  Rows with large x show the
    D -> 1 wall of the cold limit, columns at g t = 2 pi k the revivals.
    """
    nx, nt = (int(steps), int(steps)) if np.isscalar(steps) else (int(steps[0]), int(steps[1]))
    if nx < 2 or nt < 2:
        raise InvalidArgumentError("need at least a 2x2 grid")
    if t_range is None:
        t_range = (0.0, 2.0 * (2.0 * np.pi / p.g))
    t_lo, t_hi = map(float, t_range)
    x_lo, x_hi = map(float, x_range)
    if not (0 <= t_lo < t_hi) or not (0 < x_lo < x_hi):
        raise InvalidArgumentError("ranges must be positive and increasing")
    x = np.linspace(x_lo, x_hi, nx)
    t = np.linspace(t_lo, t_hi, nt)
    q = np.exp(-x)[:, None]
    gt = (p.g * t)[None, :]
    d = (1.0 - q) / np.sqrt((1.0 - q) ** 2 + 4.0 * q * np.sin(0.5 * gt) ** 2)
    theta = np.arctan2(q * np.sin(gt), 1.0 - q * np.cos(gt))
    return DecoherenceCurve(
        params=p, x=x, gt=(p.g * t), d=d, theta=theta, D=d ** (p.N - 1))
