"""Hyperfine coupling profiles and the orthonormal collective-mode family.

A coupling profile is the vector (g_1, ..., g_N) of positive hyperfine
strengths between one central electron spin and N nuclear spins, in angular
frequency units (hbar = 1).  Whether the collective nuclear excitation
behaves like a single boson is controlled by two scale-free statistics of
the profile:

    ratio_max = max(g_j^2) / mean(g_j^2)
    ratio_dev = mean(|g_j^2 - mean(g_j^2)|) / mean(g_j^2)

Either ratio_max ~ 1 or ratio_dev -> 0 is sufficient for the collective
mode to be approximately bosonic at low excitation.  The two criteria are
independent: a profile with a single strong outlier fails the first and
passes the second, a bimodal half/half profile does the opposite.

The distinguished "bright" direction g/|g| is completed to an orthonormal
basis of R^N by Gram-Schmidt; the remaining N-1 rows define the auxiliary
(dark) collective modes.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    InvalidArgumentError,
    ProfileGenerationError,
    UnsupportedConstructionError,
)

PROFILE_KINDS = (
    "homogeneous",
    "gaussian",
    "uniform",
    "custom",
    "preset_counterexample_1",
    "preset_counterexample_2",
)

# Default acceptance thresholds for the two homogeneity criteria.
DEFAULT_THRESHOLD_MAX = 2.0
DEFAULT_THRESHOLD_DEV = 0.1

_GS_SKIP_TOL = 1e-10
_MAX_RESAMPLE_ROUNDS = 64


@dataclass(frozen=True)
class CouplingProfile:
    """Immutable vector of positive hyperfine couplings.

    Attributes
    ----------
    g : np.ndarray
        Couplings (g_1, ..., g_N), all strictly positive.
    kind : str
        How the profile was generated (one of PROFILE_KINDS).
    seed : int or None
        Seed used for random generation, for provenance.
    """

    g: np.ndarray
    kind: str = "custom"
    seed: Optional[int] = None

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        if g.ndim != 1 or g.size < 2:
            raise InvalidArgumentError(
                f"profile needs at least 2 couplings, got shape {g.shape}")
        if not np.all(np.isfinite(g)) or np.any(g <= 0.0):
            raise InvalidArgumentError("all couplings must be finite and > 0")
        g = g.copy()
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    @property
    def N(self) -> int:
        return int(self.g.size)

    @property
    def mean(self) -> float:
        """Average coupling sum(g_j)/N."""
        return float(self.g.mean())

    @property
    def mean_sq(self) -> float:
        """Average of g_j^2."""
        return float((self.g ** 2).mean())

    @property
    def max_sq(self) -> float:
        return float((self.g ** 2).max())

    @property
    def abs_dev_sq(self) -> float:
        """Mean absolute deviation of g_j^2 from its average."""
        g2 = self.g ** 2
        return float(np.abs(g2 - g2.mean()).mean())

    def to_json(self) -> str:
        return json.dumps(
            {"N": self.N, "g": [float(v) for v in self.g],
             "kind": self.kind, "seed": self.seed},
            indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CouplingProfile":
        data = json.loads(text)
        g = np.asarray(data["g"], dtype=float)
        if "N" in data and int(data["N"]) != g.size:
            raise InvalidArgumentError(
                f"declared N={data['N']} does not match {g.size} couplings")
        return cls(g=g, kind=data.get("kind", "custom"), seed=data.get("seed"))

    def write_csv(self, path) -> None:
        """Two-column CSV (j, g_j) with 1-based site index."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["j", "g_j"])
            for j, v in enumerate(self.g, start=1):
                writer.writerow([j, f"{v:.17g}"])


@dataclass(frozen=True)
class HomogeneityReport:
    """Outcome of the two quasi-homogeneity checks on a profile."""

    ratio_max: float
    ratio_dev: float
    max_ratio_ok: bool
    dev_ratio_ok: bool
    threshold_max: float
    threshold_dev: float

    @property
    def passes_either(self) -> bool:
        return self.max_ratio_ok or self.dev_ratio_ok

    @property
    def passes_both(self) -> bool:
        return self.max_ratio_ok and self.dev_ratio_ok

    def to_dict(self) -> dict:
        return {
            "ratio_max": self.ratio_max,
            "ratio_dev": self.ratio_dev,
            "max_ratio_ok": self.max_ratio_ok,
            "dev_ratio_ok": self.dev_ratio_ok,
            "threshold_max": self.threshold_max,
            "threshold_dev": self.threshold_dev,
        }


@dataclass(frozen=True)
class ModeBasis:
    """Orthonormal mode vectors h[k], row 0 along the coupling vector.

    Row 0 defines the bright collective mode; rows 1..N-1 define the
    auxiliary modes orthogonal to it.
    """

    h: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise InvalidArgumentError("mode basis must be a square matrix")
        gram = h @ h.T
        err = np.abs(gram - np.eye(h.shape[0])).max()
        if err > 1e-12:
            raise InvalidArgumentError(
                f"mode vectors not orthonormal: max Gram deviation {err:.3e}")
        h = h.copy()
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def N(self) -> int:
        return int(self.h.shape[0])

    def vector(self, k: int) -> np.ndarray:
        """Mode vector h^[k], 1-based: k=1 is the bright direction."""
        if not 1 <= k <= self.N:
            raise InvalidArgumentError(f"mode index {k} outside 1..{self.N}")
        return self.h[k - 1]


def generate_profile(kind: str, N: int, *, g0: float = 1.0,
                     center: Optional[float] = None,
                     width: Optional[float] = None,
                     jitter: float = 0.0,
                     low: float = 0.5, high: float = 1.5,
                     values=None,
                     seed: Optional[int] = None) -> CouplingProfile:
    """Build a coupling profile of the requested kind.

    Kinds
    -----
    homogeneous
        g_j = g0.
    gaussian
        Deterministic envelope g_j = g0 * exp(-(j - center)^2 / (2 width^2))
        over 1-based site index j, defaults center = N/2, width = N/4.
        Optional multiplicative jitter g_j *= 1 + jitter * u_j with
        u_j ~ U(-1, 1) drawn from the seed; entries pushed to <= 0 are
        redrawn deterministically, bounded retries.
    uniform
        g_j ~ U(low, high) with 0 < low < high, seeded.
    custom
        Explicit vector via `values`.
    preset_counterexample_1
        (g0, ..., g0, 10 g0): one strong outlier.  Fails the peak-ratio
        criterion, passes the deviation criterion at large N.
    preset_counterexample_2
        Half g0, half 3 g0 (N even).  Passes the peak-ratio criterion,
        fails the deviation criterion.
    """
    if kind not in PROFILE_KINDS:
        raise InvalidArgumentError(f"unknown profile kind {kind!r}")
    if not isinstance(N, (int, np.integer)) or N < 2:
        raise InvalidArgumentError(f"N must be an integer >= 2, got {N!r}")
    if g0 <= 0:
        raise InvalidArgumentError(f"g0 must be > 0, got {g0}")

    if kind == "homogeneous":
        g = np.full(N, float(g0))
    elif kind == "gaussian":
        c = N / 2.0 if center is None else float(center)
        w = N / 4.0 if width is None else float(width)
        if w <= 0:
            raise InvalidArgumentError(f"gaussian width must be > 0, got {w}")
        j = np.arange(1, N + 1, dtype=float)
        g = g0 * np.exp(-((j - c) ** 2) / (2.0 * w * w))
        if jitter != 0.0:
            if jitter < 0:
                raise InvalidArgumentError("jitter must be >= 0")
            rng = np.random.default_rng(seed)
            g = g * (1.0 + jitter * rng.uniform(-1.0, 1.0, N))
            g = _resample_nonpositive(g, lambda n: g0 * (1.0 + jitter * rng.uniform(-1.0, 1.0, n)))
    elif kind == "uniform":
        if not 0 < low < high:
            raise InvalidArgumentError(
                f"uniform bounds must satisfy 0 < low < high, got ({low}, {high})")
        rng = np.random.default_rng(seed)
        g = rng.uniform(low, high, N)
    elif kind == "custom":
        if values is None:
            raise InvalidArgumentError("custom profile requires `values`")
        g = np.asarray(values, dtype=float)
    elif kind == "preset_counterexample_1":
        g = np.full(N, float(g0))
        g[-1] = 10.0 * g0
    else:  # preset_counterexample_2
        if N % 2 != 0:
            raise InvalidArgumentError(
                "preset_counterexample_2 splits the ensemble in half, N must be even")
        g = np.full(N, float(g0))
        g[N // 2:] = 3.0 * g0

    return CouplingProfile(g=g, kind=kind, seed=seed)


def _resample_nonpositive(g, draw):
    """Redraw entries <= 0 from `draw(count)`, bounded number of rounds."""
    g = g.copy()
    for _ in range(_MAX_RESAMPLE_ROUNDS):
        bad = g <= 0.0
        if not bad.any():
            return g
        g[bad] = draw(int(bad.sum()))
    raise ProfileGenerationError(
        f"could not draw positive couplings after {_MAX_RESAMPLE_ROUNDS} rounds")


def homogeneity_metrics(p: CouplingProfile,
                        threshold_max: float = DEFAULT_THRESHOLD_MAX,
                        threshold_dev: float = DEFAULT_THRESHOLD_DEV) -> HomogeneityReport:
    """Evaluate both quasi-homogeneity criteria for a profile.

    ratio_max >= 1 always, with equality iff the profile is homogeneous;
    ratio_dev >= 0, zero iff all g_j^2 are equal.  Both ratios are invariant
    under rescaling g -> c g.
    """
    mean_sq = p.mean_sq
    ratio_max = p.max_sq / mean_sq
    ratio_dev = p.abs_dev_sq / mean_sq
    return HomogeneityReport(
        ratio_max=ratio_max,
        ratio_dev=ratio_dev,
        max_ratio_ok=bool(ratio_max <= threshold_max),
        dev_ratio_ok=bool(ratio_dev <= threshold_dev),
        threshold_max=threshold_max,
        threshold_dev=threshold_dev,
    )


def gram_schmidt_modes(p: CouplingProfile) -> ModeBasis:
    """Orthonormal basis of R^N whose first row is g/|g|.

    The remaining rows are built from the canonical unit vectors e_1, e_2,
    ... in order, orthogonalized against everything accepted so far; a
    candidate whose residual norm falls below 1e-10 is skipped as linearly
    dependent.  Two projection passes keep the Gram matrix at the 1e-12
    level even for strongly peaked profiles.
    """
    N = p.N
    rows = np.empty((N, N))
    rows[0] = p.g / np.linalg.norm(p.g)
    count = 1
    for i in range(N):
        if count == N:
            break
        v = np.zeros(N)
        v[i] = 1.0
        for _ in range(2):  # re-orthogonalize for numerical stability
            v -= rows[:count].T @ (rows[:count] @ v)
        norm = np.linalg.norm(v)
        if norm < _GS_SKIP_TOL:
            continue
        rows[count] = v / norm
        count += 1
    if count < N:
        raise RuntimeError(
            f"Gram-Schmidt completion found only {count} of {N} directions")
    return ModeBasis(h=rows)


def permutation_mode(p: CouplingProfile) -> np.ndarray:
    """Mode vector orthogonal to g built by pairing site i with site i + N/2.

    h_i = g_{i+N/2} and h_{i+N/2} = -g_i for the first half, so g.h = 0
    exactly and |h| is a permutation of |g| (the homogeneity statistics of
    |h| equal those of g).  Undefined for odd N; use gram_schmidt_modes
    there instead.
    """
    N = p.N
    if N % 2 != 0:
        raise UnsupportedConstructionError(
            "pairing construction needs even N; use gram_schmidt_modes")
    half = N // 2
    h = np.empty(N)
    h[:half] = p.g[half:]
    h[half:] = -p.g[:half]
    return h
