"""Linear-algebra substrate for switched systems.

Mode matrices, switching schedules, transition cocycles, exact-exponential
trajectory simulation, and the shift/embedding constructions everything else
builds on. All operations are pure; matrices are defensive copies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import (
    ContractViolationError,
    DimensionError,
    NumericDomainError,
    OutOfHorizonError,
)
from .sampling import make_rng


def _as_square(matrix: np.ndarray) -> np.ndarray:
    arr = np.array(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericDomainError("matrix has non-finite entries")
    return arr


@dataclass
class ModeMatrix:
    """One mode of the switched dynamics x' = M x."""

    entries: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.entries = _as_square(self.entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass
class MatrixSet:
    """Finite set of modes sharing one state dimension."""

    dimension: int
    modes: list[ModeMatrix]

    def __post_init__(self):
        if not self.modes:
            raise ContractViolationError("a matrix set needs at least one mode")
        for mode in self.modes:
            if mode.n != self.dimension:
                raise DimensionError(
                    f"mode '{mode.label}' is {mode.n}x{mode.n}, "
                    f"set dimension is {self.dimension}")

    @classmethod
    def from_matrices(cls, matrices, labels=None) -> "MatrixSet":
        labels = labels or [f"m{i}" for i in range(len(matrices))]
        modes = [ModeMatrix(m, lab) for m, lab in zip(matrices, labels)]
        return cls(dimension=modes[0].n, modes=modes)

    def matrices(self) -> list[np.ndarray]:
        return [m.entries for m in self.modes]

    def max_norm(self) -> float:
        return max(spectral_norm(m.entries) for m in self.modes)

    def to_json(self) -> dict:
        return {
            "n": self.dimension,
            "modes": [m.entries.reshape(-1).tolist() for m in self.modes],
            "labels": [m.label for m in self.modes],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "MatrixSet":
        n = int(doc["n"])
        labels = doc.get("labels") or [f"m{i}" for i in range(len(doc["modes"]))]
        mats = [np.array(flat, dtype=float).reshape(n, n) for flat in doc["modes"]]
        return cls.from_matrices(mats, labels)


@dataclass
class SwitchingLaw:
    """Piecewise-constant mode schedule; optionally cycled periodically."""

    segments: list[tuple[float, int]]
    periodic: bool = False

    def __post_init__(self):
        cleaned = []
        for duration, index in self.segments:
            duration = float(duration)
            if duration <= 0.0:
                raise ContractViolationError(
                    f"segment durations must be > 0, got {duration}")
            cleaned.append((duration, int(index)))
        self.segments = cleaned
        if self.periodic and self.total_duration <= 0.0:
            raise ContractViolationError("periodic law needs positive total duration")

    @property
    def total_duration(self) -> float:
        return sum(d for d, _ in self.segments)

    def pieces_until(self, t: float):
        """Yield (duration, mode index) pieces covering [0, t], cycling if periodic."""
        if t < 0.0:
            raise ContractViolationError(f"time must be >= 0, got {t}")
        remaining = t
        while remaining > 0.0:
            progressed = False
            for duration, index in self.segments:
                if remaining <= 0.0:
                    return
                piece = min(duration, remaining)
                yield piece, index
                remaining -= piece
                progressed = True
            if not self.periodic:
                if remaining > 1e-12 * max(1.0, t):
                    raise OutOfHorizonError(
                        f"t={t} exceeds non-periodic horizon {self.total_duration}")
                return
            if not progressed:
                return

    def to_json(self) -> dict:
        return {"segments": [[d, i] for d, i in self.segments],
                "periodic": self.periodic}

    @classmethod
    def from_json(cls, doc: dict) -> "SwitchingLaw":
        return cls(segments=[(float(d), int(i)) for d, i in doc["segments"]],
                   periodic=bool(doc["periodic"]))


@dataclass
class StabilityCertificate:
    """Uniform bound ||Phi(t,0)|| <= C e^{-gamma t} over all laws."""

    kind: str  # "uniform" | "exponential"
    C: float
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("uniform", "exponential"):
            raise ContractViolationError(f"unknown certificate kind {self.kind!r}")
        if self.C < 1.0:
            raise ContractViolationError(f"overshoot bound C must be >= 1, got {self.C}")
        if self.kind == "exponential" and self.gamma <= 0.0:
            raise ContractViolationError("exponential certificate needs gamma > 0")
        if self.gamma < 0.0:
            raise ContractViolationError(f"gamma must be >= 0, got {self.gamma}")


@dataclass
class Trajectory:
    """Sampled solution x(t) = Phi(t,0) x0 of one switching law."""

    times: np.ndarray
    states: np.ndarray  # (len(times), n)
    law: SwitchingLaw

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)

    def fitted_decay_rate(self) -> float:
        """Least-squares slope of -log ||x(t)||; positive means decay."""
        norms = self.norms()
        mask = norms > 0.0
        if mask.sum() < 2:
            return 0.0
        slope = np.polyfit(self.times[mask], np.log(norms[mask]), 1)[0]
        return -float(slope)


def spectral_norm(matrix: np.ndarray, tol: float = 1e-10,
                  max_iter: int = 1000) -> float:
    """Operator 2-norm by power iteration on M^T M."""
    m = np.asarray(matrix, dtype=float)
    gram = m.T @ m
    n = gram.shape[0]
    v = np.arange(1.0, n + 1.0)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        w = gram @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        v = w / norm_w
        new_sigma = np.sqrt(float(v @ gram @ v))
        if abs(new_sigma - sigma) <= tol * max(1.0, new_sigma):
            return new_sigma
        sigma = new_sigma
    return sigma


def matrix_exponential(matrix, t: float = 1.0) -> np.ndarray:
    """e^{t M} via scaling-and-squaring (Pade kernel)."""
    arr = matrix.entries if isinstance(matrix, ModeMatrix) else _as_square(matrix)
    if not np.isfinite(t):
        raise NumericDomainError(f"time must be finite, got {t}")
    return expm(t * arr)


class _ExpCache:
    """Memoizes segment exponentials keyed by (mode index, duration)."""

    def __init__(self, mset: MatrixSet):
        self._mats = mset.matrices()
        self._cache: dict[tuple[int, float], np.ndarray] = {}

    def get(self, index: int, duration: float) -> np.ndarray:
        if not 0 <= index < len(self._mats):
            raise DimensionError(
                f"mode index {index} out of range for {len(self._mats)} modes")
        key = (index, duration)
        if key not in self._cache:
            self._cache[key] = matrix_exponential(self._mats[index], duration)
        return self._cache[key]


def transition_matrix(law: SwitchingLaw, mset: MatrixSet, t: float) -> np.ndarray:
    """Phi(t, 0): ordered product of segment exponentials, later factors left."""
    if t < 0.0:
        raise ContractViolationError(f"time must be >= 0, got {t}")
    cache = _ExpCache(mset)
    phi = np.eye(mset.dimension)
    for duration, index in law.pieces_until(t):
        phi = cache.get(index, duration) @ phi
    return phi


def simulate(law: SwitchingLaw, mset: MatrixSet, x0, step: float,
             horizon: float | None = None) -> Trajectory:
    """Dense sampling of the trajectory with exact exponential propagation.

    Sample times are aligned to segment boundaries; within a segment the
    step is shrunk to divide the segment evenly, so the only numerical error
    is the matrix-exponential tolerance.
    """
    if step <= 0.0:
        raise ContractViolationError(f"step must be > 0, got {step}")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (mset.dimension,):
        raise DimensionError(
            f"initial state has shape {x0.shape}, expected ({mset.dimension},)")
    if horizon is None:
        if law.periodic:
            raise ContractViolationError("periodic law needs an explicit horizon")
        horizon = law.total_duration

    cache = _ExpCache(mset)
    times = [0.0]
    states = [x0]
    t_now = 0.0
    x_now = x0
    for duration, index in law.pieces_until(horizon):
        substeps = max(1, int(np.ceil(duration / step - 1e-12)))
        dt = duration / substeps
        propagator = cache.get(index, dt)
        for _ in range(substeps):
            x_now = propagator @ x_now
            t_now += dt
            times.append(t_now)
            states.append(x_now)
    return Trajectory(times=np.array(times), states=np.array(states), law=law)


def shift_set(mset: MatrixSet, nu: float) -> MatrixSet:
    """Replace every mode M by M - nu*Id."""
    eye = np.eye(mset.dimension)
    modes = [ModeMatrix(m.entries - nu * eye, m.label) for m in mset.modes]
    return MatrixSet(dimension=mset.dimension, modes=modes)


def embed_block(mset: MatrixSet, n: int) -> MatrixSet:
    """Block-embed planar modes as blockdiag(M, -Id_{n-2}).

    The (x1, x2) plane is invariant and the complement contracts at unit rate.
    """
    if n <= 2:
        raise DimensionError(f"embedding dimension must be > 2, got {n}")
    if mset.dimension != 2:
        raise DimensionError("embed_block expects a planar matrix set")
    modes = []
    for mode in mset.modes:
        big = -np.eye(n)
        big[:2, :2] = mode.entries
        modes.append(ModeMatrix(big, mode.label))
    return MatrixSet(dimension=n, modes=modes)


def so_ball_sample(n: int, count: int, seed: int) -> MatrixSet:
    """Deterministic sample of skew-symmetric matrices with operator norm <= 1.

    The elementary rotation generators E_ij - E_ji come first (norm exactly 1);
    the remainder are Philox-seeded random antisymmetrizations scaled to norm 1.
    """
    if n < 2:
        raise DimensionError(f"need n >= 2, got {n}")
    if count < 1:
        raise ContractViolationError(f"count must be >= 1, got {count}")
    mats: list[np.ndarray] = []
    labels: list[str] = []
    for i in range(n):
        for j in range(i + 1, n):
            if len(mats) >= count:
                break
            gen = np.zeros((n, n))
            gen[i, j] = 1.0
            gen[j, i] = -1.0
            mats.append(gen)
            labels.append(f"rot{i}{j}")
        if len(mats) >= count:
            break
    rng = make_rng(seed)
    k = 0
    while len(mats) < count:
        raw = rng.normal(size=(n, n))
        skew = 0.5 * (raw - raw.T)
        norm = spectral_norm(skew)
        if norm == 0.0:
            continue
        mats.append(skew / norm)
        labels.append(f"skew{k}")
        k += 1
    return MatrixSet.from_matrices(mats, labels)


def random_switching_law(mset: MatrixSet, rng: np.random.Generator,
                         segments: int = 8,
                         dwell_range: tuple[float, float] = (0.2, 1.5),
                         periodic: bool = False) -> SwitchingLaw:
    """Random piecewise-constant schedule; used by simulation experiments."""
    lo, hi = dwell_range
    parts = [(float(rng.uniform(lo, hi)), int(rng.integers(len(mset.modes))))
             for _ in range(segments)]
    return SwitchingLaw(segments=parts, periodic=periodic)
