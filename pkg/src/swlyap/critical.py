"""Marginally stable planar switched system with a four-switch periodic orbit.

The two-mode family is a clockwise spiral M1 = [[-a, 1], [-1, -a]] and its
anisotropic conjugate M2 = D M1 D^{-1}, D = diag(k, 1/k). One scalar knob k
is bisected until the worst-case dwell product e^{t1 M1} e^{t2 M2} has
spectral radius exactly 1, attained on the eigenvalue -1 branch: the state
returns to -x0 after one switching period T = t1 + t2, so the trajectory is
2T-periodic with four switches. Shifting both modes by -eps*Id gives the
uniformly exponentially stable family used throughout the experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    MatrixSet,
    SwitchingLaw,
    matrix_exponential,
    shift_set,
)
from .errors import BracketError, ContractViolationError, WrongBranchError


@dataclass
class FamilyParameter:
    """Knobs of the two-spiral family: anisotropy k and contraction rate alpha."""

    k: float
    alpha: float = 0.1

    def __post_init__(self):
        if self.k < 1.0:
            raise ContractViolationError(f"anisotropy k must be >= 1, got {self.k}")
        if self.alpha <= 0.0:
            raise ContractViolationError(f"alpha must be > 0, got {self.alpha}")


@dataclass
class WorstCaseResult:
    t1: float
    t2: float
    rho: float
    boundary_warning: bool


@dataclass
class CriticalPair:
    """Calibrated marginal pair with its worst-case dwell times and eigenvector."""

    m1: np.ndarray
    m2: np.ndarray
    t1: float
    t2: float
    x0: np.ndarray
    rho: float
    alpha: float
    k: float

    @property
    def period(self) -> float:
        return self.t1 + self.t2

    def matrix_set(self, eps: float = 0.0) -> MatrixSet:
        return epsilon_family(self, eps)

    def to_json(self) -> dict:
        return {
            "m1": self.m1.reshape(-1).tolist(),
            "m2": self.m2.reshape(-1).tolist(),
            "t1": self.t1,
            "t2": self.t2,
            "x0": self.x0.tolist(),
            "rho": self.rho,
            "alpha": self.alpha,
            "k": self.k,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "CriticalPair":
        return cls(
            m1=np.array(doc["m1"], dtype=float).reshape(2, 2),
            m2=np.array(doc["m2"], dtype=float).reshape(2, 2),
            t1=float(doc["t1"]),
            t2=float(doc["t2"]),
            x0=np.array(doc["x0"], dtype=float),
            rho=float(doc["rho"]),
            alpha=float(doc["alpha"]),
            k=float(doc["k"]),
        )


def make_pair(p: FamilyParameter) -> tuple[np.ndarray, np.ndarray]:
    """Clockwise spiral and its diag(k, 1/k) conjugate; both Hurwitz, trace -2a."""
    m1 = np.array([[-p.alpha, 1.0], [-1.0, -p.alpha]])
    d = np.diag([p.k, 1.0 / p.k])
    m2 = d @ m1 @ np.diag([1.0 / p.k, p.k])
    return m1, m2


def _spectral_radius_2x2(mat: np.ndarray) -> float:
    trace = mat[0, 0] + mat[1, 1]
    det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    disc = trace * trace - 4.0 * det
    if disc >= 0.0:
        root = np.sqrt(disc)
        return max(abs(trace + root), abs(trace - root)) / 2.0
    return np.sqrt(max(det, 0.0))


def _product_radius(m1: np.ndarray, m2: np.ndarray, t1: float, t2: float) -> float:
    return _spectral_radius_2x2(matrix_exponential(m1, t1) @ matrix_exponential(m2, t2))


def worst_case_product(m1: np.ndarray, m2: np.ndarray, t_max: float = 4.0,
                       grid: int = 48) -> WorstCaseResult:
    """Maximize the product spectral radius over the dwell square (0, t_max]^2.

    Grid search then alternating golden-section refinement to local
    tolerance 1e-10. A maximum on the smallest grid cell or at t_max raises
    the boundary-warning flag (enlarge t_max or refine the grid).
    """
    if t_max <= 0.0:
        raise ContractViolationError(f"t_max must be > 0, got {t_max}")
    if grid < 16:
        raise ContractViolationError(f"grid must be >= 16, got {grid}")
    ts = np.linspace(t_max / grid, t_max, grid)
    best = (-np.inf, ts[0], ts[0])
    for t1 in ts:
        e1 = matrix_exponential(m1, t1)
        for t2 in ts:
            rho = _spectral_radius_2x2(e1 @ matrix_exponential(m2, t2))
            if rho > best[0]:
                best = (rho, t1, t2)
    _, t1, t2 = best

    lo = ts[0]
    gold = (np.sqrt(5.0) - 1.0) / 2.0

    def refine(fixed: float, moving: float, which: int) -> float:
        a = max(lo * 0.5, moving - t_max / grid)
        b = min(t_max, moving + t_max / grid)
        c, d = b - gold * (b - a), a + gold * (b - a)
        while b - a > 1e-10:
            fc = _product_radius(m1, m2, c, fixed) if which == 0 \
                else _product_radius(m1, m2, fixed, c)
            fd = _product_radius(m1, m2, d, fixed) if which == 0 \
                else _product_radius(m1, m2, fixed, d)
            if fc < fd:
                a, c = c, d
                d = a + gold * (b - a)
            else:
                b, d = d, c
                c = b - gold * (b - a)
        return (a + b) / 2.0

    for _ in range(40):
        t1_new = refine(t2, t1, 0)
        t2_new = refine(t1_new, t2, 1)
        if abs(t1_new - t1) < 1e-10 and abs(t2_new - t2) < 1e-10:
            t1, t2 = t1_new, t2_new
            break
        t1, t2 = t1_new, t2_new

    rho = _product_radius(m1, m2, t1, t2)
    edge = t_max / grid
    warn = (t1 <= edge * 1.5 or t2 <= edge * 1.5
            or t1 >= t_max - 1e-9 or t2 >= t_max - 1e-9)
    return WorstCaseResult(t1=float(t1), t2=float(t2), rho=float(rho),
                           boundary_warning=warn)


def _find_bracket(alpha: float, t_max: float, grid: int) -> tuple[float, float]:
    """Double k from 1 until the worst-case radius exceeds 1."""
    k = 1.0
    for _ in range(24):
        m1, m2 = make_pair(FamilyParameter(k=k * 2.0, alpha=alpha))
        if worst_case_product(m1, m2, t_max, grid).rho > 1.0:
            return k, k * 2.0
        k *= 2.0
    raise BracketError(f"no k with worst-case radius > 1 found up to k={k}")


def calibrate_critical(alpha: float = 0.1,
                       k_bracket: tuple[float, float] | None = None,
                       tol: float = 1e-9,
                       t_max: float = 4.0,
                       grid: int = 48) -> CriticalPair:
    """Bisect the anisotropy until the worst-case product radius equals 1.

    Returns the calibrated pair with x0 the unit eigenvector for the product
    eigenvalue nearest -1; aborts with WrongBranchError if criticality is
    reached on the +1 branch instead.
    """
    if k_bracket is None:
        k_bracket = _find_bracket(alpha, t_max, grid)
    k_lo, k_hi = k_bracket

    def rho_of(k: float) -> WorstCaseResult:
        m1, m2 = make_pair(FamilyParameter(k=k, alpha=alpha))
        return worst_case_product(m1, m2, t_max, grid)

    if rho_of(k_lo).rho > 1.0 or rho_of(k_hi).rho < 1.0:
        raise BracketError(
            f"bracket [{k_lo}, {k_hi}] does not straddle radius 1 for alpha={alpha}")

    result = None
    k_mid = k_lo
    for _ in range(200):
        k_mid = 0.5 * (k_lo + k_hi)
        result = rho_of(k_mid)
        if abs(result.rho - 1.0) <= tol:
            break
        if result.rho > 1.0:
            k_hi = k_mid
        else:
            k_lo = k_mid
        if k_hi - k_lo < 1e-15 * max(1.0, k_hi):
            break
    if result is None or abs(result.rho - 1.0) > 10.0 * tol:
        raise BracketError(
            f"bisection stalled at rho={result.rho if result else 'n/a'}")

    m1, m2 = make_pair(FamilyParameter(k=k_mid, alpha=alpha))
    product = matrix_exponential(m1, result.t1) @ matrix_exponential(m2, result.t2)
    eigvals, eigvecs = np.linalg.eig(product)
    idx = int(np.argmin(np.abs(eigvals + 1.0)))
    lam = eigvals[idx]
    if abs(lam.imag) > 10.0 * tol or abs(lam.real + 1.0) > 100.0 * tol:
        raise WrongBranchError(
            f"critical product eigenvalue {lam} is not near -1; "
            "this calibration landed on a different planar case")
    x0 = np.real(eigvecs[:, idx])
    x0 = x0 / np.linalg.norm(x0)
    return CriticalPair(m1=m1, m2=m2, t1=result.t1, t2=result.t2, x0=x0,
                        rho=result.rho, alpha=alpha, k=k_mid)


def epsilon_family(pair: CriticalPair, eps: float) -> MatrixSet:
    """{M1 - eps*Id, M2 - eps*Id}; exponentially stable for eps > 0."""
    if eps < 0.0:
        raise ContractViolationError(f"eps must be >= 0, got {eps}")
    base = MatrixSet.from_matrices([pair.m1, pair.m2], ["m1", "m2"])
    return shift_set(base, eps) if eps != 0.0 else base


def periodic_law(pair: CriticalPair) -> SwitchingLaw:
    """T-periodic schedule: mode 0 for t1, then mode 1 for t2."""
    return SwitchingLaw(segments=[(pair.t1, 0), (pair.t2, 1)], periodic=True)


@dataclass
class EmbeddedSystem:
    """Result of the n>2 embedding: union set plus the shift that tamed it."""

    matrix_set: MatrixSet
    nu_star: float
    norm: "object"  # SampledNorm of the embedded planar pair
    planar_modes: int


def embed_critical_nd(pair: CriticalPair, n: int, rotation_count: int = 3,
                      margin: float = 0.02, seed: int = 7,
                      dwell: float | None = None,
                      horizon: float | None = None,
                      shift_samples: int = 512) -> EmbeddedSystem:
    """Union of the block-embedded pair with shifted so(n) rotations.

    Builds the canonical norm of the embedded (marginally stable) pair,
    computes the stabilizing shift nu* against sampled rotations, and
    returns the union set together with nu* and the norm used.
    """
    from .core import embed_block, so_ball_sample
    from .norms import canonical_norm
    from .verify import stabilizing_shift

    planar = MatrixSet.from_matrices([pair.m1, pair.m2], ["m1", "m2"])
    embedded = embed_block(planar, n)
    rotations = so_ball_sample(n, rotation_count, seed)
    if dwell is None:
        dwell = pair.t1 / 4.0
    if horizon is None:
        horizon = 2.0 * pair.period
    vhat = canonical_norm(embedded, cert=None, dwell=dwell, horizon=horizon)
    nu_star = stabilizing_shift(vhat, rotations, margin=margin,
                                samples=shift_samples)
    shifted = shift_set(rotations, nu_star)
    union = MatrixSet.from_matrices(
        embedded.matrices() + shifted.matrices(),
        [m.label for m in embedded.modes] + [m.label for m in shifted.modes])
    return EmbeddedSystem(matrix_set=union, nu_star=nu_star, norm=vhat,
                          planar_modes=len(embedded.modes))
