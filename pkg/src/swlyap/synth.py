"""Constructive approximation of convex homogeneous Lyapunov functions.

Polyhedral synthesis W(x) = max_j |l_j . x| from sampled-norm subgradients,
even-power-sum smoothing Z(x) = (sum_j |l_j . x|^{2d})^{1/2d} with the
sandwich W <= Z <= N^{1/2d} W, uniform sphere-gap measurement, and power
rescaling. Candidate functions form a small tagged union dispatched by
``eval_candidate`` and serialized by ``candidate_to_json``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError
from .norms import SampledNorm
from .polynomials import PolynomialForm, expand_power_sum
from .sampling import sphere_sequence


@dataclass
class PolyhedralForm:
    """max_j |l_j . x|: convex, absolutely homogeneous of degree one."""

    vectors: np.ndarray  # (pieces, n)

    def __post_init__(self):
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if self.vectors.shape[0] < 1:
            raise ContractViolationError("polyhedral form needs at least one piece")

    @property
    def pieces(self) -> int:
        return self.vectors.shape[0]

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    def value(self, x) -> float:
        return float(np.abs(self.vectors @ np.asarray(x, dtype=float)).max())

    def value_many(self, points: np.ndarray) -> np.ndarray:
        return np.abs(points @ self.vectors.T).max(axis=1)

    def active_covectors(self, x, tie_tol: float = 1e-8) -> np.ndarray:
        """Signed covectors of all pieces within relative tie_tol of the max."""
        x = np.asarray(x, dtype=float)
        raw = self.vectors @ x
        mags = np.abs(raw)
        top = mags.max()
        if top == 0.0:
            raise ContractViolationError(
                "active covectors undefined where the form vanishes")
        idx = np.where(mags >= top * (1.0 - tie_tol))[0]
        return np.stack([np.sign(raw[i]) * self.vectors[i] for i in idx])


@dataclass
class EvenPowerSum:
    """Homogeneous even-power sum of linear forms.

    normalized=True evaluates (sum |l_j . x|^{2d})^{1/2d} (degree one,
    convex); normalized=False evaluates the degree-2d polynomial
    sum (l_j . x)^{2d}.
    """

    vectors: np.ndarray
    half_degree: int
    normalized: bool = True

    def __post_init__(self):
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if self.half_degree < 1:
            raise ContractViolationError(
                f"half degree must be >= 1, got {self.half_degree}")

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    def value(self, x) -> float:
        return float(self.value_many(np.asarray(x, dtype=float)[None, :])[0])

    def value_many(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        mags = np.abs(points @ self.vectors.T)  # (samples, pieces)
        power = 2 * self.half_degree
        if not self.normalized:
            return (mags ** power).sum(axis=1)
        # Factor out the max so large powers cannot overflow.
        peak = mags.max(axis=1)
        out = np.zeros(points.shape[0])
        ok = peak > 0.0
        ratios = mags[ok] / peak[ok, None]
        out[ok] = peak[ok] * (ratios ** power).sum(axis=1) ** (1.0 / power)
        return out

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        raw = self.vectors @ x
        power = 2 * self.half_degree
        if not self.normalized:
            return (power * raw ** (power - 1)) @ self.vectors
        value = self.value(x)
        if value == 0.0:
            raise ContractViolationError("gradient undefined at the origin")
        # grad Z = sum_j ((l_j . x)/Z)^{2d-1} l_j; the ratios are <= 1.
        scaled = raw / value
        return (scaled ** (power - 1)) @ self.vectors


@dataclass
class PowerForm:
    """x -> base(x)^q for a degree-one base; homogeneous of degree q."""

    base: object
    exponent: float

    def __post_init__(self):
        if self.exponent <= 0.0:
            raise ContractViolationError(
                f"power exponent must be > 0, got {self.exponent}")

    @property
    def n(self) -> int:
        return self.base.n

    def value(self, x) -> float:
        return float(eval_candidate(self.base, x) ** self.exponent)

    def value_many(self, points: np.ndarray) -> np.ndarray:
        return self.base.value_many(points) ** self.exponent


CandidateFunction = PolyhedralForm | EvenPowerSum | PolynomialForm | PowerForm


@dataclass
class GapReport:
    """Sup of |V - F| over sampled sphere directions."""

    gap: float
    argmax: np.ndarray
    samples: int

    def csv_row(self) -> str:
        coords = ",".join(f"{v!r}" for v in self.argmax)
        return f"{self.samples},{self.gap!r},{coords}"


def synthesize_polyhedral(v: SampledNorm, count: int) -> PolyhedralForm:
    """Support the norm at the first ``count`` sphere samples.

    Each piece is a subgradient covector, so W <= V everywhere with equality
    at every used sample direction.
    """
    if count < 1:
        raise ContractViolationError(f"count must be >= 1, got {count}")
    points = sphere_sequence(v.dimension, count)
    vectors = np.stack([v.subgradient(x).l for x in points])
    return PolyhedralForm(vectors=vectors)


def eval_candidate(f: CandidateFunction, x) -> float:
    """Dispatch evaluation; every candidate vanishes at the origin."""
    return f.value(x)


def smooth_to_even_powers(w: PolyhedralForm, half_degree: int) -> EvenPowerSum:
    """Normalized even-power composition on W's pieces.

    Sandwich: W(x) <= Z(x) <= N^(1/2d) W(x) with N the piece count.
    """
    return EvenPowerSum(vectors=w.vectors.copy(), half_degree=half_degree,
                        normalized=True)


def to_polynomial(z: EvenPowerSum, coeff_budget: int = 200_000) -> PolynomialForm:
    """Expand the unnormalized power sum into monomial coefficients."""
    return expand_power_sum(z.vectors, 2 * z.half_degree, coeff_budget)


def is_degree_one(f: CandidateFunction) -> bool:
    if isinstance(f, PolyhedralForm):
        return True
    if isinstance(f, EvenPowerSum):
        return f.normalized
    if isinstance(f, SampledNorm):
        return True
    return False


def uniform_gap(v: SampledNorm, f: CandidateFunction, samples: int) -> GapReport:
    """Sup-sphere gap |V - F| over the deterministic sphere sequence."""
    if not is_degree_one(f):
        raise ContractViolationError(
            "uniform gap needs an absolutely homogeneous degree-one candidate")
    points = sphere_sequence(v.dimension, samples)
    diffs = np.abs(v.value_many(points) - f.value_many(points))
    best = int(np.argmax(diffs))
    return GapReport(gap=float(diffs[best]), argmax=points[best], samples=samples)


def rescale_power(f: CandidateFunction, q: float) -> CandidateFunction:
    """x -> F(x)^q; preserves Lyapunov monotonicity verdicts (q > 0)."""
    if q <= 0.0:
        raise ContractViolationError(f"exponent must be > 0, got {q}")
    if not is_degree_one(f):
        raise ContractViolationError("rescaling expects a degree-one candidate")
    if q == 1.0:
        return f
    return PowerForm(base=f, exponent=q)


def candidate_to_json(f: CandidateFunction) -> dict:
    if isinstance(f, PolyhedralForm):
        return {"kind": "polyhedral", "vectors": f.vectors.tolist()}
    if isinstance(f, EvenPowerSum):
        return {"kind": "even_power", "vectors": f.vectors.tolist(),
                "half_degree": f.half_degree, "normalized": f.normalized}
    if isinstance(f, PolynomialForm):
        return f.to_json()
    if isinstance(f, PowerForm):
        return {"kind": "power", "base": candidate_to_json(f.base),
                "exponent": f.exponent}
    raise ContractViolationError(f"not a candidate function: {type(f)!r}")


def candidate_from_json(doc: dict) -> CandidateFunction:
    kind = doc.get("kind")
    if kind == "polyhedral":
        return PolyhedralForm(vectors=np.array(doc["vectors"], dtype=float))
    if kind == "even_power":
        return EvenPowerSum(vectors=np.array(doc["vectors"], dtype=float),
                            half_degree=int(doc["half_degree"]),
                            normalized=bool(doc["normalized"]))
    if kind == "polynomial":
        return PolynomialForm.from_json(doc)
    if kind == "power":
        return PowerForm(base=candidate_from_json(doc["base"]),
                         exponent=float(doc["exponent"]))
    raise ContractViolationError(f"unknown candidate kind {kind!r}")
