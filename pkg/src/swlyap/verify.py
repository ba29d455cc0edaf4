"""Nonsmooth verification of (non)strict common Lyapunov conditions.

The planar polyhedral check is exact: on each facet of the unit ball the
candidate subgradient is constant and x -> l.Mx is linear, so its sign over
the whole facet cone is decided at the two endpoint vertices; at a vertex
the subdifferential is the segment between the two active signed covectors
and linearity in l reduces the check to the endpooints. Everything else is
sampled evidence and says so in the report.

Margins are normalized by the candidate value (scale-free); the Euclidean
normalization is reported as a secondary number.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .core import MatrixSet, Trajectory
from .errors import ContractViolationError, DegenerateBallError
from .norms import SampledNorm
from .polynomials import PolynomialForm
from .sampling import sphere_sequence
from .synth import EvenPowerSum, PolyhedralForm, PowerForm


@dataclass
class VerificationReport:
    """Outcome of a Lyapunov-decrease check against a matrix set."""

    verdict: str  # "strict" | "nonstrict" | "violated"
    margin: float  # min over checks of -l.Mx / F(x)
    margin_euclidean: float  # same, normalized by ||x||
    witness_x: np.ndarray
    witness_mode: int
    witness_l: np.ndarray
    method: str  # "exact-2d-vertices" | "sampled-sphere" | "trajectory"
    evidence_only: bool
    samples: int = 0
    skipped: int = 0

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "margin": self.margin,
            "margin_euclidean": self.margin_euclidean,
            "witness": {
                "x": self.witness_x.tolist(),
                "mode": self.witness_mode,
                "l": self.witness_l.tolist(),
            },
            "method": self.method,
            "evidence_only": self.evidence_only,
            "samples": self.samples,
            "skipped": self.skipped,
        }

    def csv_row(self) -> str:
        coords = ",".join(f"{v!r}" for v in self.witness_x)
        return f"{self.verdict},{self.margin!r},{coords},{self.method}"


@dataclass
class PolytopeUnitBall:
    """Vertex description of {x : max_j |l_j . x| <= 1} in the plane."""

    facets: np.ndarray        # (2*pieces, 2) signed covectors, [l; -l] stacking
    vertices: np.ndarray      # (count, 2) in angular order
    active_pairs: list[tuple[int, int]]  # indices into facets per vertex
    redundant_pieces: list[int]          # piece indices never active


@dataclass
class MonotoneReport:
    monotone: bool
    violation_index: int | None
    violation_point: np.ndarray | None
    total_decrease: float


def unit_ball_2d(w: PolyhedralForm) -> PolytopeUnitBall:
    """Enumerate the unit-ball vertices of a planar polyhedral function.

    The ball is the polar of conv{+-l_j}: hull vertices are the active
    facets, consecutive hull edges intersect in the ball vertices.
    """
    if w.n != 2:
        raise ContractViolationError("unit_ball_2d expects a planar form")
    signed = np.vstack([w.vectors, -w.vectors])
    try:
        hull = ConvexHull(signed)
    except QhullError as exc:
        raise DegenerateBallError(
            "polyhedral form vanishes on a line; unit ball is unbounded") from exc
    order = list(hull.vertices)  # counterclockwise
    count = len(order)
    if count < 3:
        raise DegenerateBallError("unit ball degenerate: fewer than 3 facets")

    vertices = []
    pairs = []
    for i in range(count):
        a = signed[order[i]]
        b = signed[order[(i + 1) % count]]
        mat = np.array([a, b])
        det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
        if abs(det) < 1e-14:
            # Collinear duplicate covector: no vertex between these facets.
            continue
        v = np.linalg.solve(mat, np.ones(2))
        vertices.append(v)
        pairs.append((order[i], order[(i + 1) % count]))
    if len(vertices) < 3:
        raise DegenerateBallError("unit ball degenerate after facet merging")
    vertices = np.array(vertices)

    # Rotate so the listing starts at the smallest polar angle.
    angles = np.arctan2(vertices[:, 1], vertices[:, 0])
    start = int(np.argmin(angles))
    roll = list(range(start, len(pairs))) + list(range(start))
    vertices = vertices[roll]
    pairs = [pairs[i] for i in roll]

    active_facets = {idx for pair in pairs for idx in pair}
    pieces = w.pieces
    redundant = [k for k in range(pieces)
                 if k not in active_facets and (k + pieces) not in active_facets]
    return PolytopeUnitBall(facets=signed, vertices=vertices,
                            active_pairs=pairs, redundant_pieces=redundant)


def verify_polyhedral_2d(w: PolyhedralForm, mset: MatrixSet,
                         strict_tol: float = 1e-7) -> VerificationReport:
    """Exact planar check of l.Mx <= 0 over the whole subdifferential map.

    Checks both active signed covectors at every ball vertex and the facet
    midpoints (smooth points), every mode. Strict iff every value is below
    -strict_tol * W(x).
    """
    if mset.dimension != 2:
        raise ContractViolationError("verify_polyhedral_2d expects a planar set")
    ball = unit_ball_2d(w)
    checks: list[tuple[np.ndarray, np.ndarray]] = []
    for v, (ia, ib) in zip(ball.vertices, ball.active_pairs):
        checks.append((v, ball.facets[ia]))
        checks.append((v, ball.facets[ib]))
    count = len(ball.vertices)
    for i in range(count):
        shared = set(ball.active_pairs[i]) & set(ball.active_pairs[(i + 1) % count])
        if not shared:
            continue
        mid = 0.5 * (ball.vertices[i] + ball.vertices[(i + 1) % count])
        checks.append((mid, ball.facets[shared.pop()]))

    margin = np.inf
    margin_euclid = np.inf
    witness = None
    for mode_index, m in enumerate(mset.matrices()):
        for x, l in checks:
            wx = w.value(x)
            rate = float(l @ (m @ x))
            ratio = -rate / wx
            if ratio < margin:
                margin = ratio
                witness = (x, mode_index, l)
            margin_euclid = min(margin_euclid, -rate / np.linalg.norm(x))

    if margin >= strict_tol:
        verdict = "strict"
    elif margin <= -strict_tol:
        verdict = "violated"
    else:
        verdict = "nonstrict"
    x, mode_index, l = witness
    return VerificationReport(verdict=verdict, margin=float(margin),
                              margin_euclidean=float(margin_euclid),
                              witness_x=x, witness_mode=mode_index, witness_l=l,
                              method="exact-2d-vertices", evidence_only=False,
                              samples=len(checks))


def _covectors_at(f, x, tie_tol: float):
    """Active subgradient endpoints of a candidate at x, plus its value."""
    if isinstance(f, PolyhedralForm):
        return f.active_covectors(x, tie_tol), f.value(x)
    if isinstance(f, SampledNorm):
        return f.active_covectors(x, tie_tol), f.value(x)
    if isinstance(f, (EvenPowerSum, PolynomialForm)):
        return np.asarray(f.gradient(x))[None, :], f.value(x)
    if isinstance(f, PowerForm):
        covs, base_value = _covectors_at(f.base, x, tie_tol)
        if base_value <= 0.0:
            raise ContractViolationError("power form needs positive base value")
        q = f.exponent
        return q * base_value ** (q - 1.0) * covs, base_value ** q
    raise ContractViolationError(f"cannot verify candidate of type {type(f)!r}")


def verify_sampled(f, mset: MatrixSet, samples: int,
                   strict_tol: float = 1e-7,
                   tie_tol: float = 1e-8) -> VerificationReport:
    """Gradient/active-subgradient test on sphere samples: evidence, not proof."""
    points = sphere_sequence(mset.dimension, samples)
    margin = np.inf
    margin_euclid = np.inf
    witness = None
    skipped = 0
    mats = mset.matrices()
    for x in points:
        try:
            covs, value = _covectors_at(f, x, tie_tol)
        except ContractViolationError:
            skipped += 1
            continue
        if not np.isfinite(value) or value <= 1e-300:
            skipped += 1
            continue
        for mode_index, m in enumerate(mats):
            mx = m @ x
            for l in covs:
                rate = float(l @ mx)
                ratio = -rate / value
                if ratio < margin:
                    margin = ratio
                    witness = (x, mode_index, l)
                margin_euclid = min(margin_euclid, -rate)  # ||x|| = 1
    if witness is None:
        raise ContractViolationError("every sample was skipped; nothing verified")
    if margin >= strict_tol:
        verdict = "strict"
    elif margin <= -strict_tol:
        verdict = "violated"
    else:
        verdict = "nonstrict"
    x, mode_index, l = witness
    return VerificationReport(verdict=verdict, margin=float(margin),
                              margin_euclidean=float(margin_euclid),
                              witness_x=x, witness_mode=mode_index, witness_l=l,
                              method="sampled-sphere", evidence_only=True,
                              samples=samples, skipped=skipped)


def check_monotone_along(f, traj: Trajectory, tol: float = 1e-9) -> MonotoneReport:
    """Scan a candidate along a sampled trajectory for monotone decrease."""
    values = f.value_many(traj.states)
    for k in range(len(values) - 1):
        if values[k + 1] > values[k] + tol * abs(values[k]):
            return MonotoneReport(monotone=False, violation_index=k + 1,
                                  violation_point=traj.states[k + 1],
                                  total_decrease=float(values[0] - values[-1]))
    return MonotoneReport(monotone=True, violation_index=None,
                          violation_point=None,
                          total_decrease=float(values[0] - values[-1]))


def stabilizing_shift(v, mset2: MatrixSet, margin: float,
                      samples: int = 512) -> float:
    """Smallest sampled shift making {M - nu*Id} compatible with V, plus margin.

    nu* = max over x on V^{-1}(1), subgradients l, modes M of l.Mx + margin;
    uses l.x = V(x) = 1 on the level set, so the shifted set satisfies the
    nonstrict inequality on the same samples with slack >= margin.
    """
    n = mset2.dimension
    points = sphere_sequence(n, samples)
    worst = -np.inf
    mats = mset2.matrices()
    for x in points:
        value = v.value(x)
        if value <= 0.0:
            raise ContractViolationError("candidate is not positive definite")
        scaled = x / value
        covs, _ = _covectors_at(v, scaled, 1e-8)
        for m in mats:
            mx = m @ scaled
            for l in covs:
                worst = max(worst, float(l @ mx))
    return worst + margin
