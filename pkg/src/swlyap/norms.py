"""Canonical convex degree-one common Lyapunov function as a finite max norm.

The construction samples the transition semigroup on a dwell-time grid:
breadth-first products of segment exponentials, grown at the *early* end of
the time interval (G -> G e^{hM}), pruned whenever a product's image of every
probe direction is dominated by the running maximum. Growing at the early end
makes pruning sound: if ||Gx|| <= max_j ||G_j x|| for all x, the same holds
after right-multiplying every product by the same extension.

Strictness is obtained by the shift trick: the canonical norm of the inflated
set {M + eta*Id} decays at rate >= eta along every trajectory of {M}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import MatrixSet, StabilityCertificate, matrix_exponential, shift_set, spectral_norm
from .errors import (
    BudgetExceededError,
    ContractViolationError,
    UndefinedSubgradientError,
)
from .sampling import probe_directions


@dataclass
class GeneratorSet:
    """Finite product sample of the transition semigroup."""

    generators: np.ndarray  # (count, n, n); identity first
    horizon: float
    dwell: float
    prune_slack: float
    usable: bool = True
    refinement_gap: float = 0.0  # measured sup-sphere growth at the last level

    @property
    def count(self) -> int:
        return self.generators.shape[0]

    @property
    def dimension(self) -> int:
        return self.generators.shape[1]


@dataclass
class Subgradient:
    """Support covector of the sampled norm at a base point."""

    x: np.ndarray
    l: np.ndarray
    generator_index: int


@dataclass
class SampledNorm:
    """Max over generators of the Euclidean image norm; convex, degree one."""

    generator_set: GeneratorSet
    delta_approx: float

    @property
    def dimension(self) -> int:
        return self.generator_set.dimension

    def value(self, x) -> float:
        return float(self.value_many(np.asarray(x, dtype=float)[None, :])[0])

    def value_many(self, points: np.ndarray, chunk: int = 512) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        gens = self.generator_set.generators
        out = np.empty(points.shape[0])
        for start in range(0, points.shape[0], chunk):
            block = points[start:start + chunk]
            images = gens @ block.T  # (count, n, chunk)
            norms = np.sqrt((images * images).sum(axis=1))  # (count, chunk)
            out[start:start + chunk] = norms.max(axis=0)
        return out

    def subgradient(self, x) -> Subgradient:
        x = np.asarray(x, dtype=float)
        if np.linalg.norm(x) == 0.0:
            raise UndefinedSubgradientError("subgradient base point must be nonzero")
        gens = self.generator_set.generators
        images = gens @ x  # (count, n)
        norms = np.linalg.norm(images, axis=1)
        best = int(np.argmax(norms))  # argmax returns the lowest tied index
        g = gens[best]
        l = g.T @ images[best] / norms[best]
        return Subgradient(x=x, l=l, generator_index=best)

    def active_covectors(self, x, tie_tol: float = 1e-8) -> np.ndarray:
        """All generator covectors within relative tie_tol of the max."""
        x = np.asarray(x, dtype=float)
        gens = self.generator_set.generators
        images = gens @ x
        norms = np.linalg.norm(images, axis=1)
        top = norms.max()
        if top == 0.0:
            raise UndefinedSubgradientError("subgradient base point must be nonzero")
        active = np.where(norms >= top * (1.0 - tie_tol))[0]
        return np.stack([gens[i].T @ images[i] / norms[i] for i in active])

    def to_json(self) -> dict:
        return {
            "generators": [g.reshape(-1).tolist()
                           for g in self.generator_set.generators],
            "delta_approx": self.delta_approx,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SampledNorm":
        flats = doc["generators"]
        n = int(round(np.sqrt(len(flats[0]))))
        gens = np.array([np.array(flat, dtype=float).reshape(n, n)
                         for flat in flats])
        gset = GeneratorSet(generators=gens, horizon=0.0, dwell=0.0,
                            prune_slack=0.0)
        return cls(generator_set=gset, delta_approx=float(doc["delta_approx"]))


def eval_norm(v: SampledNorm, x) -> float:
    return v.value(x)


def subgradient_at(v: SampledNorm, x) -> Subgradient:
    return v.subgradient(x)


def build_generator_set(mset: MatrixSet, cert: StabilityCertificate | None,
                        dwell: float, horizon: float, *,
                        budget: int = 20_000,
                        probe_count: int = 256,
                        prune_slack: float = 1e-9) -> GeneratorSet:
    """Breadth-first dwell-grid products with probe-domination pruning.

    A candidate is kept exactly when it beats the kept set's running maximum
    on at least one probe direction by more than the slack; the identity is
    always kept. Exceeding the generator budget raises, carrying the partial
    set flagged unusable.
    """
    if dwell <= 0.0:
        raise ContractViolationError(f"dwell must be > 0, got {dwell}")
    if horizon < dwell:
        raise ContractViolationError(
            f"horizon {horizon} shorter than one dwell step {dwell}")
    n = mset.dimension
    probes = probe_directions(n, probe_count).T  # (n, probes)
    steps = [matrix_exponential(m, dwell) for m in mset.matrices()]
    levels = int(round(horizon / dwell))

    identity = np.eye(n)
    kept = [identity]
    run_max = np.linalg.norm(probes, axis=0)  # ones
    frontier = [identity]
    gap = 0.0

    for _ in range(levels):
        if not frontier:
            gap = 0.0
            break
        stacked = np.array([g @ e for g in frontier for e in steps])
        images = stacked @ probes  # (cands, n, probes)
        values = np.sqrt((images * images).sum(axis=1))  # (cands, probes)
        before = run_max.copy()
        new_frontier = []
        for cand, vals in zip(stacked, values):
            threshold = before if not new_frontier else run_max
            if np.any(vals > threshold + prune_slack * (1.0 + threshold)):
                kept.append(cand)
                new_frontier.append(cand)
                np.maximum(run_max, vals, out=run_max)
        frontier = new_frontier
        gap = float((run_max - before).max()) if frontier else 0.0
        if len(kept) > budget:
            partial = GeneratorSet(generators=np.array(kept), horizon=horizon,
                                   dwell=dwell, prune_slack=prune_slack,
                                   usable=False, refinement_gap=gap)
            raise BudgetExceededError(
                f"generator budget {budget} exceeded at horizon {horizon}",
                partial=partial)
    return GeneratorSet(generators=np.array(kept), horizon=horizon, dwell=dwell,
                        prune_slack=prune_slack, refinement_gap=gap)


def error_estimate(cert: StabilityCertificate, dwell: float, horizon: float,
                   mode_bound: float = 0.0) -> float:
    """Approximation-error bound: horizon tail plus dwell-grid modulus.

    The tail C e^{-gamma T} bounds everything the truncated semigroup sample
    misses beyond the horizon; the grid term C (e^{L h} - 1) is a first-order
    modulus for laws switching between grid points (L = mode norm bound).
    """
    if cert.kind != "exponential":
        raise ContractViolationError("error estimate needs an exponential certificate")
    tail = cert.C * np.exp(-cert.gamma * horizon)
    grid = cert.C * np.expm1(mode_bound * dwell)
    return float(tail + grid)


def canonical_norm(mset: MatrixSet, cert: StabilityCertificate | None,
                   dwell: float, horizon: float, *,
                   budget: int = 20_000,
                   probe_count: int = 256,
                   prune_slack: float = 1e-9) -> SampledNorm:
    """Sampled sup-norm V(x) = max_G ||G x|| over the dwell-grid products.

    With an exponential certificate the error bound is analytic; otherwise it
    falls back to the measured last-level refinement gap (the build must then
    be deep enough for that gap to have saturated).
    """
    gset = build_generator_set(mset, cert, dwell, horizon, budget=budget,
                               probe_count=probe_count, prune_slack=prune_slack)
    if cert is not None and cert.kind == "exponential":
        delta = error_estimate(cert, dwell, horizon, mode_bound=mset.max_norm())
    else:
        mode_bound = mset.max_norm()
        c_emp = max(spectral_norm(g) for g in gset.generators)
        delta = gset.refinement_gap + c_emp * float(np.expm1(mode_bound * dwell))
    return SampledNorm(generator_set=gset, delta_approx=delta)


def strictify_via_shift(mset: MatrixSet, eta: float, dwell: float,
                        horizon: float, cert: StabilityCertificate | None = None,
                        **build_kwargs) -> SampledNorm:
    """Strict common Lyapunov function via the eta-inflation trick.

    The canonical norm of {M + eta*Id} is a nonstrict Lyapunov function of the
    inflated set, hence decays at rate >= eta along every trajectory of {M}.
    The caller asserts that {M} is exponentially stable with rate > eta.
    """
    if eta <= 0.0:
        raise ContractViolationError(f"eta must be > 0, got {eta}")
    inflated = shift_set(mset, -eta)
    inflated_cert = None
    if cert is not None and cert.kind == "exponential" and cert.gamma > eta:
        inflated_cert = StabilityCertificate(kind="exponential", C=cert.C,
                                             gamma=cert.gamma - eta)
    return canonical_norm(inflated, inflated_cert, dwell, horizon, **build_kwargs)
