"""Empirical complexity blow-up of bounded certificate families.

A homogeneous even-degree polynomial is a sampled Lyapunov certificate when
it is >= 1 at sphere samples and its gradient rate along every mode is
<= -delta there; both conditions are linear in the coefficients, so
existence is an LP decided by the embedded phase-1 simplex. Sampled
infeasibility is evidence relative to (samples, delta, B) -- the constraints
are necessary conditions -- and every report carries those parameters.
Feasible witnesses are certified by an independent row re-check plus sampled
gradient verification at four times the LP's sample count.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import MatrixSet, simulate
from .critical import CriticalPair, epsilon_family, periodic_law
from .errors import ContractViolationError, SwlyapError
from .norms import SampledNorm, canonical_norm, strictify_via_shift
from .polynomials import PolynomialForm, gradient_rows, monomial_basis, monomial_matrix
from .sampling import sphere_sequence
from .simplex import solve_phase1
from .synth import synthesize_polyhedral
from .verify import verify_polyhedral_2d, verify_sampled

INFEASIBLE_MIN_RESIDUAL = 1e-7
WITNESS_SLACK = 1e-9


@dataclass
class FeasibilityLP:
    """Dense inequality system rows * c <= rhs with provenance metadata."""

    rows: np.ndarray
    rhs: np.ndarray
    kinds: list[str]   # per-row: "positivity" | "decrease" | "box"
    n: int
    degree: int
    samples: int
    delta: float
    bound: float
    exponents: np.ndarray

    @property
    def row_count(self) -> int:
        return self.rows.shape[0]


@dataclass
class FeasibilityOutcome:
    status: str  # "feasible" | "infeasible" | "budget-exceeded"
    candidate: PolynomialForm | None
    residual: float
    pivots: int


@dataclass
class ScanRow:
    epsilon: float
    minimum: int | None        # d_min or N_min; None means "none within budget"
    status: str
    samples: int
    delta: float
    bound: float
    runtime: float
    margin: float | None = None
    witness: PolynomialForm | None = None
    cross_checked: bool = False

    def csv_row(self) -> str:
        mini = self.minimum if self.minimum is not None else "inf"
        margin = f"{self.margin!r}" if self.margin is not None else ""
        return (f"{self.epsilon!r},{mini},{self.status},{self.samples},"
                f"{self.delta!r},{self.bound!r},{self.runtime:.3f},{margin}")


def build_feasibility_lp(mset: MatrixSet, degree: int, samples: int,
                         delta: float, bound: float,
                         positivity_threshold: float = 1.0) -> FeasibilityLP:
    """Assemble positivity, gradient-decrease, and coefficient-box rows.

    Row count is samples * (1 + mode count) + 2 * basis size.
    """
    if degree % 2 != 0 or degree < 2:
        raise ContractViolationError(f"degree must be even >= 2, got {degree}")
    if delta < 0.0 or bound <= 0.0:
        raise ContractViolationError("need delta >= 0 and bound > 0")
    n = mset.dimension
    exponents = np.array(monomial_basis(n, degree), dtype=int)
    k = exponents.shape[0]
    points = sphere_sequence(n, samples)

    blocks = []
    rhs = []
    kinds = []
    design = monomial_matrix(exponents, points)
    blocks.append(-design)
    rhs.append(-positivity_threshold * np.ones(samples))
    kinds.extend(["positivity"] * samples)
    for m in mset.matrices():
        rates = gradient_rows(exponents, points, points @ m.T)
        blocks.append(rates)
        rhs.append(-delta * np.ones(samples))
        kinds.extend(["decrease"] * samples)
    eye = np.eye(k)
    blocks.append(eye)
    rhs.append(bound * np.ones(k))
    kinds.extend(["box"] * k)
    blocks.append(-eye)
    rhs.append(bound * np.ones(k))
    kinds.extend(["box"] * k)

    return FeasibilityLP(rows=np.vstack(blocks), rhs=np.concatenate(rhs),
                         kinds=kinds, n=n, degree=degree, samples=samples,
                         delta=delta, bound=bound, exponents=exponents)


def recheck_witness(lp: FeasibilityLP, coefficients: np.ndarray) -> float:
    """Worst signed slack of the witness over all rows (>= -1e-9 required)."""
    return float((lp.rhs - lp.rows @ coefficients).min())


def solve_lp(lp: FeasibilityLP, pivot_budget: int = 200_000) -> FeasibilityOutcome:
    """Phase-1 simplex; feasible witnesses are re-checked row by row."""
    result = solve_phase1(lp.rows, lp.rhs, pivot_budget)
    if result.status == "feasible":
        slack = recheck_witness(lp, result.x)
        if slack < -WITNESS_SLACK:
            raise SwlyapError(
                f"solver returned a witness violating rows by {slack}; "
                "refusing to report feasible")
        cand = PolynomialForm(n=lp.n, degree=lp.degree, coefficients=result.x,
                              exponents=lp.exponents)
        return FeasibilityOutcome(status="feasible", candidate=cand,
                                  residual=result.residual, pivots=result.pivots)
    return FeasibilityOutcome(status=result.status, candidate=None,
                              residual=result.residual, pivots=result.pivots)


def _min_degree_cell(mset: MatrixSet, d_max: int, samples: int, delta: float,
                     bound: float, pivot_budget: int):
    """Smallest half-degree with a feasible LP, plus bookkeeping."""
    for d in range(1, d_max + 1):
        lp = build_feasibility_lp(mset, 2 * d, samples, delta, bound)
        outcome = solve_lp(lp, pivot_budget)
        if outcome.status == "feasible":
            return d, outcome
        if outcome.status == "budget-exceeded":
            return None, outcome
    return None, outcome


def min_degree_scan(pair: CriticalPair, epsilons: list[float], d_max: int,
                    delta: float = 1e-3, bound: float = 1e6,
                    samples: int = 128, pivot_budget: int = 200_000,
                    max_workers: int = 1) -> list[ScanRow]:
    """d_min(eps) table; monotone violations are re-run at doubled samples.

    The epsilon list must be sorted decreasing. Feasible cells are
    cross-validated with sampled gradient verification at 4x the LP count.
    """
    if sorted(epsilons, reverse=True) != list(epsilons):
        raise ContractViolationError("epsilon list must be sorted decreasing")

    def run_cell(eps: float, cell_samples: int) -> ScanRow:
        mset = epsilon_family(pair, eps)
        start = time.perf_counter()
        d_min, outcome = _min_degree_cell(mset, d_max, cell_samples, delta,
                                          bound, pivot_budget)
        elapsed = time.perf_counter() - start
        row = ScanRow(epsilon=eps, minimum=d_min, status=outcome.status,
                      samples=cell_samples, delta=delta, bound=bound,
                      runtime=elapsed, witness=outcome.candidate)
        if d_min is not None:
            report = verify_sampled(outcome.candidate, mset, 4 * cell_samples,
                                    strict_tol=0.0)
            row.cross_checked = report.margin > 0.0
            row.margin = report.margin
        return row

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(lambda eps: run_cell(eps, samples), epsilons))
    else:
        rows = [run_cell(eps, samples) for eps in epsilons]

    # Expected trend: d_min nondecreasing as eps decreases. Re-run any
    # adjacent violation at doubled samples before reporting.
    def key(row: ScanRow) -> float:
        return float("inf") if row.minimum is None else row.minimum

    for i in range(1, len(rows)):
        if key(rows[i]) < key(rows[i - 1]):
            rows[i - 1] = run_cell(rows[i - 1].epsilon, 2 * samples)
            rows[i] = run_cell(rows[i].epsilon, 2 * samples)
    return rows


def refinement_check(mset: MatrixSet, degree: int, samples: int, delta: float,
                     bound: float, pivot_budget: int = 200_000) -> bool:
    """Infeasibility soundness probe: must survive sample doubling."""
    first = solve_lp(build_feasibility_lp(mset, degree, samples, delta, bound),
                     pivot_budget)
    if first.status != "infeasible":
        return True
    second = solve_lp(
        build_feasibility_lp(mset, degree, 2 * samples, delta, bound),
        pivot_budget)
    if second.status == "feasible":
        raise SwlyapError(
            f"infeasible at {samples} samples flipped feasible at {2 * samples}: "
            f"degree={degree} delta={delta} bound={bound}; sampled infeasibility "
            "must be monotone in constraints")
    return True


def min_pieces_scan(pair: CriticalPair, epsilons: list[float], n_max: int,
                    dwell_divisor: int = 64, horizon_periods: float = 20.0,
                    strict_tol: float = 1e-7, budget: int = 20_000,
                    max_workers: int = 1) -> list[ScanRow]:
    """Smallest polyhedral piece count passing exact strict verification.

    For eps > 0 the candidate source is the shift-strictified norm with
    eta = eps/2; at eps = 0 it is the plain canonical norm (no strictness
    margin exists to spend). The search assumes the pass predicate is
    monotone in the piece count: doubling ladder, then binary refinement.
    """
    if sorted(epsilons, reverse=True) != list(epsilons):
        raise ContractViolationError("epsilon list must be sorted decreasing")
    dwell = pair.t1 / dwell_divisor
    horizon = horizon_periods * pair.period

    def run_cell(eps: float) -> ScanRow:
        start = time.perf_counter()
        mset = epsilon_family(pair, eps)
        if eps > 0.0:
            vhat = strictify_via_shift(mset, eta=eps / 2.0, dwell=dwell,
                                       horizon=horizon, budget=budget)
        else:
            vhat = canonical_norm(mset, None, dwell=dwell, horizon=horizon,
                                  budget=budget)
        full = synthesize_polyhedral(vhat, n_max)

        def passes(count: int):
            from .synth import PolyhedralForm
            w = PolyhedralForm(vectors=full.vectors[:count])
            report = verify_polyhedral_2d(w, mset, strict_tol=strict_tol)
            return report.verdict == "strict", report.margin

        ladder = 4
        first_pass = None
        last_fail = 1
        margin = None
        while ladder <= n_max:
            ok, margin = passes(ladder)
            if ok:
                first_pass = ladder
                break
            last_fail = ladder
            ladder *= 2
        if first_pass is None:
            if ladder // 2 < n_max:
                ok, margin = passes(n_max)
                if ok:
                    first_pass, last_fail = n_max, ladder // 2
            if first_pass is None:
                return ScanRow(epsilon=eps, minimum=None, status="exhausted",
                               samples=n_max, delta=strict_tol, bound=budget,
                               runtime=time.perf_counter() - start, margin=margin)
        lo, hi = last_fail, first_pass
        while hi - lo > 1:
            mid = (lo + hi) // 2
            ok, _ = passes(mid)
            if ok:
                hi = mid
            else:
                lo = mid
        _, margin = passes(hi)
        return ScanRow(epsilon=eps, minimum=hi, status="strict",
                       samples=n_max, delta=strict_tol, bound=budget,
                       runtime=time.perf_counter() - start, margin=margin)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(run_cell, epsilons))
    return [run_cell(eps) for eps in epsilons]


def constancy_probe(candidate: PolynomialForm, pair: CriticalPair,
                    tol: float) -> float:
    """Max relative variation of the candidate along the periodic orbit.

    Near-feasible nonstrict candidates must be near-constant there: the
    orbit closes, so any decrease within tolerance forces near-constancy.
    """
    mset = epsilon_family(pair, 0.0)
    law = periodic_law(pair)
    traj = simulate(law, mset, pair.x0, step=pair.t1 / 64.0,
                    horizon=2.0 * pair.period)
    values = candidate.value_many(traj.states)
    ref = values[0]
    return float(np.abs(values - ref).max() / max(1.0, abs(ref)))
