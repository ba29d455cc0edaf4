"""Dense phase-1 simplex for pure feasibility of {x : A x <= b}, x free.

Free variables are split x = u - w; rows with negative right-hand side are
negated and receive an artificial variable; the objective is the artificial
sum. Entering variable: Bland's lowest eligible index. Leaving variable:
two-pass ratio test taking the largest pivot among near-tied rows (exact
ties broken by lowest basic index) -- tiny pivots amplify roundoff a
billionfold on the near-Vandermonde rows this solver exists for. Every run
is deterministic.

Verdicts are certified independently of the pivot path: "feasible" must
produce a witness satisfying every original row, "infeasible" a valid
Farkas certificate (y >= 0, y^T A = 0, y^T b < 0) assembled from the
optimal duals. A run whose certificate fails validation is retried
deterministically along an escalation ladder: coarser zero tolerances in
float64 first, then 80-bit extended precision (high-degree monomial rows
against 1e6 coefficient boxes exceed what double-precision tableaus can
represent). Persistent failure raises instead of misreporting. The tableau
is refactorized from original data periodically and before accepting
optimality, with checkpoint rollback when a refactorization exposes drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

COST_EPS = 1e-9
FEASIBLE_RESIDUAL = 1e-9
REFACTOR_EVERY = 25
# (zero tolerance, dtype) escalation ladder.
LADDER = (
    (1e-9, np.float64),
    (3e-8, np.float64),
    (1e-6, np.float64),
    (1e-9, np.longdouble),
    (3e-7, np.longdouble),
)


class SimplexNumericalError(RuntimeError):
    """Every escalation rung failed certificate validation."""


@dataclass
class Phase1Result:
    status: str  # "feasible" | "infeasible" | "budget-exceeded"
    x: np.ndarray | None
    residual: float
    pivots: int
    farkas: np.ndarray | None = None


class _NeedsEscalation(Exception):
    pass


def _linear_solve(a_mat: np.ndarray, stack: np.ndarray) -> np.ndarray:
    """solve(a_mat, stack) in the dtype of the inputs.

    float64 goes through LAPACK; extended precision uses Gauss-Jordan with
    partial pivoting (LAPACK cannot do long doubles).
    """
    if a_mat.dtype == np.float64:
        return np.linalg.solve(a_mat, stack)
    m = a_mat.shape[0]
    aug = np.concatenate([a_mat, stack], axis=1).copy()
    for col in range(m):
        piv = int(np.argmax(np.abs(aug[col:, col]))) + col
        if aug[piv, col] == 0:
            raise np.linalg.LinAlgError("singular basis")
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        aug[col] = aug[col] / aug[col, col]
        factors = aug[:, col].copy()
        factors[col] = 0
        aug -= np.outer(factors, aug[col])
    return aug[:, m:]


def _refactor(std: np.ndarray, rhs: np.ndarray, basis: np.ndarray) -> np.ndarray:
    b_mat = std[:, basis]
    try:
        fresh = _linear_solve(b_mat, np.column_stack([std, rhs]))
    except np.linalg.LinAlgError as exc:
        raise _NeedsEscalation() from exc
    if not np.all(np.isfinite(fresh)):
        raise _NeedsEscalation()
    right = fresh[:, -1]
    scale = 1.0 + float(np.abs(rhs).max())
    recon = float(np.abs(b_mat @ right - rhs).max())
    if recon > 1e-7 * scale or float(right.min()) < -1e-6 * scale:
        # The pivot path drifted from primal feasibility; roll back.
        raise _NeedsEscalation()
    # Small negative basics are epsilon-tie overshoot; clamp rather than panic.
    fresh[:, -1] = np.maximum(right, 0)
    return fresh


class _Phase1Run:
    """One deterministic phase-1 run at fixed zero tolerance and dtype."""

    def __init__(self, std: np.ndarray, rhs: np.ndarray, n_art: int, k: int,
                 zero_tol: float, dtype):
        self.std = std.astype(dtype)
        self.rhs = rhs.astype(dtype)
        self.k = k
        self.zero_tol = zero_tol
        m, n_cols = std.shape
        self.m, self.n_cols = m, n_cols
        self.basis = np.array([2 * k + i for i in range(m)])
        art_rows = np.where(std[:, 2 * k + m:].any(axis=1))[0]
        self.basis[art_rows] = 2 * k + m + np.arange(n_art)
        self.is_art = np.zeros(n_cols, dtype=bool)
        self.is_art[2 * k + m:] = True
        self.tableau = np.column_stack([self.std, self.rhs])
        self.pivots = 0
        self.refactor_every = REFACTOR_EVERY

    def reduced_costs(self) -> np.ndarray:
        art_basic = self.is_art[self.basis]
        r = self.is_art[:self.n_cols].astype(self.std.dtype)
        if art_basic.any():
            r -= self.tableau[art_basic, :self.n_cols].sum(axis=0)
        return r

    def _checkpoint(self):
        self._saved = (self.tableau.copy(), self.basis.copy(), self.std.copy())

    def _rollback(self):
        self.tableau, self.basis, self.std = self._saved
        self._checkpoint()

    def _safe_refactor(self) -> bool:
        try:
            self.tableau = _refactor(self.std, self.rhs, self.basis)
        except _NeedsEscalation:
            if self.refactor_every <= 1:
                raise
            self.refactor_every = max(1, self.refactor_every // 5)
            self._rollback()
            return False
        self._checkpoint()
        return True

    def solve(self, pivot_budget: int) -> str:
        self._checkpoint()
        since_refactor = 0
        while True:
            candidates = np.where(self.reduced_costs() < -COST_EPS)[0]
            if candidates.size == 0:
                if not self._safe_refactor():
                    since_refactor = 0
                    continue
                since_refactor = 0
                candidates = np.where(self.reduced_costs() < -COST_EPS)[0]
                if candidates.size == 0:
                    return "optimal"
            enter = int(candidates[0])  # Bland: lowest index

            col = self.tableau[:, enter]
            rows = np.where(col > self.zero_tol)[0]
            if rows.size == 0:
                # Bounded-below objective: an "unbounded" improving column is
                # numerical noise; remove it from the problem.
                self.std[:, enter] = 0
                self.tableau[:, enter] = 0
                continue
            ratios = self.tableau[rows, -1] / col[rows]
            best = ratios.min()
            tie = max(self.zero_tol, 1e-7) * (1.0 + abs(float(best)))
            tied = rows[np.where(ratios <= best + tie)[0]]
            biggest = col[tied].max()
            sharp = tied[col[tied] >= biggest * (1.0 - 1e-12)]
            leave = int(sharp[np.argmin(self.basis[sharp])])

            if self.pivots >= pivot_budget:
                return "budget-exceeded"
            pivot = self.tableau[leave, enter]
            self.tableau[leave, :] /= pivot
            other = np.arange(self.m) != leave
            self.tableau[other, :] -= np.outer(self.tableau[other, enter],
                                               self.tableau[leave, :])
            self.basis[leave] = enter
            self.pivots += 1
            since_refactor += 1
            if since_refactor >= self.refactor_every:
                self._safe_refactor()
                since_refactor = 0

    def residual(self) -> float:
        art_basic = self.is_art[self.basis]
        if not art_basic.any():
            return 0.0
        return float(self.tableau[art_basic, -1].sum())

    def witness_scaled(self) -> np.ndarray:
        values = np.zeros(self.n_cols, dtype=self.std.dtype)
        values[self.basis] = self.tableau[:, -1]
        return np.asarray(values[:self.k] - values[self.k:2 * self.k],
                          dtype=np.float64)

    def duals(self) -> np.ndarray:
        """y = c_B B^{-1} from a fresh factorization of the final basis."""
        b_mat = self.std[:, self.basis]
        c_b = self.is_art[self.basis].astype(self.std.dtype)
        try:
            y = _linear_solve(b_mat.T, c_b[:, None])[:, 0]
        except np.linalg.LinAlgError as exc:
            raise _NeedsEscalation() from exc
        return np.asarray(y, dtype=np.float64)


def solve_phase1(a: np.ndarray, b: np.ndarray,
                 pivot_budget: int = 200_000) -> Phase1Result:
    """Decide feasibility of A x <= b for free x, with certified verdicts."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, k = a.shape

    row_scale = np.abs(a).max(axis=1)
    row_scale[row_scale == 0.0] = 1.0
    a_eq = a / row_scale[:, None]
    b_eq = b / row_scale
    col_scale = np.abs(a_eq).max(axis=0)
    col_scale[col_scale == 0.0] = 1.0
    a_eq = a_eq / col_scale[None, :]

    signs = np.where(b_eq < 0.0, -1.0, 1.0)
    art_rows = np.where(b_eq < 0.0)[0]
    n_art = len(art_rows)
    n_cols = 2 * k + m + n_art

    std = np.zeros((m, n_cols))
    std[:, :k] = a_eq
    std[:, k:2 * k] = -a_eq
    std[:, 2 * k:2 * k + m] = np.eye(m)
    rhs = b_eq.copy()
    std *= signs[:, None]
    rhs *= signs
    for pos, row in enumerate(art_rows):
        std[row, 2 * k + m + pos] = 1.0

    b_norm = 1.0 + np.abs(b).max()
    total_pivots = 0
    for zero_tol, dtype in LADDER:
        run = _Phase1Run(std, rhs, n_art, k, zero_tol, dtype)
        try:
            outcome = run.solve(pivot_budget - total_pivots)
        except _NeedsEscalation:
            total_pivots += run.pivots
            continue
        total_pivots += run.pivots
        if outcome == "budget-exceeded":
            return Phase1Result(status="budget-exceeded", x=None,
                                residual=float("nan"), pivots=total_pivots)
        residual = run.residual()
        if residual <= FEASIBLE_RESIDUAL:
            x = run.witness_scaled() / col_scale
            if float((b - a @ x).min()) < -1e-7 * b_norm:
                continue  # witness failed validation: escalate
            return Phase1Result(status="feasible", x=x, residual=residual,
                                pivots=total_pivots)
        # Infeasible claim: certify with a Farkas vector on the original rows.
        try:
            y = run.duals()
        except _NeedsEscalation:
            continue
        farkas = -signs * y / row_scale
        if farkas.min() < -1e-6 * max(1.0, np.abs(farkas).max()):
            continue
        farkas = np.maximum(farkas, 0.0)
        combo = farkas @ a
        gain = float(farkas @ b)
        scale = np.abs(farkas[:, None] * a).sum(axis=0).max() + 1e-300
        if np.abs(combo).max() > 1e-7 * scale or gain >= -1e-12 * scale:
            continue  # not a valid certificate: escalate
        return Phase1Result(status="infeasible", x=None, residual=residual,
                            pivots=total_pivots, farkas=farkas)
    raise SimplexNumericalError(
        "phase-1 simplex failed certificate validation at every escalation "
        "rung; refusing to report a verdict")
