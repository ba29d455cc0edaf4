"""Homogeneous polynomial machinery: multi-index bases and dense candidates.

Multi-indices are plain int tuples. The basis order is graded lexicographic
with the leading exponent decreasing, e.g. for n=2, degree 2:
(2,0), (1,1), (0,2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceededError, ContractViolationError


def monomial_basis(n: int, degree: int) -> list[tuple[int, ...]]:
    """All multi-indices with ``sum(e) == degree``, count C(n+degree-1, degree)."""
    if n < 1:
        raise ContractViolationError(f"need n >= 1, got {n}")
    if degree < 0:
        raise ContractViolationError(f"need degree >= 0, got {degree}")
    if n == 1:
        return [(degree,)]
    out: list[tuple[int, ...]] = []
    for head in range(degree, -1, -1):
        for tail in monomial_basis(n - 1, degree - head):
            out.append((head,) + tail)
    return out


def basis_size(n: int, degree: int) -> int:
    return math.comb(n + degree - 1, degree)


def multinomial(degree: int, exponents: tuple[int, ...]) -> int:
    coeff = math.factorial(degree)
    for e in exponents:
        coeff //= math.factorial(e)
    return coeff


def monomial_matrix(exponents: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Design matrix: entry (s, j) = points[s] ** exponents[j], product over coords."""
    points = np.atleast_2d(points)
    # (samples, terms, n) powers -> product over last axis
    powers = points[:, None, :] ** exponents[None, :, :]
    return powers.prod(axis=2)


def gradient_rows(exponents: np.ndarray, points: np.ndarray,
                  directions: np.ndarray) -> np.ndarray:
    """Rows of the linear map  c -> grad(p_c)(x) . v  for paired (x, v).

    ``points`` and ``directions`` are (samples, n); entry (s, j) is
    sum_i e_{j,i} * x_s^{e_j - delta_i} * v_{s,i}, exact monomial calculus.
    """
    points = np.atleast_2d(points)
    directions = np.atleast_2d(directions)
    samples, n = points.shape
    terms = exponents.shape[0]
    rows = np.zeros((samples, terms))
    for i in range(n):
        e_i = exponents[:, i]
        active = e_i > 0
        if not active.any():
            continue
        reduced = exponents[active].copy()
        reduced[:, i] -= 1
        partial = monomial_matrix(reduced, points)  # (samples, active terms)
        rows[:, active] += partial * e_i[active][None, :] * directions[:, i:i + 1]
    return rows


@dataclass
class PolynomialForm:
    """Dense homogeneous polynomial of even degree, coefficients on a fixed basis."""

    n: int
    degree: int
    coefficients: np.ndarray
    exponents: np.ndarray = field(default=None)  # (terms, n) int array

    def __post_init__(self):
        if self.degree % 2 != 0 or self.degree < 2:
            raise ContractViolationError(
                f"homogeneous candidate degree must be even >= 2, got {self.degree}")
        if self.exponents is None:
            self.exponents = np.array(monomial_basis(self.n, self.degree), dtype=int)
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if self.coefficients.shape != (self.exponents.shape[0],):
            raise ContractViolationError(
                f"expected {self.exponents.shape[0]} coefficients, "
                f"got {self.coefficients.shape}")

    def value(self, x: np.ndarray) -> float:
        return float(self.value_many(np.asarray(x, dtype=float)[None, :])[0])

    def value_many(self, points: np.ndarray) -> np.ndarray:
        return monomial_matrix(self.exponents, points) @ self.coefficients

    def gradient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        grad = np.zeros(self.n)
        for i in range(self.n):
            e_i = self.exponents[:, i]
            active = e_i > 0
            if not active.any():
                continue
            reduced = self.exponents[active].copy()
            reduced[:, i] -= 1
            mono = monomial_matrix(reduced, x[None, :])[0]
            grad[i] = np.dot(self.coefficients[active] * e_i[active], mono)
        return grad

    def terms(self) -> dict[tuple[int, ...], float]:
        return {tuple(int(v) for v in e): float(c)
                for e, c in zip(self.exponents, self.coefficients)}

    def to_json(self) -> dict:
        return {
            "kind": "polynomial",
            "n": self.n,
            "degree": self.degree,
            "terms": [[list(map(int, e)), float(c)]
                      for e, c in zip(self.exponents, self.coefficients)],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PolynomialForm":
        n, degree = int(doc["n"]), int(doc["degree"])
        table = {tuple(int(v) for v in e): float(c) for e, c in doc["terms"]}
        basis = monomial_basis(n, degree)
        coeffs = np.array([table.get(e, 0.0) for e in basis])
        return cls(n=n, degree=degree, coefficients=coeffs)


def expand_power_sum(vectors: np.ndarray, degree: int,
                     coeff_budget: int = 200_000) -> PolynomialForm:
    """Expand sum_j (l_j . x)^degree into monomial coefficients.

    Uses the multinomial theorem termwise; raises when the basis would
    exceed ``coeff_budget`` coefficients.
    """
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    n = vectors.shape[1]
    size = basis_size(n, degree)
    if size > coeff_budget:
        raise BudgetExceededError(
            f"basis of degree {degree} in {n} vars has {size} terms "
            f"> budget {coeff_budget}")
    basis = monomial_basis(n, degree)
    coeffs = np.zeros(len(basis))
    for j, e in enumerate(basis):
        m = multinomial(degree, e)
        prods = np.ones(vectors.shape[0])
        for i, ei in enumerate(e):
            if ei:
                prods = prods * vectors[:, i] ** ei
        coeffs[j] = m * prods.sum()
    return PolynomialForm(n=n, degree=degree, coefficients=coeffs)
