"""
Exact Rational LP for the Bananaworld Correlation Analyzer
Phase-one simplex over Fractions with Bland's rule: decides feasibility of
A w = b, w >= 0 and returns either a solution or a Farkas witness
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeasibilityResult:
    """Either a feasible point or a Farkas witness y with y.A <= 0 and y.b > 0"""
    feasible: bool
    solution: Optional[List[Fraction]] = None
    farkas: Optional[List[Fraction]] = None
    pivots: int = 0


class RationalSimplex:
    """Phase-one tableau for A w = b, w >= 0 in exact arithmetic

    One artificial variable per row; the auxiliary objective is the sum of the
    artificials. Bland's smallest-index rule rules out cycling.
    """

    def __init__(self, A: Sequence[Sequence], b: Sequence):
        self.m = len(A)
        self.n = len(A[0]) if self.m else 0
        if len(b) != self.m:
            raise ValueError(f"row count mismatch: A has {self.m}, b has {len(b)}")
        Z = Fraction(0)
        # Rows with negative right-hand side are negated so artificials start feasible
        self.row_sign = [(-1 if Fraction(bi) < 0 else 1) for bi in b]
        self.tableau = []
        for i in range(self.m):
            s = self.row_sign[i]
            row = [s * Fraction(v) for v in A[i]]
            row += [Fraction(1) if k == i else Z for k in range(self.m)]
            row.append(s * Fraction(b[i]))
            self.tableau.append(row)
        self.basis = [self.n + i for i in range(self.m)]
        width = self.n + self.m + 1
        # Reduced costs of the auxiliary objective, last slot holds -objective
        self.cost = [Z] * width
        for row in self.tableau:
            for j in range(self.n):
                self.cost[j] -= row[j]
            self.cost[-1] -= row[-1]
        self.pivots = 0

    def _entering(self) -> Optional[int]:
        for j in range(self.n + self.m):
            if self.cost[j] < 0:
                return j
        return None

    def _leaving(self, j: int) -> int:
        best = None
        for i, row in enumerate(self.tableau):
            if row[j] > 0:
                ratio = row[-1] / row[j]
                key = (ratio, self.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        # The auxiliary objective is bounded below by zero
        assert best is not None, "phase one cannot be unbounded"
        return best[1]

    def pivot(self, i: int, j: int) -> None:
        pivot_row = self.tableau[i]
        piv = pivot_row[j]
        pivot_row[:] = [v / piv for v in pivot_row]
        # only columns where the pivot row is nonzero change
        nonzero = [(c, p) for c, p in enumerate(pivot_row) if p != 0]
        for k, row in enumerate(self.tableau):
            if k != i and row[j] != 0:
                f = row[j]
                for c, p in nonzero:
                    row[c] -= f * p
        f = self.cost[j]
        if f != 0:
            for c, p in nonzero:
                self.cost[c] -= f * p
        self.basis[i] = j
        self.pivots += 1

    def run(self) -> FeasibilityResult:
        while True:
            j = self._entering()
            if j is None:
                break
            self.pivot(self._leaving(j), j)

        objective = -self.cost[-1]
        logger.debug(f"[RationalLP] phase one finished after {self.pivots} pivots, "
                     f"objective {objective}")
        if objective == 0:
            solution = [Fraction(0)] * self.n
            for i, var in enumerate(self.basis):
                if var < self.n:
                    solution[var] = self.tableau[i][-1]
            return FeasibilityResult(True, solution=solution, pivots=self.pivots)

        # Duals of the auxiliary problem: reduced cost of artificial i is 1 - y_i
        farkas = [self.row_sign[i] * (1 - self.cost[self.n + i]) for i in range(self.m)]
        return FeasibilityResult(False, farkas=farkas, pivots=self.pivots)


def solve_feasibility(A: Sequence[Sequence], b: Sequence) -> FeasibilityResult:
    """Decide whether A w = b has a solution with w >= 0"""
    return RationalSimplex(A, b).run()
