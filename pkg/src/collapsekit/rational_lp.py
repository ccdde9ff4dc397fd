"""Exact-rational phase-1 simplex for linear feasibility.

Solves: does {x >= 0 : A x = b} have a point?  All arithmetic is over
`fractions.Fraction`, so the reported minimum constraint violation is exact;
the caller compares it against a tolerance.  Bland's rule guarantees
termination.  Problem sizes here are tiny (tens of variables), so a dense
tableau is fine.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

__all__ = ["FeasibilityResult", "feasibility_lp"]


@dataclass(frozen=True)
class FeasibilityResult:
    # Exact minimum of the total artificial slack; zero means feasible.
    violation: Fraction
    # A point achieving that minimum (feasible point when violation == 0).
    solution: list
    # Farkas-style certificate: y with y.A <= 0 componentwise and
    # y.b == violation; separating functional when violation > 0.
    certificate: list

    def feasible(self, tolerance: Fraction = Fraction(0)) -> bool:
        return self.violation <= tolerance


def feasibility_lp(rows, rhs) -> FeasibilityResult:
    """Phase-1 simplex over A x = b, x >= 0 with exact rational pivoting."""
    m = len(rows)
    if m == 0:
        return FeasibilityResult(Fraction(0), [], [])
    n = len(rows[0])
    a = [[Fraction(v) for v in row] for row in rows]
    b = [Fraction(v) for v in rhs]
    # Flip rows so every right-hand side is nonnegative; remember the signs to
    # report the certificate in the caller's orientation.
    signs = []
    for i in range(m):
        if b[i] < 0:
            a[i] = [-v for v in a[i]]
            b[i] = -b[i]
            signs.append(-1)
        else:
            signs.append(1)

    # Tableau columns: n original vars, m artificials, then rhs.
    tableau = [a[i] + [Fraction(int(i == k)) for k in range(m)] + [b[i]]
               for i in range(m)]
    basis = [n + i for i in range(m)]
    # Reduced costs for min(sum of artificials): d_j = c_j - sum_i T[i][j].
    cost = [Fraction(int(j >= n)) for j in range(n + m)]
    d = [cost[j] - sum(tableau[i][j] for i in range(m)) for j in range(n + m)]

    while True:
        enter = next((j for j in range(n + m) if d[j] < 0), None)
        if enter is None:
            break
        # Ratio test with Bland tie-breaking on the leaving basis variable.
        leave = None
        best = None
        for i in range(m):
            coef = tableau[i][enter]
            if coef > 0:
                ratio = tableau[i][-1] / coef
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[leave]
                ):
                    best = ratio
                    leave = i
        if leave is None:
            raise RuntimeError("phase-1 objective unbounded (cannot happen)")
        pivot = tableau[leave][enter]
        tableau[leave] = [v / pivot for v in tableau[leave]]
        for i in range(m):
            if i != leave and tableau[i][enter] != 0:
                f = tableau[i][enter]
                tableau[i] = [vi - f * vp for vi, vp in zip(tableau[i], tableau[leave])]
        f = d[enter]
        d = [dj - f * vp for dj, vp in zip(d, tableau[leave][:-1])]
        basis[leave] = enter

    solution = [Fraction(0)] * n
    for i, var in enumerate(basis):
        if var < n:
            solution[var] = tableau[i][-1]
    # Dual from artificial reduced costs: d_{n+i} = 1 - y_i.
    y = [(Fraction(1) - d[n + i]) * signs[i] for i in range(m)]
    value = sum(tableau[i][-1] for i in range(m) if basis[i] >= n)
    return FeasibilityResult(value, solution, y)
