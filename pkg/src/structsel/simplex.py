"""Exact two-phase simplex over rationals.

Every number on the solve path is an exact rational; the returned point is
a basic feasible solution, i.e. a vertex of the feasible polyhedron.  With
a totally unimodular constraint matrix and integral right-hand side that
vertex is integral, which is what the callers rely on.

Pivoting uses Bland's rule (lowest eligible index enters; ties on the
ratio test break toward the lowest basic variable index), so runs are
deterministic and cycling is impossible.  A generous pivot cap guards
against implementation bugs only.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .rationals import rat, to_fraction

PIVOT_CAP = 200_000


class SimplexError(RuntimeError):
    pass


class CertificateError(AssertionError):
    """An exact optimality identity failed to hold."""


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpSolution:
    """Optimal vertex with exact dual certificate.

    ``row_duals`` aligns with the model's constraint rows; ``bound_duals``
    maps variable index -> dual of its upper-bound restriction (only for
    bounds the solver had to enforce explicitly).  ``reduced_costs`` aligns
    with the structural variables.
    """

    status: LpStatus
    x: tuple[Fraction, ...]
    objective: Optional[Fraction]
    row_duals: tuple[Fraction, ...]
    bound_duals: dict[int, Fraction]
    reduced_costs: tuple[Fraction, ...]
    basis: tuple[int, ...]
    pivots: int

    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


@dataclass
class StandardForm:
    """min c.x, A x = b, x >= 0, after slack/artificial introduction."""

    matrix: list[list]            # m rows, n_total columns
    rhs: list                     # length m, all nonnegative
    costs: list                   # length n_total (structural costs, 0 elsewhere)
    n_structural: int
    n_rows_model: int             # leading rows mirror the model's rows
    bound_rows: list[int]         # variable index per appended bound row
    unit_column: list[tuple[int, int]]   # per row: (column, sign) of its unit column
    start_basis: list[int]        # per row: feasible starting basic column
    flips: list[int]              # per row: +1, or -1 if negated during normalization
    artificial_from: int          # columns >= this index are artificial


def _implied_upper_bound(model, j, ub) -> bool:
    """True when some all-nonnegative equality row already forces x_j <= ub."""
    for row in model.rows:
        if row.sense != "=":
            continue
        coeffs = row.coeffs
        cj = coeffs[j]
        if cj <= 0:
            continue
        if all(c >= 0 for c in coeffs) and Fraction(row.rhs, cj) <= ub:
            return True
    return False


def standardize(model) -> StandardForm:
    """Assemble the equality standard form the simplex iterates on."""
    n = len(model.objective)
    rows: list[tuple[list, str, object]] = []
    for row in model.rows:
        coeffs = [rat(c) for c in row.coeffs]
        if len(coeffs) != n:
            raise ValueError("row width does not match variable count")
        rows.append((coeffs, row.sense, rat(row.rhs)))
    bound_rows: list[int] = []
    for j, ub in enumerate(model.upper_bounds):
        if ub is None:
            continue
        if _implied_upper_bound(model, j, ub):
            continue
        coeffs = [rat(0)] * n
        coeffs[j] = rat(1)
        rows.append((coeffs, "<=", rat(ub)))
        bound_rows.append(j)

    m = len(rows)
    zero = rat(0)
    one = rat(1)
    matrix: list[list] = []
    rhs: list = []
    flips: list[int] = []
    senses: list[str] = []
    for coeffs, sense, b in rows:
        if sense == ">=":
            coeffs = [-c for c in coeffs]
            b = -b
            sense = "<="
        if b < 0:
            coeffs = [-c for c in coeffs]
            b = -b
            flips.append(-1)
            sense = {"<=": ">=", ">=": "<=", "=": "="}[sense]
        else:
            flips.append(1)
        matrix.append(list(coeffs))
        rhs.append(b)
        senses.append(sense)

    # slack (+1) for <=, surplus (-1) for >=, artificial (+1) for rows whose
    # slack cannot start basic (equalities and >= rows)
    unit_column: list[tuple[int, int]] = [(-1, 0)] * m
    start_basis: list[int] = [-1] * m
    col = n
    slack_cols: list[tuple[int, int, int]] = []  # (row, col, sign)
    for i, sense in enumerate(senses):
        if sense == "<=":
            slack_cols.append((i, col, 1))
            unit_column[i] = (col, 1)
            start_basis[i] = col
            col += 1
        elif sense == ">=":
            slack_cols.append((i, col, -1))
            unit_column[i] = (col, -1)
            col += 1
    artificial_from = col
    art_cols: list[tuple[int, int]] = []
    for i, sense in enumerate(senses):
        if sense != "<=":
            art_cols.append((i, col))
            start_basis[i] = col
            if unit_column[i][0] < 0:
                unit_column[i] = (col, 1)
            col += 1
    n_total = col
    for row in matrix:
        row.extend([zero] * (n_total - n))
    for i, c, sign in slack_cols:
        matrix[i][c] = one if sign > 0 else -one
    for i, c in art_cols:
        matrix[i][c] = one

    costs = [rat(v) for v in model.objective] + [zero] * (n_total - n)
    return StandardForm(matrix, rhs, costs, n, len(model.rows), bound_rows,
                        unit_column, start_basis, flips, artificial_from)


def _pivot(tableau, cost_row, basis, r, e):
    prow = tableau[r]
    piv = prow[e]
    if piv != 1:
        inv = 1 / piv
        prow = [v * inv for v in prow]
        tableau[r] = prow
    for i in range(len(tableau)):
        if i == r:
            continue
        f = tableau[i][e]
        if f:
            row = tableau[i]
            tableau[i] = [a - f * b for a, b in zip(row, prow)]
    f = cost_row[e]
    if f:
        cost_row[:] = [a - f * b for a, b in zip(cost_row, prow)]
    basis[r] = e


def _run_simplex(tableau, cost_row, basis, eligible, pivots_done) -> tuple[str, int]:
    """Iterate until optimal or unbounded; returns (status, pivot count)."""
    m = len(tableau)
    width = len(cost_row) - 1
    pivots = pivots_done
    while True:
        entering = -1
        for j in range(width):
            if eligible[j] and cost_row[j] < 0:
                entering = j
                break
        if entering < 0:
            return "optimal", pivots
        leaving = -1
        best = None
        for i in range(m):
            a = tableau[i][entering]
            if a > 0:
                ratio = tableau[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leaving]):
                    best = ratio
                    leaving = i
        if leaving < 0:
            return "unbounded", pivots
        _pivot(tableau, cost_row, basis, leaving, entering)
        pivots += 1
        if pivots > PIVOT_CAP:
            raise SimplexError("pivot cap exceeded; implementation bug suspected")


def _reduced_costs(tableau, basis, costs, width):
    cost_row = list(costs[:width])
    for i, b in enumerate(basis):
        cb = costs[b]
        if cb:
            row = tableau[i]
            for j in range(width):
                if row[j]:
                    cost_row[j] -= cb * row[j]
    value = rat(0)
    for i, b in enumerate(basis):
        if costs[b]:
            value += costs[b] * tableau[i][-1]
    cost_row.append(-value)
    return cost_row


def solve(model) -> LpSolution:
    """Solve the LP relaxation of ``model`` exactly.

    The model supplies ``objective`` (rationals), ``rows`` (objects with
    ``coeffs``, ``sense`` in {'=', '<=', '>='}, ``rhs``) and
    ``upper_bounds`` (rational or None per variable); all variables are
    implicitly nonnegative.
    """
    std = standardize(model)
    m = len(std.matrix)
    n_total = len(std.costs)
    tableau = [row + [std.rhs[i]] for i, row in enumerate(std.matrix)]
    basis = _initial_basis(std)

    has_artificials = std.artificial_from < n_total
    pivots = 0
    if has_artificials:
        phase1 = [rat(0)] * n_total
        for j in range(std.artificial_from, n_total):
            phase1[j] = rat(1)
        cost_row = _reduced_costs(tableau, basis, phase1, n_total)
        eligible = [True] * n_total
        status, pivots = _run_simplex(tableau, cost_row, basis, eligible, pivots)
        if status != "optimal":  # pragma: no cover - phase 1 is always bounded
            raise SimplexError("phase 1 reported unbounded")
        if -cost_row[-1] != 0:
            return LpSolution(LpStatus.INFEASIBLE, (), None, (), {}, (), (), pivots)
        # drive surviving artificials out of the basis where possible
        for i in range(m):
            if basis[i] >= std.artificial_from:
                for j in range(std.artificial_from):
                    if tableau[i][j] != 0:
                        _pivot(tableau, cost_row, basis, i, j)
                        pivots += 1
                        break

    eligible = [j < std.artificial_from for j in range(n_total)]
    cost_row = _reduced_costs(tableau, basis, std.costs, n_total)
    status, pivots = _run_simplex(tableau, cost_row, basis, eligible, pivots)
    if status == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, (), None, (), {}, (), (), pivots)

    x = [Fraction(0)] * std.n_structural
    for i, b in enumerate(basis):
        if b < std.n_structural:
            x[b] = to_fraction(tableau[i][-1])
    objective = to_fraction(-cost_row[-1])

    # duals read off the unit column of each row: a column k*e_i has reduced
    # cost -k*y_i, and a flipped row negates the reported dual once more
    duals_std = []
    for i in range(m):
        col, sign = std.unit_column[i]
        y = -cost_row[col] if sign > 0 else cost_row[col]
        duals_std.append(y * std.flips[i])
    row_duals = tuple(to_fraction(y) for y in duals_std[: std.n_rows_model])
    bound_duals = {
        var: to_fraction(duals_std[std.n_rows_model + k])
        for k, var in enumerate(std.bound_rows)
    }
    reduced = tuple(to_fraction(cost_row[j]) for j in range(std.n_structural))
    return LpSolution(LpStatus.OPTIMAL, tuple(x), objective, row_duals,
                      bound_duals, reduced, tuple(basis), pivots)


def assert_integral(sol: LpSolution, var_names: Optional[Sequence[str]] = None
                    ) -> tuple[bool, Optional[str]]:
    """Check that every primal value is an integer; name the first that isn't."""
    if not sol.is_optimal():
        raise ValueError("integrality check requires an optimal solution")
    for j, v in enumerate(sol.x):
        if v.denominator != 1:
            name = var_names[j] if var_names else f"x{j}"
            return False, name
    return True, None


def check_certificates(model, sol: LpSolution) -> None:
    """Verify primal feasibility, strong duality, and complementary
    slackness exactly; raise CertificateError on any violation."""
    if not sol.is_optimal():
        raise ValueError("certificates exist only for optimal solutions")
    x = sol.x
    obj = sum((c * v for c, v in zip(model.objective, x)), Fraction(0))
    if obj != sol.objective:
        raise CertificateError("objective value mismatch")

    dual_value = Fraction(0)
    for row, y in zip(model.rows, sol.row_duals):
        activity = sum((c * v for c, v in zip(row.coeffs, x)), Fraction(0))
        slack = Fraction(row.rhs) - activity
        if row.sense == "=":
            if slack != 0:
                raise CertificateError("equality row violated")
        elif row.sense == "<=":
            if slack < 0:
                raise CertificateError("<= row violated")
            if y > 0:
                raise CertificateError("dual sign violated on <= row")
        elif row.sense == ">=":
            if slack > 0:
                raise CertificateError(">= row violated")
            if y < 0:
                raise CertificateError("dual sign violated on >= row")
        if y != 0 and slack != 0:
            raise CertificateError("complementary slackness violated on a row")
        dual_value += y * Fraction(row.rhs)
    for j, ub in enumerate(model.upper_bounds):
        if ub is not None and x[j] > ub:
            raise CertificateError("upper bound violated")
        if x[j] < 0:
            raise CertificateError("nonnegativity violated")
    for var, y in sol.bound_duals.items():
        ub = Fraction(model.upper_bounds[var])
        if y > 0:
            raise CertificateError("dual sign violated on bound row")
        if y != 0 and x[var] != ub:
            raise CertificateError("complementary slackness violated on a bound")
        dual_value += y * ub
    if dual_value != sol.objective:
        raise CertificateError("strong duality violated")
    for j, rc in enumerate(sol.reduced_costs):
        if rc < 0:
            raise CertificateError("negative reduced cost at optimum")
        if rc != 0 and x[j] != 0:
            raise CertificateError("complementary slackness violated on a variable")
