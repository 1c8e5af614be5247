"""Dense tableau simplex engine with dual-simplex warm starting.

The tableau stores the dictionary form

    x_B + body @ x_N = rhs

together with the reduced costs of a minimization objective,

    value = -cost_corner + cost_row @ x_N,

so the current vertex (x_N = 0, x_B = rhs) has objective ``-cost_corner``.
The tableau is primal feasible when ``rhs >= 0`` and dual feasible when
``cost_row >= 0``, both within ``FEAS_TOL``.

Besides primal and dual simplex the module provides the two warm-start
transformations used throughout the package: tightening the right-hand side
of an inequality (via its slack variable) and appending a new inequality row
to an optimal tableau, plus the sensitivity of the optimal value with
respect to a right-hand-side entry.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    NotDualFeasible,
    NotPrimalFeasible,
    SingularBasis,
    UnknownConstraint,
)

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-9


class Status(enum.Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"
    ITERATION_LIMIT = "iteration_limit"


@dataclass
class StandardFormLP:
    """min <cost, x> subject to eq_matrix @ x = eq_rhs, x >= 0."""

    cost: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray

    def __post_init__(self):
        self.cost = np.asarray(self.cost, dtype=float)
        self.eq_matrix = np.atleast_2d(np.asarray(self.eq_matrix, dtype=float))
        self.eq_rhs = np.asarray(self.eq_rhs, dtype=float)
        k, nv = self.eq_matrix.shape
        if self.cost.shape != (nv,):
            raise DimensionMismatch("cost length does not match the column count")
        if self.eq_rhs.shape != (k,):
            raise DimensionMismatch("rhs length does not match the row count")


class SimplexTableau:
    """Dense simplex dictionary over a basic/non-basic variable partition.

    Variables are identified by global integer indices; ``basic_vars[r]`` is
    the variable expressed by row ``r`` and ``nonbasic_vars[j]`` the variable
    of column ``j``.  ``constraint_slacks`` maps constraint ids of the
    original inequalities to the global index of their slack variable, which
    is what ``tighten_rhs`` and ``rhs_sensitivity`` operate on.
    """

    def __init__(self, basic_vars, nonbasic_vars, body, rhs, cost_row,
                 cost_corner=0.0, constraint_slacks=None, n_original=None):
        self.basic_vars = np.asarray(basic_vars, dtype=int).copy()
        self.nonbasic_vars = np.asarray(nonbasic_vars, dtype=int).copy()
        self.body = np.array(body, dtype=float, ndmin=2).copy()
        self.rhs = np.asarray(rhs, dtype=float).copy()
        self.cost_row = np.asarray(cost_row, dtype=float).copy()
        self.cost_corner = float(cost_corner)
        self.constraint_slacks = dict(constraint_slacks or {})
        self.n_original = (self.n_total if n_original is None else int(n_original))
        if self.body.shape != (len(self.basic_vars), len(self.nonbasic_vars)):
            raise DimensionMismatch("body shape does not match the variable partition")
        if self.rhs.shape != (len(self.basic_vars),):
            raise DimensionMismatch("rhs length does not match the row count")
        if self.cost_row.shape != (len(self.nonbasic_vars),):
            raise DimensionMismatch("cost row length does not match the column count")

    # -- bookkeeping --------------------------------------------------

    @property
    def n_rows(self):
        return len(self.basic_vars)

    @property
    def n_nonbasic(self):
        return len(self.nonbasic_vars)

    @property
    def n_total(self):
        return len(self.basic_vars) + len(self.nonbasic_vars)

    @property
    def objective(self):
        """Objective value at the current vertex."""
        return -self.cost_corner

    def copy(self):
        return SimplexTableau(
            self.basic_vars, self.nonbasic_vars, self.body, self.rhs,
            self.cost_row, self.cost_corner, self.constraint_slacks,
            self.n_original,
        )

    def is_primal_feasible(self, tol=FEAS_TOL):
        return bool((self.rhs >= -tol).all())

    def is_dual_feasible(self, tol=FEAS_TOL):
        return bool((self.cost_row >= -tol).all())

    def basic_row_of(self, var):
        """Row index of a basic variable, or None if it is non-basic."""
        hits = np.nonzero(self.basic_vars == var)[0]
        return int(hits[0]) if hits.size else None

    def nonbasic_col_of(self, var):
        hits = np.nonzero(self.nonbasic_vars == var)[0]
        return int(hits[0]) if hits.size else None

    def solution_point(self):
        """Full variable vector of the current vertex (non-basics at zero)."""
        point = np.zeros(int(max(self.basic_vars.max(initial=-1),
                                 self.nonbasic_vars.max(initial=-1))) + 1)
        point[self.basic_vars] = self.rhs
        return point

    def set_cost(self, full_cost):
        """Replace the objective by ``full_cost`` over the global variables.

        Variables beyond ``len(full_cost)`` (slacks of later cut rows) get
        zero cost.  Reduced costs and the corner are recomputed for the
        current basis; feasibility of the vertex is unaffected.
        """
        full_cost = np.asarray(full_cost, dtype=float)
        c = np.zeros(int(max(self.basic_vars.max(initial=-1),
                             self.nonbasic_vars.max(initial=-1))) + 1)
        c[: len(full_cost)] = full_cost
        c_b = c[self.basic_vars]
        self.cost_row = c[self.nonbasic_vars] - c_b @ self.body
        self.cost_corner = -float(c_b @ self.rhs)

    # -- pivoting -----------------------------------------------------

    def pivot(self, row, col):
        """Exchange basic_vars[row] with nonbasic_vars[col]."""
        piv = self.body[row, col]
        if abs(piv) <= PIVOT_TOL:
            raise SingularBasis(f"pivot element {piv!r} below tolerance")
        new_row = self.body[row] / piv
        new_row[col] = 1.0 / piv
        leaving_col = self.body[:, col].copy()
        self.body[:, col] = 0.0
        self.body -= np.outer(leaving_col, new_row)
        self.body[row] = new_row
        new_rhs = self.rhs[row] / piv
        self.rhs -= leaving_col * new_rhs
        self.rhs[row] = new_rhs
        c_col = self.cost_row[col]
        self.cost_row[col] = 0.0
        self.cost_row -= c_col * new_row
        self.cost_corner -= c_col * new_rhs
        self.basic_vars[row], self.nonbasic_vars[col] = (
            self.nonbasic_vars[col],
            self.basic_vars[row],
        )


@dataclass
class SolveOutcome:
    status: Status
    tableau: SimplexTableau
    objective: float
    pivot_count: int


def default_max_pivots(tableau):
    return 10 * (tableau.n_rows + tableau.n_nonbasic) ** 2


def primal_simplex(tableau, max_pivots=None):
    """Run primal simplex (Bland's rule) on a primal-feasible tableau."""
    t = tableau.copy()
    if not t.is_primal_feasible():
        raise NotPrimalFeasible(f"rhs has negative entries: min={t.rhs.min()}")
    if max_pivots is None:
        max_pivots = default_max_pivots(t)
    pivots = 0
    while True:
        eligible = np.nonzero(t.cost_row < -FEAS_TOL)[0]
        if eligible.size == 0:
            return SolveOutcome(Status.OPTIMAL, t, t.objective, pivots)
        # Bland: enter the eligible variable with the smallest global index
        col = int(eligible[np.argmin(t.nonbasic_vars[eligible])])
        column = t.body[:, col]
        rows = np.nonzero(column > PIVOT_TOL)[0]
        if rows.size == 0:
            return SolveOutcome(Status.UNBOUNDED, t, t.objective, pivots)
        ratios = t.rhs[rows] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + FEAS_TOL]
        row = int(ties[np.argmin(t.basic_vars[ties])])
        if pivots >= max_pivots:
            return SolveOutcome(Status.ITERATION_LIMIT, t, t.objective, pivots)
        t.pivot(row, col)
        pivots += 1


def dual_simplex(tableau, max_pivots=None):
    """Run dual simplex on a dual-feasible tableau.

    Row selection takes the most negative rhs entry; the entering column is
    chosen by the dual ratio test with Bland tie-breaking on the variable
    index.  On INFEASIBLE the returned tableau contains a certificate row
    (negative rhs, all coefficients >= 0).
    """
    t = tableau.copy()
    if not t.is_dual_feasible():
        raise NotDualFeasible(f"cost row has negative entries: min={t.cost_row.min()}")
    if max_pivots is None:
        max_pivots = default_max_pivots(t)
    pivots = 0
    while True:
        worst = t.rhs.min()
        if worst >= -FEAS_TOL:
            return SolveOutcome(Status.OPTIMAL, t, t.objective, pivots)
        cand = np.nonzero(t.rhs <= worst + FEAS_TOL)[0]
        row = int(cand[np.argmin(t.basic_vars[cand])])
        neg = np.nonzero(t.body[row] < -PIVOT_TOL)[0]
        if neg.size == 0:
            return SolveOutcome(Status.INFEASIBLE, t, t.objective, pivots)
        ratios = t.cost_row[neg] / (-t.body[row, neg])
        best = ratios.min()
        ties = neg[ratios <= best + FEAS_TOL]
        col = int(ties[np.argmin(t.nonbasic_vars[ties])])
        if pivots >= max_pivots:
            return SolveOutcome(Status.ITERATION_LIMIT, t, t.objective, pivots)
        t.pivot(row, col)
        pivots += 1


def tighten_rhs(tableau, constraint_id, delta):
    """Reduce the right-hand side of an original inequality by ``delta``.

    Returns a new tableau for the daughter LP.  If the constraint's slack is
    basic only its value shrinks; if the slack value stays non-negative the
    tableau remains optimal.  If the slack is non-basic the whole rhs column
    shifts along the slack's tableau column and the corner picks up
    ``delta`` times the slack's reduced cost.  Either way the cost row is
    untouched, so the result is dual feasible and ready for ``dual_simplex``.
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if constraint_id not in tableau.constraint_slacks:
        raise UnknownConstraint(f"no slack registered for constraint {constraint_id!r}")
    t = tableau.copy()
    if delta == 0:
        return t
    slack = t.constraint_slacks[constraint_id]
    row = t.basic_row_of(slack)
    if row is not None:
        t.rhs[row] -= delta
    else:
        col = t.nonbasic_col_of(slack)
        t.rhs -= delta * t.body[:, col]
        t.cost_corner -= delta * t.cost_row[col]
    return t


def rhs_sensitivity(tableau, constraint_id):
    """d(optimal value)/d(b_i) under the fixed-basis assumption.

    Zero when the constraint's slack is basic (the inequality is inactive);
    minus the slack's reduced cost when it is non-basic.  At basis
    breakpoints this is the one-sided derivative implied by the current
    tableau.
    """
    if constraint_id not in tableau.constraint_slacks:
        raise UnknownConstraint(f"no slack registered for constraint {constraint_id!r}")
    slack = tableau.constraint_slacks[constraint_id]
    if tableau.basic_row_of(slack) is not None:
        return 0.0
    col = tableau.nonbasic_col_of(slack)
    return -float(tableau.cost_row[col])


def add_cut_row(tableau, a_coeffs, b0, constraint_id=None):
    """Append the inequality <a_coeffs, x> <= b0 to an optimal tableau.

    ``a_coeffs`` ranges over the tableau's original variables; slacks of
    previously added cuts implicitly get coefficient zero.  The new row is
    expressed over the current non-basic variables and its fresh slack
    enters the basis, so the cost row is unchanged and the result is dual
    feasible.  If the new rhs entry is negative, run ``dual_simplex``.
    """
    a_coeffs = np.asarray(a_coeffs, dtype=float)
    if a_coeffs.shape != (tableau.n_original,):
        raise DimensionMismatch(
            f"cut has {a_coeffs.size} coefficients, expected {tableau.n_original}"
        )
    if not tableau.is_dual_feasible():
        raise NotDualFeasible("cut rows may only be added to an optimal tableau")
    t = tableau.copy()
    hi = int(max(t.basic_vars.max(initial=-1), t.nonbasic_vars.max(initial=-1))) + 1
    a = np.zeros(hi)
    a[: a_coeffs.size] = a_coeffs
    a_basic = a[t.basic_vars]
    a_nonbasic = a[t.nonbasic_vars]
    new_row = a_nonbasic - t.body.T @ a_basic
    new_rhs = float(b0) - float(a_basic @ t.rhs)
    slack = hi
    t.basic_vars = np.append(t.basic_vars, slack)
    t.body = np.vstack([t.body, new_row])
    t.rhs = np.append(t.rhs, new_rhs)
    if constraint_id is not None:
        t.constraint_slacks[constraint_id] = slack
    return t


def tableau_from_basis(lp, basic_vars):
    """Build the dictionary tableau of ``lp`` for a given basis."""
    k, nv = lp.eq_matrix.shape
    basic_vars = np.asarray(basic_vars, dtype=int)
    if basic_vars.size != k:
        raise DimensionMismatch("basis size must equal the row count")
    mask = np.ones(nv, dtype=bool)
    mask[basic_vars] = False
    nonbasic_vars = np.nonzero(mask)[0]
    basis = lp.eq_matrix[:, basic_vars]
    try:
        body = np.linalg.solve(basis, lp.eq_matrix[:, nonbasic_vars])
        rhs = np.linalg.solve(basis, lp.eq_rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularBasis(str(exc)) from exc
    c_b = lp.cost[basic_vars]
    cost_row = lp.cost[nonbasic_vars] - c_b @ body
    cost_corner = -float(c_b @ rhs)
    return SimplexTableau(basic_vars, nonbasic_vars, body, rhs, cost_row, cost_corner)


def solve_standard_form(lp, max_pivots=None):
    """Cold-solve a standard-form LP: artificial-variable phase 1, then phase 2.

    Fallback path for cold solves in tests and benchmarking; production
    paths start from constructively feasible or dual-feasible tableaus.
    """
    a_mat = lp.eq_matrix.copy()
    b = lp.eq_rhs.copy()
    flip = b < 0
    a_mat[flip] *= -1.0
    b[flip] *= -1.0
    k, nv = a_mat.shape
    artificials = nv + np.arange(k)
    t = SimplexTableau(
        basic_vars=artificials,
        nonbasic_vars=np.arange(nv),
        body=a_mat,
        rhs=b,
        cost_row=-a_mat.sum(axis=0),
        cost_corner=-float(b.sum()),
        n_original=nv,
    )
    out = primal_simplex(t, max_pivots)
    pivots = out.pivot_count
    if out.status is not Status.OPTIMAL:
        return SolveOutcome(out.status, out.tableau, out.objective, pivots)
    if out.objective > 1e-7:
        return SolveOutcome(Status.INFEASIBLE, out.tableau, out.objective, pivots)
    t = out.tableau
    # drive remaining artificials out of the basis, dropping redundant rows
    row = 0
    while row < t.n_rows:
        if t.basic_vars[row] < nv:
            row += 1
            continue
        real = np.nonzero(
            (t.nonbasic_vars < nv) & (np.abs(t.body[row]) > PIVOT_TOL)
        )[0]
        if real.size:
            t.pivot(row, int(real[0]))
            pivots += 1
            row += 1
        else:
            t.basic_vars = np.delete(t.basic_vars, row)
            t.body = np.delete(t.body, row, axis=0)
            t.rhs = np.delete(t.rhs, row)
    keep = t.nonbasic_vars < nv
    t.nonbasic_vars = t.nonbasic_vars[keep]
    t.body = t.body[:, keep]
    t.cost_row = t.cost_row[keep]
    t.set_cost(lp.cost)
    out = primal_simplex(t, max_pivots)
    return SolveOutcome(out.status, out.tableau, out.objective, pivots + out.pivot_count)
