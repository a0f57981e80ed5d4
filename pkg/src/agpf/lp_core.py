"""Minimum-total-intensity LP over a fixed guard set and a witness set.

The primal is a covering LP (min sum x, coverage rows >= 1, x >= 0).  We run
a revised simplex with Bland's rule on its packing dual, whose basis has one
entry per guard; the primal intensities fall out as the simplex multipliers.
Row generation then amounts to appending dual columns, which keeps the
current basis valid, so re-solves after :func:`add_witness` warm-start.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .fading import FadingModel, IntensityAssignment
from .geom import Point

FEAS_TOL = 1e-9
OPT_TOL = 1e-9


@dataclass
class Solution:
    intensities: IntensityAssignment
    objective: float
    status: str  # optimal | infeasible | iteration-limit | solver-failure
    iterations: int = 0

    def slack(self, row: dict[int, float]) -> float:
        lhs = sum(c * self.intensities.value(g) for g, c in row.items())
        return lhs - 1.0


class IlluminationLP:
    """Coverage constraints ``sum_g coeff(g, w) x_g >= 1`` per witness."""

    def __init__(
        self,
        guards: Sequence[Point],
        model: Optional[FadingModel] = None,
        vis: Optional[Callable[[int, Point], bool]] = None,
    ):
        self.guards = list(guards)
        self.witnesses: list[Point] = []
        self.rows: list[dict[int, float]] = []
        self.model = model
        self.vis = vis
        self._basis: Optional[list[int]] = None
        self._columns: list[np.ndarray] = []

    def coefficient_row(self, w: Point) -> dict[int, float]:
        if self.model is None or self.vis is None:
            raise ValueError("LP was built without a fading model / visibility oracle")
        row: dict[int, float] = {}
        for gi, g in enumerate(self.guards):
            if self.vis(gi, w):
                c = self.model.coefficient(g, w)
                if c > 0:
                    row[gi] = c
        return row

    def add_row(self, w: Point, row: dict[int, float]) -> None:
        for g, c in row.items():
            if not (0 < c <= 1 + 1e-12):
                raise ValueError(f"coefficient {c} for guard {g} outside (0, 1]")
        self.witnesses.append(w)
        self.rows.append(dict(row))
        col = np.zeros(len(self.guards))
        for g, c in row.items():
            col[g] = c
        self._columns.append(col)

    def matrix(self) -> np.ndarray:
        """Dense guards x witnesses coefficient matrix."""
        if not self._columns:
            return np.zeros((len(self.guards), 0))
        return np.column_stack(self._columns)


def build_lp(
    guards: Sequence[Point],
    witnesses: Sequence[Point],
    model: FadingModel,
    vis: Callable[[int, Point], bool],
) -> IlluminationLP:
    lp = IlluminationLP(guards, model, vis)
    for w in witnesses:
        lp.add_row(w, lp.coefficient_row(w))
    return lp


def add_witness(lp: IlluminationLP, w: Point) -> IlluminationLP:
    """Append one coverage row; the stored simplex basis stays valid."""
    lp.add_row(w, lp.coefficient_row(w))
    return lp


def solve_lp(lp: IlluminationLP, max_iterations: Optional[int] = None) -> Solution:
    ng = len(lp.guards)
    nw = len(lp.rows)
    for wi, row in enumerate(lp.rows):
        if not row:
            return Solution(
                IntensityAssignment({}),
                float("inf"),
                "infeasible",
            )
    if nw == 0 or ng == 0:
        status = "optimal" if nw == 0 else "infeasible"
        return Solution(IntensityAssignment({}), 0.0 if nw == 0 else float("inf"), status)

    D = lp.matrix()
    if max_iterations is None:
        max_iterations = 200 + 50 * (ng + nw)

    basis = lp._basis
    if basis is None or len(basis) != ng or any(b >= ng + nw for b in basis):
        basis = list(range(ng))
    else:
        basis = list(basis)

    b = np.ones(ng)
    c_y = np.ones(nw)

    def column(j: int) -> np.ndarray:
        if j < ng:
            e = np.zeros(ng)
            e[j] = 1.0
            return e
        return D[:, j - ng]

    status = "iteration-limit"
    iterations = 0
    pi = np.zeros(ng)
    for iterations in range(1, max_iterations + 1):
        B = np.column_stack([column(j) for j in basis])
        try:
            xb = np.linalg.solve(B, b)
            cb = np.array([0.0 if j < ng else 1.0 for j in basis])
            pi = np.linalg.solve(B.T, cb)
        except np.linalg.LinAlgError:
            return Solution(IntensityAssignment({}), float("inf"), "solver-failure", iterations)
        rc_s = -pi
        rc_y = c_y - D.T @ pi
        basis_set = set(basis)
        enter = -1
        for j in range(ng):
            if j not in basis_set and rc_s[j] > OPT_TOL:
                enter = j
                break
        if enter < 0:
            cand = np.nonzero(rc_y > OPT_TOL)[0]
            for j in cand:
                if ng + int(j) not in basis_set:
                    enter = ng + int(j)
                    break
        if enter < 0:
            status = "optimal"
            break
        u = np.linalg.solve(B, column(enter))
        pos = u > 1e-11
        if not pos.any():
            # Dual unbounded would mean an uncoverable witness; rows were
            # screened above, so this is numerical trouble.
            return Solution(IntensityAssignment({}), float("inf"), "solver-failure", iterations)
        ratios = np.full(ng, np.inf)
        ratios[pos] = np.maximum(xb[pos], 0.0) / u[pos]
        rmin = ratios.min()
        leave_i = min(
            (i for i in range(ng) if ratios[i] <= rmin + 1e-12),
            key=lambda i: basis[i],
        )
        basis[leave_i] = enter
    lp._basis = list(basis)

    x = {g: float(v) for g, v in enumerate(np.maximum(pi, 0.0)) if v > 1e-14}
    assignment = IntensityAssignment(x)
    return Solution(assignment, assignment.total(), status, iterations)
