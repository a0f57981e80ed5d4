"""Continuous solver: LP row generation with a branch-and-bound search for
the darkest point (triangle bisection with lower-bound pruning).

The region is triangulated once along the overlay of all visibility
polygons, so each triangle is seen by a fixed guard subset and the light
function restricted to it is a plain sum of falloff terms.  Each triangle is
then searched by longest-edge bisection, pruned by a per-triangle lower
bound: either the geometric bound (per-guard vertex minima) or the
Lipschitz vertex bound, or the best of both.
"""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .fading import FadingSpec, IntensityAssignment, RhoModel
from .geom import GEOM_TOL, Point, PolygonWithHoles, Triangle, dist
from .lp_core import IlluminationLP, Solution, solve_lp
from .visibility import PolygonArrays, visibility_overlay


@dataclass
class PspState:
    """Search state: remaining triangles, incumbent and certified bound."""

    heap: list = field(default_factory=list)
    incumbent_point: Optional[Point] = None
    incumbent_value: float = math.inf
    beta: float = -math.inf
    k: int = 0
    counter: int = 0
    residual_beta: float = math.inf  # bounds of unsplittable slivers

    def current_beta(self) -> float:
        top = self.heap[0][0] if self.heap else math.inf
        return min(top, self.residual_beta)


@dataclass
class PspResult:
    point: Point
    value: float
    lower_bound: float
    iterations: int
    status: str  # converged | exhausted | pruned | iteration-limit
    deepest: int = 0


@dataclass
class ContinuousRunReport:
    solution: Solution
    outer_iterations: int
    psp_triangles_expanded: int
    psp_deepest: int
    darkest_value: float
    repair_factor: float
    witnesses_used: int
    lp_lower_bound: float
    wall_time: float
    status: str  # optimal-within-delta | infeasible | iteration-limit | limit


# ---------------------------------------------------------------------------
# Lower bounds
# ---------------------------------------------------------------------------


def _rho_values(gx, gy, xv, alpha, px, py):
    d = np.hypot(px - gx, py - gy)
    if alpha == 0:
        coeff = np.ones_like(d)
    else:
        coeff = np.where(d > 1.0, d ** -alpha if alpha else 1.0, 1.0)
        if alpha:
            far = d > 1.0
            coeff = np.ones_like(d)
            coeff[far] = d[far] ** -alpha
    return coeff * xv


def geometric_lower_bound(
    tri: Triangle,
    guards: Sequence[Point],
    x: Sequence[float],
    fading: FadingSpec,
) -> float:
    """Sum over guards of intensity times the dimmest triangle vertex.

    Valid because each single-guard term attains its minimum over a convex
    set at the farthest point, hence at a vertex.
    """
    total = 0.0
    for g, xg in zip(guards, x):
        if xg == 0:
            continue
        worst = min(
            _rho_scalar(g, v, fading.alpha) for v in tri.vertices
        )
        total += xg * worst
    return total


def _rho_scalar(g: Point, w: Point, alpha: float) -> float:
    d = dist(g, w)
    if d <= 1.0 or alpha == 0:
        return 1.0
    return d**-alpha


def lipschitz_constant(x: Sequence[float], fading: FadingSpec) -> float:
    """alpha * sum(x): each falloff term has gradient norm <= alpha."""
    return fading.alpha * float(sum(x))


def lipschitz_lower_bound(tri: Triangle, z: Sequence[float], L: float) -> float:
    """Vertex-value bound for an L-Lipschitz function on a triangle."""
    vs = tri.vertices
    worst_spread = max(
        sum(dist(vs[i], vs[j]) for j in range(3)) for i in range(3)
    )
    return (sum(z) - L * worst_spread) / 3.0


# ---------------------------------------------------------------------------
# PSP: darkest point of one triangle
# ---------------------------------------------------------------------------


class _TriangleLight:
    """Light function restricted to a fixed guard subset, with caching."""

    def __init__(self, guards: Sequence[Point], x: Sequence[float], fading: FadingSpec):
        self.gx = np.array([float(g.x) for g in guards])
        self.gy = np.array([float(g.y) for g in guards])
        self.xv = np.array([float(v) for v in x])
        self.alpha = fading.alpha
        self.total_x = float(self.xv.sum())
        self._cache: dict[tuple[float, float], float] = {}

    def value(self, p: Point) -> float:
        key = (float(p.x), float(p.y))
        v = self._cache.get(key)
        if v is None:
            d = np.hypot(key[0] - self.gx, key[1] - self.gy)
            if self.alpha == 0:
                coeff = np.ones_like(d)
            else:
                coeff = np.ones_like(d)
                far = d > 1.0
                coeff[far] = d[far] ** -self.alpha
            v = float(coeff @ self.xv)
            self._cache[key] = v
        return v

    def vertex_min_bound(self, tri: Triangle) -> float:
        px = np.array([float(v.x) for v in tri.vertices])
        py = np.array([float(v.y) for v in tri.vertices])
        d = np.hypot(px[:, None] - self.gx[None, :], py[:, None] - self.gy[None, :])
        if self.alpha == 0:
            coeff = np.ones_like(d)
        else:
            coeff = np.ones_like(d)
            far = d > 1.0
            coeff[far] = d[far] ** -self.alpha
        return float(coeff.min(axis=0) @ self.xv)


def _bound_value(
    light: _TriangleLight, tri: Triangle, bound: str, fading: FadingSpec
) -> float:
    geom = light.vertex_min_bound(tri) if bound in ("geometric", "max") else -math.inf
    lip = -math.inf
    if bound in ("lipschitz", "max"):
        L = fading.alpha * light.total_x
        z = [light.value(v) for v in tri.vertices]
        lip = lipschitz_lower_bound(tri, z, L)
    return max(geom, lip)


def psp_solve(
    tri: Triangle,
    guards: Sequence[Point],
    x: Sequence[float],
    fading: FadingSpec,
    delta: float,
    bound: str = "geometric",
    max_iterations: int = 100_000,
    prune_at: Optional[float] = None,
    trace: Optional[list] = None,
    light: Optional[_TriangleLight] = None,
) -> PspResult:
    """Locate the darkest point of a triangle seen by a fixed guard set.

    Returns once the incumbent is within ``delta`` of the certified lower
    bound, the search set empties (incumbent is exact), or the bound proves
    the whole triangle at least as bright as ``prune_at``.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if bound not in ("geometric", "lipschitz", "max"):
        raise ValueError(f"unknown bound {bound!r}")
    if light is None:
        light = _TriangleLight(guards, x, fading)

    st = PspState()
    vertex_vals = [(light.value(v), v) for v in tri.vertices]
    st.incumbent_value, st.incumbent_point = min(vertex_vals, key=lambda t: t[0])
    l0 = _bound_value(light, tri, bound, fading)
    st.beta = l0
    heapq.heappush(st.heap, (l0, st.counter, 0, tri))
    st.counter += 1
    deepest = 0
    status = "iteration-limit"
    min_edge = 1e-9 * max(1.0, max(abs(float(v.x)) + abs(float(v.y)) for v in tri.vertices))

    while st.k < max_iterations:
        if not st.heap:
            # Everything was either refined away or discarded as bright; the
            # incumbent is the exact minimum of the evaluated features.
            st.beta = min(st.incumbent_value, st.residual_beta)
            status = "exhausted"
            break
        st.beta = max(st.beta, st.current_beta())
        if trace is not None:
            trace.append((st.k, st.beta, st.incumbent_value))
        if prune_at is not None and st.beta >= prune_at:
            status = "pruned"
            break
        if st.incumbent_value <= st.beta + delta:
            status = "converged"
            break
        lb, _, depth, cur = heapq.heappop(st.heap)
        if lb > st.incumbent_value:
            continue  # bright triangle, cannot contain the darkest point
        _, longest = cur.longest_edge()
        if longest <= min_edge:
            st.residual_beta = min(st.residual_beta, lb)
            continue
        c1, c2, mid = cur.bisect_longest()
        mv = light.value(mid)
        if mv < st.incumbent_value:
            st.incumbent_value = mv
            st.incumbent_point = mid
        for child in (c1, c2):
            lc = max(_bound_value(light, child, bound, fading), lb)
            heapq.heappush(st.heap, (lc, st.counter, depth + 1, child))
            st.counter += 1
            deepest = max(deepest, depth + 1)
        st.k += 1

    final_beta = min(st.current_beta(), st.incumbent_value)
    if status == "exhausted":
        final_beta = st.beta
    return PspResult(
        st.incumbent_point,
        st.incumbent_value,
        final_beta,
        st.k,
        status,
        deepest,
    )


# ---------------------------------------------------------------------------
# Outer loop
# ---------------------------------------------------------------------------


def solve_continuous(
    poly: PolygonWithHoles,
    guards: Sequence[Point],
    fading: FadingSpec,
    delta: float = 1e-3,
    bound: str = "geometric",
    delta_feas: Optional[float] = None,
    max_outer: int = 500,
    batch_witnesses: bool = False,
    psp_max_iterations: int = 100_000,
    deadline: Optional[float] = None,
    tol: float = GEOM_TOL,
) -> ContinuousRunReport:
    """Row generation on the continuous problem with PSP separation.

    Starts from an empty witness set; each round solves the LP, finds the
    globally darkest point of the current lighting, and adds it as a witness
    until nothing falls below ``1 - delta_feas``.  If the final darkest value
    is inside [1 - delta_feas, 1), all intensities are scaled by its inverse
    so the reported solution is verifiably feasible at every point the
    search evaluated.
    """
    t0 = time.monotonic()
    if delta_feas is None:
        delta_feas = delta
    poly = poly.as_float()
    guards = [g.as_float() for g in guards]

    overlay = visibility_overlay(poly, guards, tol)
    if not overlay.feasible:
        sol = Solution(IntensityAssignment({}), math.inf, "infeasible")
        return ContinuousRunReport(
            sol, 0, 0, 0, 0.0, 1.0, 0, 0.0, time.monotonic() - t0, "infeasible"
        )

    tris = overlay.subdivision.triangles()
    cells = overlay.subdivision.cells
    tri_list = [t for t, _ in tris]
    tri_guardsets = [sorted(cells[ci].label) for _, ci in tris]
    ntri = len(tri_list)
    ng = len(guards)
    alpha = fading.alpha

    gx = np.array([float(g.x) for g in guards])
    gy = np.array([float(g.y) for g in guards])

    # Per-triangle, per-guard dimmest-vertex coefficient (0 where unseen).
    vx = np.array([[float(v.x) for v in t.vertices] for t in tri_list])
    vy = np.array([[float(v.y) for v in t.vertices] for t in tri_list])
    d = np.hypot(
        vx[:, :, None] - gx[None, None, :], vy[:, :, None] - gy[None, None, :]
    )
    coeff = np.ones_like(d)
    if alpha:
        far = d > 1.0
        coeff[far] = d[far] ** -alpha
    seen = np.zeros((ntri, ng), dtype=bool)
    for ti, gs in enumerate(tri_guardsets):
        seen[ti, list(gs)] = True
    vert_coeff = coeff * seen[:, None, :]
    min_coeff = vert_coeff.min(axis=1) * seen  # (ntri, ng)
    spread = np.zeros(ntri)
    for ti, t in enumerate(tri_list):
        vs = t.vertices
        spread[ti] = max(
            sum(dist(vs[i], vs[j]) for j in range(3)) for i in range(3)
        )

    arrays = PolygonArrays(poly)

    def vis_fn(gi: int, w: Point) -> bool:
        xy = np.array([[float(w.x), float(w.y)]])
        return bool(arrays.visible_mask(guards[gi], xy, tol)[0])

    lp = IlluminationLP(guards, RhoModel(fading), vis_fn)
    lights: dict[tuple, _TriangleLight] = {}
    expanded = 0
    deepest = 0
    status = "iteration-limit"
    darkest_value = 0.0
    darkest_point = None
    repair = 1.0
    sol = Solution(IntensityAssignment({}), 0.0, "optimal")
    outer = 0
    prev_obj = -math.inf

    for outer in range(1, max_outer + 1):
        if deadline is not None and time.monotonic() > deadline:
            status = "limit"
            break
        sol = solve_lp(lp)
        if sol.status == "infeasible":
            status = "infeasible"
            break
        if sol.objective < prev_obj - 1e-7 * max(1.0, abs(prev_obj)):
            raise AssertionError("LP objective decreased across outer iterations")
        prev_obj = sol.objective
        xvec = np.array([sol.intensities.value(g) for g in range(ng)])

        # Vectorized scan bounds over all triangles.
        geom_b = min_coeff @ xvec
        if bound in ("lipschitz", "max"):
            tvert = np.einsum("tvg,g->tv", vert_coeff, xvec)
            L = alpha * float(xvec.sum())
            lip_b = (tvert.sum(axis=1) - L * spread) / 3.0
            scan_b = lip_b if bound == "lipschitz" else np.maximum(geom_b, lip_b)
        else:
            tvert = np.einsum("tvg,g->tv", vert_coeff, xvec)
            scan_b = geom_b

        inc_idx = int(np.argmin(tvert.min(axis=1)))
        inc_vertex = int(np.argmin(tvert[inc_idx]))
        darkest_value = float(tvert[inc_idx, inc_vertex])
        darkest_point = tri_list[inc_idx].vertices[inc_vertex]

        order = np.argsort(scan_b)
        xkey = tuple(np.round(xvec, 15))
        for ti in order:
            prune = min(1.0, darkest_value)
            if scan_b[ti] >= prune:
                break
            gs = tri_guardsets[ti]
            lkey = (tuple(gs), xkey)
            light = lights.get(lkey)
            if light is None:
                light = _TriangleLight(
                    [guards[g] for g in gs], xvec[list(gs)], fading
                )
                lights[lkey] = light
            res = psp_solve(
                tri_list[ti],
                [guards[g] for g in gs],
                xvec[list(gs)],
                fading,
                delta,
                bound,
                max_iterations=psp_max_iterations,
                prune_at=prune,
                light=light,
            )
            expanded += res.iterations
            deepest = max(deepest, res.deepest)
            if res.value < darkest_value:
                darkest_value = res.value
                darkest_point = res.point
        lights.clear()

        if darkest_value < 1.0 - delta_feas:
            added = False
            if batch_witnesses:
                seen_keys = set()
                for ti in order:
                    if scan_b[ti] >= 1.0 - delta_feas:
                        break
                # batch mode adds the single global point plus each dark
                # triangle's darkest vertex below threshold
                dark = np.nonzero(tvert.min(axis=1) < 1.0 - delta_feas)[0]
                for ti in dark[:64]:
                    vi = int(np.argmin(tvert[ti]))
                    p = tri_list[ti].vertices[vi]
                    key = (round(float(p.x), 12), round(float(p.y), 12))
                    if key not in seen_keys:
                        seen_keys.add(key)
                        lp.add_row(p, lp.coefficient_row(p))
                        added = True
            key_pt = darkest_point
            row = lp.coefficient_row(key_pt)
            if row:
                lp.add_row(key_pt, row)
                added = True
            if not added:
                status = "iteration-limit"
                break
        else:
            if darkest_value < 1.0:
                repair = 1.0 / darkest_value
                sol = Solution(
                    sol.intensities.scaled(repair),
                    sol.objective * repair,
                    sol.status,
                    sol.iterations,
                )
            status = "optimal-within-delta"
            break

    lp_lb = prev_obj if prev_obj > -math.inf else 0.0
    if status == "optimal-within-delta":
        lp_lb = min(lp_lb, sol.objective)
    return ContinuousRunReport(
        sol,
        outer,
        expanded,
        deepest,
        darkest_value,
        repair,
        len(lp.witnesses),
        lp_lb,
        time.monotonic() - t0,
        status,
    )
