"""Step-function solver: build the ring-and-visibility arrangement, witness
every feature, and solve the coverage LP exactly on the step coefficients.

The step coefficients are constant on every feature of the arrangement of
polygon edges, visibility-polygon edges and fading rings, so one witness per
feature turns the infinite problem into a finite LP.  Circle rings run on
the floating kernel; octagon rings run on the exact rational kernel (ring
geometry and band classification are exact, visibility flags use the
tolerant floating test).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .fading import (
    COS_PI_8,
    FadingSpec,
    IntensityAssignment,
    StepFadingSpec,
    TauModel,
    band_indices,
    ring_radii,
)
from .geom import (
    GEOM_TOL,
    Arc,
    PlanarSubdivision,
    Point,
    PolygonWithHoles,
    Seg,
    _point_in_cycle,
    dist,
    seg_seg_events,
)
from .lp_core import IlluminationLP, Solution, solve_lp
from .visibility import PolygonArrays, VisibilityOverlay, visibility_overlay


@dataclass
class FadingArrangement:
    subdivision: PlanarSubdivision
    poly: PolygonWithHoles
    guards: list[Point]
    fading: FadingSpec
    step: StepFadingSpec
    witnesses: list[Point]
    witness_kinds: list[str]  # vertex | edge | face
    rows: list[dict[int, float]]  # step coefficients per witness
    ring_count: int
    feasible: bool
    vis_overlay: VisibilityOverlay

    def feature_counts(self) -> tuple[int, int, int]:
        return self.subdivision.feature_counts()

    def coefficient_maps(self) -> list[dict[int, float]]:
        return self.rows


@dataclass
class DiscreteRunReport:
    solution: Solution
    iterations: int
    witnesses_used: int
    n_vertices: int
    n_edges: int
    n_faces: int
    ring_count: int
    wall_time: float
    declared_factor: float
    lower_bound: float
    status: str  # optimal | infeasible | iteration-limit | limit
    mode: str


# ---------------------------------------------------------------------------
# Ring geometry
# ---------------------------------------------------------------------------


def _clip_circle_to_cycle(
    g: Point, r: float, cycle: Sequence[Point], tol: float
) -> list[Arc]:
    """Arcs of the circle about g of radius r lying inside the cycle."""
    gx, gy = float(g.x), float(g.y)
    angles: list[float] = []
    n = len(cycle)
    for i in range(n):
        u, v = cycle[i], cycle[(i + 1) % n]
        seg = Seg(u.as_float(), v.as_float())
        for _, theta in _seg_arc_hits(seg, gx, gy, r, tol):
            angles.append(theta)
    angles = sorted({round(a, 14) % (2 * math.pi) for a in angles})
    arcs: list[Arc] = []
    if not angles:
        probe = Point(gx + r, gy)
        if _point_in_cycle(probe, cycle, tol):
            arcs.append(Arc(gx, gy, r, 0.0, math.pi))
            arcs.append(Arc(gx, gy, r, math.pi, 2 * math.pi))
        return arcs
    spans = list(zip(angles, angles[1:] + [angles[0] + 2 * math.pi]))
    for a0, a1 in spans:
        if a1 - a0 <= tol / max(r, 1e-30):
            continue
        mid = (a0 + a1) / 2
        probe = Point(gx + r * math.cos(mid), gy + r * math.sin(mid))
        if _point_in_cycle(probe, cycle, tol):
            if a1 - a0 > math.pi:  # keep arcs x-monotone-friendly
                am = (a0 + a1) / 2
                arcs.append(Arc(gx, gy, r, a0, am))
                arcs.append(Arc(gx, gy, r, am, a1))
            else:
                arcs.append(Arc(gx, gy, r, a0, a1))
    return arcs


def _seg_arc_hits(seg: Seg, cx: float, cy: float, r: float, tol: float):
    ax, ay = float(seg.a.x), float(seg.a.y)
    dx, dy = float(seg.b.x) - ax, float(seg.b.y) - ay
    fx, fy = ax - cx, ay - cy
    A = dx * dx + dy * dy
    if A == 0:
        return []
    B = 2 * (fx * dx + fy * dy)
    C = fx * fx + fy * fy - r * r
    disc = B * B - 4 * A * C
    if disc < 0:
        return []
    sq = math.sqrt(max(disc, 0.0))
    out = []
    for t in ((-B - sq) / (2 * A), (-B + sq) / (2 * A)):
        if -tol <= t <= 1 + tol:
            px, py = ax + t * dx, ay + t * dy
            out.append((t, math.atan2(py - cy, px - cx)))
    return out


def _clip_segment_to_cycle(seg: Seg, cycle: Sequence[Point], tol) -> list[Seg]:
    """Sub-segments of seg lying inside the cycle (exact-friendly)."""
    params = [0, 1]
    n = len(cycle)
    for i in range(n):
        u, v = cycle[i], cycle[(i + 1) % n]
        for t, _ in seg_seg_events(seg.a, seg.b, u, v, tol):
            params.append(t)
    params = sorted(set(params))
    half = Fraction(1, 2) if isinstance(seg.a.x, Fraction) else 0.5
    out = []
    for pa, pb in zip(params, params[1:]):
        if float(pb) - float(pa) <= (tol if tol else 0):
            if tol or pb == pa:
                continue
        m = seg.point_at((pa + pb) * half)
        if _point_in_cycle(m, cycle, tol):
            out.append(Seg(seg.point_at(pa), seg.point_at(pb)))
    return out


# Exact unit octagon, slightly shrunk so it stays inside the unit circle.
_OCT_C = Fraction(math.floor(math.cos(math.pi / 4) * 2**48), 2**48)
_UNIT_OCTAGON: list[tuple[Fraction, Fraction]] = [
    (Fraction(1), Fraction(0)),
    (_OCT_C, _OCT_C),
    (Fraction(0), Fraction(1)),
    (-_OCT_C, _OCT_C),
    (Fraction(-1), Fraction(0)),
    (-_OCT_C, -_OCT_C),
    (Fraction(0), Fraction(-1)),
    (_OCT_C, -_OCT_C),
]
# Edge normals n_k and offsets h_k: v inside s*Oct iff dot(v, n_k) <= s * h_k.
_OCT_NORMALS: list[tuple[Fraction, Fraction, Fraction]] = []
for _k in range(8):
    _p = _UNIT_OCTAGON[_k]
    _q = _UNIT_OCTAGON[(_k + 1) % 8]
    _nx = _q[1] - _p[1]
    _ny = _p[0] - _q[0]
    _h = _p[0] * _nx + _p[1] * _ny
    _OCT_NORMALS.append((_nx, _ny, _h))


def octagon_norm_exact(dx: Fraction, dy: Fraction) -> Fraction:
    """Scaling factor putting (dx, dy) on the perturbed unit octagon."""
    best = Fraction(0)
    for nx, ny, h in _OCT_NORMALS:
        val = (dx * nx + dy * ny) / h
        if val > best:
            best = val
    return best


def octagon_ring_radii_exact(
    fading: FadingSpec, step: StepFadingSpec, max_distance: float
) -> list[Fraction]:
    """Rational snap-down of the ring radii, cap ring first."""
    floats = ring_radii(fading, step, max_distance)
    out = [Fraction(1)]
    for r in floats[1:]:
        out.append(Fraction(math.floor(r * 2**40), 2**40))
    return out


def _octagon_ring(g: Point, s: Fraction) -> list[Seg]:
    pts = [Point(g.x + s * cx, g.y + s * cy) for cx, cy in _UNIT_OCTAGON]
    return [Seg(pts[k], pts[(k + 1) % 8]) for k in range(8)]


def octagon_band_index(v: tuple[Fraction, Fraction], radii: Sequence[Fraction]) -> int:
    """Smallest ring containing v; beyond the last ring extrapolates by count."""
    n = octagon_norm_exact(v[0], v[1])
    for z, s in enumerate(radii):
        if n <= s:
            return z
    # Beyond the outermost ring: continue the geometric progression.
    return len(radii) - 1 + 1  # pragma: no cover - rings reach the diameter


# ---------------------------------------------------------------------------
# Arrangement construction
# ---------------------------------------------------------------------------


def build_fading_arrangement(
    poly: PolygonWithHoles,
    guards: Sequence[Point],
    fading: FadingSpec,
    step: StepFadingSpec,
    tol: float = GEOM_TOL,
) -> FadingArrangement:
    """Overlay of visibility polygons and per-guard fading rings.

    Rings are clipped to each guard's visibility region: outside it the
    coefficient is zero no matter the distance, so the rings carry no
    information there.
    """
    exact = step.ring_mode == "octagon"
    if exact:
        poly = poly.as_exact()
        guards = [
            Point(
                Fraction(g.x) if not isinstance(g.x, Fraction) else g.x,
                Fraction(g.y) if not isinstance(g.y, Fraction) else g.y,
            )
            for g in guards
        ]
        kernel_tol = 0
    else:
        poly = poly.as_float()
        guards = [g.as_float() for g in guards]
        kernel_tol = tol

    overlay = visibility_overlay(poly, guards, kernel_tol)
    curves = []
    for vp in overlay.vis_polygons:
        for a, b in vp.edges():
            curves.append(Seg(a, b))

    verts = poly.all_vertices()
    ring_count = 0
    oct_radii: list[list[Fraction]] = []
    for gi, g in enumerate(guards):
        dmax = max(max(dist(g, v) for v in verts), 1.0)
        cycle = overlay.vis_polygons[gi].boundary
        if not exact:
            radii = ring_radii(fading, step, dmax)
            ring_count += len(radii)
            for r in radii:
                curves.extend(_clip_circle_to_cycle(g, r, cycle, kernel_tol or GEOM_TOL))
        else:
            radii_x = octagon_ring_radii_exact(fading, step, dmax)
            oct_radii.append(radii_x)
            ring_count += len(radii_x)
            for s in radii_x:
                for e in _octagon_ring(g, s):
                    curves.extend(_clip_segment_to_cycle(e, cycle, kernel_tol))

    sub = PlanarSubdivision.build(poly, curves, kernel_tol)

    witnesses: list[Point] = []
    kinds: list[str] = []
    for p in sub.vertex_witnesses():
        witnesses.append(p)
        kinds.append("vertex")
    for p in sub.edge_witnesses():
        witnesses.append(p)
        kinds.append("edge")
    for p in sub.cell_samples():
        witnesses.append(p)
        kinds.append("face")

    rows, feasible = _witness_rows(
        poly, guards, fading, step, witnesses, oct_radii, tol
    )
    return FadingArrangement(
        sub,
        poly,
        list(guards),
        fading,
        step,
        witnesses,
        kinds,
        rows,
        ring_count,
        feasible and overlay.feasible,
        overlay,
    )


def _witness_rows(
    poly: PolygonWithHoles,
    guards: Sequence[Point],
    fading: FadingSpec,
    step: StepFadingSpec,
    witnesses: Sequence[Point],
    oct_radii: Sequence[Sequence[Fraction]],
    tol: float,
) -> tuple[list[dict[int, float]], bool]:
    arrays = PolygonArrays(poly.as_float())
    xy = np.array([[float(w.x), float(w.y)] for w in witnesses])
    nw = len(witnesses)
    ng = len(guards)
    coeff = np.zeros((nw, ng))
    base = step.base
    for gi, g in enumerate(guards):
        mask = arrays.visible_mask(g.as_float(), xy, tol)
        if step.ring_mode == "circle":
            d = np.hypot(xy[:, 0] - float(g.x), xy[:, 1] - float(g.y))
            z = band_indices(d, fading.alpha, base)
            vals = base ** (-z.astype(float))
        else:
            vals = np.empty(nw)
            radii = oct_radii[gi]
            if fading.alpha == 0:
                vals.fill(1.0)
            else:
                for wi, w in enumerate(witnesses):
                    if not mask[wi]:
                        vals[wi] = 0.0
                        continue
                    v = (w.x - g.x, w.y - g.y)
                    z = octagon_band_index(v, radii)
                    vals[wi] = base**(-z)
        coeff[:, gi] = np.where(mask, vals, 0.0)
    rows = []
    feasible = True
    for wi in range(nw):
        nz = np.nonzero(coeff[wi] > 0)[0]
        if nz.size == 0:
            feasible = False
        rows.append({int(g): float(coeff[wi, g]) for g in nz})
    return rows, feasible


def place_witnesses(arr: FadingArrangement) -> list[Point]:
    """One witness per feature: each vertex, an interior point of each edge,
    and an interior point of each face cell."""
    return list(arr.witnesses)


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------


def _dedup_rows(
    witnesses: Sequence[Point], rows: Sequence[dict[int, float]]
) -> tuple[list[Point], list[dict[int, float]]]:
    seen: dict = {}
    out_w: list[Point] = []
    out_r: list[dict[int, float]] = []
    for w, row in zip(witnesses, rows):
        key = tuple(sorted((g, round(c, 13)) for g, c in row.items()))
        if key in seen:
            continue
        seen[key] = True
        out_w.append(w)
        out_r.append(row)
    return out_w, out_r


def solve_discrete(
    poly: PolygonWithHoles,
    guards: Sequence[Point],
    fading: FadingSpec,
    step: StepFadingSpec,
    mode: str = "separation",
    max_iterations: int = 1000,
    tol: float = GEOM_TOL,
    deadline: Optional[float] = None,
    arrangement: Optional[FadingArrangement] = None,
) -> DiscreteRunReport:
    """Optimize the step-function problem exactly over the whole region.

    ``full`` solves one LP over every feature witness; ``separation`` starts
    from the visibility-overlay face witnesses and adds every insufficiently
    lit feature per round.  Both modes reach the same optimum.
    """
    if mode not in ("full", "separation"):
        raise ValueError(f"unknown mode {mode!r}")
    t0 = time.monotonic()
    arr = arrangement or build_fading_arrangement(poly, guards, fading, step, tol)
    declared = step.declared_factor(fading.alpha)
    if not arr.feasible:
        sol = Solution(IntensityAssignment({}), math.inf, "infeasible")
        v, e, f = arr.feature_counts()
        return DiscreteRunReport(
            sol, 0, 0, v, e, f, arr.ring_count, time.monotonic() - t0,
            declared, math.inf, "infeasible", mode,
        )

    wit, rows = _dedup_rows(arr.witnesses, arr.rows)
    nw = len(rows)
    ng = len(arr.guards)
    M = np.zeros((nw, ng))
    for wi, row in enumerate(rows):
        for g, c in row.items():
            M[wi, g] = c

    lp = IlluminationLP(arr.guards)
    status = "optimal"
    iterations = 0

    if mode == "full":
        for w, row in zip(wit, rows):
            lp.add_row(w, row)
        sol = solve_lp(lp)
        iterations = 1
        if sol.status != "optimal":
            status = sol.status
    else:
        face_classes = set()
        initial = []
        for ci, cell in enumerate(arr.vis_overlay.subdivision.cells):
            f = cell.face
            if f not in face_classes:
                face_classes.add(f)
                initial.append(cell.sample)
        starter_xy = {
            (round(float(p.x), 12), round(float(p.y), 12)) for p in initial
        }
        active = [
            wi
            for wi in range(nw)
            if (round(float(wit[wi].x), 12), round(float(wit[wi].y), 12))
            in starter_xy
        ]
        if not active:
            active = [0]
        in_lp = set()
        for wi in active:
            lp.add_row(wit[wi], rows[wi])
            in_lp.add(wi)
        sol = Solution(IntensityAssignment({}), math.inf, "iteration-limit")
        for iterations in range(1, max_iterations + 1):
            if deadline is not None and time.monotonic() > deadline:
                status = "limit"
                break
            sol = solve_lp(lp)
            if sol.status != "optimal":
                status = sol.status
                break
            xvec = np.array([sol.intensities.value(g) for g in range(ng)])
            light = M @ xvec
            violated = np.nonzero(light < 1.0 - 1e-9)[0]
            new = [int(wi) for wi in violated if int(wi) not in in_lp]
            if not new:
                break
            for wi in new:
                lp.add_row(wit[wi], rows[wi])
                in_lp.add(wi)
        else:
            status = "iteration-limit"

    v, e, f = arr.feature_counts()
    lower = sol.objective / declared if math.isfinite(sol.objective) else math.inf
    return DiscreteRunReport(
        sol,
        iterations,
        len(lp.rows),
        v,
        e,
        f,
        arr.ring_count,
        time.monotonic() - t0,
        declared,
        lower,
        status,
        mode,
    )
