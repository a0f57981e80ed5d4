"""Visibility polygons and guard-visibility overlays.

Visibility is segment-interior: two points see each other iff the open
segment between them never crosses into the exterior.  Grazing contact along
walls or past vertices counts as visible, so vertex guards cover their
incident edges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .geom import (
    GEOM_TOL,
    PlanarSubdivision,
    Point,
    PolygonWithHoles,
    Seg,
    _point_in_cycle,
    dist2,
    proper_crossing,
    seg_seg_events,
    signed_area,
)


@dataclass(frozen=True)
class VisibilityPolygon:
    """Star-shaped region of points visible from the apex."""

    apex: Point
    boundary: tuple[Point, ...]

    def contains(self, q: Point, tol=GEOM_TOL) -> bool:
        return _point_in_cycle(q, self.boundary, tol)

    def area(self):
        return abs(signed_area(self.boundary))

    def edges(self) -> list[tuple[Point, Point]]:
        n = len(self.boundary)
        return [(self.boundary[i], self.boundary[(i + 1) % n]) for i in range(n)]


@dataclass
class VisibilityOverlay:
    """Overlay of all guards' visibility regions with per-face guard labels."""

    subdivision: PlanarSubdivision
    guards: list[Point]
    vis_polygons: list[VisibilityPolygon]
    feasible: bool


def _pseudo_angle(dx, dy):
    """Monotone proxy for atan2 in [0, 4); exact for rational inputs."""
    ax, ay = abs(dx), abs(dy)
    if ax + ay == 0:
        raise ValueError("zero direction")
    s = ay / (ax + ay)
    if dx >= 0 and dy >= 0:
        return s
    if dx < 0 and dy >= 0:
        return 2 - s
    if dx < 0 and dy < 0:
        return 2 + s
    return 4 - s


def _between_ccw(pa1, pam, pa2) -> bool:
    if pa1 < pa2:
        return pa1 < pam < pa2
    return pam > pa1 or pam < pa2


def _mid_direction(d1, d2, pa1, pa2):
    """A direction strictly inside the CCW angular interval (d1, d2)."""
    exact = isinstance(d1[0], Fraction)

    def scaled_unit(d):
        n = math.hypot(float(d[0]), float(d[1]))
        if exact:
            f = Fraction(1 / n).limit_denominator(10**9) if n != 0 else Fraction(0)
            return (d[0] * f, d[1] * f)
        return (d[0] / n, d[1] / n)

    u1 = scaled_unit(d1)
    u2 = scaled_unit(d2)
    candidates = [
        (u1[0] + u2[0], u1[1] + u2[1]),
        (-u1[1], u1[0]),
        (-u2[1] - u1[1], u2[0] + u1[0]),
        (u2[0] - u1[0], u2[1] - u1[1]),
    ]
    for m in candidates:
        if m[0] == 0 and m[1] == 0:
            continue
        pam = _pseudo_angle(m[0], m[1])
        if _between_ccw(pa1, pam, pa2):
            return m
    raise RuntimeError("could not bisect angular interval")


def _ray_nearest(p: Point, d, edges, tol) -> Optional[tuple[float, int]]:
    """Nearest strictly-positive hit of ray p + t*d on the edge list.

    Edges collinear with the ray and hits at the ray origin are skipped, so
    grazing contact never blocks.
    """
    best_t = None
    best_e = -1
    dn = math.hypot(float(d[0]), float(d[1]))
    for ei, (u, v) in enumerate(edges):
        ex, ey = v.x - u.x, v.y - u.y
        den = d[0] * ey - d[1] * ex
        en = math.hypot(float(ex), float(ey))
        if abs(float(den)) <= tol * dn * en:
            continue
        wx, wy = u.x - p.x, u.y - p.y
        t = (wx * ey - wy * ex) / den
        s = (wx * d[1] - wy * d[0]) / den
        stol = tol / max(en, 1e-30) if tol else 0
        ttol = (tol / max(dn, 1e-30)) if tol else 0
        if t <= ttol * 4:
            continue
        if -stol * 4 <= s <= 1 + stol * 4:
            tf = float(t)
            if best_t is None or tf < best_t:
                best_t = tf
                best_e = ei
    if best_t is None:
        return None
    return best_t, best_e


def _ray_edge_point(p: Point, d, edge, tol) -> Point:
    """Hit of ray p + t*d on an edge's supporting line, clamped to the edge."""
    u, v = edge
    ex, ey = v.x - u.x, v.y - u.y
    den = d[0] * ey - d[1] * ex
    if den == 0:
        return u
    wx, wy = u.x - p.x, u.y - p.y
    s = (wx * d[1] - wy * d[0]) / den
    if s < 0:
        s = 0 * s
    elif s > 1:
        s = 1 + 0 * s
    return Point(u.x + s * ex, u.y + s * ey)


def visibility_polygon(
    poly: PolygonWithHoles, p: Point, tol=GEOM_TOL
) -> VisibilityPolygon:
    """Visibility region of ``p`` by angular sweep over vertex directions.

    Between two consecutive vertex directions the nearest boundary edge
    cannot change, so one ray cast per interval identifies the visible edge
    and the event rays delimit its visible span.
    """
    if not poly.contains(p, max(tol, 1e-12) if tol else 0):
        raise ValueError("apex lies outside the polygon")
    edges = poly.edge_list()

    dirs: dict = {}
    for v in poly.all_vertices():
        dx, dy = v.x - p.x, v.y - p.y
        if dx == 0 and dy == 0:
            continue
        pa = _pseudo_angle(dx, dy)
        key = float(pa)
        if key not in dirs:
            dirs[key] = (pa, (dx, dy))
    events = [dirs[k] for k in sorted(dirs)]
    if len(events) < 2:
        raise ValueError("degenerate polygon: all vertices in one direction")

    m = len(events)
    contributions: list[Optional[tuple[Point, int, Point]]] = []
    for k in range(m):
        pa1, d1 = events[k]
        pa2, d2 = events[(k + 1) % m]
        dm = _mid_direction(d1, d2, pa1, pa2)
        hit = _ray_nearest(p, dm, edges, tol)
        if hit is None:
            contributions.append(None)
            continue
        t, eid = hit
        dn = math.hypot(float(dm[0]), float(dm[1]))
        half = Point(
            p.x + dm[0] * (t / 2), p.y + dm[1] * (t / 2)
        )
        probe = half if t * dn > 4 * tol else Point(
            p.x + dm[0] * (t / 2), p.y + dm[1] * (t / 2)
        )
        if not poly.contains(probe, tol):
            contributions.append(None)
            continue
        A = _ray_edge_point(p, d1, edges[eid], tol)
        B = _ray_edge_point(p, d2, edges[eid], tol)
        contributions.append((A, eid, B))

    boundary: list[Point] = []
    merge_tol2 = (4 * tol) ** 2 if tol else 0

    def push(q: Point):
        if boundary and float(dist2(boundary[-1], q)) <= merge_tol2:
            return
        boundary.append(q)

    for k in range(m):
        contrib = contributions[k]
        if contrib is None:
            push(p)
        else:
            A, _, B = contrib
            push(A)
            push(B)
    if len(boundary) > 1 and float(dist2(boundary[0], boundary[-1])) <= merge_tol2:
        boundary.pop()
    if len(boundary) < 3:
        raise RuntimeError("degenerate visibility polygon")
    if float(signed_area(boundary)) < 0:
        boundary.reverse()
    return VisibilityPolygon(p, tuple(boundary))


# ---------------------------------------------------------------------------
# Pairwise visibility oracles
# ---------------------------------------------------------------------------


def sees(poly: PolygonWithHoles, a: Point, b: Point, tol=GEOM_TOL) -> bool:
    """Exhaustive segment-interior visibility test.

    Checks every proper edge crossing and then verifies that each maximal
    contact-free stretch of the sight segment stays inside the closed region.
    """
    if a.x == b.x and a.y == b.y:
        return poly.contains(a, tol)
    edges = poly.edge_list()
    for u, v in edges:
        if proper_crossing(a, b, u, v, tol):
            return False
    ts = {0.0, 1.0}
    for u, v in edges:
        for t, _ in seg_seg_events(a, b, u, v, tol):
            ts.add(min(max(float(t), 0.0), 1.0))
    params = sorted(ts)
    for t1, t2 in zip(params, params[1:]):
        if t2 - t1 <= 1e-15:
            continue
        tm = (t1 + t2) / 2
        q = Point(a.x + (b.x - a.x) * tm, a.y + (b.y - a.y) * tm)
        if not poly.contains(q, tol):
            return False
    return True


class PolygonArrays:
    """Cached edge arrays of a polygon for vectorized queries."""

    def __init__(self, poly: PolygonWithHoles):
        self.poly = poly
        edges = poly.edge_list()
        self.ux = np.array([float(u.x) for u, _ in edges])
        self.uy = np.array([float(u.y) for u, _ in edges])
        self.vx = np.array([float(v.x) for _, v in edges])
        self.vy = np.array([float(v.y) for _, v in edges])
        self.elen = np.hypot(self.vx - self.ux, self.vy - self.uy)

    def contains_mask(self, xy: np.ndarray, tol=GEOM_TOL) -> np.ndarray:
        """Closed containment for an (m, 2) array of query points."""
        qx = xy[:, 0][:, None]
        qy = xy[:, 1][:, None]
        ux, uy, vx, vy = self.ux[None], self.uy[None], self.vx[None], self.vy[None]
        cond = (uy > qy) != (vy > qy)
        with np.errstate(divide="ignore", invalid="ignore"):
            xs = ux + (qy - uy) * (vx - ux) / np.where(vy == uy, 1.0, vy - uy)
        crossed = cond & (qx < xs)
        inside = (crossed.sum(axis=1) % 2).astype(bool)
        # Boundary points count as inside.
        ex = vx - ux
        ey = vy - uy
        len2 = np.maximum(ex * ex + ey * ey, 1e-300)
        t = ((qx - ux) * ex + (qy - uy) * ey) / len2
        t = np.clip(t, 0.0, 1.0)
        dx = qx - (ux + t * ex)
        dy = qy - (uy + t * ey)
        on_edge = (dx * dx + dy * dy) <= tol * tol
        return inside | on_edge.any(axis=1)

    def visible_mask(self, g: Point, xy: np.ndarray, tol=GEOM_TOL) -> np.ndarray:
        """Visibility of each point in ``xy`` from ``g``.

        A sight segment is blocked iff it crosses some edge transversally
        (strict sign test, so grazing passes) or its midpoint leaves the
        region.  Matches :func:`sees` away from degenerate double-grazing
        configurations.
        """
        gx, gy = float(g.x), float(g.y)
        qx = xy[:, 0][:, None]
        qy = xy[:, 1][:, None]
        ux, uy, vx, vy = self.ux[None], self.uy[None], self.vx[None], self.vy[None]
        d1 = (qx - gx) * (uy - gy) - (qy - gy) * (ux - gx)
        d2 = (qx - gx) * (vy - gy) - (qy - gy) * (vx - gx)
        d3 = (vx - ux) * (gy - uy) - (vy - uy) * (gx - ux)
        d4 = (vx - ux) * (qy - uy) - (vy - uy) * (qx - ux)
        sight_len = np.hypot(qx - gx, qy - gy)
        e1 = tol * np.maximum(sight_len, 1e-300)
        e2 = tol * np.maximum(self.elen[None], 1e-300)
        cross12 = ((d1 < -e1) & (d2 > e1)) | ((d1 > e1) & (d2 < -e1))
        cross34 = ((d3 < -e2) & (d4 > e2)) | ((d3 > e2) & (d4 < -e2))
        blocked = (cross12 & cross34).any(axis=1)
        mid = np.column_stack([(xy[:, 0] + gx) / 2, (xy[:, 1] + gy) / 2])
        return (~blocked) & self.contains_mask(mid, tol)


def visibility_overlay(
    poly: PolygonWithHoles, guards: Sequence[Point], tol=GEOM_TOL
) -> VisibilityOverlay:
    """Overlay of all guards' visibility polygons with guard-set labels."""
    for g in guards:
        if not poly.contains(g, max(tol, 1e-12) if tol else 0):
            raise ValueError("guard lies outside the polygon")
    vis_polys = [visibility_polygon(poly, g, tol) for g in guards]
    curves = []
    for vp in vis_polys:
        for a, b in vp.edges():
            curves.append(Seg(a, b))
    sub = PlanarSubdivision.build(poly, curves, tol)

    arrays = PolygonArrays(poly.as_float() if tol else poly)
    samples = sub.cell_samples()
    if samples:
        xy = np.array([[float(q.x), float(q.y)] for q in samples])
        masks = np.stack(
            [arrays.visible_mask(g, xy, tol or GEOM_TOL) for g in guards]
        )
        per_sample = [
            frozenset(int(gi) for gi in np.nonzero(masks[:, si])[0])
            for si in range(len(samples))
        ]
        if sub.segments_only:
            per_face: dict[int, frozenset] = {}
            for ci, cell in enumerate(sub.cells):
                if cell.face not in per_face:
                    per_face[cell.face] = per_sample[ci]
                cell.label = per_face[cell.face]
        else:  # pragma: no cover - visibility overlays are segment-only
            for ci, cell in enumerate(sub.cells):
                cell.label = per_sample[ci]
    feasible = all(cell.label for cell in sub.cells)
    return VisibilityOverlay(sub, list(guards), vis_polys, feasible)
