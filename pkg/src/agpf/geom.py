"""Planar geometry kernel.

Two arithmetic modes share one code path: double precision (``tol`` around
1e-9 for incidence decisions) and exact rationals (``fractions.Fraction``
coordinates with ``tol=0``).  Predicates never take square roots, so the
exact mode stays exact; distances are reported as floats.
"""
from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

GEOM_TOL = 1e-9


@dataclass(frozen=True, order=True)
class Point:
    x: float | Fraction
    y: float | Fraction

    def as_float(self) -> "Point":
        return Point(float(self.x), float(self.y))

    def __iter__(self):
        yield self.x
        yield self.y


def cross(o: Point, a: Point, b: Point):
    """Twice the signed area of triangle (o, a, b)."""
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)


def dot(o: Point, a: Point, b: Point):
    return (a.x - o.x) * (b.x - o.x) + (a.y - o.y) * (b.y - o.y)


def dist2(a: Point, b: Point):
    return (a.x - b.x) ** 2 + (a.y - b.y) ** 2


def dist(a: Point, b: Point) -> float:
    return math.sqrt(float(dist2(a, b)))


def midpoint(a: Point, b: Point) -> Point:
    half = Fraction(1, 2) if isinstance(a.x, Fraction) else 0.5
    return Point((a.x + b.x) * half, (a.y + b.y) * half)


def signed_area(cycle: Sequence[Point]):
    """Shoelace area of a closed cycle; positive means counterclockwise."""
    if len(cycle) < 3:
        raise ValueError("a cycle needs at least 3 points")
    acc = 0
    n = len(cycle)
    for i in range(n):
        a = cycle[i]
        b = cycle[(i + 1) % n]
        acc += a.x * b.y - b.x * a.y
    half = Fraction(1, 2) if isinstance(acc, Fraction) else 0.5
    return acc * half


def _on_segment(p: Point, a: Point, b: Point, tol) -> bool:
    """p lies on segment ab (within tol, measured as distance)."""
    c = cross(a, b, p)
    ab2 = dist2(a, b)
    if ab2 == 0:
        return dist2(a, p) <= tol * tol
    if c * c > tol * tol * ab2:
        return False
    t = dot(a, b, p)
    return -tol * tol * ab2 <= t and t <= ab2 * (1 + tol) + tol * tol


def seg_seg_events(a: Point, b: Point, c: Point, d: Point, tol):
    """Intersection events between segments ab and cd.

    Returns a list of (t, u) parameter pairs (t on ab, u on cd).  Collinear
    overlaps produce events at the overlap endpoints.
    """
    r = (b.x - a.x, b.y - a.y)
    s = (d.x - c.x, d.y - c.y)
    denom = r[0] * s[1] - r[1] * s[0]
    acx, acy = c.x - a.x, c.y - a.y
    cross_ac_r = acx * r[1] - acy * r[0]
    scale_ref = max(abs(r[0]) + abs(r[1]), abs(s[0]) + abs(s[1]), 1)
    if abs(denom) <= tol * scale_ref * scale_ref:
        if abs(cross_ac_r) > tol * scale_ref:
            return []
        # Collinear: emit each endpoint projected onto the other segment.
        r2 = r[0] * r[0] + r[1] * r[1]
        s2 = s[0] * s[0] + s[1] * s[1]
        events = []
        if r2 != 0:
            for q, u in ((c, 0), (d, 1)):
                t = ((q.x - a.x) * r[0] + (q.y - a.y) * r[1]) / r2
                if -tol <= t <= 1 + tol:
                    events.append((_clamp01(t), u))
        if s2 != 0:
            for q, t in ((a, 0), (b, 1)):
                u = ((q.x - c.x) * s[0] + (q.y - c.y) * s[1]) / s2
                if -tol <= u <= 1 + tol:
                    events.append((t, _clamp01(u)))
        return events
    t = (acx * s[1] - acy * s[0]) / denom
    u = cross_ac_r / denom
    if -tol <= t <= 1 + tol and -tol <= u <= 1 + tol:
        return [(_clamp01(t), _clamp01(u))]
    return []


def _clamp01(t):
    if t < 0:
        return 0 * t
    if t > 1:
        return 1 + 0 * t
    return t


def proper_crossing(a: Point, b: Point, c: Point, d: Point, tol) -> bool:
    """True iff open segments ab and cd cross transversally.

    Contacts at endpoints or grazing touches do not count; this implements
    the convention that sight lines may graze vertices and walls.
    """
    d1 = cross(a, b, c)
    d2 = cross(a, b, d)
    d3 = cross(c, d, a)
    d4 = cross(c, d, b)
    if tol:
        e1 = tol * math.sqrt(float(dist2(a, b)))
        e2 = tol * math.sqrt(float(dist2(c, d)))
    else:
        e1 = e2 = 0
    return (
        ((d1 < -e1 and d2 > e1) or (d1 > e1 and d2 < -e1))
        and ((d3 < -e2 and d4 > e2) or (d3 > e2 and d4 < -e2))
    )


def _cycle_is_simple(cycle: Sequence[Point], tol) -> bool:
    n = len(cycle)
    for i in range(n):
        a, b = cycle[i], cycle[(i + 1) % n]
        if dist2(a, b) == 0:
            return False
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            c, d = cycle[j], cycle[(j + 1) % n]
            if proper_crossing(a, b, c, d, tol):
                return False
            if seg_seg_events(a, b, c, d, tol):
                return False
    return True


@dataclass(frozen=True)
class PolygonWithHoles:
    """A region bounded by a CCW outer cycle minus CW hole cycles."""

    outer: tuple[Point, ...]
    holes: tuple[tuple[Point, ...], ...] = ()

    @staticmethod
    def create(
        outer: Sequence[Point],
        holes: Sequence[Sequence[Point]] = (),
        tol=GEOM_TOL,
        validate: bool = True,
    ) -> "PolygonWithHoles":
        poly = PolygonWithHoles(tuple(outer), tuple(tuple(h) for h in holes))
        if validate:
            poly.validate(tol)
        return poly

    def validate(self, tol=GEOM_TOL) -> None:
        if len(self.outer) < 3:
            raise ValueError("outer cycle needs at least 3 vertices")
        if signed_area(self.outer) <= 0:
            raise ValueError("outer cycle must be counterclockwise")
        if not _cycle_is_simple(self.outer, tol):
            raise ValueError("outer cycle is not simple")
        for k, h in enumerate(self.holes):
            if len(h) < 3:
                raise ValueError(f"hole {k} needs at least 3 vertices")
            if signed_area(h) >= 0:
                raise ValueError(f"hole {k} must be clockwise")
            if not _cycle_is_simple(h, tol):
                raise ValueError(f"hole {k} is not simple")
            for v in h:
                if not _point_in_cycle(v, self.outer, tol):
                    raise ValueError(f"hole {k} is not inside the outer cycle")
        cycles = [self.outer, *self.holes]
        for i in range(len(cycles)):
            for j in range(i + 1, len(cycles)):
                for a, b in _cycle_edges(cycles[i]):
                    for c, d in _cycle_edges(cycles[j]):
                        if proper_crossing(a, b, c, d, tol):
                            raise ValueError("boundary cycles intersect")

    # -- queries ---------------------------------------------------------

    def all_vertices(self) -> list[Point]:
        pts = list(self.outer)
        for h in self.holes:
            pts.extend(h)
        return pts

    def edge_list(self) -> list[tuple[Point, Point]]:
        edges = list(_cycle_edges(self.outer))
        for h in self.holes:
            edges.extend(_cycle_edges(h))
        return edges

    def n_vertices(self) -> int:
        return len(self.outer) + sum(len(h) for h in self.holes)

    def bbox(self) -> tuple[float, float, float, float]:
        xs = [float(p.x) for p in self.outer]
        ys = [float(p.y) for p in self.outer]
        return min(xs), min(ys), max(xs), max(ys)

    def area(self):
        a = signed_area(self.outer)
        for h in self.holes:
            a += signed_area(h)  # holes are CW, negative contribution
        return a

    def contains(self, q: Point, tol=GEOM_TOL) -> bool:
        """Closed containment: boundary points count as inside."""
        for a, b in self.edge_list():
            if _on_segment(q, a, b, tol if tol else 0):
                return True
        if not _point_in_cycle(q, self.outer, tol):
            return False
        for h in self.holes:
            if _point_in_cycle(q, h, tol):
                return False
        return True

    def as_float(self) -> "PolygonWithHoles":
        return PolygonWithHoles(
            tuple(p.as_float() for p in self.outer),
            tuple(tuple(p.as_float() for p in h) for h in self.holes),
        )

    def as_exact(self, max_denominator: int = 10**12) -> "PolygonWithHoles":
        def conv(p: Point) -> Point:
            if isinstance(p.x, Fraction) and isinstance(p.y, Fraction):
                return p
            return Point(
                Fraction(p.x).limit_denominator(max_denominator),
                Fraction(p.y).limit_denominator(max_denominator),
            )

        return PolygonWithHoles(
            tuple(conv(p) for p in self.outer),
            tuple(tuple(conv(p) for p in h) for h in self.holes),
        )


def _cycle_edges(cycle: Sequence[Point]):
    n = len(cycle)
    for i in range(n):
        yield cycle[i], cycle[(i + 1) % n]


def _point_in_cycle(q: Point, cycle: Sequence[Point], tol) -> bool:
    """Even-odd test against one cycle (orientation-agnostic)."""
    inside = False
    n = len(cycle)
    for i in range(n):
        a, b = cycle[i], cycle[(i + 1) % n]
        if _on_segment(q, a, b, tol if tol else 0):
            return True
        if (a.y > q.y) != (b.y > q.y):
            xs = a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y)
            if q.x < xs:
                inside = not inside
    return inside


def diameter(poly: PolygonWithHoles) -> float:
    """Maximum pairwise vertex distance (attained at vertices for polygons)."""
    pts = poly.all_vertices()
    best = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = float(dist2(pts[i], pts[j]))
            if d > best:
                best = d
    return math.sqrt(best)


def average_edge_length(poly: PolygonWithHoles) -> float:
    total = 0.0
    count = 0
    for a, b in poly.edge_list():
        total += dist(a, b)
        count += 1
    return total / count


def scale(poly: PolygonWithHoles, factor) -> PolygonWithHoles:
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    return PolygonWithHoles(
        tuple(Point(p.x * factor, p.y * factor) for p in poly.outer),
        tuple(
            tuple(Point(p.x * factor, p.y * factor) for p in h) for h in poly.holes
        ),
    )


# ---------------------------------------------------------------------------
# Triangles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Triangle:
    v0: Point
    v1: Point
    v2: Point

    @property
    def vertices(self) -> tuple[Point, Point, Point]:
        return (self.v0, self.v1, self.v2)

    def area(self):
        a = cross(self.v0, self.v1, self.v2)
        half = Fraction(1, 2) if isinstance(a, Fraction) else 0.5
        return abs(a * half)

    def longest_edge(self) -> tuple[int, float]:
        """Index i of the longest edge (v_i, v_{i+1}); lexicographic ties."""
        vs = self.vertices
        keys = []
        for i in range(3):
            a, b = vs[i], vs[(i + 1) % 3]
            ln = float(dist2(a, b))
            keys.append((-ln, min(a, b), max(a, b), i))
        keys.sort()
        return keys[0][3], math.sqrt(-keys[0][0])

    def bisect_longest(self) -> tuple["Triangle", "Triangle", Point]:
        """Split at the midpoint of the longest edge; returns children + midpoint."""
        i, _ = self.longest_edge()
        vs = self.vertices
        a, b, c = vs[i], vs[(i + 1) % 3], vs[(i + 2) % 3]
        m = midpoint(a, b)
        return Triangle(a, m, c), Triangle(m, b, c), m

    def sample_grid(self, k: int) -> list[Point]:
        """Barycentric grid with k subdivisions per edge, vertices included."""
        pts = []
        for i in range(k + 1):
            for j in range(k + 1 - i):
                u = i / k
                v = j / k
                w = 1.0 - u - v
                pts.append(
                    Point(
                        u * float(self.v0.x) + v * float(self.v1.x) + w * float(self.v2.x),
                        u * float(self.v0.y) + v * float(self.v1.y) + w * float(self.v2.y),
                    )
                )
        return pts


# ---------------------------------------------------------------------------
# Triangulation of a polygon with holes (ear clipping after hole bridging)
# ---------------------------------------------------------------------------


def _bridge_holes(outer: Sequence[Point], holes: Sequence[Sequence[Point]], tol):
    """Merge hole cycles into the outer cycle via mutually visible bridges."""
    cycle = list(outer)
    remaining = sorted(
        (list(h) for h in holes),
        key=lambda h: -max(float(p.x) for p in h),
    )
    all_edges = [tuple(e) for e in _cycle_edges(outer)]
    for h in holes:
        all_edges.extend(tuple(e) for e in _cycle_edges(h))

    def bridge_ok(p: Point, q: Point) -> bool:
        if dist2(p, q) == 0:
            return False
        for a, b in all_edges:
            if proper_crossing(p, q, a, b, tol):
                return False
        m = midpoint(p, q)
        if not _point_in_cycle(m, outer, tol):
            return False
        for h in holes:
            if _point_in_cycle(m, h, tol) and not any(
                _on_segment(m, a, b, tol) for a, b in _cycle_edges(h)
            ):
                return False
        return True

    for hole in remaining:
        pairs = []
        for hi, hv in enumerate(hole):
            for ci, cv in enumerate(cycle):
                pairs.append((float(dist2(hv, cv)), hi, ci))
        pairs.sort(key=lambda t: t[0])
        for _, hi, ci in pairs:
            hv, cv = hole[hi], cycle[ci]
            if bridge_ok(hv, cv):
                rotated = hole[hi:] + hole[:hi]
                cycle = (
                    cycle[: ci + 1]
                    + rotated
                    + [rotated[0], cycle[ci]]
                    + cycle[ci + 1 :]
                )
                all_edges.append((hv, cv))
                break
        else:
            raise ValueError("could not bridge hole into outer cycle")
    return cycle


def triangulate_face(
    outer: Sequence[Point],
    holes: Sequence[Sequence[Point]] = (),
    tol=GEOM_TOL,
) -> list[Triangle]:
    """Partition a face (CCW outer cycle, CW holes) into triangles.

    Degenerate (zero-area) faces yield an empty list.
    """
    if len(outer) < 3:
        return []
    scale_ref = max((abs(float(p.x)) + abs(float(p.y)) for p in outer), default=1.0)
    scale_ref = max(scale_ref, 1.0)
    eps_area = tol * scale_ref * scale_ref if tol else 0
    if abs(float(signed_area(outer))) <= eps_area:
        return []
    cycle = list(outer)
    if holes:
        cycle = _bridge_holes(outer, holes, tol)

    cleaned: list[Point] = []
    for p in cycle:
        if not cleaned or dist2(cleaned[-1], p) > 0:
            cleaned.append(p)
    if len(cleaned) > 1 and dist2(cleaned[0], cleaned[-1]) == 0:
        cleaned.pop()
    cycle = cleaned

    triangles: list[Triangle] = []

    def same_pt(p: Point, q: Point) -> bool:
        return p.x == q.x and p.y == q.y

    def is_ear(i: int) -> bool:
        n = len(cycle)
        a, b, c = cycle[i - 1], cycle[i], cycle[(i + 1) % n]
        if cross(a, b, c) <= eps_area:
            return False
        for p in cycle:
            if same_pt(p, a) or same_pt(p, b) or same_pt(p, c):
                continue
            if (
                cross(a, b, p) > eps_area
                and cross(b, c, p) > eps_area
                and cross(c, a, p) > eps_area
            ):
                return False
        # The diagonal a-c must stay inside the (possibly pinched) cycle.
        for j in range(n):
            u, v = cycle[j], cycle[(j + 1) % n]
            if proper_crossing(a, c, u, v, tol):
                return False
        m = midpoint(a, c)
        if not _point_in_cycle(m, cycle, tol):
            return False
        return True

    guard = 0
    max_steps = 10 * (len(cycle) + 4) ** 2
    while len(cycle) > 3:
        n = len(cycle)
        clipped = False
        for i in range(n):
            if is_ear(i):
                a, b, c = cycle[i - 1], cycle[i], cycle[(i + 1) % n]
                triangles.append(Triangle(a, b, c))
                del cycle[i]
                clipped = True
                break
        if not clipped:
            flattest = min(
                range(n),
                key=lambda i: abs(
                    float(cross(cycle[i - 1], cycle[i], cycle[(i + 1) % n]))
                ),
            )
            del cycle[flattest]
        guard += 1
        if guard > max_steps:
            raise RuntimeError("ear clipping failed to terminate")
    if len(cycle) == 3:
        t = Triangle(*cycle)
        if float(t.area()) > eps_area:
            triangles.append(t)
    return triangles


# ---------------------------------------------------------------------------
# Curves for subdivisions: segments and circular arcs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Seg:
    a: Point
    b: Point

    def point_at(self, t):
        return Point(
            self.a.x + t * (self.b.x - self.a.x),
            self.a.y + t * (self.b.y - self.a.y),
        )

    def bbox(self):
        return (
            min(float(self.a.x), float(self.b.x)),
            min(float(self.a.y), float(self.b.y)),
            max(float(self.a.x), float(self.b.x)),
            max(float(self.a.y), float(self.b.y)),
        )


TWO_PI = 2 * math.pi


def _norm_angle(t: float) -> float:
    t = math.fmod(t, TWO_PI)
    return t + TWO_PI if t < 0 else t


@dataclass(frozen=True)
class Arc:
    """CCW circular arc from angle a0 to a1 (a0 < a1 <= a0 + 2*pi)."""

    cx: float
    cy: float
    r: float
    a0: float
    a1: float

    def point_at(self, theta: float) -> Point:
        return Point(
            self.cx + self.r * math.cos(theta), self.cy + self.r * math.sin(theta)
        )

    def contains_angle(self, theta: float, tol_ang: float = 1e-12) -> bool:
        t = _norm_angle(theta)
        lo = _norm_angle(self.a0)
        d = t - lo
        if d < -tol_ang:
            d += TWO_PI
        return d <= (self.a1 - self.a0) + tol_ang

    def angle_param(self, theta: float) -> float:
        """Map an absolute angle into the arc's [a0, a1] parameter range."""
        t = _norm_angle(theta)
        lo = _norm_angle(self.a0)
        d = t - lo
        if d < 0:
            d += TWO_PI
        return self.a0 + d

    def bbox(self):
        xs = [float(self.point_at(self.a0).x), float(self.point_at(self.a1).x)]
        ys = [float(self.point_at(self.a0).y), float(self.point_at(self.a1).y)]
        for k in range(-2, 9):
            ang = k * math.pi / 2
            if self.contains_angle(ang):
                p = self.point_at(ang)
                xs.append(float(p.x))
                ys.append(float(p.y))
        return (min(xs), min(ys), max(xs), max(ys))


Curve = Seg | Arc


def _seg_arc_events(seg: Seg, arc: Arc, tol):
    """Intersections as (t on seg, theta param on arc)."""
    ax, ay = float(seg.a.x), float(seg.a.y)
    dx, dy = float(seg.b.x) - ax, float(seg.b.y) - ay
    fx, fy = ax - arc.cx, ay - arc.cy
    A = dx * dx + dy * dy
    if A == 0:
        return []
    B = 2 * (fx * dx + fy * dy)
    C = fx * fx + fy * fy - arc.r * arc.r
    disc = B * B - 4 * A * C
    if disc < 0:
        return []
    sq = math.sqrt(max(disc, 0.0))
    out = []
    for t in ((-B - sq) / (2 * A), (-B + sq) / (2 * A)):
        if -tol <= t <= 1 + tol:
            px, py = ax + t * dx, ay + t * dy
            theta = math.atan2(py - arc.cy, px - arc.cx)
            if arc.contains_angle(theta, tol_ang=tol / max(arc.r, 1e-30) + 1e-12):
                out.append((min(max(t, 0.0), 1.0), arc.angle_param(theta)))
    if len(out) == 2 and abs(out[0][0] - out[1][0]) <= tol:
        out = out[:1]  # tangential double root
    return out


def _arc_arc_events(a1: Arc, a2: Arc, tol):
    dx, dy = a2.cx - a1.cx, a2.cy - a1.cy
    d2 = dx * dx + dy * dy
    if d2 == 0:
        return []  # concentric rings never cross
    d = math.sqrt(d2)
    if d > a1.r + a2.r + tol or d < abs(a1.r - a2.r) - tol:
        return []
    a = (d2 + a1.r * a1.r - a2.r * a2.r) / (2 * d)
    h2 = a1.r * a1.r - a * a
    h = math.sqrt(max(h2, 0.0))
    mx, my = a1.cx + a * dx / d, a1.cy + a * dy / d
    pts = [(mx + h * dy / d, my - h * dx / d)]
    if h > tol:
        pts.append((mx - h * dy / d, my + h * dx / d))
    out = []
    for px, py in pts:
        t1 = math.atan2(py - a1.cy, px - a1.cx)
        t2 = math.atan2(py - a2.cy, px - a2.cx)
        e = tol / max(min(a1.r, a2.r), 1e-30) + 1e-12
        if a1.contains_angle(t1, e) and a2.contains_angle(t2, e):
            out.append((a1.angle_param(t1), a2.angle_param(t2)))
    return out


# ---------------------------------------------------------------------------
# PlanarSubdivision: noded arrangement with vertical-slab cells
# ---------------------------------------------------------------------------


class _VertexPool:
    """Deduplicates vertices; float mode snaps within tol on a grid."""

    def __init__(self, tol):
        self.tol = tol
        self.points: list[Point] = []
        self._index: dict = {}

    def add(self, x, y) -> int:
        if self.tol == 0:
            k = (x, y)
            i = self._index.get(k)
            if i is None:
                i = len(self.points)
                self.points.append(Point(x, y))
                self._index[k] = i
            return i
        kx = round(float(x) / self.tol)
        ky = round(float(y) / self.tol)
        for nx in (kx - 1, kx, kx + 1):
            for ny in (ky - 1, ky, ky + 1):
                i = self._index.get((nx, ny))
                if i is not None:
                    p = self.points[i]
                    if (
                        abs(float(p.x) - float(x)) <= 2 * self.tol
                        and abs(float(p.y) - float(y)) <= 2 * self.tol
                    ):
                        return i
        i = len(self.points)
        self.points.append(Point(x, y))
        self._index[(kx, ky)] = i
        return i


@dataclass
class Piece:
    """A sub-curve of the noded arrangement between two pool vertices."""

    curve: Curve
    va: int
    vb: int
    pa: float
    pb: float
    mid: Point

    def is_seg(self) -> bool:
        return isinstance(self.curve, Seg)

    def endpoints(self):
        return self.curve.point_at(self.pa), self.curve.point_at(self.pb)

    def xspan(self):
        if isinstance(self.curve, Seg):
            p0, p1 = self.endpoints()
            return min(p0.x, p1.x), max(p0.x, p1.x)
        b = self.sub_bbox()
        return b[0], b[2]

    def sub_bbox(self):
        c = self.curve
        if isinstance(c, Seg):
            p0, p1 = self.endpoints()
            return (
                min(float(p0.x), float(p1.x)),
                min(float(p0.y), float(p1.y)),
                max(float(p0.x), float(p1.x)),
                max(float(p0.y), float(p1.y)),
            )
        sub = Arc(c.cx, c.cy, c.r, self.pa, self.pb)
        return sub.bbox()

    def y_branches_at(self, x) -> list:
        """y-values of this piece on the vertical line at x (0, 1 or 2)."""
        c = self.curve
        if isinstance(c, Seg):
            p0, p1 = self.endpoints()
            x0, y0, x1, y1 = p0.x, p0.y, p1.x, p1.y
            if x0 == x1:
                return []
            if not (min(x0, x1) <= x <= max(x0, x1)):
                return []
            t = (x - x0) / (x1 - x0)
            return [y0 + t * (y1 - y0)]
        ys = []
        dx = float(x) - c.cx
        if abs(dx) > c.r:
            return []
        h = math.sqrt(max(c.r * c.r - dx * dx, 0.0))
        for yy, theta in (
            (c.cy + h, math.atan2(h, dx)),
            (c.cy - h, math.atan2(-h, dx)),
        ):
            tp = c.angle_param(theta)
            if self.pa - 1e-12 <= tp <= self.pb + 1e-12:
                ys.append(yy)
        if len(ys) == 2 and abs(ys[0] - ys[1]) < 1e-15:
            ys = ys[:1]
        return ys


@dataclass
class Cell:
    """One slab gap: a maximal vertical interval inside the region.

    ``lo_branch``/``hi_branch`` select the circle branch (+1 upper, -1
    lower) when the bounding piece is an arc; 0 for segments.
    """

    slab: int
    lo_piece: int
    hi_piece: int
    sample: Point
    lo_branch: int = 0
    hi_branch: int = 0
    face: int = -1
    label: frozenset = frozenset()


class PlanarSubdivision:
    """Arrangement of curves clipped to a region, with enumerable features.

    Vertices and edges come from noding all curves; faces are tracked as
    unions of vertical-slab cells.  Face identities are exact for
    segment-only subdivisions; curved subdivisions report the face count via
    the Euler relation instead.
    """

    def __init__(self, region: PolygonWithHoles, curves: list[Curve], tol):
        self.region = region
        self.input_curves = list(curves)
        self.tol = tol
        self.verts: list[Point] = []
        self.pieces: list[Piece] = []
        self.cells: list[Cell] = []
        self.slab_xs: list = []
        self.n_components = 0
        self.n_faces = 0
        self.segments_only = all(isinstance(c, Seg) for c in curves)
        self._cells_by_slab: dict[int, list[int]] = {}
        self._build()

    @staticmethod
    def build(
        region: PolygonWithHoles,
        curves: Iterable[Curve] = (),
        tol=GEOM_TOL,
        labels_fn: Optional[Callable[[Point], frozenset]] = None,
    ) -> "PlanarSubdivision":
        all_curves: list[Curve] = [Seg(a, b) for a, b in region.edge_list()]
        all_curves.extend(curves)
        sub = PlanarSubdivision(region, all_curves, tol)
        if labels_fn is not None:
            sub.annotate(labels_fn)
        return sub

    # -- construction ------------------------------------------------------

    def _build(self):
        tol = self.tol
        curves = self.input_curves
        n = len(curves)
        cuts: list[list] = [[] for _ in range(n)]
        boxes = [c.bbox() for c in curves]
        pad = tol * 4 if tol else 0

        if n > 64:
            import numpy as _np

            x0 = _np.array([b[0] for b in boxes])
            y0 = _np.array([b[1] for b in boxes])
            x1 = _np.array([b[2] for b in boxes])
            y1 = _np.array([b[3] for b in boxes])
            ov = (
                (x0[:, None] <= x1[None, :] + pad)
                & (x1[:, None] >= x0[None, :] - pad)
                & (y0[:, None] <= y1[None, :] + pad)
                & (y1[:, None] >= y0[None, :] - pad)
            )
            ii, jj = _np.nonzero(_np.triu(ov, k=1))
            pair_iter = zip(ii.tolist(), jj.tolist())
        else:
            pair_iter = (
                (i, j)
                for i in range(n)
                for j in range(i + 1, n)
                if _bbox_overlap(boxes[i], boxes[j], pad)
            )

        for i, j in pair_iter:
            ci, cj = curves[i], curves[j]
            if isinstance(ci, Seg) and isinstance(cj, Seg):
                for t, u in seg_seg_events(ci.a, ci.b, cj.a, cj.b, tol):
                    cuts[i].append(t)
                    cuts[j].append(u)
            elif isinstance(ci, Seg) and isinstance(cj, Arc):
                for t, th in _seg_arc_events(ci, cj, tol):
                    cuts[i].append(t)
                    cuts[j].append(th)
            elif isinstance(ci, Arc) and isinstance(cj, Seg):
                for t, th in _seg_arc_events(cj, ci, tol):
                    cuts[j].append(t)
                    cuts[i].append(th)
            else:
                for th1, th2 in _arc_arc_events(ci, cj, tol):
                    cuts[i].append(th1)
                    cuts[j].append(th2)

        pool = _VertexPool(tol)
        pieces: list[Piece] = []
        seen_piece_keys = set()
        for idx, c in enumerate(curves):
            if isinstance(c, Seg):
                lo, hi = 0, 1
                length = dist(c.a, c.b)
            else:
                lo, hi = c.a0, c.a1
                length = c.r * (c.a1 - c.a0)
            if length <= (tol if tol else 0):
                continue
            ptol = (tol / length) if tol else 0
            params = sorted(set([lo, hi] + [p for p in cuts[idx] if lo < p < hi]))
            merged = [params[0]]
            for p in params[1:]:
                if float(p) - float(merged[-1]) > ptol:
                    merged.append(p)
            if float(hi) - float(merged[-1]) <= ptol:
                merged[-1] = hi
            else:
                merged.append(hi)
            for pa, pb in zip(merged, merged[1:]):
                A = c.point_at(pa)
                B = c.point_at(pb)
                mid_par = (pa + pb) / 2
                mid = c.point_at(mid_par)
                va = pool.add(A.x, A.y)
                vb = pool.add(B.x, B.y)
                if va == vb and isinstance(c, Seg):
                    continue
                if tol:
                    qm = (
                        round(float(mid.x) / tol),
                        round(float(mid.y) / tol),
                    )
                else:
                    qm = (mid.x, mid.y)
                key = (min(va, vb), max(va, vb), qm)
                if key in seen_piece_keys:
                    continue
                seen_piece_keys.add(key)
                pieces.append(Piece(c, va, vb, pa, pb, mid))
        self.verts = pool.points
        self.pieces = pieces

        parent = list(range(len(self.verts)))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for pc in pieces:
            ra, rb = find(pc.va), find(pc.vb)
            if ra != rb:
                parent[ra] = rb
        self.n_components = len({find(i) for i in range(len(self.verts))})

        self._prepare_piece_arrays()
        self._build_cells()
        self._assign_faces()

    def _critical_xs(self):
        tol = self.tol
        xs = [v.x for v in self.verts]
        for c in self.input_curves:
            if isinstance(c, Arc):
                for ang in (0.0, math.pi):
                    if c.contains_angle(ang):
                        xs.append(c.point_at(c.angle_param(ang)).x)
        xs.sort(key=float)
        merged = []
        for x in xs:
            if not merged:
                merged.append(x)
            elif tol:
                if float(x) - float(merged[-1]) > 2 * tol:
                    merged.append(x)
            elif x != merged[-1]:
                merged.append(x)
        return merged

    def _piece_slab_range(self, xs, pc: Piece):
        """Slab indices whose interior this piece spans."""
        lo, hi = pc.xspan()
        i0 = bisect_right([float(x) for x in xs], float(lo) + (self.tol or 0) * 2) - 1
        i1 = bisect_left([float(x) for x in xs], float(hi) - (self.tol or 0) * 2)
        return max(i0, 0), min(i1, len(xs) - 1)

    def _build_cells(self):
        tol = self.tol
        xs = self._critical_xs()
        self.slab_xs = xs
        cells: list[Cell] = []
        if len(xs) < 2:
            self.cells = []
            return
        half = Fraction(1, 2) if isinstance(xs[0], Fraction) else 0.5
        fxs = [float(x) for x in xs]

        add_at: list[list[int]] = [[] for _ in range(len(xs))]
        remove_after: list[list[int]] = [[] for _ in range(len(xs))]
        for pi, pc in enumerate(self.pieces):
            lo, hi = pc.xspan()
            i0 = bisect_left(fxs, float(lo) - max(tol, 0) * 4)
            i0 = min(max(i0, 0), len(xs) - 1)
            i1 = bisect_right(fxs, float(hi) + max(tol, 0) * 4) - 1
            i1 = min(max(i1, 0), len(xs) - 1)
            if i1 > i0:
                add_at[i0].append(pi)
                remove_after[i1].append(pi)

        active: set[int] = set()
        for k in range(len(xs) - 1):
            active.update(add_at[k])
            x1, x2 = xs[k], xs[k + 1]
            if not (tol and float(x2) - float(x1) <= 2 * tol):
                xm = (x1 + x2) * half
                crossings = []
                for pi in active:
                    for y in self.pieces[pi].y_branches_at(xm):
                        crossings.append((y, pi))
                crossings.sort(key=lambda t: float(t[0]))
                for (y1, p1), (y2, p2) in zip(crossings, crossings[1:]):
                    if tol:
                        if float(y2) - float(y1) <= 2 * tol:
                            continue
                    elif y2 == y1:
                        continue
                    ym = (y1 + y2) * half
                    sample = Point(xm, ym)
                    if self.region.contains(sample, tol):
                        cells.append(Cell(k, p1, p2, sample))
            for pi in remove_after[k]:
                active.discard(pi)
        self.cells = cells
        self._cells_by_slab = {}
        for ci, cell in enumerate(cells):
            self._cells_by_slab.setdefault(cell.slab, []).append(ci)

    def _assign_faces(self):
        tol = self.tol
        ncells = len(self.cells)
        parent = list(range(ncells))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

        xs = self.slab_xs
        by_slab = self._cells_by_slab
        # Pre-bucket vertices and vertical pieces by x for blocker lookups.
        for k in sorted(by_slab):
            if k + 1 not in by_slab:
                continue
            xb = xs[k + 1]
            blockers: list[float] = []
            vert_intervals: list[tuple[float, float]] = []
            for v in self.verts:
                if _close(v.x, xb, tol):
                    blockers.append(float(v.y))
            for pc in self.pieces:
                ys = pc.y_branches_at(xb)
                blockers.extend(float(y) for y in ys)
                if pc.is_seg():
                    a, b = pc.endpoints()
                    if _close(a.x, xb, tol) and _close(b.x, xb, tol):
                        vert_intervals.append(
                            (min(float(a.y), float(b.y)), max(float(a.y), float(b.y)))
                        )
            blockers.sort()

            def blocked(lo: float, hi: float) -> bool:
                i = bisect_right(blockers, lo + (tol or 0))
                if i < len(blockers) and blockers[i] < hi - (tol or 0):
                    return True
                for a, b in vert_intervals:
                    if a < hi - (tol or 0) and b > lo + (tol or 0):
                        return True
                return False

            left = []
            for ci in by_slab[k]:
                cl = self.cells[ci]
                lo_l = self._piece_y(cl.lo_piece, xb)
                hi_l = self._piece_y(cl.hi_piece, xb)
                if lo_l is not None and hi_l is not None:
                    left.append((lo_l, hi_l, ci))
            right = []
            for cj in by_slab[k + 1]:
                cr = self.cells[cj]
                lo_r = self._piece_y(cr.lo_piece, xb)
                hi_r = self._piece_y(cr.hi_piece, xb)
                if lo_r is not None and hi_r is not None:
                    right.append((lo_r, hi_r, cj))
            left.sort()
            right.sort()
            i = j = 0
            while i < len(left) and j < len(right):
                lo = max(left[i][0], right[j][0])
                hi = min(left[i][1], right[j][1])
                if hi - lo > 2 * (tol or 0) and not blocked(lo, hi):
                    union(left[i][2], right[j][2])
                if left[i][1] < right[j][1]:
                    i += 1
                else:
                    j += 1

        roots: dict[int, int] = {}
        for ci in range(ncells):
            r = find(ci)
            if r not in roots:
                roots[r] = len(roots)
            self.cells[ci].face = roots[r]
        self.n_faces = len(roots)

    def _piece_y(self, pi: int, x) -> Optional[float]:
        ys = self.pieces[pi].y_branches_at(x)
        if not ys:
            pc = self.pieces[pi]
            for vid in (pc.va, pc.vb):
                if _close(self.verts[vid].x, x, self.tol):
                    return float(self.verts[vid].y)
            return None
        return float(ys[0])

    # -- queries -----------------------------------------------------------

    def feature_counts(self) -> tuple[int, int, int]:
        return len(self.verts), len(self.pieces), self.n_faces

    def euler_face_count(self) -> int:
        """Faces inside the region by the Euler relation (cell-independent)."""
        holes = len(self.region.holes)
        return len(self.pieces) - len(self.verts) + self.n_components - holes

    def vertex_witnesses(self) -> list[Point]:
        return list(self.verts)

    def edge_witnesses(self) -> list[Point]:
        return [pc.mid for pc in self.pieces]

    def cell_samples(self) -> list[Point]:
        return [c.sample for c in self.cells]

    def face_samples(self) -> list[Point]:
        """One sample per face (segment-only); one per cell otherwise."""
        if not self.segments_only:
            return self.cell_samples()
        seen = set()
        out = []
        for c in self.cells:
            if c.face not in seen:
                seen.add(c.face)
                out.append(c.sample)
        return out

    def annotate(self, labels_fn: Callable[[Point], frozenset]) -> None:
        if self.segments_only and self.cells:
            per_face: dict[int, frozenset] = {}
            for c in self.cells:
                if c.face not in per_face:
                    per_face[c.face] = frozenset(labels_fn(c.sample))
                c.label = per_face[c.face]
        else:
            for c in self.cells:
                c.label = frozenset(labels_fn(c.sample))

    def locate_cell(self, q: Point) -> Optional[int]:
        fxs = [float(x) for x in self.slab_xs]
        xq = float(q.x)
        k = bisect_right(fxs, xq) - 1
        if k < 0 or k >= len(fxs) - 1:
            return None
        for ci in self._cells_by_slab.get(k, ()):
            cell = self.cells[ci]
            lo = self.pieces[cell.lo_piece].y_branches_at(q.x)
            hi = self.pieces[cell.hi_piece].y_branches_at(q.x)
            if not lo or not hi:
                continue
            if float(lo[0]) <= float(q.y) <= float(hi[0]):
                return ci
        return None

    def annotation_at(self, q: Point) -> frozenset:
        ci = self.locate_cell(q)
        return self.cells[ci].label if ci is not None else frozenset()

    def triangles(self) -> list[tuple[Triangle, int]]:
        """Triangle partition refined from the slab cells (segment-only)."""
        if not self.segments_only:
            raise ValueError("triangle partition requires a segment-only subdivision")
        out = []
        xs = self.slab_xs
        for ci, cell in enumerate(self.cells):
            x1, x2 = xs[cell.slab], xs[cell.slab + 1]
            lo1 = self._piece_y(cell.lo_piece, x1)
            lo2 = self._piece_y(cell.lo_piece, x2)
            hi1 = self._piece_y(cell.hi_piece, x1)
            hi2 = self._piece_y(cell.hi_piece, x2)
            if None in (lo1, lo2, hi1, hi2):
                continue
            A = Point(float(x1), lo1)
            B = Point(float(x2), lo2)
            C = Point(float(x2), hi2)
            D = Point(float(x1), hi1)
            for tri in (Triangle(A, B, C), Triangle(A, C, D)):
                if float(tri.area()) > 1e-18:
                    out.append((tri, ci))
        return out


def _close(a, b, tol) -> bool:
    if tol == 0:
        return a == b
    return abs(float(a) - float(b)) <= 2 * tol


def _bbox_overlap(b1, b2, pad) -> bool:
    return (
        b1[0] <= b2[2] + pad
        and b1[2] >= b2[0] - pad
        and b1[1] <= b2[3] + pad
        and b1[3] >= b2[1] - pad
    )


def overlay(subdivisions: Sequence[PlanarSubdivision]) -> PlanarSubdivision:
    """Common refinement of subdivisions sharing one supporting region.

    Output face annotations merge the input annotations containing each face.
    """
    if not subdivisions:
        raise ValueError("overlay of an empty sequence")
    first = subdivisions[0]
    for s in subdivisions[1:]:
        if (
            s.region.outer != first.region.outer
            or s.region.holes != first.region.holes
        ):
            raise ValueError("subdivisions have mismatched supporting regions")
    curves: list[Curve] = []
    for s in subdivisions:
        curves.extend(s.input_curves)
    merged = PlanarSubdivision(first.region, curves, first.tol)

    def merged_labels(q: Point) -> frozenset:
        out = set()
        for s in subdivisions:
            out |= s.annotation_at(q)
        return frozenset(out)

    merged.annotate(merged_labels)
    return merged
