"""Instance files, the scaling protocol, and test-polygon generators.

Text format (UTF-8, LF):

    polygon <n_outer> <n_holes>
    <x> <y>            # n_outer CCW vertex lines, decimal or p/q rational
    hole <n>           # per hole, then n CW vertex lines
    guards <m>         # optional, then m point lines; default: all vertices

If any coordinate in a file is written as a rational ``p/q``, the whole
instance is parsed exactly (decimals become exact fractions too).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .geom import Point, PolygonWithHoles, average_edge_length, scale


@dataclass
class InstanceFile:
    polygon: PolygonWithHoles
    guards: Optional[list[Point]] = None  # None: vertex guards
    name: str = ""
    source: str = ""

    def guard_points(self) -> list[Point]:
        if self.guards is not None:
            return list(self.guards)
        return self.polygon.all_vertices()


class InstanceParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _parse_number(tok: str, exact: bool):
    if "/" in tok:
        p, q = tok.split("/", 1)
        return Fraction(int(p), int(q))
    if exact:
        return Fraction(tok)
    return float(tok)


def parse_instance(text: str, name: str = "") -> InstanceFile:
    raw_lines = text.splitlines()
    lines: list[tuple[int, str]] = []
    for i, ln in enumerate(raw_lines, start=1):
        stripped = ln.split("#", 1)[0].strip()
        if stripped:
            lines.append((i, stripped))
    exact = any("/" in ln for _, ln in lines)
    pos = 0

    def next_line(expect: str) -> tuple[int, str]:
        nonlocal pos
        if pos >= len(lines):
            last = lines[-1][0] if lines else 0
            raise InstanceParseError(last + 1, f"unexpected end of file, expected {expect}")
        item = lines[pos]
        pos += 1
        return item

    def read_point(expect: str) -> Point:
        lno, ln = next_line(expect)
        toks = ln.split()
        if len(toks) != 2:
            raise InstanceParseError(lno, f"expected 2 coordinates, got {len(toks)}")
        try:
            return Point(_parse_number(toks[0], exact), _parse_number(toks[1], exact))
        except (ValueError, ZeroDivisionError) as e:
            raise InstanceParseError(lno, f"bad coordinate: {e}") from None

    lno, header = next_line("polygon header")
    toks = header.split()
    if len(toks) != 3 or toks[0] != "polygon":
        raise InstanceParseError(lno, "expected 'polygon <n_outer> <n_holes>'")
    try:
        n_outer, n_holes = int(toks[1]), int(toks[2])
    except ValueError:
        raise InstanceParseError(lno, "polygon counts must be integers") from None
    if n_outer < 3 or n_holes < 0:
        raise InstanceParseError(lno, "need at least 3 outer vertices and >= 0 holes")

    outer = [read_point("outer vertex") for _ in range(n_outer)]
    holes = []
    for k in range(n_holes):
        lno, ln = next_line(f"'hole <n>' header for hole {k}")
        toks = ln.split()
        if len(toks) != 2 or toks[0] != "hole":
            raise InstanceParseError(lno, f"expected 'hole <n>' for hole {k}")
        cnt = int(toks[1])
        if cnt < 3:
            raise InstanceParseError(lno, "hole needs at least 3 vertices")
        holes.append([read_point("hole vertex") for _ in range(cnt)])

    guards = None
    if pos < len(lines):
        lno, ln = next_line("'guards <m>' header")
        toks = ln.split()
        if len(toks) != 2 or toks[0] != "guards":
            raise InstanceParseError(lno, "expected 'guards <m>'")
        guards = [read_point("guard point") for _ in range(int(toks[1]))]
    if pos < len(lines):
        raise InstanceParseError(lines[pos][0], "trailing content after instance")

    poly = PolygonWithHoles.create(outer, holes, tol=0 if exact else 1e-9)
    inst = InstanceFile(poly, guards, name=name)
    for g in inst.guard_points():
        if not poly.contains(g, 0 if exact else 1e-9):
            raise InstanceParseError(0, "guard candidate lies outside the polygon")
    return inst


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return str(v)
    f = float(v)
    if f == int(f) and abs(f) < 1e15:
        return str(int(f))
    return repr(f)


def serialize_instance(inst: InstanceFile) -> str:
    out = [f"polygon {len(inst.polygon.outer)} {len(inst.polygon.holes)}"]
    for p in inst.polygon.outer:
        out.append(f"{_fmt(p.x)} {_fmt(p.y)}")
    for h in inst.polygon.holes:
        out.append(f"hole {len(h)}")
        for p in h:
            out.append(f"{_fmt(p.x)} {_fmt(p.y)}")
    if inst.guards is not None:
        out.append(f"guards {len(inst.guards)}")
        for p in inst.guards:
            out.append(f"{_fmt(p.x)} {_fmt(p.y)}")
    return "\n".join(out) + "\n"


def load_instance(path: str) -> InstanceFile:
    with open(path, encoding="utf-8") as fh:
        name = path.rsplit("/", 1)[-1]
        if name.endswith(".pol"):
            name = name[:-4]
        return parse_instance(fh.read(), name=name)


def save_instance(inst: InstanceFile, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_instance(inst))


def scale_instance(inst: InstanceFile, lam: float) -> InstanceFile:
    """Scale so the cutoff radius 1 equals lam times the average edge length."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    mu = average_edge_length(inst.polygon)
    factor = 1.0 / (lam * mu)
    if isinstance(inst.polygon.outer[0].x, Fraction):
        factor = Fraction(factor).limit_denominator(10**15)
    poly = scale(inst.polygon, factor)
    guards = None
    if inst.guards is not None:
        guards = [Point(p.x * factor, p.y * factor) for p in inst.guards]
    return InstanceFile(poly, guards, name=f"{inst.name}@L{lam:g}", source=inst.source)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def generate_convex(n: int, radius: float) -> InstanceFile:
    """Regular n-gon with the given circumradius, vertex guards."""
    if n < 3:
        raise ValueError("need at least 3 vertices")
    pts = [
        Point(
            radius * math.cos(2 * math.pi * k / n),
            radius * math.sin(2 * math.pi * k / n),
        )
        for k in range(n)
    ]
    poly = PolygonWithHoles.create(pts)
    return InstanceFile(poly, None, name=f"convex-{n}-r{radius:g}")


def generate_comb(teeth: int) -> InstanceFile:
    """Orthogonal comb: unit base strip with `teeth` upward teeth."""
    if teeth < 1:
        raise ValueError("need at least one tooth")
    w = 2 * teeth - 1
    pts: list[Point] = [Point(0.0, 0.0), Point(float(w), 0.0)]
    for i in range(teeth - 1, -1, -1):
        x0, x1 = float(2 * i), float(2 * i + 1)
        if i == teeth - 1:
            pts.append(Point(x1, 3.0))
        else:
            pts.append(Point(x1, 1.0))
            pts.append(Point(x1, 3.0))
        pts.append(Point(x0, 3.0))
        if i > 0:
            pts.append(Point(x0, 1.0))
    poly = PolygonWithHoles.create(pts)
    return InstanceFile(poly, None, name=f"comb-{teeth}")


def generate_spike(s: float, bend: Optional[float] = None) -> InstanceFile:
    """Unit-height body with a horizontal spike of length ``s``.

    A small upward bend at mid-spike adds the reflex vertex that lets a
    two-light vertex solution realize the cheap optimum, while one body
    vertex still sees the whole polygon over the bend.
    """
    if s <= 2:
        raise ValueError("spike length must exceed 2")
    body_w = 1.0
    spike_h = 0.2  # spike width: 0.2 x body height
    if bend is None:
        bend = 0.01 * spike_h
    if not (0 < bend < spike_h / 2):
        raise ValueError("bend must be small and positive")
    star_y = 2.5 * bend * (body_w + s) / s
    pts = [
        Point(0.0, 0.0),
        Point(body_w + s / 2, bend),  # reflex bend: the mid-spike light spot
        Point(body_w + s, 0.0),
        Point(body_w + s, spike_h),
        Point(body_w, spike_h),
        Point(body_w, 1.0),
        Point(0.0, 1.0),
        Point(0.0, star_y),  # sees the whole polygon over the bend
    ]
    poly = PolygonWithHoles.create(pts)
    return InstanceFile(poly, None, name=f"spike-{s:g}")


def desk_suite() -> list[InstanceFile]:
    """Twenty small generated instances (convex, comb, spike)."""
    out: list[InstanceFile] = []
    for n, r in [
        (6, 0.45),
        (8, 1.5),
        (12, 3.0),
        (16, 2.0),
        (5, 4.0),
        (20, 2.5),
        (32, 3.0),
        (10, 0.9),
    ]:
        out.append(generate_convex(n, r))
    for teeth in (2, 3, 4, 5, 6, 7):
        out.append(generate_comb(teeth))
    for s in (4, 6, 10, 16, 30, 60):
        out.append(generate_spike(s))
    assert len(out) == 20
    return out
