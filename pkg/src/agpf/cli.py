"""Command-line surface: solve one instance, render coverage pictures, and
run the benchmark matrix.

Exit codes for ``solve``: 0 feasible solve, 2 infeasible coverage, 3
resource limit hit.  Every feasible solution is re-checked independently
(sampled continuous illumination >= 1 - 1e-9) before exit 0.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import statistics
import sys
import time
from dataclasses import dataclass
from multiprocessing import Pool
from typing import Optional, Sequence

import numpy as np

from .continuous import solve_continuous
from .discrete import solve_discrete
from .fading import FadingSpec, RhoModel, StepFadingSpec
from .geom import Point, PolygonWithHoles
from .instances import (
    InstanceFile,
    generate_comb,
    generate_convex,
    generate_spike,
    load_instance,
    parse_instance,
    scale_instance,
    serialize_instance,
)
from .visibility import PolygonArrays

FEAS_CHECK_SAMPLES = 10_000
FEAS_CHECK_TOL = 1e-9


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def sample_points(poly: PolygonWithHoles, n: int, seed: int = 0) -> np.ndarray:
    """Uniform interior samples by bbox rejection (boundary excluded)."""
    rng = np.random.default_rng(seed)
    x0, y0, x1, y1 = poly.bbox()
    arrays = PolygonArrays(poly)
    out = []
    need = n
    guard = 0
    while need > 0 and guard < 200:
        m = max(2 * need, 256)
        xs = rng.uniform(x0, x1, m)
        ys = rng.uniform(y0, y1, m)
        xy = np.column_stack([xs, ys])
        keep = arrays.contains_mask(xy, 0.0)
        got = xy[keep][:need]
        if got.size:
            out.append(got)
            need -= len(got)
        guard += 1
    if need > 0:
        raise RuntimeError("rejection sampling failed; degenerate region?")
    return np.concatenate(out, axis=0)


def min_illumination_sampled(
    poly: PolygonWithHoles,
    guards: Sequence[Point],
    intensities: dict[int, float],
    alpha: float,
    n_samples: int = FEAS_CHECK_SAMPLES,
    seed: int = 0,
    xy: Optional[np.ndarray] = None,
) -> float:
    """Minimum continuous illumination over sampled interior points."""
    if xy is None:
        xy = sample_points(poly, n_samples, seed)
    arrays = PolygonArrays(poly)
    model = RhoModel(FadingSpec(alpha))
    total = np.zeros(len(xy))
    for gi, xg in intensities.items():
        if xg <= 0:
            continue
        g = guards[gi]
        mask = arrays.visible_mask(g, xy)
        total += np.where(mask, model.coefficients(g, xy) * xg, 0.0)
    return float(total.min()) if len(total) else math.inf


@dataclass
class RunResult:
    objective: float
    lower_bound: float
    status: str
    intensities: dict[int, float]
    stats: dict
    exit_code: int


def run_algorithm(
    inst: InstanceFile,
    algorithm: str,
    alpha: float,
    epsilon: float = 0.6,
    delta: float = 1e-3,
    mode: str = "separation",
    bound: str = "geometric",
    limit_cpu: Optional[float] = None,
    delta_feas: Optional[float] = None,
) -> RunResult:
    poly = inst.polygon
    guards = inst.guard_points()
    fading = FadingSpec(alpha)
    deadline = time.monotonic() + limit_cpu if limit_cpu else None
    t0 = time.monotonic()
    try:
        if algorithm in ("discrete-circle", "discrete-octagon"):
            ring_mode = "circle" if algorithm == "discrete-circle" else "octagon"
            step = StepFadingSpec.create(epsilon, ring_mode, alpha)
            rep = solve_discrete(
                poly, guards, fading, step, mode=mode, deadline=deadline
            )
            status = rep.status
            stats = {
                "witnesses": rep.witnesses_used,
                "iterations": rep.iterations,
                "features": [rep.n_vertices, rep.n_edges, rep.n_faces],
                "ring_count": rep.ring_count,
                "declared_factor": rep.declared_factor,
                "cpu_s": rep.wall_time,
            }
            if status == "optimal":
                code = 0
            elif status == "infeasible":
                code = 2
            else:
                code = 3
            return RunResult(
                rep.solution.objective,
                rep.lower_bound,
                status,
                rep.solution.intensities.x,
                stats,
                code,
            )
        if algorithm == "continuous":
            rep = solve_continuous(
                poly,
                guards,
                fading,
                delta=delta,
                bound=bound,
                delta_feas=delta_feas,
                deadline=deadline,
            )
            status = rep.status
            stats = {
                "witnesses": rep.witnesses_used,
                "iterations": rep.outer_iterations,
                "psp_expanded": rep.psp_triangles_expanded,
                "psp_deepest": rep.psp_deepest,
                "darkest": rep.darkest_value,
                "repair_factor": rep.repair_factor,
                "cpu_s": rep.wall_time,
            }
            if status == "optimal-within-delta":
                code = 0
            elif status == "infeasible":
                code = 2
            else:
                code = 3
            return RunResult(
                rep.solution.objective,
                rep.lp_lower_bound,
                status,
                rep.solution.intensities.x,
                stats,
                code,
            )
        raise ValueError(f"unknown algorithm {algorithm!r}")
    except TimeoutError:
        return RunResult(
            math.inf,
            0.0,
            "limit",
            {},
            {"cpu_s": time.monotonic() - t0},
            3,
        )


def solution_json(
    inst: InstanceFile,
    algorithm: str,
    alpha: float,
    params: dict,
    result: RunResult,
    no_timing: bool = False,
) -> dict:
    guards = inst.guard_points()
    stats = dict(result.stats)
    if no_timing:
        stats.pop("cpu_s", None)
    return {
        "instance": inst.name,
        "algorithm": algorithm,
        "alpha": alpha,
        "params": params,
        "objective": result.objective,
        "lower_bound": result.lower_bound,
        "intensities": [
            {
                "x": float(guards[g].x),
                "y": float(guards[g].y),
                "value": v,
            }
            for g, v in sorted(result.intensities.items())
            if v > 0
        ],
        "status": result.status,
        "stats": stats,
    }


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    if args.scale_lambda is not None:
        inst = scale_instance(inst, args.scale_lambda)
    params = {}
    if args.alg.startswith("discrete"):
        params = {"epsilon": args.epsilon, "mode": args.mode}
    else:
        params = {"delta": args.delta, "bound": args.bound}
    result = run_algorithm(
        inst,
        args.alg,
        args.alpha,
        epsilon=args.epsilon,
        delta=args.delta,
        mode=args.mode,
        bound=args.bound,
        limit_cpu=args.limit_cpu,
    )
    doc = solution_json(inst, args.alg, args.alpha, params, result, args.no_timing)

    if result.exit_code == 0:
        worst = min_illumination_sampled(
            inst.polygon.as_float(),
            [g.as_float() for g in inst.guard_points()],
            result.intensities,
            args.alpha,
            seed=args.seed,
        )
        doc["stats"]["recheck_min_illumination"] = worst
        if worst < 1.0 - FEAS_CHECK_TOL:
            print(
                f"error: solution failed the independent feasibility re-check "
                f"(min illumination {worst})",
                file=sys.stderr,
            )
            _emit(doc, args.out)
            return 1
    _emit(doc, args.out)
    if args.svg:
        svg, _ = render_svg(inst, doc, resolution=args.resolution)
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(svg)
    return result.exit_code


def _emit(doc: dict, out: Optional[str]) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# render
# ---------------------------------------------------------------------------


def _color_for(v: float, vmax: float) -> str:
    if v < 1.0 - FEAS_CHECK_TOL:
        # Insufficiently lit: green (dark) through yellow (close to 1).
        t = max(0.0, min(1.0, v))
        r = int(40 + 215 * t)
        g = 200
        b = 40
        return f"#{r:02x}{g:02x}{b:02x}"
    span = max(vmax - 1.0, 1e-9)
    t = max(0.0, min(1.0, (v - 1.0) / span))
    # Exactly 1 is darkest blue; more light is paler.
    r = int(8 + t * 190)
    g = int(48 + t * 170)
    b = int(107 + t * 140)
    return f"#{r:02x}{g:02x}{b:02x}"


def render_svg(
    inst: InstanceFile, solution: dict, resolution: int = 400
) -> tuple[str, np.ndarray]:
    """SVG heatmap of the solution's coverage plus guard markers.

    Returns the SVG text and the sampled illumination grid (NaN outside).
    """
    poly = inst.polygon.as_float()
    guards = [g.as_float() for g in inst.guard_points()]
    sol_pts = [(e["x"], e["y"], e["value"]) for e in solution.get("intensities", [])]
    intensities: dict[int, float] = {}
    for x, y, v in sol_pts:
        found = None
        for gi, g in enumerate(guards):
            if abs(float(g.x) - x) <= 1e-9 and abs(float(g.y) - y) <= 1e-9:
                found = gi
                break
        if found is None:
            raise ValueError("solution guard does not match any instance guard")
        intensities[found] = v

    x0, y0, x1, y1 = poly.bbox()
    pad = 0.03 * max(x1 - x0, y1 - y0, 1e-9)
    x0, y0, x1, y1 = x0 - pad, y0 - pad, x1 + pad, y1 + pad
    w = x1 - x0
    h = y1 - y0
    n = resolution
    px = w / n
    py = h / n
    xs = x0 + (np.arange(n) + 0.5) * px
    ys = y0 + (np.arange(n) + 0.5) * py
    gx, gy = np.meshgrid(xs, ys)
    xy = np.column_stack([gx.ravel(), gy.ravel()])
    arrays = PolygonArrays(poly)
    inside = arrays.contains_mask(xy, 0.0)
    model = RhoModel(FadingSpec(solution["alpha"]))
    vals = np.zeros(len(xy))
    for gi, xg in intensities.items():
        if xg <= 0:
            continue
        g = guards[gi]
        mask = arrays.visible_mask(g, xy)
        vals += np.where(mask, model.coefficients(g, xy) * xg, 0.0)
    grid = np.where(inside, vals, np.nan).reshape(n, n)

    finite = grid[np.isfinite(grid)]
    vmax = float(finite.max()) if finite.size else 1.0
    scale_px = 800.0 / max(w, h)
    W = w * scale_px
    H = h * scale_px

    def sx(x):
        return (x - x0) * scale_px

    def sy(y):
        return H - (y - y0) * scale_px

    buf = io.StringIO()
    buf.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:.0f}" '
        f'height="{H:.0f}" viewBox="0 0 {W:.2f} {H:.2f}">\n'
    )
    buf.write(f'<rect width="{W:.2f}" height="{H:.2f}" fill="white"/>\n')
    cw = px * scale_px
    ch = py * scale_px
    for row in range(n):
        col = 0
        while col < n:
            v = grid[row, col]
            if not np.isfinite(v):
                col += 1
                continue
            color = _color_for(float(v), vmax)
            run = col + 1
            while run < n and np.isfinite(grid[row, run]) and _color_for(
                float(grid[row, run]), vmax
            ) == color:
                run += 1
            rx = sx(x0 + col * px)
            ry = sy(y0 + (row + 1) * py)
            buf.write(
                f'<rect x="{rx:.2f}" y="{ry:.2f}" width="{cw * (run - col) + 0.5:.2f}" '
                f'height="{ch + 0.5:.2f}" fill="{color}"/>\n'
            )
            col = run
    path = "M " + " L ".join(f"{sx(float(p.x)):.2f} {sy(float(p.y)):.2f}" for p in poly.outer) + " Z"
    for hole in poly.holes:
        path += " M " + " L ".join(
            f"{sx(float(p.x)):.2f} {sy(float(p.y)):.2f}" for p in hole
        ) + " Z"
    buf.write(f'<path d="{path}" fill="none" stroke="black" stroke-width="1.5"/>\n')
    max_int = max((v for v in intensities.values()), default=1.0)
    for gi, v in sorted(intensities.items()):
        g = guards[gi]
        r = 3 + 9 * math.sqrt(v / max_int) if max_int > 0 else 3
        buf.write(
            f'<circle cx="{sx(float(g.x)):.2f}" cy="{sy(float(g.y)):.2f}" r="{r:.2f}" '
            f'fill="crimson" stroke="black" stroke-width="0.8"/>\n'
        )
        buf.write(
            f'<text x="{sx(float(g.x)) + r + 2:.2f}" y="{sy(float(g.y)):.2f}" '
            f'font-size="11">{v:.3g}</text>\n'
        )
    buf.write("</svg>\n")
    return buf.getvalue(), grid


def cmd_render(args) -> int:
    inst = load_instance(args.instance)
    with open(args.solution, encoding="utf-8") as fh:
        solution = json.load(fh)
    svg, _ = render_svg(inst, solution, resolution=args.resolution)
    out = args.out or (args.solution + ".svg")
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    print(out)
    return 0


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

NINE_CONFIGS = [
    ("continuous", 0.01),
    ("continuous", 0.001),
    ("continuous", 0.0001),
    ("discrete-circle", 1.0),
    ("discrete-circle", 0.6),
    ("discrete-circle", 0.2),
    ("discrete-octagon", 1.0),
    ("discrete-octagon", 0.6),
    ("discrete-octagon", 0.2),
]


def instance_from_spec(spec: str) -> InstanceFile:
    if os.path.exists(spec):
        return load_instance(spec)
    parts = spec.split(":")
    kind = parts[0]
    if kind == "convex":
        return generate_convex(int(parts[1]), float(parts[2]))
    if kind == "comb":
        return generate_comb(int(parts[1]))
    if kind == "spike":
        return generate_spike(float(parts[1]))
    raise ValueError(f"unknown instance spec {spec!r}")


def _bench_one(task: tuple) -> dict:
    text, name, alg, param, alpha, lam, limit = task
    inst = parse_instance(text, name=name)
    inst = scale_instance(inst, lam)
    t0 = time.monotonic()
    try:
        if alg == "continuous":
            res = run_algorithm(
                inst, alg, alpha, delta=param, limit_cpu=limit
            )
        else:
            res = run_algorithm(
                inst, alg, alpha, epsilon=param, limit_cpu=limit
            )
    except Exception as exc:  # noqa: BLE001 - a failed run records infinity
        res = RunResult(math.inf, 0.0, f"error:{type(exc).__name__}", {}, {}, 3)
    cpu = time.monotonic() - t0
    ok = res.exit_code == 0
    return {
        "instance": name,
        "alg": alg,
        "alpha": alpha,
        "lambda": lam,
        "param": param,
        "status": res.status if ok or res.status else "failed",
        "objective": res.objective if ok else math.inf,
        "lower_bound": res.lower_bound if ok else 0.0,
        "cpu_s": cpu if ok else math.inf,
        "witnesses": res.stats.get("witnesses", 0),
        "iterations": res.stats.get("iterations", 0),
    }


def run_bench(
    instances: Sequence[InstanceFile],
    alphas: Sequence[float],
    lambdas: Sequence[float],
    limit_cpu: float = 60.0,
    jobs: int = 1,
) -> list[dict]:
    tasks = []
    for inst in instances:
        text = serialize_instance(inst)
        for alpha in alphas:
            for lam in lambdas:
                for alg, param in NINE_CONFIGS:
                    tasks.append((text, inst.name, alg, param, alpha, lam, limit_cpu))
    if jobs > 1:
        with Pool(jobs) as pool:
            rows = pool.map(_bench_one, tasks)
    else:
        rows = [_bench_one(t) for t in tasks]
    return rows


def _median(vals: list[float]) -> float:
    return statistics.median(vals) if vals else math.inf


def bench_tables(rows: list[dict], alphas, lambdas) -> dict[str, str]:
    """Success-rate, relative-objective and relative-CPU tables (markdown)."""
    def key(r):
        return (r["alg"], r["param"])

    configs = NINE_CONFIGS
    cells = {}
    for r in rows:
        cells.setdefault((key(r), r["alpha"], r["lambda"]), []).append(r)

    by_case = {}
    for r in rows:
        by_case.setdefault((r["instance"], r["alpha"], r["lambda"]), []).append(r)
    best_obj = {
        case: min((x["objective"] for x in lst), default=math.inf)
        for case, lst in by_case.items()
    }
    ref_time: dict[tuple, float] = {}
    for r in rows:
        if (
            r["alg"] == "discrete-circle"
            and r["param"] == 1.0
            and r["alpha"] == alphas[0]
            and r["lambda"] == lambdas[0]
        ):
            ref_time[r["instance"]] = r["cpu_s"]

    def fmt(v: float) -> str:
        return "inf" if math.isinf(v) else f"{v:.2f}"

    header = (
        "| configuration | "
        + " | ".join(f"a={a} L={l}" for a in alphas for l in lambdas)
        + " |"
    )
    sep = "|" + "---|" * (1 + len(alphas) * len(lambdas))

    succ_lines = [header, sep]
    obj_lines = [header, sep]
    cpu_lines = [header, sep]

    lb_cells = []
    for a in alphas:
        for l in lambdas:
            vals = []
            for inst in {r["instance"] for r in rows}:
                lbs = [
                    r["lower_bound"]
                    for r in by_case.get((inst, a, l), [])
                    if r["alg"].startswith("discrete") and math.isfinite(r["objective"])
                ]
                base = best_obj.get((inst, a, l), math.inf)
                if lbs and math.isfinite(base) and base > 0:
                    vals.append(max(lbs) / base)
            lb_cells.append(_median(vals))
    obj_lines.append("| lower bound | " + " | ".join(fmt(v) for v in lb_cells) + " |")

    for alg, param in configs:
        name = f"{alg} {param:g}"
        s_cells, o_cells, c_cells = [], [], []
        for a in alphas:
            for l in lambdas:
                runs = cells.get(((alg, param), a, l), [])
                n = len(runs)
                ok = [r for r in runs if math.isfinite(r["objective"])]
                s_cells.append(f"{100.0 * len(ok) / n:.0f}" if n else "-")
                rel_o = []
                rel_c = []
                for r in runs:
                    base = best_obj.get((r["instance"], a, l), math.inf)
                    rel_o.append(
                        r["objective"] / base
                        if math.isfinite(base) and base > 0
                        else math.inf
                    )
                    rt = ref_time.get(r["instance"], math.nan)
                    rel_c.append(
                        r["cpu_s"] / rt if rt and math.isfinite(rt) and rt > 0 else math.inf
                    )
                o_cells.append(fmt(_median(rel_o)))
                c_cells.append(fmt(_median(rel_c)))
        succ_lines.append(f"| {name} | " + " | ".join(s_cells) + " |")
        obj_lines.append(f"| {name} | " + " | ".join(o_cells) + " |")
        cpu_lines.append(f"| {name} | " + " | ".join(c_cells) + " |")

    return {
        "success": "\n".join(succ_lines),
        "objective": "\n".join(obj_lines),
        "cpu": "\n".join(cpu_lines),
    }


def write_bench_outputs(rows: list[dict], tables: dict[str, str], out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "bench.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=[
                "instance",
                "alg",
                "alpha",
                "lambda",
                "param",
                "status",
                "objective",
                "lower_bound",
                "cpu_s",
                "witnesses",
                "iterations",
            ],
        )
        writer.writeheader()
        writer.writerows(rows)
    md = [
        "# Benchmark results",
        "",
        "## Success rates (percent)",
        "",
        tables["success"],
        "",
        "## Median relative objective values",
        "",
        tables["objective"],
        "",
        "## Median relative CPU times",
        "",
        tables["cpu"],
        "",
    ]
    with open(os.path.join(out_dir, "tables.md"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(md))


def cmd_bench(args) -> int:
    if args.matrix:
        with open(args.matrix, encoding="utf-8") as fh:
            spec = json.load(fh)
    else:
        spec = {}
    inst_specs = spec.get(
        "instances", ["convex:6:1.2", "convex:8:2", "comb:2", "comb:3", "spike:6"]
    )
    alphas = spec.get("alphas", [1, 2])
    lambdas = spec.get("lambdas", [2, 1, 0.5, 0.2])
    limit = args.limit_cpu or spec.get("limit_cpu", 60.0)
    jobs = args.jobs or spec.get("jobs", 1)
    instances = [instance_from_spec(s) for s in inst_specs]
    rows = run_bench(instances, alphas, lambdas, limit_cpu=limit, jobs=jobs)
    tables = bench_tables(rows, alphas, lambdas)
    out_dir = args.out or "bench-out"
    write_bench_outputs(rows, tables, out_dir)
    print(os.path.join(out_dir, "bench.csv"))
    print(os.path.join(out_dir, "tables.md"))
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="agpf", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve one instance")
    sp.add_argument("instance")
    sp.add_argument("--alg", required=True,
                    choices=["discrete-circle", "discrete-octagon", "continuous"])
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--epsilon", type=float, default=0.6)
    sp.add_argument("--delta", type=float, default=1e-3)
    sp.add_argument("--scale-lambda", type=float, default=None)
    sp.add_argument("--mode", choices=["full", "separation"], default="separation")
    sp.add_argument("--bound", choices=["geometric", "lipschitz", "max"],
                    default="geometric")
    sp.add_argument("--limit-cpu", type=float, default=None)
    sp.add_argument("--out", default=None)
    sp.add_argument("--svg", default=None)
    sp.add_argument("--resolution", type=int, default=400)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--no-timing", action="store_true")
    sp.set_defaults(fn=cmd_solve)

    rp = sub.add_parser("render", help="render a solution JSON as an SVG heatmap")
    rp.add_argument("solution")
    rp.add_argument("instance")
    rp.add_argument("--out", default=None)
    rp.add_argument("--resolution", type=int, default=400)
    rp.set_defaults(fn=cmd_render)

    bp = sub.add_parser("bench", help="run the benchmark matrix")
    bp.add_argument("--matrix", default=None, help="JSON matrix description")
    bp.add_argument("--jobs", type=int, default=None)
    bp.add_argument("--limit-cpu", type=float, default=None)
    bp.add_argument("--out", default=None)
    bp.set_defaults(fn=cmd_bench)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
