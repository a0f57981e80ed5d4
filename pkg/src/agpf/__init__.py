"""Art gallery illumination: minimum-energy lighting of polygons under fading.

Place light sources on a fixed candidate set (typically the polygon's
vertices) and assign intensities so that every point of the region receives
illumination at least 1, where light fades with distance.  Two solvers are
provided: a step-function approximation with a proven factor, and a
continuous branch-and-bound separation scheme.
"""

from .geom import (
    Point,
    PolygonWithHoles,
    Triangle,
    PlanarSubdivision,
    signed_area,
    diameter,
    average_edge_length,
    scale,
    overlay,
    triangulate_face,
)
from .fading import (
    FadingSpec,
    StepFadingSpec,
    IntensityAssignment,
    rho,
    hyperfloor,
    tau,
    ring_radii,
    illumination,
)
from .visibility import VisibilityPolygon, VisibilityOverlay, visibility_polygon, visibility_overlay, sees
from .lp_core import IlluminationLP, Solution, build_lp, solve_lp, add_witness
from .discrete import FadingArrangement, DiscreteRunReport, build_fading_arrangement, place_witnesses, solve_discrete
from .continuous import (
    PspState,
    ContinuousRunReport,
    geometric_lower_bound,
    lipschitz_constant,
    lipschitz_lower_bound,
    psp_solve,
    solve_continuous,
)
from .instances import InstanceFile, parse_instance, serialize_instance, scale_instance, generate_spike, generate_convex, generate_comb

__all__ = [
    "Point",
    "PolygonWithHoles",
    "Triangle",
    "PlanarSubdivision",
    "signed_area",
    "diameter",
    "average_edge_length",
    "scale",
    "overlay",
    "triangulate_face",
    "FadingSpec",
    "StepFadingSpec",
    "IntensityAssignment",
    "rho",
    "hyperfloor",
    "tau",
    "ring_radii",
    "illumination",
    "VisibilityPolygon",
    "VisibilityOverlay",
    "visibility_polygon",
    "visibility_overlay",
    "sees",
    "IlluminationLP",
    "Solution",
    "build_lp",
    "solve_lp",
    "add_witness",
    "FadingArrangement",
    "DiscreteRunReport",
    "build_fading_arrangement",
    "place_witnesses",
    "solve_discrete",
    "PspState",
    "ContinuousRunReport",
    "geometric_lower_bound",
    "lipschitz_constant",
    "lipschitz_lower_bound",
    "psp_solve",
    "solve_continuous",
    "InstanceFile",
    "parse_instance",
    "serialize_instance",
    "scale_instance",
    "generate_spike",
    "generate_convex",
    "generate_comb",
]
