"""Fading functions: the continuous falloff, its step approximation, and
illumination sums.

Light from a source at ``g`` reaches a point ``w`` attenuated by
``rho(g, w) = min(1, ||g-w||^-alpha)``; the step variant ``tau`` rounds
``rho`` down to the nearest integer power of ``1 + eps`` so that it is
piecewise constant on concentric rings.  Rings may be circles or regular
octagons (linear geometry at a small cost in the declared factor).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .geom import Point, dist

COS_PI_8 = math.cos(math.pi / 8)
SIN_PI_8 = math.sin(math.pi / 8)

# Relative slack treating a value as "equal" to a step boundary.
_EXACT_GUARD = 1e-12


@dataclass(frozen=True)
class FadingSpec:
    """Falloff exponent; the cap radius is fixed at 1 by problem scaling."""

    alpha: float
    cap_radius: float = 1.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("fading exponent must be nonnegative")
        if self.cap_radius != 1.0:
            raise ValueError("cap radius is fixed at 1; rescale the input instead")


@dataclass(frozen=True)
class StepFadingSpec:
    """Step-function parameters: target factor 1+epsilon and ring geometry.

    In octagon mode the rings are regular octagons inscribed in the
    corresponding circles, which keeps every feasibility guarantee but costs
    accuracy; the effective epsilon is shrunk so the declared approximation
    factor stays at the user's 1+epsilon.
    """

    epsilon: float
    ring_mode: str = "circle"
    effective_epsilon: float = 0.0
    effective_epsilon_exact: Fraction | None = None

    @staticmethod
    def create(
        epsilon: float, ring_mode: str = "circle", alpha: float | None = None
    ) -> "StepFadingSpec":
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if ring_mode not in ("circle", "octagon"):
            raise ValueError(f"unknown ring mode {ring_mode!r}")
        if ring_mode == "circle":
            return StepFadingSpec(epsilon, ring_mode, epsilon, None)
        if alpha is None:
            raise ValueError("octagon mode needs the fading exponent")
        # Inscribed octagons under-estimate rho by up to cos(pi/8)^alpha, so
        # build the rings with a finer base; the extra (1 - 2^-30) margin
        # absorbs the rational snapping of ring geometry.
        one_plus = (1.0 + epsilon) * COS_PI_8**alpha * (1.0 - 2.0**-30)
        eff = one_plus - 1.0
        if eff <= 0:
            raise ValueError(
                "octagon rings cannot meet the requested factor: need "
                f"(1+eps)*cos(pi/8)^alpha > 1, got eps={epsilon}, alpha={alpha}"
            )
        eff_exact = Fraction(math.floor(eff * 2**40), 2**40)
        if eff_exact <= 0:
            raise ValueError("effective epsilon vanished after snapping")
        return StepFadingSpec(epsilon, ring_mode, float(eff_exact), eff_exact)

    @property
    def base(self) -> float:
        return 1.0 + self.effective_epsilon

    def declared_factor(self, alpha: float) -> float:
        if self.ring_mode == "circle":
            return 1.0 + self.epsilon
        return (1.0 + self.effective_epsilon) / COS_PI_8**alpha


@dataclass
class IntensityAssignment:
    """Nonnegative intensity per guard index."""

    x: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        for g, v in self.x.items():
            if v < 0:
                raise ValueError(f"negative intensity for guard {g}")

    def value(self, g: int) -> float:
        return self.x.get(g, 0.0)

    def total(self) -> float:
        return sum(self.x.values())

    def scaled(self, factor: float) -> "IntensityAssignment":
        return IntensityAssignment({g: v * factor for g, v in self.x.items()})


def rho(g: Point, w: Point, spec: FadingSpec) -> float:
    """Continuous falloff coefficient in (0, 1]."""
    d = dist(g, w)
    if d <= 1.0 or spec.alpha == 0:
        return 1.0
    return d ** -spec.alpha


def hyperfloor(x: float, base: float) -> float:
    """Largest integer power of ``base`` not exceeding ``x``.

    Values within a 1e-12 relative margin of a power count as that power, so
    inputs that are powers mathematically (but not bitwise) map onto them.
    """
    if x <= 0:
        raise ValueError("hyperfloor needs a positive argument")
    if base <= 1:
        raise ValueError("hyperfloor base must exceed 1")
    t = math.log(x) / math.log(base)
    z = math.floor(t)
    for cand in (z + 2, z + 1, z, z - 1, z - 2):
        if base**cand <= x * (1 + _EXACT_GUARD):
            return float(base**cand)
    while base**z > x * (1 + _EXACT_GUARD):  # pragma: no cover
        z -= 1
    return float(base**z)


def octagon_norm(dx: float, dy: float) -> float:
    """Scaling factor putting (dx, dy) on the boundary of the unit octagon.

    The unit octagon has its vertices on the unit circle at angles k*pi/4;
    the norm is >= the Euclidean norm and <= it divided by cos(pi/8).
    """
    ax, ay = abs(dx), abs(dy)
    return max(COS_PI_8 * ax + SIN_PI_8 * ay, SIN_PI_8 * ax + COS_PI_8 * ay) / COS_PI_8


def tau(g: Point, w: Point, fading: FadingSpec, step: StepFadingSpec) -> float:
    """Step-function coefficient: hyperfloor of rho in base 1+eps'.

    In octagon mode the Euclidean distance is replaced by the octagon norm,
    which makes the rings regular octagons with vertices on the circles.
    """
    if fading.alpha == 0:
        return 1.0
    if step.ring_mode == "circle":
        return hyperfloor(rho(g, w, fading), step.base)
    n = octagon_norm(float(w.x) - float(g.x), float(w.y) - float(g.y))
    val = 1.0 if n <= 1.0 else n ** -fading.alpha
    return hyperfloor(val, step.base)


def band_index(distance_like: float, alpha: float, base: float) -> int:
    """Ring band of a (possibly octagon-norm) distance: 0 is the cap.

    Band z covers distances in (base^((z-1)/alpha), base^(z/alpha)] so that
    the coefficient there is base^-z; boundaries snap to the inner band.
    """
    if alpha == 0 or distance_like <= 1.0:
        return 0
    t = alpha * math.log(distance_like) / math.log(base)
    z = math.ceil(t - _EXACT_GUARD * max(1.0, abs(t)))
    return max(int(z), 0)


def band_indices(distances: np.ndarray, alpha: float, base: float) -> np.ndarray:
    """Vectorized :func:`band_index`."""
    d = np.asarray(distances, dtype=float)
    if alpha == 0:
        return np.zeros(d.shape, dtype=np.int64)
    with np.errstate(divide="ignore"):
        t = alpha * np.log(np.maximum(d, 1e-300)) / math.log(base)
    z = np.ceil(t - _EXACT_GUARD * np.maximum(1.0, np.abs(t)))
    return np.maximum(z, 0).astype(np.int64)


def ring_radii(
    fading: FadingSpec, step: StepFadingSpec, max_distance: float
) -> list[float]:
    """Distances at which tau steps down, starting with the cap radius 1."""
    if max_distance < 1.0:
        raise ValueError("max_distance must be at least the cap radius 1")
    radii = [1.0]
    if fading.alpha == 0:
        return radii
    base = step.base
    z = 1
    while True:
        r = base ** (z / fading.alpha)
        if r > max_distance * (1 + _EXACT_GUARD):
            break
        radii.append(r)
        z += 1
    return radii


def illumination(
    p: Point,
    guards: Sequence[Point],
    x: IntensityAssignment | Mapping[int, float],
    vis: Callable[[int, Point], bool],
    model: "FadingModel",
) -> float:
    """Total light received at ``p``; 0 if no guard sees it."""
    values = x.x if isinstance(x, IntensityAssignment) else x
    total = 0.0
    for gi, xg in values.items():
        if xg == 0:
            continue
        if vis(gi, p):
            total += model.coefficient(guards[gi], p) * xg
    return total


# ---------------------------------------------------------------------------
# Fading models: a uniform interface over rho and tau
# ---------------------------------------------------------------------------


class FadingModel:
    name = "?"

    def coefficient(self, g: Point, w: Point) -> float:
        raise NotImplementedError

    def coefficients(self, g: Point, xy: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class RhoModel(FadingModel):
    """Continuous falloff."""

    name = "rho"

    def __init__(self, fading: FadingSpec):
        self.fading = fading

    def coefficient(self, g: Point, w: Point) -> float:
        return rho(g, w, self.fading)

    def coefficients(self, g: Point, xy: np.ndarray) -> np.ndarray:
        d = np.hypot(xy[:, 0] - float(g.x), xy[:, 1] - float(g.y))
        if self.fading.alpha == 0:
            return np.ones_like(d)
        out = np.ones_like(d)
        far = d > 1.0
        out[far] = d[far] ** -self.fading.alpha
        return out


class TauModel(FadingModel):
    """Step falloff (circle or octagon rings)."""

    name = "tau"

    def __init__(self, fading: FadingSpec, step: StepFadingSpec):
        self.fading = fading
        self.step = step

    def coefficient(self, g: Point, w: Point) -> float:
        return tau(g, w, self.fading, self.step)

    def coefficients(self, g: Point, xy: np.ndarray) -> np.ndarray:
        dx = xy[:, 0] - float(g.x)
        dy = xy[:, 1] - float(g.y)
        if self.step.ring_mode == "circle":
            d = np.hypot(dx, dy)
        else:
            ax, ay = np.abs(dx), np.abs(dy)
            d = (
                np.maximum(COS_PI_8 * ax + SIN_PI_8 * ay, SIN_PI_8 * ax + COS_PI_8 * ay)
                / COS_PI_8
            )
        if self.fading.alpha == 0:
            return np.ones_like(d)
        z = band_indices(d, self.fading.alpha, self.step.base)
        return self.step.base ** (-z.astype(float))
