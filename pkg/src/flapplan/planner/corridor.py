"""Scaled-cosine reference curve and the corridor around it.

All quantities here are dimensional (meters) in the Earth XZ plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..dynamics.types import DomainError

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ReferenceCurve:
    x0: float
    z0: float
    xf: float
    zf: float

    def __post_init__(self):
        if not self.xf > self.x0:
            raise DomainError(f"reference curve needs xf > x0 (got {self.x0}, {self.xf})")

    @property
    def x_d(self) -> float:
        return self.xf - self.x0

    @property
    def z_d(self) -> float:
        return self.zf - self.z0

    def offset(self, x):
        """Vertical offset from z0 at ``x`` (no domain check, vectorized)."""
        s = (np.asarray(x, dtype=float) - self.x0) / abs(self.x_d)
        return 0.5 * (self.z_d + self.z_d * np.cos(math.pi + math.pi * s))


def reference_curve_eval(curve: ReferenceCurve, x: float) -> float:
    """Altitude z [m] of the reference curve at ``x`` in [x0, xf].

    The endpoints are returned exactly; in between the curve follows half a
    cosine period from z0 to zf.
    """
    if not (curve.x0 <= x <= curve.xf):
        raise DomainError(f"x={x} outside [{curve.x0}, {curve.xf}]")
    if x == curve.x0:
        return curve.z0
    if x == curve.xf:
        return curve.zf
    return curve.z0 + float(curve.offset(x))


@dataclass(frozen=True)
class Corridor:
    curve: ReferenceCurve
    k_d: float
    samples: int = 1000

    def __post_init__(self):
        if not self.k_d > 0:
            raise DomainError("corridor clearance k_d must be > 0")
        if self.samples < 3:
            raise DomainError("need at least 3 curve samples")

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.k_d)

    @cached_property
    def _grid(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.linspace(self.curve.x0, self.curve.xf, self.samples)
        return xs, self.curve.z0 + self.curve.offset(xs)

    def contains(self, points) -> np.ndarray:
        if self.unbounded:
            return np.ones(np.atleast_2d(points).shape[0], dtype=bool)
        return corridor_distances(self, points) <= self.k_d


def corridor_distances(corridor: Corridor, points, iterations: int = 60,
                       chunk: int = 2048) -> np.ndarray:
    """Minimum distances [m] from many (x, z) points to the reference curve.

    Dense sampling locates the nearest sample; golden-section search on the
    bracketing sample interval refines it.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(pts.shape[0])
    xs, zs = corridor._grid
    curve = corridor.curve
    m = xs.size
    for start in range(0, pts.shape[0], chunk):
        px = pts[start:start + chunk, 0]
        pz = pts[start:start + chunk, 1]
        d2 = (px[:, None] - xs[None, :]) ** 2 + (pz[:, None] - zs[None, :]) ** 2
        i = np.argmin(d2, axis=1)
        best = d2[np.arange(i.size), i]
        lo = xs[np.maximum(i - 1, 0)]
        hi = xs[np.minimum(i + 1, m - 1)]

        def sq(x):
            return (px - x) ** 2 + (pz - curve.z0 - curve.offset(x)) ** 2

        a = hi - _INV_PHI * (hi - lo)
        b = lo + _INV_PHI * (hi - lo)
        fa = sq(a)
        fb = sq(b)
        for _ in range(iterations):
            left = fa < fb
            hi = np.where(left, b, hi)
            lo = np.where(left, lo, a)
            new_a = hi - _INV_PHI * (hi - lo)
            new_b = lo + _INV_PHI * (hi - lo)
            # reuse the surviving interior point
            a, b = np.where(left, new_a, b), np.where(left, a, new_b)
            fa, fb = np.where(left, sq(a), fb), np.where(left, fa, sq(b))
        refined = np.minimum(fa, fb)
        out[start:start + chunk] = np.sqrt(np.minimum(best, refined))
    return out


def corridor_distance(corridor: Corridor, point: tuple[float, float]) -> float:
    """Minimum Euclidean distance [m] from ``point`` to the reference curve."""
    return float(corridor_distances(corridor, [point])[0])
