"""Planar geometry kernel: circles, the inscribed square, the triangle grid
packed into it, and the region predicates used to select goal centroids.

Points are float64 numpy arrays of shape ``(2,)``; point sets are ``(k, 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousSegment, InvalidGridSize, InvalidPolygon, InvalidRegion, RegionTooSmall

Vec2 = np.ndarray

REL_TOL = 1e-9


def vec2(x, y=None) -> Vec2:
    """Build a finite 2-vector from ``(x, y)`` or from any length-2 sequence."""
    arr = np.asarray((x, y) if y is not None else x, dtype=float).reshape(2)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"non-finite coordinates: {arr!r}")
    return arr


def as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return np.zeros((0, 2))
    return arr.reshape(-1, 2)


def cross2(a, b):
    """z-component of the cross product, broadcasting over leading axes."""
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


@dataclass(frozen=True, eq=False)
class CircleRegion:
    center: Vec2
    radius: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).reshape(2)
        if not np.all(np.isfinite(center)):
            raise InvalidRegion(f"circle center must be finite, got {center!r}")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise InvalidRegion(f"circle radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))

    def contains(self, points, strict: bool = True) -> np.ndarray:
        d = np.hypot(*(as_points(points) - self.center).T)
        return d < self.radius if strict else d <= self.radius


@dataclass(frozen=True, eq=False)
class InscribedSquare:
    corners: np.ndarray  # (4, 2), counterclockwise from the upper-right corner
    side_length: float

    @property
    def lower_left(self) -> Vec2:
        return self.corners.min(axis=0)


@dataclass(frozen=True, eq=False)
class TriangleGrid:
    """Centroids of the ``2 n**2`` half-squares tiling the inscribed square.

    Row ``k`` of :attr:`points` belongs to sub-square ``(q1[k], q2[k])``
    (1-based row and column) and triangle ``tags[k]``. Triangle ``a`` is the
    half below the sub-square's anti-diagonal, ``b`` the half above it.
    """

    n: int
    l_ss: float
    anchor: Vec2
    q1: np.ndarray
    q2: np.ndarray
    tags: np.ndarray
    points: np.ndarray

    def __len__(self) -> int:
        return len(self.points)

    def triangle_vertices(self, k: int) -> np.ndarray:
        q1, q2, l = int(self.q1[k]), int(self.q2[k]), self.l_ss
        lo_x, hi_x = (q2 - 1) * l, q2 * l
        lo_y, hi_y = (q1 - 1) * l, q1 * l
        if self.tags[k] == "a":
            rel = [(lo_x, lo_y), (hi_x, lo_y), (lo_x, hi_y)]
        else:
            rel = [(hi_x, lo_y), (hi_x, hi_y), (lo_x, hi_y)]
        return self.anchor + np.array(rel)


@dataclass(frozen=True, eq=False)
class Polygon:
    """Simple polygon; vertices are stored counterclockwise."""

    vertices: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise InvalidPolygon("a polygon needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise InvalidPolygon("polygon vertices must be finite")
        area = _signed_area(v)
        scale = max(1.0, float(np.abs(v).max()))
        if abs(area) <= REL_TOL * scale * scale:
            raise InvalidPolygon("polygon has zero area")
        if _self_intersects(v):
            raise InvalidPolygon("polygon edges intersect")
        if area < 0:
            v = v[::-1].copy()
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def area(self) -> float:
        return _signed_area(self.vertices)

    @property
    def edges(self) -> np.ndarray:
        """``(k, 2, 2)`` array of ``(start, end)`` vertex pairs."""
        return np.stack([self.vertices, np.roll(self.vertices, -1, axis=0)], axis=1)

    @property
    def diameter(self) -> float:
        diff = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.hypot(diff[..., 0], diff[..., 1]).max())

    @classmethod
    def _rigid_copy(cls, vertices: np.ndarray) -> Polygon:
        # rigid motions keep a valid polygon valid and counterclockwise
        poly = object.__new__(cls)
        vertices.setflags(write=False)
        object.__setattr__(poly, "vertices", vertices)
        return poly

    def translated(self, offset) -> Polygon:
        return Polygon._rigid_copy(self.vertices + vec2(offset))

    def rotated(self, angle: float, about=(0.0, 0.0)) -> Polygon:
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        pivot = vec2(about)
        return Polygon._rigid_copy((self.vertices - pivot) @ rot.T + pivot)

    @classmethod
    def rectangle(cls, xmin: float, ymin: float, xmax: float, ymax: float) -> Polygon:
        return cls([(xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)])

    @classmethod
    def regular(cls, sides: int, radius: float, phase: float = 0.0) -> Polygon:
        ang = phase + 2 * np.pi * np.arange(sides) / sides
        return cls(np.column_stack([radius * np.cos(ang), radius * np.sin(ang)]))


def _signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _segments_intersect(p1, p2, p3, p4) -> bool:
    d1 = cross2(p4 - p3, p1 - p3)
    d2 = cross2(p4 - p3, p2 - p3)
    d3 = cross2(p2 - p1, p3 - p1)
    d4 = cross2(p2 - p1, p4 - p1)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0:
        return True

    def on_seg(a, b, p, d):
        return d == 0 and min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])

    return on_seg(p3, p4, p1, d1) or on_seg(p3, p4, p2, d2) or on_seg(p1, p2, p3, d3) or on_seg(p1, p2, p4, d4)


def _self_intersects(v: np.ndarray) -> bool:
    k = len(v)
    for i in range(k):
        for j in range(i + 1, k):
            # adjacent edges share a vertex by construction
            if j == i + 1 or (i == 0 and j == k - 1):
                continue
            if _segments_intersect(v[i], v[(i + 1) % k], v[j], v[(j + 1) % k]):
                return True
    return False


def inscribe_square(circle: CircleRegion) -> InscribedSquare:
    """Square whose four corners sit on the circle at 45, 135, 225 and 315 degrees."""
    angles = np.arange(4) * (np.pi / 2) + np.pi / 4
    corners = circle.center + circle.radius * np.column_stack([np.cos(angles), np.sin(angles)])
    return InscribedSquare(corners=corners, side_length=math.sqrt(2.0) * circle.radius)


def pack_triangles(circle: CircleRegion, n: int) -> TriangleGrid:
    """Split the inscribed square into ``n x n`` sub-squares, halve each one
    along its anti-diagonal and return the triangle centroids.

    The grid starts at the square's lower-left corner, so it covers the square
    rather than the quadrant above and to the right of the center.
    """
    if int(n) != n or n < 1:
        raise InvalidGridSize(f"grid resolution must be a positive integer, got {n!r}")
    n = int(n)
    half = math.sqrt(2.0) * circle.radius / 2.0
    anchor = circle.center - half
    l_ss = math.sqrt(2.0) * circle.radius / n

    q1, q2 = np.meshgrid(np.arange(1, n + 1), np.arange(1, n + 1), indexing="ij")
    q1 = np.repeat(q1.ravel(), 2)
    q2 = np.repeat(q2.ravel(), 2)
    tags = np.tile(np.array(["a", "b"]), n * n)
    shift = np.where(tags == "a", 2.0, 1.0)
    rel = np.column_stack([(3 * q2 - shift) / 3.0, (3 * q1 - shift) / 3.0])
    points = anchor + l_ss * rel
    return TriangleGrid(n=n, l_ss=l_ss, anchor=anchor, q1=q1, q2=q2, tags=tags, points=points)


def max_grid_resolution(r_c: float, r_s: float) -> int:
    """Largest ``n`` with ``n <= r_c / (3 r_s)``.

    Raises :class:`RegionTooSmall` when even ``n = 1`` violates the bound.
    """
    if not (r_c > 0 and r_s > 0):
        raise ValueError("r_c and r_s must both be positive")
    bound = r_c / (3.0 * r_s)
    n = math.floor(bound * (1.0 + REL_TOL))
    if n < 1:
        raise RegionTooSmall(
            f"r_c / (3 r_s) = {bound:.4g} < 1: no triangle grid keeps agents outside each other's repulsion region"
        )
    return n


def points_in_polygon(points, poly: Polygon) -> np.ndarray:
    """Vectorized :func:`point_in_polygon`."""
    pts = as_points(points)
    edges = poly.edges
    a = edges[None, :, 0, :]
    b = edges[None, :, 1, :]
    p = pts[:, None, :]

    # crossing number on a horizontal ray to +x
    ay, by = a[..., 1], b[..., 1]
    straddle = (ay > p[..., 1]) != (by > p[..., 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = a[..., 0] + (p[..., 1] - ay) * (b[..., 0] - a[..., 0]) / (by - ay)
    inside = (np.count_nonzero(straddle & (p[..., 0] < x_cross), axis=1) % 2) == 1

    # boundary counts as inside
    ab = b - a
    ap = p - a
    seg_len = np.hypot(ab[..., 0], ab[..., 1])
    scale = max(1.0, float(np.abs(poly.vertices).max()), float(np.abs(pts).max()) if len(pts) else 1.0)
    collinear = np.abs(cross2(ab, ap)) <= REL_TOL * scale * seg_len
    t = np.einsum("...i,...i->...", ap, ab)
    within = (t >= -REL_TOL * scale * seg_len) & (t <= seg_len**2 + REL_TOL * scale * seg_len)
    on_boundary = np.any(collinear & within, axis=1)
    return inside | on_boundary


def point_in_polygon(p, poly: Polygon) -> bool:
    """True if ``p`` is inside ``poly`` or on its boundary."""
    if not isinstance(poly, Polygon):
        poly = Polygon(poly)
    return bool(points_in_polygon(vec2(p), poly)[0])


def quadrants(points, center) -> np.ndarray:
    """Segment index 1..4 for every point, counterclockwise from +x.

    Segment ``k`` owns polar angles in ``[(k-1) pi/2, k pi/2)`` measured about
    ``center``, so each boundary ray belongs to the segment it opens.
    """
    d = as_points(points) - vec2(center)
    dx, dy = d[:, 0], d[:, 1]
    if np.any((dx == 0) & (dy == 0)):
        raise AmbiguousSegment("point coincides with the segmentation center")
    seg = np.select(
        [(dx > 0) & (dy >= 0), (dx <= 0) & (dy > 0), (dx < 0) & (dy <= 0)],
        [1, 2, 3],
        default=4,
    )
    return seg.astype(int)


def quadrant_of(p, center) -> int:
    return int(quadrants(vec2(p), center)[0])
