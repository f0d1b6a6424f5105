"""Exact planar primitives for billiard scenes.

Coordinates are Fractions throughout.  Walls are straight segments (any
rational slope) or parabola arcs with a vertical axis; grid routing keeps
every arc axis-aligned, so no other curve type is needed.  Reflection and
intersection predicates on these primitives are exact; the numeric tracer
in ``simulate`` re-derives everything in high-precision floats and is
checked against the exact layer.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction


def F(x):
    return x if isinstance(x, Fraction) else Fraction(x)


Point = tuple  # (Fraction, Fraction)


@dataclass(frozen=True)
class Segment:
    """Straight wall between two exact endpoints."""

    p0: Point
    p1: Point
    wall_id: str

    def __post_init__(self):
        if self.p0 == self.p1:
            raise ValueError(f"degenerate segment {self.wall_id}")

    @property
    def kind(self):
        return "segment"

    def bbox(self):
        (x0, y0), (x1, y1) = self.p0, self.p1
        return (min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1))

    def translated(self, dx, dy):
        return Segment((self.p0[0] + dx, self.p0[1] + dy),
                       (self.p1[0] + dx, self.p1[1] + dy), self.wall_id)

    def mirrored_y(self, axis):
        """Reflect across the horizontal line y = axis."""
        return Segment((self.p0[0], 2 * axis - self.p0[1]),
                       (self.p1[0], 2 * axis - self.p1[1]), self.wall_id)


@dataclass(frozen=True)
class ParabolaArc:
    """Arc of y = apex_y + sign * (x - axis_x)**2 / (4 p), x in [x_lo, x_hi].

    sign +1 opens upward, -1 downward.  The focus sits at
    (axis_x, apex_y + sign * p).
    """

    axis_x: Fraction
    apex_y: Fraction
    p: Fraction
    sign: int
    x_lo: Fraction
    x_hi: Fraction
    wall_id: str

    def __post_init__(self):
        if self.p <= 0 or self.sign not in (-1, 1) or self.x_lo >= self.x_hi:
            raise ValueError(f"degenerate arc {self.wall_id}")

    @property
    def kind(self):
        return "parabola_arc"

    @property
    def focus(self):
        return (self.axis_x, self.apex_y + self.sign * self.p)

    def y_at(self, x):
        return self.apex_y + self.sign * (x - self.axis_x) ** 2 / (4 * self.p)

    def bbox(self):
        ys = [self.y_at(self.x_lo), self.y_at(self.x_hi)]
        if self.x_lo < self.axis_x < self.x_hi:
            ys.append(self.apex_y)
        return (self.x_lo, min(ys), self.x_hi, max(ys))

    def translated(self, dx, dy):
        return replace(self, axis_x=self.axis_x + dx, apex_y=self.apex_y + dy,
                       x_lo=self.x_lo + dx, x_hi=self.x_hi + dx)

    def mirrored_y(self, axis):
        return replace(self, apex_y=2 * axis - self.apex_y, sign=-self.sign)


@dataclass(frozen=True)
class MarkedSegment:
    """A non-reflecting marked segment (checkpoint / launch chart).

    chart(u) = origin + u * tangent for u in [0, 1]; ``beam`` is the
    crossing direction of forward trajectories.  ``hard`` marks segments
    that are also walls (the halt checkpoint bounces orthogonally).
    """

    name: str
    origin: Point
    tangent: Point  # unit axis-aligned
    beam: Point     # unit axis-aligned, perpendicular to tangent
    hard: bool = False

    def chart(self, u):
        return (self.origin[0] + u * self.tangent[0],
                self.origin[1] + u * self.tangent[1])

    def chart_inverse(self, point):
        dx = point[0] - self.origin[0]
        dy = point[1] - self.origin[1]
        u = dx * self.tangent[0] + dy * self.tangent[1]
        off = dx * self.tangent[1] - dy * self.tangent[0]
        if off != 0:
            raise ValueError(f"point not on chart line of {self.name}")
        return u

    def as_segment(self, lo=0, hi=1):
        return Segment(self.chart(lo), self.chart(hi), f"wall:{self.name}")

    def translated(self, dx, dy):
        return replace(self, origin=(self.origin[0] + dx, self.origin[1] + dy))


@dataclass(frozen=True)
class Port:
    """Gadget interface: a transverse chart plus beam direction.

    chart(u) = origin + u * tangent; the window [lo, hi] is the coordinate
    range beams may occupy.  Two gadgets are connected by making their
    port charts literally identical.
    """

    origin: Point
    tangent: Point
    beam: Point
    lo: Fraction
    hi: Fraction

    def chart(self, u):
        return (self.origin[0] + u * self.tangent[0],
                self.origin[1] + u * self.tangent[1])

    def translated(self, dx, dy):
        return replace(self, origin=(self.origin[0] + dx, self.origin[1] + dy))

    def mirrored_y(self, axis):
        ox, oy = self.origin
        return replace(self, origin=(ox, 2 * axis - oy),
                       tangent=(self.tangent[0], -self.tangent[1]),
                       beam=(self.beam[0], -self.beam[1]))


def reflect_direction(v, n):
    """Specular law v' = v - 2 <v,n> n / <n,n>, exact (n need not be unit)."""
    vx, vy = v
    nx, ny = n
    k = Fraction(2) * (vx * nx + vy * ny) / (nx * nx + ny * ny)
    return (vx - k * nx, vy - k * ny)


def segment_normal(seg):
    (x0, y0), (x1, y1) = seg.p0, seg.p1
    return (y0 - y1, x1 - x0)


def _orient(a, b, c):
    v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return (v > 0) - (v < 0)


def segments_intersect(s1, s2):
    """Exact closed-segment intersection test."""
    a, b, c, d = s1.p0, s1.p1, s2.p0, s2.p1
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    if o1 != o2 and o3 != o4:
        return True

    def on(p, q, r):  # r collinear with pq, inside bbox
        return (min(p[0], q[0]) <= r[0] <= max(p[0], q[0]) and
                min(p[1], q[1]) <= r[1] <= max(p[1], q[1]))

    if o1 == 0 and on(a, b, c):
        return True
    if o2 == 0 and on(a, b, d):
        return True
    if o3 == 0 and on(c, d, a):
        return True
    if o4 == 0 and on(c, d, b):
        return True
    return False


def bboxes_disjoint(b1, b2):
    return b1[2] < b2[0] or b2[2] < b1[0] or b1[3] < b2[1] or b2[3] < b1[1]


def walls_clash(w1, w2):
    """Exact where cheap, conservative otherwise.

    Segment/segment is exact; anything involving an arc falls back to
    bounding boxes (a disjoint verdict is certain, overlap is only
    'possible'), which the layout avoids by spacing cells.
    """
    if bboxes_disjoint(w1.bbox(), w2.bbox()):
        return False
    if w1.kind == "segment" and w2.kind == "segment":
        return segments_intersect(w1, w2)
    return True
