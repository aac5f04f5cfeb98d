"""Axis-aligned rectangles and polylines in PDF page space (points, y up)."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Rect:
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        if self.x1 < self.x0 or self.y1 < self.y0:
            raise ValueError(f"degenerate rect: {self}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0

    def contains_point(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def contains_rect(self, other: "Rect") -> bool:
        return (
            self.x0 <= other.x0
            and self.y0 <= other.y0
            and other.x1 <= self.x1
            and other.y1 <= self.y1
        )

    def intersection_area(self, other: "Rect") -> float:
        w = min(self.x1, other.x1) - max(self.x0, other.x0)
        h = min(self.y1, other.y1) - max(self.y0, other.y0)
        if w <= 0 or h <= 0:
            return 0.0
        return w * h

    def intersects(self, other: "Rect") -> bool:
        # Boundary contact counts: a polyline grazing an edge is a hit.
        return (
            self.x0 <= other.x1
            and other.x0 <= self.x1
            and self.y0 <= other.y1
            and other.y0 <= self.y1
        )

    def union(self, other: "Rect") -> "Rect":
        return Rect(
            min(self.x0, other.x0),
            min(self.y0, other.y0),
            max(self.x1, other.x1),
            max(self.y1, other.y1),
        )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x0, self.y0, self.x1, self.y1)


def rect_union(rects: list[Rect]) -> Rect:
    if not rects:
        raise ValueError("rect_union of empty list")
    out = rects[0]
    for r in rects[1:]:
        out = out.union(r)
    return out


def segment_entry_param(
    p0: tuple[float, float], p1: tuple[float, float], rect: Rect
) -> float | None:
    """First t in [0, 1] where the segment p0 + t*(p1-p0) touches `rect`.

    Boundaries are inclusive; a segment starting inside returns 0.0.
    Returns None when the segment misses the rectangle entirely.
    """
    (x0, y0), (x1, y1) = p0, p1
    tmin, tmax = 0.0, 1.0
    for start, delta, lo, hi in (
        (x0, x1 - x0, rect.x0, rect.x1),
        (y0, y1 - y0, rect.y0, rect.y1),
    ):
        if delta == 0.0:
            if start < lo or start > hi:
                return None
            continue
        t_lo = (lo - start) / delta
        t_hi = (hi - start) / delta
        if t_lo > t_hi:
            t_lo, t_hi = t_hi, t_lo
        tmin = max(tmin, t_lo)
        tmax = min(tmax, t_hi)
        if tmin > tmax:
            return None
    return tmin
