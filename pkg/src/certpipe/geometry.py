"""Page geometry primitives: points, polygons, bounding rectangles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DegeneratePolygon


@dataclass(frozen=True)
class Point:
    x: float
    y: float


Polygon = tuple[Point, ...]


def polygon(points: Iterable[Sequence[float]]) -> Polygon:
    return tuple(Point(float(x), float(y)) for x, y in points)


@dataclass(frozen=True)
class Rect:
    left: float
    top: float
    width: float
    height: float

    def __post_init__(self):
        if self.width < 0 or self.height < 0:
            raise ValueError("rect width/height must be >= 0")

    @property
    def right(self) -> float:
        return self.left + self.width

    @property
    def bottom(self) -> float:
        return self.top + self.height

    @property
    def center_x(self) -> float:
        return self.left + self.width / 2

    def contains(self, p: Point, tol: float = 0.0) -> bool:
        return (
            self.left - tol <= p.x <= self.right + tol
            and self.top - tol <= p.y <= self.bottom + tol
        )


def region_bounding_rect(poly: Sequence[Point]) -> Rect:
    """Minimal axis-aligned rectangle containing all polygon vertices."""
    if len(poly) < 3:
        raise DegeneratePolygon(f"polygon needs >= 3 points, got {len(poly)}")
    xs = [p.x for p in poly]
    ys = [p.y for p in poly]
    left, top = min(xs), min(ys)
    return Rect(left, top, max(xs) - left, max(ys) - top)
