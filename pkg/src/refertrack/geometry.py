"""Axis-aligned boxes, coordinate conversions, and overlap measures.

Two representations are used throughout the toolkit:

- ``Box``: corner form ``(x1, y1, x2, y2)`` in pixels, origin top-left.
- ``NormBox``: center form ``(cx, cy, w, h)`` relative to the frame size.

All geometry is continuous (real-valued edges, no pixel discretization).
Degenerate boxes are rejected at construction so the overlap functions can
assume positive areas.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle in pixel coordinates with x1 < x2, y1 < y2."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(
                f"degenerate box: ({self.x1}, {self.y1}, {self.x2}, {self.y2})"
            )

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)

    def translated(self, dx: float, dy: float) -> "Box":
        return Box(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)


@dataclass(frozen=True)
class NormBox:
    """Center/size box with every field in [0, 1], relative to the frame."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("cx", "cy", "w", "h"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"NormBox.{name}={v} outside [0, 1]")
        if self.w <= 0.0 or self.h <= 0.0:
            raise ValueError(f"NormBox with non-positive size: w={self.w} h={self.h}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.cx, self.cy, self.w, self.h)

    def to_xyxy(self) -> tuple[float, float, float, float]:
        """Corner form in the same normalized coordinate system."""
        return (
            self.cx - self.w / 2.0,
            self.cy - self.h / 2.0,
            self.cx + self.w / 2.0,
            self.cy + self.h / 2.0,
        )


def _intersection_area(a: Box, b: Box) -> float:
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    return iw * ih


def iou(a: Box, b: Box) -> float:
    """Intersection over union, in [0, 1]."""
    inter = _intersection_area(a, b)
    union = a.area + b.area - inter
    return inter / union


def giou(a: Box, b: Box) -> float:
    """Generalized IoU: IoU minus the hull area not covered by the union.

    Equals plain IoU when the union fills the smallest enclosing box;
    approaches -1 for far-apart boxes. Range (-1, 1].
    """
    inter = _intersection_area(a, b)
    union = a.area + b.area - inter
    hull = (max(a.x2, b.x2) - min(a.x1, b.x1)) * (max(a.y2, b.y2) - min(a.y1, b.y1))
    return inter / union - (hull - union) / hull


def to_norm(b: Box, frame_w: float, frame_h: float) -> NormBox:
    """Convert a pixel box inside the frame to center/size relative form.

    Raises ValueError if the frame is empty or the box extends past it.
    """
    if frame_w <= 0 or frame_h <= 0:
        raise ValueError(f"empty frame: {frame_w}x{frame_h}")
    if b.x1 < 0 or b.y1 < 0 or b.x2 > frame_w or b.y2 > frame_h:
        raise ValueError(
            f"box {b.as_tuple()} outside frame {frame_w}x{frame_h}"
        )
    return NormBox(
        cx=(b.x1 + b.x2) / 2.0 / frame_w,
        cy=(b.y1 + b.y2) / 2.0 / frame_h,
        w=(b.x2 - b.x1) / frame_w,
        h=(b.y2 - b.y1) / frame_h,
    )


def from_norm(nb: NormBox, frame_w: float, frame_h: float) -> Box:
    """Inverse of :func:`to_norm`."""
    if frame_w <= 0 or frame_h <= 0:
        raise ValueError(f"empty frame: {frame_w}x{frame_h}")
    x1, y1, x2, y2 = nb.to_xyxy()
    return Box(x1 * frame_w, y1 * frame_h, x2 * frame_w, y2 * frame_h)
