"""Converter stub from KITTI tracking labels to the annotation schema.

KITTI tracking label files are whitespace-separated, one detection per
line::

    frame track_id type truncated occluded alpha x1 y1 x2 y2 ...

Only the first ten columns are consumed. Entries typed ``DontCare`` or with
``track_id == -1`` are skipped. The result carries no expressions; those
are authored afterwards with the annotation tools. Boxes are clipped to the
frame so downstream invariants hold.
"""

from __future__ import annotations

from pathlib import Path

from .data import SequenceAnnotation, TrackedObject
from .errors import SchemaError
from .geometry import Box


def convert_kitti_labels(
    path: str | Path,
    sequence_id: str,
    frame_w: int = 1242,
    frame_h: int = 375,
    frame_count: int | None = None,
) -> SequenceAnnotation:
    path = Path(path)
    objects: dict[int, TrackedObject] = {}
    max_frame = 0
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) < 10:
            raise SchemaError(f"{path}: line {lineno}: expected >= 10 columns")
        try:
            frame = int(parts[0])
            track_id = int(parts[1])
            category = parts[2]
            x1, y1, x2, y2 = (float(v) for v in parts[6:10])
        except ValueError as exc:
            raise SchemaError(f"{path}: line {lineno}: {exc}") from exc
        if category == "DontCare" or track_id < 0:
            continue
        x1, x2 = max(0.0, x1), min(float(frame_w), x2)
        y1, y2 = max(0.0, y1), min(float(frame_h), y2)
        if x2 <= x1 or y2 <= y1:
            continue
        obj = objects.setdefault(track_id, TrackedObject(track_id, category))
        obj.boxes[frame] = Box(x1, y1, x2, y2)
        max_frame = max(max_frame, frame)
    ann = SequenceAnnotation(
        sequence_id=sequence_id,
        frame_count=frame_count if frame_count is not None else max_frame + 1,
        frame_w=frame_w,
        frame_h=frame_h,
        objects=[objects[k] for k in sorted(objects)],
    )
    ann.validate()
    return ann
