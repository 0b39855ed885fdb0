"""Canonical schema for sequences, expressions, referent intervals, and
tracker predictions, plus the file formats and dataset statistics.

On-disk formats
---------------
Annotation (one JSON document per sequence, UTF-8, LF):

    {"sequence_id": str, "frame_count": int, "frame_w": int, "frame_h": int,
     "objects": [{"id": int, "category": str,
                  "boxes": {"<frame>": [x1, y1, x2, y2]}}],
     "expressions": [{"id": int, "text": str,
                      "referents": [{"object_id": int, "start": int, "end": int}]}]}

Prediction (CSV, UTF-8, LF, header exactly
``frame,track_id,x1,y1,x2,y2,class_score,ref_score``; floats use ``.`` and
at most six fractional digits).

Frames are 0-indexed everywhere. Referent ground truth is stored as closed
intervals per object and expanded on demand by :func:`referent_frames`.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from math import fsum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import SchemaError, ValidationError
from .geometry import Box

__all__ = [
    "TrackedObject",
    "ReferentInterval",
    "Expression",
    "SequenceAnnotation",
    "PredictionRow",
    "PredictionSet",
    "DatasetStats",
    "load_annotation",
    "save_annotation",
    "load_predictions",
    "save_predictions",
    "referent_frames",
    "compute_stats",
]


@dataclass
class TrackedObject:
    """One identity with its per-frame boxes; identity persists across gaps."""

    object_id: int
    category: str
    boxes: dict[int, Box] = field(default_factory=dict)

    def visible_frames(self) -> set[int]:
        return set(self.boxes)


@dataclass(frozen=True)
class ReferentInterval:
    """Closed frame interval [start, end] during which an object is referent."""

    object_id: int
    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValidationError(
                f"referent interval for object {self.object_id}: "
                f"start {self.start} > end {self.end}"
            )

    def contains(self, frame: int) -> bool:
        return self.start <= frame <= self.end


@dataclass
class Expression:
    expression_id: int
    text: str
    referents: list[ReferentInterval] = field(default_factory=list)


@dataclass
class SequenceAnnotation:
    """Identity-indexed ground truth for one video plus its expressions."""

    sequence_id: str
    frame_count: int
    frame_w: int
    frame_h: int
    objects: list[TrackedObject] = field(default_factory=list)
    expressions: list[Expression] = field(default_factory=list)

    def object(self, object_id: int) -> TrackedObject:
        for obj in self.objects:
            if obj.object_id == object_id:
                return obj
        raise ValidationError(f"unknown object_id {object_id} in sequence {self.sequence_id}")

    def expression(self, expression_id: int) -> Expression:
        for expr in self.expressions:
            if expr.expression_id == expression_id:
                return expr
        raise ValidationError(
            f"unknown expression_id {expression_id} in sequence {self.sequence_id}"
        )

    def validate(self) -> None:
        """Check every documented invariant; raise ValidationError naming the culprit."""
        if self.frame_count < 1:
            raise ValidationError(f"sequence {self.sequence_id}: frame_count must be >= 1")
        if self.frame_w <= 0 or self.frame_h <= 0:
            raise ValidationError(f"sequence {self.sequence_id}: empty frame size")
        seen_ids: set[int] = set()
        for obj in self.objects:
            if obj.object_id < 0:
                raise ValidationError(f"object_id {obj.object_id} is negative")
            if obj.object_id in seen_ids:
                raise ValidationError(f"duplicate object_id {obj.object_id}")
            seen_ids.add(obj.object_id)
            for frame, box in obj.boxes.items():
                if not 0 <= frame < self.frame_count:
                    raise ValidationError(
                        f"object {obj.object_id}: frame {frame} outside "
                        f"[0, {self.frame_count})"
                    )
                if box.x1 < 0 or box.y1 < 0 or box.x2 > self.frame_w or box.y2 > self.frame_h:
                    raise ValidationError(
                        f"object {obj.object_id}: box at frame {frame} outside "
                        f"{self.frame_w}x{self.frame_h} frame"
                    )
        seen_expr: set[int] = set()
        for expr in self.expressions:
            if expr.expression_id in seen_expr:
                raise ValidationError(f"duplicate expression_id {expr.expression_id}")
            seen_expr.add(expr.expression_id)
            by_object: dict[int, list[ReferentInterval]] = {}
            for ref in expr.referents:
                if ref.object_id not in seen_ids:
                    raise ValidationError(
                        f"expression {expr.expression_id}: referent object_id "
                        f"{ref.object_id} not present in sequence"
                    )
                by_object.setdefault(ref.object_id, []).append(ref)
            for object_id, intervals in by_object.items():
                ordered = sorted(intervals, key=lambda iv: iv.start)
                for prev, cur in zip(ordered, ordered[1:]):
                    if cur.start <= prev.end:
                        raise ValidationError(
                            f"expression {expr.expression_id}: overlapping intervals "
                            f"for object {object_id}"
                        )


@dataclass(frozen=True)
class PredictionRow:
    frame: int
    track_id: int
    box: Box
    class_score: float
    ref_score: float

    def __post_init__(self) -> None:
        if self.frame < 0:
            raise ValidationError(f"prediction frame {self.frame} is negative")
        for name in ("class_score", "ref_score"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"prediction {name}={v} outside [0, 1]")


@dataclass
class PredictionSet:
    """Tracker output for one (sequence, expression) pair."""

    sequence_id: str
    expression_id: int
    rows: list[PredictionRow] = field(default_factory=list)

    def validate(self, frame_count: int | None = None) -> None:
        seen: set[tuple[int, int]] = set()
        for row in self.rows:
            key = (row.frame, row.track_id)
            if key in seen:
                raise ValidationError(
                    f"duplicate prediction for frame {row.frame}, track {row.track_id}"
                )
            seen.add(key)
            if frame_count is not None and row.frame >= frame_count:
                raise ValidationError(
                    f"prediction frame {row.frame} outside [0, {frame_count})"
                )

    def by_frame(self) -> dict[int, list[PredictionRow]]:
        out: dict[int, list[PredictionRow]] = {}
        for row in self.rows:
            out.setdefault(row.frame, []).append(row)
        return out


# --------------------------------------------------------------------------
# annotation JSON


def _require(mapping: Mapping, key: str, where: str):
    if key not in mapping:
        raise SchemaError(f"{where}: missing field '{key}'")
    return mapping[key]


def annotation_from_dict(doc: Mapping) -> SequenceAnnotation:
    if not isinstance(doc, Mapping):
        raise SchemaError("annotation document must be a JSON object")
    where = "annotation"
    ann = SequenceAnnotation(
        sequence_id=str(_require(doc, "sequence_id", where)),
        frame_count=int(_require(doc, "frame_count", where)),
        frame_w=int(_require(doc, "frame_w", where)),
        frame_h=int(_require(doc, "frame_h", where)),
    )
    for entry in _require(doc, "objects", where):
        oid = int(_require(entry, "id", "objects[]"))
        obj = TrackedObject(object_id=oid, category=str(_require(entry, "category", f"object {oid}")))
        for frame_key, coords in _require(entry, "boxes", f"object {oid}").items():
            try:
                frame = int(frame_key)
            except ValueError as exc:
                raise SchemaError(f"object {oid}: non-integer frame key '{frame_key}'") from exc
            if len(coords) != 4:
                raise SchemaError(f"object {oid}, frame {frame}: box needs 4 coordinates")
            if frame in obj.boxes:
                raise SchemaError(f"object {oid}: duplicate box for frame {frame}")
            try:
                obj.boxes[frame] = Box(*(float(c) for c in coords))
            except ValueError as exc:
                raise ValidationError(f"object {oid}, frame {frame}: {exc}") from exc
        ann.objects.append(obj)
    for entry in _require(doc, "expressions", where):
        eid = int(_require(entry, "id", "expressions[]"))
        expr = Expression(expression_id=eid, text=str(_require(entry, "text", f"expression {eid}")))
        for ref in _require(entry, "referents", f"expression {eid}"):
            expr.referents.append(
                ReferentInterval(
                    object_id=int(_require(ref, "object_id", f"expression {eid} referent")),
                    start=int(_require(ref, "start", f"expression {eid} referent")),
                    end=int(_require(ref, "end", f"expression {eid} referent")),
                )
            )
        ann.expressions.append(expr)
    ann.validate()
    return ann


def annotation_to_dict(ann: SequenceAnnotation) -> dict:
    return {
        "sequence_id": ann.sequence_id,
        "frame_count": ann.frame_count,
        "frame_w": ann.frame_w,
        "frame_h": ann.frame_h,
        "objects": [
            {
                "id": obj.object_id,
                "category": obj.category,
                "boxes": {
                    str(frame): list(obj.boxes[frame].as_tuple())
                    for frame in sorted(obj.boxes)
                },
            }
            for obj in ann.objects
        ],
        "expressions": [
            {
                "id": expr.expression_id,
                "text": expr.text,
                "referents": [
                    {"object_id": r.object_id, "start": r.start, "end": r.end}
                    for r in expr.referents
                ],
            }
            for expr in ann.expressions
        ],
    }


def load_annotation(path: str | Path) -> SequenceAnnotation:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read annotation {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return annotation_from_dict(doc)


def save_annotation(ann: SequenceAnnotation, path: str | Path) -> None:
    """Write atomically (temp file + rename) so readers never see torn files."""
    ann.validate()
    path = Path(path)
    payload = json.dumps(annotation_to_dict(ann), ensure_ascii=False, indent=2) + "\n"
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(payload, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


# --------------------------------------------------------------------------
# prediction CSV

PREDICTION_HEADER = "frame,track_id,x1,y1,x2,y2,class_score,ref_score"


def _fmt(value: float) -> str:
    """Canonical float rendering: at most 6 fractional digits, no trailing zeros."""
    s = f"{value:.6f}".rstrip("0").rstrip(".")
    return s if s and s != "-0" else "0"


def load_predictions(
    path: str | Path, sequence_id: str = "", expression_id: int = -1
) -> PredictionSet:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read predictions {path}: {exc}") from exc
    lines = text.split("\n")
    if not lines or lines[0] != PREDICTION_HEADER:
        raise SchemaError(f"{path}: line 1: expected header '{PREDICTION_HEADER}'")
    pred = PredictionSet(sequence_id=sequence_id, expression_id=expression_id)
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 8:
            raise SchemaError(f"{path}: line {lineno}: expected 8 fields, got {len(parts)}")
        try:
            frame, track_id = int(parts[0]), int(parts[1])
            x1, y1, x2, y2 = (float(p) for p in parts[2:6])
            class_score, ref_score = float(parts[6]), float(parts[7])
        except ValueError as exc:
            raise SchemaError(f"{path}: line {lineno}: {exc}") from exc
        try:
            row = PredictionRow(frame, track_id, Box(x1, y1, x2, y2), class_score, ref_score)
        except ValueError as exc:
            raise ValidationError(f"{path}: line {lineno}: {exc}") from exc
        pred.rows.append(row)
    pred.validate()
    return pred


def save_predictions(pred: PredictionSet, path: str | Path) -> None:
    pred.validate()
    path = Path(path)
    lines = [PREDICTION_HEADER]
    for row in sorted(pred.rows, key=lambda r: (r.frame, r.track_id)):
        lines.append(
            ",".join(
                [
                    str(row.frame),
                    str(row.track_id),
                    _fmt(row.box.x1),
                    _fmt(row.box.y1),
                    _fmt(row.box.x2),
                    _fmt(row.box.y2),
                    _fmt(row.class_score),
                    _fmt(row.ref_score),
                ]
            )
        )
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    os.replace(tmp, path)


# --------------------------------------------------------------------------
# referent expansion and dataset statistics


def referent_frames(ann: SequenceAnnotation, expression_id: int) -> dict[int, set[int]]:
    """Frames where each referent object is actually visible.

    An object counts at frame f iff f lies inside one of its referent
    intervals and the object has a box at f (no interpolation through
    visibility gaps).
    """
    expr = ann.expression(expression_id)
    out: dict[int, set[int]] = {}
    for ref in expr.referents:
        obj = ann.object(ref.object_id)
        for frame in range(ref.start, ref.end + 1):
            if frame in obj.boxes:
                out.setdefault(frame, set()).add(ref.object_id)
    return out


@dataclass
class DatasetStats:
    expressions_count: int
    mean_objects_per_expression: float
    objects_per_expression_histogram: list[tuple[int, int, int]]
    frame_length_histogram: list[tuple[int, int, int]]
    mean_temporal_ratio: float

    def to_dict(self) -> dict:
        return {
            "expressions_count": self.expressions_count,
            "mean_objects_per_expression": self.mean_objects_per_expression,
            "objects_per_expression_histogram": [
                {"lo": lo, "hi": hi, "count": count}
                for lo, hi, count in self.objects_per_expression_histogram
            ],
            "frame_length_histogram": [
                {"lo": lo, "hi": hi, "count": count}
                for lo, hi, count in self.frame_length_histogram
            ],
            "mean_temporal_ratio": self.mean_temporal_ratio,
        }


def _histogram(values: Sequence[int], bin_width: int) -> list[tuple[int, int, int]]:
    """Fixed-width bins [lo, hi) covering 0..max(values); always >= 1 bin."""
    top = max(values) if values else 0
    n_bins = top // bin_width + 1
    counts = [0] * n_bins
    for v in values:
        counts[v // bin_width] += 1
    return [(i * bin_width, (i + 1) * bin_width, c) for i, c in enumerate(counts)]


def compute_stats(annotations: Iterable[SequenceAnnotation]) -> DatasetStats:
    """Dataset-level statistics over every expression of every sequence.

    Per expression: the number of distinct referent identities, the number
    of frames with at least one visible referent, and that count as a
    fraction of the sequence length.
    """
    anns = list(annotations)
    if not anns:
        raise ValidationError("compute_stats needs at least one annotation")
    object_counts: list[int] = []
    frame_lengths: list[int] = []
    ratios: list[float] = []
    for ann in anns:
        for expr in ann.expressions:
            object_counts.append(len({r.object_id for r in expr.referents}))
            covered = referent_frames(ann, expr.expression_id)
            frame_lengths.append(len(covered))
            ratios.append(len(covered) / ann.frame_count)
    count = len(object_counts)
    if count == 0:
        raise ValidationError("no expressions found in the provided annotations")
    return DatasetStats(
        expressions_count=count,
        mean_objects_per_expression=sum(object_counts) / count,
        objects_per_expression_histogram=_histogram(object_counts, bin_width=5),
        frame_length_histogram=_histogram(frame_lengths, bin_width=50),
        mean_temporal_ratio=fsum(ratios) / count,
    )
