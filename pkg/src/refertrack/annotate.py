"""Two-click identity propagation: turn a pair of clicks on one object into
a referent interval on an expression.

A click pair names an object at an action-start frame and an action-end
frame; every intermediate frame is covered by the object's identity, so no
per-frame labeling is needed. Frames inside the interval where the object
has no box simply contribute nothing (:func:`data.referent_frames` skips
them); identities persist across occlusion gaps.

All operations are pure: they return a new annotation and never mutate the
input. Interval lists are kept canonical (sorted, overlap- and
adjacency-merged) so repeated or out-of-order clicks converge to the same
annotation.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

from .data import Expression, ReferentInterval, SequenceAnnotation
from .errors import ClickRejected, ValidationError


@dataclass(frozen=True)
class ClickPair:
    object_id: int
    start_frame: int
    end_frame: int
    expression_id: int

    def __post_init__(self) -> None:
        if self.start_frame > self.end_frame:
            raise ValidationError(
                f"click pair reversed: start {self.start_frame} > end {self.end_frame}"
            )


def _merged(intervals: list[ReferentInterval], object_id: int) -> list[ReferentInterval]:
    """Canonical form for one object's intervals: sorted, overlap/adjacency merged."""
    own = sorted(
        (iv for iv in intervals if iv.object_id == object_id), key=lambda iv: iv.start
    )
    merged: list[ReferentInterval] = []
    for iv in own:
        if merged and iv.start <= merged[-1].end + 1:
            last = merged[-1]
            merged[-1] = ReferentInterval(object_id, last.start, max(last.end, iv.end))
        else:
            merged.append(iv)
    return merged


def _rebuild(expr: Expression, object_id: int, own: list[ReferentInterval]) -> Expression:
    others = [iv for iv in expr.referents if iv.object_id != object_id]
    return Expression(
        expression_id=expr.expression_id,
        text=expr.text,
        referents=sorted(others + own, key=lambda iv: (iv.object_id, iv.start)),
    )


def propagate(ann: SequenceAnnotation, click: ClickPair) -> SequenceAnnotation:
    """Apply a click pair: add interval [start, end] for the clicked object.

    Idempotent, and overlapping/adjacent intervals of the same object are
    merged. Rejects clicks on frames where the object is not visible.
    """
    expr = ann.expression(click.expression_id)
    obj = ann.object(click.object_id)
    for frame in (click.start_frame, click.end_frame):
        if frame not in obj.boxes:
            raise ClickRejected(
                f"object {click.object_id} is not visible at frame {frame}"
            )
    new_ann = copy.deepcopy(ann)
    expr = new_ann.expression(click.expression_id)
    own = _merged(
        expr.referents
        + [ReferentInterval(click.object_id, click.start_frame, click.end_frame)],
        click.object_id,
    )
    new_ann.expressions = [
        _rebuild(e, click.object_id, own) if e.expression_id == click.expression_id else e
        for e in new_ann.expressions
    ]
    return new_ann


def retract(
    ann: SequenceAnnotation, expression_id: int, object_id: int, frame: int
) -> SequenceAnnotation:
    """Remove one frame from the interval containing it (split or truncate)."""
    expr = ann.expression(expression_id)
    containing = [
        iv for iv in expr.referents if iv.object_id == object_id and iv.contains(frame)
    ]
    if not containing:
        raise ValidationError(
            f"no referent interval of object {object_id} contains frame {frame} "
            f"in expression {expression_id}"
        )
    target = containing[0]
    remainder = []
    if target.start <= frame - 1:
        remainder.append(ReferentInterval(object_id, target.start, frame - 1))
    if frame + 1 <= target.end:
        remainder.append(ReferentInterval(object_id, frame + 1, target.end))
    new_ann = copy.deepcopy(ann)
    own = [
        iv
        for iv in new_ann.expression(expression_id).referents
        if iv.object_id == object_id and iv != target
    ] + remainder
    own.sort(key=lambda iv: iv.start)
    new_ann.expressions = [
        _rebuild(e, object_id, own) if e.expression_id == expression_id else e
        for e in new_ann.expressions
    ]
    return new_ann


def create_expression(ann: SequenceAnnotation, text: str) -> tuple[SequenceAnnotation, int]:
    """Add an expression with no referents yet; returns (annotation, new id)."""
    trimmed = text.strip()
    if not trimmed:
        raise ValidationError("expression text is empty")
    new_id = max((e.expression_id for e in ann.expressions), default=-1) + 1
    new_ann = copy.deepcopy(ann)
    new_ann.expressions.append(Expression(expression_id=new_id, text=trimmed))
    return new_ann, new_id
