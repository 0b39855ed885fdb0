"""Query lifecycle: how per-frame scores become persistent track identities.

Each frame a scorer produces one entry per query slot: first one entry for
every live track (same order as ``state.live_tracks``), then up to
``detect_slots`` entries for potential new-born objects. ``step`` keeps
track slots whose class score clears the threshold (identity preserved),
promotes detect slots above the threshold to new tracks with fresh ids, and
drops the rest. A slot's referent flag is re-decided every frame from its
referring score, so an object can enter and leave the referent set mid-track.

The scorer abstraction stands in for the neural decoder: the oracle scorer
replays ground truth (optionally corrupted for robustness tests), and
``iou_associator`` implements the classic detection-association baseline.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .assignment import solve_max_score
from .data import PredictionRow, PredictionSet, SequenceAnnotation, referent_frames
from .errors import ValidationError
from .geometry import Box, iou

__all__ = [
    "TrackerConfig",
    "QuerySlot",
    "SlotScore",
    "TrackerState",
    "OutputRow",
    "Scorer",
    "step",
    "run",
    "oracle_scorer",
    "iou_associator",
]


@dataclass(frozen=True)
class TrackerConfig:
    class_threshold: float = 0.7
    ref_threshold: float = 0.4
    detect_slots: int = 300
    patience: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.class_threshold <= 1.0 or not 0.0 <= self.ref_threshold <= 1.0:
            raise ValueError("thresholds must lie in [0, 1]")
        if self.detect_slots < 1:
            raise ValueError("detect_slots must be >= 1")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")


@dataclass(frozen=True)
class SlotScore:
    """Scorer output for one slot: visibility, referring score, box.

    ``tag`` is an opaque scorer-private label (e.g. the ground-truth id an
    oracle is following); it rides along on the slot across frames.
    """

    class_score: float
    ref_score: float
    box: Box
    tag: int | None = None


@dataclass(frozen=True)
class QuerySlot:
    kind: str  # "track" | "detect"
    identity: int | None
    class_score: float
    ref_score: float
    box: Box
    tag: int | None = None
    misses: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("track", "detect"):
            raise ValueError(f"unknown slot kind '{self.kind}'")
        if self.kind == "track" and self.identity is None:
            raise ValueError("track slots need an identity")


@dataclass
class TrackerState:
    config: TrackerConfig
    frame_index: int = 0
    live_tracks: list[QuerySlot] = field(default_factory=list)
    next_id: int = 0


@dataclass(frozen=True)
class OutputRow:
    frame: int
    track_id: int
    box: Box
    class_score: float
    ref_score: float
    referent: bool


Scorer = Callable[[int, Sequence[QuerySlot]], Sequence[SlotScore]]


def step(state: TrackerState, scores: Sequence[SlotScore]) -> tuple[TrackerState, list[OutputRow]]:
    """Advance one frame. Scores cover live tracks first, then detect slots."""
    cfg = state.config
    n_live = len(state.live_tracks)
    if len(scores) < n_live:
        raise ValidationError(
            f"frame {state.frame_index}: {len(scores)} scores for {n_live} live tracks"
        )
    if len(scores) - n_live > cfg.detect_slots:
        raise ValidationError(
            f"frame {state.frame_index}: {len(scores) - n_live} detect entries "
            f"exceed the {cfg.detect_slots} detect slots"
        )
    survivors: list[QuerySlot] = []
    rows: list[OutputRow] = []
    next_id = state.next_id

    for slot, sc in zip(state.live_tracks, scores[:n_live]):
        if sc.class_score >= cfg.class_threshold:
            kept = QuerySlot(
                "track", slot.identity, sc.class_score, sc.ref_score, sc.box,
                tag=slot.tag, misses=0,
            )
            survivors.append(kept)
            rows.append(
                OutputRow(
                    state.frame_index, slot.identity, sc.box, sc.class_score,
                    sc.ref_score, sc.ref_score >= cfg.ref_threshold,
                )
            )
        elif slot.misses < cfg.patience:
            survivors.append(replace(slot, misses=slot.misses + 1))
        # else: the identity exits for good

    for sc in scores[n_live:]:
        if sc.class_score >= cfg.class_threshold:
            born = QuerySlot(
                "track", next_id, sc.class_score, sc.ref_score, sc.box, tag=sc.tag
            )
            survivors.append(born)
            rows.append(
                OutputRow(
                    state.frame_index, next_id, sc.box, sc.class_score,
                    sc.ref_score, sc.ref_score >= cfg.ref_threshold,
                )
            )
            next_id += 1

    new_state = TrackerState(
        config=cfg,
        frame_index=state.frame_index + 1,
        live_tracks=survivors,
        next_id=next_id,
    )
    return new_state, rows


def run(
    ann: SequenceAnnotation,
    expression_id: int,
    scorer: Scorer,
    config: TrackerConfig | None = None,
) -> PredictionSet:
    """Stream ``step`` over the whole sequence; referent rows form the output.

    The first frame starts with no track queries. Rows whose referring score
    clears the threshold populate the prediction set with their scores.
    """
    cfg = config or TrackerConfig()
    ann.expression(expression_id)  # raises for unknown ids
    state = TrackerState(config=cfg)
    pred = PredictionSet(sequence_id=ann.sequence_id, expression_id=expression_id)
    for t in range(ann.frame_count):
        try:
            scores = scorer(t, state.live_tracks)
        except Exception as exc:
            raise RuntimeError(f"scorer failed at frame {t}: {exc}") from exc
        state, rows = step(state, scores)
        for row in rows:
            if row.referent:
                pred.rows.append(
                    PredictionRow(row.frame, row.track_id, row.box, row.class_score, row.ref_score)
                )
    return pred


def oracle_scorer(
    ann: SequenceAnnotation,
    expression_id: int,
    box_jitter: float = 0.0,
    flip_ref_prob: float = 0.0,
    seed: int = 0,
) -> Scorer:
    """Scorer that replays ground truth for one expression.

    Visible objects score class 1.0; the referring score is 1.0 exactly on
    frames where the object is a referent. ``box_jitter`` adds seeded
    Gaussian pixel noise to every box corner and ``flip_ref_prob`` inverts
    referring scores with the given seeded probability, for degradation
    fixtures.
    """
    referent_map = referent_frames(ann, expression_id)
    rng = random.Random(seed)

    def corrupt_box(box: Box) -> Box:
        if box_jitter <= 0.0:
            return box
        x1 = box.x1 + rng.gauss(0.0, box_jitter)
        y1 = box.y1 + rng.gauss(0.0, box_jitter)
        x2 = box.x2 + rng.gauss(0.0, box_jitter)
        y2 = box.y2 + rng.gauss(0.0, box_jitter)
        if x2 <= x1:
            x1, x2 = min(x1, x2), min(x1, x2) + 1e-3
        if y2 <= y1:
            y1, y2 = min(y1, y2), min(y1, y2) + 1e-3
        return Box(x1, y1, x2, y2)

    def ref_score(object_id: int, frame: int) -> float:
        referent = object_id in referent_map.get(frame, ())
        if flip_ref_prob > 0.0 and rng.random() < flip_ref_prob:
            referent = not referent
        return 1.0 if referent else 0.0

    def score_frame(frame: int, live_tracks: Sequence[QuerySlot]) -> list[SlotScore]:
        scores: list[SlotScore] = []
        followed: set[int] = set()
        for slot in live_tracks:
            obj = ann.object(slot.tag)
            followed.add(slot.tag)
            box = obj.boxes.get(frame)
            if box is None:
                scores.append(SlotScore(0.0, 0.0, slot.box, tag=slot.tag))
            else:
                scores.append(
                    SlotScore(1.0, ref_score(slot.tag, frame), corrupt_box(box), tag=slot.tag)
                )
        for obj in sorted(ann.objects, key=lambda o: o.object_id):
            if obj.object_id in followed or frame not in obj.boxes:
                continue
            scores.append(
                SlotScore(
                    1.0,
                    ref_score(obj.object_id, frame),
                    corrupt_box(obj.boxes[frame]),
                    tag=obj.object_id,
                )
            )
        return scores

    return score_frame


@dataclass
class _IouTrack:
    identity: int
    box: Box
    misses: int = 0


def iou_associator(
    detections: Sequence[Sequence[tuple[Box, float, float]]],
    config: TrackerConfig | None = None,
    sequence_id: str = "",
    expression_id: int = -1,
    iou_threshold: float = 0.3,
) -> PredictionSet:
    """Frame-to-frame IoU association baseline over per-frame detections.

    Detections are (box, class_score, ref_score) triples per frame. Each
    frame is matched against the previous frame's tracks by maximizing total
    IoU; pairs below ``iou_threshold`` do not associate. Unmatched
    detections open fresh ids; tracks unmatched for more than
    ``config.patience`` consecutive frames are dropped.
    """
    cfg = config or TrackerConfig()
    tracks: list[_IouTrack] = []
    next_id = 0
    pred = PredictionSet(sequence_id=sequence_id, expression_id=expression_id)
    for frame, dets in enumerate(detections):
        det_to_track: dict[int, int] = {}
        if tracks and dets:
            scores = [[iou(trk.box, det[0]) for det in dets] for trk in tracks]
            for ti, di in solve_max_score(scores).pairs:
                if scores[ti][di] >= iou_threshold:
                    det_to_track[di] = ti
        kept: list[_IouTrack] = []
        matched_tracks = set(det_to_track.values())
        for ti, trk in enumerate(tracks):
            if ti in matched_tracks:
                kept.append(_IouTrack(trk.identity, trk.box, 0))
            elif trk.misses < cfg.patience:
                kept.append(_IouTrack(trk.identity, trk.box, trk.misses + 1))
        by_identity = {trk.identity: trk for trk in kept}
        for di, det in enumerate(dets):
            box, class_score, ref_score = det
            ti = det_to_track.get(di)
            if ti is None:
                kept.append(_IouTrack(next_id, box))
                identity = next_id
                next_id += 1
            else:
                identity = tracks[ti].identity
                by_identity[identity].box = box
            pred.rows.append(PredictionRow(frame, identity, box, class_score, ref_score))
        tracks = kept
    return pred
