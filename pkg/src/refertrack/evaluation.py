"""Referring-adapted tracking evaluation.

Ground truth for an expression is the set of referent tracklets expanded by
:func:`refertrack.data.referent_frames`; every predicted detection,
including a correctly tracked but non-referent object, that fails to match
a referent counts as a false positive.

For each localization threshold alpha the score couples detection and
association:

1. For every (ground-truth track, predicted track) pair, count the frames
   where the pair overlaps with IoU >= alpha; these counts give each pair a
   potential association score ``count / (gt_dets + pred_dets - count)``.
2. Per frame, admissible pairs (IoU >= alpha) are matched one-to-one,
   maximizing first the number of matches, then the summed association
   score (plus a tiny IoU tie-break), fixing the true positives.
3. From the matched counts: detection accuracy/recall/precision,
   association accuracy/recall/precision (each true positive contributes
   its pair's matched-frame Jaccard), mean matched IoU (LocA), and
   ``hota_alpha = sqrt(deta_alpha * assa_alpha)``.

Final metrics are the means over the alpha grid; a dataset report averages
per-expression metrics across all (sequence, expression) pairs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from math import fsum
from typing import Mapping, Sequence

from .assignment import _solve_raw
from .data import PredictionSet, SequenceAnnotation, referent_frames
from .errors import ValidationError
from .geometry import Box, iou

METRIC_KEYS = ("hota", "deta", "assa", "detre", "detpr", "assre", "asspr", "loca")

DEFAULT_ALPHAS = tuple(round(0.05 * i, 2) for i in range(1, 20))

_TIE_BREAK_IOU_WEIGHT = 1e-6
_INADMISSIBLE = -1e3  # dominates any achievable score sum for < ~500 boxes/frame


@dataclass(frozen=True)
class EvalConfig:
    alphas: tuple[float, ...] = DEFAULT_ALPHAS
    zero_zero_score: float = 1.0  # score when GT and predictions are both empty
    ref_threshold: float | None = None  # filter raw rows by ref_score when set

    def __post_init__(self) -> None:
        if not self.alphas:
            raise ValueError("alpha grid must be nonempty")
        prev = 0.0
        for a in self.alphas:
            if not prev < a < 1.0:
                raise ValueError("alphas must be strictly increasing within (0, 1)")
            prev = a


@dataclass(frozen=True)
class ExpressionMetrics:
    sequence_id: str
    expression_id: int
    alphas: tuple[float, ...]
    per_alpha: Mapping[str, tuple[float, ...]]

    def mean(self, key: str) -> float:
        values = self.per_alpha[key]
        return fsum(values) / len(values)

    @property
    def hota(self) -> float:
        return self.mean("hota")

    def summary(self) -> dict[str, float]:
        return {key: self.mean(key) for key in METRIC_KEYS}


@dataclass
class EvalReport:
    per_expression: list[ExpressionMetrics] = field(default_factory=list)

    def mean(self, key: str) -> float:
        if not self.per_expression:
            raise ValidationError("report has no evaluated expressions")
        return fsum(m.mean(key) for m in self.per_expression) / len(self.per_expression)

    def summary(self) -> dict[str, float]:
        return {key: self.mean(key) for key in METRIC_KEYS}

    def to_dict(self) -> dict:
        doc: dict = dict(self.summary())
        doc["per_expression"] = [
            {
                "sequence_id": m.sequence_id,
                "expression_id": m.expression_id,
                **m.summary(),
                "alphas": list(m.alphas),
                "per_alpha": {key: list(values) for key, values in m.per_alpha.items()},
            }
            for m in self.per_expression
        ]
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping) -> "EvalReport":
        report = cls()
        for entry in doc["per_expression"]:
            report.per_expression.append(
                ExpressionMetrics(
                    sequence_id=entry["sequence_id"],
                    expression_id=entry["expression_id"],
                    alphas=tuple(entry["alphas"]),
                    per_alpha={
                        key: tuple(values) for key, values in entry["per_alpha"].items()
                    },
                )
            )
        return report


# --------------------------------------------------------------------------
# per-frame matching


def _frame_match(
    score: list[list[float]], admissible: list[list[bool]]
) -> list[tuple[int, int]]:
    """Deterministic one-to-one matching over admissible pairs.

    Maximizes (number of matches, summed score); among optima returns the
    lexicographically smallest pair list. Cost sums are compared through
    ``math.fsum`` so the exhaustive-search oracle lands on identical values.
    """
    n = len(score)
    m = len(score[0]) if n else 0
    if n == 0 or m == 0 or not any(any(row) for row in admissible):
        return []
    masked = [
        [score[r][c] if admissible[r][c] else _INADMISSIBLE for c in range(m)]
        for r in range(n)
    ]

    def solve(sub_rows: list[int], sub_cols: list[int]) -> tuple[int, float, dict[int, int]]:
        """Optimal (cardinality, admissible score) on a submatrix."""
        if not sub_rows or not sub_cols:
            return 0, 0.0, {}
        negated = [[-masked[r][c] for c in sub_cols] for r in sub_rows]
        raw = _solve_raw(negated, len(sub_rows), len(sub_cols))
        pairs = {
            sub_rows[i]: sub_cols[j] for i, j in raw if admissible[sub_rows[i]][sub_cols[j]]
        }
        total = fsum(score[r][c] for r, c in pairs.items())
        return len(pairs), total, pairs

    best_card, best_score, current = solve(list(range(n)), list(range(m)))
    if best_card == 0:
        return []

    fixed: list[tuple[int, int]] = []
    fixed_scores: list[float] = []
    avail = list(range(m))
    for r in range(n):
        known = current.get(r)
        limit = known if known is not None else m
        chosen = None
        for c in avail:
            if c >= limit:
                break
            if not admissible[r][c]:
                continue
            tail_rows = list(range(r + 1, n))
            tail_cols = [x for x in avail if x != c]
            card, sc, tail = solve(tail_rows, tail_cols)
            if len(fixed) + 1 + card == best_card and fsum(
                fixed_scores + [score[r][c]] + [score[i][j] for i, j in tail.items()]
            ) == best_score:
                chosen = c
                current = tail
                break
        if chosen is None:
            if known is None:
                continue
            chosen = known
        fixed.append((r, chosen))
        fixed_scores.append(score[r][chosen])
        avail.remove(chosen)
    return fixed


# --------------------------------------------------------------------------
# per-expression evaluation


def _zero_zero_metrics(cfg: EvalConfig) -> dict[str, tuple[float, ...]]:
    flat = tuple(cfg.zero_zero_score for _ in cfg.alphas)
    return {key: flat for key in METRIC_KEYS}


def evaluate_tracks(
    gt_frames: Mapping[int, Mapping[int, Box]],
    pred_frames: Mapping[int, Mapping[int, Box]],
    cfg: EvalConfig | None = None,
) -> dict[str, tuple[float, ...]]:
    """Per-alpha metrics for one expression, from per-frame id->box maps."""
    cfg = cfg or EvalConfig()
    gt_ids = sorted({gid for dets in gt_frames.values() for gid in dets})
    pred_ids = sorted({pid for dets in pred_frames.values() for pid in dets})
    if not gt_ids and not pred_ids:
        return _zero_zero_metrics(cfg)
    gt_index = {gid: i for i, gid in enumerate(gt_ids)}
    pred_index = {pid: j for j, pid in enumerate(pred_ids)}

    frames = sorted(set(gt_frames) | set(pred_frames))
    per_frame: list[tuple[list[int], list[int], list[list[float]]]] = []
    for f in frames:
        g = sorted(gt_frames.get(f, {}))
        p = sorted(pred_frames.get(f, {}))
        ious = [[iou(gt_frames[f][gid], pred_frames[f][pid]) for pid in p] for gid in g]
        per_frame.append(([gt_index[gid] for gid in g], [pred_index[pid] for pid in p], ious))

    gt_count = [0] * len(gt_ids)
    pred_count = [0] * len(pred_ids)
    for g, p, _ in per_frame:
        for gi in g:
            gt_count[gi] += 1
        for pj in p:
            pred_count[pj] += 1

    out: dict[str, list[float]] = {key: [] for key in METRIC_KEYS}
    for alpha in cfg.alphas:
        potential = [[0] * len(pred_ids) for _ in gt_ids]
        for g, p, ious in per_frame:
            for a, gi in enumerate(g):
                row = ious[a]
                for b, pj in enumerate(p):
                    if row[b] >= alpha:
                        potential[gi][pj] += 1

        tp = fn = fp = 0
        matched_ious: list[float] = []
        matches = [[0] * len(pred_ids) for _ in gt_ids]
        for g, p, ious in per_frame:
            if not g:
                fp += len(p)
                continue
            if not p:
                fn += len(g)
                continue
            admissible = [[ious[a][b] >= alpha for b in range(len(p))] for a in range(len(g))]
            score = [
                [
                    potential[g[a]][p[b]] / (gt_count[g[a]] + pred_count[p[b]] - potential[g[a]][p[b]])
                    + _TIE_BREAK_IOU_WEIGHT * ious[a][b]
                    for b in range(len(p))
                ]
                for a in range(len(g))
            ]
            pairs = _frame_match(score, admissible)
            tp += len(pairs)
            fn += len(g) - len(pairs)
            fp += len(p) - len(pairs)
            for a, b in pairs:
                matches[g[a]][p[b]] += 1
                matched_ious.append(ious[a][b])

        ass_a = ass_re = ass_pr = 0.0
        for gi in range(len(gt_ids)):
            for pj in range(len(pred_ids)):
                mc = matches[gi][pj]
                if mc == 0:
                    continue
                ass_a += mc * (mc / (gt_count[gi] + pred_count[pj] - mc))
                ass_re += mc * (mc / gt_count[gi])
                ass_pr += mc * (mc / pred_count[pj])
        assa = ass_a / max(1, tp)
        assre = ass_re / max(1, tp)
        asspr = ass_pr / max(1, tp)
        deta = tp / max(1, tp + fn + fp)
        detre = tp / max(1, tp + fn)
        detpr = tp / max(1, tp + fp)
        out["deta"].append(deta)
        out["assa"].append(assa)
        out["hota"].append(math.sqrt(deta * assa))
        out["detre"].append(detre)
        out["detpr"].append(detpr)
        out["assre"].append(assre)
        out["asspr"].append(asspr)
        out["loca"].append(fsum(matched_ious) / tp if tp else 1.0)
    return {key: tuple(values) for key, values in out.items()}


def evaluate_expression(
    ann: SequenceAnnotation,
    expression_id: int,
    pred: PredictionSet,
    cfg: EvalConfig | None = None,
) -> ExpressionMetrics:
    """Evaluate one prediction set against the referent ground truth."""
    cfg = cfg or EvalConfig()
    if pred.sequence_id != ann.sequence_id:
        raise ValidationError(
            f"prediction sequence '{pred.sequence_id}' != annotation '{ann.sequence_id}'"
        )
    if pred.expression_id != expression_id:
        raise ValidationError(
            f"prediction expression {pred.expression_id} != requested {expression_id}"
        )
    pred.validate(ann.frame_count)

    gt_frames: dict[int, dict[int, Box]] = {}
    for frame, object_ids in referent_frames(ann, expression_id).items():
        gt_frames[frame] = {oid: ann.object(oid).boxes[frame] for oid in object_ids}
    pred_frames: dict[int, dict[int, Box]] = {}
    for row in pred.rows:
        if cfg.ref_threshold is not None and row.ref_score < cfg.ref_threshold:
            continue
        pred_frames.setdefault(row.frame, {})[row.track_id] = row.box

    per_alpha = evaluate_tracks(gt_frames, pred_frames, cfg)
    return ExpressionMetrics(
        sequence_id=ann.sequence_id,
        expression_id=expression_id,
        alphas=cfg.alphas,
        per_alpha=per_alpha,
    )


def evaluate_dataset(
    pairs: Sequence[tuple[SequenceAnnotation, int, PredictionSet]],
    cfg: EvalConfig | None = None,
) -> EvalReport:
    """Evaluate aligned (annotation, expression_id, predictions) triples."""
    if not pairs:
        raise ValidationError("nothing to evaluate")
    report = EvalReport()
    for ann, expression_id, pred in pairs:
        report.per_expression.append(evaluate_expression(ann, expression_id, pred, cfg))
    return report


# --------------------------------------------------------------------------
# rendering

_TABLE_LABELS = ("HOTA", "DetA", "AssA", "DetRe", "DetPr", "AssRe", "AssPr", "LocA")


def render_report(report: EvalReport, fmt: str = "table") -> str:
    """Serialize a report: 'json' round-trips, 'table' prints x100 scores."""
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    if fmt != "table":
        raise ValueError(f"unknown report format '{fmt}'")
    name_width = max(
        [len("expression"), len("MEAN")]
        + [len(f"{m.sequence_id}/{m.expression_id}") for m in report.per_expression]
    )
    header = "expression".ljust(name_width) + "".join(f"{label:>8}" for label in _TABLE_LABELS)
    lines = [header]
    def row(name: str, values: Mapping[str, float]) -> str:
        return name.ljust(name_width) + "".join(
            f"{100.0 * values[key]:8.2f}" for key in METRIC_KEYS
        )
    for m in report.per_expression:
        lines.append(row(f"{m.sequence_id}/{m.expression_id}", m.summary()))
    lines.append(row("MEAN", report.summary()))
    return "\n".join(lines) + "\n"
