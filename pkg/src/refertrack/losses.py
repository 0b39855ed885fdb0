"""Training-objective kernels: focal classification/referring terms, the
L1+GIoU box term, the per-frame tracked-object loss, the set-prediction
matching cost for new-born objects, and the whole-clip total.

Everything operates on plain floats and :class:`~refertrack.geometry.NormBox`
values. Analytic gradients are provided for the focal and box terms so the
implementations can be checked against central finite differences.

Conventions:

- probabilities are clamped to [1e-7, 1 - 1e-7] before any log;
- the L1 distance is taken on the center/size components, the GIoU penalty
  on the corner form of the same boxes;
- per-frame losses are divided by the number of ground-truth objects
  involved (``normalize=True``); pass ``normalize=False`` for the bare sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .assignment import Assignment, solve_min_cost
from .geometry import NormBox

PROB_EPS = 1e-7

__all__ = [
    "LossWeights",
    "TrackPrediction",
    "GroundTruthObject",
    "focal_loss",
    "focal_loss_grad",
    "box_loss",
    "box_loss_grad",
    "track_loss",
    "match_cost",
    "detect_loss",
    "final_loss",
]


@dataclass(frozen=True)
class LossWeights:
    lambda_cls: float = 5.0
    lambda_l1: float = 2.0
    lambda_giou: float = 2.0
    lambda_ref: float = 2.0

    def __post_init__(self) -> None:
        for name in ("lambda_cls", "lambda_l1", "lambda_giou", "lambda_ref"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class TrackPrediction:
    """One query slot's outputs: visibility prob, box, referring prob."""

    class_prob: float
    box: NormBox
    ref_prob: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.class_prob <= 1.0 or not 0.0 <= self.ref_prob <= 1.0:
            raise ValueError("probabilities must lie in [0, 1]")


@dataclass(frozen=True)
class GroundTruthObject:
    present: bool
    box: NormBox | None = None
    referent: bool = False

    def __post_init__(self) -> None:
        if self.present != (self.box is not None):
            raise ValueError("ground-truth box must be given iff the object is present")


def _clamp(p: float) -> float:
    return min(max(p, PROB_EPS), 1.0 - PROB_EPS)


def focal_loss(p: float, target: int, alpha: float = 0.25, gamma: float = 2.0) -> float:
    """Binary focal loss of a predicted probability against a 0/1 target."""
    p = _clamp(p)
    if target == 1:
        return -alpha * (1.0 - p) ** gamma * math.log(p)
    if target == 0:
        return -(1.0 - alpha) * p**gamma * math.log(1.0 - p)
    raise ValueError(f"target must be 0 or 1, got {target}")


def focal_loss_grad(p: float, target: int, alpha: float = 0.25, gamma: float = 2.0) -> float:
    """d focal_loss / dp (zero in the clamped region)."""
    if not PROB_EPS < p < 1.0 - PROB_EPS:
        return 0.0
    if target == 1:
        return alpha * gamma * (1.0 - p) ** (gamma - 1.0) * math.log(p) - alpha * (
            1.0 - p
        ) ** gamma / p
    if target == 0:
        return -(1.0 - alpha) * gamma * p ** (gamma - 1.0) * math.log(1.0 - p) + (
            1.0 - alpha
        ) * p**gamma / (1.0 - p)
    raise ValueError(f"target must be 0 or 1, got {target}")


def _giou_cxcywh(a: tuple[float, float, float, float], b: tuple[float, float, float, float]) -> float:
    giou_value, _ = _giou_cxcywh_with_grad(a, b)
    return giou_value


def _giou_cxcywh_with_grad(
    a: tuple[float, float, float, float], b: tuple[float, float, float, float]
) -> tuple[float, tuple[float, float, float, float]]:
    """GIoU of two center/size boxes and its gradient w.r.t. the first box.

    The gradient follows the active min/max branches, so it is exact wherever
    GIoU is differentiable (ties between box edges sit on kinks).
    """
    acx, acy, aw, ah = a
    bcx, bcy, bw, bh = b
    ax1, ay1, ax2, ay2 = acx - aw / 2, acy - ah / 2, acx + aw / 2, acy + ah / 2
    bx1, by1, bx2, by2 = bcx - bw / 2, bcy - bh / 2, bcx + bw / 2, bcy + bh / 2

    # d(edge)/d(cx, cy, w, h) for the first box
    d_ax1 = (1.0, 0.0, -0.5, 0.0)
    d_ax2 = (1.0, 0.0, 0.5, 0.0)
    d_ay1 = (0.0, 1.0, 0.0, -0.5)
    d_ay2 = (0.0, 1.0, 0.0, 0.5)
    zero = (0.0, 0.0, 0.0, 0.0)

    def add(u, v, su=1.0, sv=1.0):
        return tuple(su * x + sv * y for x, y in zip(u, v))

    ix1, d_ix1 = (ax1, d_ax1) if ax1 >= bx1 else (bx1, zero)
    iy1, d_iy1 = (ay1, d_ay1) if ay1 >= by1 else (by1, zero)
    ix2, d_ix2 = (ax2, d_ax2) if ax2 <= bx2 else (bx2, zero)
    iy2, d_iy2 = (ay2, d_ay2) if ay2 <= by2 else (by2, zero)
    iw, ih = ix2 - ix1, iy2 - iy1
    if iw > 0 and ih > 0:
        inter = iw * ih
        d_inter = add(add(d_ix2, d_ix1, ih, -ih), add(d_iy2, d_iy1, iw, -iw))
    else:
        inter, d_inter = 0.0, zero

    area_a, d_area_a = aw * ah, (0.0, 0.0, ah, aw)
    area_b = bw * bh
    union = area_a + area_b - inter
    d_union = add(d_area_a, d_inter, 1.0, -1.0)
    iou = inter / union
    d_iou = add(d_inter, d_union, 1.0 / union, -inter / union**2)

    hx1, d_hx1 = (ax1, d_ax1) if ax1 <= bx1 else (bx1, zero)
    hy1, d_hy1 = (ay1, d_ay1) if ay1 <= by1 else (by1, zero)
    hx2, d_hx2 = (ax2, d_ax2) if ax2 >= bx2 else (bx2, zero)
    hy2, d_hy2 = (ay2, d_ay2) if ay2 >= by2 else (by2, zero)
    hull = (hx2 - hx1) * (hy2 - hy1)
    d_hull = add(
        add(d_hx2, d_hx1, hy2 - hy1, -(hy2 - hy1)),
        add(d_hy2, d_hy1, hx2 - hx1, -(hx2 - hx1)),
    )

    # giou = iou - (hull - union) / hull = iou - 1 + union / hull
    giou_value = iou - (hull - union) / hull
    d_penalty = add(d_union, d_hull, 1.0 / hull, -union / hull**2)
    grad = add(d_iou, d_penalty)
    return giou_value, grad  # type: ignore[return-value]


def box_loss(b: NormBox, b_hat: NormBox, w: LossWeights) -> float:
    """Weighted L1 (center/size) plus GIoU penalty between two boxes."""
    l1 = sum(abs(x - y) for x, y in zip(b.as_tuple(), b_hat.as_tuple()))
    return w.lambda_l1 * l1 + w.lambda_giou * (1.0 - _giou_cxcywh(b.as_tuple(), b_hat.as_tuple()))


def box_loss_grad(b: NormBox, b_hat: NormBox, w: LossWeights) -> tuple[float, float, float, float]:
    """d box_loss / d(b.cx, b.cy, b.w, b.h)."""
    _, giou_grad = _giou_cxcywh_with_grad(b.as_tuple(), b_hat.as_tuple())
    out = []
    for x, y, g in zip(b.as_tuple(), b_hat.as_tuple(), giou_grad):
        sign = 0.0 if x == y else math.copysign(1.0, x - y)
        out.append(w.lambda_l1 * sign - w.lambda_giou * g)
    return tuple(out)  # type: ignore[return-value]


def track_loss(
    preds: list[TrackPrediction],
    gts: list[GroundTruthObject],
    w: LossWeights,
    normalize: bool = True,
) -> float:
    """Per-frame loss over identity-aligned tracked objects.

    Each slot contributes a visibility term; box and referring terms apply
    only where the object is present this frame.
    """
    if len(preds) != len(gts):
        raise ValueError(f"{len(preds)} predictions vs {len(gts)} ground truths")
    total = 0.0
    present = 0
    for pred, gt in zip(preds, gts):
        total += w.lambda_cls * focal_loss(pred.class_prob, 1 if gt.present else 0)
        if gt.present:
            present += 1
            total += box_loss(pred.box, gt.box, w)
            total += w.lambda_ref * focal_loss(pred.ref_prob, 1 if gt.referent else 0)
    if normalize:
        total /= max(1, present)
    return total


def match_cost(
    pred: TrackPrediction,
    gt: GroundTruthObject,
    w: LossWeights,
    cls_mode: str = "focal",
) -> float:
    """Pairing cost between one prediction and one new-born ground truth.

    ``cls_mode`` selects the classification part: "focal" uses the
    positive-class focal term on the visibility prob, "neg_prob" the plain
    negated probability.
    """
    if not gt.present:
        raise ValueError("match_cost target must be a present object")
    if cls_mode == "focal":
        cls = focal_loss(pred.class_prob, 1)
    elif cls_mode == "neg_prob":
        cls = -pred.class_prob
    else:
        raise ValueError(f"unknown cls_mode '{cls_mode}'")
    return box_loss(pred.box, gt.box, w) + w.lambda_cls * cls


def detect_loss(
    preds: list[TrackPrediction],
    newborn_gts: list[GroundTruthObject],
    w: LossWeights,
    normalize: bool = True,
    cls_mode: str = "focal",
) -> tuple[float, Assignment]:
    """Set-prediction loss for new-born objects.

    Predictions are matched one-to-one to the new-born ground truths by
    minimizing :func:`match_cost`; every prediction then pays a
    classification term (matched slots target 1, the rest 0) and matched
    slots additionally pay box and referring terms. The assignment is
    returned so callers can hand identities to the matched slots.
    """
    n, m = len(preds), len(newborn_gts)
    if m > n:
        raise ValueError(f"{m} new-born objects but only {n} predictions")
    cost = [[match_cost(pred, gt, w, cls_mode) for gt in newborn_gts] for pred in preds]
    assignment = solve_min_cost(cost)
    matched = assignment.as_dict()
    total = 0.0
    for i, pred in enumerate(preds):
        total += w.lambda_cls * focal_loss(pred.class_prob, 1 if i in matched else 0)
    for i, j in assignment.pairs:
        gt = newborn_gts[j]
        total += box_loss(preds[i].box, gt.box, w)
        total += w.lambda_ref * focal_loss(preds[i].ref_prob, 1 if gt.referent else 0)
    if normalize:
        total /= max(1, m)
    return total, assignment


def final_loss(per_frame: list[tuple[float, float]], reduction: str = "sum") -> float:
    """Combine per-frame (tracked, new-born) losses over a clip."""
    if not per_frame:
        raise ValueError("final_loss needs at least one frame")
    total = sum(tra + det for tra, det in per_frame)
    if reduction == "sum":
        return total
    if reduction == "mean":
        return total / len(per_frame)
    raise ValueError(f"unknown reduction '{reduction}'")
