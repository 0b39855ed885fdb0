"""Toolkit for language-referred multi-object tracking: dataset schema,
two-click annotation propagation, referring-adapted HOTA evaluation,
set-matching losses, an early-fusion kernel, and baseline trackers."""

from .annotate import ClickPair, create_expression, propagate, retract
from .assignment import Assignment, solve_max_score, solve_min_cost
from .data import (
    DatasetStats,
    Expression,
    PredictionRow,
    PredictionSet,
    ReferentInterval,
    SequenceAnnotation,
    TrackedObject,
    compute_stats,
    load_annotation,
    load_predictions,
    referent_frames,
    save_annotation,
    save_predictions,
)
from .errors import (
    ClickRejected,
    DataError,
    RevisionConflict,
    SchemaError,
    ToolkitError,
    ValidationError,
)
from .evaluation import (
    EvalConfig,
    EvalReport,
    ExpressionMetrics,
    evaluate_dataset,
    evaluate_expression,
    render_report,
)
from .geometry import Box, NormBox, from_norm, giou, iou, to_norm
from .losses import (
    GroundTruthObject,
    LossWeights,
    TrackPrediction,
    box_loss,
    detect_loss,
    final_loss,
    focal_loss,
    match_cost,
    track_loss,
)
from .tracking import (
    OutputRow,
    QuerySlot,
    SlotScore,
    TrackerConfig,
    TrackerState,
    iou_associator,
    oracle_scorer,
    run,
    step,
)

__version__ = "0.1.0"
