"""Command-line surface: evaluate, track, propagate, stats, serve.

Exit codes are a stable contract: 0 success, 1 usage error, 2 data or
validation error. All randomness is seeded (default seed 0), so every
subcommand is reproducible from its inputs and flags.

Prediction files pair with ground truth by naming convention:
``<sequence_id>_<expression_id>.csv``.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import __version__
from .data import (
    compute_stats,
    load_annotation,
    load_predictions,
    referent_frames,
    save_annotation,
    save_predictions,
)
from .annotate import ClickPair, propagate
from .errors import DataError
from .evaluation import EvalConfig, evaluate_dataset, render_report
from .geometry import Box
from .service import make_server
from .tracking import TrackerConfig, iou_associator, oracle_scorer, run


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="refertrack", description=__doc__)
    parser.add_argument("--version", action="version", version=f"refertrack {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_eval = sub.add_parser("eval", help="score predictions against referent ground truth")
    p_eval.add_argument("--gt", required=True, help="directory of annotation JSON files")
    p_eval.add_argument("--pred", required=True, help="directory of prediction CSV files")
    p_eval.add_argument("--out", required=True, help="where to write the report JSON")
    p_eval.add_argument(
        "--alpha-grid", default=None,
        help="comma-separated localization thresholds (default 0.05..0.95)",
    )
    p_eval.add_argument("--table", action="store_true", help="also print a score table")

    p_track = sub.add_parser("track", help="produce predictions with a baseline tracker")
    p_track.add_argument("--ann", required=True, help="annotation JSON file")
    p_track.add_argument("--expression", required=True, type=int)
    p_track.add_argument("--method", choices=("oracle", "iou"), default="oracle")
    p_track.add_argument("--seed", type=int, default=0)
    p_track.add_argument(
        "--jitter", type=float, default=0.0, help="Gaussian box noise in pixels"
    )
    p_track.add_argument("--out", required=True, help="where to write the prediction CSV")

    p_prop = sub.add_parser("propagate", help="apply a two-click referent interval")
    p_prop.add_argument("--ann", required=True)
    p_prop.add_argument("--expression", required=True, type=int)
    p_prop.add_argument("--object", required=True, type=int)
    p_prop.add_argument("--start", required=True, type=int)
    p_prop.add_argument("--end", required=True, type=int)
    p_prop.add_argument("--out", required=True, help="output annotation path")

    p_stats = sub.add_parser("stats", help="dataset statistics over annotation files")
    p_stats.add_argument("--ann", required=True, help="directory of annotation JSON files")
    p_stats.add_argument("--out", required=True, help="where to write the stats JSON")

    p_serve = sub.add_parser("serve", help="run the annotation HTTP service")
    p_serve.add_argument("--ann", required=True, help="directory of annotation JSON files")
    p_serve.add_argument("--port", type=int, default=8077)
    p_serve.add_argument("--bind", default="127.0.0.1")

    return parser


def _cmd_eval(args: argparse.Namespace) -> int:
    gt_dir, pred_dir = Path(args.gt), Path(args.pred)
    annotations = {}
    for path in sorted(gt_dir.glob("*.json")):
        ann = load_annotation(path)
        annotations[ann.sequence_id] = ann

    expected = {
        (seq, expr.expression_id)
        for seq, ann in annotations.items()
        for expr in ann.expressions
    }
    found = {}
    unmatched_files = []
    for path in sorted(pred_dir.glob("*.csv")):
        stem = path.stem
        seq, _, expr_part = stem.rpartition("_")
        key = (seq, int(expr_part)) if seq and expr_part.isdigit() else None
        if key is None or key not in expected:
            unmatched_files.append(path.name)
        else:
            found[key] = path
    missing = sorted(expected - set(found))
    if missing or unmatched_files:
        for seq, expr in missing:
            print(f"missing prediction file for {seq}_{expr}.csv", file=sys.stderr)
        for name in unmatched_files:
            print(f"prediction file {name} matches no (sequence, expression)", file=sys.stderr)
        return 2

    cfg = EvalConfig()
    if args.alpha_grid:
        cfg = EvalConfig(alphas=tuple(float(v) for v in args.alpha_grid.split(",")))
    pairs = []
    for (seq, expr), path in sorted(found.items()):
        pred = load_predictions(path, sequence_id=seq, expression_id=expr)
        pairs.append((annotations[seq], expr, pred))
    report = evaluate_dataset(pairs, cfg)
    Path(args.out).write_text(render_report(report, "json"), encoding="utf-8")
    if args.table:
        sys.stdout.write(render_report(report, "table"))
    return 0


def _cmd_track(args: argparse.Namespace) -> int:
    ann = load_annotation(args.ann)
    config = TrackerConfig()
    if args.method == "oracle":
        scorer = oracle_scorer(
            ann, args.expression, box_jitter=args.jitter, seed=args.seed
        )
        pred = run(ann, args.expression, scorer, config)
    else:
        rng = random.Random(args.seed)
        frames = []
        referent_map = referent_frames(ann, args.expression)
        for frame in range(ann.frame_count):
            dets = []
            for object_id in sorted(referent_map.get(frame, ())):
                box = ann.object(object_id).boxes[frame]
                if args.jitter > 0:
                    box = Box(
                        box.x1 + rng.gauss(0, args.jitter),
                        box.y1 + rng.gauss(0, args.jitter),
                        box.x2 + rng.gauss(0, args.jitter),
                        box.y2 + rng.gauss(0, args.jitter),
                    )
                dets.append((box, 1.0, 1.0))
            frames.append(dets)
        pred = iou_associator(
            frames, config, sequence_id=ann.sequence_id, expression_id=args.expression
        )
    save_predictions(pred, args.out)
    return 0


def _cmd_propagate(args: argparse.Namespace) -> int:
    ann = load_annotation(args.ann)
    click = ClickPair(args.object, args.start, args.end, args.expression)
    save_annotation(propagate(ann, click), args.out)
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    anns = [load_annotation(p) for p in sorted(Path(args.ann).glob("*.json"))]
    stats = compute_stats(anns)
    Path(args.out).write_text(
        json.dumps(stats.to_dict(), indent=2) + "\n", encoding="utf-8"
    )
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    server = make_server(args.ann, bind=args.bind, port=args.port)
    host, port = server.server_address[:2]
    print(f"serving annotations from {args.ann} on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


_COMMANDS = {
    "eval": _cmd_eval,
    "track": _cmd_track,
    "propagate": _cmd_propagate,
    "stats": _cmd_stats,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
