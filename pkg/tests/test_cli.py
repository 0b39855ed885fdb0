import json
import shutil
import socket
from pathlib import Path

import pytest

from refertrack.annotate import ClickPair, propagate
from refertrack.cli import main
from refertrack.data import load_annotation, load_predictions, save_annotation
from synthetic import build_sequence

DATA = Path(__file__).parent / "data"


def seeded_dataset(tmp_path: Path, seeds=(3, 5)) -> tuple[Path, Path]:
    gt = tmp_path / "gt"
    pred = tmp_path / "pred"
    gt.mkdir()
    pred.mkdir()
    for seed in seeds:
        ann = build_sequence(seed)
        save_annotation(ann, gt / f"{ann.sequence_id}.json")
        for expr in ann.expressions:
            rc = main(
                [
                    "track",
                    "--ann", str(gt / f"{ann.sequence_id}.json"),
                    "--expression", str(expr.expression_id),
                    "--method", "oracle",
                    "--out", str(pred / f"{ann.sequence_id}_{expr.expression_id}.csv"),
                ]
            )
            assert rc == 0
    return gt, pred


def test_eval_oracle_closed_loop(tmp_path, capsys):
    gt, pred = seeded_dataset(tmp_path)
    out = tmp_path / "report.json"
    rc = main(["eval", "--gt", str(gt), "--pred", str(pred), "--out", str(out), "--table"])
    assert rc == 0
    doc = json.loads(out.read_text())
    for key in ("hota", "deta", "assa", "detre", "detpr", "assre", "asspr", "loca"):
        assert doc[key] == 1.0
    table = capsys.readouterr().out
    assert "100.00" in table and "MEAN" in table


def test_eval_missing_predictions_exits_2(tmp_path, capsys):
    gt, pred = seeded_dataset(tmp_path)
    for f in pred.glob("*.csv"):
        f.unlink()
    rc = main(["eval", "--gt", str(gt), "--pred", str(pred), "--out", str(tmp_path / "r.json")])
    assert rc == 2
    assert "missing prediction file" in capsys.readouterr().err


def test_eval_unmatched_prediction_exits_2(tmp_path, capsys):
    gt, pred = seeded_dataset(tmp_path)
    (pred / "stray_9.csv").write_text("frame,track_id,x1,y1,x2,y2,class_score,ref_score\n")
    rc = main(["eval", "--gt", str(gt), "--pred", str(pred), "--out", str(tmp_path / "r.json")])
    assert rc == 2
    assert "matches no" in capsys.readouterr().err


def test_eval_golden_report_bytes(tmp_path):
    gt = tmp_path / "gt"
    pred = tmp_path / "pred"
    gt.mkdir()
    pred.mkdir()
    shutil.copy(DATA / "microswap.json", gt / "microswap.json")
    shutil.copy(DATA / "microswap_0.csv", pred / "microswap_0.csv")
    out = tmp_path / "report.json"
    rc = main(["eval", "--gt", str(gt), "--pred", str(pred), "--out", str(out)])
    assert rc == 0
    assert out.read_bytes() == (DATA / "golden_report.json").read_bytes()


def test_eval_golden_table(tmp_path, capsys):
    gt = tmp_path / "gt"
    pred = tmp_path / "pred"
    gt.mkdir()
    pred.mkdir()
    shutil.copy(DATA / "microswap.json", gt / "microswap.json")
    shutil.copy(DATA / "microswap_0.csv", pred / "microswap_0.csv")
    rc = main(
        ["eval", "--gt", str(gt), "--pred", str(pred), "--out", str(tmp_path / "r.json"), "--table"]
    )
    assert rc == 0
    assert capsys.readouterr().out == (DATA / "golden_table.txt").read_text()


def test_eval_alpha_grid_flag(tmp_path):
    gt, pred = seeded_dataset(tmp_path, seeds=(3,))
    out = tmp_path / "report.json"
    rc = main(
        ["eval", "--gt", str(gt), "--pred", str(pred), "--out", str(out), "--alpha-grid", "0.5"]
    )
    assert rc == 0
    entry = json.loads(out.read_text())["per_expression"][0]
    assert entry["alphas"] == [0.5]


def test_track_deterministic_with_seed(tmp_path):
    gt, _ = seeded_dataset(tmp_path, seeds=(7,))
    ann_path = next(gt.glob("*.json"))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        rc = main(
            [
                "track", "--ann", str(ann_path), "--expression", "0",
                "--method", "oracle", "--jitter", "2.0", "--seed", "11",
                "--out", str(out),
            ]
        )
        assert rc == 0
    assert a.read_bytes() == b.read_bytes()
    rc = main(
        [
            "track", "--ann", str(ann_path), "--expression", "0",
            "--method", "oracle", "--jitter", "2.0", "--seed", "12",
            "--out", str(tmp_path / "c.csv"),
        ]
    )
    assert rc == 0
    assert (tmp_path / "c.csv").read_bytes() != a.read_bytes()


def test_track_iou_method_on_clean_detections(tmp_path):
    gt, _ = seeded_dataset(tmp_path, seeds=(3,))
    ann_path = next(gt.glob("*.json"))
    out = tmp_path / "iou.csv"
    rc = main(
        ["track", "--ann", str(ann_path), "--expression", "0", "--method", "iou", "--out", str(out)]
    )
    assert rc == 0
    pred = load_predictions(out, load_annotation(ann_path).sequence_id, 0)
    ann = load_annotation(ann_path)
    from refertrack.data import referent_frames

    expected_rows = sum(len(ids) for ids in referent_frames(ann, 0).values())
    assert len(pred.rows) == expected_rows


def test_track_iou_clean_beats_id_switch_fixture(tmp_path):
    gt, _ = seeded_dataset(tmp_path, seeds=(3,))
    ann_path = next(gt.glob("*.json"))
    ann = load_annotation(ann_path)
    out = tmp_path / "iou.csv"
    assert main(
        ["track", "--ann", str(ann_path), "--expression", "0", "--method", "iou", "--out", str(out)]
    ) == 0
    from refertrack.evaluation import evaluate_expression

    iou_metrics = evaluate_expression(
        ann, 0, load_predictions(out, ann.sequence_id, 0)
    )
    switch_doc = json.loads((DATA / "golden_report.json").read_text())
    assert iou_metrics.mean("hota") >= switch_doc["hota"]


def test_track_unknown_expression_exits_2(tmp_path, capsys):
    gt, _ = seeded_dataset(tmp_path, seeds=(3,))
    ann_path = next(gt.glob("*.json"))
    rc = main(
        ["track", "--ann", str(ann_path), "--expression", "99", "--out", str(tmp_path / "x.csv")]
    )
    assert rc == 2
    assert "expression" in capsys.readouterr().err


def test_track_unknown_method_exits_1(tmp_path, capsys):
    gt, _ = seeded_dataset(tmp_path, seeds=(3,))
    ann_path = next(gt.glob("*.json"))
    with pytest.raises(SystemExit) as exc:
        main(["track", "--ann", str(ann_path), "--expression", "0", "--method", "kalman",
              "--out", str(tmp_path / "x.csv")])
    assert exc.value.code == 1


def test_propagate_matches_library(tmp_path):
    ann = build_sequence(9)
    visible = sorted(ann.objects[0].boxes)
    src = tmp_path / "in.json"
    save_annotation(ann, src)
    out = tmp_path / "out.json"
    rc = main(
        [
            "propagate", "--ann", str(src), "--expression", "0",
            "--object", "0", "--start", str(visible[0]), "--end", str(visible[-1]),
            "--out", str(out),
        ]
    )
    assert rc == 0
    expected = propagate(ann, ClickPair(0, visible[0], visible[-1], 0))
    assert load_annotation(out) == expected
    # inputs are untouched
    assert load_annotation(src) == ann


def test_propagate_invisible_frame_exits_2(tmp_path, capsys):
    ann = build_sequence(9)
    src = tmp_path / "in.json"
    save_annotation(ann, src)
    missing = max(ann.objects[0].boxes) + 1
    rc = main(
        [
            "propagate", "--ann", str(src), "--expression", "0",
            "--object", "0", "--start", "0", "--end", str(missing),
            "--out", str(tmp_path / "out.json"),
        ]
    )
    assert rc == 2
    assert "not visible" in capsys.readouterr().err


def test_stats_command(tmp_path):
    gt, _ = seeded_dataset(tmp_path, seeds=(3, 5, 8))
    out = tmp_path / "stats.json"
    rc = main(["stats", "--ann", str(gt), "--out", str(out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["expressions_count"] >= 3
    assert 0.0 <= doc["mean_temporal_ratio"] <= 1.0
    assert sum(b["count"] for b in doc["objects_per_expression_histogram"]) == doc[
        "expressions_count"
    ]


def test_serve_port_in_use_exits_2(tmp_path, capsys):
    gt, _ = seeded_dataset(tmp_path, seeds=(3,))
    blocker = socket.socket()
    blocker.bind(("127.0.0.1", 0))
    port = blocker.getsockname()[1]
    try:
        rc = main(["serve", "--ann", str(gt), "--port", str(port)])
    finally:
        blocker.close()
    assert rc == 2


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["eval"])  # missing required flags
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 1
