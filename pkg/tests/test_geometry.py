import random

import pytest

from refertrack.geometry import Box, NormBox, from_norm, giou, iou, to_norm
from oracles import grid_iou


def test_degenerate_boxes_rejected():
    with pytest.raises(ValueError):
        Box(0, 0, 0, 1)
    with pytest.raises(ValueError):
        Box(0, 5, 1, 5)
    with pytest.raises(ValueError):
        Box(2, 0, 1, 1)


def test_iou_identity():
    b = Box(3, 4, 10, 12)
    assert iou(b, b) == 1.0


def test_iou_disjoint_and_touching():
    assert iou(Box(0, 0, 1, 1), Box(1, 1, 2, 2)) == 0.0
    assert iou(Box(0, 0, 1, 1), Box(5, 5, 6, 6)) == 0.0


def test_iou_overlap_matches_lattice_count():
    assert iou(Box(0, 0, 2, 2), Box(1, 1, 3, 3)) == pytest.approx(1 / 7, abs=1e-12)
    assert iou(Box(0, 0, 2, 2), Box(1, 1, 3, 3)) == pytest.approx(
        grid_iou((0, 0, 2, 2), (1, 1, 3, 3)), abs=1e-12
    )


def test_iou_random_integer_boxes_match_lattice_oracle():
    rng = random.Random(7)
    for _ in range(50):
        a = sorted(rng.sample(range(0, 12), 2))
        b = sorted(rng.sample(range(0, 12), 2))
        c = sorted(rng.sample(range(0, 12), 2))
        d = sorted(rng.sample(range(0, 12), 2))
        box_a = Box(a[0], b[0], a[1], b[1])
        box_b = Box(c[0], d[0], c[1], d[1])
        expected = grid_iou(
            (a[0], b[0], a[1], b[1]), (c[0], d[0], c[1], d[1])
        )
        assert iou(box_a, box_b) == pytest.approx(expected, abs=1e-12)


def test_giou_identity_and_disjoint():
    b = Box(1, 1, 4, 5)
    assert giou(b, b) == 1.0
    # distant boxes: iou 0, hull 3x3=9, union 2 -> 0 - 7/9
    assert giou(Box(0, 0, 1, 1), Box(2, 2, 3, 3)) == pytest.approx(-7 / 9, abs=1e-12)


def test_giou_touching_boxes_tiling_hull():
    assert giou(Box(0, 0, 2, 1), Box(0, 1, 2, 2)) == pytest.approx(0.0, abs=1e-12)


def test_giou_never_exceeds_iou():
    rng = random.Random(11)
    for _ in range(200):
        a = Box(rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(51, 100), rng.uniform(51, 100))
        b = Box(rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(51, 100), rng.uniform(51, 100))
        assert giou(a, b) <= iou(a, b) + 1e-12
        assert giou(a, b) > -1.0


def test_symmetry_translation_and_scale_invariance():
    rng = random.Random(3)
    for _ in range(100):
        a = Box(rng.uniform(0, 40), rng.uniform(0, 40), rng.uniform(41, 90), rng.uniform(41, 90))
        b = Box(rng.uniform(0, 40), rng.uniform(0, 40), rng.uniform(41, 90), rng.uniform(41, 90))
        assert iou(a, b) == pytest.approx(iou(b, a), abs=1e-12)
        assert giou(a, b) == pytest.approx(giou(b, a), abs=1e-12)
        dx, dy = rng.uniform(-20, 20), rng.uniform(-20, 20)
        assert iou(a.translated(dx, dy), b.translated(dx, dy)) == pytest.approx(
            iou(a, b), abs=1e-9
        )
        assert giou(a.translated(dx, dy), b.translated(dx, dy)) == pytest.approx(
            giou(a, b), abs=1e-9
        )
        s = rng.uniform(0.5, 3.0)
        scale = lambda box: Box(box.x1 * s, box.y1 * s, box.x2 * s, box.y2 * s)
        assert iou(scale(a), scale(b)) == pytest.approx(iou(a, b), abs=1e-9)
        assert giou(scale(a), scale(b)) == pytest.approx(giou(a, b), abs=1e-9)


def test_iou_bounds_equality_iff_equal():
    a = Box(0, 0, 10, 10)
    almost = Box(0, 0, 10, 10.0001)
    assert iou(a, almost) < 1.0
    assert 0.0 <= iou(a, almost) <= 1.0


def test_to_norm_examples():
    assert to_norm(Box(0, 0, 100, 100), 100, 100) == NormBox(0.5, 0.5, 1.0, 1.0)
    assert to_norm(Box(25, 25, 75, 75), 100, 100) == NormBox(0.5, 0.5, 0.5, 0.5)
    assert from_norm(NormBox(0.5, 0.5, 1.0, 1.0), 100, 100) == Box(0, 0, 100, 100)


def test_norm_round_trip():
    rng = random.Random(5)
    for _ in range(100):
        w, h = rng.uniform(50, 2000), rng.uniform(50, 2000)
        x1 = rng.uniform(0, w / 2)
        y1 = rng.uniform(0, h / 2)
        box = Box(x1, y1, rng.uniform(x1 + 1, w), rng.uniform(y1 + 1, h))
        back = from_norm(to_norm(box, w, h), w, h)
        for got, want in zip(back.as_tuple(), box.as_tuple()):
            assert got == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_to_norm_rejects_out_of_frame():
    with pytest.raises(ValueError):
        to_norm(Box(0, 0, 101, 50), 100, 100)
    with pytest.raises(ValueError):
        to_norm(Box(-1, 0, 50, 50), 100, 100)
    with pytest.raises(ValueError):
        to_norm(Box(0, 0, 10, 10), 0, 100)


def test_normbox_validation():
    with pytest.raises(ValueError):
        NormBox(0.5, 0.5, 0.0, 0.5)
    with pytest.raises(ValueError):
        NormBox(1.5, 0.5, 0.5, 0.5)
    xyxy = NormBox(0.5, 0.5, 0.5, 0.25).to_xyxy()
    assert xyxy == (0.25, 0.375, 0.75, 0.625)
