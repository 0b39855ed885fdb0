import random

import pytest

from refertrack.assignment import Assignment, solve_max_score, solve_min_cost
from oracles import brute_force_assignment


def test_single_cell():
    assert solve_min_cost([[5.0]]) == Assignment(((0, 0),), 5.0)


def test_two_by_two_examples():
    assert solve_min_cost([[1, 2], [2, 1]]).pairs == ((0, 0), (1, 1))
    assert solve_min_cost([[1, 2], [2, 1]]).total_cost == 2.0
    got = solve_min_cost([[4, 1], [2, 3]])
    assert got.pairs == ((0, 1), (1, 0))
    assert got.total_cost == 3.0


def test_empty_matrix():
    assert solve_min_cost([]) == Assignment((), 0.0)
    assert solve_min_cost([[], []]) == Assignment((), 0.0)


def test_max_score_examples():
    got = solve_max_score([[0.9, 0.1], [0.2, 0.8]])
    assert got.pairs == ((0, 0), (1, 1))
    assert got.total_cost == pytest.approx(1.7)
    # degenerate ties resolve to the diagonal
    assert solve_max_score([[0, 0, 0], [0, 0, 0], [0, 0, 0]]).pairs == (
        (0, 0),
        (1, 1),
        (2, 2),
    )
    got = solve_max_score([[1, 0, 0], [0, 1, 0]])
    assert got.pairs == ((0, 0), (1, 1))
    assert got.total_cost == 2.0


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        solve_min_cost([[float("nan")]])
    with pytest.raises(ValueError):
        solve_min_cost([[1.0, float("inf")]])


def test_matches_brute_force_on_random_matrices():
    rng = random.Random(42)
    for _ in range(300):
        n = rng.randint(1, 6)
        m = rng.randint(1, 6)
        matrix = [[rng.uniform(-10, 10) for _ in range(m)] for _ in range(n)]
        expected_pairs, expected_cost = brute_force_assignment(matrix)
        got = solve_min_cost(matrix)
        assert got.total_cost == expected_cost
        assert got.pairs == expected_pairs


def test_matches_brute_force_with_ties():
    rng = random.Random(9)
    for _ in range(150):
        n = rng.randint(1, 5)
        m = rng.randint(1, 5)
        # small integer costs force plenty of equal-cost optima
        matrix = [[float(rng.randint(0, 3)) for _ in range(m)] for _ in range(n)]
        expected_pairs, expected_cost = brute_force_assignment(matrix)
        got = solve_min_cost(matrix)
        assert got.total_cost == expected_cost
        assert got.pairs == expected_pairs


def test_max_matches_brute_force():
    rng = random.Random(77)
    for _ in range(150):
        n = rng.randint(1, 5)
        m = rng.randint(1, 5)
        matrix = [[rng.uniform(0, 1) for _ in range(m)] for _ in range(n)]
        expected_pairs, expected_score = brute_force_assignment(matrix, maximize=True)
        got = solve_max_score(matrix)
        assert got.total_cost == expected_score
        assert got.pairs == expected_pairs


def test_row_constant_shift_keeps_pairing():
    rng = random.Random(123)
    for _ in range(50):
        n = rng.randint(2, 5)
        m = rng.randint(n, 6)  # every row is matched
        matrix = [[rng.uniform(0, 10) for _ in range(m)] for _ in range(n)]
        base = solve_min_cost(matrix)
        row = rng.randrange(n)
        const = float(rng.randint(1, 9))
        shifted = [list(r) for r in matrix]
        shifted[row] = [v + const for v in shifted[row]]
        got = solve_min_cost(shifted)
        assert got.pairs == base.pairs
        assert got.total_cost == pytest.approx(base.total_cost + const, rel=1e-12)


def test_deterministic_repeated_calls():
    rng = random.Random(5)
    matrix = [[rng.uniform(0, 1) for _ in range(4)] for _ in range(4)]
    first = solve_min_cost(matrix)
    for _ in range(5):
        assert solve_min_cost(matrix) == first


def test_rectangular_sizes():
    # wide: all rows matched
    wide = solve_min_cost([[9, 1, 8, 7], [1, 9, 8, 7]])
    assert wide.pairs == ((0, 1), (1, 0))
    # tall: best min(n, m) rows picked
    tall = solve_min_cost([[5.0], [3.0], [4.0]])
    assert tall.pairs == ((1, 0),)
    assert tall.total_cost == 3.0
