"""Exact minimum-cost bipartite assignment on rectangular real matrices.

The solver is a shortest-augmenting-path Hungarian method (O(n^2 m)) with two
hard guarantees on top of optimality:

- ``total_cost`` is the correctly-rounded sum (``math.fsum``) of the selected
  entries, so it can be compared for exact equality against an exhaustive
  permutation search that also sums with ``fsum``.
- Among equal-cost optima the returned pairing is the lexicographically
  smallest list of ``(row, col)`` pairs. This is enforced by a refinement
  pass that re-solves subproblems, so repeated calls are reproducible and
  golden tests are stable.

Rectangular matrices are supported directly: the solver pairs ``min(n, m)``
rows and columns. The refinement pass costs up to ``n * m`` extra solves in
the worst (heavily tied) case, which is fine for the matrix sizes this
toolkit produces (tens per side). Callers own any cost weighting; nothing is
normalized here.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum, isfinite
from typing import Sequence

_Matrix = list[list[float]]


@dataclass(frozen=True)
class Assignment:
    """One-to-one pairing between row and column indices with its total."""

    pairs: tuple[tuple[int, int], ...]
    total_cost: float

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)


def _validate(matrix) -> tuple[_Matrix, int, int]:
    rows: _Matrix = [[float(v) for v in row] for row in matrix]
    n = len(rows)
    m = len(rows[0]) if n else 0
    for i, row in enumerate(rows):
        if len(row) != m:
            raise ValueError(f"ragged cost matrix: row {i} has {len(row)} columns, expected {m}")
        for j, v in enumerate(row):
            if not isfinite(v):
                raise ValueError(f"non-finite cost at ({i}, {j}): {v}")
    return rows, n, m


def _assign_rows(cost: _Matrix, n: int, m: int) -> list[int]:
    """Hungarian core for n <= m. Returns col index per row."""
    inf = float("inf")
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    p = [0] * (m + 1)  # p[j]: 1-based row matched to col j
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = 0
            row = cost[i0 - 1]
            for j in range(1, m + 1):
                if not used[j]:
                    cur = row[j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    row_to_col = [-1] * n
    for j in range(1, m + 1):
        if p[j]:
            row_to_col[p[j] - 1] = j - 1
    return row_to_col

def _solve_raw(rows: _Matrix, n: int, m: int) -> list[tuple[int, int]]:
    """One optimal pairing (row-sorted), without tie-break refinement."""
    if n == 0 or m == 0:
        return []
    if n <= m:
        r2c = _assign_rows(rows, n, m)
        return [(r, c) for r, c in enumerate(r2c)]
    transposed = [[rows[r][c] for r in range(n)] for c in range(m)]
    c2r = _assign_rows(transposed, m, n)
    return sorted((r, c) for c, r in enumerate(c2r))


def _sub_solve(
    rows: _Matrix, sub_rows: list[int], sub_cols: list[int]
) -> list[tuple[int, int]]:
    sub = [[rows[r][c] for c in sub_cols] for r in sub_rows]
    raw = _solve_raw(sub, len(sub_rows), len(sub_cols))
    return [(sub_rows[i], sub_cols[j]) for i, j in raw]


def _lex_refine(
    rows: _Matrix, n: int, m: int, working: list[tuple[int, int]], best: float
) -> list[tuple[int, int]]:
    """Rebuild the pairing row by row, always taking the smallest column
    that still admits a completion of total cost exactly ``best``."""
    current = dict(working)
    avail = list(range(m))
    fixed: list[tuple[int, int]] = []
    fixed_entries: list[float] = []
    for r in range(n):
        known = current.get(r)
        limit = known if known is not None else m
        chosen = None
        for c in avail:
            if c >= limit:
                break
            tail_rows = list(range(r + 1, n))
            tail_cols = [x for x in avail if x != c]
            tail = _sub_solve(rows, tail_rows, tail_cols)
            total = fsum(
                fixed_entries + [rows[r][c]] + [rows[i][j] for i, j in tail]
            )
            if total == best:
                chosen = c
                current = dict(tail)
                break
        if chosen is None:
            if known is None:
                continue  # row stays unmatched in every optimal completion
            chosen = known
        fixed.append((r, chosen))
        fixed_entries.append(rows[r][chosen])
        avail.remove(chosen)
    return fixed


def solve_min_cost(matrix: Sequence[Sequence[float]]) -> Assignment:
    """Globally optimal min-cost pairing of size ``min(n, m)``.

    Empty matrices yield an empty assignment with cost 0. Non-finite entries
    are rejected. Deterministic: ties resolve to the lexicographically
    smallest (row, col) pairing.
    """
    rows, n, m = _validate(matrix)
    if n == 0 or m == 0:
        return Assignment((), 0.0)
    working = _solve_raw(rows, n, m)
    best = fsum(rows[r][c] for r, c in working)
    pairs = _lex_refine(rows, n, m, working, best)
    return Assignment(tuple(pairs), best)


def solve_max_score(matrix: Sequence[Sequence[float]]) -> Assignment:
    """Maximizing twin of :func:`solve_min_cost` (same tie-break rule)."""
    rows, n, m = _validate(matrix)
    if n == 0 or m == 0:
        return Assignment((), 0.0)
    negated = [[-v for v in row] for row in rows]
    working = _solve_raw(negated, n, m)
    best = fsum(negated[r][c] for r, c in working)
    pairs = _lex_refine(negated, n, m, working, best)
    return Assignment(tuple(pairs), fsum(rows[r][c] for r, c in pairs))
