"""Assignment solvers over square cost matrices.

Rows are frequencies and columns time slots, so an assignment maps every row
``i`` to a column ``perm[i]`` (0-based). The transmitted codeword is the
inverse map, exposed as :attr:`Assignment.codeword` with 1-based symbols.
Forbidden cells are ``+inf``.

Every solver takes an optional :class:`~ptc.counters.OpCounter` and adds the
number of cost cells it inspected to ``counter.solver``.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .counters import OpCounter

BRUTE_FORCE_MAX_M = 8


class InfeasibleError(ValueError):
    """No finite-cost perfect assignment exists."""


@dataclass(frozen=True)
class Assignment:
    perm: tuple[int, ...]
    cost: float

    @property
    def codeword(self) -> tuple[int, ...]:
        word = [0] * len(self.perm)
        for row, col in enumerate(self.perm):
            word[col] = row + 1
        return tuple(word)

    @classmethod
    def from_codeword(cls, word: Sequence[int], C) -> "Assignment":
        perm = [0] * len(word)
        for col, sym in enumerate(word):
            perm[sym - 1] = col
        C = np.asarray(C, dtype=float)
        return cls(tuple(perm), float(C[np.arange(len(perm)), perm].sum()))


def _as_rows(C) -> list[list[float]]:
    arr = np.asarray(C, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {arr.shape}")
    if np.isnan(arr).any():
        raise ValueError("cost matrix contains NaN")
    return arr.tolist()


def _solve(a: list[list[float]], counter: OpCounter | None) -> tuple[list[int], float]:
    """Shortest-augmenting-path Hungarian method with row/column potentials.

    Forbidden (+inf) cells are replaced by a finite penalty larger than any
    spread of finite assignment costs; using one means the matrix is infeasible.
    """
    n = len(a)
    if n == 0:
        return [], 0.0
    finite = [x for row in a for x in row if x != math.inf]
    if len(finite) < n * n:
        if any(x == -math.inf for x in finite):
            raise ValueError("cost matrix contains -inf")
        big = 2.0 * sum(abs(x) for x in finite) + 1.0
        work = [[big if x == math.inf else x for x in row] for row in a]
    else:
        work = a
    inf = math.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    p = [0] * (n + 1)  # p[j]: row matched to column j (1-based, 0 = free)
    way = [0] * (n + 1)
    ops = 0
    cols = range(1, n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = work[i0 - 1]
            ui0 = u[i0]
            delta = inf
            j1 = 0
            for j in cols:
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            ops += n
            for j in range(n + 1):
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
    perm = [0] * n
    for j in cols:
        perm[p[j] - 1] = j - 1
    if counter is not None:
        counter.solver += ops
    cost = 0.0
    for r in range(n):
        x = a[r][perm[r]]
        if x == inf:
            raise InfeasibleError("no finite-cost assignment exists")
        cost += x
    return perm, cost


def hungarian(C, counter: OpCounter | None = None) -> Assignment:
    """Minimum-cost assignment (deterministic: lowest column wins scan ties)."""
    perm, cost = _solve(_as_rows(C), counter)
    return Assignment(tuple(perm), cost)


@dataclass
class MurtyNode:
    """A subproblem: pairs that must be used and pairs that are barred."""

    fixed: tuple[tuple[int, int], ...]
    forbidden: frozenset[tuple[int, int]]
    solution: Assignment | None = None


def _solve_node(a: list[list[float]], node: MurtyNode, counter: OpCounter | None) -> Assignment | None:
    n = len(a)
    fixed_rows = {r for r, _ in node.fixed}
    fixed_cols = {c for _, c in node.fixed}
    rows = [r for r in range(n) if r not in fixed_rows]
    cols = [c for c in range(n) if c not in fixed_cols]
    sub = [[math.inf if (r, c) in node.forbidden else a[r][c] for c in cols] for r in rows]
    try:
        sub_perm, sub_cost = _solve(sub, counter)
    except InfeasibleError:
        return None
    perm = [0] * n
    cost = sub_cost
    for r, c in node.fixed:
        perm[r] = c
        cost += a[r][c]
    for i, r in enumerate(rows):
        perm[r] = cols[sub_perm[i]]
    if cost == math.inf:
        return None
    return Assignment(tuple(perm), cost)


def murty_iter(C, counter: OpCounter | None = None) -> Iterator[Assignment]:
    """Yield assignments in non-decreasing cost order (Murty's ranking).

    After an assignment is yielded, its node is split on the solution pairs of
    the free rows, taken in row order: child ``p`` keeps the first ``p`` pairs
    fixed and bars pair ``p + 1``. The last free row needs no child, so a node
    with ``m`` free rows has ``m - 1`` children. Candidate nodes sit in a heap
    keyed by (cost, insertion order).
    """
    a = _as_rows(C)
    root = MurtyNode((), frozenset())
    root.solution = _solve_node(a, root, counter)
    if root.solution is None:
        raise InfeasibleError("no finite-cost assignment exists")
    tick = itertools.count()
    heap = [(root.solution.cost, next(tick), root)]
    while heap:
        _, _, node = heapq.heappop(heap)
        yield node.solution
        sol = node.solution.perm
        fixed_rows = {r for r, _ in node.fixed}
        free = [r for r in range(len(a)) if r not in fixed_rows]
        for idx in range(len(free) - 1):
            r = free[idx]
            child = MurtyNode(
                node.fixed + tuple((q, sol[q]) for q in free[:idx]),
                node.forbidden | {(r, sol[r])},
            )
            child.solution = _solve_node(a, child, counter)
            if child.solution is not None:
                heapq.heappush(heap, (child.solution.cost, next(tick), child))


def murty_kbest(C, k: int, counter: OpCounter | None = None) -> list[Assignment]:
    """The ``k`` cheapest assignments; all of them if ``k`` exceeds the number that exist."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return list(itertools.islice(murty_iter(C, counter), k))


def branch_and_bound(C, counter: OpCounter | None = None) -> Assignment:
    """Level-wise tree search that keeps a single surviving node per level.

    Level ``e`` assigns row ``e``. Each candidate column ``t`` is scored by the
    committed cost, plus ``C[e, t]``, plus for every later row the minimum
    over columns that are neither scheduled nor ``t``. The cheapest child
    survives (lowest column on ties); the others are pruned without
    backtracking, so the result is valid but not always optimal.
    """
    a = _as_rows(C)
    n = len(a)
    if any(x == math.inf for row in a for x in row):
        raise ValueError("branch_and_bound needs a fully finite cost matrix")
    unused = list(range(n))
    perm = [0] * n
    ops = 0
    inf = math.inf
    for e in range(n):
        if len(unused) == 1:
            perm[e] = unused[0]
            break
        # smallest and second-smallest entry of each later row over unused columns
        mins = []
        for i in range(e + 1, n):
            row = a[i]
            m1 = m2 = inf
            arg = -1
            for j in unused:
                x = row[j]
                if x < m1:
                    m2, m1, arg = m1, x, j
                elif x < m2:
                    m2 = x
            mins.append((m1, arg, m2))
            ops += len(unused)
        row = a[e]
        best_t, best = -1, inf
        for t in unused:
            bound = row[t]
            for m1, arg, m2 in mins:
                bound += m2 if arg == t else m1
            ops += len(mins) + 1
            if bound < best:
                best, best_t = bound, t
        perm[e] = best_t
        unused.remove(best_t)
    if counter is not None:
        counter.solver += ops
    return Assignment(tuple(perm), float(sum(a[i][perm[i]] for i in range(n))))


@lru_cache(maxsize=None)
def _all_perms(M: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(M))), dtype=np.int64)


def all_assignments(C) -> tuple[np.ndarray, np.ndarray]:
    """Every permutation (row -> column, lexicographic order) with its cost."""
    arr = np.asarray(C, dtype=float)
    M = arr.shape[0]
    if M > BRUTE_FORCE_MAX_M:
        raise ValueError(f"refusing to enumerate {M}! permutations (limit M <= {BRUTE_FORCE_MAX_M})")
    perms = _all_perms(M)
    return perms, arr[np.arange(M), perms].sum(axis=1)


def brute_force_best(C, book=None, counter: OpCounter | None = None) -> Assignment:
    """Exhaustive minimum over all M! permutations, or over the codebook when given.

    With a codebook this is the optimal in-book decision; ties resolve to the
    first permutation in lexicographic order or the lowest codebook row.
    """
    arr = np.asarray(C, dtype=float)
    M = arr.shape[0]
    if book is None:
        perms, costs = all_assignments(arr)
        q = int(np.argmin(costs))
        if counter is not None:
            counter.solver += len(perms) * M
        if costs[q] == math.inf:
            raise InfeasibleError("no finite-cost assignment exists")
        return Assignment(tuple(int(x) for x in perms[q]), float(costs[q]))
    if M > BRUTE_FORCE_MAX_M and book.size > math.factorial(BRUTE_FORCE_MAX_M):
        raise ValueError("codebook too large to enumerate")
    words = np.asarray(book.words, dtype=np.int64) - 1  # (Q, M): row index per column
    costs = arr[words, np.arange(M)].sum(axis=1)
    if counter is not None:
        counter.solver += len(words) * M
    q = int(np.argmin(costs))
    return Assignment.from_codeword(book.words[q], arr)
