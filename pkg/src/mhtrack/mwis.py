"""Maximum weighted independent set over the branch conflict graph.

Vertices are hypothesis leaves weighted by their log score; an edge joins two
leaves whose branches share an observation. The exact solver is a
branch-and-bound over vertices in descending weight order, bounded by a greedy
clique cover, run independently on each connected component.

Ties between optimal sets are broken deterministically by the
lexicographically smallest sorted vertex-id tuple. Only positive-weight
vertices are ever selected, so no optimum is a proper subset of another and
the per-component choices combine into the global lexicographic minimum.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .forest import ConsistencyError, GlobalHypothesis, HypothesisForest

BRUTE_FORCE_LIMIT = 25
_BOUND_SLACK = 1e-9


@dataclass
class ConflictGraph:
    weights: list[float]
    adjacency: list[int]  # bitmask of neighbours per vertex
    payload: list[Any] = field(default_factory=list)

    @classmethod
    def from_edges(cls, weights: Sequence[float], edges: Iterable[tuple[int, int]],
                   payload: Optional[Sequence[Any]] = None) -> "ConflictGraph":
        n = len(weights)
        adj = [0] * n
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop on vertex {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range")
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        return cls([float(w) for w in weights], adj, list(payload or []))

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def edges(self) -> list[tuple[int, int]]:
        out = []
        for i, mask in enumerate(self.adjacency):
            m = mask >> (i + 1)
            j = i + 1
            while m:
                if m & 1:
                    out.append((i, j))
                m >>= 1
                j += 1
        return out

    def is_independent(self, vertices: Iterable[int]) -> bool:
        mask = 0
        for v in vertices:
            mask |= 1 << v
        return all(not (self.adjacency[v] & mask) for v in vertices)

    def components(self) -> list[list[int]]:
        seen = 0
        out = []
        for start in range(len(self)):
            if seen >> start & 1:
                continue
            comp_mask = 1 << start
            frontier = comp_mask
            while frontier:
                v = (frontier & -frontier).bit_length() - 1
                frontier &= frontier - 1
                new = self.adjacency[v] & ~comp_mask
                comp_mask |= new
                frontier |= new
            seen |= comp_mask
            out.append(_bits(comp_mask))
        return out


@dataclass(frozen=True)
class MwisResult:
    selected: tuple[int, ...]
    weight: float


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _set_weight(weights: Sequence[float], vertices: Iterable[int]) -> float:
    return math.fsum(weights[v] for v in vertices)


def _better(cand: tuple[int, ...], cand_w: float, best: tuple[int, ...], best_w: float) -> bool:
    if cand_w != best_w:
        return cand_w > best_w
    return cand < best


def _solve_component(g: ConflictGraph, comp: list[int]) -> tuple[int, ...]:
    # vertices that cannot raise the total never belong to a preferred optimum
    order = sorted((v for v in comp if g.weights[v] > 0), key=lambda v: (-g.weights[v], v))
    m = len(order)
    if m == 0:
        return ()
    local = {v: i for i, v in enumerate(order)}
    w = [g.weights[v] for v in order]
    adj = [0] * m
    for i, v in enumerate(order):
        for u in _bits(g.adjacency[v]):
            j = local.get(u)
            if j is not None:
                adj[i] |= 1 << j

    best: list = [(), -math.inf]

    def clique_cover_bound(p: int) -> float:
        # greedy: each vertex joins the first clique it is fully adjacent to
        commons: list[int] = []
        bound = 0.0
        while p:
            low = p & -p
            v = low.bit_length() - 1
            p ^= low
            for k, common in enumerate(commons):
                if common & low:
                    commons[k] = common & adj[v]
                    break
            else:
                commons.append(adj[v])
                bound += w[v]  # heaviest member comes first
        return bound

    def expand(p: int, chosen: list[int], cur_w: float) -> None:
        if not p:
            ids = tuple(sorted(order[i] for i in chosen))
            total = _set_weight(g.weights, ids)
            if _better(ids, total, best[0], best[1]):
                best[0], best[1] = ids, total
            return
        if cur_w + clique_cover_bound(p) < best[1] - _BOUND_SLACK:
            return
        low = p & -p
        v = low.bit_length() - 1
        chosen.append(v)
        expand(p & ~adj[v] & ~low, chosen, cur_w + w[v])
        chosen.pop()
        expand(p & ~low, chosen, cur_w)

    limit = sys.getrecursionlimit()
    if limit < 2 * m + 100:
        sys.setrecursionlimit(2 * m + 100)
    expand((1 << m) - 1, [], 0.0)
    return best[0]


def solve_mwis(g: ConflictGraph) -> MwisResult:
    """Exact maximum weighted independent set."""
    selected: list[int] = []
    for comp in g.components():
        selected.extend(_solve_component(g, comp))
    sel = tuple(sorted(selected))
    return MwisResult(sel, _set_weight(g.weights, sel))


def brute_force_mwis(g: ConflictGraph) -> MwisResult:
    """Exhaustive search over all 2^n vertex subsets (n <= 25)."""
    n = len(g)
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force refuses graphs over {BRUTE_FORCE_LIMIT} vertices (got {n})")
    totals = np.zeros(1)
    valid = np.ones(1, dtype=bool)
    for i in range(n):
        lower_nbrs = g.adjacency[i] & ((1 << i) - 1)
        masks = np.arange(1 << i, dtype=np.int64)
        totals = np.concatenate([totals, totals + g.weights[i]])
        valid = np.concatenate([valid, valid & ((masks & lower_nbrs) == 0)])
    candidates = np.flatnonzero(valid)
    top = totals[candidates].max()
    near = candidates[totals[candidates] >= top - 1e-9 * (1.0 + abs(top))]
    nonpositive = sum(1 << i for i, w in enumerate(g.weights) if w <= 0)
    near = near[(near & nonpositive) == 0]  # same tie-break as the solver
    best: tuple[int, ...] = ()
    best_w = -math.inf
    for mask in near.tolist():
        ids = tuple(_bits(int(mask)))
        total = _set_weight(g.weights, ids)
        if _better(ids, total, best, best_w):
            best, best_w = ids, total
    return MwisResult(best, _set_weight(g.weights, best))


def greedy_mwis(g: ConflictGraph) -> MwisResult:
    """Heaviest-first greedy independent set; a lower bound for the exact solver."""
    taken = 0
    blocked = 0
    for v in sorted(range(len(g)), key=lambda v: (-g.weights[v], v)):
        if g.weights[v] <= 0 or blocked >> v & 1:
            continue
        taken |= 1 << v
        blocked |= g.adjacency[v] | (1 << v)
    sel = tuple(_bits(taken))
    return MwisResult(sel, _set_weight(g.weights, sel))


def build_conflict_graph(forest: HypothesisForest) -> ConflictGraph:
    """One vertex per leaf (ordered by node id), weighted by the branch score."""
    leaves = forest.sorted_leaves()
    buckets: dict[int, int] = {}
    for i, leaf in enumerate(leaves):
        for obs in leaf.branch_obs:
            buckets[obs] = buckets.get(obs, 0) | (1 << i)
    adj = [0] * len(leaves)
    for i, leaf in enumerate(leaves):
        mask = 0
        for obs in leaf.branch_obs:
            mask |= buckets[obs]
        adj[i] = mask & ~(1 << i)
    return ConflictGraph([leaf.log_score for leaf in leaves], adj, leaves)


def best_global_hypothesis(forest: HypothesisForest) -> GlobalHypothesis:
    g = build_conflict_graph(forest)
    result = solve_mwis(g)
    best = GlobalHypothesis(tuple(g.payload[i] for i in result.selected), result.weight)
    best.check_disjoint()
    if any(g.weights[i] <= 0 for i in result.selected):
        raise ConsistencyError("a non-positive branch was selected")
    return best


def dump_graph(g: ConflictGraph) -> str:
    """Edge-list text: ``v <id> <weight>`` lines, then ``e <i> <j>`` lines."""
    lines = [f"# vertices={len(g)} edges={len(g.edges)}"]
    lines += [f"v {i} {w!r}" for i, w in enumerate(g.weights)]
    lines += [f"e {i} {j}" for i, j in g.edges]
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> ConflictGraph:
    weights: dict[int, float] = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "v" and len(parts) == 3:
                weights[int(parts[1])] = float(parts[2])
            elif parts[0] == "e" and len(parts) == 3:
                edges.append((int(parts[1]), int(parts[2])))
            else:
                raise ValueError(line)
        except ValueError:
            raise ValueError(f"line {lineno}: malformed graph record {raw!r}") from None
    if sorted(weights) != list(range(len(weights))):
        raise ValueError("vertex ids must be 0..n-1")
    return ConflictGraph.from_edges([weights[i] for i in range(len(weights))], edges)
