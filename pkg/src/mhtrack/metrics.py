"""Identity measures (IDP, IDR, IDF1) at observation granularity.

Each observation counts with a weight, normally its track-history duration.
Truth identities and computed tracks are matched one-to-one so that the
total weight of observations they agree on is maximal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .domain import DomainError
from .simulator import GroundTruth


@dataclass(frozen=True)
class IdReport:
    idp: float
    idr: float
    idf1: float
    idtp: float = 0.0
    matching: dict[int, int] = field(default_factory=dict)  # truth identity -> computed track index

    def as_dict(self) -> dict:
        return {
            "idf1": self.idf1,
            "idp": self.idp,
            "idr": self.idr,
            "idtp": self.idtp,
            "matching": {str(k): v for k, v in sorted(self.matching.items())},
        }

    def as_text(self) -> str:
        return "".join(f"{k}={getattr(self, k)!r}\n" for k in ("idf1", "idp", "idr", "idtp"))


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def overlap_matrix(computed: Sequence[Sequence[int]], truth: GroundTruth,
                   weights: Mapping[int, float]) -> tuple[list[int], np.ndarray]:
    idents = sorted(truth.identities)
    row = {ident: i for i, ident in enumerate(idents)}
    owner = truth.identity_of()
    mat = np.zeros((len(idents), len(computed)))
    for j, track in enumerate(computed):
        for obs in track:
            mat[row[owner[obs]], j] += weights[obs]
    return idents, mat


def _check(computed: Sequence[Sequence[int]], truth: GroundTruth) -> None:
    owner = truth.identity_of()
    seen: set[int] = set()
    for i, track in enumerate(computed):
        for obs in track:
            if obs not in owner:
                raise DomainError(f"track {i} references unknown observation {obs}")
            if obs in seen:
                raise DomainError(f"observation {obs} appears in more than one computed track")
            seen.add(obs)


def _report(idtp: float, computed: Sequence[Sequence[int]], truth: GroundTruth,
            weights: Mapping[int, float], matching: dict[int, int]) -> IdReport:
    total_computed = math.fsum(weights[o] for t in computed for o in t)
    total_truth = math.fsum(weights[o] for obs_ids in truth.identities.values() for o in obs_ids)
    idp = idtp / total_computed if total_computed > 0 else 0.0
    idr = idtp / total_truth if total_truth > 0 else 0.0
    return IdReport(idp, idr, _f1(idp, idr), idtp, matching)


def evaluate(computed: Sequence[Sequence[int]], truth: GroundTruth, weights: Mapping[int, float]) -> IdReport:
    _check(computed, truth)
    idents, mat = overlap_matrix(computed, truth, weights)
    matching: dict[int, int] = {}
    if mat.size:
        rows, cols = linear_sum_assignment(mat, maximize=True)
        for r, c in zip(rows, cols):
            if mat[r, c] > 0:
                matching[idents[r]] = int(c)
    idtp = math.fsum(mat[idents.index(i), j] for i, j in matching.items())
    return _report(idtp, computed, truth, weights, matching)


def brute_force_evaluate(computed: Sequence[Sequence[int]], truth: GroundTruth,
                         weights: Mapping[int, float]) -> IdReport:
    """Exhaustive search over one-to-one matchings; a check on ``evaluate`` for small cases."""
    _check(computed, truth)
    idents, mat = overlap_matrix(computed, truth, weights)
    if len(idents) > 8:
        raise ValueError("brute-force matching is limited to 8 identities")
    n_tracks = len(computed)
    best = [0.0, {}]

    def search(i: int, used: int, total: float, match: dict[int, int]) -> None:
        if i == len(idents):
            if total > best[0]:
                best[0], best[1] = total, dict(match)
            return
        search(i + 1, used, total, match)
        for j in range(n_tracks):
            if not used >> j & 1 and mat[i, j] > 0:
                match[idents[i]] = j
                search(i + 1, used | 1 << j, total + mat[i, j], match)
                del match[idents[i]]

    search(0, 0, 0.0, {})
    idtp = math.fsum(mat[idents.index(i), j] for i, j in best[1].items())
    return _report(idtp, computed, truth, weights, best[1])


def duration_weights(observations) -> dict[int, float]:
    return {o.id: o.duration for o in observations}
