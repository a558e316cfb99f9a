"""Track-hypothesis trees over single-camera observations.

Each tree is rooted at one observation (the hypothesis that it starts a new
multi-camera track). Every scan that delivers new observations extends the
forest: searching leaves gain one child per admissible new observation and
every pre-existing leaf gains a dummy child meaning "not extended this scan".
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .domain import (
    CameraNetworkModel,
    DomainError,
    Observation,
    SctEvent,
    TrackerConfig,
    TrackPoint,
    normalize_feature,
)
from .gating import end_of_track_deadline, gate
from .scoring import BranchScoreState, delta_log_score, update_mean_feature


class IngestionError(DomainError):
    """Malformed or out-of-order scan input."""


class ConsistencyError(AssertionError):
    """An internal invariant of the hypothesis structures was broken."""


class Status(enum.IntEnum):
    TRACKING = 1
    SEARCHING = 2
    ENDED = 3

    @property
    def label(self) -> str:
        return f"w{int(self)}"


class HypNode:
    __slots__ = (
        "node_id",
        "obs_id",
        "dummy",
        "parent",
        "children",
        "status",
        "status_history",
        "score_state",
        "search_started_at",
        "depth",
        "branch_obs",
        "branch_obs_set",
        "root",
    )

    def __init__(
        self,
        node_id: int,
        obs_id: int,
        parent: Optional["HypNode"],
        status: Status,
        score_state: BranchScoreState,
        dummy: bool = False,
        search_started_at: Optional[float] = None,
    ):
        self.node_id = node_id
        self.obs_id = obs_id
        self.dummy = dummy
        self.parent = parent
        self.children: list[HypNode] = []
        self.status = status
        self.status_history = (status,)
        self.score_state = score_state
        self.search_started_at = search_started_at
        if parent is None:
            self.depth = 0
            self.branch_obs = (obs_id,)
            self.branch_obs_set = frozenset(self.branch_obs)
            self.root = self
        else:
            self.depth = parent.depth + 1
            self.root = parent.root
            if dummy:
                self.branch_obs = parent.branch_obs
                self.branch_obs_set = parent.branch_obs_set
            else:
                self.branch_obs = parent.branch_obs + (obs_id,)
                self.branch_obs_set = parent.branch_obs_set | {obs_id}
            parent.children.append(self)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def log_score(self) -> float:
        return self.score_state.log_score

    def set_status(self, status: Status) -> None:
        if status < self.status:
            raise ConsistencyError(f"node {self.node_id}: status cannot go {self.status.label} -> {status.label}")
        if status != self.status:
            self.status = status
            self.status_history = self.status_history + (status,)

    def path(self) -> list["HypNode"]:
        out = []
        node: Optional[HypNode] = self
        while node is not None:
            out.append(node)
            node = node.parent
        out.reverse()
        return out

    def __repr__(self) -> str:
        kind = "dummy" if self.dummy else "obs"
        return f"HypNode({self.node_id}, {kind}={self.obs_id}, {self.status.label}, {self.log_score:.4f})"


@dataclass(frozen=True)
class GlobalHypothesis:
    """A conflict-free selection of branches: the current multi-camera tracks."""

    branches: tuple[HypNode, ...]
    weight: float = 0.0

    @property
    def tracks(self) -> tuple[tuple[int, ...], ...]:
        return tuple(leaf.branch_obs for leaf in self.branches)

    def check_disjoint(self) -> None:
        seen: set[int] = set()
        for track in self.tracks:
            overlap = seen.intersection(track)
            if overlap:
                raise ConsistencyError(f"observations {sorted(overlap)} assigned to more than one track")
            seen.update(track)


class _ObservationBuilder:
    __slots__ = ("obs_id", "camera", "points", "feature", "closed")

    def __init__(self, obs_id: int, camera: str):
        self.obs_id = obs_id
        self.camera = camera
        self.points: list[TrackPoint] = []
        self.feature = None
        self.closed = False

    def snapshot(self, net: CameraNetworkModel) -> Observation:
        first, last = self.points[0], self.points[-1]
        entry = net.nearest_point(self.camera, first.image_pos)
        exit_ = net.nearest_point(self.camera, last.image_pos) if self.closed else None
        return Observation(
            id=self.obs_id,
            camera=self.camera,
            history=tuple(self.points),
            feature=self.feature,
            closed=self.closed,
            entry_point=entry,
            exit_point=exit_,
        )


class HypothesisForest:
    def __init__(self) -> None:
        self.trees: dict[int, HypNode] = {}  # root node_id -> root
        self.obs_index: dict[int, dict[int, HypNode]] = {}  # obs_id -> non-dummy nodes
        self.leaves: dict[int, HypNode] = {}
        self.observations: dict[int, Observation] = {}
        self.scan_counter = 0
        self.growth_scans = 0
        self.clock = 0.0
        self._next_node_id = 0
        self._builders: dict[int, _ObservationBuilder] = {}
        self._deadlines: dict[int, float] = {}

    # -- construction -------------------------------------------------------

    def _new_node(self, obs_id: int, parent: Optional[HypNode], status: Status, state: BranchScoreState,
                  dummy: bool = False, search_started_at: Optional[float] = None) -> HypNode:
        node = HypNode(self._next_node_id, obs_id, parent, status, state, dummy, search_started_at)
        self._next_node_id += 1
        if parent is None:
            self.trees[node.node_id] = node
        else:
            self.leaves.pop(parent.node_id, None)
        self.leaves[node.node_id] = node
        if not dummy:
            self.obs_index.setdefault(obs_id, {})[node.node_id] = node
        return node

    def _status_for(self, obs: Observation) -> tuple[Status, Optional[float]]:
        if obs.closed:
            return Status.SEARCHING, obs.end_time
        return Status.TRACKING, None

    def add_root(self, obs: Observation, cfg: TrackerConfig) -> HypNode:
        status, since = self._status_for(obs)
        return self._new_node(obs.id, None, status, BranchScoreState.initial(obs.feature, cfg), search_started_at=since)

    def add_child(self, parent: HypNode, obs: Observation, increment: float) -> HypNode:
        status, since = self._status_for(obs)
        state = update_mean_feature(parent.score_state, obs.feature)
        state = BranchScoreState(parent.score_state.log_score + increment, state.assoc_count, state.mean_feature)
        return self._new_node(obs.id, parent, status, state, search_started_at=since)

    def add_dummy(self, parent: HypNode) -> HypNode:
        node = self._new_node(parent.obs_id, parent, parent.status, parent.score_state, dummy=True,
                              search_started_at=parent.search_started_at)
        node.status_history = parent.status_history
        return node

    # -- queries ------------------------------------------------------------

    def sorted_leaves(self) -> list[HypNode]:
        return [self.leaves[k] for k in sorted(self.leaves)]

    def iter_nodes(self) -> Iterable[HypNode]:
        for root in self.trees.values():
            stack = [root]
            while stack:
                node = stack.pop()
                yield node
                stack.extend(reversed(node.children))

    def tree_leaves(self, root: HypNode) -> list[HypNode]:
        return [leaf for leaf in self.sorted_leaves() if leaf.root is root]

    def tree_of(self, obs_id: int) -> Optional[HypNode]:
        for root in self.trees.values():
            if root.obs_id == obs_id:
                return root
        return None

    def deadline(self, obs_id: int, net: CameraNetworkModel, cfg: TrackerConfig) -> float:
        try:
            return self._deadlines[obs_id]
        except KeyError:
            value = end_of_track_deadline(self.observations[obs_id], net, cfg)
            self._deadlines[obs_id] = value
            return value

    # -- removal ------------------------------------------------------------

    def delete_subtree(self, node: HypNode) -> None:
        stack = [node]
        while stack:
            cur = stack.pop()
            stack.extend(cur.children)
            self.leaves.pop(cur.node_id, None)
            if not cur.dummy:
                refs = self.obs_index.get(cur.obs_id)
                if refs is not None:
                    refs.pop(cur.node_id, None)
                    if not refs:
                        del self.obs_index[cur.obs_id]
        if node.parent is None:
            del self.trees[node.node_id]
        else:
            node.parent.children.remove(node)
            if not node.parent.children:
                raise ConsistencyError(f"node {node.parent.node_id} lost all its children")
            node.parent = None

    # -- event intake -------------------------------------------------------

    def _apply_events(self, events: Sequence[SctEvent], net: CameraNetworkModel) -> tuple[list[int], list[int]]:
        started: list[int] = []
        touched: list[int] = []
        for ev in events:
            b = self._builders.get(ev.obs_id)
            if ev.kind == "start":
                if b is not None or ev.obs_id in self.observations:
                    raise IngestionError(f"observation {ev.obs_id} started twice")
                b = self._builders[ev.obs_id] = _ObservationBuilder(ev.obs_id, ev.camera)
                started.append(ev.obs_id)
                if ev.feature is None:
                    raise IngestionError(f"start event of observation {ev.obs_id} carries no feature")
            elif b is None:
                if ev.obs_id in self.observations and self.observations[ev.obs_id].closed:
                    raise IngestionError(f"event for observation {ev.obs_id} after its end")
                raise IngestionError(f"event references unknown observation {ev.obs_id}")
            if b.closed:
                raise IngestionError(f"event for observation {ev.obs_id} after its end")
            if ev.camera != b.camera:
                raise IngestionError(f"observation {ev.obs_id} changed camera")
            if b.points and ev.time <= b.points[-1].time:
                raise IngestionError(f"observation {ev.obs_id}: non-increasing time {ev.time}")
            b.points.append(ev.point())
            if ev.feature is not None:
                b.feature = normalize_feature(ev.feature)
            if ev.kind == "end":
                b.closed = True
            if ev.obs_id not in touched:
                touched.append(ev.obs_id)
        for obs_id in touched:
            b = self._builders[obs_id]
            self.observations[obs_id] = b.snapshot(net)
            if b.closed:
                del self._builders[obs_id]
        return started, touched


def ingest_scan(
    forest: HypothesisForest,
    events: Sequence[SctEvent],
    net: CameraNetworkModel,
    cfg: TrackerConfig,
) -> HypothesisForest:
    """Advance the forest by one scan of the camera network.

    Order of work: apply the SCT events; flip tracking leaves whose
    observation ended to searching; if any observation started this scan,
    open one new tree per new observation, extend searching leaves with every
    admissible new observation and give every pre-existing leaf a dummy
    child; finally declare searching leaves whose deadline passed by the scan
    end as ended.
    """
    scan_start = forest.scan_counter * cfg.scan_seconds
    scan_end = scan_start + cfg.scan_seconds
    for ev in events:
        if int(ev.time // cfg.scan_seconds) != forest.scan_counter:
            raise IngestionError(
                f"event at t={ev.time} outside scan {forest.scan_counter} [{scan_start}, {scan_end})"
            )
    started, _ = forest._apply_events(events, net)

    for leaf in forest.sorted_leaves():
        if leaf.status is Status.TRACKING:
            obs = forest.observations[leaf.obs_id]
            if obs.closed:
                leaf.set_status(Status.SEARCHING)
                leaf.search_started_at = obs.end_time

    if started:
        prior = forest.sorted_leaves()
        new_obs = [forest.observations[i] for i in sorted(started)]
        for obs in new_obs:
            forest.add_root(obs, cfg)
        for leaf in prior:
            if leaf.status is Status.SEARCHING:
                _extend(forest, leaf, new_obs, net, cfg)
            forest.add_dummy(leaf)
        forest.growth_scans += 1

    for leaf in forest.sorted_leaves():
        if leaf.status is Status.SEARCHING:
            if scan_end - leaf.search_started_at > forest.deadline(leaf.obs_id, net, cfg):
                leaf.set_status(Status.ENDED)

    forest.scan_counter += 1
    forest.clock = scan_end
    return forest


def _extend(forest: HypothesisForest, leaf: HypNode, new_obs: list[Observation],
            net: CameraNetworkModel, cfg: TrackerConfig) -> None:
    last = forest.observations[leaf.obs_id]
    deadline = forest.deadline(last.id, net, cfg)
    for cand in new_obs:
        if cand.start_time <= last.end_time:
            continue
        if cand.start_time - leaf.search_started_at > deadline:
            continue
        if not gate(last, cand, net, cfg).admissible:
            continue
        inc = delta_log_score(leaf.score_state, last, cand, net, cfg)
        if inc == -math.inf:
            continue
        forest.add_child(leaf, cand, inc)


def branch_observations(leaf: HypNode) -> tuple[int, ...]:
    return leaf.branch_obs


def conflict(leaf_a: HypNode, leaf_b: HypNode) -> bool:
    return not leaf_a.branch_obs_set.isdisjoint(leaf_b.branch_obs_set)


def n_scan_prune(forest: HypothesisForest, best: GlobalHypothesis, cfg: TrackerConfig) -> HypothesisForest:
    """Resolve ambiguities older than ``cfg.n_scan`` growth scans.

    For each selected leaf, the node ``n_scan`` levels up is the decision
    node; every alternative that leaves the selected path at or above it is
    removed, so the tree above the decision node is a single path. The
    observations on that committed path are then final: any other tree
    rooted at one of them is deleted, as is any other subtree that uses one.
    Leaves shallower than ``n_scan`` decide nothing yet.
    """
    if cfg.n_scan is None:
        return forest
    n = cfg.n_scan
    committed: dict[int, HypNode] = {}  # obs_id -> root of the tree that owns it
    for leaf in best.branches:
        if leaf.node_id not in forest.leaves:
            raise ConsistencyError(f"selected leaf {leaf.node_id} is not in the forest")
        if leaf.depth < n:
            continue
        path = leaf.path()
        keep = path[: leaf.depth - n + 2]  # root .. the decision node's child on the path
        for parent, child in zip(keep, keep[1:]):
            for other in list(parent.children):
                if other is not child:
                    forest.delete_subtree(other)
        for node in keep:
            if not node.dummy:
                committed[node.obs_id] = leaf.root

    selected_ids = {leaf.node_id for leaf in best.branches}
    for obs_id in sorted(committed):
        owner = committed[obs_id]
        # one branch never holds an observation twice, so these nodes are not nested
        for node in sorted(forest.obs_index.get(obs_id, {}).values(), key=lambda x: x.node_id):
            if node.root is owner:
                continue
            _check_not_selected(node, selected_ids)
            forest.delete_subtree(node)
    return forest


def _check_not_selected(node: HypNode, selected_ids: set[int]) -> None:
    stack = [node]
    while stack:
        cur = stack.pop()
        if cur.node_id in selected_ids:
            raise ConsistencyError(f"pruning would remove selected leaf {cur.node_id}")
        stack.extend(cur.children)


def dump_forest(forest: HypothesisForest) -> str:
    """Indented text rendering with a stable field order, one node per line."""
    lines = [f"# scan={forest.scan_counter} clock={forest.clock!r} trees={len(forest.trees)} leaves={len(forest.leaves)}"]
    for root in forest.trees.values():
        stack = [(root, 0)]
        while stack:
            node, level = stack.pop()
            status = node.status.label if node.is_leaf else "-"
            lines.append(
                f"{'  ' * level}node={node.node_id} obs={node.obs_id} dummy={int(node.dummy)} "
                f"status={status} score={node.log_score:.9f}"
            )
            stack.extend((c, level + 1) for c in reversed(node.children))
    return "\n".join(lines) + "\n"


def check_forest(forest: HypothesisForest) -> None:
    """Full-traversal consistency check of the index structures."""
    index: dict[int, set[int]] = {}
    leaves: set[int] = set()
    for node in forest.iter_nodes():
        if not node.dummy:
            index.setdefault(node.obs_id, set()).add(node.node_id)
        else:
            if node.obs_id != node.parent.obs_id:
                raise ConsistencyError(f"dummy {node.node_id} does not repeat its parent's observation")
        if node.is_leaf:
            leaves.add(node.node_id)
        if len(node.branch_obs) != len(node.branch_obs_set):
            raise ConsistencyError(f"branch at {node.node_id} repeats an observation")
        times = [(forest.observations[o].start_time, forest.observations[o].end_time) for o in node.branch_obs]
        for (_, end), (start, _) in zip(times, times[1:]):
            if not start > end:
                raise ConsistencyError(f"branch at {node.node_id} is not time-ordered")
    if {k: set(v) for k, v in forest.obs_index.items()} != index:
        raise ConsistencyError("obs_index does not match the trees")
    if set(forest.leaves) != leaves:
        raise ConsistencyError("leaf registry does not match the trees")
    for obs_id in forest.observations:
        if obs_id not in forest.obs_index:
            raise ConsistencyError(f"observation {obs_id} has no hypothesis left")
