"""Exact and (1+xi)-approximate nearest-neighbor search structures.

A static kd-tree index behind a thin contract wrapper, a per-class enemy
oracle, and an insertion-supporting dynamic index used by the subquadratic
selection loop. The contract everywhere is: the returned distance is at most
(1+xi) times the true minimum over the indexed points. xi = 0 means exact.

High-dimensional inputs (d > 16) silently fall back to an exact linear scan
regardless of xi; kd-trees stop paying for themselves there and the scan
trivially satisfies any contract.
"""
from __future__ import annotations

import logging
import math
import os

import numpy as np
from scipy.spatial import cKDTree

from . import core
from .core import Metric, NeighborResult, TrainingSet
from .errors import (
    DimensionMismatchError,
    EmptyActiveSetError,
    EmptyCandidatesError,
    InvalidParameterError,
    SingleClassError,
)

logger = logging.getLogger(__name__)

_SCAN_DIM = 16  # above this, linear scan beats the tree


def _workers() -> int:
    """Query-thread count for the tree backend, from NNC_THREADS (default 1).

    Results are identical regardless of thread count; the variable only
    trades wall time.
    """
    raw = os.environ.get("NNC_THREADS", "1")
    try:
        w = int(raw)
    except ValueError:
        logger.warning("ignoring non-integer NNC_THREADS=%r", raw)
        return 1
    return max(1, w)


def _check_xi(xi) -> float:
    xi = float(xi)
    if not (xi >= 0.0 and math.isfinite(xi)):
        raise InvalidParameterError("xi must be a finite value >= 0", xi=xi)
    return xi


class SpatialIndex:
    """Static nearest-neighbor index over a fixed coordinate array.

    Tree-backed for d <= 16, exact linear scan above. The scan path breaks
    ties by lowest row index; the tree path guarantees only the distance
    contract, deterministically for a fixed build.
    """

    def __init__(self, coords, xi: float = 0.0, metric: Metric = Metric()):
        arr = np.ascontiguousarray(np.asarray(coords, dtype=np.float64))
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise EmptyCandidatesError("an index needs at least one point")
        self.coords = arr
        self.xi = _check_xi(xi)
        self.metric = metric
        self.n, self.d = arr.shape
        self._tree = None if self.d > _SCAN_DIM else cKDTree(arr)

    def query(self, q) -> NeighborResult:
        idx, dist = self.query_many(np.asarray(q, dtype=np.float64).reshape(1, -1))
        return NeighborResult(int(idx[0]), float(dist[0]))

    def query_many(self, Q) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized queries; returns (indices, distances)."""
        Q = np.ascontiguousarray(np.asarray(Q, dtype=np.float64))
        if Q.ndim == 1:
            Q = Q.reshape(1, -1)
        if Q.shape[1] != self.d:
            raise DimensionMismatchError(
                "query dimension does not match the index",
                query_dim=Q.shape[1], index_dim=self.d,
            )
        if self._tree is None:
            idx = np.empty(Q.shape[0], dtype=np.int64)
            dist = np.empty(Q.shape[0], dtype=np.float64)
            for i in range(Q.shape[0]):
                d = core.dists_to_many(Q[i], self.coords, self.metric)
                j = int(np.argmin(d))
                idx[i] = j
                dist[i] = d[j]
            return idx, dist
        dist, idx = self._tree.query(
            Q, k=1, eps=self.xi, p=self.metric.p_exponent, workers=_workers()
        )
        return np.asarray(idx, dtype=np.int64), np.asarray(dist, dtype=np.float64)


def build_index(points, xi: float = 0.0, m: Metric = Metric()) -> SpatialIndex:
    """Build a SpatialIndex over a coordinate array or a TrainingSet."""
    if isinstance(points, TrainingSet):
        return SpatialIndex(points.coords, xi=xi, metric=points.metric)
    return SpatialIndex(points, xi=xi, metric=m)


def query_ann(index: SpatialIndex, q) -> NeighborResult:
    """Approximate nearest neighbor of q under the index's (1+xi) contract."""
    return index.query(q)


class EnemyOracle:
    """Per-class indexes answering nearest-enemy queries.

    One SpatialIndex per class; an enemy query for label L takes the minimum
    over the other classes' indexes. Each per-class answer obeys the (1+xi)
    contract, so the combined minimum does too.
    """

    def __init__(self, ts: TrainingSet, xi: float = 0.0):
        if ts.class_count < 2:
            raise SingleClassError("an enemy oracle needs at least two classes")
        self.ts = ts
        self.xi = _check_xi(xi)
        self._class_idx = [ts.class_indices(c) for c in range(ts.class_count)]
        self._class_index = [
            SpatialIndex(ts.coords[ci], xi=xi, metric=ts.metric) for ci in self._class_idx
        ]

    def query(self, q, label: int) -> NeighborResult:
        idx, dist = self.query_many(np.asarray(q, dtype=np.float64).reshape(1, -1), label)
        return NeighborResult(int(idx[0]), float(dist[0]))

    def query_many(self, Q, label: int) -> tuple[np.ndarray, np.ndarray]:
        """Nearest enemy for each row of Q, all of class ``label``."""
        Q = np.asarray(Q, dtype=np.float64)
        if Q.ndim == 1:
            Q = Q.reshape(1, -1)
        best_d = np.full(Q.shape[0], np.inf)
        best_i = np.full(Q.shape[0], -1, dtype=np.int64)
        for c in range(self.ts.class_count):
            if c == label:
                continue
            idx, dist = self._class_index[c].query_many(Q)
            better = dist < best_d
            best_d[better] = dist[better]
            best_i[better] = self._class_idx[c][idx[better]]
        return best_i, best_d


def nearest_enemy_all(ts: TrainingSet, xi: float = 0.0) -> list[NeighborResult]:
    """(1+xi)-approximate nearest enemy for every point of the set.

    xi = 0 routes through the exact chunked kernel (the same function the
    statistics and the exact selection path use), so the distances are
    bit-identical to the brute-force values, not merely within contract.
    """
    xi = _check_xi(xi)
    if ts.class_count < 2:
        raise SingleClassError("nearest enemies need at least two classes")
    if xi == 0.0:
        idx, dist = core.enemy_arrays(ts)
        return [NeighborResult(int(i), float(x)) for i, x in zip(idx, dist)]
    oracle = EnemyOracle(ts, xi=xi)
    out_i = np.empty(ts.n, dtype=np.int64)
    out_d = np.empty(ts.n, dtype=np.float64)
    for c in range(ts.class_count):
        rows = ts.class_indices(c)
        if rows.size == 0:
            continue
        idx, dist = oracle.query_many(ts.coords[rows], c)
        out_i[rows] = idx
        out_d[rows] = dist
    return [NeighborResult(int(i), float(x)) for i, x in zip(out_i, out_d)]


class DynamicIndex:
    """Nearest-neighbor index over a growing subset of a fixed point array.

    Inserting is O(1) amortized tree work plus an exact linear tail; when the
    tail outgrows the indexed prefix the whole active set is rebuilt into one
    static tree. Queries take the better of the tree answer (under its (1+xi)
    contract) and the exact tail scan, so the combined answer keeps the
    contract at every step.
    """

    _TAIL_MIN = 64

    def __init__(self, coords, xi: float = 0.0, metric: Metric = Metric()):
        arr = np.ascontiguousarray(np.asarray(coords, dtype=np.float64))
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise EmptyCandidatesError("a dynamic index needs a backing point array")
        self.coords = arr
        self.xi = _check_xi(xi)
        self.metric = metric
        self.n, self.d = arr.shape
        self._active = np.zeros(self.n, dtype=bool)
        self._tree = None
        self._tree_ids = np.empty(0, dtype=np.int64)
        self._tail: list[int] = []
        self._use_tree = self.d <= _SCAN_DIM

    @property
    def active_count(self) -> int:
        return len(self._tree_ids) + len(self._tail)

    def insert(self, point_index: int) -> None:
        """Activate one backing point. Inserting twice is a logged no-op."""
        i = int(point_index)
        if not (0 <= i < self.n):
            raise InvalidParameterError("point index out of range", index=i, n=self.n)
        if self._active[i]:
            logger.debug("dynamic index: point %d already active, ignoring", i)
            return
        self._active[i] = True
        self._tail.append(i)
        if self._use_tree and len(self._tail) >= max(self._TAIL_MIN, len(self._tree_ids)):
            self._rebuild()

    def _rebuild(self) -> None:
        ids = np.flatnonzero(self._active)
        self._tree = cKDTree(self.coords[ids])
        self._tree_ids = ids
        self._tail = []

    def query(self, q) -> NeighborResult:
        """Nearest active point under the (1+xi) contract."""
        if self.active_count == 0:
            raise EmptyActiveSetError("dynamic index queried before any insert")
        qv = np.asarray(q, dtype=np.float64).reshape(-1)
        if qv.shape[0] != self.d:
            raise DimensionMismatchError(
                "query dimension does not match the index",
                query_dim=qv.shape[0], index_dim=self.d,
            )
        best_i, best_d = -1, math.inf
        if self._tree is not None and len(self._tree_ids):
            dist, j = self._tree.query(
                qv, k=1, eps=self.xi, p=self.metric.p_exponent, workers=1
            )
            best_i, best_d = int(self._tree_ids[int(j)]), float(dist)
        if self._tail:
            tail_ids = np.asarray(self._tail, dtype=np.int64)
            d = core.dists_to_many(qv, self.coords[tail_ids], self.metric)
            j = int(np.argmin(d))
            if float(d[j]) < best_d:
                best_i, best_d = int(tail_ids[j]), float(d[j])
        return NeighborResult(best_i, best_d)


def insert(index: DynamicIndex, point_index: int) -> None:
    """Module-level insert mirroring DynamicIndex.insert."""
    index.insert(point_index)
