"""Metric-space primitives for labeled point sets.

Distances, exhaustive nearest-neighbor and nearest-enemy queries, chromatic
density, and whole-dataset boundary statistics. Everything in this module is
deliberately brute force: these functions are the ground truth the spatial
index and the condensation algorithms are measured against, so clarity and
exactness win over speed. The only concession to scale is chunking of the
pairwise distance sweeps so memory stays bounded.

Tie-breaking is uniform everywhere: among equidistant points the one with the
lowest index wins.
"""
from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    CoincidentPointsError,
    DimensionMismatchError,
    DuplicateConflictError,
    EmptyCandidatesError,
    InvalidParameterError,
    MemberPointQueryError,
    QuadraticGateError,
    SingleClassError,
)

# Pairwise O(n^2) sweeps (diameter, spread) refuse above this without an
# explicit force flag; kappa/gamma always run because they are O(n * n_c)
# chunked and criterion-level checks need them at full scale.
QUADRATIC_GATE = 20_000

# Chunk size for cdist sweeps, in matrix elements (float64). Roughly 320 MB.
_CHUNK_ELEMS = 40_000_000

# Absolute clearance the verification checks demand of strict inequalities.
# Selection rules pad their skip/reject decisions by the same amount so that
# anything an algorithm leaves out provably clears the corresponding check;
# near-boundary points (within the pad) are kept instead of risking a
# kernel-noise flip against the verifier. Calibrated for data at unit scale.
VERIFY_SLACK = 1e-9


@dataclass(frozen=True)
class Metric:
    """Minkowski metric selector; ``p_exponent`` is any real >= 1 or ``math.inf``."""

    p_exponent: float = 2.0

    def __post_init__(self):
        p = self.p_exponent
        if isinstance(p, bool) or not isinstance(p, (int, float)):
            raise InvalidParameterError("metric exponent must be a real number", value=p)
        if p != math.inf:
            if math.isnan(p) or p < 1:
                raise InvalidParameterError(
                    "metric exponent must be >= 1 or inf", value=p
                )
        object.__setattr__(self, "p_exponent", float(p))

    def cdist_args(self):
        """Name and kwargs for scipy.spatial.distance.cdist."""
        p = self.p_exponent
        if p == 2.0:
            return "euclidean", {}
        if p == 1.0:
            return "cityblock", {}
        if p == math.inf:
            return "chebyshev", {}
        return "minkowski", {"p": p}


class NeighborResult(tuple):
    """(index, distance) pair returned by neighbor queries."""

    __slots__ = ()

    def __new__(cls, index: int, distance: float):
        return super().__new__(cls, (int(index), float(distance)))

    @property
    def index(self) -> int:
        return self[0]

    @property
    def distance(self) -> float:
        return self[1]

    def __repr__(self):
        return f"NeighborResult(index={self[0]}, distance={self[1]!r})"


@dataclass(frozen=True)
class LabeledPoint:
    """A single training point: coordinates, class label, position in the set."""

    coords: np.ndarray
    label: int
    index: int


@dataclass(frozen=True)
class DatasetStats:
    """Boundary statistics of a labeled set.

    ``diameter`` and ``spread`` are None when the set is large and the
    quadratic sweep was not forced. ``spread`` is diameter over the smallest
    nonzero pairwise distance (real datasets contain exact duplicate rows,
    which would otherwise make it infinite).
    """

    n: int
    d: int
    class_count: int
    kappa: int
    gamma: float
    diameter: Optional[float]
    spread: Optional[float]


def _coerce_coords(coords) -> np.ndarray:
    arr = np.asarray(coords, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionMismatchError(
            "coordinates must be a 2-D array of shape (n, d)", shape=arr.shape
        )
    return np.ascontiguousarray(arr)


def _coerce_query(q, d: int) -> np.ndarray:
    arr = np.asarray(q, dtype=np.float64).reshape(-1)
    if arr.shape[0] != d:
        raise DimensionMismatchError(
            "query dimension does not match the set", query_dim=arr.shape[0], set_dim=d
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError("query coordinates must be finite")
    return arr


class TrainingSet:
    """Immutable labeled point collection in a Minkowski metric.

    Construction validates the data: finite coordinates, one shared
    dimensionality, integer labels forming a dense range, and no pair of
    identical coordinates with different labels (which would collapse the
    minimum enemy margin to zero).
    """

    __slots__ = ("coords", "labels", "metric", "class_count", "_points", "_enemy_cache")

    def __init__(self, coords, labels, metric: Metric = Metric(), class_count: int | None = None):
        arr = _coerce_coords(coords)
        if arr.shape[0] == 0:
            raise EmptyCandidatesError("a training set needs at least one point")
        if not np.all(np.isfinite(arr)):
            bad = np.flatnonzero(~np.isfinite(arr).all(axis=1))
            raise InvalidParameterError(
                "coordinates must be finite", rows=[int(i) for i in bad[:10]]
            )
        lab = np.asarray(labels)
        if lab.shape != (arr.shape[0],):
            raise DimensionMismatchError(
                "labels must be one integer per point",
                labels_shape=lab.shape, n=arr.shape[0],
            )
        if not np.issubdtype(lab.dtype, np.integer):
            if np.issubdtype(lab.dtype, np.floating) and np.all(lab == lab.astype(np.int64)):
                lab = lab.astype(np.int64)
            else:
                raise InvalidParameterError("labels must be integers")
        lab = np.ascontiguousarray(lab, dtype=np.int64)
        if lab.min() < 0:
            raise InvalidParameterError("labels must be non-negative")
        c = int(lab.max()) + 1 if class_count is None else int(class_count)
        present = np.unique(lab)
        if class_count is not None and (c < 1 or lab.max() >= c):
            raise InvalidParameterError("labels exceed declared class count", class_count=c)
        if present.size != c:
            missing = sorted(set(range(c)) - set(int(x) for x in present))
            raise InvalidParameterError(
                "every class id in 0..class_count-1 needs at least one point",
                missing=missing,
            )
        _reject_conflicting_duplicates(arr, lab)
        arr.setflags(write=False)
        lab.setflags(write=False)
        self.coords = arr
        self.labels = lab
        self.metric = metric
        self.class_count = c
        self._points = None
        self._enemy_cache = None

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def point(self, i: int) -> LabeledPoint:
        i = int(i)
        if not (0 <= i < self.n):
            raise InvalidParameterError("point index out of range", index=i, n=self.n)
        return LabeledPoint(self.coords[i], int(self.labels[i]), i)

    @property
    def points(self) -> tuple[LabeledPoint, ...]:
        if self._points is None:
            self._points = tuple(
                LabeledPoint(self.coords[i], int(self.labels[i]), i) for i in range(self.n)
            )
        return self._points

    def class_indices(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def with_coords(self, coords) -> "TrainingSet":
        return TrainingSet(coords, self.labels.copy(), self.metric, self.class_count)

    def drop_caches(self) -> None:
        """Forget memoized derived quantities (used by honest re-timing)."""
        self._enemy_cache = None
        self._points = None

    def __len__(self) -> int:
        return self.n

    def __repr__(self):
        return (
            f"TrainingSet(n={self.n}, d={self.d}, classes={self.class_count}, "
            f"metric=L{self.metric.p_exponent:g})"
        )


def _reject_conflicting_duplicates(coords: np.ndarray, labels: np.ndarray) -> None:
    # Normalize -0.0 to +0.0 so byte comparison equals value comparison.
    canon = coords + 0.0
    seen: dict[bytes, int] = {}
    for i in range(canon.shape[0]):
        key = canon[i].tobytes()
        j = seen.get(key)
        if j is None:
            seen[key] = i
        elif labels[i] != labels[j]:
            raise DuplicateConflictError(
                "identical coordinates carry different labels",
                rows=(int(j), int(i)),
                labels=(int(labels[j]), int(labels[i])),
            )


def distance(a, b, m: Metric = Metric()) -> float:
    """Minkowski distance between two coordinate vectors."""
    av = np.asarray(a, dtype=np.float64).reshape(-1)
    bv = np.asarray(b, dtype=np.float64).reshape(-1)
    if av.shape != bv.shape:
        raise DimensionMismatchError(
            "points must share a dimension", a_dim=av.shape[0], b_dim=bv.shape[0]
        )
    return float(dists_to_many(av, bv.reshape(1, -1), m)[0])


def dists_to_many(q: np.ndarray, X: np.ndarray, m: Metric) -> np.ndarray:
    """Distances from one query to each row of X. Single shared kernel.

    Every per-query scan in the library funnels through this function so the
    same quantity is always computed by the same float expressions.
    """
    diff = np.abs(X - q)
    p = m.p_exponent
    if p == 2.0:
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if p == 1.0:
        return diff.sum(axis=1)
    if p == math.inf:
        return diff.max(axis=1) if diff.shape[1] else np.zeros(diff.shape[0])
    return (diff ** p).sum(axis=1) ** (1.0 / p)


def cross_dists(Q: np.ndarray, X: np.ndarray, m: Metric) -> np.ndarray:
    """Dense |Q| x |X| distance matrix (cdist wrapper)."""
    name, kw = m.cdist_args()
    return cdist(Q, X, metric=name, **kw)


def chunk_rows(total_rows: int, cols: int) -> int:
    """Row block size keeping a float64 matrix of the given width bounded."""
    rows = max(1, _CHUNK_ELEMS // max(1, cols))
    return min(total_rows, rows)


def _normalize_restrict(restrict, n: int) -> np.ndarray:
    idx = np.asarray(list(restrict), dtype=np.int64).reshape(-1)
    if idx.size == 0:
        raise EmptyCandidatesError("restriction is empty")
    if idx.min() < 0 or idx.max() >= n:
        raise InvalidParameterError(
            "restriction index out of range", bad=int(idx[(idx < 0) | (idx >= n)][0]), n=n
        )
    return np.unique(idx)


def nearest_neighbor_brute(q, ts: TrainingSet, restrict=None) -> NeighborResult:
    """Exhaustive nearest neighbor of q among ts (optionally restricted).

    Ties go to the lowest point index. The restriction is a collection of
    point indices into ts; an empty restriction is an error.
    """
    qv = _coerce_query(q, ts.d)
    if restrict is None:
        d = dists_to_many(qv, ts.coords, ts.metric)
        j = int(np.argmin(d))
        return NeighborResult(j, d[j])
    idx = _normalize_restrict(restrict, ts.n)
    d = dists_to_many(qv, ts.coords[idx], ts.metric)
    j = int(np.argmin(d))
    return NeighborResult(int(idx[j]), d[j])


def nearest_enemy_brute(p, ts: TrainingSet) -> NeighborResult:
    """Exhaustive nearest point of a different class.

    ``p`` is a LabeledPoint or a point index into ts.
    """
    if isinstance(p, LabeledPoint):
        coords, label = p.coords, p.label
    else:
        lp = ts.point(p)
        coords, label = lp.coords, lp.label
    enemies = np.flatnonzero(ts.labels != label)
    if enemies.size == 0:
        raise SingleClassError("no point of a different class exists", label=int(label))
    d = dists_to_many(np.asarray(coords, dtype=np.float64), ts.coords[enemies], ts.metric)
    j = int(np.argmin(d))
    return NeighborResult(int(enemies[j]), d[j])


def enemy_arrays(ts: TrainingSet) -> tuple[np.ndarray, np.ndarray]:
    """Exact nearest-enemy index and distance for every point.

    Chunked over rows so arbitrarily large sets stay within memory. This is
    the single source of truth for enemy distances: statistics, selection
    orderings, and the xi=0 approximate path all call it, which keeps their
    float values bit-identical.
    """
    if ts.class_count < 2:
        raise SingleClassError("nearest enemies need at least two classes")
    cached = ts._enemy_cache
    if cached is not None:
        return cached
    n = ts.n
    idx = np.empty(n, dtype=np.int64)
    dist = np.empty(n, dtype=np.float64)
    step = chunk_rows(n, n)
    for start in range(0, n, step):
        stop = min(n, start + step)
        block = cross_dists(ts.coords[start:stop], ts.coords, ts.metric)
        same = ts.labels[start:stop, None] == ts.labels[None, :]
        block[same] = np.inf
        j = np.argmin(block, axis=1)
        idx[start:stop] = j
        dist[start:stop] = block[np.arange(stop - start), j]
    ts._enemy_cache = (idx, dist)
    return idx, dist


def subset_margins(ts: TrainingSet, subset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Owner, nearest distance, and nearest-enemy distance of every point,
    measured against a subset of the set's own points.

    Returns (owner, dnn, dne) arrays of length n. The owner is the nearest
    subset member (lowest index wins ties), dnn its distance, and dne the
    distance to the nearest subset member of a different class (+inf when the
    whole subset shares the point's class). Chunked over rows.
    """
    sub = _normalize_restrict(subset, ts.n)
    sub_coords = ts.coords[sub]
    sub_labels = ts.labels[sub]
    n = ts.n
    owner = np.empty(n, dtype=np.int64)
    dnn = np.empty(n, dtype=np.float64)
    dne = np.empty(n, dtype=np.float64)
    step = chunk_rows(n, sub.size)
    for start in range(0, n, step):
        stop = min(n, start + step)
        block = cross_dists(ts.coords[start:stop], sub_coords, ts.metric)
        col = np.argmin(block, axis=1)
        rows = np.arange(stop - start)
        owner[start:stop] = sub[col]
        dnn[start:stop] = block[rows, col]
        enemy = sub_labels[None, :] != ts.labels[start:stop, None]
        dne[start:stop] = np.where(enemy, block, np.inf).min(axis=1)
    return owner, dnn, dne


def chromatic_density(q, ts: TrainingSet, restrict=None) -> float:
    """Relative margin of a query against a candidate subset.

    The reference class is the class of the query's nearest neighbor in the
    full set. Within the candidates (the whole set, or the restriction) the
    density is the distance to the nearest point of a different class over
    the distance to the nearest point of the reference class, minus one.
    Against the full set it is never negative; against a restriction it can
    be, and degenerates to -1.0 when the restriction has no point of the
    reference class at all.

    A query whose distance to the nearest reference-class candidate is zero
    is rejected: the ratio is undefined at members.
    """
    if ts.class_count < 2:
        raise SingleClassError("chromatic density needs at least two classes")
    qv = _coerce_query(q, ts.d)
    ref = nearest_neighbor_brute(qv, ts)
    ref_label = int(ts.labels[ref.index])
    if restrict is None:
        cand = np.arange(ts.n)
    else:
        cand = _normalize_restrict(restrict, ts.n)
        if np.unique(ts.labels[cand]).size < 2:
            raise SingleClassError(
                "candidate subset must contain at least two classes",
                classes=[int(x) for x in np.unique(ts.labels[cand])],
            )
    d = dists_to_many(qv, ts.coords[cand], ts.metric)
    friend_mask = ts.labels[cand] == ref_label
    enemy = d[~friend_mask]
    dne = float(enemy.min()) if enemy.size else math.inf
    if not friend_mask.any():
        return -1.0
    dnn = float(d[friend_mask].min())
    if dnn == 0.0:
        raise MemberPointQueryError(
            "density is undefined where the query coincides with a reference-class member",
            query=[float(x) for x in qv],
        )
    return dne / dnn - 1.0


def compute_stats(ts: TrainingSet, force_quadratic: bool = False) -> DatasetStats:
    """Boundary statistics: kappa (distinct nearest enemies), gamma (minimum
    enemy margin), diameter, spread.

    kappa and gamma always run. diameter/spread need the full pairwise sweep
    and come back as None above the gate unless forced.
    """
    ne_idx, ne_dist = enemy_arrays(ts)
    gamma = float(ne_dist.min())
    if gamma <= 0.0:
        i = int(np.argmin(ne_dist))
        raise DuplicateConflictError(
            "zero enemy margin: identical coordinates with different labels",
            rows=(i, int(ne_idx[i])),
        )
    kappa = int(np.unique(ne_idx).size)
    diameter = spread = None
    if ts.n <= QUADRATIC_GATE or force_quadratic:
        diameter, min_nonzero = _pairwise_extremes(ts)
        if diameter == 0.0:
            raise CoincidentPointsError("all points coincide")
        spread = diameter / min_nonzero if min_nonzero is not None else None
    return DatasetStats(
        n=ts.n, d=ts.d, class_count=ts.class_count,
        kappa=kappa, gamma=gamma, diameter=diameter, spread=spread,
    )


def _pairwise_extremes(ts: TrainingSet) -> tuple[float, Optional[float]]:
    """Max pairwise distance and min nonzero pairwise distance, chunked."""
    n = ts.n
    if n == 1:
        return 0.0, None
    diameter = 0.0
    min_nonzero = math.inf
    step = chunk_rows(n, n)
    for start in range(0, n, step):
        stop = min(n, start + step)
        block = cross_dists(ts.coords[start:stop], ts.coords, ts.metric)
        diameter = max(diameter, float(block.max()))
        nz = block[block > 0.0]
        if nz.size:
            min_nonzero = min(min_nonzero, float(nz.min()))
    return diameter, (min_nonzero if math.isfinite(min_nonzero) else None)


def normalize_diameter(ts: TrainingSet, force_quadratic: bool = False) -> TrainingSet:
    """Scale coordinates so the diameter becomes exactly 1.

    Idempotent up to float division; labels, metric, and class structure are
    untouched. Refuses (via the quadratic gate) on large sets unless forced,
    and rejects sets whose points all coincide.
    """
    if ts.n > QUADRATIC_GATE and not force_quadratic:
        raise QuadraticGateError(
            "diameter needs a pairwise sweep; pass force_quadratic=True",
            n=ts.n, gate=QUADRATIC_GATE,
        )
    diameter, _ = _pairwise_extremes(ts)
    if diameter == 0.0:
        raise CoincidentPointsError("all points coincide; no diameter to normalize")
    return ts.with_coords(ts.coords / diameter)


def fingerprint(ts: TrainingSet) -> str:
    """16-hex-digit content hash over dimension, labels, and coordinates."""
    h = hashlib.blake2b(digest_size=8)
    h.update(struct.pack("<q", ts.d))
    h.update(np.ascontiguousarray(ts.labels, dtype="<i8").tobytes())
    h.update(np.ascontiguousarray(ts.coords + 0.0, dtype="<f8").tobytes())
    return h.hexdigest()
