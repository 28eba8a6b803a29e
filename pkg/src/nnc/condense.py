"""Condensation algorithms: parameterized prototype selection.

Each algorithm takes a TrainingSet and a margin parameter alpha >= 0 and
returns a CondensedSubset whose points preserve nearest-neighbor behavior up
to the guarantee the algorithm targets (selectivity for the greedy scans and
the hitting-set reduction, consistency for the iterative Voronoi-repair
family and the net construction).

Boundary convention, applied uniformly: a point is dropped (or judged
non-deficient) only when it clears the exact strict-inequality-with-slack
predicate the verification module checks, evaluated with the same distance
kernel. Threshold ties and near-ties within the slack are kept. Without the
shared predicate, a tie computed by two different kernels (for example a
point whose nearest kept neighbor is its nearest enemy) can flip either way
in the last ulp and produce a subset the verifier rejects.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import core
from .core import VERIFY_SLACK, Metric, TrainingSet, dists_to_many
from .errors import InvalidParameterError, SingleClassError, SizeCapError
from .index import DynamicIndex, nearest_enemy_all

logger = logging.getLogger(__name__)

# alpha_hss builds an n x n ball-membership matrix; refuse above this unless
# forced (the matrix is bytes, the transient distance blocks are float64).
HSS_CAP = 20_000


class Algorithm(str, Enum):
    """Provenance tag carried by every CondensedSubset."""

    RSS = "rss"
    RSS_FAST = "rss-fast"
    SFCNN = "sfcnn"
    FCNN = "fcnn"
    NET = "net"
    HSS = "hss"
    MIN_SELECTIVE = "min-selective"
    MIN_CONSISTENT = "min-consistent"


@dataclass(frozen=True)
class CondensedSubset:
    """An ordered set of selected point indices plus how it was produced.

    ``indices`` are ascending, unique, and cover every class of the source
    set. ``source_fingerprint`` ties the subset to the exact dataset bytes it
    was computed from.
    """

    indices: tuple[int, ...]
    algorithm: Algorithm
    alpha: float
    xi: float
    source_fingerprint: str

    @property
    def size(self) -> int:
        return len(self.indices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.int64)


def make_subset(ts: TrainingSet, indices, algorithm, alpha: float, xi: float = 0.0) -> CondensedSubset:
    """Validate indices against the set and wrap them in a CondensedSubset."""
    arr = np.asarray(sorted(int(i) for i in indices), dtype=np.int64)
    if arr.size == 0:
        raise InvalidParameterError("a condensed subset cannot be empty")
    if np.unique(arr).size != arr.size:
        raise InvalidParameterError("subset indices must be unique")
    if arr.min() < 0 or arr.max() >= ts.n:
        raise InvalidParameterError("subset index out of range", n=ts.n)
    covered = np.unique(ts.labels[arr])
    if covered.size != ts.class_count:
        missing = sorted(set(range(ts.class_count)) - set(int(c) for c in covered))
        raise InvalidParameterError(
            "subset must contain at least one point of every class", missing=missing
        )
    return CondensedSubset(
        indices=tuple(int(i) for i in arr),
        algorithm=Algorithm(algorithm),
        alpha=float(alpha),
        xi=float(xi),
        source_fingerprint=core.fingerprint(ts),
    )


def _check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not (alpha >= 0.0) or not np.isfinite(alpha):
        raise InvalidParameterError("alpha must be a finite value >= 0", alpha=alpha)
    return alpha


def _require_enemies(ts: TrainingSet) -> None:
    if ts.class_count < 2:
        raise SingleClassError("condensation needs at least two classes")


def _enemy_order(dne: np.ndarray) -> np.ndarray:
    """Ascending nearest-enemy distance, ties by ascending point index."""
    return np.lexsort((np.arange(dne.shape[0]), dne))


def _selective_scan(coords: np.ndarray, metric: Metric, order: np.ndarray,
                    dne: np.ndarray, div: float) -> list[int]:
    """Shared exact selection kernel.

    Walk the given order; skip a point only when some already-kept point is
    strictly inside its enemy margin shrunk by ``div``, with the same
    clearance and the same distance kernel the verification module applies.
    That makes every skip a certificate the verifier will accept, and keeps
    boundary ties (e.g. the nearest kept point being the nearest enemy
    itself) on the safe side: they are kept. The first point is always kept;
    both greedy entry points funnel through this one loop so equal inputs
    give bit-equal outputs.
    """
    kept = np.empty_like(coords)
    m = 0
    chosen: list[int] = []
    for i in order:
        if m == 0:
            take = True
        else:
            dnn = core.cross_dists(coords[i:i + 1], kept[:m], metric).min()
            take = not (dnn < dne[i] / div - VERIFY_SLACK)
        if take:
            kept[m] = coords[i]
            m += 1
            chosen.append(int(i))
    return chosen


def alpha_rss(ts: TrainingSet, alpha: float) -> CondensedSubset:
    """Greedy selective subset: scan points by increasing nearest-enemy
    distance and keep those not already covered within their scaled margin.

    The output is alpha-selective: every rejected point has a kept point of
    some class closer than its enemy margin shrunk by (1+alpha), and kept
    points witness themselves. Exact distances throughout, O(n^2) worst case.
    """
    alpha = _check_alpha(alpha)
    _require_enemies(ts)
    _, dne = core.enemy_arrays(ts)
    order = _enemy_order(dne)
    chosen = _selective_scan(ts.coords, ts.metric, order, dne, 1.0 + alpha)
    return make_subset(ts, chosen, Algorithm.RSS, alpha, 0.0)


def alpha_rss_fast(ts: TrainingSet, alpha: float, xi: float = 0.0) -> CondensedSubset:
    """Subquadratic variant of alpha_rss built on (1+xi)-approximate queries.

    Stage 1 takes approximate nearest-enemy distances, stage 2 replays the
    greedy scan against a dynamic index over the kept points, skipping a
    point only when its approximate nearest kept neighbor sits inside the
    stage-1 margin divided by (1+xi)(1+alpha), with padding. Both query
    contracts only inflate distances, so every skip certifies strict
    alpha-selectivity of the final subset under the true distances.

    At xi = 0 both stages collapse onto the exact kernels alpha_rss uses, so
    the result is identical to alpha_rss bit for bit, not just within
    tolerance.
    """
    alpha = _check_alpha(alpha)
    xi = float(xi)
    if not (xi >= 0.0) or not np.isfinite(xi):
        raise InvalidParameterError("xi must be a finite value >= 0", xi=xi)
    _require_enemies(ts)
    approx = nearest_enemy_all(ts, xi=xi)
    dne = np.asarray([r.distance for r in approx], dtype=np.float64)
    order = _enemy_order(dne)
    div = (1.0 + xi) * (1.0 + alpha)
    if xi == 0.0:
        chosen = _selective_scan(ts.coords, ts.metric, order, dne, div)
        return make_subset(ts, chosen, Algorithm.RSS_FAST, alpha, xi)
    dyn = DynamicIndex(ts.coords, xi=xi, metric=ts.metric)
    chosen = []
    # the approximate path pads by twice the verification slack: one slack
    # for the checker plus headroom for tree-vs-exact kernel disagreement
    pad = 2.0 * VERIFY_SLACK
    for i in order:
        if dyn.active_count == 0:
            take = True
        else:
            near = dyn.query(ts.coords[i])
            take = not (near.distance < dne[i] / div - pad)
        if take:
            dyn.insert(int(i))
            chosen.append(int(i))
    return make_subset(ts, chosen, Algorithm.RSS_FAST, alpha, xi)


def voren_alpha(p_index: int, R, ts: TrainingSet, alpha: float) -> tuple[int, ...]:
    """Deficient points gathered by subset member p.

    A point q outside R is deficient when it fails the verifier's
    alpha-consistency predicate against R (its margin within R is not
    comfortably same-class). Each deficient point is charged to its nearest
    R member (its owner); this returns the ones owned by p, ascending.
    """
    alpha = _check_alpha(alpha)
    _require_enemies(ts)
    R_arr = np.asarray(sorted(int(i) for i in R), dtype=np.int64)
    if R_arr.size == 0:
        raise InvalidParameterError("R must be non-empty")
    p_index = int(p_index)
    if p_index not in set(int(i) for i in R_arr):
        raise InvalidParameterError("p must belong to R", p=p_index)
    owner, dnn, dne = core.subset_margins(ts, R_arr)
    in_R = np.zeros(ts.n, dtype=bool)
    in_R[R_arr] = True
    deficient = ~in_R & ~(dnn < dne / (1.0 + alpha) - VERIFY_SLACK)
    mine = np.flatnonzero(deficient & (owner == p_index))
    return tuple(int(q) for q in mine)


def _class_representatives(ts: TrainingSet) -> list[int]:
    """Per class, the member nearest to the class coordinate mean."""
    reps = []
    for c in range(ts.class_count):
        rows = ts.class_indices(c)
        center = ts.coords[rows].mean(axis=0)
        d = dists_to_many(center, ts.coords[rows], ts.metric)
        reps.append(int(rows[int(np.argmin(d))]))
    return reps


def _voronoi_repair(ts: TrainingSet, alpha: float, batch: bool) -> list[int]:
    """Iterative deficiency repair shared by alpha_sfcnn and alpha_fcnn.

    State arrays track, for every point, the distance to its nearest subset
    member, that member's index (the owner), and the distance to its nearest
    enemy inside the subset. Each insertion updates all three in O(n).
    """
    n = ts.n
    coords, labels = ts.coords, ts.labels
    nn_dist = np.full(n, np.inf)
    owner = np.full(n, n, dtype=np.int64)  # sentinel above any real index
    ne_dist = np.full(n, np.inf)
    in_R = np.zeros(n, dtype=bool)
    R: list[int] = []

    def add(i: int) -> None:
        in_R[i] = True
        R.append(i)
        d = core.cross_dists(coords[i:i + 1], coords, ts.metric)[0]
        better = (d < nn_dist) | ((d == nn_dist) & (i < owner))
        nn_dist[better] = d[better]
        owner[better] = i
        enemy_rows = labels != labels[i]
        closer = enemy_rows & (d < ne_dist)
        ne_dist[closer] = d[closer]

    reps = _class_representatives(ts)
    if batch:
        for i in sorted(reps):
            add(i)
    else:
        add(min(reps))

    while True:
        # deficient = fails the verifier's consistency predicate (same
        # kernel, same slack), so termination implies the check passes
        deficient = ~in_R & ~(nn_dist < ne_dist / (1.0 + alpha) - VERIFY_SLACK)
        if not deficient.any():
            break
        candidates: list[int] = []
        for p in sorted(R):
            qs = np.flatnonzero(deficient & (owner == p))
            if qs.size == 0:
                continue
            # nn_dist of an owned point is exactly its distance to p
            pick = np.lexsort((qs, nn_dist[qs]))[0]
            candidates.append(int(qs[pick]))
        if batch:
            for q in candidates:
                add(q)
        else:
            add(candidates[0])
    return R


def alpha_sfcnn(ts: TrainingSet, alpha: float) -> CondensedSubset:
    """Single-promotion Voronoi repair.

    Starts from the per-class centroid representatives, promotes exactly one
    gathered deficient point per iteration (the one charged to the
    lowest-index subset member; the first iteration promotes the lowest-index
    representative), and stops when no point outside the subset is deficient,
    which is exactly alpha-consistency of the result.
    """
    alpha = _check_alpha(alpha)
    _require_enemies(ts)
    R = _voronoi_repair(ts, alpha, batch=False)
    return make_subset(ts, R, Algorithm.SFCNN, alpha, 0.0)


def alpha_fcnn(ts: TrainingSet, alpha: float) -> CondensedSubset:
    """Batch Voronoi repair: every gathered candidate joins per iteration.

    Fewer, heavier iterations than alpha_sfcnn; same termination condition,
    typically a slightly larger subset.
    """
    alpha = _check_alpha(alpha)
    _require_enemies(ts)
    R = _voronoi_repair(ts, alpha, batch=True)
    return make_subset(ts, R, Algorithm.FCNN, alpha, 0.0)


def alpha_net(ts: TrainingSet, alpha: float, prune: bool = False) -> CondensedSubset:
    """Scaled covering net.

    With r = gamma / (1+alpha) (gamma the minimum enemy margin), scan points
    in index order and keep those at distance >= r from every point kept so
    far. Kept points cover the set at radius r, which forces
    alpha-consistency outright. With ``prune`` set, a backward pass then
    drops kept points (in decreasing enemy-margin order) whenever the rest
    still verifies as alpha-consistent.
    """
    alpha = _check_alpha(alpha)
    _require_enemies(ts)
    _, dne = core.enemy_arrays(ts)
    gamma = float(dne.min())
    r = gamma / (1.0 + alpha)
    kept = np.empty_like(ts.coords)
    m = 0
    chosen: list[int] = []
    for i in range(ts.n):
        if m == 0:
            take = True
        else:
            dnn = core.cross_dists(ts.coords[i:i + 1], kept[:m], ts.metric).min()
            # skipped points end up strictly inside the covering radius with
            # the verification slack to spare (their enemy margin within the
            # subset can only be >= gamma)
            take = not (dnn < r - VERIFY_SLACK)
        if take:
            kept[m] = ts.coords[i]
            m += 1
            chosen.append(i)
    if prune:
        chosen = _prune_consistent(ts, chosen, alpha, dne)
    return make_subset(ts, chosen, Algorithm.NET, alpha, 0.0)


def _prune_consistent(ts: TrainingSet, chosen: list[int], alpha: float,
                      dne_full: np.ndarray) -> list[int]:
    """Greedy backward elimination keeping alpha-consistency intact.

    Candidates leave in decreasing nearest-enemy order (easy points first);
    each removal is kept only if the remaining subset still satisfies the
    conservative consistency test the verification module applies.
    """
    keep = set(chosen)
    order = sorted(chosen, key=lambda i: (-dne_full[i], i))
    for i in order:
        if len(keep) <= ts.class_count:
            break
        trial = keep - {i}
        if _consistent_fast(ts, np.asarray(sorted(trial), dtype=np.int64), alpha):
            keep = trial
    return sorted(keep)


def _consistent_fast(ts: TrainingSet, subset: np.ndarray, alpha: float) -> bool:
    """Vectorized mirror of the public consistency check (same slack)."""
    if np.unique(ts.labels[subset]).size != ts.class_count:
        return False
    _, dnn, dne = core.subset_margins(ts, subset)
    outside = np.ones(ts.n, dtype=bool)
    outside[subset] = False
    bound = dne / (1.0 + alpha)
    ok = dnn < bound - VERIFY_SLACK
    return bool(np.all(ok[outside]))


def alpha_hss(ts: TrainingSet, alpha: float, force_quadratic: bool = False) -> CondensedSubset:
    """Greedy hitting set over the scaled margin balls.

    Every point p demands a subset member strictly inside its enemy margin
    shrunk by (1+alpha), with the verification slack subtracted so each hit
    is one the checker accepts; picking the point that hits the most unmet
    demands (ties to the lowest index) until all are met yields an
    alpha-selective subset with the classic logarithmic approximation
    factor. A point always hits its own demand (membership exempts it from
    the check), so the greedy loop terminates even at degenerate scales.
    Quadratic in memory and time, hence capped.
    """
    alpha = _check_alpha(alpha)
    _require_enemies(ts)
    if ts.n > HSS_CAP and not force_quadratic:
        raise SizeCapError(
            "hitting-set condensation is quadratic; pass force_quadratic=True",
            n=ts.n, cap=HSS_CAP,
        )
    _, dne = core.enemy_arrays(ts)
    bounds = dne / (1.0 + alpha) - VERIFY_SLACK
    n = ts.n
    # hits[j, p] == True when point j satisfies p's demand.
    hits = np.empty((n, n), dtype=bool)
    step = core.chunk_rows(n, n)
    for start in range(0, n, step):
        stop = min(n, start + step)
        block = core.cross_dists(ts.coords[start:stop], ts.coords, ts.metric)
        hits[start:stop] = block < bounds[None, :]
    np.fill_diagonal(hits, True)
    unhit = np.ones(n, dtype=bool)
    chosen: list[int] = []
    while unhit.any():
        counts = hits[:, unhit].sum(axis=1)
        j = int(np.argmax(counts))
        chosen.append(j)
        unhit &= ~hits[j]
    return make_subset(ts, chosen, Algorithm.HSS, alpha, 0.0)
