"""Mechanical verification of condensation guarantees.

Checkers take a training set, a candidate subset (raw indices or a
CondensedSubset), and the relevant parameters, and return a structured
VerificationReport listing every witness of failure they found. Sampled
checks draw queries from a seeded QuerySampler so reports are reproducible.

Comparison convention: every required strict inequality ``x < b`` is tested
as ``x < b - 1e-9``; a value equal to its bound within the slack counts as a
violation, conservatively. Points of the subset itself witness their own
condition (distance zero) and are exempt.

The module also carries tiny exhaustive oracles (brute_min_selective,
brute_min_consistent) that enumerate subsets in size-then-lexicographic
order and return the first one the corresponding checker passes; they exist
so the greedy algorithms can be measured against true minima on small
inputs.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import core
from .condense import Algorithm, CondensedSubset, make_subset
from .core import VERIFY_SLACK, TrainingSet
from .errors import (
    InvalidParameterError,
    MemberPointQueryError,
    PreconditionError,
    SingleClassError,
    SizeCapError,
)

SLACK = VERIFY_SLACK

# Reports keep at most this many witnesses; the full count is always in info.
_WITNESS_CAP = 1000

_BRUTE_CAP = 20


@dataclass(frozen=True)
class Violation:
    """One re-checkable witness of a failed requirement."""

    query: list
    observed: float
    required: float
    detail: str

    def to_dict(self) -> dict:
        return {
            "query": self.query,
            "observed": self.observed,
            "required": self.required,
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    criterion: str
    passed: bool
    samples_tested: int
    rng_seed: Optional[int]
    violations: list[Violation] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "criterion": self.criterion,
            "passed": self.passed,
            "samples_tested": self.samples_tested,
            "rng_seed": self.rng_seed,
            "violations": [v.to_dict() for v in self.violations],
        }
        if self.info:
            out["info"] = self.info
        return out

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def _finish(report: VerificationReport, witnesses: list[Violation], total: int) -> VerificationReport:
    report.violations = witnesses[:_WITNESS_CAP]
    report.info["violation_count"] = total
    report.passed = total == 0
    return report


@dataclass
class QuerySampler:
    """Seeded query generator.

    Strategies: ``uniform`` draws from the coordinate bounding box,
    ``gaussian`` perturbs randomly chosen members (standard deviation is
    ``scale`` times the per-axis extent), ``grid`` lays a regular 2-D lattice
    over the bounding box (the count is rounded to the nearest full square).
    Queries that land exactly on a member are nudged by 1e-9 per axis
    (doubling until clear) so density stays defined everywhere.
    """

    strategy: str = "uniform"
    count: int = 10_000
    seed: int = 42
    scale: float = 0.05

    STRATEGIES = ("uniform", "gaussian", "grid")

    def __post_init__(self):
        if self.strategy not in self.STRATEGIES:
            raise InvalidParameterError(
                "unknown sampling strategy", strategy=self.strategy,
                known=list(self.STRATEGIES),
            )
        if int(self.count) < 1:
            raise InvalidParameterError("sample count must be >= 1", count=self.count)
        if not (float(self.scale) > 0):
            raise InvalidParameterError("scale must be > 0", scale=self.scale)

    def sample(self, ts: TrainingSet) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        lo = ts.coords.min(axis=0)
        hi = ts.coords.max(axis=0)
        if self.strategy == "uniform":
            Q = rng.uniform(lo, hi, size=(self.count, ts.d))
        elif self.strategy == "gaussian":
            picks = rng.integers(0, ts.n, size=self.count)
            sigma = self.scale * (hi - lo)
            Q = ts.coords[picks] + rng.standard_normal((self.count, ts.d)) * sigma
        else:  # grid
            if ts.d != 2:
                raise InvalidParameterError(
                    "grid sampling is defined for 2-D sets only", d=ts.d
                )
            side = max(2, int(round(math.sqrt(self.count))))
            xs = np.linspace(lo[0], hi[0], side)
            ys = np.linspace(lo[1], hi[1], side)
            gx, gy = np.meshgrid(xs, ys, indexing="ij")
            Q = np.column_stack([gx.ravel(), gy.ravel()])
        return _nudge_off_members(Q, ts)


def _nudge_off_members(Q: np.ndarray, ts: TrainingSet) -> np.ndarray:
    """Perturb queries that coincide exactly with member coordinates."""
    member_bytes = {(row + 0.0).tobytes() for row in ts.coords}
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    bump = 1e-9
    for _ in range(64):
        flat = Q + 0.0
        mask = np.fromiter(
            (flat[i].tobytes() in member_bytes for i in range(Q.shape[0])),
            dtype=bool, count=Q.shape[0],
        )
        if not mask.any():
            return Q
        Q[mask] += bump
        bump *= 2.0
    raise InvalidParameterError("could not perturb queries off member points")


def _subset_indices(R, n: int) -> np.ndarray:
    if isinstance(R, CondensedSubset):
        R = R.indices
    return core._normalize_restrict(R, n)


def _point_witness(ts: TrainingSet, i: int, dnn: float, bound: float, what: str) -> Violation:
    return Violation(
        query=[float(x) for x in ts.coords[i]],
        observed=float(dnn),
        required=float(bound),
        detail=(
            f"point {i} (class {int(ts.labels[i])}): nearest subset distance "
            f"{dnn!r} must fall below {what} {bound!r} minus slack"
        ),
    )


def check_alpha_consistent(ts: TrainingSet, R, alpha: float) -> VerificationReport:
    """Every training point must be closer to a same-usable subset point than
    its subset enemy margin shrunk by (1+alpha).

    Concretely: dnn(p, R) < dne(p, R) / (1+alpha) for every p, where both
    distances are measured against R. Subset members hold trivially.
    """
    alpha = _check_alpha(alpha)
    sub = _subset_indices(R, ts.n)
    _require_multiclass_subset(ts, sub)
    _, dnn, dne = core.subset_margins(ts, sub)
    bound = dne / (1.0 + alpha)
    outside = np.ones(ts.n, dtype=bool)
    outside[sub] = False
    bad = np.flatnonzero(outside & ~(dnn < bound - SLACK))
    witnesses = [
        _point_witness(ts, int(i), dnn[i], bound[i], "subset enemy margin over (1+alpha)")
        for i in bad[:_WITNESS_CAP]
    ]
    report = VerificationReport(
        criterion="alpha-consistent", passed=False, samples_tested=ts.n, rng_seed=None,
        info={"subset_size": int(sub.size), "alpha": alpha},
    )
    return _finish(report, witnesses, int(bad.size))


def check_alpha_selective(ts: TrainingSet, R, alpha: float) -> VerificationReport:
    """Like consistency, but the enemy margin is measured against the full
    set: dnn(p, R) < dne(p, P) / (1+alpha). Implies consistency."""
    alpha = _check_alpha(alpha)
    sub = _subset_indices(R, ts.n)
    _require_multiclass_subset(ts, sub)
    _, dnn, _ = core.subset_margins(ts, sub)
    _, dne_full = core.enemy_arrays(ts)
    bound = dne_full / (1.0 + alpha)
    outside = np.ones(ts.n, dtype=bool)
    outside[sub] = False
    bad = np.flatnonzero(outside & ~(dnn < bound - SLACK))
    witnesses = [
        _point_witness(ts, int(i), dnn[i], bound[i], "full-set enemy margin over (1+alpha)")
        for i in bad[:_WITNESS_CAP]
    ]
    report = VerificationReport(
        criterion="alpha-selective", passed=False, samples_tested=ts.n, rng_seed=None,
        info={"subset_size": int(sub.size), "alpha": alpha},
    )
    return _finish(report, witnesses, int(bad.size))


def _check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not (alpha >= 0.0) or not math.isfinite(alpha):
        raise InvalidParameterError("alpha must be a finite value >= 0", alpha=alpha)
    return alpha


def _require_multiclass_subset(ts: TrainingSet, sub: np.ndarray) -> None:
    if np.unique(ts.labels[sub]).size < 2:
        raise SingleClassError(
            "a single-class subset can never satisfy a margin guarantee",
            classes=[int(c) for c in np.unique(ts.labels[sub])],
        )


class _QueryEval:
    """Per-query margins of a batch of queries against P and optionally R.

    For each query: the full-set nearest neighbor fixes the reference class;
    distances to the nearest point of each class, within the full set and
    within the subset, give the densities and witness distances every sampled
    check needs. Chunked over query rows.
    """

    def __init__(self, ts: TrainingSet, Q: np.ndarray, sub: Optional[np.ndarray]):
        n_q = Q.shape[0]
        c = ts.class_count
        self.ts = ts
        self.Q = Q
        self.dnn_P = np.empty(n_q)
        self.ref_label = np.empty(n_q, dtype=np.int64)
        self.class_min_P = np.empty((n_q, c))
        if sub is not None:
            self.nn_R = np.empty(n_q, dtype=np.int64)
            self.dnn_R = np.empty(n_q)
            self.class_min_R = np.empty((n_q, c))
        class_rows = [ts.class_indices(k) for k in range(c)]
        sub_class_rows = None
        if sub is not None:
            sub_labels = ts.labels[sub]
            sub_class_rows = [np.flatnonzero(sub_labels == k) for k in range(c)]
        step = core.chunk_rows(n_q, ts.n)
        for start in range(0, n_q, step):
            stop = min(n_q, start + step)
            block = core.cross_dists(Q[start:stop], ts.coords, ts.metric)
            j = np.argmin(block, axis=1)
            rows = np.arange(stop - start)
            self.dnn_P[start:stop] = block[rows, j]
            self.ref_label[start:stop] = ts.labels[j]
            for k in range(c):
                self.class_min_P[start:stop, k] = block[:, class_rows[k]].min(axis=1)
            if sub is not None:
                sub_block = block[:, sub]
                jr = np.argmin(sub_block, axis=1)
                self.nn_R[start:stop] = sub[jr]
                self.dnn_R[start:stop] = sub_block[rows, jr]
                for k in range(c):
                    if sub_class_rows[k].size:
                        self.class_min_R[start:stop, k] = (
                            sub_block[:, sub_class_rows[k]].min(axis=1)
                        )
                    else:
                        self.class_min_R[start:stop, k] = np.inf
        if np.any(self.dnn_P == 0.0):
            i = int(np.flatnonzero(self.dnn_P == 0.0)[0])
            raise MemberPointQueryError(
                "query coincides with a member point", query=[float(x) for x in Q[i]]
            )

    def density_P(self) -> np.ndarray:
        dne = self._exclude_ref(self.class_min_P)
        return dne / self.dnn_P - 1.0

    def density_R(self) -> np.ndarray:
        rows = np.arange(self.Q.shape[0])
        dnn_ref = self.class_min_R[rows, self.ref_label]
        dne_ref = self._exclude_ref(self.class_min_R)
        out = np.where(
            np.isfinite(dnn_ref) & (dnn_ref > 0.0), dne_ref / dnn_ref - 1.0, -1.0
        )
        return out

    def _exclude_ref(self, class_min: np.ndarray) -> np.ndarray:
        masked = class_min.copy()
        rows = np.arange(class_min.shape[0])
        masked[rows, self.ref_label] = np.inf
        return masked.min(axis=1)


def _sampled_eval(ts: TrainingSet, R, sampler: Optional[QuerySampler]):
    if sampler is None:
        sampler = QuerySampler()
    sub = _subset_indices(R, ts.n) if R is not None else None
    Q = sampler.sample(ts)
    return _QueryEval(ts, Q, sub), sampler, sub


def check_density_bound(ts: TrainingSet, R, alpha: float,
                        sampler: Optional[QuerySampler] = None) -> VerificationReport:
    """Sampled check of the density floor an alpha-consistent subset owes
    every query: against R the density may degrade, but never below
    (alpha * density_P - 2) / (density_P + alpha + 3).

    Precondition: R actually verifies as alpha-consistent; otherwise a
    structured PreconditionError is raised rather than a failed report.
    """
    alpha = _check_alpha(alpha)
    pre = check_alpha_consistent(ts, R, alpha)
    if not pre.passed:
        raise PreconditionError(
            "R is not alpha-consistent; the density floor does not apply",
            alpha=alpha, violation_count=pre.info.get("violation_count"),
        )
    ev, sampler, _ = _sampled_eval(ts, R, sampler)
    d_P = ev.density_P()
    d_R = ev.density_R()
    floor = (alpha * d_P - 2.0) / (d_P + alpha + 3.0)
    bad = np.flatnonzero(~(d_R > floor + SLACK))
    witnesses = [
        Violation(
            query=[float(x) for x in ev.Q[i]],
            observed=float(d_R[i]),
            required=float(floor[i]),
            detail=(
                f"density against subset {d_R[i]!r} must exceed the floor "
                f"{floor[i]!r} (full-set density {d_P[i]!r})"
            ),
        )
        for i in bad[:_WITNESS_CAP]
    ]
    report = VerificationReport(
        criterion="density-bound", passed=False, samples_tested=int(ev.Q.shape[0]),
        rng_seed=sampler.seed, info={"alpha": alpha},
    )
    return _finish(report, witnesses, int(bad.size))


def check_coreset(ts: TrainingSet, R, epsilon: float,
                  sampler: Optional[QuerySampler] = None) -> VerificationReport:
    """Sampled check that R classifies like some near-optimal neighbor.

    For each query the class assigned by R must also be the class of at
    least one full-set point within (1+epsilon) of the true nearest
    distance.
    """
    epsilon = _check_positive(epsilon, "epsilon")
    ev, sampler, _ = _sampled_eval(ts, R, sampler)
    assigned = ts.labels[ev.nn_R]
    rows = np.arange(ev.Q.shape[0])
    closest_same = ev.class_min_P[rows, assigned]
    bound = (1.0 + epsilon) * ev.dnn_P
    bad = np.flatnonzero(~(closest_same < bound - SLACK))
    witnesses = [
        Violation(
            query=[float(x) for x in ev.Q[i]],
            observed=float(closest_same[i]),
            required=float(bound[i]),
            detail=(
                f"class {int(assigned[i])} assigned by the subset has no full-set "
                f"point within (1+epsilon) of the nearest distance {ev.dnn_P[i]!r}"
            ),
        )
        for i in bad[:_WITNESS_CAP]
    ]
    report = VerificationReport(
        criterion="coreset", passed=False, samples_tested=int(ev.Q.shape[0]),
        rng_seed=sampler.seed, info={"epsilon": epsilon},
    )
    return _finish(report, witnesses, int(bad.size))


def check_approx_coreset(ts: TrainingSet, R, xi: float, epsilon: float,
                         sampler: Optional[QuerySampler] = None) -> VerificationReport:
    """Sampled check covering approximate answers over R.

    Any subset point within (1+xi) of the nearest subset distance is a
    legitimate approximate answer; each such point's class must belong to
    some full-set point within (1+epsilon) of the true nearest distance.
    Candidate enumeration is exhaustive (done per class: a class is a
    candidate exactly when its nearest subset representative qualifies).
    Requires xi < epsilon.
    """
    xi = float(xi)
    if not (xi >= 0.0) or not math.isfinite(xi):
        raise InvalidParameterError("xi must be a finite value >= 0", xi=xi)
    epsilon = _check_positive(epsilon, "epsilon")
    if xi >= epsilon:
        raise InvalidParameterError(
            "xi must be strictly below epsilon for the guarantee to exist",
            xi=xi, epsilon=epsilon,
        )
    ev, sampler, _ = _sampled_eval(ts, R, sampler)
    m = ev.Q.shape[0]
    cand_bound = (1.0 + xi) * ev.dnn_R
    witness_bound = (1.0 + epsilon) * ev.dnn_P
    # candidate classes: nearest subset member of the class within the xi ball
    candidate = ev.class_min_R <= (cand_bound + SLACK)[:, None]
    satisfied = ev.class_min_P < (witness_bound - SLACK)[:, None]
    bad_matrix = candidate & ~satisfied
    bad_rows = np.flatnonzero(bad_matrix.any(axis=1))
    witnesses = []
    for i in bad_rows[:_WITNESS_CAP]:
        k = int(np.flatnonzero(bad_matrix[i])[0])
        witnesses.append(Violation(
            query=[float(x) for x in ev.Q[i]],
            observed=float(ev.class_min_P[i, k]),
            required=float(witness_bound[i]),
            detail=(
                f"class {k} answers within (1+xi) of the subset nearest distance "
                f"{ev.dnn_R[i]!r} but has no full-set point within (1+epsilon) of "
                f"{ev.dnn_P[i]!r}"
            ),
        ))
    report = VerificationReport(
        criterion="approx-coreset", passed=False, samples_tested=m,
        rng_seed=sampler.seed, info={"xi": xi, "epsilon": epsilon},
    )
    return _finish(report, witnesses, int(bad_rows.size))


def alpha_for_approx_coreset(xi: float, epsilon: float) -> float:
    """Smallest selectivity parameter guaranteeing the approximate coreset
    property at the given (xi, epsilon): (epsilon*xi + 3*xi + 2)/(epsilon - xi)."""
    xi = float(xi)
    epsilon = float(epsilon)
    if not (xi >= 0.0) or not math.isfinite(xi):
        raise InvalidParameterError("xi must be a finite value >= 0", xi=xi)
    if not (epsilon > xi):
        raise InvalidParameterError(
            "epsilon must exceed xi", xi=xi, epsilon=epsilon
        )
    return (epsilon * xi + 3.0 * xi + 2.0) / (epsilon - xi)


def check_weak_coreset(ts: TrainingSet, R, alpha: float,
                       sampler: Optional[QuerySampler] = None) -> VerificationReport:
    """Sampled agreement check on the well-separated query region.

    Queries whose full-set density reaches beta = 2/alpha must be classified
    by R exactly as by the full set. Requires alpha > 0 (beta is undefined at
    zero) and an alpha-consistent R.
    """
    alpha = float(alpha)
    if not (alpha > 0.0) or not math.isfinite(alpha):
        raise InvalidParameterError(
            "alpha must be > 0: the separated region is undefined at alpha = 0",
            alpha=alpha,
        )
    pre = check_alpha_consistent(ts, R, alpha)
    if not pre.passed:
        raise PreconditionError(
            "R is not alpha-consistent; the agreement guarantee does not apply",
            alpha=alpha, violation_count=pre.info.get("violation_count"),
        )
    beta = 2.0 / alpha
    ev, sampler, _ = _sampled_eval(ts, R, sampler)
    d_P = ev.density_P()
    in_region = d_P >= beta
    assigned = ts.labels[ev.nn_R]
    mismatch = in_region & (assigned != ev.ref_label)
    bad = np.flatnonzero(mismatch)
    witnesses = [
        Violation(
            query=[float(x) for x in ev.Q[i]],
            observed=float(assigned[i]),
            required=float(ev.ref_label[i]),
            detail=(
                f"query with full-set density {d_P[i]!r} >= beta {beta!r} got class "
                f"{int(assigned[i])} from the subset, expected {int(ev.ref_label[i])}"
            ),
        )
        for i in bad[:_WITNESS_CAP]
    ]
    m = int(ev.Q.shape[0])
    report = VerificationReport(
        criterion="weak-coreset", passed=False, samples_tested=m,
        rng_seed=sampler.seed,
        info={
            "alpha": alpha,
            "beta": beta,
            "in_region": int(in_region.sum()),
            "in_region_fraction": float(in_region.sum()) / m,
        },
    )
    return _finish(report, witnesses, int(bad.size))


def _check_positive(value, name: str) -> float:
    value = float(value)
    if not (value > 0.0) or not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be a finite value > 0", **{name: value})
    return value


# ---------------------------------------------------------------------------
# exhaustive minima


def _brute_min(ts: TrainingSet, alpha: float, consistent: bool) -> CondensedSubset:
    alpha = _check_alpha(alpha)
    if ts.class_count < 2:
        raise SingleClassError("minimum subsets need at least two classes")
    if ts.n > _BRUTE_CAP:
        raise SizeCapError(
            "exhaustive enumeration is exponential; refusing beyond the cap",
            n=ts.n, cap=_BRUTE_CAP,
        )
    n = ts.n
    D = core.cross_dists(ts.coords, ts.coords, ts.metric)
    _, dne_full = core.enemy_arrays(ts)
    labels = ts.labels
    all_classes = frozenset(int(c) for c in range(ts.class_count))
    label_of = [int(x) for x in labels]
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            if {label_of[i] for i in combo} != all_classes:
                continue
            sub = np.asarray(combo, dtype=np.int64)
            dnn = D[:, sub].min(axis=1)
            if consistent:
                enemy = labels[sub][None, :] != labels[:, None]
                dne = np.where(enemy, D[:, sub], np.inf).min(axis=1)
            else:
                dne = dne_full
            bound = dne / (1.0 + alpha)
            ok = dnn < bound - SLACK
            ok[sub] = True
            if bool(np.all(ok)):
                tag = Algorithm.MIN_CONSISTENT if consistent else Algorithm.MIN_SELECTIVE
                return make_subset(ts, combo, tag, alpha, 0.0)
    raise InvalidParameterError("no subset satisfies the requirement")  # unreachable: P itself passes


def brute_min_selective(ts: TrainingSet, alpha: float) -> CondensedSubset:
    """Smallest subset passing check_alpha_selective, by exhaustive search.

    Subsets are enumerated by size, lexicographically within a size, and the
    first passing one is returned. Exponential; capped at 20 points.
    """
    return _brute_min(ts, alpha, consistent=False)


def brute_min_consistent(ts: TrainingSet, alpha: float) -> CondensedSubset:
    """Smallest subset passing check_alpha_consistent, by exhaustive search."""
    return _brute_min(ts, alpha, consistent=True)
