"""Dataset ingestion, synthetic generation, and subset persistence.

CSV convention: one row per point, numeric feature columns, the label in the
last column unless overridden. A first row that fails to parse numerically is
treated as a header. Labels may be integers or arbitrary strings; they are
mapped to dense ids in order of first appearance. No feature scaling happens
here; callers normalize explicitly when they want it.

Subset files are plain text: a fingerprint-bearing header line followed by
one ascending zero-based point index per line, so they are diffable and safe
to apply only to the exact dataset they came from.
"""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import core
from .condense import Algorithm, CondensedSubset, make_subset
from .core import Metric, TrainingSet
from .errors import (
    CsvFormatError,
    DuplicateConflictError,
    FingerprintMismatchError,
    InvalidParameterError,
    SubsetFormatError,
)

GENERATOR_VORONOI = "uniform-voronoi-seeded"
GENERATOR_REGION = "uniform-random-labels-by-region"
GENERATORS = (GENERATOR_VORONOI, GENERATOR_REGION)

_SUBSET_HEADER = re.compile(
    r"^#nnc-subset v1 algo=(?P<algo>[a-z-]+) alpha=(?P<alpha>\S+) "
    r"xi=(?P<xi>\S+) fp=(?P<fp>[0-9a-f]{16})$"
)


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of a deterministic synthetic dataset.

    ``generator`` picks the labeling scheme: Voronoi cells of seeded region
    centers, or equal-width bands of the first coordinate. Points are uniform
    in the unit cube either way, so the same (n, d, seed) gives the same
    coordinates under both.
    """

    n: int
    d: int
    class_count: int
    seed: int
    generator: str = GENERATOR_VORONOI

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise InvalidParameterError("n and d must be >= 1", n=self.n, d=self.d)
        if self.class_count < 2:
            raise InvalidParameterError(
                "synthetic sets need at least two classes", class_count=self.class_count
            )
        if self.n < self.class_count:
            raise InvalidParameterError(
                "n must be at least the class count", n=self.n, class_count=self.class_count
            )
        if self.generator not in GENERATORS:
            raise InvalidParameterError(
                "unknown generator", generator=self.generator, known=list(GENERATORS)
            )


def generate_synthetic(spec: SyntheticSpec, metric: Metric = Metric()) -> TrainingSet:
    """Deterministic synthetic training set from a SyntheticSpec.

    Coordinates are uniform in [0,1]^d. Voronoi labeling draws class_count
    region seeds first and labels each point by its nearest seed (lowest seed
    index on ties); a repair step makes sure no class ends up empty by letting
    an empty class claim the unclaimed point nearest to its seed, so n ==
    class_count degenerates to exactly one point per class. Band labeling
    maps the first coordinate to equal-width label bands.
    """
    rng = np.random.default_rng(spec.seed)
    c = spec.class_count
    for _ in range(16):
        if spec.generator == GENERATOR_VORONOI:
            seeds = rng.uniform(size=(c, spec.d))
            X = rng.uniform(size=(spec.n, spec.d))
            labels = np.argmin(core.cross_dists(X, seeds, metric), axis=1).astype(np.int64)
            labels = _repair_empty_classes(X, seeds, labels, metric)
        else:
            X = rng.uniform(size=(spec.n, spec.d))
            labels = np.minimum((X[:, 0] * c).astype(np.int64), c - 1)
            labels = _repair_band_classes(X, labels, c)
        try:
            return TrainingSet(X, labels, metric, class_count=c)
        except DuplicateConflictError:
            # vanishing probability with float64 uniforms; redraw
            continue
    raise InvalidParameterError("could not draw a conflict-free synthetic set", spec=str(spec))


def _claim_for_missing(labels: np.ndarray, c: int, dist_to_anchor) -> np.ndarray:
    """Give every empty class one point without emptying another class.

    A missing class claims the point nearest its anchor among points whose
    current class still has more than one member. Such a point always exists
    while n >= c.
    """
    counts = np.bincount(labels, minlength=c)
    missing = [k for k in range(c) if counts[k] == 0]
    if not missing:
        return labels
    labels = labels.copy()
    for k in missing:
        d = dist_to_anchor(k)
        d = np.where(counts[labels] > 1, d, np.inf)
        pick = int(np.argmin(d))
        counts[labels[pick]] -= 1
        labels[pick] = k
        counts[k] += 1
    return labels


def _repair_empty_classes(X: np.ndarray, seeds: np.ndarray, labels: np.ndarray,
                          metric: Metric) -> np.ndarray:
    return _claim_for_missing(
        labels, seeds.shape[0], lambda k: core.dists_to_many(seeds[k], X, metric)
    )


def _repair_band_classes(X: np.ndarray, labels: np.ndarray, c: int) -> np.ndarray:
    centers = (np.arange(c) + 0.5) / c
    return _claim_for_missing(labels, c, lambda k: np.abs(X[:, 0] - centers[k]))


@dataclass(frozen=True)
class DatasetDescriptor:
    """Everything needed to materialize exactly one TrainingSet.

    ``source`` is a CSV path or a SyntheticSpec. ``label_column`` overrides
    the default last-column label position for CSV sources. ``normalize``
    rescales to unit diameter after loading.
    """

    name: str
    source: Union[str, Path, SyntheticSpec]
    label_column: Optional[int] = None
    normalize: bool = False
    metric: Metric = field(default_factory=Metric)

    def resolve(self, force_quadratic: bool = False) -> TrainingSet:
        if isinstance(self.source, SyntheticSpec):
            ts = generate_synthetic(self.source, self.metric)
        else:
            ts = load_csv(self.source, label_column=self.label_column, m=self.metric)
        if self.normalize:
            ts = core.normalize_diameter(ts, force_quadratic=force_quadratic)
        return ts


def load_csv(path, label_column: Optional[int] = None, m: Metric = Metric(),
             normalize: bool = False) -> TrainingSet:
    """Load a labeled dataset from CSV.

    The label lives in ``label_column`` (negative indices allowed, default
    last). A non-numeric first row is skipped as a header. Feature cells must
    parse as floats; offending rows are reported by 1-based file line number.
    String labels map to dense integer ids by first appearance.
    """
    path = Path(path)
    rows: list[tuple[int, list[str]]] = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise CsvFormatError("cannot read dataset file", path=str(path),
                             reason=exc.strerror or str(exc)) from exc
    with fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not cell.strip() for cell in rec):
                continue
            rows.append((lineno, [cell.strip() for cell in rec]))
    if not rows:
        raise CsvFormatError("dataset file is empty", path=str(path))
    width = len(rows[0][1])
    if width < 2:
        raise CsvFormatError(
            "rows need at least one feature column plus a label",
            path=str(path), columns=width,
        )
    col = width - 1 if label_column is None else label_column
    if col < 0:
        col += width
    if not (0 <= col < width):
        raise InvalidParameterError(
            "label column out of range", label_column=label_column, columns=width
        )

    def parse_row(rec: list[str]):
        feats = [float(rec[j]) for j in range(width) if j != col]
        return feats, rec[col]

    start = 0
    try:
        parse_row(rows[0][1])
    except ValueError:
        start = 1  # header row
        if len(rows) == 1:
            raise CsvFormatError("dataset file holds only a header", path=str(path))
    feats: list[list[float]] = []
    raw_labels: list[str] = []
    bad_rows: list[int] = []
    for lineno, rec in rows[start:]:
        if len(rec) != width:
            bad_rows.append(lineno)
            continue
        try:
            f, lab = parse_row(rec)
        except ValueError:
            bad_rows.append(lineno)
            continue
        feats.append(f)
        raw_labels.append(lab)
    if bad_rows:
        raise CsvFormatError(
            "rows with the wrong shape or non-numeric features",
            path=str(path), rows=bad_rows[:20], total_bad=len(bad_rows),
        )
    ids: dict[str, int] = {}
    labels = np.asarray([ids.setdefault(lab, len(ids)) for lab in raw_labels], dtype=np.int64)
    try:
        ts = TrainingSet(np.asarray(feats, dtype=np.float64), labels, m)
    except DuplicateConflictError as exc:
        offset = start  # rows list position -> file line
        r = exc.details.get("rows", ())
        file_rows = [rows[offset + int(i)][0] for i in r]
        raise DuplicateConflictError(
            "identical coordinates carry different labels",
            file_rows=file_rows, path=str(path),
        ) from exc
    if normalize:
        ts = core.normalize_diameter(ts)
    return ts


def save_training_csv(ts: TrainingSet, path) -> None:
    """Write a TrainingSet as CSV with a feature header and integer labels.

    Floats are written with repr so a reload reproduces the coordinates bit
    for bit.
    """
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"f{j}" for j in range(ts.d)] + ["label"])
        for i in range(ts.n):
            w.writerow([repr(float(x)) for x in ts.coords[i]] + [int(ts.labels[i])])


def fingerprint(ts: TrainingSet) -> str:
    """Content hash of a TrainingSet (16 hex digits)."""
    return core.fingerprint(ts)


def save_subset(subset: CondensedSubset, path) -> None:
    """Persist a CondensedSubset as indices under a self-describing header."""
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(
            f"#nnc-subset v1 algo={subset.algorithm.value} "
            f"alpha={subset.alpha!r} xi={subset.xi!r} fp={subset.source_fingerprint}\n"
        )
        for i in subset.indices:
            fh.write(f"{i}\n")


def load_subset(path, ts: TrainingSet) -> CondensedSubset:
    """Read a subset file back, refusing if it does not belong to ts."""
    path = Path(path)
    try:
        with open(path) as fh:
            lines = [ln.rstrip("\n") for ln in fh]
    except OSError as exc:
        raise SubsetFormatError("cannot read subset file", path=str(path),
                                reason=exc.strerror or str(exc)) from exc
    if not lines:
        raise SubsetFormatError("subset file is empty", path=str(path))
    m = _SUBSET_HEADER.match(lines[0])
    if not m:
        raise SubsetFormatError(
            "malformed subset header", path=str(path), header=lines[0][:80]
        )
    try:
        algorithm = Algorithm(m.group("algo"))
    except ValueError:
        raise SubsetFormatError(
            "unknown algorithm tag", path=str(path), algo=m.group("algo")
        )
    alpha = float(m.group("alpha"))
    xi = float(m.group("xi"))
    fp = m.group("fp")
    actual = core.fingerprint(ts)
    if fp != actual:
        raise FingerprintMismatchError(
            "subset file belongs to a different dataset",
            expected=fp, actual=actual, path=str(path),
        )
    indices: list[int] = []
    for pos, ln in enumerate(lines[1:], start=2):
        if not ln.strip():
            continue
        try:
            indices.append(int(ln))
        except ValueError:
            raise SubsetFormatError(
                "non-integer index line", path=str(path), line=pos, content=ln[:40]
            )
    if indices != sorted(set(indices)):
        raise SubsetFormatError(
            "indices must be unique and ascending", path=str(path)
        )
    if not indices:
        raise SubsetFormatError("subset file lists no indices", path=str(path))
    subset = make_subset(ts, indices, algorithm, alpha, xi)
    return subset
