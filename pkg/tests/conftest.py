"""Shared fixtures: the worked 4-point line set, the frozen random desk
suite, and prepared UCI datasets.

UCI preparation: features are min-max scaled per column to [0,1] before any
boundary statistics are taken (the published complexity figures assume it;
raw features give very different enemy structure). iris and wine come from
scikit-learn. glass has no offline source in this environment; tests that
need it look for tests/data/glass.csv or $NNC_DATA_DIR/glass.csv (the
standard 214-row file: 9 feature columns, label last, no id column).
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

from nnc import TrainingSet, generate_synthetic, load_csv
from nnc.data import GENERATOR_REGION, GENERATOR_VORONOI, SyntheticSpec, save_training_csv

D4_COORDS = [0.0, 1.0, 3.0, 4.0]
D4_LABELS = [0, 0, 1, 1]

# the frozen random desk suite: (n, d, classes, seed, generator)
DESK_RANDOM = [
    (32, 2, 2, 1001, GENERATOR_VORONOI),
    (48, 3, 2, 1002, GENERATOR_REGION),
    (64, 2, 3, 1003, GENERATOR_VORONOI),
    (96, 1, 2, 1004, GENERATOR_REGION),
    (128, 4, 3, 1005, GENERATOR_VORONOI),
    (160, 2, 4, 1006, GENERATOR_VORONOI),
    (192, 5, 2, 1007, GENERATOR_REGION),
    (224, 3, 3, 1008, GENERATOR_VORONOI),
    (256, 2, 2, 1009, GENERATOR_REGION),
    (288, 6, 3, 1010, GENERATOR_VORONOI),
    (320, 2, 5, 1011, GENERATOR_VORONOI),
    (352, 3, 2, 1012, GENERATOR_REGION),
    (384, 4, 4, 1013, GENERATOR_VORONOI),
    (416, 2, 3, 1014, GENERATOR_REGION),
    (448, 5, 3, 1015, GENERATOR_VORONOI),
    (480, 3, 2, 1016, GENERATOR_VORONOI),
    (512, 2, 3, 1017, GENERATOR_VORONOI),
    (100, 1, 3, 1018, GENERATOR_REGION),
    (200, 2, 2, 1019, GENERATOR_VORONOI),
    (300, 3, 4, 1020, GENERATOR_VORONOI),
]

GLASS_HINT = (
    "glass dataset unavailable: place the standard UCI glass CSV (214 rows, "
    "9 feature columns, label last, id column stripped) at tests/data/glass.csv "
    "or $NNC_DATA_DIR/glass.csv; see README"
)


def random_desk_set(spec_tuple) -> TrainingSet:
    n, d, c, seed, gen = spec_tuple
    return generate_synthetic(SyntheticSpec(n=n, d=d, class_count=c, seed=seed, generator=gen))


def minmax_scale(X: np.ndarray) -> np.ndarray:
    lo, hi = X.min(axis=0), X.max(axis=0)
    rng = np.where(hi > lo, hi - lo, 1.0)
    return (X - lo) / rng


def glass_csv_path() -> Path | None:
    env = os.environ.get("NNC_DATA_DIR")
    candidates = []
    if env:
        candidates.append(Path(env) / "glass.csv")
    candidates.append(Path(__file__).parent / "data" / "glass.csv")
    for p in candidates:
        if p.is_file():
            return p
    return None


@pytest.fixture(scope="session")
def d4() -> TrainingSet:
    return TrainingSet(D4_COORDS, D4_LABELS)


@pytest.fixture(scope="session")
def d4_2d() -> TrainingSet:
    coords = np.column_stack([D4_COORDS, np.zeros(4)])
    return TrainingSet(coords, D4_LABELS)


@pytest.fixture(scope="session")
def uci_dir(tmp_path_factory) -> Path:
    """Directory with prepared (min-max scaled) UCI CSVs: iris, wine, and
    glass when a source file is available."""
    from sklearn.datasets import load_iris, load_wine

    out = tmp_path_factory.mktemp("uci")
    for name, loader in (("iris", load_iris), ("wine", load_wine)):
        bundle = loader()
        ts = TrainingSet(minmax_scale(bundle.data), bundle.target.astype(np.int64))
        save_training_csv(ts, out / f"{name}.csv")
    raw = glass_csv_path()
    if raw is not None:
        loaded = load_csv(raw)
        ts = TrainingSet(minmax_scale(loaded.coords), loaded.labels.copy())
        save_training_csv(ts, out / "glass.csv")
    return out


@pytest.fixture(scope="session")
def iris(uci_dir) -> TrainingSet:
    return load_csv(uci_dir / "iris.csv")


@pytest.fixture(scope="session")
def wine(uci_dir) -> TrainingSet:
    return load_csv(uci_dir / "wine.csv")


@pytest.fixture(scope="session")
def desk_random_sets() -> list[tuple[str, TrainingSet]]:
    return [
        (f"rand-{seed}", random_desk_set(spec))
        for spec in DESK_RANDOM
        for seed in [spec[3]]
    ]
