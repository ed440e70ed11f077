"""Down-sampling, stratified splitting, and feature standardization.

All sampling groups records by their attack category so the class mix of
the output matches the input, and everything is deterministic for a fixed
seed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import SchemaError
from .ingest import FlowRecord
from .schema import FeatureSchema


def _groups_by_attack(records: list[FlowRecord]) -> dict[str, list[int]]:
    groups: dict[str, list[int]] = {}
    for i, rec in enumerate(records):
        groups.setdefault(rec.attack, []).append(i)
    return groups


def stratified_downsample(records: list[FlowRecord], fraction: float, seed: int) -> list[FlowRecord]:
    """Sample ceil(fraction * size) records from every attack group.

    Sampling is without replacement and the output keeps the original
    record order.
    """
    if not records:
        raise ValueError("cannot downsample an empty record list")
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    rng = np.random.default_rng(seed)
    groups = _groups_by_attack(records)
    keep: list[int] = []
    for attack in sorted(groups):
        idx = groups[attack]
        k = math.ceil(fraction * len(idx))
        chosen = rng.choice(len(idx), size=k, replace=False)
        keep.extend(idx[i] for i in chosen)
    keep.sort()
    return [records[i] for i in keep]


def holdout_split(records: list[FlowRecord], train_ratio: float, seed: int) -> tuple[list[FlowRecord], list[FlowRecord]]:
    """Split records into disjoint train/test sets, stratified by attack.

    Every category keeps its proportion in both splits (within one
    record). Categories with fewer than two members go entirely to the
    training split with a warning.
    """
    if not 0.0 < train_ratio < 1.0:
        raise ValueError(f"train_ratio must be in (0, 1), got {train_ratio}")
    if not records:
        raise ValueError("cannot split an empty record list")
    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    groups = _groups_by_attack(records)
    for attack in sorted(groups):
        idx = np.asarray(groups[attack])
        if len(idx) < 2:
            warnings.warn(
                f"attack category {attack!r} has {len(idx)} record(s); keeping all in train",
                stacklevel=2,
            )
            train_idx.extend(idx.tolist())
            continue
        perm = rng.permutation(len(idx))
        n_train = int(round(train_ratio * len(idx)))
        n_train = min(max(n_train, 1), len(idx) - 1)
        train_idx.extend(idx[perm[:n_train]].tolist())
        test_idx.extend(idx[perm[n_train:]].tolist())
    train_idx.sort()
    test_idx.sort()
    return [records[i] for i in train_idx], [records[i] for i in test_idx]


@dataclass
class Standardizer:
    """Per-column mean/std fitted on the training split only.

    Categorical columns are integer-coded (codes fitted on train, unseen
    values map to a fresh code) or one-hot expanded, then standardized
    together with the numeric columns. Zero-variance columns keep std 1 so
    they standardize to all zeros.
    """

    schema: FeatureSchema
    encoding: str                       # "ordinal" | "onehot"
    categories: list[list[str]]         # fitted per categorical column
    mean: np.ndarray
    std: np.ndarray

    @property
    def feature_dim(self) -> int:
        return int(self.mean.shape[0])

    def feature_names(self) -> list[str]:
        names: list[str] = []
        for ci, col in enumerate(self.schema.categorical):
            if self.encoding == "ordinal":
                names.append(col)
            else:
                names.extend(f"{col}={v}" for v in self.categories[ci])
        names.extend(self.schema.numeric)
        return names

    def encode(self, records: list[FlowRecord]) -> np.ndarray:
        """Raw (un-standardized) encoded feature matrix."""
        n = len(records)
        cols: list[np.ndarray] = []
        for ci in range(len(self.schema.categorical)):
            codes = {v: j for j, v in enumerate(self.categories[ci])}
            raw = np.array(
                [codes.get(rec.categorical[ci], len(codes)) for rec in records],
                dtype=np.float64,
            )
            if self.encoding == "ordinal":
                cols.append(raw[:, None])
            else:
                onehot = np.zeros((n, len(codes)))
                known = raw < len(codes)
                onehot[np.arange(n)[known], raw[known].astype(int)] = 1.0
                cols.append(onehot)
        numeric = np.array([rec.numeric for rec in records], dtype=np.float64)
        if numeric.size == 0:
            numeric = numeric.reshape(n, 0)
        cols.append(numeric)
        return np.concatenate(cols, axis=1) if cols else np.zeros((n, 0))

    def transform(self, records: list[FlowRecord]) -> np.ndarray:
        return (self.encode(records) - self.mean) / self.std

    def inverse_transform(self, features: np.ndarray) -> np.ndarray:
        return features * self.std + self.mean

    def to_mapping(self) -> dict:
        return {
            "encoding": self.encoding,
            "categories": self.categories,
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "feature_names": self.feature_names(),
        }


def fit_standardizer(
    train_records: list[FlowRecord],
    schema: FeatureSchema,
    encoding: str = "ordinal",
) -> Standardizer:
    """Fit category codes and column statistics on the training records.

    Uses population standard deviation. Columns with zero variance get
    std 1 and a warning, making them identically zero after transform.
    """
    if encoding not in ("ordinal", "onehot"):
        raise SchemaError(f"unknown categorical encoding {encoding!r}")
    if not train_records:
        raise ValueError("cannot fit a standardizer on no records")
    categories = [
        sorted({rec.categorical[ci] for rec in train_records})
        for ci in range(len(schema.categorical))
    ]
    std = Standardizer(
        schema=schema,
        encoding=encoding,
        categories=categories,
        mean=np.zeros(0),
        std=np.ones(0),
    )
    raw = std.encode(train_records)
    mean = raw.mean(axis=0)
    sigma = raw.std(axis=0)
    flat = sigma <= 1e-12
    if np.any(flat):
        names = [n for n, f in zip(std.feature_names(), flat) if f]
        warnings.warn(f"zero-variance feature columns {names}; std forced to 1", stacklevel=2)
        sigma = np.where(flat, 1.0, sigma)
    std.mean = mean
    std.std = sigma
    return std
