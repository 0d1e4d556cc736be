"""Evaluation harness: coefficient of variation tables and KNN cross-validation."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.model_selection import KFold, StratifiedKFold
from sklearn.neighbors import KNeighborsClassifier
from sklearn.preprocessing import StandardScaler

from .core import AffineMap, InvariantExpr, ObjectMN
from .evaluation import evaluate_batch
from .transform import GENERAL, ROTATION, SCALING, TRANSLATION, AffineConstraints, apply_dual, sample_affine

log = logging.getLogger(__name__)

INF_CV = math.inf


def cv(values: Sequence[float]) -> float:
    """Population standard deviation over ``|mean|``.

    A sequence with zero spread has CV 0 (this includes all-zero sequences);
    otherwise a mean below 1e-300 in magnitude gives ``inf``.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size < 2:
        raise ValueError("cv needs at least two values")
    if np.all(arr == arr[0]):
        return 0.0
    mean = math.fsum(arr) / arr.size
    if abs(mean) < 1e-300:
        return INF_CV
    sigma = math.sqrt(math.fsum((arr - mean) ** 2) / arr.size)
    return sigma / abs(mean)


# family name -> (spatial family or None, channel family or None)
REPORT_FAMILIES: dict[str, tuple[str | None, str | None]] = {
    "translation": (TRANSLATION, None),
    "rotation": (ROTATION, None),
    "scaling": (SCALING, None),
    "affine": (GENERAL, None),
    "channel": (None, GENERAL),
    "dual": (GENERAL, GENERAL),
}
IDENTITY_FAMILY = "identity"


def sample_dual(obj: ObjectMN, family: str, rng: np.random.Generator,
                constraints: AffineConstraints | None = None) -> tuple[AffineMap, AffineMap]:
    if family == IDENTITY_FAMILY:
        return AffineMap.identity(obj.space_dim), AffineMap.identity(obj.channel_dim)
    s_fam, c_fam = REPORT_FAMILIES[family]
    spatial = AffineMap.identity(obj.space_dim) if s_fam is None else sample_affine(obj.space_dim, rng, s_fam, constraints)
    channel = AffineMap.identity(obj.channel_dim) if c_fam is None else sample_affine(obj.channel_dim, rng, c_fam, constraints)
    return spatial, channel


@dataclass
class CVTable:
    labels: list[str]
    families: list[str]
    values: np.ndarray  # (invariants, families + 1); last column is "all"
    raw: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def columns(self) -> list[str]:
        return self.families + ["all"]

    def rows(self) -> list[dict]:
        return [{"invariant": lab, **{c: v for c, v in zip(self.columns, row)}}
                for lab, row in zip(self.labels, self.values)]


def _cv_column(values: np.ndarray) -> np.ndarray:
    out = np.full(values.shape[1], np.nan)
    for j in range(values.shape[1]):
        col = values[:, j]
        col = col[~np.isnan(col)]
        if col.size >= 2:
            out[j] = cv(col)
    return out


def invariance_report(obj: ObjectMN, exprs: Sequence[InvariantExpr], families: Sequence[str] | None = None,
                      trials: int = 10, seed: int = 0,
                      constraints: AffineConstraints | None = None) -> CVTable:
    """CV of every invariant over ``trials`` transformed copies per family (plus the original).

    The ``all`` column pools the original and every variant of every family.
    Missing cells (null space) are skipped. Deterministic for a given seed.
    """
    families = list(families or REPORT_FAMILIES)
    exprs = [e for e in exprs if e.numerator]
    base = evaluate_batch(exprs, [obj]).values[0]
    seqs = np.random.SeedSequence(seed).spawn(len(families))
    cols, raw = [], {}
    pooled = [base[None, :]]
    for fam, ss in zip(families, seqs):
        rng = np.random.default_rng(ss)
        variants = [apply_dual(obj, *sample_dual(obj, fam, rng, constraints)) for _ in range(trials)]
        vals = np.vstack([base[None, :], evaluate_batch(exprs, variants).values])
        raw[fam] = vals
        pooled.append(vals[1:])
        cols.append(_cv_column(vals))
    cols.append(_cv_column(np.vstack(pooled)))
    labels = [e.label or str(e.kernel) for e in exprs]
    return CVTable(labels, families, np.column_stack(cols), raw)


@dataclass
class KnnReport:
    fold_accuracies: list[float]
    mean_accuracy: float
    stratified: bool
    dropped_columns: list[int]


def knn_crossval(features: np.ndarray, labels: Sequence, k_neighbors: int = 1, folds: int = 10,
                 seed: int = 0, standardize: bool = True) -> KnnReport:
    """``folds``-fold cross-validated accuracy of a Euclidean KNN classifier.

    Columns with missing values are dropped (and reported). Standardization is
    fitted on each training fold only. Stratified folds unless some class has
    fewer members than ``folds``.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("features must be (rows, columns) with one label per row")
    if X.shape[0] < folds:
        raise ValueError(f"{X.shape[0]} rows cannot be split into {folds} folds")
    bad = [j for j in range(X.shape[1]) if not np.all(np.isfinite(X[:, j]))]
    if bad:
        log.warning("dropping %d feature columns with missing values: %s", len(bad), bad)
        X = np.delete(X, bad, axis=1)
    if X.shape[1] == 0:
        raise ValueError("no usable feature columns")
    _, counts = np.unique(y, return_counts=True)
    stratified = counts.min() >= folds
    if stratified:
        splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)
    else:
        warnings.warn(f"smallest class has {counts.min()} members < {folds} folds; using unstratified folds",
                      stacklevel=2)
        splitter = KFold(n_splits=folds, shuffle=True, random_state=seed)
    accs = []
    for train, test in splitter.split(X, y):
        Xtr, Xte = X[train], X[test]
        if standardize:
            scaler = StandardScaler().fit(Xtr)
            Xtr, Xte = scaler.transform(Xtr), scaler.transform(Xte)
        clf = KNeighborsClassifier(n_neighbors=k_neighbors).fit(Xtr, y[train])
        accs.append(float(np.mean(clf.predict(Xte) == y[test])))
    return KnnReport(accs, float(np.mean(accs)), stratified, bad)
