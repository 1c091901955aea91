"""File formats: feature matrices, interaction lists, pair datasets, score
tables, and the INI run configuration.

All CSV files are UTF-8, comma-delimited, `.` decimal point, LF-terminated,
with a mandatory header. Every writer/reader pair round-trips exactly up to
the documented rounding (scores are serialized at 6 decimal places).
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import logging
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .coredata import FeatureMatrix, InteractionSet, PairDataset
from .errors import (
    ConfigError,
    DuplicateId,
    EmptyMatrix,
    FormatError,
    InvalidValue,
    UnknownEntity,
)

log = logging.getLogger(__name__)

SCORE_DECIMALS = 6


def _fmt(value: float) -> str:
    """Shortest decimal that round-trips the float exactly."""
    return repr(float(value))


def _parse_cell(text: str, row: int, col: int, path) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InvalidValue(f"{path}: non-numeric cell {text!r} at row {row}, col {col}")
    if not math.isfinite(value):
        raise InvalidValue(f"{path}: non-finite cell {text!r} at row {row}, col {col}")
    return value


def _open_rows(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open("r", encoding="utf-8", newline="") as handle:
        yield from csv.reader(handle)


# ---------------------------------------------------------------------------
# feature matrices


def load_feature_matrix(path) -> FeatureMatrix:
    """Parse a `id,f1,...,fd` CSV into a FeatureMatrix."""
    rows = _open_rows(path)
    try:
        header = next(rows)
    except StopIteration:
        raise FormatError(f"{path}: missing header")
    if not header or header[0] != "id" or len(header) < 2:
        raise FormatError(f"{path}: header must start with 'id' and name features")
    feature_names = header[1:]
    ids: list[str] = []
    seen: set[str] = set()
    data: list[list[float]] = []
    for r, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise FormatError(f"{path}: row {r} has {len(row)} cells, expected {len(header)}")
        eid = row[0]
        if not eid:
            raise FormatError(f"{path}: empty id at row {r}")
        if eid in seen:
            raise DuplicateId(f"{path}: duplicate id {eid!r} at row {r}")
        seen.add(eid)
        ids.append(eid)
        data.append([_parse_cell(cell, r, c + 1, path) for c, cell in enumerate(row[1:])])
    if not ids:
        raise EmptyMatrix(f"{path}: no data rows")
    return FeatureMatrix.build(ids, np.array(data, dtype=np.float64), feature_names)


def write_feature_matrix(path, matrix: FeatureMatrix) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["id", *matrix.feature_names])
        for eid, row in zip(matrix.ids, matrix.values):
            writer.writerow([eid, *(_fmt(v) for v in row)])


# ---------------------------------------------------------------------------
# interactions


def load_interactions(path, drugs: FeatureMatrix, targets: FeatureMatrix) -> InteractionSet:
    """Parse a `drug_id,target_id` CSV, resolving ids against the matrices.

    Duplicate pairs are dropped (first occurrence kept) and counted.
    """
    rows = _open_rows(path)
    try:
        header = next(rows)
    except StopIteration:
        raise FormatError(f"{path}: missing header")
    if header[:2] != ["drug_id", "target_id"]:
        raise FormatError(f"{path}: header must be drug_id,target_id")
    drug_index = drugs.index_of()
    target_index = targets.index_of()
    pairs: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    di: list[int] = []
    ti: list[int] = []
    dropped = 0
    for r, row in enumerate(rows, start=1):
        if len(row) < 2:
            raise FormatError(f"{path}: row {r} needs two columns")
        drug, target = row[0], row[1]
        if drug not in drug_index:
            raise UnknownEntity(f"{path}: unknown drug id {drug!r} at row {r}")
        if target not in target_index:
            raise UnknownEntity(f"{path}: unknown target id {target!r} at row {r}")
        key = (drug, target)
        if key in seen:
            dropped += 1
            continue
        seen.add(key)
        pairs.append(key)
        di.append(drug_index[drug])
        ti.append(target_index[target])
    if dropped:
        log.warning("%s: dropped %d duplicate interaction pairs", path, dropped)
    return InteractionSet(
        pairs=tuple(pairs),
        drug_indices=np.array(di, dtype=np.int64),
        target_indices=np.array(ti, dtype=np.int64),
        n_duplicates_dropped=dropped,
    )


def write_interactions(path, pairs) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["drug_id", "target_id"])
        for drug, target in pairs:
            writer.writerow([drug, target])


# ---------------------------------------------------------------------------
# pair datasets


def write_pair_dataset(path, dataset: PairDataset, with_features: bool = True) -> None:
    """Write `drug_id,target_id,label[,frua_score][,synthetic][,features]`.

    The score column appears only when any sample carries a score; the
    synthetic column only when any sample is synthetic.
    """
    has_scores = dataset.frua_scores is not None and np.isfinite(dataset.frua_scores).any()
    has_synth = bool(dataset.synthetic.any())
    header = ["drug_id", "target_id", "label"]
    if has_scores:
        header.append("frua_score")
    if has_synth:
        header.append("synthetic")
    if with_features:
        header.extend(f"f{i + 1}" for i in range(dataset.dim))
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for i in range(len(dataset)):
            label = dataset.labels[i]
            if label not in (0, 1):
                raise InvalidValue("only positive/negative labels are serializable")
            row = [dataset.drug_ids[i], dataset.target_ids[i], str(int(label))]
            if has_scores:
                s = dataset.frua_scores[i]
                row.append("" if not np.isfinite(s) else f"{s:.{SCORE_DECIMALS}f}")
            if has_synth:
                row.append(str(int(dataset.synthetic[i])))
            if with_features:
                row.extend(_fmt(v) for v in dataset.features[i])
            writer.writerow(row)


def load_pair_dataset(path) -> PairDataset:
    rows = _open_rows(path)
    try:
        header = next(rows)
    except StopIteration:
        raise FormatError(f"{path}: missing header")
    if header[:3] != ["drug_id", "target_id", "label"]:
        raise FormatError(f"{path}: header must start with drug_id,target_id,label")
    col = 3
    score_col = synth_col = None
    if col < len(header) and header[col] == "frua_score":
        score_col, col = col, col + 1
    if col < len(header) and header[col] == "synthetic":
        synth_col, col = col, col + 1
    n_features = len(header) - col
    drug_ids: list[str] = []
    target_ids: list[str] = []
    labels: list[int] = []
    scores: list[float] = []
    synth: list[bool] = []
    feats: list[list[float]] = []
    for r, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise FormatError(f"{path}: row {r} has {len(row)} cells, expected {len(header)}")
        drug_ids.append(row[0])
        target_ids.append(row[1])
        if row[2] not in ("0", "1"):
            raise InvalidValue(f"{path}: label must be 0 or 1 at row {r}")
        labels.append(int(row[2]))
        if score_col is not None:
            scores.append(float("nan") if row[score_col] == "" else _parse_cell(row[score_col], r, score_col, path))
        if synth_col is not None:
            if row[synth_col] not in ("0", "1"):
                raise InvalidValue(f"{path}: synthetic must be 0 or 1 at row {r}")
            synth.append(row[synth_col] == "1")
        feats.append([_parse_cell(c, r, col + j, path) for j, c in enumerate(row[col:])])
    features = np.array(feats, dtype=np.float64).reshape(len(drug_ids), n_features)
    return PairDataset(
        drug_ids,
        target_ids,
        features,
        np.array(labels, dtype=np.int8),
        np.array(scores) if score_col is not None else None,
        np.array(synth, dtype=bool) if synth_col is not None else None,
    )


# ---------------------------------------------------------------------------
# score tables


def write_score_table(path, scores) -> None:
    """Persist a FruaScoreTable as `drug_id,target_id,frua_score` rows with
    6 decimal digits."""
    degrees = np.asarray(scores.degrees, dtype=float)
    if degrees.size and (
        not np.isfinite(degrees).all() or degrees.min() < 0 or degrees.max() > 1
    ):
        raise InvalidValue("scores must be finite and within [0, 1]")
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["drug_id", "target_id", "frua_score"])
        for (drug, target), degree in zip(scores.keys, degrees):
            writer.writerow([drug, target, f"{degree:.{SCORE_DECIMALS}f}"])


def load_score_table(path):
    from .fuzzyrough import FruaScoreTable

    rows = _open_rows(path)
    try:
        header = next(rows)
    except StopIteration:
        raise FormatError(f"{path}: missing header")
    if header != ["drug_id", "target_id", "frua_score"]:
        raise FormatError(f"{path}: header must be drug_id,target_id,frua_score")
    keys: list[tuple[str, str]] = []
    degrees: list[float] = []
    for r, row in enumerate(rows, start=1):
        if len(row) != 3:
            raise FormatError(f"{path}: row {r} needs three columns")
        value = _parse_cell(row[2], r, 2, path)
        if not 0.0 <= value <= 1.0:
            raise InvalidValue(f"{path}: score {value} outside [0, 1] at row {r}")
        keys.append((row[0], row[1]))
        degrees.append(value)
    return FruaScoreTable(keys=keys, degrees=np.array(degrees), m_used=0)


# ---------------------------------------------------------------------------
# run configuration


@dataclass
class RunConfig:
    """Parsed and validated run configuration.

    Defaults follow the reference setup: 11 nearest neighbours, medoid
    counts searched over 2..10, 5-fold cross-validation, 70:30 holdout.
    """

    # [paths]
    drugs_path: str = ""
    targets_path: str = ""
    interactions_path: str = ""
    # [pipeline]
    seed: int = 42
    # [candidates]
    k_neighbors: int = 11
    kmedoids_k_min: int = 2
    kmedoids_k_max: int = 10
    distance_block_rows: int = 2048
    snn_feature_space: str = "raw"  # raw | reduced
    # [reduce]
    pca_components: int = 0  # 0 -> smallest q reaching variance_target, capped
    pca_batch_size: int = 512
    variance_target: float = 0.95
    max_components: int = 128
    # [score]
    similarity_kernel: str = "linear"  # linear | gaussian | triangular
    t_norm: str = "lukasiewicz"  # lukasiewicz | min
    m_groups: int = 0  # 0 -> smallest count keeping groups under max_group_rows
    n_groups: int = 0
    max_group_rows: int = 2000
    # [balance]
    t_p: float = 0.8
    t_q: float = 0.2
    adasyn_beta: float = 1.0
    adasyn_k: int = 5
    # [train]
    classifier: str = "rf"  # dt | rf | rusboost
    feature_selection: bool = False
    top_k_features: int = 100
    importance_pos_groups: int = 2
    importance_neg_groups: int = 2
    grid: str = ""  # e.g. "max_depth=9,20;min_samples_split=6,8"
    grid_metric: str = "auc"  # auc | f1 | gmean
    dt_max_depth: int = 9
    dt_min_samples_leaf: int = 1
    dt_min_samples_split: int = 6
    dt_max_features: str = "sqrt"
    rf_n_estimators: int = 200
    rf_max_depth: int = 20
    rf_min_samples_leaf: int = 3
    rf_min_samples_split: int = 8
    rf_max_features: str = "sqrt"
    rf_bootstrap: bool = True
    boost_n_estimators: int = 500
    boost_learning_rate: float = 1.0
    boost_base_max_depth: int = 3
    boost_base_min_samples_leaf: int = 1
    boost_base_min_samples_split: int = 2
    boost_base_max_features: str = "all"
    # [evaluate]
    cv_folds: int = 5
    holdout_ratio: float = 0.7
    # [sweep]
    thresholds: str = ""  # comma list; empty -> 50 evenly spaced values
    sweep_param: str = "tq"  # tq | tp
    sweep_classifier: str = ""  # empty -> same as [train] classifier

    def validate(self) -> None:
        if not 0.0 <= self.t_q <= self.t_p <= 1.0:
            raise ConfigError(f"need 0 <= t_q <= t_p <= 1, got t_q={self.t_q}, t_p={self.t_p}")
        if not 0.0 < self.holdout_ratio < 1.0:
            raise ConfigError("holdout_ratio must lie in (0, 1)")
        for name in (
            "k_neighbors",
            "kmedoids_k_min",
            "kmedoids_k_max",
            "distance_block_rows",
            "pca_batch_size",
            "max_components",
            "max_group_rows",
            "adasyn_k",
            "top_k_features",
            "importance_pos_groups",
            "importance_neg_groups",
            "cv_folds",
            "rf_n_estimators",
            "boost_n_estimators",
        ):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.kmedoids_k_min > self.kmedoids_k_max:
            raise ConfigError("kmedoids_k_min must not exceed kmedoids_k_max")
        if self.cv_folds < 2:
            raise ConfigError("cv_folds must be at least 2")
        for name, allowed in (
            ("similarity_kernel", {"linear", "gaussian", "triangular"}),
            ("t_norm", {"lukasiewicz", "min"}),
            ("classifier", {"dt", "rf", "rusboost"}),
            ("snn_feature_space", {"raw", "reduced"}),
            ("sweep_param", {"tq", "tp"}),
            ("grid_metric", {"auc", "f1", "gmean"}),
            ("dt_max_features", {"sqrt", "all"}),
            ("rf_max_features", {"sqrt", "all"}),
            ("boost_base_max_features", {"sqrt", "all"}),
        ):
            if getattr(self, name) not in allowed:
                raise ConfigError(f"{name} must be one of {sorted(allowed)}")
        if self.sweep_classifier and self.sweep_classifier not in {"dt", "rf", "rusboost"}:
            raise ConfigError("sweep_classifier must be one of ['dt', 'rf', 'rusboost']")
        if self.adasyn_beta < 0:
            raise ConfigError("adasyn_beta must be non-negative")

    def digest(self) -> str:
        lines = sorted(f"{f.name}={getattr(self, f.name)!r}" for f in fields(self))
        return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()

    def with_overrides(self, **overrides) -> "RunConfig":
        cfg = replace(self, **overrides)
        cfg.validate()
        return cfg


_CONFIG_SECTIONS: dict[str, dict[str, str]] = {
    "paths": {"drugs": "drugs_path", "targets": "targets_path", "interactions": "interactions_path"},
    "pipeline": {"seed": "seed"},
    "candidates": {
        "k_neighbors": "k_neighbors",
        "kmedoids_k_min": "kmedoids_k_min",
        "kmedoids_k_max": "kmedoids_k_max",
        "distance_block_rows": "distance_block_rows",
        "snn_feature_space": "snn_feature_space",
    },
    "reduce": {
        "pca_components": "pca_components",
        "pca_batch_size": "pca_batch_size",
        "variance_target": "variance_target",
        "max_components": "max_components",
    },
    "score": {
        "similarity_kernel": "similarity_kernel",
        "t_norm": "t_norm",
        "m_groups": "m_groups",
        "n_groups": "n_groups",
        "max_group_rows": "max_group_rows",
    },
    "balance": {
        "t_p": "t_p",
        "t_q": "t_q",
        "adasyn_beta": "adasyn_beta",
        "adasyn_k": "adasyn_k",
    },
    "train": {
        "classifier": "classifier",
        "feature_selection": "feature_selection",
        "top_k_features": "top_k_features",
        "importance_pos_groups": "importance_pos_groups",
        "importance_neg_groups": "importance_neg_groups",
        "grid": "grid",
        "grid_metric": "grid_metric",
        "dt_max_depth": "dt_max_depth",
        "dt_min_samples_leaf": "dt_min_samples_leaf",
        "dt_min_samples_split": "dt_min_samples_split",
        "dt_max_features": "dt_max_features",
        "rf_n_estimators": "rf_n_estimators",
        "rf_max_depth": "rf_max_depth",
        "rf_min_samples_leaf": "rf_min_samples_leaf",
        "rf_min_samples_split": "rf_min_samples_split",
        "rf_max_features": "rf_max_features",
        "rf_bootstrap": "rf_bootstrap",
        "boost_n_estimators": "boost_n_estimators",
        "boost_learning_rate": "boost_learning_rate",
        "boost_base_max_depth": "boost_base_max_depth",
        "boost_base_min_samples_leaf": "boost_base_min_samples_leaf",
        "boost_base_min_samples_split": "boost_base_min_samples_split",
        "boost_base_max_features": "boost_base_max_features",
    },
    "evaluate": {"cv_folds": "cv_folds", "holdout_ratio": "holdout_ratio"},
    "sweep": {
        "thresholds": "thresholds",
        "sweep_param": "sweep_param",
        "sweep_classifier": "sweep_classifier",
    },
}


def _coerce(raw: str, target_type: type, where: str):
    raw = raw.strip()
    try:
        if target_type is bool:
            lowered = raw.lower()
            if lowered in ("true", "1", "yes", "on"):
                return True
            if lowered in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        return target_type(raw)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {target_type.__name__}")


def load_config(path) -> RunConfig:
    """Parse an INI config. Unknown sections or keys are hard errors so a
    typo never silently falls back to a default."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"no such config file: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}")
    cfg = RunConfig()
    types = {f.name: f.type for f in fields(RunConfig)}
    py_types = {"int": int, "float": float, "str": str, "bool": bool}
    for section in parser.sections():
        if section not in _CONFIG_SECTIONS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        known = _CONFIG_SECTIONS[section]
        for key, raw in parser.items(section):
            if key not in known:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            attr = known[key]
            target = py_types[types[attr]] if isinstance(types[attr], str) else types[attr]
            setattr(cfg, attr, _coerce(raw, target, f"{path} [{section}] {key}"))
    for pathattr in ("drugs_path", "targets_path", "interactions_path"):
        value = getattr(cfg, pathattr)
        if value:
            setattr(cfg, pathattr, str((path.parent / value).resolve()))
    cfg.validate()
    return cfg


def parse_grid(spec: str) -> dict[str, list[str]]:
    """Parse "a=1,2;b=x,y" into an ordered mapping of candidate values."""
    grid: dict[str, list[str]] = {}
    if not spec.strip():
        return grid
    for clause in spec.split(";"):
        clause = clause.strip()
        if not clause:
            continue
        if "=" not in clause:
            raise ConfigError(f"grid clause {clause!r} must look like name=v1,v2")
        name, values = clause.split("=", 1)
        name = name.strip()
        if name in grid:
            raise ConfigError(f"grid parameter {name!r} listed twice")
        grid[name] = [v.strip() for v in values.split(",") if v.strip()]
        if not grid[name]:
            raise ConfigError(f"grid parameter {name!r} has no values")
    return grid
