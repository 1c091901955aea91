"""Stage orchestration: normalize -> candidates -> reduce -> score ->
balance -> train -> evaluate, plus the threshold sweep.

Each stage writes its artifacts under runs/<name>/<stage>/ and records a
manifest (input digests, config digest, seed, wall time) under .meta/. A
stage is skipped when nothing it depends on changed, unless forced. All
randomness derives from the configured seed through named substreams, so a
stage rerun draws the same stream as a full pipeline run.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import plots
from .coredata import FeatureMatrix, PairDataset, min_max_normalize, substream_seed
from .dimreduce import (
    IncrementalPca,
    rf_feature_importance,
    save_pca_model,
    select_top_k_features,
    transform_rows,
    truncate_model,
)
from .errors import ConfigError, DependencyError, InvalidInput
from .evaluate import (
    SweepOptions,
    evaluate_scores,
    holdout_split,
    k_fold_cv,
    threshold_sweep,
)
from .fuzzyrough import Connectives, averaged_frua
from .io import (
    RunConfig,
    load_feature_matrix,
    load_interactions,
    load_pair_dataset,
    load_score_table,
    parse_grid,
    write_feature_matrix,
    write_pair_dataset,
    write_score_table,
)
from .learners import (
    BoostParams,
    ForestParams,
    TreeParams,
    fit_forest,
    fit_rusboost,
    fit_tree,
    grid_search,
    save_model,
)
from .pairgen import generate_candidates
from .resample import ThresholdPolicy, balance

log = logging.getLogger(__name__)

STAGES = ("normalize", "candidates", "reduce", "score", "balance", "train", "evaluate")


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class StageManifest:
    stage: str
    config_digest: str
    seed: int
    inputs: dict[str, str]
    outputs: list[str]
    wall_time_s: float


def _parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    lowered = str(value).lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise InvalidInput(f"cannot parse {value!r} as a boolean")


def tree_params_for(cfg: RunConfig, kind: str, overrides: dict | None = None) -> TreeParams:
    prefix = {"dt": "dt", "rf": "rf", "rusboost": "boost_base"}[kind]
    base = {
        "max_depth": getattr(cfg, f"{prefix}_max_depth"),
        "min_samples_leaf": getattr(cfg, f"{prefix}_min_samples_leaf"),
        "min_samples_split": getattr(cfg, f"{prefix}_min_samples_split"),
        "max_features": getattr(cfg, f"{prefix}_max_features"),
    }
    leftover = dict(overrides or {})
    for name in list(leftover):
        if name in base:
            base[name] = leftover.pop(name)
    if leftover:
        raise InvalidInput(f"unknown {kind} parameters: {sorted(leftover)}")
    return TreeParams(
        max_depth=int(base["max_depth"]),
        min_samples_leaf=int(base["min_samples_leaf"]),
        min_samples_split=int(base["min_samples_split"]),
        max_features_rule=str(base["max_features"]),
    )


def fit_classifier(kind: str, cfg: RunConfig, overrides: dict | None, seed: int, dataset):
    """Fit the configured classifier, applying grid-cell overrides."""
    overrides = dict(overrides or {})
    if kind == "dt":
        return fit_tree(dataset, tree_params_for(cfg, "dt", overrides), seed)
    if kind == "rf":
        n_estimators = int(overrides.pop("n_estimators", cfg.rf_n_estimators))
        bootstrap = _parse_bool(overrides.pop("bootstrap", cfg.rf_bootstrap))
        tree = tree_params_for(cfg, "rf", overrides)
        return fit_forest(
            dataset,
            ForestParams(n_estimators=n_estimators, tree=tree, bootstrap=bootstrap, seed=seed),
        )
    if kind == "rusboost":
        n_estimators = int(overrides.pop("n_estimators", cfg.boost_n_estimators))
        learning_rate = float(overrides.pop("learning_rate", cfg.boost_learning_rate))
        tree = tree_params_for(cfg, "rusboost", overrides)
        return fit_rusboost(
            dataset,
            BoostParams(
                n_estimators=n_estimators,
                learning_rate=learning_rate,
                base_tree=tree,
                seed=seed,
            ),
        )
    raise ConfigError(f"unknown classifier {kind!r}")


class Runner:
    """Executes stages against one run directory."""

    def __init__(self, cfg: RunConfig, run_dir, jobs: int = 1, force: bool = False):
        self.cfg = cfg
        self.run_dir = Path(run_dir)
        self.jobs = max(1, jobs)
        self.force = force
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.meta_dir = self.run_dir / ".meta"
        self.meta_dir.mkdir(exist_ok=True)

    # ---------------------------------------------------------------- paths

    def path(self, stage: str, name: str) -> Path:
        return self.run_dir / stage / name

    def artifact_map(self) -> dict[str, dict[str, Path]]:
        p = self.path
        return {
            "normalize": {
                "drugs": p("normalize", "drugs.csv"),
                "targets": p("normalize", "targets.csv"),
            },
            "candidates": {
                "positives": p("candidates", "positives.csv"),
                "candidates": p("candidates", "candidates.csv"),
                "provenance": p("candidates", "provenance.csv"),
            },
            "reduce": {
                "model": p("reduce", "pca_model.csv"),
                "positives": p("reduce", "positives_reduced.csv"),
                "candidates": p("reduce", "candidates_reduced.csv"),
            },
            "score": {"scores": p("score", "scores.csv")},
            "balance": {"balanced": p("balance", "balanced.csv")},
            "train": {"model": p("train", "model.txt")},
            "evaluate": {
                "cv": p("evaluate", "cv.csv"),
                "metrics": p("evaluate", "metrics.csv"),
            },
            "sweep": {"sweep": p("sweep", "sweep.csv")},
        }

    def _require(self, stage: str, *artifact_stages: str) -> None:
        """Raise naming the earliest missing upstream stage, in the pipeline
        order the caller lists them."""
        arts = self.artifact_map()
        for upstream in artifact_stages:
            for path in arts[upstream].values():
                if not path.exists():
                    raise DependencyError(upstream, f"stage '{stage}' needs {path.name}")

    # ------------------------------------------------------------ manifests

    def _manifest_path(self, stage: str) -> Path:
        return self.meta_dir / f"{stage}.json"

    def _should_skip(self, stage: str, inputs: dict[str, Path], outputs: list[Path]) -> bool:
        if self.force:
            return False
        manifest_path = self._manifest_path(stage)
        if not manifest_path.exists():
            return False
        try:
            recorded = json.loads(manifest_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            return False
        if recorded.get("config_digest") != self.cfg.digest():
            return False
        if set(recorded.get("inputs", {})) != {str(p) for p in inputs.values()}:
            return False
        for key, path in inputs.items():
            if not path.exists():
                return False
            if recorded["inputs"].get(str(path)) != file_digest(path):
                return False
        return all(path.exists() for path in outputs)

    def _record(self, stage: str, inputs: dict[str, Path], outputs: list[Path], wall: float):
        manifest = StageManifest(
            stage=stage,
            config_digest=self.cfg.digest(),
            seed=self.cfg.seed,
            inputs={str(p): file_digest(p) for p in inputs.values()},
            outputs=[str(p) for p in outputs],
            wall_time_s=wall,
        )
        self._manifest_path(stage).write_text(
            json.dumps(asdict(manifest), indent=2) + "\n", encoding="utf-8"
        )

    def _run(self, stage: str, inputs: dict[str, Path], outputs: list[Path], body) -> bool:
        """Shared skip/record wrapper; returns True when the stage ran."""
        for name, path in inputs.items():
            if not path.exists():
                raise FileNotFoundError(f"stage '{stage}' input missing: {path}")
        if self._should_skip(stage, inputs, outputs):
            log.info("stage %s: up to date, skipping", stage)
            return False
        started = time.perf_counter()
        self.path(stage, "x").parent.mkdir(parents=True, exist_ok=True)
        body()
        wall = time.perf_counter() - started
        self._record(stage, inputs, outputs, wall)
        log.info("stage %s: done in %.2fs", stage, wall)
        return True

    # --------------------------------------------------------------- stages

    def stage_normalize(self) -> bool:
        cfg = self.cfg
        arts = self.artifact_map()["normalize"]
        inputs = {"drugs": Path(cfg.drugs_path), "targets": Path(cfg.targets_path)}

        def body():
            for side in ("drugs", "targets"):
                matrix = load_feature_matrix(inputs[side])
                write_feature_matrix(arts[side], min_max_normalize(matrix))

        return self._run("normalize", inputs, list(arts.values()), body)

    def _normalized(self) -> tuple[FeatureMatrix, FeatureMatrix]:
        arts = self.artifact_map()["normalize"]
        return load_feature_matrix(arts["drugs"]), load_feature_matrix(arts["targets"])

    def stage_candidates(self) -> bool:
        cfg = self.cfg
        self._require("candidates", "normalize")
        norm = self.artifact_map()["normalize"]
        arts = self.artifact_map()["candidates"]
        inputs = {
            "drugs": norm["drugs"],
            "targets": norm["targets"],
            "interactions": Path(cfg.interactions_path),
        }

        def body():
            drugs, targets = self._normalized()
            interactions = load_interactions(inputs["interactions"], drugs, targets)
            snn_drugs, snn_targets = drugs, targets
            if cfg.snn_feature_space == "reduced":
                snn_drugs = self._reduced_entity_matrix(drugs, "drugs")
                snn_targets = self._reduced_entity_matrix(targets, "targets")
            pool = generate_candidates(
                interactions,
                snn_drugs,
                snn_targets,
                k=cfg.k_neighbors,
                k_range=range(cfg.kmedoids_k_min, cfg.kmedoids_k_max + 1),
                seed=substream_seed(cfg.seed, "candidates"),
                block_rows=cfg.distance_block_rows,
            )
            write_pair_dataset(arts["positives"], pool.positives, with_features=False)
            write_pair_dataset(arts["candidates"], pool.candidates, with_features=False)
            with arts["provenance"].open("w", encoding="utf-8", newline="") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(["drug_id", "target_id", "src_drug", "src_target"])
                writer.writerows(pool.provenance)

        return self._run("candidates", inputs, list(arts.values()), body)

    def _reduced_entity_matrix(self, matrix: FeatureMatrix, label: str) -> FeatureMatrix:
        """SNN-space override: PCA per entity matrix using [reduce] settings."""
        cfg = self.cfg
        q = cfg.pca_components or min(
            matrix.dim, cfg.pca_batch_size, cfg.max_components, matrix.n
        )
        q = min(q, matrix.dim, matrix.n)
        fitter = IncrementalPca(q, matrix.dim)
        for start in range(0, matrix.n, cfg.pca_batch_size):
            fitter.partial_fit(matrix.values[start : start + cfg.pca_batch_size])
        model = fitter.to_model()
        if not cfg.pca_components:
            model = truncate_model(model, cfg.variance_target, cfg.max_components)
        reduced = transform_rows(model, matrix.values)
        names = [f"{label}_pc{i + 1}" for i in range(model.q)]
        return FeatureMatrix.build(matrix.ids, reduced, names)

    def _pair_features(self, drugs, targets, dataset: PairDataset) -> np.ndarray:
        drug_index = drugs.index_of()
        target_index = targets.index_of()
        di = np.array([drug_index[d] for d in dataset.drug_ids], dtype=int)
        ti = np.array([target_index[t] for t in dataset.target_ids], dtype=int)
        return np.hstack([drugs.values[di], targets.values[ti]])

    def stage_reduce(self) -> bool:
        cfg = self.cfg
        self._require("reduce", "normalize", "candidates")
        norm = self.artifact_map()["normalize"]
        cand = self.artifact_map()["candidates"]
        arts = self.artifact_map()["reduce"]
        inputs = {
            "drugs": norm["drugs"],
            "targets": norm["targets"],
            "positives": cand["positives"],
            "candidates": cand["candidates"],
        }

        def body():
            drugs, targets = self._normalized()
            positives = load_pair_dataset(inputs["positives"])
            candidates = load_pair_dataset(inputs["candidates"])
            drug_index = drugs.index_of()
            target_index = targets.index_of()
            keys = positives.keys() + candidates.keys()
            dim = drugs.dim + targets.dim
            n_total = len(keys)
            q = cfg.pca_components or min(dim, cfg.pca_batch_size, cfg.max_components, n_total)
            if q > dim:
                raise ConfigError(f"pca_components={q} exceeds pair dimension {dim}")
            q = min(q, n_total, cfg.pca_batch_size)
            fitter = IncrementalPca(q, dim)
            for start in range(0, n_total, cfg.pca_batch_size):
                chunk = keys[start : start + cfg.pca_batch_size]
                di = np.array([drug_index[d] for d, _ in chunk], dtype=int)
                ti = np.array([target_index[t] for _, t in chunk], dtype=int)
                fitter.partial_fit(np.hstack([drugs.values[di], targets.values[ti]]))
            model = fitter.to_model()
            if not cfg.pca_components:
                model = truncate_model(model, cfg.variance_target, cfg.max_components)
            save_pca_model(arts["model"], model)
            for name, dataset in (("positives", positives), ("candidates", candidates)):
                reduced = transform_rows(model, self._pair_features(drugs, targets, dataset))
                out = PairDataset(
                    dataset.drug_ids, dataset.target_ids, reduced, dataset.labels
                )
                write_pair_dataset(arts[name], out, with_features=True)

        return self._run("reduce", inputs, list(arts.values()), body)

    def stage_score(self) -> bool:
        cfg = self.cfg
        self._require("score", "normalize", "candidates", "reduce")
        red = self.artifact_map()["reduce"]
        arts = self.artifact_map()["score"]
        inputs = {"positives": red["positives"], "candidates": red["candidates"]}

        def body():
            positives = load_pair_dataset(inputs["positives"])
            candidates = load_pair_dataset(inputs["candidates"])
            m = cfg.m_groups or max(1, math.ceil(len(positives) / cfg.max_group_rows))
            n = cfg.n_groups or max(1, math.ceil(len(candidates) / cfg.max_group_rows))
            m = min(m, len(positives))
            n = min(n, len(candidates))
            table = averaged_frua(
                positives,
                candidates,
                m,
                n,
                kernel_kind=cfg.similarity_kernel,
                connectives=Connectives.by_name(cfg.t_norm),
                seed=substream_seed(cfg.seed, "score"),
                jobs=self.jobs,
            )
            write_score_table(arts["scores"], table)

        return self._run("score", inputs, list(arts.values()), body)

    def _raw_pools(self):
        """Positives and candidates rebuilt in raw pair-feature space."""
        drugs, targets = self._normalized()
        cand_arts = self.artifact_map()["candidates"]
        positives = load_pair_dataset(cand_arts["positives"])
        candidates = load_pair_dataset(cand_arts["candidates"])
        positives = PairDataset(
            positives.drug_ids,
            positives.target_ids,
            self._pair_features(drugs, targets, positives),
            positives.labels,
        )
        candidates = PairDataset(
            candidates.drug_ids,
            candidates.target_ids,
            self._pair_features(drugs, targets, candidates),
            candidates.labels,
        )
        return positives, candidates

    def stage_balance(self) -> bool:
        cfg = self.cfg
        self._require("balance", "normalize", "candidates", "score")
        arts = self.artifact_map()["balance"]
        score_art = self.artifact_map()["score"]["scores"]
        cand_arts = self.artifact_map()["candidates"]
        norm = self.artifact_map()["normalize"]
        inputs = {
            "drugs": norm["drugs"],
            "targets": norm["targets"],
            "positives": cand_arts["positives"],
            "candidates": cand_arts["candidates"],
            "scores": score_art,
        }

        def body():
            positives, candidates = self._raw_pools()
            scores = load_score_table(score_art)
            balanced = balance(
                positives,
                candidates,
                scores,
                ThresholdPolicy(t_p=cfg.t_p, t_q=cfg.t_q),
                beta=cfg.adasyn_beta,
                K=cfg.adasyn_k,
                seed=substream_seed(cfg.seed, "balance"),
            )
            write_pair_dataset(arts["balanced"], balanced.dataset, with_features=True)

        return self._run("balance", inputs, list(arts.values()), body)

    def _selected_features(self, dataset: PairDataset) -> np.ndarray | None:
        cfg = self.cfg
        if not cfg.feature_selection:
            return None
        params = ForestParams(
            n_estimators=cfg.rf_n_estimators,
            tree=tree_params_for(cfg, "rf"),
            bootstrap=cfg.rf_bootstrap,
            seed=0,
        )
        importances = rf_feature_importance(
            dataset,
            (cfg.importance_pos_groups, cfg.importance_neg_groups),
            params,
            seed=substream_seed(cfg.seed, "feature-selection"),
        )
        k = min(cfg.top_k_features, dataset.dim)
        return select_top_k_features(importances, k)

    @staticmethod
    def _project(dataset: PairDataset, keep: np.ndarray | None) -> PairDataset:
        if keep is None:
            return dataset
        return PairDataset(
            dataset.drug_ids,
            dataset.target_ids,
            dataset.features[:, keep],
            dataset.labels,
            dataset.frua_scores,
            dataset.synthetic,
        )

    def stage_train(self) -> bool:
        cfg = self.cfg
        self._require("train", "balance")
        arts = self.artifact_map()["train"]
        balanced_path = self.artifact_map()["balance"]["balanced"]
        inputs = {"balanced": balanced_path}
        grid_spec = parse_grid(cfg.grid)
        outputs = list(arts.values())
        grid_csv = self.path("train", "grid.csv")
        grid_png = self.path("train", "grid.png")
        features_csv = self.path("train", "selected_features.csv")
        if grid_spec:
            outputs += [grid_csv, grid_png]
        if cfg.feature_selection:
            outputs.append(features_csv)

        def body():
            balanced = load_pair_dataset(balanced_path)
            keep = self._selected_features(balanced)
            if keep is not None:
                with features_csv.open("w", encoding="utf-8", newline="") as handle:
                    writer = csv.writer(handle, lineterminator="\n")
                    writer.writerow(["feature_index"])
                    writer.writerows([[int(i)] for i in keep])
            dataset = self._project(balanced, keep)
            overrides: dict = {}
            if grid_spec:
                result = grid_search(
                    dataset,
                    lambda cell, xy: fit_classifier(
                        cfg.classifier, cfg, cell, substream_seed(cfg.seed, "grid-fit"), xy
                    ),
                    grid_spec,
                    cv_folds=cfg.cv_folds,
                    metric=cfg.grid_metric,
                    seed=substream_seed(cfg.seed, "grid"),
                )
                self._write_grid(result, grid_csv, grid_png)
                overrides = result.best_params
            model = fit_classifier(
                cfg.classifier,
                cfg,
                overrides,
                substream_seed(cfg.seed, "train"),
                (dataset.features, dataset.labels),
            )
            save_model(arts["model"], model)

        return self._run("train", inputs, outputs, body)

    def _write_grid(self, result, grid_csv: Path, grid_png: Path) -> None:
        cfg = self.cfg
        names = list(result.cells[0].params.keys()) if result.cells else []
        with grid_csv.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow([*names, "mean_score", "fold_scores", "error", "best"])
            for i, cell in enumerate(result.cells):
                writer.writerow(
                    [
                        *[cell.params[n] for n in names],
                        "" if cell.error else f"{cell.mean_score:.6f}",
                        "|".join(f"{s:.6f}" for s in cell.fold_scores),
                        cell.error or "",
                        "1" if i == result.best_index else "0",
                    ]
                )
        plots.save_grid_plot(result.cells, cfg.grid_metric, grid_png)

    def stage_evaluate(self) -> bool:
        cfg = self.cfg
        self._require("evaluate", "balance")
        arts = self.artifact_map()["evaluate"]
        balanced_path = self.artifact_map()["balance"]["balanced"]
        inputs = {"balanced": balanced_path}
        cv_png = self.path("evaluate", "cv.png")
        roc_png = self.path("evaluate", "roc.png")
        outputs = list(arts.values()) + [cv_png, roc_png]

        def body():
            balanced = load_pair_dataset(balanced_path)
            keep = self._selected_features(balanced)
            dataset = self._project(balanced, keep)

            def fold_fn(train, test):
                model = fit_classifier(
                    cfg.classifier,
                    cfg,
                    {},
                    substream_seed(cfg.seed, "cv-fit"),
                    (train.features, train.labels),
                )
                return model.predict_proba(test.features)

            reports, mean = k_fold_cv(
                dataset, cfg.cv_folds, fold_fn, substream_seed(cfg.seed, "cv")
            )
            with arts["cv"].open("w", encoding="utf-8", newline="") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(["fold", "auc", "f1", "gmean", "sensitivity", "specificity"])
                for i, r in enumerate(reports):
                    writer.writerow(
                        [i, *(f"{v:.6f}" for v in (r.auc, r.f1, r.g_mean, r.sensitivity, r.specificity))]
                    )
                writer.writerow(
                    ["mean", *(f"{v:.6f}" for v in (mean.auc, mean.f1, mean.g_mean, mean.sensitivity, mean.specificity))]
                )
            plots.save_cv_plot(reports, mean, cv_png)

            train, test = holdout_split(
                dataset, cfg.holdout_ratio, substream_seed(cfg.seed, "holdout")
            )
            model = fit_classifier(
                cfg.classifier,
                cfg,
                {},
                substream_seed(cfg.seed, "holdout-fit"),
                (train.features, train.labels),
            )
            scores = model.predict_proba(test.features)
            report = evaluate_scores(test.labels, scores)
            with arts["metrics"].open("w", encoding="utf-8", newline="") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(["metric", "value"])
                writer.writerow(["auc", f"{report.auc:.6f}"])
                writer.writerow(["f1", f"{report.f1:.6f}"])
                writer.writerow(["gmean", f"{report.g_mean:.6f}"])
                writer.writerow(["sensitivity", f"{report.sensitivity:.6f}"])
                writer.writerow(["specificity", f"{report.specificity:.6f}"])
                for name in ("tp", "fp", "tn", "fn"):
                    writer.writerow([name, getattr(report, name)])
                writer.writerow(["undefined_rates", "|".join(report.undefined_rates)])
            plots.save_roc_plot(test.labels, scores, report.auc, roc_png)

        return self._run("evaluate", inputs, outputs, body)

    def _sweep_thresholds(self, override: list[float] | None) -> list[float]:
        cfg = self.cfg
        if override:
            return [float(t) for t in override]
        if cfg.thresholds.strip():
            return [float(t) for t in cfg.thresholds.split(",") if t.strip()]
        if cfg.sweep_param == "tq":
            return [round(float(t), 6) for t in np.linspace(0.0, cfg.t_p, 50)]
        return [round(float(t), 6) for t in np.linspace(cfg.t_q, 1.0, 50)]

    def stage_sweep(self, thresholds: list[float] | None = None) -> bool:
        cfg = self.cfg
        self._require("sweep", "normalize", "candidates", "score")
        arts = self.artifact_map()["sweep"]
        cand_arts = self.artifact_map()["candidates"]
        norm = self.artifact_map()["normalize"]
        score_art = self.artifact_map()["score"]["scores"]
        inputs = {
            "drugs": norm["drugs"],
            "targets": norm["targets"],
            "positives": cand_arts["positives"],
            "candidates": cand_arts["candidates"],
            "scores": score_art,
        }
        sweep_png = self.path("sweep", "sweep.png")
        outputs = list(arts.values()) + [sweep_png]
        values = self._sweep_thresholds(thresholds)

        def body():
            positives, candidates = self._raw_pools()
            scores = load_score_table(score_art)
            kind = cfg.sweep_classifier or cfg.classifier
            options = SweepOptions(
                t_p=cfg.t_p,
                t_q=cfg.t_q,
                sweep_param=cfg.sweep_param,
                beta=cfg.adasyn_beta,
                adasyn_k=cfg.adasyn_k,
                holdout_ratio=cfg.holdout_ratio,
                train_fn=lambda ds: fit_classifier(
                    kind, cfg, {}, substream_seed(cfg.seed, "sweep-fit"),
                    (ds.features, ds.labels),
                ),
                feature_selector=(self._selected_features if cfg.feature_selection else None),
            )
            rows = threshold_sweep(
                positives, candidates, scores, values, options,
                substream_seed(cfg.seed, "sweep"),
            )
            with arts["sweep"].open("w", encoding="utf-8", newline="") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(["threshold", "auc", "f1", "gmean", "runtime_s", "error"])
                for row in rows:
                    writer.writerow(
                        [
                            repr(row.threshold),
                            f"{row.auc:.6f}",
                            f"{row.f1:.6f}",
                            f"{row.gmean:.6f}",
                            f"{row.runtime_s:.3f}",
                            row.error,
                        ]
                    )
            plots.save_sweep_plot(rows, sweep_png)

        return self._run("sweep", inputs, outputs, body)

    # ------------------------------------------------------------- frontend

    def run_stage(self, name: str, thresholds: list[float] | None = None) -> bool:
        if name == "sweep":
            return self.stage_sweep(thresholds)
        method = {
            "normalize": self.stage_normalize,
            "candidates": self.stage_candidates,
            "reduce": self.stage_reduce,
            "score": self.stage_score,
            "balance": self.stage_balance,
            "train": self.stage_train,
            "evaluate": self.stage_evaluate,
        }.get(name)
        if method is None:
            raise ConfigError(f"unknown stage {name!r}")
        return method()

    def run_pipeline(self) -> None:
        for stage in STAGES:
            self.run_stage(stage)
