"""Synthetic benchmark data with a planted interaction rule.

Entities sit in well-separated clusters, each made of a few tight
sub-blobs, and carry a bimodal "activity" level as feature 0 (low band
around 0.25, high band around 0.75). A pair interacts exactly when its
cluster pair is compatible and both entities are active, with an optional
fraction of label-noise pairs from the complement. The sub-blob structure
gives the medoid step something real to find, and the rule is recoverable
from the pair features, so an end-to-end run should reach high held-out
AUC.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coredata import FeatureMatrix
from .errors import InvalidInput


@dataclass
class PlantedData:
    drugs: FeatureMatrix
    targets: FeatureMatrix
    interactions: list[tuple[str, str]]
    drug_clusters: np.ndarray
    target_clusters: np.ndarray
    compatibility: np.ndarray  # drug-cluster x target-cluster booleans
    drug_active: np.ndarray
    target_active: np.ndarray

    def pair_is_planted(self, drug_index: int, target_index: int) -> bool:
        return bool(
            self.compatibility[self.drug_clusters[drug_index], self.target_clusters[target_index]]
            and self.drug_active[drug_index]
            and self.target_active[target_index]
        )


def _entity_matrix(prefix, n, dim, n_clusters, n_sub, cluster_spread, noise, rng):
    centers = rng.uniform(0.2, 0.8, size=(n_clusters, dim - 1))
    sub_offsets = rng.uniform(-cluster_spread, cluster_spread, size=(n_clusters, n_sub, dim - 1))
    clusters = np.arange(n) % n_clusters
    subs = (np.arange(n) // n_clusters) % n_sub
    high = rng.random(n) < 0.5
    activity = np.where(high, 0.75, 0.25) + rng.uniform(-0.08, 0.08, size=n)
    values = np.empty((n, dim))
    values[:, 0] = activity
    values[:, 1:] = np.clip(
        centers[clusters] + sub_offsets[clusters, subs] + rng.normal(0.0, noise, size=(n, dim - 1)),
        0.0,
        1.0,
    )
    ids = [f"{prefix}{i:04d}" for i in range(n)]
    names = [f"{prefix.lower()}f{j}" for j in range(dim)]
    return FeatureMatrix.build(ids, values, names), clusters, activity > 0.5


def make_planted_data(
    n_drugs: int = 200,
    n_targets: int = 150,
    n_interactions: int = 300,
    d_drug: int = 12,
    d_target: int = 10,
    n_drug_clusters: int = 4,
    n_target_clusters: int = 3,
    n_subclusters: int = 3,
    cluster_spread: float = 0.18,
    noise: float = 0.02,
    compat_rate: float = 0.34,
    label_noise: float = 0.02,
    seed: int = 7,
) -> PlantedData:
    rng = np.random.default_rng(seed)
    drugs, d_clusters, d_active = _entity_matrix(
        "D", n_drugs, d_drug, n_drug_clusters, n_subclusters, cluster_spread, noise, rng
    )
    targets, t_clusters, t_active = _entity_matrix(
        "T", n_targets, d_target, n_target_clusters, n_subclusters, cluster_spread, noise, rng
    )

    compat = rng.random((n_drug_clusters, n_target_clusters)) < compat_rate
    if not compat.any():
        compat[0, 0] = True

    planted = (
        compat[d_clusters[:, None], t_clusters[None, :]]
        & d_active[:, None]
        & t_active[None, :]
    )
    pos_pool = np.argwhere(planted)
    neg_pool = np.argwhere(~planted)
    n_noise = int(round(n_interactions * label_noise))
    n_clean = n_interactions - n_noise
    if len(pos_pool) < n_clean:
        raise InvalidInput(
            f"only {len(pos_pool)} planted pairs available, need {n_clean}; "
            "raise compat_rate or entity counts"
        )
    chosen = pos_pool[rng.choice(len(pos_pool), size=n_clean, replace=False)]
    if n_noise:
        noisy = neg_pool[rng.choice(len(neg_pool), size=n_noise, replace=False)]
        chosen = np.vstack([chosen, noisy])
    interactions = [(drugs.ids[i], targets.ids[j]) for i, j in chosen]
    return PlantedData(
        drugs=drugs,
        targets=targets,
        interactions=interactions,
        drug_clusters=d_clusters,
        target_clusters=t_clusters,
        compatibility=compat,
        drug_active=d_active,
        target_active=t_active,
    )


def write_planted_data(data: PlantedData, out_dir) -> dict[str, str]:
    """Write drugs/targets/interactions CSVs plus a ready-to-run config."""
    from pathlib import Path

    from .io import write_feature_matrix, write_interactions

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "drugs": out / "drugs.csv",
        "targets": out / "targets.csv",
        "interactions": out / "interactions.csv",
        "config": out / "config.ini",
    }
    write_feature_matrix(paths["drugs"], data.drugs)
    write_feature_matrix(paths["targets"], data.targets)
    write_interactions(paths["interactions"], data.interactions)
    paths["config"].write_text(
        "[paths]\n"
        "drugs = drugs.csv\n"
        "targets = targets.csv\n"
        "interactions = interactions.csv\n"
        "\n"
        "[pipeline]\n"
        "seed = 42\n",
        encoding="utf-8",
    )
    return {k: str(v) for k, v in paths.items()}
