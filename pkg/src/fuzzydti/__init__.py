"""Drug-target interaction prediction via shared-nearest-neighbour candidate
generation, fuzzy-rough upper-approximation scoring, threshold balancing
with ADASYN, and native tree-based classifiers."""

from .coredata import (
    FeatureMatrix,
    GroupSplit,
    InteractionSet,
    Label,
    PairDataset,
    PairSample,
    concat_pair,
    min_max_normalize,
    split_into_groups,
)
from .fuzzyrough import (
    Connectives,
    DecisionTable,
    FruaScoreTable,
    SimilarityKernel,
    averaged_frua,
    lower_approximation,
    lukasiewicz_i,
    lukasiewicz_t,
    upper_approximation,
)
from .resample import BalancedDataset, ThresholdPolicy, adasyn, balance, threshold_partition

__version__ = "0.1.0"

__all__ = [
    "BalancedDataset",
    "Connectives",
    "DecisionTable",
    "FeatureMatrix",
    "FruaScoreTable",
    "GroupSplit",
    "InteractionSet",
    "Label",
    "PairDataset",
    "PairSample",
    "SimilarityKernel",
    "ThresholdPolicy",
    "adasyn",
    "averaged_frua",
    "balance",
    "concat_pair",
    "lower_approximation",
    "lukasiewicz_i",
    "lukasiewicz_t",
    "min_max_normalize",
    "split_into_groups",
    "threshold_partition",
    "upper_approximation",
    "__version__",
]
