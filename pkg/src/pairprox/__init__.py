"""Pair-feature link prediction: structural and attribute proximity indices,
temporal collaboration features, and a boosted-tree scorer."""

__version__ = "0.1.0"

from .errors import ConfigError, InputError, MetricError, PairProxError, TrainingError
from .graph import (Graph, build_graph, distance_excluding_direct_edge, degree, load_graph,
                    neighbors, read_edge_list, walk_count)
from .structural import (REDUCED_NAMES, STRUCTURAL_NAMES, adamic_adar, jaccard, salton, sorensen,
                         structural_matrix, structural_vector)
from .domain import (DomainProfile, NodeAttributes, class_identifier, common_class, common_digits,
                     common_embedding, common_zeros, cosine_distance, domain_matrix, domain_vector,
                     feature_count, l1_distance, norm_common_digits)
from .temporal import (COLLAB, CollabWindows, TemporalGraph, activity, career_span_flags,
                       collab_matrix, collab_vector, preferential_attachment, weighted_indices,
                       windowed_common_collaborators, windowed_weight_sum, yearwise_labels)
from .dataset import (Dataset, DatasetSplit, FeatureProfile, FeatureTable, PairFeatureRow, assemble,
                      load_dataset, make_split, sample_negatives, split_edges, temporal_split)
from .gbdt import GBDTModel, Hyperparams, PRESETS, feature_importance, predict, preset, train
from .logistic import LogisticModel, train_logistic
from .metrics import (EvalReport, aggregate, auc, edge_homophily, evaluate, hits_at_k,
                      node_homophily, transitivity_ratio)
from .pipeline import RunConfig, analyze, run_pipeline
