"""Explore, measure and rank community structures by downstream usefulness.

The package evolves large pools of graph partitions with a genetic
algorithm, describes each partition with 11 structural properties, scores
partitions on node anomaly detection and trust prediction, and trains a
small-sample regressor that predicts those scores from the properties.
"""

__version__ = "0.1.0"

from .errors import EmptyGraphError, ParseError, PartitionForgeError, ValidationError
from .graph import (Graph, NodeLabels, RatingsTable, load_edge_list, load_labels,
                    load_ratings, load_trust, write_edge_list, write_labels, write_ratings,
                    write_trust)
from .partition import (AugmentedMembership, Partition, augment, canonicalize,
                        random_partition, read_partition, write_partition)
from .metrics import (PROPERTY_NAMES, PropertyVector, community_stats, correlation_matrix,
                      local_clustering, modularity, property_vector)
from .detect import label_propagation, louvain, nmi, single_community
from .synthetic import planted_anomalies, planted_partition, planted_trust
from .ga import (Archive, FitnessFunction, GAConfig, SolutionRecord, crossover, mutate,
                 run_ga, select)
from .classify import TaskResult
from .anomaly import anomaly_features, evaluate_pool_anomaly, train_eval_anomaly
from .trust import (community_center, evaluate_pool_trust, pair_features, train_eval_trust,
                    trust_split)
from .meta import (MetaModel, Pool, SampleBudget, active_fit, fit_gbrt, rank_solutions,
                   transfer_eval)
from .report import report_distributions, report_extremes

__all__ = [name for name, obj in list(globals().items())
           if not name.startswith("_") and getattr(obj, "__module__", "").startswith(__name__)]
__all__.append("PROPERTY_NAMES")
