"""Graph sampling, observation channels, vertex classifiers and Monte Carlo harnesses."""

from .classifiers import (
    classify_feature_bayes,
    classify_gamma,
    classify_mcar_lr,
    classify_plugin,
)
from .estimate import SBMEstimate, estimate_sbm
from .experiments import (
    BinaryChannel,
    FeatureChannel,
    RunReport,
    celegans_experiment,
    chance_error,
    loo_error,
    monte_carlo_vertex_error,
    paired_vertex_error,
)
from .graphs import (
    EDGE,
    IMPUTED_ZERO,
    MCAR,
    MISSING,
    NON_EDGE,
    LabeledGraph,
    ObservedGraph,
    observe_binary_channel,
    observe_errorful,
    sample_sbm,
)
from .io import GraphFormatError, load_graph, write_graph
