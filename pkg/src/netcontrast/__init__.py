"""netcontrast: find and explain structural patterns unique to one network.

The pipeline learns interpretable relational node features on a target graph,
evaluates them on both the target and a background graph, and contrasts the
two feature matrices with contrastive PCA under automatic contrast-parameter
selection. Loadings on the resulting components explain which features drive
the target network's uniqueness.
"""

from .base_features import (BaseFeature, compute_base_feature,
                            select_valid_base_features)
from .cpca import (ContrastivePCA, ContrastiveResult, auto_contrast_fit,
                   contrastive_fit, project, standardize, top_eigenpairs)
from .generators import enhanced_price_graph, gilbert_graph, price_graph
from .graph import (AttributeTableError, EdgeListParseError, Graph,
                    attach_attributes, parse_edge_list, read_attribute_csv,
                    write_node_table)
from .metrics import (MetricReport, bhattacharyya_gaussian, dispersion_ratio,
                      kl_knn, score_embeddings)
from .pipeline import PipelineConfig, PipelineResult, contrast_networks
from .plotting import scatter_svg
from .relational import (FeatureDefinition, FeatureMatrix,
                         RelationalFeatureLearner, RelationalOperator,
                         apply_operator, default_operators,
                         definitions_from_json, definitions_to_json,
                         feature_similarity, log_bin, prune_features)

__version__ = "0.1.0"

__all__ = [
    "AttributeTableError", "BaseFeature", "ContrastivePCA", "ContrastiveResult",
    "EdgeListParseError", "FeatureDefinition", "FeatureMatrix", "Graph",
    "MetricReport", "PipelineConfig", "PipelineResult", "RelationalFeatureLearner",
    "RelationalOperator", "apply_operator", "attach_attributes", "auto_contrast_fit",
    "bhattacharyya_gaussian", "compute_base_feature", "contrast_networks",
    "contrastive_fit", "default_operators", "definitions_from_json",
    "definitions_to_json", "dispersion_ratio", "enhanced_price_graph",
    "feature_similarity", "gilbert_graph", "kl_knn", "log_bin", "parse_edge_list",
    "price_graph", "project", "prune_features", "read_attribute_csv",
    "scatter_svg", "score_embeddings", "select_valid_base_features", "standardize",
    "top_eigenpairs", "write_node_table",
]
