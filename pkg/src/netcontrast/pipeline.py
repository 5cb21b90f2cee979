"""End-to-end orchestration: two graphs in, contrastive embeddings out.

The target graph drives feature learning; the learned definitions are
evaluated on both graphs, the matrices are column-aligned (features that go
bad on either side are dropped from both), and the contrastive projection is
fitted on the result.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

from .cpca import ContrastivePCA, ContrastiveResult
from .graph import Graph
from .relational import FeatureDefinition, FeatureMatrix, RelationalFeatureLearner


@dataclass
class PipelineConfig:
    """Declarative configuration for one contrast run.

    ``base_features``/``operators`` of None mean the directedness-appropriate
    defaults. ``alpha`` is "auto" or a nonnegative number. ``seed`` only
    matters for commands that generate graphs; the pipeline itself is
    deterministic.
    """

    base_features: list | None = None
    operators: list | None = None
    depth: int = 3
    similarity_threshold: float = 0.7
    bin_fraction: float = 0.5
    n_components: int = 2
    alpha: object = "auto"
    epsilon: float = 1e-3
    standardize_mode: str = "separate"
    seed: int = 0
    output_dir: str = "."

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        """Build from the JSON config layout (``features``/``contrast`` sections)."""
        if not isinstance(data, dict):
            raise ValueError("config must be a JSON object")
        feats = dict(data.get("features", {}))
        contrast = dict(data.get("contrast", {}))
        cfg = cls()
        cfg.base_features = feats.pop("base_features", None)
        cfg.operators = feats.pop("operators", None)
        cfg.depth = int(feats.pop("depth", feats.pop("h", cfg.depth)))
        cfg.similarity_threshold = float(
            feats.pop("similarity_threshold", feats.pop("lambda", cfg.similarity_threshold)))
        cfg.bin_fraction = float(feats.pop("bin_fraction", cfg.bin_fraction))
        if feats:
            raise ValueError(f"unknown keys in 'features' section: {sorted(feats)}")
        cfg.n_components = int(contrast.pop("n_components", contrast.pop("d_prime", cfg.n_components)))
        cfg.alpha = contrast.pop("alpha", cfg.alpha)
        cfg.epsilon = float(contrast.pop("epsilon", cfg.epsilon))
        cfg.standardize_mode = contrast.pop("standardize_mode", cfg.standardize_mode)
        if contrast:
            raise ValueError(f"unknown keys in 'contrast' section: {sorted(contrast)}")
        cfg.seed = int(data.get("seed", cfg.seed))
        cfg.output_dir = data.get("output_dir", cfg.output_dir)
        cfg.validate()
        return cfg

    def validate(self):
        if self.alpha != "auto":
            try:
                ok = float(self.alpha) >= 0
            except (TypeError, ValueError):
                ok = False
            if not ok:
                raise ValueError(f'alpha must be "auto" or a nonnegative number, got {self.alpha!r}')
        if self.n_components < 1:
            raise ValueError("n_components must be at least 1")
        if self.standardize_mode not in ("separate", "concatenated"):
            raise ValueError(f"unknown standardize_mode {self.standardize_mode!r}")
        if self.depth < 0:
            raise ValueError("depth must be nonnegative")
        if not 0.0 <= self.similarity_threshold <= 1.0:
            raise ValueError("similarity threshold must be in [0, 1]")
        if not 0.0 <= self.bin_fraction < 1.0:
            raise ValueError("bin_fraction must be in [0, 1)")


@dataclass
class PipelineResult:
    learner: RelationalFeatureLearner
    definitions: list[FeatureDefinition]
    matrix_target: FeatureMatrix
    matrix_background: FeatureMatrix
    contrast: ContrastiveResult
    labels_target: tuple[str, ...]
    labels_background: tuple[str, ...]
    dropped: list[tuple[FeatureDefinition, str]] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def n_features(self) -> int:
        return len(self.definitions)


def contrast_networks(graph_target: Graph, graph_background: Graph,
                      config: PipelineConfig | None = None) -> PipelineResult:
    """Run the full contrast pipeline on a target/background graph pair."""
    config = config or PipelineConfig()
    config.validate()
    if graph_target.directed != graph_background.directed:
        raise ValueError("target and background graphs must share directedness; "
                         "feature definitions do not transfer between the two")
    started = time.perf_counter()
    learner = RelationalFeatureLearner(
        base_features=config.base_features,
        operators=config.operators,
        depth=config.depth,
        similarity_threshold=config.similarity_threshold,
        bin_fraction=config.bin_fraction,
    )
    matrix_t = learner.fit_transform(graph_target)
    matrix_b = learner.transform(graph_background)
    common = [d for d in matrix_t.definitions if d in set(matrix_b.definitions)]
    dropped = list(learner.dropped_base_) + list(matrix_b.dropped)
    if len(common) < len(matrix_t.definitions):
        lost = len(matrix_t.definitions) - len(common)
        warnings.warn(f"{lost} feature(s) dropped from both matrices after transfer")
    if not common:
        raise ValueError("no feature survived evaluation on both graphs")
    matrix_t = matrix_t.select(common)
    matrix_b = matrix_b.select(common)
    if config.n_components > len(common):
        raise ValueError(f"n_components={config.n_components} exceeds the "
                         f"{len(common)} features shared by both matrices")
    projector = ContrastivePCA(
        n_components=config.n_components,
        alpha=config.alpha if config.alpha == "auto" else float(config.alpha),
        epsilon=config.epsilon,
        standardize_mode=config.standardize_mode,
    )
    projector.fit(matrix_t.values, matrix_b.values)
    return PipelineResult(
        learner=learner,
        definitions=common,
        matrix_target=matrix_t,
        matrix_background=matrix_b,
        contrast=projector.result_,
        labels_target=graph_target.labels,
        labels_background=graph_background.labels,
        dropped=dropped,
        seconds=time.perf_counter() - started,
    )
