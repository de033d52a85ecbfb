"""cpe: set-to-set matching of precomputed image and prompt embeddings."""

from .bench import EvalReport, run_ablation, run_benchmark, run_repeats
from .config import MatchConfig
from .errors import ConfigError, CpeError, DataError, FormatError
from .fixtures import make_benchmark_fixture, make_exact_fixture, make_mini_fixture
from .formats import (
    EmbeddingSet,
    load_attention_map,
    load_embedding_set,
    save_attention_map,
    save_embedding_set,
)
from .manifest import Manifest, load_manifest, save_manifest
from .matchers import (
    AdaptiveShiftMatcher,
    PointwiseMatcher,
    TransportMatcher,
    matcher_from_config,
)
from .synonyms import ClassTextualSet, SynonymCandidate, filter_synonyms
from .views import CropSpec, ViewSet, generate_crop_specs, select_views

__version__ = "0.1.0"

__all__ = [
    "AdaptiveShiftMatcher",
    "ClassTextualSet",
    "ConfigError",
    "CpeError",
    "CropSpec",
    "DataError",
    "EmbeddingSet",
    "EvalReport",
    "FormatError",
    "Manifest",
    "MatchConfig",
    "PointwiseMatcher",
    "SynonymCandidate",
    "TransportMatcher",
    "ViewSet",
    "filter_synonyms",
    "generate_crop_specs",
    "make_benchmark_fixture",
    "make_exact_fixture",
    "make_mini_fixture",
    "run_ablation",
    "run_benchmark",
    "run_repeats",
    "load_attention_map",
    "load_embedding_set",
    "load_manifest",
    "matcher_from_config",
    "save_attention_map",
    "save_embedding_set",
    "save_manifest",
    "select_views",
    "__version__",
]
