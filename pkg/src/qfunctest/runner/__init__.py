from .config import (DeltaMapConfig, FitConfig, PatternConfig, ProductConfig, RenderConfig,
                     SuiteConfig, config_from_dict, default_tau_grid, load_config)
from .counts import dumps_counts, format_record, ingest_replay, parse_counts
from .render import diverging_color, emit_failure_map
from .suite import (ReplayMismatchError, RunManifest, analyze, derive_seed, ghz_study,
                    run_suite)

__all__ = [
    "DeltaMapConfig", "FitConfig", "PatternConfig", "ProductConfig", "RenderConfig",
    "SuiteConfig", "config_from_dict", "default_tau_grid", "load_config", "dumps_counts",
    "format_record", "ingest_replay", "parse_counts", "diverging_color", "emit_failure_map",
    "ReplayMismatchError", "RunManifest", "analyze", "derive_seed", "ghz_study", "run_suite",
]
