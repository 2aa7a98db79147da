from .collisions import (DEFAULT_THRESHOLDS_MHZ, TYPE1, TYPE2, Collision, CollisionReport,
                         detect_collisions)
from .fidelity import (FidelityPoint, FidelitySeries, binomial_stderr, estimate_fidelity,
                       series_from_records)
from .fitting import (EXPONENTIAL, ZZ_OSCILLATION, FitResult, fit_exponential,
                      fit_zz_oscillation, jittered_grid, zz_model)
from .ghz import GhzStats, ghz_statistics
from .maps import FailureMap, delta_map, product_fidelity

__all__ = [
    "DEFAULT_THRESHOLDS_MHZ", "TYPE1", "TYPE2", "Collision", "CollisionReport",
    "detect_collisions", "FidelityPoint", "FidelitySeries", "binomial_stderr",
    "estimate_fidelity", "series_from_records", "EXPONENTIAL", "ZZ_OSCILLATION", "FitResult",
    "fit_exponential", "fit_zz_oscillation", "jittered_grid", "zz_model", "GhzStats",
    "ghz_statistics", "FailureMap", "delta_map", "product_fidelity",
]
