"""Exact maximal-operator experiments on finite non-doubling metric measure spaces."""

from .scalar import configure, precision_bits, scalar
from .core import Space, WeightedFunction, average, ball, lp_norm, weak_quasinorm
from .generators import (GenParams, build_first_gen, build_second_gen,
                         derive_sequences, glue, normalization_weights,
                         structural_ball, validate_params)
from .maximal import (maximal_centered, maximal_noncentered, rwt_functional,
                      weak_ratio)
from .experiments import (Report, dirac_rwt_check, exhaustive_rwt_max,
                          extremal_function, glue_consistency_check,
                          growth_table, rwt_search, strong11_check)

try:
    from . import _kernels  # compiled hot kernels

    HAVE_COMPILED_KERNELS = True
except ImportError:  # pragma: no cover
    _kernels = None
    HAVE_COMPILED_KERNELS = False

__version__ = "0.1.0"

__all__ = [
    "configure", "precision_bits", "scalar",
    "Space", "WeightedFunction", "average", "ball", "lp_norm", "weak_quasinorm",
    "GenParams", "build_first_gen", "build_second_gen", "derive_sequences",
    "glue", "normalization_weights", "structural_ball", "validate_params",
    "maximal_centered", "maximal_noncentered", "rwt_functional", "weak_ratio",
    "Report", "dirac_rwt_check", "exhaustive_rwt_max", "extremal_function",
    "glue_consistency_check", "growth_table", "rwt_search", "strong11_check",
    "HAVE_COMPILED_KERNELS",
]
