# stable_core/__init__.py

from .densities import (
    StableDensityTable,
    log_ml_pdf,
    log_stable_pdf,
    ml_moment,
    ml_pdf,
    stable_cdf,
    stable_pdf,
    stable_table,
    tilted_ml_pdf,
    tilted_stable_pdf,
)
from .density_grid import DensityGrid, moment_hull
from .errors import (
    ConfigError,
    DomainError,
    GibbsDivError,
    NumericError,
    PrecisionError,
    TableRangeError,
    TiltRangeError,
    VerificationFailure,
)
from .parameters import STANDARD, Alpha, StableConvention
from .random_stream import RandomStream
from .sampling import sample_stable, sample_tilted_ml, sample_tilted_stable

__all__ = [
    "Alpha",
    "StableConvention",
    "STANDARD",
    "RandomStream",
    "StableDensityTable",
    "stable_table",
    "stable_pdf",
    "log_stable_pdf",
    "stable_cdf",
    "ml_pdf",
    "log_ml_pdf",
    "tilted_ml_pdf",
    "tilted_stable_pdf",
    "ml_moment",
    "sample_stable",
    "sample_tilted_ml",
    "sample_tilted_stable",
    "DensityGrid",
    "moment_hull",
    "GibbsDivError",
    "DomainError",
    "TableRangeError",
    "NumericError",
    "PrecisionError",
    "TiltRangeError",
    "ConfigError",
    "VerificationFailure",
]
