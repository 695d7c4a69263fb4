# gibbs_weights/__init__.py

from .models import (
    Composition,
    GeneralizedGamma,
    GibbsModel,
    PoissonDirichlet,
    TabulatedTilt,
    tilt_mass,
)
from .special import incomplete_gamma_upper, log_incomplete_gamma_upper
from .table import (
    StirlingTable,
    WeightTable,
    block_count_distribution,
    build_weight_table,
    eppf,
    eppf_total,
    iter_set_partitions,
    log_eppf,
    mass_balance,
    predict_probs,
    stirling_table,
)
from .weights import (
    generic_weight,
    gg_weight_integral,
    gg_weight_sum,
    log_gg_sum,
    log_weight,
    pd_weight,
)

__all__ = [
    "GibbsModel",
    "PoissonDirichlet",
    "GeneralizedGamma",
    "TabulatedTilt",
    "Composition",
    "tilt_mass",
    "incomplete_gamma_upper",
    "log_incomplete_gamma_upper",
    "pd_weight",
    "gg_weight_integral",
    "gg_weight_sum",
    "log_gg_sum",
    "generic_weight",
    "log_weight",
    "WeightTable",
    "build_weight_table",
    "StirlingTable",
    "stirling_table",
    "block_count_distribution",
    "eppf",
    "log_eppf",
    "eppf_total",
    "predict_probs",
    "mass_balance",
    "iter_set_partitions",
]
