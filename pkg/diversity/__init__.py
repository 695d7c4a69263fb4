# diversity/__init__.py

from .checks import beta_mixture_check, empirical_chf, ratio_law_check, sample_conditional
from .conditional import (
    ConditionalDensity,
    ConditioningState,
    GGConditionalDensity,
    conditional_mass,
    conditional_pdf,
    gg_conditional_pdf,
    gtilde_pdf,
    normalizer_by_quadrature,
    pd_conditional_pdf,
    unconditional_pdf,
)
from .grids import (
    tabulate_conditional,
    tabulate_for_model,
    tabulate_gg_conditional,
    tabulate_gtilde,
    tabulate_pd_conditional,
    tabulate_unconditional,
)
from .moments import (
    ChfPartialSum,
    MomentSequence,
    chf_partial_sum,
    grid_moments,
    gtilde_moment,
    pd_conditional_moment,
    pd_conditional_moments,
    pd_expected_new_blocks,
)

__all__ = [
    "ConditioningState",
    "ConditionalDensity",
    "GGConditionalDensity",
    "gtilde_pdf",
    "conditional_pdf",
    "unconditional_pdf",
    "pd_conditional_pdf",
    "gg_conditional_pdf",
    "normalizer_by_quadrature",
    "conditional_mass",
    "MomentSequence",
    "ChfPartialSum",
    "pd_conditional_moment",
    "pd_conditional_moments",
    "gtilde_moment",
    "grid_moments",
    "chf_partial_sum",
    "pd_expected_new_blocks",
    "tabulate_gtilde",
    "tabulate_pd_conditional",
    "tabulate_gg_conditional",
    "tabulate_conditional",
    "tabulate_unconditional",
    "tabulate_for_model",
    "ratio_law_check",
    "beta_mixture_check",
    "sample_conditional",
    "empirical_chf",
]
