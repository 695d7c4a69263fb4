# mc_sim/__init__.py

from .chain import (
    DiversitySample,
    conditional_block_chain,
    empirical_diversity,
    empirical_unconditional_diversity,
    enumerate_new_block_paths,
    finite_m_mean,
    new_block_counts,
    new_block_distribution,
)
from .goodness import (
    block_count_goodness,
    chain_vs_rejection,
    chi_square_equivalence,
    empirical_moments,
    ks_statistic,
    moment_report,
)
from .partitions import PartitionState, grow_partition, grow_partitions, rejection_new_blocks

__all__ = [
    "PartitionState",
    "grow_partition",
    "grow_partitions",
    "rejection_new_blocks",
    "DiversitySample",
    "conditional_block_chain",
    "new_block_counts",
    "empirical_diversity",
    "empirical_unconditional_diversity",
    "new_block_distribution",
    "enumerate_new_block_paths",
    "finite_m_mean",
    "ks_statistic",
    "empirical_moments",
    "moment_report",
    "chi_square_equivalence",
    "block_count_goodness",
    "chain_vs_rejection",
]
