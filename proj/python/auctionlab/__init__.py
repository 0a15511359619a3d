"""Learned-auction laboratory.

Latency-driven bidder valuations, a two-network trained auction, classical
baselines (VCG, first/second price, reserve pricing), and held-out
revenue/rationality/regret evaluation. Configs cross the boundary as JSON
strings; outcomes come back as plain dicts and lists.
"""

from ._core import (
    ConfigError,
    DimensionError,
    DomainError,
    TrainingError,
    evaluate,
    exact_regret_grid,
    expected_revenue_mc,
    first_price,
    myerson,
    run_auction,
    sample_profiles,
    sample_records_csv,
    second_price,
    semantic_payload_bits,
    train,
    vcg,
    version,
)

__version__ = version()

__all__ = [
    "ConfigError",
    "DimensionError",
    "DomainError",
    "TrainingError",
    "evaluate",
    "exact_regret_grid",
    "expected_revenue_mc",
    "first_price",
    "myerson",
    "run_auction",
    "sample_profiles",
    "sample_records_csv",
    "second_price",
    "semantic_payload_bits",
    "train",
    "vcg",
    "version",
]
