"""Output-stage power losses of multichannel stimulators under supply strategies."""

import json as _json

from ._stimloss import (  # noqa: F401
    ChannelEntry,
    ChannelLoss,
    ComplianceViolation,
    ConfigError,
    InsufficientChannels,
    KdeModel,
    SamplingInfeasible,
    InvalidArgument,
    StimlossError,
    ValidationError,
    efficiency,
    fit_kde,
    load_dataset_summary,
    loss_fixed,
    loss_global,
    loss_ideal,
    loss_stepped,
    make_rails,
    median_iqr_to_mean_sd,
    quantile,
    sample_kde,
    sample_trunc_normal,
)
from . import _stimloss

DEFAULT_STRATEGIES = ("fixed", "global", "stepped:2", "stepped:4", "stepped:8", "ideal")


def run(config, seed=0, yield_=0.75, n_repeats=1000, population_size=100000,
        strategies=DEFAULT_STRATEGIES, yield_sweep=(), workers=1):
    """Run the full pipeline on a dataset config and return the report tree."""
    text = _stimloss._run_json(str(config), seed, yield_, n_repeats, population_size,
                               list(strategies), list(yield_sweep), workers)
    return _json.loads(text)
