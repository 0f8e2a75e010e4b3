"""Multi-task linear representation learning with de-biased, whitened alternating updates."""

import json

from ._core import (
    DfwError,
    Problem,
    amd_step,
    burnin_radius,
    dare,
    dfw_step,
    diversity_stats,
    dlyap,
    erm_schedule,
    imitation_problem,
    init_representation,
    oracle_step_size,
    orthonormalize_rows,
    random_rotation,
    regression_problem,
    run_training,
    sample_batch,
    subspace_distance,
    sysid_problem,
    transfer_finetune,
)
from ._core import presets as _presets
from ._core import run_experiment as _run_experiment


def presets():
    """The reference experiment configurations as dicts."""
    return [json.loads(p) for p in _presets()]


def run_experiment(config):
    """Run an experiment from a config dict; returns {variant: {mean, lower, upper}}."""
    return _run_experiment(json.dumps(config))


__all__ = [
    "DfwError",
    "Problem",
    "amd_step",
    "burnin_radius",
    "dare",
    "dfw_step",
    "diversity_stats",
    "dlyap",
    "erm_schedule",
    "imitation_problem",
    "init_representation",
    "oracle_step_size",
    "orthonormalize_rows",
    "presets",
    "random_rotation",
    "regression_problem",
    "run_experiment",
    "run_training",
    "sample_batch",
    "subspace_distance",
    "sysid_problem",
    "transfer_finetune",
]
