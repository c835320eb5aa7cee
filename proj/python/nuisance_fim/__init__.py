"""Fisher information with nuisance parameters: Python bindings to the nfim C++ library."""

import json

from ._core import (
    ConfigError,
    NfimError,
    __version__,
    approx_fim,
    conditional_fim,
    loewner_leq,
    marginal_fim,
    normalize_config,
    num_threads,
    oracle_fims,
    psd_check,
    set_num_threads,
    verify_inequality,
    zoo_ids,
)
from ._core import run_study as _run_study


def run_study(study, config_text, seed=None):
    """Run a study ("verify", "bayes", "approx" or "scaling") and return the parsed report."""
    return json.loads(_run_study(study, config_text, seed))


__all__ = [
    "ConfigError",
    "NfimError",
    "__version__",
    "approx_fim",
    "conditional_fim",
    "loewner_leq",
    "marginal_fim",
    "normalize_config",
    "num_threads",
    "oracle_fims",
    "psd_check",
    "run_study",
    "set_num_threads",
    "verify_inequality",
    "zoo_ids",
]
