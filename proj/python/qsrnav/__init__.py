"""Guided navigation of a sensory-deprived agent with StarVars qualitative
spatial reasoning and particle filters."""

import json as _json

from ._qsrnav import (
    ConfigError,
    check_model,
    normalize_scenario,
    run_batch,
    run_episode,
    sector_of,
    welch_anova,
)

__all__ = [
    "ConfigError",
    "check_model",
    "load_scenario",
    "normalize_scenario",
    "run_batch",
    "run_episode",
    "sector_of",
    "welch_anova",
]


def load_scenario(path_or_dict):
    """Return the normalised JSON text of a scenario given as a file path or a dict."""
    if isinstance(path_or_dict, dict):
        text = _json.dumps(path_or_dict)
    else:
        with open(path_or_dict, encoding="utf-8") as f:
            text = f.read()
    return normalize_scenario(text)
