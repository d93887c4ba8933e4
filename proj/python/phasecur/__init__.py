"""Generalized phase-space distributions and the probability currents they induce."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import run_scenario as _run_scenario

__version__ = "0.1.0"


def run(config, out=None):
    """Run a scenario from a config dict; returns (all_pass, summary dict)."""
    ok, text = _run_scenario(_json.dumps(config), out)
    return ok, _json.loads(text)
