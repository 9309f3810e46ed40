"""Symmetry checks and Monte Carlo reconstruction for a catalog of SDEs.

Report functions return ``(exit_code, report)`` where ``report`` is the same
dictionary the command line tool writes as JSON.
"""

import json

from . import _stochsym
from ._stochsym import ConfigError, NumericError, models, oracle, run, version

__all__ = [
    "ConfigError",
    "NumericError",
    "models",
    "oracle",
    "reconstruct",
    "reduce",
    "run",
    "verify",
    "version",
]


def _decoded(result):
    code, text = result
    return code, json.loads(text)


def verify(model, **kwargs):
    return _decoded(_stochsym.verify(model, **kwargs))


def reduce(model, **kwargs):
    return _decoded(_stochsym.reduce(model, **kwargs))


def reconstruct(model, **kwargs):
    return _decoded(_stochsym.reconstruct(model, **kwargs))
