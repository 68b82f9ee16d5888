"""Python interface to the icme engine.

Structured values are plain dicts and lists; bins are keys such as "3-4-0".
"""

import json

from . import _icme
from ._icme import ActionRejected, welch_greater

__all__ = ["ActionRejected", "Session", "run_benchmark", "welch_greater"]


class Session:
    """One interactive constrained MAP-Elites session."""

    def __init__(self, config=None, _handle=None):
        self._s = _handle if _handle is not None else _icme.Session(json.dumps(config or {}))

    @classmethod
    def load(cls, state):
        return cls(_handle=_icme.Session.load(json.dumps(state)))

    def save(self):
        return json.loads(self._s.save())

    @property
    def iteration(self):
        return self._s.iteration

    @property
    def fi2pop_updates(self):
        return self._s.fi2pop_updates

    def config(self):
        return json.loads(self._s.config())

    def occupied_bins(self):
        return list(self._s.occupied_bins())

    def user_step(self, bin):
        return json.loads(self._s.user_step(bin))

    def random_step(self):
        return json.loads(self._s.random_step())

    def reinitialise(self):
        self._s.reinitialise()

    def apply_config_patch(self, patch):
        self._s.apply_config_patch(json.dumps(patch))

    def choose_favourite(self, bin):
        self._s.choose_favourite(bin)

    def study(self):
        return json.loads(self._s.study())

    def grid(self):
        return json.loads(self._s.grid())

    def solution(self, bin, interior=False):
        return json.loads(self._s.solution(bin, interior))

    def export(self, bin):
        return json.loads(self._s.export(bin))

    def metrics(self):
        return json.loads(self._s.metrics())

    def metrics_csv(self):
        return self._s.metrics_csv()


def run_benchmark(settings):
    """Runs a benchmark configuration; returns (summary dict, per-run CSV)."""
    summary, runs_csv = _icme.run_benchmark(json.dumps(settings))
    return json.loads(summary), runs_csv
