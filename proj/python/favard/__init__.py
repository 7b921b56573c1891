"""Favard length, visibility and transversality estimators."""

import csv
import io
import json

from . import _favard
from ._favard import FavardError, experiment_ids, experiment_target, fit_decay, set_thread_count, thread_count

__all__ = [
    "FavardError",
    "experiment_ids",
    "experiment_target",
    "favard_minkowski",
    "fit_decay",
    "generate",
    "riesz_energy",
    "run_experiment",
    "set_thread_count",
    "thread_count",
]

_FOUR_CORNER = {"kind": "four-corner", "q": 4}


def run_experiment(config):
    """Run an experiment from a config dict; returns (rows, csv_text, metadata)."""
    csv_text, metadata = _favard.run_experiment_json(json.dumps(config))
    rows = list(csv.DictReader(io.StringIO(csv_text)))
    return rows, csv_text, json.loads(metadata)


def generate(n, set=None):
    """Cell set of generation n as {dim, side, anchors}."""
    return json.loads(_favard.generate_json(json.dumps(set or _FOUR_CORNER), n))


def riesz_energy(n, s=1.0, quadrature_order=4, set=None):
    return _favard.riesz_energy(json.dumps(set or _FOUR_CORNER), n, s, quadrature_order)


def favard_minkowski(n, pitch, curve=None, set=None):
    curve = curve or {"curve": "parabola"}
    return json.loads(_favard.favard_minkowski(json.dumps(curve), json.dumps(set or _FOUR_CORNER), n, pitch))
