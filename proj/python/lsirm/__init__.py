"""Bayesian latent space item response models."""

import json

import numpy as np

from . import _core
from ._core import InputError, NumericError, UsageError, distance, procrustes

__all__ = [
    "InputError",
    "NumericError",
    "UsageError",
    "Fit",
    "distance",
    "fit",
    "log_likelihood",
    "procrustes",
    "select",
    "simulate",
]


def _responses(data):
    """Coerce to an int matrix with -1 for missing cells (NaN or None allowed)."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2:
        raise InputError("responses must be a 2-D array")
    out = np.where(np.isnan(arr), -1, arr).astype(np.int32)
    return out


def simulate(scenario="rasch", n=200, items=14, seed=1, n_random=0, gamma=1.7, dim=2, boost=2.0):
    """Return (responses, truth) for a synthetic scenario."""
    data, truth = _core.simulate(scenario, n, items, seed, n_random, gamma, dim, boost)
    return np.asarray(data), json.loads(truth)


def log_likelihood(data, alpha, beta, respondents=None, items=None, gamma=1.0,
                   kernel="distance", metric="l2"):
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if respondents is None:
        respondents = np.zeros((alpha.size, 0))
    if items is None:
        items = np.zeros((beta.size, 0))
    return _core.log_likelihood(_responses(data), alpha, beta, np.asarray(respondents, float),
                                np.asarray(items, float), gamma, kernel, metric)


class Fit:
    """Posterior fit with aligned draws."""

    def __init__(self, handle):
        self._handle = handle
        self.summary = json.loads(handle.summary_json())

    def ppc(self, replications=10000, seed=1):
        return json.loads(self._handle.ppc_json(replications, seed))

    def trace(self, name):
        return np.asarray(self._handle.trace(name))

    def log_posterior(self):
        return np.asarray(self._handle.log_posterior())


def fit(data, kernel="distance", metric="l2", dim=2, iters=20000, burnin=10000, thin=10,
        chains=3, seed=1, gamma_fixed=None, threads=1):
    return Fit(_core.fit(_responses(data), kernel, metric, dim, iters, burnin, thin, chains, seed,
                         gamma_fixed, threads))


def select(data, metric="l2", dim=2, iters=10000, burnin=5000, chains=3, seed=1, threads=1):
    """Spike-and-slab choice between the Rasch model and the latent space model."""
    return json.loads(_core.select(_responses(data), metric, dim, iters, burnin, chains, seed,
                                   threads))
