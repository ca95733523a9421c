"""Chung-Lu networks of unstable nodes: Lyapunov spectra, dichotomies and campaigns.

Parameter and result records are plain dicts with the same keys as the JSON
configs and reports written by the ``heterodyn`` command-line tool.
"""

import json

import numpy as np

from . import _core
from ._core import (
    GAMMA_THRESHOLD,
    THETA_THRESHOLD,
    BlowUpError,
    Graph,
    InfeasibleError,
    complete_graph,
    graph,
    lambda_max,
    laplacian,
    sample_graph,
    star_graph,
)

__all__ = [
    "GAMMA_THRESHOLD",
    "THETA_THRESHOLD",
    "BlowUpError",
    "Graph",
    "InfeasibleError",
    "audit_hypotheses",
    "build_sequence",
    "check_concentration",
    "complete_graph",
    "concentration_campaign",
    "constant_drift",
    "fit_dichotomy",
    "fixed_graph_sweep",
    "graph",
    "lambda_max",
    "lambda_max_campaign",
    "laplacian",
    "lyapunov_spectrum",
    "periodic_drift",
    "require_theorem_regime",
    "sample_graph",
    "stable_dimension",
    "star_graph",
    "windows",
]


def _enc(obj):
    return json.dumps(obj if obj is not None else {})


def _matrix(H, d):
    if H is None:
        return np.eye(d)
    return np.atleast_2d(np.asarray(H, dtype=float))


def constant_drift(d=1, a=1.0):
    return {"kind": "constant", "d": d, "a": a}


def periodic_drift(d, a, eps, omega=None):
    return {"kind": "periodic", "d": d, "a": a, "eps": eps, "omega": list(omega or [])}


def build_sequence(params, n, w_max):
    return _core._build_sequence(_enc(params), n, w_max)


def audit_hypotheses(params, weights):
    return json.loads(_core._audit(_enc(params), list(weights)))


def require_theorem_regime(params):
    _core._require_theorem_regime(_enc(params))


def check_concentration(g, weights, params=None):
    return json.loads(_core._check_concentration(g, list(weights), "" if params is None else _enc(params)))


def lyapunov_spectrum(g, alpha, drift=None, H=None, k=0, horizon=100.0, reorth=0.5, burn_in=20.0,
                      step=0.0, tail="top", seed=0x5EED):
    drift = drift or constant_drift()
    return json.loads(_core._lyapunov(g, _enc(drift), _matrix(H, drift["d"]), alpha, k, horizon, reorth,
                                      burn_in, step, tail == "bottom", seed))


def stable_dimension(spectrum, gap_min=0.05):
    return json.loads(_core._stable_dimension(json.dumps(spectrum), gap_min))


def windows(params, n, drift=None, H=None, alpha=None, w_max=None):
    drift = drift or constant_drift()
    return json.loads(_core._windows(_enc(drift), _matrix(H, drift["d"]), _enc(params), n, alpha, w_max))


def fit_dichotomy(g, alpha, stable_dim, drift=None, H=None, horizon=20.0, points=12, burn_in=50.0):
    drift = drift or constant_drift()
    return json.loads(_core._fit(g, _enc(drift), _matrix(H, drift["d"]), alpha, stable_dim, horizon, points,
                                 burn_in))


def fixed_graph_sweep(g, alpha_grid, drift=None, H=None, spectrum=None, jobs=1):
    drift = drift or constant_drift()
    return json.loads(_core._fixed_graph_sweep(g, _enc(drift), _matrix(H, drift["d"]), list(alpha_grid),
                                               _enc(spectrum), jobs))


def concentration_campaign(params, n, w_max, trials=200, seed=1, jobs=1):
    return json.loads(_core._concentration_campaign(_enc(params), n, w_max, trials, seed, jobs))


def lambda_max_campaign(params, n, w_max, delta, trials=200, seed=1, jobs=1):
    return json.loads(_core._lambda_max_campaign(_enc(params), n, w_max, delta, trials, seed, jobs))
