"""Batch nonconformity kernels over many simplex points at once.

These are the hot inner loops of credal-set materialization: a grid with
tens of thousands of points is scored against a single prediction for
every test instance. Each kernel exists in two versions, a numba
``@njit`` loop and a vectorized pure-numpy fallback. The active set is
chosen at import time: numba is used when importable unless the
environment variable ``CREDAL_NUMBA`` is set to ``0``. Both versions
compute identical values (no fastmath), so results never depend on the
path taken.

All kernels take a C-contiguous float64 ``points`` array of shape (M, K)
and return an (M,) float64 score vector.
"""

import os

import numpy as np

CLAMP = 1e-12


def _tv_loop(points, pred):
    m, k = points.shape
    out = np.empty(m)
    for i in range(m):
        s = 0.0
        for j in range(k):
            s += abs(points[i, j] - pred[j])
        out[i] = 0.5 * s
    return out


def _kl_loop(points, pred):
    m, k = points.shape
    out = np.empty(m)
    for i in range(m):
        s = 0.0
        for j in range(k):
            p = points[i, j]
            if p > 0.0:
                q = pred[j]
                if q < CLAMP:
                    q = CLAMP
                s += p * np.log(p / q)
        out[i] = s
    return out


def _ws_loop(points, pred):
    m, k = points.shape
    out = np.empty(m)
    for i in range(m):
        s = 0.0
        c = 0.0
        for j in range(k - 1):
            c += points[i, j] - pred[j]
            s += abs(c)
        out[i] = s
    return out


def _inner_loop(points, pred):
    m, k = points.shape
    out = np.empty(m)
    for i in range(m):
        s = 0.0
        for j in range(k):
            s += points[i, j] * pred[j]
        out[i] = 1.0 - s
    return out


def _so_loop(points, coeff, log_peak):
    # coeff[j] = theta[j] - 1; log_peak = sum_j coeff[j] * log(clamped mode[j])
    m, k = points.shape
    out = np.empty(m)
    for i in range(m):
        s = 0.0
        for j in range(k):
            p = points[i, j]
            if p < CLAMP:
                p = CLAMP
            s += coeff[j] * np.log(p)
        v = 1.0 - np.exp(s - log_peak)
        out[i] = v if v > 0.0 else 0.0
    return out


def _tv_numpy(points, pred):
    return 0.5 * np.abs(points - pred).sum(axis=1)


def _kl_numpy(points, pred):
    q = np.maximum(pred, CLAMP)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = points * np.log(points / q)
    terms[points <= 0.0] = 0.0
    return terms.sum(axis=1)


def _ws_numpy(points, pred):
    diff = np.cumsum(points - pred, axis=1)
    return np.abs(diff[:, :-1]).sum(axis=1)


def _inner_numpy(points, pred):
    return 1.0 - points @ pred


def _so_numpy(points, coeff, log_peak):
    logs = np.log(np.maximum(points, CLAMP))
    return np.maximum(0.0, 1.0 - np.exp(logs @ coeff - log_peak))


def _numba_enabled():
    if os.environ.get("CREDAL_NUMBA", "1") == "0":
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _numba_enabled()

if NUMBA_ENABLED:
    from numba import njit

    tv_scores_numba = njit(cache=True)(_tv_loop)
    kl_scores_numba = njit(cache=True)(_kl_loop)
    ws_scores_numba = njit(cache=True)(_ws_loop)
    inner_scores_numba = njit(cache=True)(_inner_loop)
    so_scores_numba = njit(cache=True)(_so_loop)

    tv_scores = tv_scores_numba
    kl_scores = kl_scores_numba
    ws_scores = ws_scores_numba
    inner_scores = inner_scores_numba
    so_scores = so_scores_numba
else:
    tv_scores_numba = None
    kl_scores_numba = None
    ws_scores_numba = None
    inner_scores_numba = None
    so_scores_numba = None

    tv_scores = _tv_numpy
    kl_scores = _kl_numpy
    ws_scores = _ws_numpy
    inner_scores = _inner_numpy
    so_scores = _so_numpy

tv_scores_numpy = _tv_numpy
kl_scores_numpy = _kl_numpy
ws_scores_numpy = _ws_numpy
inner_scores_numpy = _inner_numpy
so_scores_numpy = _so_numpy
