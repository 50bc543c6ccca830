"""PCA whitening with 1/n covariance normalization."""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericError


@dataclass(frozen=True)
class WhiteningModel:
    mean: np.ndarray         # (d,)
    map: np.ndarray          # (d, k), the whitening matrix A
    eigenvalues: np.ndarray  # (k,), descending
    directions: np.ndarray   # (d, k), unit principal directions

    @property
    def d(self):
        return self.map.shape[0]

    @property
    def k(self):
        return self.map.shape[1]


def _as_array(x):
    return np.asarray(getattr(x, "vectors", x), dtype=np.float64)


def _fix_signs(vecs):
    """Flip each column so its largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def covariance(x):
    xc = x - x.mean(axis=0)
    return xc.T @ xc / x.shape[0]


def fit_whitening(x, k=None, eps=1e-10):
    x = _as_array(x)
    n, d = x.shape
    if n <= 1:
        raise DataError(f"need at least 2 rows to whiten, got {n}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    k = d if k is None else int(k)
    if not 1 <= k < n or k > d:
        raise DataError(f"retained dimension k={k} must satisfy 1 <= k <= d={d} and k < n={n}")

    mean = x.mean(axis=0)
    evals, evecs = np.linalg.eigh(covariance(x))
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    if evals[0] <= 0:
        raise NumericError("centered data has zero variance")
    rank = int(np.sum(evals > eps * evals[0]))
    if k > rank:
        warnings.warn(f"only {rank} eigenvalues above the floor; reducing k from {k} to {rank}")
        k = rank
    evals, evecs = evals[:k], _fix_signs(evecs[:, :k])
    a = evecs / np.sqrt(evals)
    return WhiteningModel(mean, a, evals, evecs)


def _check_dim(model, x):
    if x.ndim != 2 or x.shape[1] != model.d:
        raise DataError(f"input has {x.shape[-1]} columns, model expects {model.d}")


def apply_whitening(model, x):
    x = _as_array(x)
    _check_dim(model, x)
    return (x - model.mean) @ model.map


def pca_view(model, x):
    """Centered coordinates on the principal directions, variance-sorted and
    not rescaled."""
    x = _as_array(x)
    _check_dim(model, x)
    return (x - model.mean) @ model.directions
