"""Symmetric fixed-point FastICA on whitened data, skewness canonicalization
and the Amari index used to score source recovery."""

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError, NumericError
from .whitening import covariance


@dataclass(frozen=True)
class IcaConfig:
    nonlinearity: str = "logcosh"
    alpha: float = 1.0
    max_iter: int = 200
    tol: float = 1e-4
    seed: int = 0


@dataclass(frozen=True)
class IcaResult:
    rotation: np.ndarray    # R, (d, d) orthogonal; S = Z @ R
    components: np.ndarray  # S, (n, d)
    skewness: np.ndarray    # per column of `components`
    order: np.ndarray       # display axis -> column
    signs: np.ndarray       # +-1 per column, already applied
    iterations: int
    converged: bool

    def display_components(self):
        """Components with columns in display (descending skewness) order."""
        return self.components[:, self.order]

    def display_rotation(self):
        return self.rotation[:, self.order]


def _g_logcosh(u, alpha):
    t = np.tanh(alpha * u)
    return t, alpha * (1.0 - t * t)


def _g_cube(u, alpha):
    return u ** 3, 3.0 * u * u


_NONLINEARITIES = {"logcosh": _g_logcosh, "cube": _g_cube}


def symmetric_decorrelation(w, floor=1e-12):
    """W <- (W W^T)^(-1/2) W via eigendecomposition."""
    evals, evecs = np.linalg.eigh(w @ w.T)
    evals = np.maximum(evals, floor)
    return (evecs / np.sqrt(evals)) @ evecs.T @ w


def random_orthogonal(d, rng):
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    s = np.sign(np.diag(r))
    s[s == 0] = 1.0
    return q * s


def skewness(s):
    """Standardized third moment per column, 1/n normalization."""
    s = np.asarray(s, dtype=np.float64)
    c = s - s.mean(axis=0)
    m2 = np.mean(c * c, axis=0)
    m3 = np.mean(c * c * c, axis=0)
    out = np.zeros_like(m2)
    ok = m2 > 0
    out[ok] = m3[ok] / m2[ok] ** 1.5
    return out


def fit_ica(z, cfg=None, canonical=True):
    cfg = cfg or IcaConfig()
    if cfg.nonlinearity not in _NONLINEARITIES:
        raise ValueError(f"unknown nonlinearity {cfg.nonlinearity!r}")
    if cfg.max_iter < 1 or cfg.tol <= 0:
        raise ValueError("max_iter must be >= 1 and tol > 0")
    z = np.asarray(z, dtype=np.float64)
    n, d = z.shape
    dev = np.max(np.abs(covariance(z) - np.eye(d)))
    if dev > 1e-3:
        raise DataError(f"input is not white: covariance deviates from identity by {dev:.3g}")

    g = _NONLINEARITIES[cfg.nonlinearity]
    rng = np.random.default_rng(cfg.seed)
    w = symmetric_decorrelation(random_orthogonal(d, rng))
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        y = z @ w.T
        gy, dgy = g(y, cfg.alpha)
        w_new = (gy.T @ z) / n - dgy.mean(axis=0)[:, None] * w
        w_new = symmetric_decorrelation(w_new)
        lim = np.max(np.abs(np.abs(np.einsum("ij,ij->i", w_new, w)) - 1.0))
        w = w_new
        if lim < cfg.tol:
            converged = True
            break
    if not np.all(np.isfinite(w)):
        raise NumericError("FastICA iterate became non-finite")
    if not converged:
        warnings.warn(f"FastICA did not converge in {cfg.max_iter} iterations")

    rotation = w.T
    comps = z @ rotation
    res = IcaResult(rotation, comps, skewness(comps), np.arange(d), np.ones(d),
                    it, converged)
    return canonicalize(res) if canonical else res


def canonicalize(r):
    skew = skewness(r.components)
    flip = np.where(skew < 0, -1.0, 1.0)
    order = np.argsort(-(skew * flip), kind="stable")
    return replace(r, rotation=r.rotation * flip, components=r.components * flip,
                   skewness=skew * flip, order=order, signs=r.signs * flip)


def amari_index(p, q):
    """Normalized Amari index of P = pinv(q) @ p, in [0, 1]; zero iff P is a
    scaled permutation."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError("amari_index needs two square matrices of equal size")
    n = p.shape[0]
    if np.linalg.matrix_rank(q) < n:
        raise NumericError("q is singular")
    a = np.abs(np.linalg.pinv(q) @ p)
    if n == 1:
        return 0.0
    rows = np.sum(a.sum(axis=1) / a.max(axis=1) - 1.0)
    cols = np.sum(a.sum(axis=0) / a.max(axis=0) - 1.0)
    return float((rows + cols) / (2.0 * n * (n - 1)))
