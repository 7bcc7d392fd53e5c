"""Polynomial graph filters, diffused-signal synthesis, and covariance
template estimation.

A steady-state diffusion of a white seed through a polynomial filter in
the shift has covariance H H^T, which is diagonalized by the shift's own
eigenvectors. Estimating the covariance from observed signals and taking
its eigenbasis therefore yields (noisy) spectral templates without ever
seeing the shift itself.

Signal batches draw their seeds from a Philox counter-based generator
keyed by the batch seed, so a batch is a pure function of
``(seed, n, m)`` and independent column streams can be derived by
counter offsets without changing results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import ShiftMatrix
from .spectral import (SpectralTemplates, TemplateSource, _as_matrix,
                       _is_degenerate, eig_symmetric)


@dataclass(frozen=True)
class FilterSpec:
    """Coefficients h of a polynomial filter sum_l h[l] * S^l."""

    coeffs: np.ndarray

    def __post_init__(self):
        h = np.atleast_1d(np.array(self.coeffs, dtype=float))
        if h.ndim != 1 or h.size < 1:
            raise ValueError("filter needs at least one coefficient")
        if not np.any(h):
            raise ValueError("filter must have at least one nonzero coefficient")
        if not np.all(np.isfinite(h)):
            raise ValueError("filter coefficients must be finite")
        h.setflags(write=False)
        object.__setattr__(self, "coeffs", h)

    @property
    def length(self) -> int:
        return self.coeffs.size


@dataclass(frozen=True)
class SignalBatch:
    """N x M matrix whose columns are individual graph signals."""

    data: np.ndarray

    def __post_init__(self):
        x = np.array(self.data, dtype=float)
        if x.ndim != 2 or x.shape[1] < 1:
            raise ValueError("signal batch must be a 2-d array with at least one column")
        if not np.all(np.isfinite(x)):
            raise ValueError("signal batch entries must be finite")
        x.setflags(write=False)
        object.__setattr__(self, "data", x)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def m(self) -> int:
        return self.data.shape[1]


def _as_filter(h) -> FilterSpec:
    return h if isinstance(h, FilterSpec) else FilterSpec(np.asarray(h, dtype=float))


def apply_filter(s, h, x) -> np.ndarray:
    """Apply the polynomial filter to a signal (or a matrix of columns).

    Horner evaluation: L-1 shift applications, no matrix powers formed.
    """
    mat = s.data if isinstance(s, ShiftMatrix) else np.asarray(s, dtype=float)
    spec = _as_filter(h)
    x = np.asarray(x, dtype=float)
    if x.shape[0] != mat.shape[0]:
        raise ValueError(f"signal has {x.shape[0]} rows, shift expects {mat.shape[0]}")
    coeffs = spec.coeffs
    y = coeffs[-1] * x
    for l in range(spec.length - 2, -1, -1):
        y = mat @ y + coeffs[l] * x
    return y


def synthesize_diffused(s, h, m: int, seed: int) -> SignalBatch:
    """Diffuse ``m`` i.i.d. standard-normal seed signals through the filter."""
    if m < 1:
        raise ValueError("need at least one signal")
    mat = s.data if isinstance(s, ShiftMatrix) else np.asarray(s, dtype=float)
    rng = np.random.Generator(np.random.Philox(key=seed))
    seeds = rng.standard_normal((mat.shape[0], int(m)))
    return SignalBatch(apply_filter(mat, h, seeds))


def sample_covariance(batch: SignalBatch) -> np.ndarray:
    """(1/M) sum of x_m x_m^T over the batch columns; symmetric PSD."""
    x = batch.data
    c = (x @ x.T) / batch.m
    return 0.5 * (c + c.T)


def templates_from_covariance(c, eps: float = 0.0) -> SpectralTemplates:
    """Spectral templates estimated as the eigenvectors of a covariance.

    ``eps`` is the caller's per-entry slack on the shift reconstruction;
    eps > 0 marks the templates as noisy. Rejects matrices that are not
    PSD beyond a -1e-8 eigenvalue.
    """
    a = _as_matrix(c)
    if eps < 0:
        raise ValueError("eps must be >= 0")
    dec = eig_symmetric(a)
    if dec.values[0] < -1e-8:
        raise ValueError(f"covariance not positive semidefinite (min eigenvalue {dec.values[0]:.3e})")
    return SpectralTemplates(
        dec.vectors,
        noisy=eps > 0,
        epsilon=float(eps),
        source=TemplateSource.SAMPLE_COVARIANCE,
        degenerate=_is_degenerate(dec.values, a),
    )


def match_columns(v_est, v_ref) -> tuple[np.ndarray, np.ndarray]:
    """Greedy max-|inner-product| assignment of estimated to reference columns.

    Returns (perm, signs) such that v_est[:, perm] * signs best aligns
    with v_ref column by column. Resolves the permutation/sign gauge for
    error metrics only; recovery itself never needs an alignment.
    """
    v_est = np.asarray(v_est, dtype=float)
    v_ref = np.asarray(v_ref, dtype=float)
    if v_est.shape != v_ref.shape:
        raise ValueError("column matching needs equally shaped bases")
    n = v_ref.shape[1]
    corr = np.abs(v_ref.T @ v_est)  # corr[i, j] = |<ref_i, est_j>|
    perm = np.full(n, -1, dtype=int)
    used = np.zeros(n, dtype=bool)
    order = np.argsort(-corr, axis=None)
    assigned = 0
    for flat in order:
        i, j = divmod(int(flat), n)
        if perm[i] == -1 and not used[j]:
            perm[i] = j
            used[j] = True
            assigned += 1
            if assigned == n:
                break
    signs = np.sign(np.sum(v_ref * v_est[:, perm], axis=0))
    signs[signs == 0] = 1.0
    return perm, signs
