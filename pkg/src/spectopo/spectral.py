"""Symmetric eigendecomposition and spectral-template analysis.

The eigensolver is a cyclic Jacobi iteration (round-robin pivot ordering,
rotations in each round act on disjoint index pairs and are applied
vectorized). Output is deterministic: eigenvalues ascending, each
eigenvector's largest-magnitude entry made positive, ties broken by
lowest index.

On top of it: the graph Fourier transform, polynomial filter frequency
responses, the entrywise-squared template matrix whose nullspace governs
recovery uniqueness, and identification of the degree eigenvector (the
only template column with single-signed entries on a connected graph).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .graphs import ShiftKind, ShiftMatrix

JACOBI_TOL = 1e-12     # off-diagonal Frobenius norm, relative to ||m||_F
JACOBI_MAX_SWEEPS = 100
DEGENERATE_GAP_RTOL = 1e-6  # eigenvalue gap below this times max|entry| flags a degenerate spectrum


class TemplateSource(str, Enum):
    EXACT = "exact"
    SAMPLE_COVARIANCE = "sample_covariance"
    OPERATOR_EIGENBASIS = "operator_eigenbasis"


class DegreeEigenvectorError(ValueError):
    """Zero or multiple single-signed template columns: the degree
    eigenvector cannot be identified (disconnected graph or corrupted
    templates)."""


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvectors as columns."""

    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class SpectralTemplates:
    """Orthonormal eigenvector matrix used as input to shift recovery.

    Column signs are a free gauge: flipping any column sign yields
    equivalent templates, and everything downstream is invariant to it.
    ``degenerate`` marks templates whose generating matrix had eigenvalue
    gaps below 1e-6 times its largest entry; the eigenbasis is then not
    unique and uniqueness claims are suppressed downstream.
    """

    v: np.ndarray
    noisy: bool = False
    epsilon: float = 0.0
    source: TemplateSource = TemplateSource.EXACT
    degenerate: bool = False

    def __post_init__(self):
        v = np.array(self.v, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"template matrix must be square, got shape {v.shape}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        tol = 1e-9 if self.source == TemplateSource.EXACT else 1e-6
        gram_err = np.max(np.abs(v.T @ v - np.eye(v.shape[0])))
        if gram_err > tol:
            raise ValueError(f"template columns not orthonormal (error {gram_err:.2e} > {tol:.0e})")
        v.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @property
    def n(self) -> int:
        return self.v.shape[0]


def _as_matrix(m) -> np.ndarray:
    if isinstance(m, ShiftMatrix):
        return np.asarray(m.data, dtype=float)
    out = np.asarray(m, dtype=float)
    if out.ndim != 2 or out.shape[0] != out.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {out.shape}")
    return out


def _round_robin_rounds(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Tournament schedule covering all index pairs once, with the pairs of
    each round pairwise disjoint (so their rotations commute)."""
    pad = n + (n % 2)
    players = list(range(pad))
    rounds = []
    for _ in range(pad - 1):
        p = []
        q = []
        for i in range(pad // 2):
            a, b = players[i], players[pad - 1 - i]
            if a < n and b < n:  # drop the bye of an odd-sized schedule
                p.append(min(a, b))
                q.append(max(a, b))
        rounds.append((np.array(p, dtype=int), np.array(q, dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def eig_symmetric(m, *, sym_tol: float = 1e-10) -> EigenDecomposition:
    """Jacobi eigendecomposition of a symmetric matrix.

    Converges when the off-diagonal Frobenius norm drops below
    1e-12 times the Frobenius norm of the input, within at most 100
    sweeps. The input must be symmetric within ``sym_tol`` per entry.
    """
    a = _as_matrix(m)
    if np.max(np.abs(a - a.T), initial=0.0) > sym_tol:
        raise ValueError(f"matrix not symmetric within {sym_tol:.0e}")
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return EigenDecomposition(np.array([a[0, 0]]), v)
    a = 0.5 * (a + a.T)
    fro = np.linalg.norm(a)
    if fro == 0.0:
        return EigenDecomposition(np.zeros(n), v)
    threshold = JACOBI_TOL * fro
    rounds = _round_robin_rounds(n)

    def _off_norm(mat: np.ndarray) -> float:
        # Direct sum over off-diagonal entries; the norm(a)^2 - norm(diag)^2
        # shortcut cancels catastrophically near convergence.
        return float(np.sqrt(np.sum((mat - np.diag(np.diag(mat))) ** 2)))

    converged = False
    for _ in range(JACOBI_MAX_SWEEPS):
        if _off_norm(a) <= threshold:
            converged = True
            break
        for p, q in rounds:
            apq = a[p, q]
            active = apq != 0.0
            if not np.any(active):
                continue
            tau = np.zeros_like(apq)
            tau[active] = (a[q, q][active] - a[p, p][active]) / (2.0 * apq[active])
            t = np.empty_like(tau)
            big = np.abs(tau) > 1e100  # asymptotic angle, avoids tau*tau overflow
            t[big] = 0.5 / tau[big]
            tm = tau[~big]
            t[~big] = 1.0 / (tm + np.copysign(np.sqrt(1.0 + tm * tm), tm))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            c[~active] = 1.0
            s[~active] = 0.0
            # Rotation on disjoint pairs: rows, then columns, then the basis.
            cs = c[:, None]
            ss = s[:, None]
            ap, aq = a[p, :], a[q, :]
            a[p, :] = cs * ap - ss * aq
            a[q, :] = ss * ap + cs * aq
            ap, aq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = ap * c - aq * s
            a[:, q] = ap * s + aq * c
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = vp * c - vq * s
            v[:, q] = vp * s + vq * c
        a = 0.5 * (a + a.T)
    if not converged and _off_norm(a) > threshold:
        raise RuntimeError(f"Jacobi iteration did not converge in {JACOBI_MAX_SWEEPS} sweeps")

    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    values = values[order]
    v = v[:, order]
    # Deterministic gauge: largest-|entry| of each column positive,
    # ties resolved by argmax's lowest-index rule.
    pivot = np.argmax(np.abs(v), axis=0)
    signs = np.where(v[pivot, np.arange(n)] < 0.0, -1.0, 1.0)
    v = v * signs
    return EigenDecomposition(values, v)


def _is_degenerate(values: np.ndarray, matrix: np.ndarray) -> bool:
    if values.size < 2:
        return False
    scale = np.max(np.abs(matrix))
    if scale == 0.0:
        return True
    return bool(np.min(np.diff(np.sort(values))) < DEGENERATE_GAP_RTOL * scale)


def templates_from_shift(m) -> SpectralTemplates:
    """Exact spectral templates: the eigenvectors of a known shift."""
    a = _as_matrix(m)
    dec = eig_symmetric(a)
    return SpectralTemplates(dec.vectors, source=TemplateSource.EXACT,
                             degenerate=_is_degenerate(dec.values, a))


def templates_from_operator(b) -> SpectralTemplates:
    """Templates taken from the eigenbasis of a prescribed symmetric
    network operator; any shift diagonalized by them implements that
    operator as a polynomial filter."""
    a = _as_matrix(b)
    dec = eig_symmetric(a)
    return SpectralTemplates(dec.vectors, source=TemplateSource.OPERATOR_EIGENBASIS,
                             degenerate=_is_degenerate(dec.values, a))


def gft(templates: SpectralTemplates, x) -> np.ndarray:
    """Graph Fourier transform: project a signal onto the template basis."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != templates.n:
        raise ValueError(f"signal has {x.shape[0]} entries, templates expect {templates.n}")
    return templates.v.T @ x


def freq_response(h, values) -> np.ndarray:
    """Evaluate polynomial filter coefficients at each eigenvalue.

    Entry k is sum_l h[l] * values[k]**l (Vandermonde product).
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 1 or h.size < 1:
        raise ValueError("filter coefficients must be a nonempty vector")
    lam = np.asarray(values, dtype=float)
    vand = np.vander(lam, N=h.size, increasing=True)
    return vand @ h


def build_w(templates: SpectralTemplates, mode: ShiftKind, d=None) -> np.ndarray:
    """Entrywise square of the (mode-adjusted) template matrix.

    Column k is the diagonal of v_k v_k^T, so for any feasible shift the
    diagonal constraints become linear equations on the eigenvalues; the
    nullspace dimension of this matrix decides recovery uniqueness.
    Laplacian modes move the identified degree eigenvector to column 0
    and replace it: by the all-ones vector (normalized Laplacian) or by
    the degree vector itself (combinatorial Laplacian, ``d`` required).
    """
    mode = ShiftKind(mode)
    v = templates.v
    if mode == ShiftKind.ADJACENCY:
        return v * v
    if mode not in (ShiftKind.NORMALIZED_LAPLACIAN, ShiftKind.COMBINATORIAL_LAPLACIAN):
        raise ValueError(f"no squared-template matrix defined for mode {mode!r}")
    if mode == ShiftKind.COMBINATORIAL_LAPLACIAN:
        if d is None:
            raise ValueError("combinatorial Laplacian mode requires the degree vector d")
        first = np.asarray(d, dtype=float)
        if first.shape != (templates.n,):
            raise ValueError("degree vector has wrong shape")
    else:
        first = np.ones(templates.n)
    k = find_degree_eigenvector(templates)
    rest = np.delete(v, k, axis=1)
    vt = np.column_stack([first, rest])
    return vt * vt


def nullspace_dim(m, tol_rel: float | None = None) -> int:
    """Number of singular values at or below ``tol_rel`` times the largest.

    Computed from the eigenvalues of m^T m. Default tolerance is 1e-8*N,
    scaled with size to absorb accumulated roundoff.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise ValueError("expected a matrix")
    if not np.any(a):
        raise ValueError("nullspace dimension undefined for the all-zero matrix")
    if tol_rel is None:
        tol_rel = 1e-8 * a.shape[1]
    gram = a.T @ a
    sing = np.sqrt(np.clip(eig_symmetric(0.5 * (gram + gram.T)).values, 0.0, None))
    return int(np.sum(sing <= tol_rel * sing[-1]))


def find_degree_eigenvector(templates: SpectralTemplates, *, zero_tol: float = 1e-9) -> int:
    """Index of the unique template column whose entries all share one
    strict sign (entries with magnitude <= ``zero_tol`` are ignored).

    For the normalized Laplacian of a connected graph this is the
    degree eigenvector sqrt(d); for the combinatorial Laplacian it is
    the constant eigenvector.
    """
    v = templates.v
    candidates = []
    for k in range(v.shape[1]):
        col = v[:, k]
        kept = col[np.abs(col) > zero_tol]
        if kept.size == 0:
            continue
        if np.all(kept > 0) or np.all(kept < 0):
            candidates.append(k)
    if len(candidates) != 1:
        raise DegreeEigenvectorError(
            f"expected exactly one single-signed template column, found {len(candidates)}"
        )
    return candidates[0]
