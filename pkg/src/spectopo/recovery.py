"""Shift-operator recovery from spectral templates.

Given an orthonormal eigenbasis, find the sparsest shift it
diagonalizes subject to the structural constraints of the requested
kind:

* adjacency: entries in [0,1] (convex hull of binary), zero diagonal,
  symmetric, every row sum >= 1 to rule out the zero matrix;
* normalized Laplacian: unit diagonal, off-diagonal in [-1,0], PSD,
  zero eigenvalue pinned on the identified degree eigenvector;
* combinatorial Laplacian: diagonal pinned to a supplied degree vector,
  off-diagonal in [-max(d), 0], PSD, zero eigenvalue on the constant
  eigenvector.

The cardinality objective is approximated by iteratively reweighted
l1 minimization with weights (|S_ij| + delta)^-1; every subproblem is
a linear program in the eigenvalues (the shift is an affine function
of them), solved by the interior-point engine in :mod:`spectopo.lp`.
Noisy templates relax the eigenbasis equation to an entrywise band of
half-width epsilon around a free symmetric matrix variable.

Uniqueness: the nullspace dimension Q of the entrywise-squared
template matrix always satisfies Q >= 1 on feasible instances, and
Q == 1 makes the feasible set a singleton, in which case the
continuous adjacency solution equals the truth divided by the minimum
node degree and binarization recovers it exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import ShiftKind, ShiftMatrix
from .lp import LinearProgram, LpSolution, LpStatus, lp_solve
from .spectral import SpectralTemplates, build_w, find_degree_eigenvector, nullspace_dim

STALL_TOL = 1e-8        # early stop when successive continuous iterates agree to this
SUPPORT_TOL = 1e-6      # entry magnitude counted as "in the support"
AUTO_EPS_STEPS = 20     # bisection steps of the automatic slack search
AUTO_EPS_MARGIN = 1.05  # solve at this multiple of the smallest feasible slack
_PROBE_TOL = 1e-6       # feasibility probes need no high-accuracy optimum

LAPLACIAN_MODES = (ShiftKind.NORMALIZED_LAPLACIAN, ShiftKind.COMBINATORIAL_LAPLACIAN)


class RecoveryError(RuntimeError):
    pass


class InfeasibleTemplatesError(RecoveryError):
    """The templates admit no shift of the requested kind (LP infeasible)."""


@dataclass(frozen=True)
class RecoveryConfig:
    """Knobs of the reweighted recovery.

    epsilon: None infers the slack from the templates (their declared
    epsilon when noisy, exact otherwise); the string "auto" searches for
    the smallest feasible slack by bisection over [0, 1] and solves at
    1.05x that value; a number fixes it.
    """

    mode: ShiftKind = ShiftKind.ADJACENCY
    delta: float = 1e-3
    max_reweight: int = 10
    rank_tol: float | None = None
    epsilon: float | str | None = None
    eta: float = 0.0
    binarize_threshold: float = 0.5

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.max_reweight < 1:
            raise ValueError("need at least one reweight iteration")
        if self.eta < 0:
            raise ValueError("eta must be >= 0")
        if not (0.0 < self.binarize_threshold < 1.0):
            raise ValueError("binarize_threshold must lie in (0, 1)")
        if isinstance(self.epsilon, str) and self.epsilon != "auto":
            raise ValueError(f"epsilon must be a number, None, or 'auto', got {self.epsilon!r}")
        if isinstance(self.epsilon, (int, float)) and self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        object.__setattr__(self, "mode", ShiftKind(self.mode))


@dataclass(frozen=True)
class RecoveryResult:
    mode: ShiftKind
    s_hat: ShiftMatrix
    s_continuous: np.ndarray
    lambda_hat: np.ndarray
    q: int
    unique: bool
    reweight_trace: list[float]
    support_trace: list[np.ndarray]
    epsilon: float
    d_min_estimate: int | None = None
    lambda_min: float | None = None
    degenerate_spectrum: bool = False

    def to_dict(self) -> dict:
        """JSON-friendly summary: mode, eigenvalues, uniqueness, edges."""
        a = self.s_hat.data
        edges = [[int(i), int(j)] for i, j in zip(*np.nonzero(np.triu(a, 1)))]
        return {
            "mode": self.mode.value,
            "lambda_hat": [float(v) for v in self.lambda_hat],
            "q": int(self.q),
            "unique": bool(self.unique),
            "d_min_estimate": None if self.d_min_estimate is None else int(self.d_min_estimate),
            "edges": edges,
            "reweight_trace": [float(v) for v in self.reweight_trace],
        }


def check_uniqueness(templates: SpectralTemplates, mode: ShiftKind, d=None,
                     rank_tol: float | None = None) -> tuple[int, bool]:
    """Nullspace dimension Q of the squared-template matrix and whether
    the feasible set is a singleton (Q == 1)."""
    w = build_w(templates, mode, d=d)
    q = nullspace_dim(w, rank_tol)
    return q, q == 1


def edge_error(a_true: ShiftMatrix, a_hat: ShiftMatrix) -> float:
    """Fraction of misidentified edges: differing entries over the
    nonzero count of the truth, both over the full symmetric matrix."""
    if a_true.kind != ShiftKind.ADJACENCY or a_hat.kind != ShiftKind.ADJACENCY:
        raise ValueError("edge_error compares adjacency matrices")
    if a_true.n != a_hat.n:
        raise ValueError("size mismatch")
    nnz = int(np.sum(a_true.data != 0))
    if nnz == 0:
        raise ValueError("true adjacency has no edges")
    return float(np.sum(a_true.data != a_hat.data)) / nnz


def _binarize(s_cont: np.ndarray, theta: float) -> tuple[ShiftMatrix, float]:
    s_max = float(np.max(s_cont))
    if s_max <= 1e-9:
        raise RecoveryError("recovered shift is numerically zero; nothing to binarize")
    a = (s_cont >= theta * s_max).astype(float)
    np.fill_diagonal(a, 0.0)
    a = np.maximum(a, a.T)
    return ShiftMatrix(ShiftKind.ADJACENCY, a), s_max


def rescale_and_binarize(result: RecoveryResult, cfg: RecoveryConfig) -> ShiftMatrix:
    """Threshold a continuous adjacency recovery at theta times its largest
    entry. On singleton instances the continuous solution is the truth
    scaled by 1/d_min, so any threshold fraction in (0,1) is exact."""
    if result.mode != ShiftKind.ADJACENCY:
        raise ValueError("rescale_and_binarize applies to adjacency recoveries")
    shift, _ = _binarize(result.s_continuous, cfg.binarize_threshold)
    return shift


def laplacian_to_adjacency(s, kind: ShiftKind, theta: float = 0.5) -> ShiftMatrix:
    """Edge set of a recovered Laplacian-kind matrix as a binary adjacency.

    Thresholds off-diagonal magnitudes at theta times the smallest edge
    weight the kind allows: 1/(N-1) for the normalized Laplacian (an
    edge between two degree-(N-1) nodes), 1 for the combinatorial one.
    """
    mat = s.data if isinstance(s, ShiftMatrix) else np.asarray(s, dtype=float)
    kind = ShiftKind(kind)
    n = mat.shape[0]
    if kind == ShiftKind.NORMALIZED_LAPLACIAN:
        cut = theta / max(n - 1, 1)
    elif kind == ShiftKind.COMBINATORIAL_LAPLACIAN:
        cut = theta
    else:
        raise ValueError(f"not a Laplacian kind: {kind!r}")
    off = np.abs(mat - np.diag(np.diag(mat)))
    a = (off >= cut).astype(float)
    a = np.maximum(a, a.T)
    return ShiftMatrix(ShiftKind.ADJACENCY, a)


def _pair_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, k=1)


def _adjacency_program(v: np.ndarray, pair_weights: np.ndarray, eps: float) -> LinearProgram:
    """LP of one reweighted iteration in adjacency mode.

    Exact mode (eps == 0): variables are the eigenvalues only, the shift
    being their affine image. Noisy mode adds the upper-triangle shift
    entries as variables inside the band |S_ij - (V diag(l) V')_ij| <= eps.
    """
    n = v.shape[0]
    iu, ju = _pair_index(n)
    t = v[iu] * v[ju]             # pair x eigenvalue map to off-diagonal entries
    w = v * v                     # node x eigenvalue map to diagonal entries
    colsum = v.sum(axis=0)
    r = v * colsum                # node x eigenvalue map to row sums
    npairs = iu.size
    if eps == 0.0:
        return LinearProgram(
            c=2.0 * (pair_weights @ t),
            a_eq=w, b_eq=np.zeros(n),
            a_in=np.vstack([-t, t, -r]),
            b_in=np.concatenate([np.zeros(npairs), np.ones(npairs), -np.ones(n)]),
        )
    inc = np.zeros((n, npairs))
    inc[iu, np.arange(npairs)] = 1.0
    inc[ju, np.arange(npairs)] = 1.0
    zl = np.zeros((npairs, n))
    eye = np.eye(npairs)
    a_in = np.vstack([
        np.hstack([-t, eye]),                      # S_ij - (map l)_ij <= eps
        np.hstack([t, -eye]),                      # (map l)_ij - S_ij <= eps
        np.hstack([w, np.zeros((n, npairs))]),     # |(map l)_ii| <= eps, S_ii = 0
        np.hstack([-w, np.zeros((n, npairs))]),
        np.hstack([np.zeros((n, n)), -inc]),       # row sums >= 1
    ])
    b_in = np.concatenate([
        np.full(npairs, eps), np.full(npairs, eps),
        np.full(n, eps), np.full(n, eps),
        -np.ones(n),
    ])
    lower = np.concatenate([np.full(n, -np.inf), np.zeros(npairs)])
    upper = np.concatenate([np.full(n, np.inf), np.ones(npairs)])
    return LinearProgram(
        c=np.concatenate([np.zeros(n), 2.0 * pair_weights]),
        a_in=a_in, b_in=b_in, lower=lower, upper=upper,
    )


def _laplacian_program(v2: np.ndarray, diag_rhs: np.ndarray, off_lb: float,
                       pair_weights: np.ndarray, eps: float, eta: float) -> LinearProgram:
    """LP of one reweighted iteration in a Laplacian mode.

    v2 holds the templates with the pinned zero-eigenvalue column
    removed; the remaining eigenvalues are constrained nonnegative,
    which is exactly positive semidefiniteness under an orthonormal
    basis. Off-diagonal entries obey off_lb <= S_ij <= 0, so |S_ij| is
    -S_ij and the weighted l1 objective is linear. eta > 0 appends a
    lambda_min variable maximized under lambda_min <= lambda_k.
    """
    n, nl = v2.shape
    iu, ju = _pair_index(n)
    t2 = v2[iu] * v2[ju]
    w2 = v2 * v2
    npairs = iu.size
    nvar = nl + (npairs if eps > 0 else 0) + (1 if eta > 0 else 0)

    def _pad(block: np.ndarray, col0: int) -> np.ndarray:
        out = np.zeros((block.shape[0], nvar))
        out[:, col0:col0 + block.shape[1]] = block
        return out

    c = np.zeros(nvar)
    rows = []
    rhs = []
    lower = np.full(nvar, -np.inf)
    upper = np.full(nvar, np.inf)
    lower[:nl] = 0.0  # PSD via nonnegative eigenvalues
    a_eq = b_eq = None
    if eps == 0.0:
        c[:nl] = -2.0 * (pair_weights @ t2)
        a_eq = _pad(w2, 0)
        b_eq = diag_rhs
        rows.append(_pad(t2, 0))          # S_ij <= 0
        rhs.append(np.zeros(npairs))
        rows.append(_pad(-t2, 0))         # S_ij >= off_lb
        rhs.append(np.full(npairs, -off_lb))
    else:
        sv0 = nl
        c[sv0:sv0 + npairs] = -2.0 * pair_weights
        lower[sv0:sv0 + npairs] = off_lb
        upper[sv0:sv0 + npairs] = 0.0
        eye = np.eye(npairs)
        band = np.zeros((npairs, nvar))
        band[:, :nl] = -t2
        band[:, sv0:sv0 + npairs] = eye
        rows.append(band)                 # S_ij - (map l)_ij <= eps
        rhs.append(np.full(npairs, eps))
        rows.append(-band)                # (map l)_ij - S_ij <= eps
        rhs.append(np.full(npairs, eps))
        rows.append(_pad(w2, 0))          # |S_ii - (map l)_ii| <= eps with S_ii fixed
        rhs.append(diag_rhs + eps)
        rows.append(_pad(-w2, 0))
        rhs.append(-(diag_rhs - eps))
    if eta > 0:
        lm = nvar - 1
        c[lm] = -eta
        mix = np.zeros((nl, nvar))
        mix[:, :nl] = -np.eye(nl)
        mix[:, lm] = 1.0                  # lambda_min <= lambda_k
        rows.append(mix)
        rhs.append(np.zeros(nl))
    return LinearProgram(
        c=c, a_eq=a_eq, b_eq=b_eq,
        a_in=np.vstack(rows), b_in=np.concatenate(rhs),
        lower=lower, upper=upper,
    )


def _reweight_solve(make_program, extract, n: int, cfg: RecoveryConfig):
    """Run the reweighted l1 loop; returns (solution, s_cont, trace, supports)."""
    iu, ju = _pair_index(n)
    weights = np.ones(iu.size)
    prev = None
    trace: list[float] = []
    supports: list[np.ndarray] = []
    sol = None
    s_cont = None
    for _ in range(cfg.max_reweight):
        prob = make_program(weights)
        sol = lp_solve(prob)
        if sol.status == LpStatus.INFEASIBLE:
            raise InfeasibleTemplatesError(
                "templates admit no shift of the requested kind under these constraints")
        if sol.status != LpStatus.OPTIMAL:
            raise RecoveryError(f"linear program ended with status {sol.status.value}")
        s_cont = extract(sol.x)
        trace.append(float(sol.objective))
        off = np.abs(s_cont[iu, ju])
        supports.append(off > SUPPORT_TOL)
        if prev is not None and np.max(np.abs(s_cont - prev)) < STALL_TOL:
            break
        prev = s_cont
        weights = 1.0 / (off + cfg.delta)
    return sol, s_cont, trace, supports


def _resolve_epsilon(templates: SpectralTemplates, cfg: RecoveryConfig, probe) -> float:
    if cfg.epsilon is None:
        return float(templates.epsilon) if templates.noisy else 0.0
    if cfg.epsilon == "auto":
        return _bisect_epsilon(probe)
    return float(cfg.epsilon)


def _bisect_epsilon(probe) -> float:
    """Smallest feasible slack by bisection over [0, 1], then a 5% margin.

    Feasibility is monotone in the slack, so 20 halvings pin it to about
    one part in a million of the unit interval.
    """
    if probe(0.0):
        return 0.0
    if not probe(1.0):
        raise InfeasibleTemplatesError("noisy recovery infeasible even at slack 1.0")
    lo, hi = 0.0, 1.0
    for _ in range(AUTO_EPS_STEPS):
        mid = 0.5 * (lo + hi)
        if probe(mid):
            hi = mid
        else:
            lo = mid
    return AUTO_EPS_MARGIN * hi


def recover_adjacency(templates: SpectralTemplates, cfg: RecoveryConfig) -> RecoveryResult:
    """Recover a binary adjacency matrix from spectral templates.

    Runs the reweighted scheme, then rescales and thresholds: on
    singleton instances (Q == 1) the continuous optimum is the true
    adjacency divided by its minimum degree, so the rounded reciprocal
    of the largest entry estimates d_min and thresholding at
    theta * max recovers the truth exactly.
    """
    if cfg.mode != ShiftKind.ADJACENCY:
        raise ValueError("config mode must be adjacency")
    v = templates.v
    n = templates.n
    if n < 2:
        raise ValueError("need at least two nodes")
    q, singleton = check_uniqueness(templates, ShiftKind.ADJACENCY, rank_tol=cfg.rank_tol)

    def probe(eps: float) -> bool:
        prob = _adjacency_program(v, np.ones(n * (n - 1) // 2), eps)
        zero_obj = LinearProgram(c=np.zeros(prob.n), a_eq=prob.a_eq, b_eq=prob.b_eq,
                                 a_in=prob.a_in, b_in=prob.b_in,
                                 lower=prob.lower, upper=prob.upper)
        return lp_solve(zero_obj, tol=_PROBE_TOL).status == LpStatus.OPTIMAL

    eps = _resolve_epsilon(templates, cfg, probe)
    iu, ju = _pair_index(n)

    if eps == 0.0:
        def extract(xvar):
            s = (v * xvar) @ v.T
            return 0.5 * (s + s.T)
    else:
        def extract(xvar):
            s = np.zeros((n, n))
            s[iu, ju] = xvar[n:]
            return s + s.T

    sol, s_cont, trace, supports = _reweight_solve(
        lambda wts: _adjacency_program(v, wts, eps), extract, n, cfg)
    lam = sol.x[:n].copy()
    binarized, s_max = _binarize(s_cont, cfg.binarize_threshold)
    return RecoveryResult(
        mode=ShiftKind.ADJACENCY,
        s_hat=binarized,
        s_continuous=s_cont,
        lambda_hat=lam,
        q=q,
        unique=singleton and not templates.degenerate,
        reweight_trace=trace,
        support_trace=supports,
        epsilon=eps,
        d_min_estimate=int(round(1.0 / s_max)),
        degenerate_spectrum=templates.degenerate,
    )


def recover_laplacian(templates: SpectralTemplates, cfg: RecoveryConfig,
                      d=None) -> RecoveryResult:
    """Recover a normalized or combinatorial Laplacian from templates.

    The single-signed template column is pinned as the zero-eigenvalue
    eigenvector; the remaining eigenvalues are nonnegative variables.
    The combinatorial mode needs the degree vector d for its diagonal.
    """
    if cfg.mode not in LAPLACIAN_MODES:
        raise ValueError("config mode must be a Laplacian kind")
    n = templates.n
    if n < 2:
        raise ValueError("need at least two nodes")
    if cfg.mode == ShiftKind.COMBINATORIAL_LAPLACIAN:
        if d is None:
            raise ValueError("combinatorial Laplacian recovery requires the degree vector d")
        d = np.asarray(d, dtype=float)
        if d.shape != (n,):
            raise ValueError("degree vector has wrong shape")
        diag_rhs = d
        off_lb = -float(np.max(d))
    else:
        diag_rhs = np.ones(n)
        off_lb = -1.0
    q, singleton = check_uniqueness(templates, cfg.mode, d=d, rank_tol=cfg.rank_tol)
    pin = find_degree_eigenvector(templates)
    v2 = np.delete(templates.v, pin, axis=1)
    iu, ju = _pair_index(n)
    npairs = iu.size

    def probe(eps: float) -> bool:
        prob = _laplacian_program(v2, diag_rhs, off_lb, np.ones(npairs), eps, 0.0)
        zero_obj = LinearProgram(c=np.zeros(prob.n), a_eq=prob.a_eq, b_eq=prob.b_eq,
                                 a_in=prob.a_in, b_in=prob.b_in,
                                 lower=prob.lower, upper=prob.upper)
        return lp_solve(zero_obj, tol=_PROBE_TOL).status == LpStatus.OPTIMAL

    eps = _resolve_epsilon(templates, cfg, probe)

    if eps == 0.0:
        def extract(xvar):
            s = (v2 * xvar[:n - 1]) @ v2.T
            return 0.5 * (s + s.T)
    else:
        def extract(xvar):
            s = np.zeros((n, n))
            s[iu, ju] = xvar[n - 1:n - 1 + npairs]
            s = s + s.T
            np.fill_diagonal(s, diag_rhs)
            return s

    sol, s_cont, trace, supports = _reweight_solve(
        lambda wts: _laplacian_program(v2, diag_rhs, off_lb, wts, eps, cfg.eta),
        extract, n, cfg)
    lam = np.zeros(n)
    scatter = [k for k in range(n) if k != pin]
    lam[scatter] = sol.x[:n - 1]
    return RecoveryResult(
        mode=cfg.mode,
        s_hat=ShiftMatrix(ShiftKind.GENERIC_SYMMETRIC, s_cont),
        s_continuous=s_cont,
        lambda_hat=lam,
        q=q,
        unique=singleton and not templates.degenerate,
        reweight_trace=trace,
        support_trace=supports,
        epsilon=eps,
        lambda_min=float(sol.x[-1]) if cfg.eta > 0 else None,
        degenerate_spectrum=templates.degenerate,
    )


def recover(templates: SpectralTemplates, cfg: RecoveryConfig, d=None) -> RecoveryResult:
    """Dispatch to the recovery matching cfg.mode."""
    if cfg.mode == ShiftKind.ADJACENCY:
        return recover_adjacency(templates, cfg)
    if cfg.mode in LAPLACIAN_MODES:
        return recover_laplacian(templates, cfg, d=d)
    raise ValueError(f"no recovery defined for mode {cfg.mode!r}")
