"""Dense linear-program solver.

Primal-dual interior-point method (Mehrotra predictor-corrector) on the
homogeneous self-dual embedding of

    minimize    c'x
    subject to  a_eq x  = b_eq
                a_in x <= b_in
                lower <= x <= upper      (+-inf allowed, default free)

The embedding certifies infeasibility and unboundedness: a Farkas-type
certificate is returned instead of inferring failure from stalled
iterations. Each Newton step reduces to normal equations in the
variable space, solved with dense Cholesky factorizations (plus a Schur
complement for the equality multipliers) and iterative refinement.

Ties between optimal solutions are resolved toward the interior of the
optimal face (the interior-point limit approximates its analytic
center), which keeps downstream reweighting schemes stable and makes
the returned point invariant under variable permutations.

Solver instances share no state; concurrent solves are safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

DEFAULT_TOL = 1e-8
DEFAULT_MAXITER = 200
_STEP_SCALE = 0.99
_REG_LADDER = (0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4)


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class LinearProgram:
    """Problem data; dimensions are validated at construction."""

    c: np.ndarray
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    a_in: np.ndarray | None = None
    b_in: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        c = np.atleast_1d(np.array(self.c, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("objective must be a nonempty vector")
        if not np.all(np.isfinite(c)):
            raise ValueError("objective coefficients must be finite")
        n = c.size

        def _pair(a, b, name):
            if a is None and b is None:
                return np.zeros((0, n)), np.zeros(0)
            if a is None or b is None:
                raise ValueError(f"{name}: matrix and right-hand side must be given together")
            a = np.atleast_2d(np.array(a, dtype=float))
            b = np.atleast_1d(np.array(b, dtype=float))
            if a.shape[1] != n or a.shape[0] != b.size or b.ndim != 1:
                raise ValueError(f"{name}: inconsistent shapes {a.shape} vs {b.shape} for n={n}")
            if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
                raise ValueError(f"{name}: entries must be finite")
            return a, b

        a_eq, b_eq = _pair(self.a_eq, self.b_eq, "equalities")
        a_in, b_in = _pair(self.a_in, self.b_in, "inequalities")

        def _bound(v, default):
            if v is None:
                return np.full(n, default)
            arr = np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy()
            return arr

        lower = _bound(self.lower, -np.inf)
        upper = _bound(self.upper, np.inf)
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ValueError("bounds must not be NaN")

        for name, arr in (("c", c), ("a_eq", a_eq), ("b_eq", b_eq), ("a_in", a_in),
                          ("b_in", b_in), ("lower", lower), ("upper", upper)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.c.size


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: np.ndarray | None
    objective: float | None
    dual_objective: float | None
    iterations: int
    residuals: dict = field(default_factory=dict)
    certificate: dict | None = None


def dump_program(prob: LinearProgram) -> str:
    """Plain-text fixed-column dump of the program for offline inspection.

    One section per block; every coefficient printed as a right-aligned
    24-character %.16e field, one constraint per line.
    """

    def _row(vals):
        return "".join(f"{v:>24.16e}" for v in vals)

    lines = [f"variables {prob.n}"]
    lines.append("objective")
    lines.append(_row(prob.c))
    lines.append(f"equalities {prob.a_eq.shape[0]}")
    for row, rhs in zip(prob.a_eq, prob.b_eq):
        lines.append(_row(row) + " | " + _row([rhs]))
    lines.append(f"inequalities {prob.a_in.shape[0]}")
    for row, rhs in zip(prob.a_in, prob.b_in):
        lines.append(_row(row) + " | " + _row([rhs]))
    lines.append("lower")
    lines.append(_row(prob.lower))
    lines.append("upper")
    lines.append(_row(prob.upper))
    return "\n".join(lines) + "\n"


def _fold_bounds(prob: LinearProgram) -> tuple[np.ndarray, np.ndarray]:
    """Append finite bounds to the inequality block as +-identity rows."""
    n = prob.n
    blocks_a = [prob.a_in]
    blocks_b = [prob.b_in]
    fin_u = np.where(np.isfinite(prob.upper))[0]
    if fin_u.size:
        rows = np.zeros((fin_u.size, n))
        rows[np.arange(fin_u.size), fin_u] = 1.0
        blocks_a.append(rows)
        blocks_b.append(prob.upper[fin_u])
    fin_l = np.where(np.isfinite(prob.lower))[0]
    if fin_l.size:
        rows = np.zeros((fin_l.size, n))
        rows[np.arange(fin_l.size), fin_l] = -1.0
        blocks_a.append(rows)
        blocks_b.append(-prob.lower[fin_l])
    return np.vstack(blocks_a), np.concatenate(blocks_b)


class _KktSolver:
    """Factor the reduced KKT system [H A'; A 0] with H = G' W^-1 G.

    Small static regularization makes the Cholesky factors exist even
    when H is singular on the nullspace of G; two rounds of iterative
    refinement against the unregularized system remove the bias.
    """

    def __init__(self, g: np.ndarray, winv: np.ndarray, a: np.ndarray):
        self.g = g
        self.winv = winv
        self.a = a
        self.h = (g * winv[:, None]).T @ g
        n = self.h.shape[0]
        scale = max(float(np.max(np.abs(self.h))), 1.0)
        err: Exception | None = None
        for reg in _REG_LADDER:
            try:
                self.h_fac = cho_factor(self.h + (reg * scale + 1e-300) * np.eye(n),
                                         lower=True, check_finite=False)
                if a.shape[0]:
                    ht_at = cho_solve(self.h_fac, a.T, check_finite=False)
                    schur = a @ ht_at
                    sscale = max(float(np.max(np.abs(schur))), 1.0)
                    self.s_fac = cho_factor(schur + (reg * sscale + 1e-300) * np.eye(a.shape[0]),
                                            lower=True, check_finite=False)
                else:
                    self.s_fac = None
                return
            except LinAlgError as exc:
                err = exc
        raise LinAlgError("KKT factorization failed at every regularization level") from err

    def _raw(self, r1: np.ndarray, r2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        t = cho_solve(self.h_fac, r1, check_finite=False)
        if self.s_fac is None:
            return t, r2[:0]
        dy = cho_solve(self.s_fac, self.a @ t - r2, check_finite=False)
        dx = cho_solve(self.h_fac, r1 - self.a.T @ dy, check_finite=False)
        return dx, dy

    def solve(self, u1: np.ndarray, u2: np.ndarray, u3: np.ndarray):
        """Solve the 3x3 block system for (dx, dy, dz)."""
        r1 = u1 + self.g.T @ (self.winv * u3)
        dx, dy = self._raw(r1, u2)
        for _ in range(2):
            e1 = r1 - (self.h @ dx + self.a.T @ dy)
            e2 = u2 - self.a @ dx
            cx, cy = self._raw(e1, e2)
            dx = dx + cx
            dy = dy + cy
        dz = self.winv * (self.g @ dx - u3)
        return dx, dy, dz


def _max_step(v: np.ndarray, dv: np.ndarray) -> float:
    neg = dv < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def _solve_without_cone(prob: LinearProgram, tol: float) -> LpSolution:
    """No inequalities and no finite bounds: pure equality-constrained LP."""
    a, b, c = prob.a_eq, prob.b_eq, prob.c
    if a.shape[0] == 0:
        if np.max(np.abs(c)) == 0.0:
            return LpSolution(LpStatus.OPTIMAL, np.zeros(prob.n), 0.0, 0.0, 0,
                              {"primal": 0.0, "dual": 0.0, "gap": 0.0})
        return LpSolution(LpStatus.UNBOUNDED, None, None, None, 0,
                          {"ray_objective": -float(np.linalg.norm(c))},
                          certificate={"x": -c})
    x0, *_ = np.linalg.lstsq(a, b, rcond=None)
    r = b - a @ x0
    if np.max(np.abs(r), initial=0.0) > tol * (1.0 + np.max(np.abs(b), initial=0.0)):
        y = -r / np.dot(b, r)  # b'y = -1, A'y ~ 0
        return LpSolution(LpStatus.INFEASIBLE, None, None, None, 0,
                          {"farkas_residual": float(np.max(np.abs(a.T @ y)))},
                          certificate={"y": y, "z": np.zeros(0)})
    y, *_ = np.linalg.lstsq(a.T, -c, rcond=None)
    rd = c + a.T @ y
    if np.max(np.abs(rd)) > tol * (1.0 + np.max(np.abs(c))):
        return LpSolution(LpStatus.UNBOUNDED, None, None, None, 0,
                          {"ray_objective": -float(np.dot(c, rd))},
                          certificate={"x": -rd})
    obj = float(np.dot(c, x0))
    return LpSolution(LpStatus.OPTIMAL, x0, obj, obj, 0,
                      {"primal": float(np.max(np.abs(r), initial=0.0)), "dual": 0.0, "gap": 0.0})


def lp_solve(prob: LinearProgram, *, tol: float = DEFAULT_TOL,
             maxiter: int = DEFAULT_MAXITER, debug_dump=None) -> LpSolution:
    """Solve a linear program; deterministic for fixed input.

    Returns an LpSolution whose status is Optimal, Infeasible (with a
    Farkas certificate y, z satisfying a_eq'y + G'z = 0, z >= 0 and
    b'y + h'z = -1), Unbounded (with an improving ray), or
    NumericalFailure when the iteration limit is hit without a verdict.
    """
    if debug_dump is not None:
        with open(debug_dump, "w", encoding="utf-8") as fh:
            fh.write(dump_program(prob))

    g, h = _fold_bounds(prob)
    if g.shape[0] == 0:
        return _solve_without_cone(prob, tol)
    a, b, c = prob.a_eq, prob.b_eq, prob.c
    n, p, m = prob.n, a.shape[0], g.shape[0]

    res_c = max(1.0, float(np.max(np.abs(c))))
    res_b = max(1.0, float(np.max(np.abs(b), initial=0.0)))
    res_h = max(1.0, float(np.max(np.abs(h))))

    x = np.zeros(n)
    y = np.zeros(p)
    z = np.ones(m)
    s = np.ones(m)
    tau, kappa = 1.0, 1.0
    tiny_steps = 0
    pres = dres = relgap = mu = np.inf

    for it in range(maxiter):
        rd = a.T @ y + g.T @ z + c * tau
        rp = a @ x - b * tau
        rg = g @ x + s - h * tau
        rk = float(np.dot(c, x) + np.dot(b, y) + np.dot(h, z) + kappa)
        mu = (np.dot(s, z) + tau * kappa) / (m + 1)

        # Optimality at the normalized point.
        pres = max(
            float(np.max(np.abs(rp), initial=0.0)) / (tau * res_b),
            float(np.max(np.abs(rg))) / (tau * res_h),
        )
        dres = float(np.max(np.abs(rd))) / (tau * res_c)
        pobj = float(np.dot(c, x)) / tau
        dobj = -(float(np.dot(b, y)) + float(np.dot(h, z))) / tau
        comp = float(np.dot(s, z)) / tau**2
        relgap = max(abs(pobj - dobj), comp) / (1.0 + abs(pobj) + abs(dobj))
        if pres <= tol and dres <= tol and relgap <= tol:
            return LpSolution(
                LpStatus.OPTIMAL, x / tau, pobj, dobj, it,
                {
                    "primal": max(float(np.max(np.abs(rp), initial=0.0)),
                                  float(np.max(np.abs(rg)))) / tau,
                    "dual": float(np.max(np.abs(rd))) / tau,
                    "gap": abs(pobj - dobj),
                    "complementarity": comp,
                    "dual_y": y / tau,
                    "dual_z": z / tau,
                },
            )

        # Certified infeasibility / unboundedness.
        xi = -(float(np.dot(b, y)) + float(np.dot(h, z)))
        if xi > tol:
            farkas = float(np.max(np.abs(a.T @ (y / xi) + g.T @ (z / xi)))) / res_c
            if farkas <= tol:
                return LpSolution(
                    LpStatus.INFEASIBLE, None, None, None, it,
                    {"farkas_residual": farkas, "farkas_gap": -1.0},
                    certificate={"y": y / xi, "z": z / xi},
                )
        zeta = -float(np.dot(c, x))
        if zeta > tol:
            ray = x / zeta
            ray_res = max(
                float(np.max(np.abs(a @ ray), initial=0.0)) / res_b,
                float(np.max(np.abs(g @ ray + s / zeta))) / res_h,
            )
            if ray_res <= tol:
                return LpSolution(
                    LpStatus.UNBOUNDED, None, None, None, it,
                    {"ray_residual": ray_res, "ray_objective": -1.0},
                    certificate={"x": ray},
                )

        if not np.isfinite(mu) or mu <= 0.0:
            break

        try:
            kkt = _KktSolver(g, z / s, a)
        except LinAlgError:
            break
        q1 = kkt.solve(-c, b, h)
        phi1 = float(np.dot(c, q1[0]) + np.dot(b, q1[1]) + np.dot(h, q1[2]))

        def _direction(gamma, ds_target, dk_target):
            eta = 1.0 - gamma
            u3 = -eta * rg - ds_target / z
            q2 = kkt.solve(-eta * rd, -eta * rp, u3)
            phi2 = float(np.dot(c, q2[0]) + np.dot(b, q2[1]) + np.dot(h, q2[2]))
            dtau = (-eta * rk - dk_target / tau - phi2) / (phi1 - kappa / tau)
            dx = q2[0] + dtau * q1[0]
            dy = q2[1] + dtau * q1[1]
            dz = q2[2] + dtau * q1[2]
            ds = (ds_target - s * dz) / z
            dkappa = (dk_target - kappa * dtau) / tau
            return dx, dy, dz, ds, dtau, dkappa

        # Predictor.
        dxa, dya, dza, dsa, dta, dka = _direction(0.0, -s * z, -tau * kappa)
        alpha_aff = min(
            1.0,
            _max_step(s, dsa),
            _max_step(z, dza),
            (-tau / dta) if dta < 0 else np.inf,
            (-kappa / dka) if dka < 0 else np.inf,
        )
        mu_aff = (np.dot(s + alpha_aff * dsa, z + alpha_aff * dza)
                  + (tau + alpha_aff * dta) * (kappa + alpha_aff * dka)) / (m + 1)
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3))

        # Corrector.
        dx, dy, dz, ds, dt, dk = _direction(
            sigma,
            sigma * mu - s * z - dsa * dza,
            sigma * mu - tau * kappa - dta * dka,
        )
        alpha = min(
            1.0,
            _STEP_SCALE * min(
                _max_step(s, ds),
                _max_step(z, dz),
                (-tau / dt) if dt < 0 else np.inf,
                (-kappa / dk) if dk < 0 else np.inf,
            ),
        )
        if not np.isfinite(alpha) or alpha <= 1e-13:
            tiny_steps += 1
            if tiny_steps >= 3:
                break
        else:
            tiny_steps = 0
        x = x + alpha * dx
        y = y + alpha * dy
        z = np.maximum(z + alpha * dz, 1e-300)
        s = np.maximum(s + alpha * ds, 1e-300)
        tau = max(tau + alpha * dt, 1e-300)
        kappa = max(kappa + alpha * dk, 1e-300)

    return LpSolution(
        LpStatus.NUMERICAL_FAILURE, None, None, None, maxiter,
        {"primal": pres, "dual": dres, "gap": relgap, "mu": mu},
    )
