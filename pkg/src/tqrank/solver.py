"""ADMM completion solver with fixed or adaptively refreshed transforms.

Given observed entries Y on a mask, the solver splits the recovery as
X + E = Y with E supported off the mask, and iterates

  1. refresh Q from the right singular vectors of Y - E + Z/mu
     (adaptive mode only, every K-th iteration; fixed mode never refreshes)
  2. X  <- prox of (1/mu) * q_nuclear_norm at Y - E + Z/mu
  3. E  <- off-mask part of Y - X + Z/mu
  4. Z  <- Z + mu * (Y - X - E)
  5. mu <- min(rho * mu, mu_max)

starting from X = E = Z = 0 and Q = identity columns.  Convergence
requires all three infinity-norm residuals (feasibility, X step, E step)
to fall below eps in the same iteration.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .orth import check_orthonormal, identity_q, right_singular_basis
from .qnorm import _prox_unfolded, q_nuclear_norm
from .tensor3 import fold3, unfold3, validate_tensor

# orthonormality tolerance for transforms supplied from outside
FIXED_Q_TOL = 1e-6


@dataclass
class SolverConfig:
    rho: float = 1.1
    mu0: float = 1e-4
    mu_max: float = 1e10
    eps: float = 1e-8
    K: int = 1
    r: int | None = None  # None means min(n1*n2, n3) at solve time
    max_iters: int = 500
    q_mode: str = "adaptive"  # "adaptive" or "fixed"
    q_fixed: np.ndarray | None = None
    seed: int = 0

    def validate(self):
        if not self.rho > 1:
            raise ValueError(f"rho must exceed 1, got {self.rho}")
        if not 0 < self.mu0 <= self.mu_max:
            raise ValueError(f"need 0 < mu0 <= mu_max, got mu0={self.mu0}, mu_max={self.mu_max}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.r is not None and self.r < 1:
            raise ValueError(f"r must be >= 1, got {self.r}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.q_mode not in ("adaptive", "fixed"):
            raise ValueError(f"q_mode must be 'adaptive' or 'fixed', got {self.q_mode!r}")
        if self.q_mode == "fixed" and self.q_fixed is None:
            raise ValueError("q_mode 'fixed' requires q_fixed")


@dataclass
class SolverReport:
    """Per-run diagnostics.

    The three residual lists share one entry per iteration.  q_drift holds
    the projector change ||Q_k Q_k^T - Q_{k-1} Q_{k-1}^T||_F at each
    refresh (empty for fixed transforms).  objectives traces the
    q-nuclear norm of each iterate under that iteration's transform;
    res_feas_fro and res_e_fro mirror res_feas and res_e in the
    Frobenius norm.  e_omega_max is the largest on-mask magnitude of the
    final E (zero by construction).
    """

    iterations: int = 0
    res_feas: list = field(default_factory=list)
    res_x: list = field(default_factory=list)
    res_e: list = field(default_factory=list)
    mu_final: float = 0.0
    q_drift: list = field(default_factory=list)
    converged: bool = False
    objectives: list = field(default_factory=list)
    res_feas_fro: list = field(default_factory=list)
    res_e_fro: list = field(default_factory=list)
    e_omega_max: float = 0.0
    q_final: np.ndarray | None = None


def _mu_at(cfg, k):
    # mu after k growth steps; exact closed form, not an iterated product
    return min(cfg.mu0 * cfg.rho ** k, cfg.mu_max)


def admm_complete(y, mask, cfg):
    """Complete a partially observed tensor; returns (X, SolverReport).

    y must be zero off the mask (i.e. y = project_omega(y, mask)).
    """
    y = validate_tensor(y)
    if mask.dims != y.shape:
        raise ValueError(f"mask dims {mask.dims} do not match tensor dims {y.shape}")
    cfg.validate()
    n1, n2, n3 = y.shape
    rmax = min(n1 * n2, n3)

    y3 = unfold3(y)
    m3 = np.reshape(mask.values, (n1 * n2, n3), order="F")
    if np.any(y3[~m3] != 0.0):
        raise ValueError("input has nonzero entries off the mask; project it first")

    adaptive = cfg.q_mode == "adaptive"
    if adaptive:
        r = rmax if cfg.r is None else cfg.r
        if not 1 <= r <= rmax:
            raise ValueError(f"need 1 <= r <= min(n1*n2, n3) = {rmax}, got r={r}")
        q = identity_q(n3, r)
    else:
        q = check_orthonormal(cfg.q_fixed, tol=FIXED_Q_TOL)
        if q.shape[0] != n3:
            raise ValueError(f"fixed transform has {q.shape[0]} rows, expected n3={n3}")
        r = q.shape[1]

    x3 = np.zeros_like(y3)
    e3 = np.zeros_like(y3)
    z3 = np.zeros_like(y3)
    proj = q @ q.T

    report = SolverReport()
    for k in range(1, cfg.max_iters + 1):
        mu = _mu_at(cfg, k - 1)
        t3 = y3 - e3 + z3 / mu
        if adaptive and (k - 1) % cfg.K == 0:
            q_new = right_singular_basis(t3, r)
            proj_new = q_new @ q_new.T
            report.q_drift.append(float(np.linalg.norm(proj_new - proj)))
            q, proj = q_new, proj_new
        x3_new, objective = _prox_unfolded(t3, q, 1.0 / mu, n1, n2)
        e3_new = np.where(m3, 0.0, y3 - x3_new + z3 / mu)
        gap = y3 - x3_new - e3_new
        z3 = z3 + mu * gap

        report.res_feas.append(float(np.max(np.abs(gap))))
        report.res_x.append(float(np.max(np.abs(x3_new - x3))))
        report.res_e.append(float(np.max(np.abs(e3_new - e3))))
        report.res_feas_fro.append(float(np.linalg.norm(gap)))
        report.res_e_fro.append(float(np.linalg.norm(e3_new - e3)))
        report.objectives.append(objective)
        x3, e3 = x3_new, e3_new

        if report.res_feas[-1] <= cfg.eps and report.res_x[-1] <= cfg.eps \
                and report.res_e[-1] <= cfg.eps:
            report.converged = True
            break

    report.iterations = len(report.res_feas)
    report.mu_final = _mu_at(cfg, report.iterations)
    report.e_omega_max = float(np.max(np.abs(e3[m3]))) if m3.any() else 0.0
    report.q_final = q
    return fold3(x3, (n1, n2, n3)), report


def fixed_q_complete(y, mask, q, cfg):
    """admm_complete with the transform pinned to q for every iteration."""
    return admm_complete(y, mask, replace(cfg, q_mode="fixed", q_fixed=q))


def objective_value(x, q):
    """q-nuclear norm of an iterate, exposed for monitoring."""
    return q_nuclear_norm(x, q)
