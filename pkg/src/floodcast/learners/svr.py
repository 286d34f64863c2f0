"""Epsilon-insensitive support vector regression.

The dual is solved by SMO over the doubled variable vector (alpha,
alpha*) with maximal-violating-pair working-set selection; each sample's
box constraint is scaled by its weight, so zero-weight samples are
pinned at zero and cannot become support vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError, ValidationError
from .base import ColumnScaler, FittedModel, check_training_inputs, weight_fingerprint

POLY_ORDER_RANGE = (2.00, 2.97)


@dataclass(frozen=True)
class SvrSpec:
    box_constraint: float = 1.0
    epsilon: float = 0.1
    kernel: str = "polynomial"
    poly_order: float = 2.0

    def __post_init__(self):
        if self.box_constraint <= 0:
            raise ValidationError("box constraint must be positive")
        if self.epsilon < 0:
            raise ValidationError("epsilon must be nonnegative")
        if self.kernel not in ("linear", "polynomial"):
            raise ValidationError(f"unknown SVR kernel {self.kernel!r}")
        if self.kernel == "polynomial":
            lo, hi = POLY_ORDER_RANGE
            if not lo <= self.poly_order <= hi:
                raise ValidationError(
                    f"polynomial order must lie in [{lo}, {hi}], got {self.poly_order}"
                )


def kernel_matrix(a, b, kernel, poly_order):
    """Gram matrix between scaled row sets a and b."""
    dots = a @ b.T
    if kernel == "linear":
        return dots
    # scaled inputs are in [0, 1], so 1 + <u, v> >= 1 and a real power is safe
    return (1.0 + dots) ** poly_order


def smo_epsilon_svr(K, y, box, epsilon, tol=1e-6, max_iter=100_000):
    """Solve the weighted epsilon-SVR dual for a precomputed Gram matrix.

    SMO over the doubled (alpha, alpha*) vector with second-order
    working-set selection: the first index is the maximal KKT violator,
    the partner maximizes the guaranteed objective decrease.  Returns
    (beta, bias, iterations, kkt_gap) with beta_i = alpha_i - alpha*_i.
    Raises ConvergenceError when the maximal violation is still above tol
    after max_iter pair updates.
    """
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    box = np.asarray(box, dtype=np.float64)
    n = y.size

    sign = np.concatenate([np.ones(n), -np.ones(n)])
    linear = np.concatenate([epsilon - y, epsilon + y])
    cbox = np.concatenate([box, box])
    a = np.zeros(2 * n)
    grad = linear.copy()
    kdiag = np.diag(K).copy()
    diag = np.concatenate([kdiag, kdiag])

    it = 0
    gap = np.inf
    while True:
        up = ((sign > 0) & (a < cbox)) | ((sign < 0) & (a > 0))
        low = ((sign > 0) & (a > 0)) | ((sign < 0) & (a < cbox))
        neg_sg = -sign * grad
        if not (np.any(up) and np.any(low)):
            gap = 0.0
            break
        i = int(np.flatnonzero(up)[np.argmax(neg_sg[up])])
        m_up = neg_sg[i]
        low_idx = np.flatnonzero(low)
        gap = m_up - neg_sg[low_idx].min()
        if gap <= tol:
            break
        if it >= max_iter:
            raise ConvergenceError(
                f"SVR SMO did not converge in {max_iter} iterations (KKT gap {gap:.3e})",
                residual=gap,
            )
        ki_row = K[i % n]
        # second-order partner: maximize b^2 / quad over violating J
        b_vec = m_up - neg_sg[low_idx]
        violating = b_vec > 0
        cand = low_idx[violating]
        b_vec = b_vec[violating]
        quad_vec = diag[i] + diag[cand] - 2.0 * ki_row[cand % n]
        np.maximum(quad_vec, 1e-12, out=quad_vec)
        j = int(cand[np.argmax(b_vec * b_vec / quad_vec)])

        quad = diag[i] + diag[j] - 2.0 * K[i % n, j % n]
        if quad <= 0:
            quad = 1e-12
        d_i = -(grad[i] - sign[i] * sign[j] * grad[j]) / quad
        # feasible range for d_i from both boxes
        lo_i, hi_i = -a[i], cbox[i] - a[i]
        if sign[i] * sign[j] > 0:
            lo_j, hi_j = a[j] - cbox[j], a[j]
        else:
            lo_j, hi_j = -a[j], cbox[j] - a[j]
        d_i = min(max(d_i, max(lo_i, lo_j)), min(hi_i, hi_j))
        d_j = -sign[i] * sign[j] * d_i
        if d_i != 0.0:
            a[i] += d_i
            a[j] += d_j
            kj_row = K[j % n]
            tiled_i = np.concatenate([ki_row, ki_row])
            tiled_j = np.concatenate([kj_row, kj_row])
            grad += (sign * sign[i] * tiled_i) * d_i + (sign * sign[j] * tiled_j) * d_j
        it += 1

    free = (a > 0) & (a < cbox)
    neg_sg = -sign * grad
    if np.any(free):
        bias = float(neg_sg[free].mean())
    else:
        lo = neg_sg[up].max() if np.any(up) else -np.inf
        hi = neg_sg[low].min() if np.any(low) else np.inf
        if not np.isfinite(lo):
            bias = float(hi)
        elif not np.isfinite(hi):
            bias = float(lo)
        else:
            bias = float((lo + hi) / 2.0)
    beta = a[:n] - a[n:]
    return beta, bias, it, float(max(gap, 0.0))


def dual_objective(K, y, beta, epsilon):
    """Value of the minimized SVR dual at beta (for oracle comparisons)."""
    beta = np.asarray(beta, dtype=np.float64)
    return float(0.5 * beta @ K @ beta - y @ beta + epsilon * np.sum(np.abs(beta)))


class SvrModel(FittedModel):
    kind = "svm"

    def __init__(self, spec, scaler, sv_x, sv_beta, bias, schema, fingerprint,
                 diagnostics=None, dual=None, box=None):
        super().__init__(schema, fingerprint)
        self.spec = spec
        self.scaler = scaler
        self.sv_x = sv_x
        self.sv_beta = sv_beta
        self.bias = bias
        self.diagnostics = diagnostics or {}
        self.dual = dual  # full (alpha, alpha*) pair for audit
        self.box = box

    @property
    def n_features(self):
        return self.scaler.lo.size

    @property
    def n_support(self):
        return self.sv_beta.size

    def _predict(self, X):
        xs = self.scaler.transform(X)
        if self.sv_beta.size == 0:
            return np.full(X.shape[0], self.bias)
        k = kernel_matrix(xs, self.sv_x, self.spec.kernel, self.spec.poly_order)
        return k @ self.sv_beta + self.bias


def fit_svr(X, y, w, spec, column_names=None, tol=1e-6, max_iter=100_000):
    """Fit weighted epsilon-SVR; per-sample box is box_constraint * w_t."""
    X, y, w = check_training_inputs(X, y, w)
    # zero-weight samples have box 0, so their dual variables are fixed at
    # zero: eliminate them up front (exact presolve; removal identity holds
    # to the bit because the solved problem is literally the reduced one)
    active = w > 0
    scaler = ColumnScaler.fit(X[active])
    xs = scaler.transform(X)
    xa, ya = xs[active], y[active]
    K = kernel_matrix(xa, xa, spec.kernel, spec.poly_order)
    box = spec.box_constraint * w
    # the dual is exactly equivariant under scaling (y, epsilon, box) by
    # 1/s with beta multiplied by s; solving the standardized problem makes
    # the stopping tolerance scale-free
    y_scale = float(ya.std())
    if not np.isfinite(y_scale) or y_scale <= 0:
        y_scale = 1.0
    beta_s, bias_s, iters, gap = smo_epsilon_svr(
        K, ya / y_scale, box[active] / y_scale, spec.epsilon / y_scale,
        tol=tol, max_iter=max_iter,
    )
    beta_a = beta_s * y_scale
    bias = bias_s * y_scale
    beta = np.zeros(X.shape[0])
    beta[active] = beta_a
    sv = beta != 0
    alpha = np.where(beta > 0, beta, 0.0)
    alpha_star = np.where(beta < 0, -beta, 0.0)
    return SvrModel(
        spec=spec,
        scaler=scaler,
        sv_x=xs[sv],
        sv_beta=beta[sv],
        bias=bias,
        schema=column_names,
        fingerprint=weight_fingerprint(w),
        diagnostics={
            "iterations": iters,
            "kkt_gap": gap,  # in standardized target units (scale-free)
            "y_scale": y_scale,
            "dual_objective": dual_objective(K, ya, beta_a, spec.epsilon),
            "n_support": int(sv.sum()),
        },
        dual=(alpha, alpha_star),
        box=box,
    )
