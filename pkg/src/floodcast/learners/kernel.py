"""Least-squares (or linear-SVR) regression on random Fourier features.

The Gaussian kernel of scale s is approximated by expansion_dims random
cosine features; the least-squares learner then solves a weighted ridge
problem on them.  The target and features are centered by their
weighted means so the intercept is never penalized: lambda -> infinity
shrinks the fit to the weighted mean of y.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..errors import SolveError, ValidationError
from .base import ColumnScaler, FittedModel, check_training_inputs, weight_fingerprint
from .svr import smo_epsilon_svr


@dataclass(frozen=True)
class KernelRegSpec:
    learner: str = "least-squares"
    kernel_scale: float = 1.0
    lam: float = 1e-6
    expansion_dims: int = 256
    epsilon: float = 0.0  # svm learner only

    def __post_init__(self):
        if self.learner not in ("least-squares", "svm"):
            raise ValidationError(f"unknown kernel learner {self.learner!r}")
        if self.kernel_scale <= 0:
            raise ValidationError("kernel scale must be positive")
        if self.lam < 0:
            raise ValidationError("lambda must be nonnegative")
        if self.expansion_dims < 1:
            raise ValidationError("expansion dims must be >= 1")
        if self.epsilon < 0:
            raise ValidationError("epsilon must be nonnegative")


def fourier_features(xs, omega, phase):
    """cos-feature map, sqrt(2/D) cos(x omega^T + phase)."""
    d = omega.shape[0]
    return np.sqrt(2.0 / d) * np.cos(xs @ omega.T + phase)


class KernelModel(FittedModel):
    kind = "kernel"

    def __init__(self, spec, scaler, omega, phase, beta, intercept, seed,
                 schema, fingerprint, diagnostics=None):
        super().__init__(schema, fingerprint)
        self.spec = spec
        self.scaler = scaler
        self.omega = omega
        self.phase = phase
        self.beta = beta
        self.intercept = intercept
        self.seed = seed
        self.diagnostics = diagnostics or {}

    @property
    def n_features(self):
        return self.scaler.lo.size

    def _predict(self, X):
        phi = fourier_features(self.scaler.transform(X), self.omega, self.phase)
        return phi @ self.beta + self.intercept


def fit_kernel(X, y, w, spec, seed=0, column_names=None):
    """Fit the random-feature learner; deterministic given the seed."""
    X, y, w = check_training_inputs(X, y, w)
    # every fitting computation runs on the w>0 rows only: zero-weight
    # samples then leave not just the algebra but the float rounding of
    # the learned parameters untouched
    active = w > 0
    scaler = ColumnScaler.fit(X[active])
    rng = np.random.default_rng(seed)
    omega = rng.normal(0.0, 1.0 / spec.kernel_scale, size=(spec.expansion_dims, X.shape[1]))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=spec.expansion_dims)
    wa, ya = w[active], y[active]
    phi_a = fourier_features(scaler.transform(X[active]), omega, phase)
    wsum = wa.sum()
    mu_y = float(wa @ ya / wsum)
    mu_phi = (wa @ phi_a) / wsum

    diagnostics = {}
    if spec.learner == "least-squares":
        phic = phi_a - mu_phi
        gram = (phic * wa[:, None]).T @ phic
        gram[np.diag_indices_from(gram)] += spec.lam
        rhs = phic.T @ (wa * (ya - mu_y))
        try:
            cho = scipy.linalg.cho_factor(gram, check_finite=False)
            beta = scipy.linalg.cho_solve(cho, rhs, check_finite=False)
        except scipy.linalg.LinAlgError:
            if spec.lam == 0:
                raise SolveError(
                    "singular normal equations with lambda=0; set lambda > 0"
                ) from None
            raise
        intercept = mu_y - float(mu_phi @ beta)
    else:  # linear epsilon-SVR on the random features
        if spec.lam <= 0:
            raise ValidationError("the svm learner needs lambda > 0")
        box = wa / (spec.lam * int(active.sum()))
        gram = phi_a @ phi_a.T
        dual_beta, bias, iters, gap = smo_epsilon_svr(gram, ya, box, spec.epsilon)
        beta = phi_a.T @ dual_beta
        intercept = bias
        diagnostics = {"iterations": iters, "kkt_gap": gap}

    return KernelModel(
        spec=spec,
        scaler=scaler,
        omega=omega,
        phase=phase,
        beta=beta,
        intercept=float(intercept),
        seed=seed,
        schema=column_names,
        fingerprint=weight_fingerprint(w),
        diagnostics=diagnostics,
    )
