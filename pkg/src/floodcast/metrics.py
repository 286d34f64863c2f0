"""Accuracy and skill measures, the MSE/skill identity, and the ensemble
skill-dominance check.

"Skill" here is the cosine similarity between forecast and actual
vectors; FCD is an R2-style coefficient of determination evaluated
within each flood term so terms of very different peak levels compare
fairly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, ShapeError, ZeroNormError


def _pair(yhat, y):
    yhat = np.asarray(yhat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if yhat.shape != y.shape or yhat.ndim != 1 or yhat.size == 0:
        raise ShapeError(f"forecast/actual shape mismatch: {yhat.shape} vs {y.shape}")
    return yhat, y


def mse(yhat, y):
    yhat, y = _pair(yhat, y)
    return float(np.mean((yhat - y) ** 2))


def rmse(yhat, y):
    return float(np.sqrt(mse(yhat, y)))


def mae(yhat, y):
    yhat, y = _pair(yhat, y)
    return float(np.mean(np.abs(yhat - y)))


def sim(yhat, y):
    """Cosine similarity <yhat, y> / (|yhat| |y|), in [-1, 1]."""
    yhat, y = _pair(yhat, y)
    ny, nt = np.linalg.norm(yhat), np.linalg.norm(y)
    if ny == 0 or nt == 0:
        raise ZeroNormError("cosine skill undefined for a zero-norm vector")
    value = float(yhat @ y / (ny * nt))
    return min(1.0, max(-1.0, value))


def mse_skill_identity_residual(yhat, y):
    """| MSE/(|yhat||y|) - (|yhat|/(N|y|) - (2/N) sim + |y|/(N|yhat|)) |.

    Algebraically zero; the returned residual is the floating-point
    defect, bounded by ~1e-10 relative on sane inputs.
    """
    yhat, y = _pair(yhat, y)
    n = y.size
    ny, nt = np.linalg.norm(yhat), np.linalg.norm(y)
    if ny == 0 or nt == 0:
        raise ZeroNormError("identity undefined for a zero-norm vector")
    lhs = mse(yhat, y) / (ny * nt)
    rhs = ny / (n * nt) - (2.0 / n) * sim(yhat, y) + nt / (n * ny)
    return abs(lhs - rhs)


@dataclass(frozen=True)
class FcdResult:
    per_term: dict  # term_id -> float
    pooled: float


def fcd(yhat, y, terms=None, term_of_row=None, pooled_mean="pooled"):
    """Flood-term coefficient of determination.

    Within each term: 1 - sum (yhat-y)^2 / sum (y - mean_b(y))^2.  The
    pooled value concatenates all rows and, by default, uses the pooled
    mean.  A forecast worse than the term mean yields a negative value,
    reported with a warning rather than clamped.
    """
    yhat, y = _pair(yhat, y)
    if term_of_row is None:
        if terms is None:
            raise ShapeError("fcd needs terms or term_of_row")
        if terms.total_samples != y.size:
            raise ShapeError("terms do not cover the forecast rows")
        term_of_row = terms.term_of_hours()
    term_of_row = np.asarray(term_of_row)
    per_term = {}
    for term_id in dict.fromkeys(term_of_row.tolist()):
        rows = term_of_row == term_id
        per_term[term_id] = _r2(yhat[rows], y[rows], y[rows].mean())
    if pooled_mean == "pooled":
        pooled = _r2(yhat, y, y.mean())
    else:  # per-term climatology: each row's reference is its term mean
        ref = np.empty_like(y)
        for term_id in per_term:
            rows = term_of_row == term_id
            ref[rows] = y[rows].mean()
        ss_res = np.sum((yhat - y) ** 2)
        ss_tot = np.sum((y - ref) ** 2)
        if ss_tot == 0:
            raise DegenerateInput("fcd undefined: zero target variance")
        pooled = float(1.0 - ss_res / ss_tot)
    return FcdResult(per_term=per_term, pooled=pooled)


def _r2(yhat, y, ref_mean):
    ss_tot = np.sum((y - ref_mean) ** 2)
    if ss_tot == 0:
        raise DegenerateInput("fcd undefined: zero target variance in term")
    value = float(1.0 - np.sum((yhat - y) ** 2) / ss_tot)
    if value < 0:
        warnings.warn(f"forecast worse than climatological mean (fcd={value:.4f})", stacklevel=3)
    return value


@dataclass(frozen=True)
class Prop1Report:
    """Skill dominance of the norm-equalized convex combination.

    lhs: weighted mean of base skills.  rhs: skill of the combination of
    unit-normalized base outputs.  The inequality lhs <= rhs is
    guaranteed whenever lhs > 0 (the operating regime of nonnegative
    inflow forecasts) and strict unless the normalized bases are
    colinear.
    """

    lhs: float
    rhs: float
    holds: bool
    strict: bool
    degenerate: bool
    combined_norm: float


def check_proposition1(base_outputs, y, a, tol=1e-12):
    """Compare the weighted base skill with the combined-forecast skill."""
    y = np.asarray(y, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    outputs = [np.asarray(v, dtype=np.float64) for v in base_outputs]
    if len(outputs) != a.size:
        raise ShapeError("one weight per base output required")
    if np.any(a < 0) or abs(a.sum() - 1.0) > 1e-9:
        raise ShapeError("weights must lie on the simplex")
    lhs = float(sum(ai * sim(v, y) for ai, v in zip(a, outputs)))
    combined = sum(
        ai * v / np.linalg.norm(v) for ai, v in zip(a, outputs)
    )
    cnorm = float(np.linalg.norm(combined))
    if cnorm == 0:
        return Prop1Report(lhs=lhs, rhs=np.nan, holds=True, strict=False,
                           degenerate=True, combined_norm=0.0)
    rhs = sim(combined, y)
    holds = lhs <= rhs + tol
    strict = holds and (rhs - lhs) > tol and lhs != 0
    return Prop1Report(lhs=lhs, rhs=rhs, holds=holds, strict=strict,
                       degenerate=False, combined_norm=cnorm)


@dataclass(frozen=True)
class SkillReport:
    """Per-term and pooled accuracy of one forecast variant."""

    variant: str
    per_term: dict  # term_id -> dict of metric name -> value
    pooled: dict

    def rows(self):
        """Flatten to (term, metric dict) rows, pooled last as 'all'."""
        out = [(str(tid), vals) for tid, vals in self.per_term.items()]
        out.append(("all", self.pooled))
        return out


def skill_report(variant, yhat, y, term_of_row):
    """Bundle FCD / RMSE / MAE / sim / l2-norms per term and pooled."""
    yhat, y = _pair(yhat, y)
    term_of_row = np.asarray(term_of_row)
    per_term = {}
    for term_id in dict.fromkeys(term_of_row.tolist()):
        rows = term_of_row == term_id
        per_term[term_id] = _metric_dict(yhat[rows], y[rows], y[rows].mean())
    pooled = _metric_dict(yhat, y, y.mean())
    return SkillReport(variant=variant, per_term=per_term, pooled=pooled)


def _metric_dict(yhat, y, ref_mean):
    return {
        "fcd": _r2(yhat, y, ref_mean),
        "rmse": rmse(yhat, y),
        "mae": mae(yhat, y),
        "sim": sim(yhat, y),
        "norm_forecast": float(np.linalg.norm(yhat)),
        "norm_actual": float(np.linalg.norm(y)),
    }
