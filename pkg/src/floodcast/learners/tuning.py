"""Hyperparameter search over the base learners.

Random search is the reproducible default; a surrogate-assisted mode
(expected improvement over a plain Gaussian-process fit of the evaluated
points) is available for the same search-space declaration.  Model
selection uses the forest's out-of-bag error directly and term-blocked
K-fold weighted MSE for the other learners, so whole flood terms always
stay on one side of a validation split.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, TuneError

_EI_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class TuneResult:
    best_spec: object
    best_objective: float
    log: tuple  # per-candidate dicts: params, objective or error


def _sample_param(dim, rng):
    kind = dim[0]
    if kind == "choice":
        options = dim[1]
        return options[rng.integers(len(options))]
    if kind == "uniform":
        return float(rng.uniform(dim[1], dim[2]))
    if kind == "log":
        return float(np.exp(rng.uniform(np.log(dim[1]), np.log(dim[2]))))
    if kind == "int":
        return int(rng.integers(dim[1], dim[2] + 1))
    raise ConfigError(f"unknown search dimension kind {kind!r}")


def _unit_coords(params, space):
    """Numeric params mapped to [0,1] for the surrogate (choices -> index)."""
    out = []
    for name, dim in space.items():
        v = params[name]
        kind = dim[0]
        if kind == "choice":
            out.append(dim[1].index(v) / max(1, len(dim[1]) - 1))
        elif kind == "uniform":
            out.append((v - dim[1]) / (dim[2] - dim[1]))
        elif kind == "log":
            out.append((np.log(v) - np.log(dim[1])) / (np.log(dim[2]) - np.log(dim[1])))
        else:
            out.append((v - dim[1]) / max(1, dim[2] - dim[1]))
    return np.asarray(out, dtype=np.float64)


def _gp_expected_improvement(coords, values, pool, lengthscale=0.3):
    """EI of pool points under a simple RBF-kernel GP on observed values."""
    mu_y = values.mean()
    sd_y = values.std()
    yz = (values - mu_y) / (sd_y if sd_y > 0 else 1.0)

    def k(a, b):
        d2 = np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=2)
        return np.exp(-0.5 * d2 / lengthscale**2)

    kxx = k(coords, coords) + 1e-6 * np.eye(coords.shape[0])
    kxs = k(coords, pool)
    solve = np.linalg.solve(kxx, np.column_stack([yz, kxs]))
    alpha, vmat = solve[:, 0], solve[:, 1:]
    mean = kxs.T @ alpha
    var = np.maximum(1.0 - np.sum(kxs * vmat, axis=0), 1e-12)
    sd = np.sqrt(var)
    best = yz.min()
    z = (best - mean) / sd
    phi = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    cdf = 0.5 * (1.0 + np.vectorize(math.erf)(z / _EI_SQRT2))
    return (best - mean) * cdf + sd * phi


def blocked_folds(term_of_row, n_folds, rng):
    """Assign whole flood terms to folds; returns per-row fold ids."""
    term_of_row = np.asarray(term_of_row)
    terms = list(dict.fromkeys(term_of_row.tolist()))
    order = rng.permutation(len(terms))
    fold_of_term = {terms[idx]: i % n_folds for i, idx in enumerate(order)}
    return np.asarray([fold_of_term[t] for t in term_of_row])


def kfold_weighted_mse(fitter, spec, X, y, w, term_of_row, n_folds, rng):
    """Term-blocked K-fold weighted MSE of the fitted spec."""
    folds = blocked_folds(term_of_row, n_folds, rng)
    n_folds_eff = int(folds.max()) + 1
    sq_sum, w_sum = 0.0, 0.0
    for f in range(n_folds_eff):
        test = folds == f
        train = ~test
        if not np.any(test) or not np.any(w[train] > 0):
            continue
        model = fitter(spec, X[train], y[train], w[train])
        pred = model.predict(X[test])
        wt = w[test]
        sq_sum += float(np.sum(wt * (pred - y[test]) ** 2))
        w_sum += float(np.sum(wt))
    if w_sum == 0:
        raise TuneError("no weighted validation rows in any fold")
    return sq_sum / w_sum


def tune(
    fitter,
    X,
    y,
    w,
    space,
    budget,
    objective="kfold",
    *,
    base_spec,
    seed=0,
    term_of_row=None,
    n_folds=4,
    method="random",
    pool_size=128,
):
    """Pick the spec with minimal objective among ``budget`` candidates.

    ``fitter(spec, X, y, w) -> FittedModel``.  ``objective`` is "kfold"
    (term-blocked weighted MSE) or "oob" (the forest's own error).  The
    first candidate is always ``base_spec`` so the search can only match
    or beat the default.  Deterministic given the seed.
    """
    if budget < 1:
        raise ConfigError("tuning budget must be >= 1")
    if objective not in ("kfold", "oob"):
        raise ConfigError(f"unknown tuning objective {objective!r}")
    if objective == "kfold" and term_of_row is None:
        raise ConfigError("kfold objective needs term_of_row for blocking")
    rng = np.random.default_rng(seed)

    def evaluate(spec):
        if objective == "oob":
            model = fitter(spec, X, y, w)
            return float(model.oob_mse)
        fold_rng = np.random.default_rng(seed + 1)
        return kfold_weighted_mse(fitter, spec, X, y, w, term_of_row, n_folds, fold_rng)

    def sample_params():
        return {name: _sample_param(dim, rng) for name, dim in space.items()}

    candidates = [dict()]  # the base spec itself
    while len(candidates) < budget:
        candidates.append(sample_params())

    log = []
    evaluated = []  # (params, objective)
    best_spec, best_obj = None, np.inf
    n_random = budget if method == "random" else max(2, budget // 3)

    idx = 0
    while idx < budget:
        if method == "surrogate" and idx >= n_random and len(evaluated) >= 2:
            pool_params = [sample_params() for _ in range(pool_size)]
            coords = np.vstack([_unit_coords(p, space) for p, _ in evaluated])
            values = np.asarray([v for _, v in evaluated])
            pool = np.vstack([_unit_coords(p, space) for p in pool_params])
            ei = _gp_expected_improvement(coords, values, pool)
            params = pool_params[int(np.argmax(ei))]
        else:
            params = candidates[idx]
        spec = dataclasses.replace(base_spec, **params)
        entry = {"candidate": idx, "params": dict(params)}
        try:
            obj = evaluate(spec)
            entry["objective"] = obj
            full_params = {name: getattr(spec, name) for name in space}
            evaluated.append((full_params, obj))
            if obj < best_obj:
                best_spec, best_obj = spec, obj
        except Exception as exc:  # noqa: BLE001 - diagnostics per candidate
            entry["error"] = f"{type(exc).__name__}: {exc}"
        log.append(entry)
        idx += 1

    if best_spec is None:
        raise TuneError("every tuning candidate failed", diagnostics=log)
    return TuneResult(best_spec=best_spec, best_objective=best_obj, log=tuple(log))
