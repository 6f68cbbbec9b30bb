"""Causal order search with pluggable slopes and dependence measures.

The search peels one exogenous variable at a time.  For candidate j
over the remaining variables U it scores

    T(X_j, U) = sum_{i in U, i != j} measure(X_j, r_i),
    r_i = X_i - slope(X_j, X_i) * X_j,

appends the argmin (the variable whose residuals look most independent
of it), replaces the working matrix by those residuals, and repeats.
The connection matrix is then filled by ordinary least squares along
the discovered order and optionally sparsified by an adaptive lasso.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateData, SingularDesign
from .independence import KbiConfig, measure_function
from .scm import DataMatrix, validate_ordering
from .slopes import residuals, slope_function

__all__ = [
    "DiscoveryConfig",
    "DiscoveryResult",
    "independence_statistic",
    "estimate_causal_order",
    "estimate_connection_matrix",
    "prune_adaptive_lasso",
    "discover",
]

_SLOPE_TAGS = {
    "ols": "ols",
    "theil-sen": "theil-sen",
    "ts": "theil-sen",
    "repeated-median": "repeated-median",
    "rm": "repeated-median",
}
_MAD_TOLERANCE = 1e-12
_PIVOT_TOLERANCE = 1e-10
_FORCED_ZERO = 1e-12
_CD_TOLERANCE = 1e-8
_CD_MAX_SWEEPS = 1000

# relative grid: ratios applied to each response's own lambda_max
_DEFAULT_LAMBDA_GRID = tuple(float(v) for v in np.logspace(0.0, -4.0, 50))


@dataclass(frozen=True)
class DiscoveryConfig:
    """Search configuration.

    Attributes
    ----------
    slope : str
        "ols", "theil-sen" or "repeated-median" (aliases "ts", "rm").
    measure : str
        "kbi" or "dcorr".
    kbi : KbiConfig
        Settings for the kernel measure; ignored under "dcorr".
    prune : bool
        Run the adaptive lasso after the full regression.
    lasso_gamma : float
        Adaptive-weight exponent; weights are 1/|B_init|^gamma.
    lasso_lambda_grid : tuple of float
        Relative penalty grid; each entry multiplies the per-response
        lambda_max (the smallest penalty that zeroes every predictor).
    lambda_selection : str
        Penalty choice rule; only "bic" is defined.
    """

    slope: str = "theil-sen"
    measure: str = "kbi"
    kbi: KbiConfig = field(default_factory=KbiConfig)
    prune: bool = True
    lasso_gamma: float = 1.0
    lasso_lambda_grid: tuple = _DEFAULT_LAMBDA_GRID
    lambda_selection: str = "bic"

    def __post_init__(self):
        if self.slope not in _SLOPE_TAGS:
            raise ValueError(f"unknown slope estimator {self.slope!r}")
        object.__setattr__(self, "slope", _SLOPE_TAGS[self.slope])
        if self.measure not in ("kbi", "dcorr"):
            raise ValueError(f"unknown dependence measure {self.measure!r}")
        if self.measure == "kbi" and not isinstance(self.kbi, KbiConfig):
            raise ValueError("kbi settings must be a KbiConfig")
        if self.lasso_gamma <= 0:
            raise ValueError("lasso_gamma must be positive")
        grid = tuple(float(v) for v in self.lasso_lambda_grid)
        if not grid or any(v <= 0 for v in grid):
            raise ValueError("lasso_lambda_grid must be nonempty and positive")
        object.__setattr__(self, "lasso_lambda_grid", grid)
        if self.lambda_selection != "bic":
            raise ValueError(f"unknown lambda selection rule {self.lambda_selection!r}")

    @property
    def label(self) -> str:
        """Short method tag, e.g. "theil-sen+kbi"."""
        return f"{self.slope}+{self.measure}"

    def to_dict(self):
        return {
            "slope": self.slope,
            "measure": self.measure,
            "kbi": {
                "kernel_width": self.kbi.kernel_width,
                "regularization": self.kbi.regularization,
                "cholesky_tolerance": self.kbi.cholesky_tolerance,
                "max_rank": self.kbi.max_rank,
            },
            "prune": self.prune,
            "lasso_gamma": self.lasso_gamma,
            "lasso_lambda_grid": list(self.lasso_lambda_grid),
            "lambda_selection": self.lambda_selection,
        }


@dataclass
class DiscoveryResult:
    """Estimated order, connection matrix and per-round statistics.

    ``statistics[r]`` holds one (variable index, T value) pair for every
    candidate still in play at round r, so round r has p - r entries.
    """

    ordering: list
    B: np.ndarray
    statistics: list
    pruned: bool
    config: DiscoveryConfig

    def to_json(self) -> str:
        return json.dumps({
            "order": [int(v) for v in self.ordering],
            "B": np.asarray(self.B).tolist(),
            "statistics": [
                [{"var": int(j), "T": float(t)} for j, t in round_stats]
                for round_stats in self.statistics
            ],
            "config": self.config.to_dict(),
        }, indent=2)

    def to_dot(self, names=None) -> str:
        """DOT digraph with one edge j -> i per nonzero B entry,
        labeled with the weight to 3 decimals."""
        B = np.asarray(self.B)
        p = B.shape[0]
        if names is None:
            names = [f"x{j + 1}" for j in range(p)]
        if len(names) != p:
            raise ValueError("one name per variable required")
        lines = ["digraph {"]
        for name in names:
            lines.append(f'  "{name}";')
        for i, j in zip(*np.nonzero(B)):
            lines.append(f'  "{names[j]}" -> "{names[i]}" [label="{B[i, j]:.3f}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _as_values(data):
    if isinstance(data, DataMatrix):
        return data.values
    values = np.asarray(data, dtype=float)
    if values.ndim != 2:
        raise ValueError("data must be two-dimensional")
    if not np.isfinite(values).all():
        raise ValueError("data must be finite")
    return values


def independence_statistic(candidate, others, config: DiscoveryConfig | None = None) -> float:
    """Total dependence between a candidate and the residuals of the
    other columns regressed on it.  Small values mark exogeneity."""
    config = config if config is not None else DiscoveryConfig()
    candidate = np.asarray(candidate, dtype=float)
    others = np.asarray(others, dtype=float)
    if others.ndim == 1:
        others = others[:, None]
    if others.shape[1] < 1:
        raise ValueError("need at least one other column")
    score = measure_function(config.measure, config.kbi)
    res = residuals(candidate, others, estimator=config.slope)
    return float(sum(score(candidate, res[:, i]) for i in range(res.shape[1])))


def _median_centered(values):
    return values - np.median(values, axis=0)


def _check_not_degenerate(working, variables, round_index):
    mad = np.median(np.abs(working - np.median(working, axis=0)), axis=0)
    bad = np.nonzero(mad <= _MAD_TOLERANCE)[0]
    if bad.size:
        raise DegenerateData(
            f"column {variables[bad[0]]} is constant within tolerance "
            f"entering round {round_index}",
            round_index=round_index,
        )


def estimate_causal_order(data, config: DiscoveryConfig | None = None):
    """Run the peeling loop and return (ordering, statistics).

    Ties in the round argmin break toward the lowest original variable
    index.  Residual columns are re-centered by their median after
    every peel; a residual column whose median absolute deviation falls
    to 1e-12 aborts with DegenerateData carrying the round index.
    """
    config = config if config is not None else DiscoveryConfig()
    values = _as_values(data)
    n, p = values.shape
    if n < 3:
        raise ValueError("need at least three rows")
    if p < 1:
        raise ValueError("need at least one column")
    if p == 1:
        return [0], []
    working = _median_centered(values)
    variables = list(range(p))
    _check_not_degenerate(working, variables, 0)
    ordering = []
    statistics = []
    for round_index in range(p - 1):
        round_stats = []
        for pos, var in enumerate(variables):
            rest = np.delete(working, pos, axis=1)
            t_value = independence_statistic(working[:, pos], rest, config)
            round_stats.append((var, t_value))
        statistics.append(round_stats)
        best_var, _ = min(round_stats, key=lambda item: (item[1], item[0]))
        best_pos = variables.index(best_var)
        ordering.append(best_var)
        pivot = working[:, best_pos]
        rest = np.delete(working, best_pos, axis=1)
        variables.pop(best_pos)
        if round_index < p - 2:
            working = _median_centered(residuals(pivot, rest, estimator=config.slope))
            _check_not_degenerate(working, variables, round_index + 1)
        else:
            working = rest
    ordering.append(variables[0])
    return ordering, statistics


def estimate_connection_matrix(data, ordering) -> np.ndarray:
    """Full multiple-OLS connection matrix along a given ordering.

    Each variable is regressed on all its predecessors at once (an
    intercept is fitted and discarded).  Every forward entry is filled;
    pruning is a separate step.
    """
    values = _as_values(data)
    p = values.shape[1]
    order = validate_ordering(ordering, p)
    B = np.zeros((p, p))
    for r in range(1, p):
        response = order[r]
        preds = order[:r]
        X = values[:, preds] - values[:, preds].mean(axis=0)
        y = values[:, response] - values[:, response].mean()
        basis, s, vt = np.linalg.svd(X, full_matrices=False)
        if s[0] == 0.0 or s[-1] <= _PIVOT_TOLERANCE * s[0]:
            raise SingularDesign(
                f"predecessors of variable {response} are rank deficient")
        B[response, preds] = vt.T @ ((basis.T @ y) / s)
    return B


def _lasso_path_bic(Z, y, lam_grid, n):
    """Coordinate descent over a decreasing penalty grid; returns the
    coefficient vector whose BIC = n log(RSS/n) + log(n) nnz is lowest."""
    k = Z.shape[1]
    col_scale = (Z * Z).sum(axis=0) / n
    coef = np.zeros(k)
    resid = y.copy()
    best = (np.inf, None)
    for lam in sorted(lam_grid, reverse=True):
        for _ in range(_CD_MAX_SWEEPS):
            delta = 0.0
            for j in range(k):
                if col_scale[j] == 0.0:
                    continue
                rho = (Z[:, j] @ resid) / n + col_scale[j] * coef[j]
                new = np.sign(rho) * max(abs(rho) - lam, 0.0) / col_scale[j]
                if new != coef[j]:
                    resid += Z[:, j] * (coef[j] - new)
                    delta = max(delta, abs(new - coef[j]))
                    coef[j] = new
            if delta <= _CD_TOLERANCE:
                break
        rss = float(resid @ resid)
        bic = n * np.log(max(rss, 1e-300) / n) + np.log(n) * np.count_nonzero(coef)
        if bic < best[0]:
            best = (bic, coef.copy())
    return best[1]


def prune_adaptive_lasso(data, ordering, B_init, config: DiscoveryConfig | None = None) -> np.ndarray:
    """Adaptive-lasso sparsification of a full connection matrix.

    Per response, predecessors are reweighted by |B_init|^gamma (an
    initial weight within 1e-12 of zero forces the edge out), the
    penalty grid is the config's relative grid scaled by the response's
    own lambda_max, and the penalty is picked by BIC.
    """
    config = config if config is not None else DiscoveryConfig()
    values = _as_values(data)
    n, p = values.shape
    order = validate_ordering(ordering, p)
    B_init = np.asarray(B_init, dtype=float)
    if B_init.shape != (p, p):
        raise ValueError("B_init shape mismatch")
    B = np.zeros((p, p))
    for r in range(1, p):
        response = order[r]
        preds = order[:r]
        init = B_init[response, preds]
        active = np.abs(init) > _FORCED_ZERO
        if not active.any():
            continue
        keep = preds[active]
        gain = np.abs(init[active]) ** config.lasso_gamma
        X = values[:, keep] - values[:, keep].mean(axis=0)
        y = values[:, response] - values[:, response].mean()
        Z = X * gain
        # same per-column dot as the descent loop, so lambda_max really
        # is the boundary penalty in floating point too
        lam_max = max(abs(Z[:, j] @ y) for j in range(Z.shape[1])) / n
        if lam_max == 0.0:
            continue
        grid = [ratio * lam_max for ratio in config.lasso_lambda_grid]
        coef = _lasso_path_bic(Z, y, grid, n)
        B[response, keep] = coef * gain
    return B


def discover(data, config: DiscoveryConfig | None = None) -> DiscoveryResult:
    """Full pipeline: order search, connection matrix, optional pruning."""
    config = config if config is not None else DiscoveryConfig()
    ordering, statistics = estimate_causal_order(data, config)
    B = estimate_connection_matrix(data, ordering)
    if config.prune:
        B = prune_adaptive_lasso(data, ordering, B, config)
    return DiscoveryResult(ordering=ordering, B=B, statistics=statistics,
                           pruned=config.prune, config=config)
