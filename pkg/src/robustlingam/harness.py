"""Experiment drivers: simulation sweeps, outlier grids, benchmarks.

Every driver follows the same reproducibility contract: replication r
of a run with master seed s draws everything it needs from
``numpy.random.default_rng([s, r])``, workers process whole
replications, and aggregation is a count merge in replication order, so
the reported counts are identical for any worker count.  Wall-clock
fields are informational only and excluded from that guarantee.

Reports serialize to JSON (schema in ``REPORT_SCHEMA``), an aligned
text table, and CSV.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .discovery import DiscoveryConfig, estimate_causal_order
from .exceptions import RobustLingamError
from .scm import (
    ScmSpec,
    StudentT,
    generate_random_scm,
    inject_outlier,
    order_respects_weights,
    sample,
)

__all__ = [
    "SimulationSettings",
    "ExperimentReport",
    "run_simulation",
    "run_outlier_grid",
    "run_benchmark",
    "REPORT_SCHEMA",
    "WORKERS_ENV_VAR",
]

WORKERS_ENV_VAR = "ROBUSTLINGAM_WORKERS"

_CELL_FIELDS = {
    "simulation": ["method", "sample_size", "correct", "failed", "replications", "seconds"],
    "benchmark": ["method", "sample_size", "correct", "failed", "replications", "seconds"],
    "outlier-grid": ["method", "exponent_x", "exponent_y", "sign_x", "sign_y",
                     "correct", "failed", "replications"],
}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["kind", "settings", "cells", "toolkit_version", "created"],
    "properties": {
        "kind": {"enum": ["simulation", "outlier-grid", "benchmark"]},
        "settings": {"type": "object"},
        "toolkit_version": {"type": "string"},
        "created": {"type": "string"},
        "cells": {"type": "array", "items": {"type": "object"}},
        "ratios": {"type": "array", "items": {"type": "object"}},
    },
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": kind}}},
            "then": {
                "properties": {
                    "cells": {
                        "items": {
                            "required": fields,
                            "properties": {
                                "method": {"type": "string"},
                                "correct": {"type": "integer", "minimum": 0},
                                "failed": {"type": "integer", "minimum": 0},
                                "replications": {"type": "integer", "minimum": 0},
                            },
                        }
                    }
                }
            },
        }
        for kind, fields in _CELL_FIELDS.items()
    ],
}


@dataclass(frozen=True)
class SimulationSettings:
    """One recovery-rate sweep: a model family crossed with sample sizes
    and discovery methods.

    Attributes
    ----------
    p : int
        Model dimension.
    sample_sizes : tuple of int
        Each must be at least p + 1.
    q : float
        Parent inclusion probability of the random DAG.
    noise : NoiseDistribution
        Shared noise family for all variables.
    methods : tuple of DiscoveryConfig
        Every method sees the same datasets.
    replications : int
    master_seed : int
    """

    p: int
    sample_sizes: tuple
    q: float
    noise: object
    methods: tuple
    replications: int = 100
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.p < 1:
            raise ValueError("p must be at least 1")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not self.sample_sizes:
            raise ValueError("at least one sample size required")
        for n in self.sample_sizes:
            if n < self.p + 1:
                raise ValueError(f"sample size {n} below p + 1 = {self.p + 1}")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("q must lie in [0, 1]")
        if not hasattr(self.noise, "sample"):
            raise ValueError("noise must provide a sample(rng, size) method")
        for cfg in self.methods:
            if not isinstance(cfg, DiscoveryConfig):
                raise ValueError("methods must be DiscoveryConfig instances")

    def to_dict(self):
        return {
            "p": self.p,
            "sample_sizes": list(self.sample_sizes),
            "q": self.q,
            "noise": self.noise.to_dict(),
            "methods": [cfg.to_dict() for cfg in self.methods],
            "replications": self.replications,
            "master_seed": self.master_seed,
        }


@dataclass
class ExperimentReport:
    """Aggregated counts for one driver run.

    ``cells`` is a list of flat dicts whose keys depend on ``kind``
    (see ``REPORT_SCHEMA``); counts are exact and deterministic, the
    ``seconds`` fields are wall-clock and informational.
    """

    kind: str
    settings: dict
    cells: list
    toolkit_version: str = __version__
    created: str = ""
    ratios: list = field(default_factory=list)

    def __post_init__(self):
        if not self.created:
            self.created = datetime.now(timezone.utc).isoformat()
        for cell in self.cells:
            if cell.get("correct", 0) > cell.get("replications", 0):
                raise ValueError("correct count cannot exceed replications")

    def to_json(self) -> str:
        doc = {
            "kind": self.kind,
            "settings": self.settings,
            "cells": self.cells,
            "toolkit_version": self.toolkit_version,
            "created": self.created,
        }
        if self.ratios:
            doc["ratios"] = self.ratios
        return json.dumps(doc, indent=2)

    def to_csv(self) -> str:
        fields = _CELL_FIELDS[self.kind]
        lines = [",".join(fields)]
        for cell in self.cells:
            lines.append(",".join(str(cell[f]) for f in fields))
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        """Aligned table, one row per cell, mirroring the report CSV."""
        fields = _CELL_FIELDS[self.kind]
        rows = [fields] + [
            [f"{cell[f]:.3f}" if isinstance(cell[f], float) else str(cell[f]) for f in fields]
            for cell in self.cells
        ]
        widths = [max(len(r[i]) for r in rows) for i in range(len(fields))]
        out = []
        for r, row in enumerate(rows):
            out.append("  ".join(v.rjust(w) for v, w in zip(row, widths)))
            if r == 0:
                out.append("  ".join("-" * w for w in widths))
        for ratio in self.ratios:
            out.append(
                f"kbi/dcorr time ratio, slope={ratio['slope']}, "
                f"n={ratio['sample_size']}: {ratio['kbi_over_dcorr']:.2f}"
            )
        return "\n".join(out) + "\n"


def _resolve_workers(workers):
    if workers is None:
        workers = os.environ.get(WORKERS_ENV_VAR, "1")
    workers = int(workers)
    if workers < 1:
        raise ValueError("worker count must be at least 1")
    return workers


def _map_replications(func, payloads, workers):
    if workers == 1 or len(payloads) <= 1:
        return [func(item) for item in payloads]
    chunk = max(1, len(payloads) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, payloads, chunksize=chunk))


def _simulation_replication(payload):
    """One replication: one model, one dataset per size, every method."""
    settings, rep = payload
    rng = np.random.default_rng([settings.master_seed, rep])
    spec = generate_random_scm(settings.p, settings.q, settings.noise, rng)
    out = []
    for size_idx, n in enumerate(settings.sample_sizes):
        data = sample(spec, n, rng).values
        for method_idx, cfg in enumerate(settings.methods):
            start = time.perf_counter()
            try:
                order, _ = estimate_causal_order(data, cfg)
                ok = order_respects_weights(order, spec.weights)
                failed = False
            except (RobustLingamError, FloatingPointError):
                ok = False
                failed = True
            out.append((size_idx, method_idx, bool(ok), failed,
                        time.perf_counter() - start))
    return out


def run_simulation(settings: SimulationSettings, workers=None) -> ExperimentReport:
    """Correct-order counts per (method, sample size).

    A replication that raises a numeric error (degenerate residuals and
    the like) is counted in ``failed`` for that method, never aborts
    the sweep, and naturally stays out of ``correct``.
    """
    workers = _resolve_workers(workers)
    payloads = [(settings, rep) for rep in range(settings.replications)]
    per_rep = _map_replications(_simulation_replication, payloads, workers)
    shape = (len(settings.sample_sizes), len(settings.methods))
    correct = np.zeros(shape, dtype=int)
    failed = np.zeros(shape, dtype=int)
    seconds = np.zeros(shape)
    for rep_result in per_rep:
        for size_idx, method_idx, ok, bad, elapsed in rep_result:
            correct[size_idx, method_idx] += ok
            failed[size_idx, method_idx] += bad
            seconds[size_idx, method_idx] += elapsed
    cells = [
        {
            "method": cfg.label,
            "sample_size": n,
            "correct": int(correct[i, m]),
            "failed": int(failed[i, m]),
            "replications": settings.replications,
            "seconds": float(seconds[i, m]),
        }
        for m, cfg in enumerate(settings.methods)
        for i, n in enumerate(settings.sample_sizes)
    ]
    return ExperimentReport(kind="simulation", settings=settings.to_dict(), cells=cells)


def _outlier_cells(grid_exponents):
    return [
        (i, j, sx, sy)
        for i in grid_exponents
        for j in grid_exponents
        for sx in (1, -1)
        for sy in (1, -1)
    ]


def _grid_replication(payload):
    """One replication of the contamination grid: fresh bivariate chain
    data, then every (outlier value, method) combination on it."""
    base_seed, n, cells, methods, rep = payload
    rng = np.random.default_rng([base_seed, rep])
    weights = np.array([[0.0, 0.0], [1.0, 0.0]])
    spec = ScmSpec(order=np.arange(2), weights=weights, noise=(StudentT(5.0),) * 2)
    clean = sample(spec, n, rng)
    out = []
    for cell_idx, (i, j, sx, sy) in enumerate(cells):
        poked = inject_outlier(clean, 0, 0, sx * 2.0**i)
        poked = inject_outlier(poked, 0, 1, sy * 2.0**j)
        for method_idx, cfg in enumerate(methods):
            start = time.perf_counter()
            try:
                order, _ = estimate_causal_order(poked.values, cfg)
                ok = order == [0, 1]
                failed = False
            except (RobustLingamError, FloatingPointError):
                ok = False
                failed = True
            out.append((cell_idx, method_idx, bool(ok), failed,
                        time.perf_counter() - start))
    return out


def run_outlier_grid(base_seed, n, grid_exponents, methods, replications,
                     workers=None) -> ExperimentReport:
    """Correct-direction counts on the bivariate chain X2 = X1 + e2
    with one observation replaced by (sign_x 2^i, sign_y 2^j).

    Every replication draws fresh t(5) data of size n and reuses it for
    all grid cells; the outlier always overwrites row 0.
    """
    workers = _resolve_workers(workers)
    grid_exponents = [int(e) for e in grid_exponents]
    if any(not 0 <= e <= 10 for e in grid_exponents):
        raise ValueError("grid exponents must lie in 0..10")
    if n < 3:
        raise ValueError("n must be at least 3")
    if replications < 1:
        raise ValueError("replications must be at least 1")
    methods = tuple(methods)
    cells_def = _outlier_cells(grid_exponents)
    settings = {
        "n": int(n),
        "grid_exponents": grid_exponents,
        "methods": [cfg.to_dict() for cfg in methods],
        "replications": int(replications),
        "base_seed": int(base_seed),
    }
    if not cells_def or not methods:
        return ExperimentReport(kind="outlier-grid", settings=settings, cells=[])
    payloads = [(base_seed, n, cells_def, methods, rep) for rep in range(replications)]
    per_rep = _map_replications(_grid_replication, payloads, workers)
    correct = np.zeros((len(cells_def), len(methods)), dtype=int)
    failed = np.zeros((len(cells_def), len(methods)), dtype=int)
    for rep_result in per_rep:
        for cell_idx, method_idx, ok, bad, _ in rep_result:
            correct[cell_idx, method_idx] += ok
            failed[cell_idx, method_idx] += bad
    cells = [
        {
            "method": cfg.label,
            "exponent_x": i,
            "exponent_y": j,
            "sign_x": sx,
            "sign_y": sy,
            "correct": int(correct[c, m]),
            "failed": int(failed[c, m]),
            "replications": int(replications),
        }
        for m, cfg in enumerate(methods)
        for c, (i, j, sx, sy) in enumerate(cells_def)
    ]
    return ExperimentReport(kind="outlier-grid", settings=settings, cells=cells)


def run_benchmark(settings: SimulationSettings, workers=None) -> ExperimentReport:
    """Same sweep as :func:`run_simulation` but reported as a timing
    table, including the KBI over DCorr wall-clock ratio wherever the
    same slope ran under both measures."""
    base = run_simulation(settings, workers=workers)
    by_key = {(cell["method"], cell["sample_size"]): cell for cell in base.cells}
    ratios = []
    for cfg in settings.methods:
        if cfg.measure != "kbi":
            continue
        partner = cfg.label.replace("+kbi", "+dcorr")
        for n in settings.sample_sizes:
            other = by_key.get((partner, n))
            if other is None or other["seconds"] == 0.0:
                continue
            ratios.append({
                "slope": cfg.slope,
                "sample_size": n,
                "kbi_over_dcorr": by_key[(cfg.label, n)]["seconds"] / other["seconds"],
            })
    return ExperimentReport(kind="benchmark", settings=base.settings,
                            cells=base.cells, ratios=ratios)
