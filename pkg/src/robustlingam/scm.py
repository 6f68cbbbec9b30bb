"""Linear non-Gaussian structural causal models.

A model is a strictly triangular weight matrix over some causal order
plus one independent non-Gaussian noise term per variable:

    X_i = sum_j B_ij X_j + e_i,

where B_ij is the weight of the edge j -> i and every nonzero B_ij
points from an earlier to a later variable in the order.  All noise
families here are centered: symmetric ones are centered by
construction, skewed ones subtract their analytic mean, so simulated
data needs no intercepts.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParseError

__all__ = [
    "StudentT",
    "LognormalCentered",
    "ParetoCentered",
    "ExponentialCentered",
    "noise_from_string",
    "ScmSpec",
    "DataMatrix",
    "generate_random_scm",
    "sample",
    "inject_outlier",
    "validate_ordering",
    "order_respects_weights",
]

_WEIGHT_LOW = 0.1
_WEIGHT_HIGH = 0.9


@dataclass(frozen=True)
class StudentT:
    """Student t noise with ``df`` degrees of freedom (symmetric, so
    already centered; df <= 1 has no mean but keeps median zero)."""

    df: float

    def __post_init__(self):
        if self.df <= 0:
            raise ValueError("df must be positive")

    def sample(self, rng, size):
        return rng.standard_t(self.df, size=size)

    def to_dict(self):
        return {"family": "student-t", "df": self.df}


@dataclass(frozen=True)
class LognormalCentered:
    """Lognormal noise shifted by exp(mu + sigma^2/2) to mean zero."""

    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    def sample(self, rng, size):
        return rng.lognormal(self.mu, self.sigma, size=size) - np.exp(self.mu + 0.5 * self.sigma**2)

    def to_dict(self):
        return {"family": "lognormal", "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class ParetoCentered:
    """Pareto (type I, minimum ``scale``) noise shifted to mean zero.

    The mean shape*scale/(shape-1) only exists for shape > 1, so
    smaller shapes are rejected.
    """

    shape: float
    scale: float = 1.0

    def __post_init__(self):
        if self.shape <= 1:
            raise ValueError("shape must exceed 1 for the mean to exist")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def sample(self, rng, size):
        draws = self.scale * (1.0 + rng.pareto(self.shape, size=size))
        return draws - self.shape * self.scale / (self.shape - 1.0)

    def to_dict(self):
        return {"family": "pareto", "shape": self.shape, "scale": self.scale}


@dataclass(frozen=True)
class ExponentialCentered:
    """Exponential noise with the mean 1/rate subtracted."""

    rate: float = 1.0

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("rate must be positive")

    def sample(self, rng, size):
        return rng.exponential(1.0 / self.rate, size=size) - 1.0 / self.rate

    def to_dict(self):
        return {"family": "exponential", "rate": self.rate}


_NOISE_FAMILIES = {
    "student-t": lambda d: StudentT(float(d["df"])),
    "lognormal": lambda d: LognormalCentered(float(d.get("mu", 0.0)), float(d.get("sigma", 1.0))),
    "pareto": lambda d: ParetoCentered(float(d["shape"]), float(d.get("scale", 1.0))),
    "exponential": lambda d: ExponentialCentered(float(d.get("rate", 1.0))),
}


def noise_from_dict(d) -> object:
    try:
        family = d["family"]
    except (TypeError, KeyError):
        raise ParseError("noise entry must be an object with a 'family' key") from None
    if family not in _NOISE_FAMILIES:
        raise ParseError(f"unknown noise family {family!r}")
    try:
        return _NOISE_FAMILIES[family](d)
    except KeyError as exc:
        raise ParseError(f"noise family {family!r} is missing parameter {exc}") from None


def noise_from_string(text: str):
    """Parse compact noise notation: "t:3", "lognormal:0:1",
    "pareto:1.5:1", "exp:1"."""
    parts = text.split(":")
    tag, args = parts[0].strip().lower(), parts[1:]
    try:
        values = [float(a) for a in args]
        if tag in ("t", "student-t", "student"):
            return StudentT(*values)
        if tag in ("lognormal", "ln"):
            return LognormalCentered(*values)
        if tag == "pareto":
            return ParetoCentered(*values)
        if tag in ("exp", "exponential"):
            return ExponentialCentered(*values)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad noise specification {text!r}: {exc}") from None
    raise ParseError(f"unknown noise family {tag!r}")


def validate_ordering(order, p: int) -> np.ndarray:
    """Check that ``order`` is a permutation of 0..p-1 and return it as
    an int array."""
    arr = np.asarray(order, dtype=int)
    if arr.shape != (p,) or not np.array_equal(np.sort(arr), np.arange(p)):
        raise ValueError(f"not a permutation of 0..{p - 1}: {list(np.asarray(order).ravel())}")
    return arr


def order_respects_weights(order, weights) -> bool:
    """True when every nonzero weight j -> i has j before i in ``order``.

    This is the partial-order notion of a correct discovery: variables
    that share no directed path may appear in either relative position.
    """
    weights = np.asarray(weights)
    order = validate_ordering(order, weights.shape[0])
    position = np.empty(len(order), dtype=int)
    position[order] = np.arange(len(order))
    rows, cols = np.nonzero(weights)
    return bool(np.all(position[cols] < position[rows]))


@dataclass(frozen=True)
class ScmSpec:
    """A sampled or hand-written structural model.

    Attributes
    ----------
    order : ndarray of int
        Causal order; order[k] is the variable generated at stage k.
    weights : ndarray, shape (p, p)
        Connection matrix, weights[i, j] multiplies X_j in X_i's
        equation.  Must be strictly triangular with respect to
        ``order``.
    noise : tuple
        One centered noise distribution per variable, in variable
        (not causal) indexing.
    """

    order: np.ndarray
    weights: np.ndarray
    noise: tuple

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        p = weights.shape[0]
        if weights.shape != (p, p):
            raise ValueError("weights must be square")
        if not np.isfinite(weights).all():
            raise ValueError("weights must be finite")
        order = validate_ordering(self.order, p)
        position = np.empty(p, dtype=int)
        position[order] = np.arange(p)
        rows, cols = np.nonzero(weights)
        if np.any(position[cols] >= position[rows]):
            raise ValueError("weights must point forward in the causal order")
        noise = tuple(self.noise)
        if len(noise) != p:
            raise ValueError(f"need {p} noise distributions, got {len(noise)}")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "noise", noise)

    @property
    def p(self) -> int:
        return self.weights.shape[0]

    def to_json(self) -> str:
        return json.dumps({
            "p": self.p,
            "order": self.order.tolist(),
            "weights": self.weights.tolist(),
            "noise": [d.to_dict() for d in self.noise],
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ScmSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from None
        try:
            order = doc["order"]
            weights = np.asarray(doc["weights"], dtype=float)
            noise = tuple(noise_from_dict(d) for d in doc["noise"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed model document: {exc}") from None
        try:
            return cls(order=np.asarray(order), weights=weights, noise=noise)
        except ValueError as exc:
            raise ParseError(str(exc)) from None


def generate_random_scm(p: int, q: float, noise, rng) -> ScmSpec:
    """Draw a random acyclic model.

    The causal order is a uniform permutation.  Each earlier variable
    becomes a parent of a later one independently with probability q,
    and every edge weight is uniform on [-0.9, -0.1] union [0.1, 0.9],
    bounded away from zero so no edge is spuriously weak.

    Parameters
    ----------
    p : int
        Number of variables (at least 1).
    q : float
        Parent inclusion probability in [0, 1].
    noise : distribution or sequence of p distributions
        Shared or per-variable noise, in variable indexing.
    rng : numpy.random.Generator
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    if hasattr(noise, "sample"):
        noise = (noise,) * p
    order = rng.permutation(p)
    weights = np.zeros((p, p))
    for k in range(1, p):
        child = order[k]
        mask = rng.random(k) < q
        n_par = int(mask.sum())
        if n_par == 0:
            continue
        magnitude = rng.uniform(_WEIGHT_LOW, _WEIGHT_HIGH, size=n_par)
        sign = np.where(rng.random(n_par) < 0.5, -1.0, 1.0)
        weights[child, order[:k][mask]] = magnitude * sign
    return ScmSpec(order=order, weights=weights, noise=tuple(noise))


@dataclass
class DataMatrix:
    """An n x p sample with named columns.

    Columns follow variable indexing; default names are x1..xp.
    """

    values: np.ndarray
    names: list = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError("values must be a nonempty 2d array")
        if not np.isfinite(values).all():
            raise ValueError("values must be finite")
        if self.names is None:
            names = [f"x{j + 1}" for j in range(values.shape[1])]
        else:
            names = [str(c) for c in self.names]
            if len(names) != values.shape[1]:
                raise ValueError("one name per column required")
        self.values = values
        self.names = names

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def to_csv(self, path_or_buffer, header: bool = True) -> None:
        if hasattr(path_or_buffer, "write"):
            self._write(path_or_buffer, header)
        else:
            with open(path_or_buffer, "w", newline="") as handle:
                self._write(handle, header)

    def _write(self, handle, header):
        writer = csv.writer(handle)
        if header:
            writer.writerow(self.names)
        for row in self.values:
            writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path_or_buffer) -> "DataMatrix":
        """Read a headered or headerless numeric CSV.

        The first row is taken as a header exactly when at least one of
        its fields does not parse as a number.
        """
        if hasattr(path_or_buffer, "read"):
            rows = list(csv.reader(path_or_buffer))
        else:
            with open(path_or_buffer, newline="") as handle:
                rows = list(csv.reader(handle))
        rows = [r for r in rows if r]
        if not rows:
            raise ParseError("empty CSV input")
        names = None
        start = 0

        def as_floats(fields, row_index):
            out = []
            for j, cell in enumerate(fields):
                try:
                    out.append(float(cell))
                except ValueError:
                    raise ParseError(f"not a number: {cell!r}", row=row_index, column=j) from None
            return out

        try:
            first = as_floats(rows[0], 0)
        except ParseError:
            names = [c.strip() for c in rows[0]]
            start = 1
            first = None
        width = len(names) if names is not None else len(rows[0])
        data = [] if first is None else [first]
        for idx in range(start, len(rows)):
            if len(rows[idx]) != width:
                raise ParseError(f"expected {width} fields, found {len(rows[idx])}", row=idx)
            if idx == 0 and first is not None:
                continue
            data.append(as_floats(rows[idx], idx))
        if not data:
            raise ParseError("no data rows")
        values = np.asarray(data, dtype=float)
        if not np.isfinite(values).all():
            bad = np.argwhere(~np.isfinite(values))[0]
            raise ParseError("non-finite value", row=int(bad[0]) + start, column=int(bad[1]))
        return cls(values=values, names=names)

    def to_json(self) -> str:
        return json.dumps({"names": self.names, "values": self.values.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "DataMatrix":
        try:
            doc = json.loads(text)
            return cls(values=np.asarray(doc["values"], dtype=float), names=doc.get("names"))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed data document: {exc}") from None


def sample(spec: ScmSpec, n: int, rng) -> DataMatrix:
    """Draw n rows from the model by substitution along the causal order.

    Noise columns are drawn in variable indexing (one block per
    variable), which fixes the stream layout for reproducibility.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    p = spec.p
    noise = np.empty((n, p))
    for i in range(p):
        noise[:, i] = spec.noise[i].sample(rng, n)
    values = np.empty((n, p))
    for k, var in enumerate(spec.order):
        parents = spec.order[:k][spec.weights[var, spec.order[:k]] != 0]
        values[:, var] = noise[:, var]
        if parents.size:
            values[:, var] += values[:, parents] @ spec.weights[var, parents]
    return DataMatrix(values=values)


def inject_outlier(data: DataMatrix, row: int, column: int, value: float) -> DataMatrix:
    """Copy of ``data`` with one observed cell replaced.

    Raises IndexError outside the matrix; the contamination is applied
    to the observed value only and is not propagated to descendants.
    """
    if not 0 <= row < data.n:
        raise IndexError(f"row {row} outside 0..{data.n - 1}")
    if not 0 <= column < data.p:
        raise IndexError(f"column {column} outside 0..{data.p - 1}")
    if not np.isfinite(value):
        raise ValueError("outlier value must be finite")
    values = data.values.copy()
    values[row, column] = float(value)
    return DataMatrix(values=values, names=list(data.names))
