"""Finite-sum least-squares objectives on axis-aligned box domains.

Each node i owns one data pair (features x_i, target y_i) and the local loss
f_i(w) = (x_i^T w - y_i)^2. The network objective is the plain sum of the
local losses, minimized over a box. The module also supplies the per-node
Lipschitz constants of the losses over the box and a reference solver for
the constrained optimal value.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class MaxIterations(Exception):
    """Raised when the reference solver exhausts its iteration budget."""


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box [lower, upper] used as the feasible set."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.shape != upper.shape:
            raise ValueError("lower and upper must have the same shape")
        if np.any(lower > upper):
            raise ValueError("every lower bound must be <= its upper bound")

    @classmethod
    def symmetric(cls, half_width: float, d: int) -> "BoxDomain":
        return cls(lower=np.full(d, -half_width), upper=np.full(d, half_width))

    @property
    def d(self) -> int:
        return self.lower.shape[0]

    def clamp(self, w: np.ndarray) -> np.ndarray:
        """Euclidean projection onto the box (componentwise clip)."""
        return np.clip(w, self.lower, self.upper)

    def contains(self, w: np.ndarray, tol: float = 0.0) -> bool:
        return bool(np.all(w >= self.lower - tol) and np.all(w <= self.upper + tol))

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        shape = (self.d,) if size is None else (size, self.d)
        return rng.uniform(self.lower, self.upper, size=shape)


@dataclass(frozen=True)
class LeastSquaresObjective:
    """Per-node squared residual losses f_i(w) = (x_i^T w - y_i)^2."""

    features: np.ndarray
    targets: np.ndarray

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=float)
        targets = np.asarray(self.targets, dtype=float)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "targets", targets)
        if features.ndim != 2 or features.shape[0] < 1:
            raise ValueError("features must be a nonempty (n, d) matrix")
        if targets.shape != (features.shape[0],):
            raise ValueError("targets must be an n-vector matching features")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def local_value(self, i: int, w: np.ndarray) -> float:
        return float((self.features[i] @ w - self.targets[i]) ** 2)

    def local_gradient(self, i: int, w: np.ndarray) -> np.ndarray:
        """Analytic gradient of f_i at w: 2 (x_i^T w - y_i) x_i."""
        residual = self.features[i] @ w - self.targets[i]
        return 2.0 * residual * self.features[i]

    def global_value(self, w: np.ndarray) -> float:
        residuals = self.features @ w - self.targets
        return float(residuals @ residuals)

    def global_gradient(self, w: np.ndarray) -> np.ndarray:
        residuals = self.features @ w - self.targets
        return 2.0 * self.features.T @ residuals

    def stacked_gradients(self, states: np.ndarray) -> np.ndarray:
        """Row i is the gradient of f_i at row i of ``states`` (n, d)."""
        residuals = np.einsum("ij,ij->i", self.features, states) - self.targets
        return 2.0 * residuals[:, None] * self.features

    def values_at_rows(self, points: np.ndarray) -> np.ndarray:
        """Global objective evaluated at each row of ``points`` (m, d)."""
        residuals = points @ self.features.T - self.targets[None, :]
        return np.einsum("ij,ij->i", residuals, residuals)

    def smoothness_constant(self) -> float:
        """Largest eigenvalue of the global Hessian 2 sum_i x_i x_i^T."""
        gram = self.features.T @ self.features
        return 2.0 * float(np.linalg.eigvalsh(gram)[-1])


def random_instance(n: int, d: int, seed: int) -> LeastSquaresObjective:
    """Features and targets drawn uniformly on [0, 1] with a seeded generator."""
    rng = np.random.default_rng(seed)
    features = rng.uniform(0.0, 1.0, size=(n, d))
    targets = rng.uniform(0.0, 1.0, size=n)
    return LeastSquaresObjective(features=features, targets=targets)


@dataclass(frozen=True)
class LipschitzConstants:
    """Per-node Lipschitz constants of the losses over a box, and their sum."""

    per_node: np.ndarray
    total: float


def lipschitz_bound(obj: LeastSquaresObjective, i: int, box: BoxDomain) -> float:
    """Tight Lipschitz constant of f_i over the box.

    The residual is affine in w, so its extrema over the box sit at the
    corner picked coordinatewise by the sign of the feature entry; the
    constant is 2 ||x_i|| max |residual|.
    """
    x = obj.features[i]
    y = obj.targets[i]
    hi = float(np.sum(np.where(x > 0, x * box.upper, x * box.lower))) - y
    lo = float(np.sum(np.where(x > 0, x * box.lower, x * box.upper))) - y
    max_abs_residual = max(abs(hi), abs(lo))
    return 2.0 * float(np.linalg.norm(x)) * max_abs_residual


def lipschitz_constants(obj: LeastSquaresObjective, box: BoxDomain) -> LipschitzConstants:
    per_node = np.array([lipschitz_bound(obj, i, box) for i in range(obj.n)])
    return LipschitzConstants(per_node=per_node, total=float(per_node.sum()))


DEFAULT_FSTAR_TOL = 1e-10
FSTAR_ITERATION_CAP = 10_000_000


def _fixed_point_residual(obj, box, w, eta):
    return float(np.linalg.norm(w - box.clamp(w - eta * obj.global_gradient(w))))


def optimal_value(
    obj: LeastSquaresObjective,
    box: BoxDomain,
    tol: float = DEFAULT_FSTAR_TOL,
    max_iter: int = FSTAR_ITERATION_CAP,
) -> tuple[float, np.ndarray]:
    """Constrained optimal value by projected gradient descent.

    Runs with the exact stepsize 1/L until the projected-gradient
    fixed-point residual drops below ``tol``.

    Returns
    -------
    (value, minimizer)

    Raises
    ------
    MaxIterations
        If the residual target is not met within ``max_iter`` iterations.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    smoothness = obj.smoothness_constant()
    if smoothness == 0.0:
        w = box.clamp(np.zeros(obj.d))
        return obj.global_value(w), w
    eta = 1.0 / smoothness
    w = box.clamp(np.zeros(obj.d))
    for _ in range(max_iter):
        w_next = box.clamp(w - eta * obj.global_gradient(w))
        if np.linalg.norm(w - w_next) <= tol:
            return obj.global_value(w_next), w_next
        w = w_next
    raise MaxIterations(f"projected gradient did not reach residual {tol}")


def optimal_value_accelerated(
    obj: LeastSquaresObjective,
    box: BoxDomain,
    tol: float = DEFAULT_FSTAR_TOL,
    max_iter: int = FSTAR_ITERATION_CAP,
) -> tuple[float, np.ndarray]:
    """Constrained optimal value by an accelerated projected-gradient scheme.

    Independent cross-check for :func:`optimal_value`; same stopping rule on
    the fixed-point residual, evaluated at the primal iterate.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    smoothness = obj.smoothness_constant()
    if smoothness == 0.0:
        w = box.clamp(np.zeros(obj.d))
        return obj.global_value(w), w
    eta = 1.0 / smoothness
    w = box.clamp(np.zeros(obj.d))
    momentum_point = w.copy()
    t_k = 1.0
    for _ in range(max_iter):
        w_next = box.clamp(momentum_point - eta * obj.global_gradient(momentum_point))
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k))
        momentum_point = w_next + ((t_k - 1.0) / t_next) * (w_next - w)
        w = w_next
        t_k = t_next
        if _fixed_point_residual(obj, box, w, eta) <= tol:
            return obj.global_value(w), w
    raise MaxIterations(f"accelerated projected gradient did not reach residual {tol}")


def dataset_to_csv(obj: LeastSquaresObjective) -> str:
    """One row per node: d feature columns then the target."""
    buf = io.StringIO()
    header = [f"x{c}" for c in range(obj.d)] + ["y"]
    buf.write(",".join(header) + "\n")
    for i in range(obj.n):
        row = [repr(float(v)) for v in obj.features[i]] + [repr(float(obj.targets[i]))]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def dataset_from_csv(text: str) -> LeastSquaresObjective:
    lines = [ln for ln in text.strip().splitlines() if ln]
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    data = np.asarray(rows, dtype=float)
    return LeastSquaresObjective(features=data[:, :-1], targets=data[:, -1])


def dataset_to_json(obj: LeastSquaresObjective) -> str:
    return json.dumps({"features": obj.features.tolist(), "targets": obj.targets.tolist()}, indent=2)


def dataset_from_json(text: str) -> LeastSquaresObjective:
    doc = json.loads(text)
    return LeastSquaresObjective(
        features=np.asarray(doc["features"], dtype=float),
        targets=np.asarray(doc["targets"], dtype=float),
    )


def save_dataset(path: str | Path, obj: LeastSquaresObjective) -> None:
    path = Path(path)
    if path.suffix == ".json":
        path.write_text(dataset_to_json(obj))
    else:
        path.write_text(dataset_to_csv(obj))


def load_dataset(path: str | Path) -> LeastSquaresObjective:
    path = Path(path)
    if path.suffix == ".json":
        return dataset_from_json(path.read_text())
    return dataset_from_csv(path.read_text())
