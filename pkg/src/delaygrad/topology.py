"""Communication graphs and their doubly stochastic mixing matrices.

Networks are undirected geometric graphs on the unit square: two nodes are
linked whenever their Euclidean distance is strictly below a reference
radius. Mixing weights follow the lazy Metropolis rule, which is symmetric,
doubly stochastic, and aperiodic on any connected graph.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DENSE_SIGMA2_CUTOFF = 512
POWER_ITERATION_TOL = 1e-12
POWER_ITERATION_CAP = 100_000


class NotConnected(Exception):
    """Raised when no connected graph was produced within the attempt budget."""


class NumericalFailure(Exception):
    """Raised when an iterative eigcomputation fails to converge."""


def _edges_within_radius(coords: np.ndarray, r: float) -> frozenset[tuple[int, int]]:
    diff = coords[:, None, :] - coords[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    i_idx, j_idx = np.nonzero(dist < r)
    return frozenset((int(i), int(j)) for i, j in zip(i_idx, j_idx) if i < j)


def _is_connected(n: int, edges: frozenset[tuple[int, int]]) -> bool:
    if n <= 1:
        return True
    adjacency: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges:
        adjacency[i].append(j)
        adjacency[j].append(i)
    seen = [False] * n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        node = stack.pop()
        for other in adjacency[node]:
            if not seen[other]:
                seen[other] = True
                count += 1
                stack.append(other)
    return count == n


@dataclass(frozen=True)
class Topology:
    """Connected undirected graph with planar node coordinates.

    ``edges`` holds unordered pairs as ``(i, j)`` with ``i < j`` and no
    self-loops. Connectivity is checked at construction.
    """

    n: int
    coords: np.ndarray
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        coords = np.asarray(self.coords, dtype=float)
        object.__setattr__(self, "coords", coords)
        if coords.shape != (self.n, 2):
            raise ValueError(f"coords must have shape ({self.n}, 2), got {coords.shape}")
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop ({i}, {j}) not allowed")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
        if not _is_connected(self.n, self.edges):
            raise NotConnected(f"graph with {self.n} nodes and {len(self.edges)} edges is not connected")

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=bool)
        for i, j in self.edges:
            adj[i, j] = True
            adj[j, i] = True
        return adj


@dataclass(frozen=True)
class MixingMatrix:
    """Square weight matrix with its cached second-largest singular value.

    Construction does not validate; run :func:`validate_mixing` to check the
    stochasticity, sparsity, and irreducibility requirements.
    """

    entries: np.ndarray
    sigma2: float

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"entries must be square, got shape {entries.shape}")

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def generate_random_geometric(
    n: int,
    r: float,
    seed: int,
    max_attempts: int = 1000,
) -> Topology:
    """Sample a connected random geometric graph on the unit square.

    Coordinates are drawn uniformly on [0, 1]^2 and redrawn (up to
    ``max_attempts`` times) until the strict-radius graph is connected.

    Raises
    ------
    NotConnected
        If every attempt produced a disconnected graph.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if r <= 0:
        raise ValueError("r must be > 0")
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        coords = rng.uniform(0.0, 1.0, size=(n, 2))
        edges = _edges_within_radius(coords, r)
        if _is_connected(n, edges):
            return Topology(n=n, coords=coords, edges=edges)
    raise NotConnected(f"no connected graph in {max_attempts} attempts (n={n}, r={r}, seed={seed})")


def lazy_metropolis(topology: Topology) -> MixingMatrix:
    """Build the lazy Metropolis weights for a connected topology.

    Edge weight 1 / (2 max(deg_i, deg_j)), self-weight the remainder to 1.
    The result is symmetric, doubly stochastic, and has strictly positive
    diagonal (each self-weight is at least 1/2).
    """
    n = topology.n
    deg = topology.degrees()
    a = np.zeros((n, n), dtype=float)
    for i, j in topology.edges:
        w = 1.0 / (2.0 * max(deg[i], deg[j]))
        a[i, j] = w
        a[j, i] = w
    for i in range(n):
        a[i, i] = 1.0 - a[i].sum()
    return MixingMatrix(entries=a, sigma2=second_largest_singular_value(a))


def second_largest_singular_value(
    entries: np.ndarray,
    dense_cutoff: int = DENSE_SIGMA2_CUTOFF,
) -> float:
    """Second-largest singular value of a mixing matrix.

    Symmetric matrices go through a full eigendecomposition (second-largest
    absolute eigenvalue); general ones through SVD. Above ``dense_cutoff``
    nodes, a power iteration on A^T A deflated by the all-ones singular pair
    is used instead.
    """
    a = np.asarray(entries, dtype=float)
    n = a.shape[0]
    if n == 1:
        return 0.0
    if n <= dense_cutoff:
        if np.array_equal(a, a.T):
            eigvals = np.linalg.eigvalsh(a)
            return float(np.sort(np.abs(eigvals))[-2])
        svals = np.linalg.svd(a, compute_uv=False)
        return float(svals[1])
    return _sigma2_power_iteration(a)


def _sigma2_power_iteration(a: np.ndarray) -> float:
    # A doubly stochastic => top singular pair of A is (1, 1/sqrt(n), 1/sqrt(n));
    # deflating it from A^T A leaves sigma2^2 as the dominant eigenvalue.
    n = a.shape[0]
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n)
    v -= v.mean()
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    for _ in range(POWER_ITERATION_CAP):
        w = a.T @ (a @ v)
        w -= w.mean()
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        lam = float(v @ (a.T @ (a @ v)))
        if abs(lam - lam_prev) <= POWER_ITERATION_TOL * max(1.0, abs(lam)):
            return float(np.sqrt(max(lam, 0.0)))
        lam_prev = lam
    raise NumericalFailure("power iteration for sigma2 did not converge")


@dataclass(frozen=True)
class ValidationClause:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class MixingReport:
    """Per-clause pass/fail record for the mixing-matrix requirements."""

    clauses: tuple[ValidationClause, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.clauses)

    def failures(self) -> tuple[ValidationClause, ...]:
        return tuple(c for c in self.clauses if not c.passed)

    def clause(self, name: str) -> ValidationClause:
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)


STOCHASTICITY_TOL = 1e-12


def validate_mixing(m: MixingMatrix, topology: Topology) -> MixingReport:
    """Check a weight matrix against the consensus requirements.

    Clauses: row/column sums equal one within 1e-12, nonnegative entries,
    off-diagonal support matching the edge set, at least one strictly
    positive diagonal entry, and irreducibility (the graph induced by the
    positive off-diagonal entries is connected). Returns a structured
    report; never raises on a bad matrix.
    """
    a = m.entries
    n = m.n
    clauses = []

    row_err = float(np.max(np.abs(a.sum(axis=1) - 1.0))) if n else 0.0
    col_err = float(np.max(np.abs(a.sum(axis=0) - 1.0))) if n else 0.0
    clauses.append(ValidationClause(
        "row_stochastic", row_err <= STOCHASTICITY_TOL, f"max row-sum error {row_err:.3e}"))
    clauses.append(ValidationClause(
        "column_stochastic", col_err <= STOCHASTICITY_TOL, f"max column-sum error {col_err:.3e}"))

    min_entry = float(a.min())
    clauses.append(ValidationClause(
        "nonnegative", min_entry >= 0.0, f"min entry {min_entry:.3e}"))

    adj = topology.adjacency()
    off_diag = ~np.eye(n, dtype=bool)
    positive = a > 0.0
    support_ok = bool(np.all(positive[off_diag] == adj[off_diag]))
    clauses.append(ValidationClause(
        "edge_support", support_ok,
        "off-diagonal positivity matches edge set" if support_ok
        else "off-diagonal support differs from edge set"))

    diag_ok = bool(np.any(np.diagonal(a) > 0.0))
    clauses.append(ValidationClause(
        "positive_diagonal", diag_ok,
        f"{int(np.count_nonzero(np.diagonal(a) > 0.0))} positive diagonal entries"))

    induced = frozenset(
        (int(i), int(j))
        for i, j in zip(*np.nonzero(np.triu(positive & off_diag)))
    )
    irreducible = _is_connected(n, induced)
    clauses.append(ValidationClause(
        "irreducible", irreducible,
        "positive-weight graph is connected" if irreducible
        else "positive-weight graph is disconnected"))

    return MixingReport(clauses=tuple(clauses))


def graph_to_json(topology: Topology, mixing: MixingMatrix) -> str:
    """Serialize a topology and its mixing matrix to one JSON document."""
    doc = {
        "n": topology.n,
        "coords": topology.coords.tolist(),
        "edges": sorted([list(e) for e in topology.edges]),
        "A": mixing.entries.tolist(),
        "sigma2": mixing.sigma2,
    }
    return json.dumps(doc, indent=2)


def graph_from_json(text: str) -> tuple[Topology, MixingMatrix]:
    doc = json.loads(text)
    topology = Topology(
        n=int(doc["n"]),
        coords=np.asarray(doc["coords"], dtype=float),
        edges=frozenset((int(i), int(j)) for i, j in doc["edges"]),
    )
    mixing = MixingMatrix(
        entries=np.asarray(doc["A"], dtype=float),
        sigma2=float(doc["sigma2"]),
    )
    return topology, mixing


def save_graph(path: str | Path, topology: Topology, mixing: MixingMatrix) -> None:
    Path(path).write_text(graph_to_json(topology, mixing))


def load_graph(path: str | Path) -> tuple[Topology, MixingMatrix]:
    return graph_from_json(Path(path).read_text())
