"""Communication graphs, weight matrices, and Laplacian spectral objects.

All downstream algorithm and rate computations consume the objects built
here: an undirected connected graph with self-loops, a symmetric stochastic
weight matrix W, and the eigendecomposition of the weighted Laplacian
L = I - W.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Graph",
    "WeightMatrix",
    "LaplacianSpectrum",
    "NetworkModel",
    "NetworkError",
    "build_geometric_graph",
    "build_chain_graph",
    "build_complete_graph",
    "metropolis_weights",
    "scale_weights",
    "spectrum",
    "build_network",
    "save_network",
    "load_network",
]

SYMMETRY_TOL = 1e-12
STOCHASTIC_TOL = 1e-12
LAMBDA2_TOL = 1e-12


class NetworkError(ValueError):
    """Invalid graph or weight-matrix construction."""


@dataclass(frozen=True)
class Graph:
    """Undirected connected graph with explicit self-loops.

    ``edges`` holds unordered pairs (i, j) with i <= j, including every
    self-loop (i, i). ``neighborhoods[i]`` is the set of neighbors of i
    plus i itself.
    """

    node_count: int
    edges: frozenset
    positions: tuple | None = None

    @property
    def neighborhoods(self):
        hoods = [set() for _ in range(self.node_count)]
        for i, j in self.edges:
            hoods[i].add(j)
            hoods[j].add(i)
        return [frozenset(h) for h in hoods]

    @property
    def link_count(self):
        """Number of edges excluding self-loops."""
        return sum(1 for i, j in self.edges if i != j)

    def degree(self, i):
        """Number of neighbors of i, excluding the self-loop."""
        return len(self.neighborhoods[i]) - 1

    def is_connected(self):
        # breadth-first traversal; deliberately independent of any
        # eigensolver tolerance
        seen = {0}
        frontier = [0]
        hoods = self.neighborhoods
        while frontier:
            nxt = []
            for i in frontier:
                for j in hoods[i]:
                    if j not in seen:
                        seen.add(j)
                        nxt.append(j)
            frontier = nxt
        return len(seen) == self.node_count


def _validate_graph(g: Graph):
    if g.node_count < 2:
        raise NetworkError("graph needs at least 2 nodes")
    for i in range(g.node_count):
        if (i, i) not in g.edges:
            raise NetworkError(f"missing self-loop at node {i}")
    for i, j in g.edges:
        if not (0 <= i <= j < g.node_count):
            raise NetworkError(f"edge ({i},{j}) out of range or unordered")
    if not g.is_connected():
        raise NetworkError("graph is disconnected")


def _make_graph(n, pair_edges, positions=None):
    edges = {(i, i) for i in range(n)}
    for i, j in pair_edges:
        a, b = min(i, j), max(i, j)
        edges.add((a, b))
    return Graph(node_count=n, edges=frozenset(edges), positions=positions)


def build_geometric_graph(n, radius=0.45, rng_seed=0, max_attempts=100):
    """Random geometric graph on the unit square.

    Nodes are placed uniformly at random in [0,1]^2 and joined when their
    Euclidean distance is below ``radius``. If the draw is disconnected,
    the placement is resampled with the next seed; the seed that succeeded
    is recorded in ``Graph.positions`` metadata via the returned attempts.

    Returns (graph, attempts_used). Raises NetworkError after
    ``max_attempts`` failed draws (infeasible radius).
    """
    if n < 2:
        raise NetworkError("need n >= 2")
    if not (0.0 < radius):
        raise NetworkError("radius must be positive")
    radius = min(radius, np.sqrt(2.0) + 1e-9)
    for attempt in range(max_attempts):
        rng = np.random.default_rng(rng_seed + attempt)
        pts = rng.uniform(0.0, 1.0, size=(n, 2))
        pair_edges = []
        for i in range(n):
            for j in range(i + 1, n):
                if np.linalg.norm(pts[i] - pts[j]) < radius:
                    pair_edges.append((i, j))
        g = _make_graph(n, pair_edges, positions=tuple(map(tuple, pts)))
        if g.is_connected():
            return g, attempt + 1
    raise NetworkError(
        f"no connected geometric graph in {max_attempts} attempts "
        f"(n={n}, radius={radius}); radius likely infeasible"
    )


def build_chain_graph(n):
    """Path graph 0-1-...-(n-1) with self-loops."""
    if n < 2:
        raise NetworkError("need n >= 2")
    return _make_graph(n, [(i, i + 1) for i in range(n - 1)])


def build_complete_graph(n):
    if n < 2:
        raise NetworkError("need n >= 2")
    return _make_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Symmetric stochastic weight matrix with support on the graph edges.

    Positive definiteness is not enforced here: the plain Metropolis matrix
    of e.g. a 2-node graph is singular. ``scale_weights`` produces the
    positive-definite matrix the algorithms require.
    """

    entries: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", w)
        n = w.shape[0]
        if w.shape != (n, n):
            raise NetworkError("weight matrix must be square")
        if np.max(np.abs(w - w.T)) > SYMMETRY_TOL:
            raise NetworkError("weight matrix not symmetric")
        if np.max(np.abs(w @ np.ones(n) - 1.0)) > STOCHASTIC_TOL:
            raise NetworkError("weight matrix rows do not sum to 1")
        if np.min(w) < -STOCHASTIC_TOL:
            raise NetworkError("weight matrix has negative entries")

    @property
    def node_count(self):
        return self.entries.shape[0]

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.entries)[0])


def metropolis_weights(g: Graph) -> WeightMatrix:
    """Metropolis rule: W_ij = 1/(1+max(deg_i,deg_j)) on edges, diagonal
    fills the row to 1. Degrees count neighbors excluding the self-loop."""
    _validate_graph(g)
    n = g.node_count
    deg = [g.degree(i) for i in range(n)]
    w = np.zeros((n, n))
    for i, j in g.edges:
        if i != j:
            w[i, j] = w[j, i] = 1.0 / (1.0 + max(deg[i], deg[j]))
    for i in range(n):
        w[i, i] = 1.0 - np.sum(w[i]) + w[i, i]
    return WeightMatrix(w)


def scale_weights(w: WeightMatrix, a=1.1 / 2.0, b=0.9 / 2.0) -> WeightMatrix:
    """Return a*I + b*W, validated positive definite and stochastic.

    The default (a, b) = (0.55, 0.45) is the scaling used throughout the
    experiment harness; it keeps the matrix stochastic (a + b = 1) and
    pushes the spectrum strictly above zero.
    """
    if abs(a + b - 1.0) > 1e-12:
        raise NetworkError("scaling must satisfy a + b = 1 to stay stochastic")
    scaled = a * np.eye(w.node_count) + b * w.entries
    out = WeightMatrix(scaled)
    if out.min_eigenvalue() <= 0.0:
        raise NetworkError("scaled weight matrix lost positive definiteness")
    return out


@dataclass(frozen=True, eq=False)
class LaplacianSpectrum:
    """Eigendecomposition of L = I - W with the zero mode split off.

    ``eigvals_reduced`` holds lambda_2 <= ... <= lambda_N and ``q_reduced``
    the matching eigenvectors (N x (N-1)); the excluded pair is
    (0, 1/sqrt(N)).
    """

    laplacian: np.ndarray
    eigvals_reduced: np.ndarray
    q_reduced: np.ndarray

    @property
    def lambda2(self):
        return float(self.eigvals_reduced[0])

    @property
    def lambda_max(self):
        return float(self.eigvals_reduced[-1])

    @property
    def lambda_hat(self):
        return np.diag(self.eigvals_reduced)


def spectrum(w: WeightMatrix, tol=LAMBDA2_TOL) -> LaplacianSpectrum:
    """Full symmetric eigendecomposition of L = I - W.

    The smallest eigenvalue is analytically 0 (the all-ones vector) and is
    clamped to exact 0; the remaining eigenpairs form the reduced spectrum.
    Raises if lambda_2 <= tol (disconnected or numerically degenerate).
    """
    n = w.node_count
    lap = np.eye(n) - w.entries
    vals, vecs = np.linalg.eigh(lap)
    # the smallest eigenvalue is analytically 0 (all-ones eigenvector)
    if vals[1] <= tol:
        raise NetworkError(f"lambda_2 = {vals[1]:.3e} <= tol; graph degenerate")
    return LaplacianSpectrum(
        laplacian=lap,
        eigvals_reduced=vals[1:].copy(),
        q_reduced=vecs[:, 1:].copy(),
    )


@dataclass(frozen=True, eq=False)
class NetworkModel:
    """Bundle of graph, weight matrix, and Laplacian spectrum.

    Immutable after construction; safe to share read-only across threads.
    """

    graph: Graph
    weights: WeightMatrix
    spec: LaplacianSpectrum
    meta: dict = field(default_factory=dict)

    @property
    def node_count(self):
        return self.graph.node_count

    @property
    def lambda2(self):
        return self.spec.lambda2

    def laplacian_apply(self, x, d):
        """(L (x) I) x for stacked x in R^{N d}."""
        xm = np.asarray(x).reshape(self.node_count, d)
        return (self.spec.laplacian @ xm).reshape(-1)

    def weights_apply(self, x, d):
        """(W (x) I) x, i.e. per-node neighbor averages."""
        xm = np.asarray(x).reshape(self.node_count, d)
        return (self.weights.entries @ xm).reshape(-1)


def build_network(graph: Graph, scale=(1.1 / 2.0, 0.9 / 2.0), meta=None) -> NetworkModel:
    """Metropolis weights + scaling + spectrum for a validated graph."""
    _validate_graph(graph)
    wm = metropolis_weights(graph)
    w = scale_weights(wm, *scale) if scale is not None else wm
    return NetworkModel(graph=graph, weights=w, spec=spectrum(w), meta=dict(meta or {}))


def save_network(net: NetworkModel, path):
    """Serialize node positions, edge list, and W entries to a JSON file."""
    doc = {
        "node_count": net.node_count,
        "positions": net.graph.positions,
        "edges": sorted(list(e) for e in net.graph.edges),
        "weights": net.weights.entries.tolist(),
        "meta": net.meta,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)


def load_network(path) -> NetworkModel:
    with open(path) as fh:
        doc = json.load(fh)
    n = doc["node_count"]
    positions = doc.get("positions")
    g = _make_graph(
        n,
        [(i, j) for i, j in doc["edges"] if i != j],
        positions=tuple(map(tuple, positions)) if positions else None,
    )
    _validate_graph(g)
    w = WeightMatrix(np.array(doc["weights"], dtype=float))
    return NetworkModel(graph=g, weights=w, spec=spectrum(w), meta=doc.get("meta", {}))
