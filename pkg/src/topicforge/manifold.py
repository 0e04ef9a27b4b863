"""From-scratch UMAP dimensionality reduction, plus a PCA alternative.

Stages: exact kNN graph -> per-point bandwidth calibration -> fuzzy
symmetrization -> SGD layout with negative sampling. Defaults follow the
pipeline configuration (15 neighbors, 5 components, min_dist 0, cosine).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import optimize, sparse

from .errors import FitDiverged, InsufficientData, ZeroVector
from .embedding import EmbeddingMatrix

SMOOTH_KNN_TOL = 1e-5
SIGMA_LO = 1e-6
SIGMA_HI = 1e4
GRAD_CLIP = 4.0


@dataclass
class UmapParams:
    n_neighbors: int = 15
    n_components: int = 5
    min_dist: float = 0.0
    spread: float = 1.0
    metric: str = "cosine"
    n_epochs: int = 500
    learning_rate: float = 1.0
    negative_sample_rate: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.n_neighbors < 2:
            raise InsufficientData("n_neighbors must be >= 2")
        if self.n_components < 1:
            raise InsufficientData("n_components must be >= 1")
        if self.min_dist > self.spread:
            raise ValueError("min_dist must be <= spread")
        if self.metric not in ("cosine", "euclidean"):
            raise ValueError(f"unknown metric {self.metric!r}")


@dataclass(frozen=True)
class KnnGraph:
    k: int
    neighbor_ids: np.ndarray  # (n, k) int
    distances: np.ndarray  # (n, k) sorted ascending


@dataclass(frozen=True)
class FuzzySimplicialSet:
    weights: sparse.csr_matrix  # symmetric, zero diagonal
    rho: np.ndarray
    sigma: np.ndarray


@dataclass(frozen=True)
class LowDimLayout:
    coords: np.ndarray  # (n, n_components)
    params: UmapParams
    seed: int


def pairwise_distances(data: np.ndarray, metric: str) -> np.ndarray:
    if metric == "euclidean":
        sq = np.sum(data ** 2, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * data @ data.T
        return np.sqrt(np.maximum(d2, 0.0))
    norms = np.linalg.norm(data, axis=1)
    if np.any(norms == 0):
        raise ZeroVector("cosine metric requires nonzero rows")
    sims = (data / norms[:, None]) @ (data / norms[:, None]).T
    return np.clip(1.0 - sims, 0.0, 2.0)


def knn_graph(embeddings: EmbeddingMatrix | np.ndarray, k: int, metric: str = "euclidean") -> KnnGraph:
    """Exact k nearest neighbors (self excluded), ties broken by lower index."""
    data = embeddings.data if isinstance(embeddings, EmbeddingMatrix) else np.asarray(embeddings, float)
    n = data.shape[0]
    if n <= k:
        raise InsufficientData(f"need more than k={k} points, got {n}")
    dist = pairwise_distances(data, metric)
    np.fill_diagonal(dist, np.inf)
    # stable sort keeps equal distances in index order
    order = np.argsort(dist, axis=1, kind="stable")[:, :k]
    return KnnGraph(
        k=k,
        neighbor_ids=order,
        distances=np.take_along_axis(dist, order, axis=1),
    )


def smooth_knn(dist_row: np.ndarray, n_iter: int = 64) -> tuple[float, float, np.ndarray, bool]:
    """Calibrate (rho, sigma) so memberships sum to log2(k).

    Returns (rho, sigma, memberships, unattainable_flag). rho is the
    smallest positive distance; sigma found by bisection on (1e-6, 1e4].
    """
    d = np.asarray(dist_row, dtype=float)
    k = d.shape[0]
    if k < 2:
        raise InsufficientData("smooth_knn needs k >= 2")
    positive = d[d > 0]
    rho = float(positive.min()) if positive.size else 0.0
    target = np.log2(k)
    shifted = np.maximum(d - rho, 0.0)

    def total(sigma: float) -> float:
        return float(np.sum(np.exp(-shifted / sigma)))

    lo, hi = SIGMA_LO, SIGMA_HI
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        if total(mid) > target:
            hi = mid
        else:
            lo = mid
    sigma = 0.5 * (lo + hi)
    memberships = np.exp(-shifted / sigma)
    unattainable = abs(total(sigma) - target) > SMOOTH_KNN_TOL
    return rho, sigma, memberships, unattainable


def fuzzy_union(directed: sparse.spmatrix) -> sparse.csr_matrix:
    """Probabilistic t-conorm symmetrization: a + a.T - a*a.T elementwise."""
    a = directed.tocsr()
    result = a + a.T - a.multiply(a.T)
    result.setdiag(0.0)
    result.eliminate_zeros()
    return result.tocsr()


def fuzzy_simplicial_set(graph: KnnGraph) -> FuzzySimplicialSet:
    n = graph.neighbor_ids.shape[0]
    rows = np.repeat(np.arange(n), graph.k)
    cols = graph.neighbor_ids.ravel()
    vals = np.empty(n * graph.k)
    rho = np.empty(n)
    sigma = np.empty(n)
    for i in range(n):
        rho[i], sigma[i], memberships, _ = smooth_knn(graph.distances[i])
        vals[i * graph.k:(i + 1) * graph.k] = memberships
    directed = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n))
    return FuzzySimplicialSet(weights=fuzzy_union(directed), rho=rho, sigma=sigma)


def low_dim_kernel(d: np.ndarray, a: float, b: float) -> np.ndarray:
    return 1.0 / (1.0 + a * d ** (2.0 * b))


def attractive_grad(d: float, a: float, b: float) -> float:
    """d/dd of log(1/(1 + a d^{2b})) — the per-edge attraction term."""
    return -(2.0 * a * b * d ** (2.0 * b - 1.0)) / (1.0 + a * d ** (2.0 * b))


def repulsive_grad(d: float, a: float, b: float) -> float:
    """d/dd of log(1 - 1/(1 + a d^{2b})) — the negative-sample term."""
    return (2.0 * b) / (d * (1.0 + a * d ** (2.0 * b)))


def fit_ab(min_dist: float, spread: float) -> tuple[float, float]:
    """Least-squares fit of 1/(1+a d^{2b}) to the min_dist/spread target curve."""
    if spread <= 0:
        raise FitDiverged("spread must be positive")
    grid = np.linspace(0.0, 3.0 * spread, 300)
    target = np.where(grid > min_dist, np.exp(-(grid - min_dist) / spread), 1.0)
    try:
        (a, b), _ = optimize.curve_fit(low_dim_kernel, grid, target, p0=(1.0, 1.0), maxfev=10000)
    except RuntimeError as exc:
        raise FitDiverged(str(exc)) from exc
    if a <= 0 or b <= 0:
        raise FitDiverged(f"non-positive kernel parameters a={a}, b={b}")
    residual = np.sqrt(np.mean((low_dim_kernel(grid, a, b) - target) ** 2))
    if residual > 0.1:
        raise FitDiverged(f"fit residual {residual:.3g} above 0.1")
    return float(a), float(b)


@njit(cache=True)
def _sgd_layout(coords, head, tail, epochs_per_sample, a, b, n_epochs,
                learning_rate, negative_sample_rate, seed):
    np.random.seed(seed)
    n_vertices = coords.shape[0]
    dim = coords.shape[1]
    n_edges = head.shape[0]
    epoch_of_next_sample = epochs_per_sample.copy()
    epochs_per_negative = epochs_per_sample / negative_sample_rate
    epoch_of_next_negative = epochs_per_negative.copy()
    for epoch in range(n_epochs):
        alpha = learning_rate * (1.0 - epoch / n_epochs)
        for e in range(n_edges):
            if epoch_of_next_sample[e] > epoch:
                continue
            i = head[e]
            j = tail[e]
            d2 = 0.0
            for c in range(dim):
                diff = coords[i, c] - coords[j, c]
                d2 += diff * diff
            if d2 > 0.0:
                coeff = (-2.0 * a * b * d2 ** (b - 1.0)) / (1.0 + a * d2 ** b)
            else:
                coeff = 0.0
            for c in range(dim):
                g = coeff * (coords[i, c] - coords[j, c])
                if g > GRAD_CLIP:
                    g = GRAD_CLIP
                elif g < -GRAD_CLIP:
                    g = -GRAD_CLIP
                coords[i, c] += alpha * g
                coords[j, c] -= alpha * g
            epoch_of_next_sample[e] += epochs_per_sample[e]
            n_neg = int((epoch - epoch_of_next_negative[e]) / epochs_per_negative[e])
            for _ in range(n_neg):
                t = np.random.randint(0, n_vertices)
                if t == i:
                    continue
                d2 = 0.0
                for c in range(dim):
                    diff = coords[i, c] - coords[t, c]
                    d2 += diff * diff
                if d2 > 0.0:
                    coeff = (2.0 * b) / ((0.001 + d2) * (1.0 + a * d2 ** b))
                else:
                    coeff = 0.0
                for c in range(dim):
                    if coeff > 0.0:
                        g = coeff * (coords[i, c] - coords[t, c])
                        if g > GRAD_CLIP:
                            g = GRAD_CLIP
                        elif g < -GRAD_CLIP:
                            g = -GRAD_CLIP
                    else:
                        g = GRAD_CLIP
                    coords[i, c] += alpha * g
            epoch_of_next_negative[e] += n_neg * epochs_per_negative[e]
    return coords


def optimize_layout(graph: FuzzySimplicialSet, params: UmapParams) -> LowDimLayout:
    """Seeded SGD over the fuzzy graph; single-threaded and deterministic."""
    n = graph.weights.shape[0]
    if n == 0:
        raise InsufficientData("empty fuzzy graph")
    rng = np.random.RandomState(params.seed)
    coords = rng.uniform(-10.0, 10.0, size=(n, params.n_components))
    coo = graph.weights.tocoo()
    weights = coo.data.copy()
    # edges sampled too rarely to matter within the epoch budget are dropped
    max_w = weights.max() if weights.size else 0.0
    if max_w > 0 and params.n_epochs > 0:
        keep = weights >= max_w / params.n_epochs
        head = coo.row[keep].astype(np.int64)
        tail = coo.col[keep].astype(np.int64)
        weights = weights[keep]
        epochs_per_sample = max_w / weights
        a, b = fit_ab(params.min_dist, params.spread)
        coords = _sgd_layout(
            coords, head, tail, epochs_per_sample, a, b,
            params.n_epochs, params.learning_rate,
            params.negative_sample_rate, params.seed,
        )
    if not np.all(np.isfinite(coords)):
        raise FitDiverged("layout produced non-finite coordinates")
    return LowDimLayout(coords=coords, params=params, seed=params.seed)


def reduce(embeddings: EmbeddingMatrix | np.ndarray, params: UmapParams | None = None) -> LowDimLayout:
    """Full reduction: knn -> calibration -> fuzzy union -> SGD layout."""
    params = params or UmapParams()
    data = embeddings.data if isinstance(embeddings, EmbeddingMatrix) else np.asarray(embeddings, float)
    if data.shape[0] <= params.n_neighbors:
        raise InsufficientData(
            f"need more than n_neighbors={params.n_neighbors} points, got {data.shape[0]}")
    graph = knn_graph(data, params.n_neighbors, params.metric)
    fss = fuzzy_simplicial_set(graph)
    return optimize_layout(fss, params)


def pca_reduce(embeddings: EmbeddingMatrix | np.ndarray, n_components: int,
               n_iter: int = 200, tol: float = 1e-9) -> LowDimLayout:
    """PCA via power iteration with deflation; deterministic sign rule."""
    data = embeddings.data if isinstance(embeddings, EmbeddingMatrix) else np.asarray(embeddings, float)
    n, d = data.shape
    if n < 2:
        raise InsufficientData("pca needs at least 2 points")
    centered = data - data.mean(axis=0)
    cov = centered.T @ centered
    components = np.zeros((n_components, d))
    for comp in range(n_components):
        v = np.full(d, 1.0 / np.sqrt(d))
        for _ in range(n_iter):
            w = cov @ v
            norm = np.linalg.norm(w)
            if norm == 0.0:
                break
            w /= norm
            if np.linalg.norm(w - v) < tol:
                v = w
                break
            v = w
        # largest-magnitude loading made positive for a reproducible sign
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        components[comp] = v
        lam = float(v @ cov @ v)
        cov = cov - lam * np.outer(v, v)
    coords = centered @ components.T
    params = UmapParams(n_components=max(n_components, 1), metric="euclidean")
    return LowDimLayout(coords=coords, params=params, seed=0)
