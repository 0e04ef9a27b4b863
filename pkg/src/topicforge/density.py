"""From-scratch HDBSCAN: core distances, mutual reachability, Prim MST,
condensed tree, excess-of-mass cluster extraction, noise labeling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData
from .manifold import LowDimLayout, pairwise_distances

LAMBDA_CAP = 1e12  # stands in for 1/0 at coincident points


@dataclass
class HdbscanParams:
    min_cluster_size: int = 40
    min_samples: int | None = None  # defaults to min_cluster_size
    metric: str = "euclidean"

    def __post_init__(self):
        if self.min_cluster_size < 2:
            raise ValueError("min_cluster_size must be >= 2")
        if self.min_samples is None:
            self.min_samples = self.min_cluster_size
        if self.min_samples < 1:
            raise ValueError("min_samples must be >= 1")
        if self.metric != "euclidean":
            raise ValueError("only the euclidean metric is supported")


@dataclass(frozen=True)
class CondensedTree:
    # edges: (parent, child, lambda, child_size); child < n_points is a leaf point
    parents: np.ndarray
    children: np.ndarray
    lambdas: np.ndarray
    sizes: np.ndarray
    n_points: int
    root: int


@dataclass(frozen=True)
class ClusterLabeling:
    labels: np.ndarray  # -1 noise, else 0..K-1
    stabilities: np.ndarray
    membership_strength: np.ndarray

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size and self.labels.max() >= 0 else 0


def core_distances(points: np.ndarray, k: int) -> np.ndarray:
    """Distance to the k-th nearest neighbor, the point itself counting as 0th."""
    n = points.shape[0]
    if n <= k:
        raise InsufficientData(f"core distance k={k} needs more than k points, got {n}")
    dist = pairwise_distances(np.asarray(points, float), "euclidean")
    return np.sort(dist, axis=1)[:, k]


def mutual_reachability(d_ab: float, core_a: float, core_b: float) -> float:
    return max(d_ab, core_a, core_b)


def mutual_reachability_matrix(points: np.ndarray, k: int) -> np.ndarray:
    dist = pairwise_distances(np.asarray(points, float), "euclidean")
    core = core_distances(points, k)
    return np.maximum(dist, np.maximum(core[:, None], core[None, :]))


def build_mst(weights: np.ndarray) -> list[tuple[int, int, float]]:
    """Prim's algorithm over a dense symmetric weight matrix; O(n^2)."""
    n = weights.shape[0]
    if n < 2:
        raise InsufficientData("MST needs at least 2 points")
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    best_from = np.zeros(n, dtype=np.int64)
    in_tree[0] = True
    best = weights[0].copy()
    best[0] = np.inf
    edges: list[tuple[int, int, float]] = []
    for _ in range(n - 1):
        nxt = int(np.argmin(best))  # ties resolved by lowest index
        edges.append((int(best_from[nxt]), nxt, float(best[nxt])))
        in_tree[nxt] = True
        best[nxt] = np.inf
        improved = weights[nxt] < best
        improved &= ~in_tree
        best[improved] = weights[nxt][improved]
        best_from[improved] = nxt
    return edges


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def _single_linkage(mst_edges, n: int):
    """Dendrogram from ascending MST edges: node ids n..2n-2, each
    (left, right, distance, size)."""
    order = sorted(mst_edges, key=lambda e: (e[2], e[0], e[1]))
    parent = list(range(2 * n - 1))  # current dendrogram node of each component
    uf = _UnionFind(n)
    nodes: list[tuple[int, int, float, int]] = []
    next_id = n
    for a, b, w in order:
        ra, rb = uf.find(a), uf.find(b)
        left, right = parent[ra], parent[rb]
        size = uf.size[ra] + uf.size[rb]
        uf.union(a, b)
        parent[uf.find(a)] = next_id
        nodes.append((left, right, w, size))
        next_id += 1
    return nodes


def _subtree_points(node: int, nodes, n: int) -> list[int]:
    out: list[int] = []
    stack = [node]
    while stack:
        cur = stack.pop()
        if cur < n:
            out.append(cur)
        else:
            left, right, _, _ = nodes[cur - n]
            stack.extend((left, right))
    return out


def condense_tree(mst_edges, n: int, min_cluster_size: int) -> CondensedTree:
    """Collapse the single-linkage dendrogram: splits with a side smaller
    than min_cluster_size shed those points as leaves at that lambda."""
    nodes = _single_linkage(mst_edges, n)
    parents: list[int] = []
    children: list[int] = []
    lambdas: list[float] = []
    sizes: list[int] = []

    root_dendro = 2 * n - 2
    root = n
    next_cluster = n + 1
    if n == 1:
        return CondensedTree(np.array([], dtype=np.int64), np.array([], dtype=np.int64),
                             np.array([]), np.array([], dtype=np.int64), n, root)
    # stack of (dendrogram node, condensed cluster owning it)
    stack = [(root_dendro, root)]
    while stack:
        dnode, cluster = stack.pop()
        left, right, dist, _ = nodes[dnode - n]
        lam = 1.0 / dist if dist > 0 else LAMBDA_CAP
        left_size = 1 if left < n else nodes[left - n][3]
        right_size = 1 if right < n else nodes[right - n][3]
        big_left = left_size >= min_cluster_size
        big_right = right_size >= min_cluster_size
        if big_left and big_right:
            for side, size in ((left, left_size), (right, right_size)):
                parents.append(cluster)
                children.append(next_cluster)
                lambdas.append(lam)
                sizes.append(size)
                stack.append((side, next_cluster))
                next_cluster += 1
        elif not big_left and not big_right:
            for side in (left, right):
                for p in _subtree_points(side, nodes, n):
                    parents.append(cluster)
                    children.append(p)
                    lambdas.append(lam)
                    sizes.append(1)
        else:
            small, big = (right, left) if big_left else (left, right)
            for p in _subtree_points(small, nodes, n):
                parents.append(cluster)
                children.append(p)
                lambdas.append(lam)
                sizes.append(1)
            stack.append((big, cluster))
    return CondensedTree(
        parents=np.asarray(parents, dtype=np.int64),
        children=np.asarray(children, dtype=np.int64),
        lambdas=np.asarray(lambdas, dtype=float),
        sizes=np.asarray(sizes, dtype=np.int64),
        n_points=n,
        root=root,
    )


def _cluster_stabilities(tree: CondensedTree) -> dict[int, float]:
    births: dict[int, float] = {}
    for p, c, lam in zip(tree.parents, tree.children, tree.lambdas):
        if c >= tree.n_points:
            births[int(c)] = lam
    births[tree.root] = float(tree.lambdas.min()) if tree.lambdas.size else 0.0
    stability: dict[int, float] = {cid: 0.0 for cid in births}
    for p, lam, size in zip(tree.parents, tree.lambdas, tree.sizes):
        stability[int(p)] += (lam - births[int(p)]) * int(size)
    return stability


def extract_eom(tree: CondensedTree, min_cluster_size: int = 2) -> ClusterLabeling:
    """Excess-of-mass selection; points outside every selected cluster -> -1."""
    n = tree.n_points
    stability = _cluster_stabilities(tree)
    cluster_children: dict[int, list[int]] = {cid: [] for cid in stability}
    for p, c in zip(tree.parents, tree.children):
        if c >= n:
            cluster_children[int(p)].append(int(c))

    selected: dict[int, bool] = {}
    subtree_stab: dict[int, float] = {}
    for cid in sorted(stability, reverse=True):
        if cid == tree.root:
            continue
        kids = cluster_children[cid]
        child_sum = sum(subtree_stab[k] for k in kids)
        if not kids or stability[cid] > child_sum:
            selected[cid] = True
            subtree_stab[cid] = stability[cid]
        else:
            selected[cid] = False
            subtree_stab[cid] = child_sum
    # a selected ancestor absorbs its selected descendants
    parent_of: dict[int, int] = {}
    for p, c in zip(tree.parents, tree.children):
        if c >= n:
            parent_of[int(c)] = int(p)
    chosen: list[int] = []
    for cid in sorted(selected):
        if not selected[cid]:
            continue
        anc = parent_of.get(cid)
        shadowed = False
        while anc is not None and anc != tree.root:
            if selected.get(anc):
                shadowed = True
                break
            anc = parent_of.get(anc)
        if not shadowed:
            chosen.append(cid)

    point_parent = np.full(n, tree.root, dtype=np.int64)
    point_lambda = np.zeros(n)
    for p, c, lam in zip(tree.parents, tree.children, tree.lambdas):
        if c < n:
            point_parent[int(c)] = int(p)
            point_lambda[int(c)] = lam

    labels = np.full(n, -1, dtype=np.int64)
    assigned_cluster = np.full(n, -1, dtype=np.int64)
    chosen_set = set(chosen)
    if chosen:
        for i in range(n):
            anc: int | None = int(point_parent[i])
            while anc is not None:
                if anc in chosen_set:
                    assigned_cluster[i] = anc
                    break
                anc = parent_of.get(anc)
    elif n >= min_cluster_size:
        # no split survived. The root counts as a single cluster only when
        # every point leaves it at the same lambda (a degenerate tight
        # cluster); a root shedding points over a range of densities is
        # structureless and stays noise.
        lam_max = point_lambda.max()
        if np.all(point_lambda >= lam_max * (1.0 - 1e-9)):
            assigned_cluster[:] = tree.root
            chosen = [tree.root]
            chosen_set = {tree.root}

    next_label = 0
    id_to_label: dict[int, int] = {}
    for i in range(n):
        cid = int(assigned_cluster[i])
        if cid < 0:
            continue
        if cid not in id_to_label:
            id_to_label[cid] = next_label
            next_label += 1
        labels[i] = id_to_label[cid]

    stabilities = np.zeros(next_label)
    for cid, lab in id_to_label.items():
        stabilities[lab] = stability[cid]

    membership = np.zeros(n)
    for lab in range(next_label):
        mask = labels == lab
        lam_max = point_lambda[mask].max()
        if lam_max > 0:
            membership[mask] = np.clip(point_lambda[mask] / lam_max, 0.0, 1.0)
        else:
            membership[mask] = 1.0
    return ClusterLabeling(labels=labels, stabilities=stabilities, membership_strength=membership)


def cluster(layout: LowDimLayout | np.ndarray, params: HdbscanParams | None = None) -> ClusterLabeling:
    """Full HDBSCAN over the reduced space."""
    params = params or HdbscanParams()
    points = layout.coords if isinstance(layout, LowDimLayout) else np.asarray(layout, float)
    n = points.shape[0]
    if n < 2:
        raise InsufficientData("clustering needs at least 2 points")
    if n <= params.min_samples:
        # too few points for core distances: everything is noise
        return ClusterLabeling(
            labels=np.full(n, -1, dtype=np.int64),
            stabilities=np.zeros(0),
            membership_strength=np.zeros(n),
        )
    mreach = mutual_reachability_matrix(points, params.min_samples)
    mst = build_mst(mreach)
    tree = condense_tree(mst, n, params.min_cluster_size)
    return extract_eom(tree, params.min_cluster_size)
