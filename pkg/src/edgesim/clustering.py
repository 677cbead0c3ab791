"""Similarity matrices, spectral clustering and cluster-head selection."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.cluster.vq import kmeans2


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    K: int
    heads: list = field(default_factory=list)

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.labels == k)

    def to_dict(self) -> dict:
        return {"labels": self.labels.tolist(), "K": self.K, "heads": [int(h) for h in self.heads]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def check_similarity(M: np.ndarray) -> None:
    if not np.allclose(M, M.T, atol=1e-12, rtol=0):
        raise ValueError("similarity matrix not symmetric")
    if not np.allclose(np.diag(M), 1.0):
        raise ValueError("similarity diagonal must be one")
    if M.min() < -1e-12 or M.max() > 1 + 1e-12:
        raise ValueError("similarity entries outside [0, 1]")


def content_similarity(demand, popularity, sigma_sq: float) -> np.ndarray:
    """Gaussian kernel on the per-content score demand * popularity."""
    if sigma_sq <= 0:
        raise ValueError("sigma_sq must be positive")
    score = np.asarray(demand, dtype=float) * np.asarray(popularity, dtype=float)
    diff = score[:, None] - score[None, :]
    M = np.exp(-(diff**2) / (2.0 * sigma_sq))
    np.fill_diagonal(M, 1.0)
    return M


def sbs_similarity(D) -> np.ndarray:
    """Cosine similarity of demand rows; an all-zero row only matches itself."""
    D = np.asarray(D, dtype=float)
    norms = np.linalg.norm(D, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    M = (D @ D.T) / np.outer(safe, safe)
    zero = norms == 0
    M[zero, :] = 0.0
    M[:, zero] = 0.0
    M = np.clip(0.5 * (M + M.T), 0.0, 1.0)
    np.fill_diagonal(M, 1.0)
    return M


def _canonical(labels: np.ndarray) -> np.ndarray:
    # relabel by order of first appearance
    mapping = {}
    out = np.empty_like(labels)
    for i, l in enumerate(labels):
        if l not in mapping:
            mapping[l] = len(mapping)
        out[i] = mapping[l]
    return out


def eigengap_k(eigvals: np.ndarray, k_max: int) -> int:
    n = len(eigvals)
    hi = min(k_max, n)
    if n <= 2:
        return n
    ks = np.arange(2, min(hi, n - 1) + 1)
    if ks.size == 0:
        return min(2, n)
    gaps = eigvals[ks] - eigvals[ks - 1]
    return int(ks[np.argmax(gaps)])


def spectral_cluster(M, K="auto", seed: int = 0, k_max: int = 8, n_init: int = 4) -> ClusterAssignment:
    """Normalized-Laplacian embedding followed by seeded k-means."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    deg = M.sum(axis=1)
    dinv = 1.0 / np.sqrt(np.maximum(deg, 1e-12))
    L = np.eye(n) - dinv[:, None] * M * dinv[None, :]
    vals, vecs = np.linalg.eigh(0.5 * (L + L.T))
    if K == "auto":
        K = eigengap_k(vals, k_max) if n > 1 else 1
    K = int(K)
    if K < 1 or K > n:
        raise ValueError(f"cannot form {K} clusters from {n} items")
    if K == 1:
        return ClusterAssignment(np.zeros(n, dtype=np.int64), 1)
    if K == n:
        return ClusterAssignment(np.arange(n, dtype=np.int64), n)
    emb = vecs[:, :K]
    emb = emb / np.maximum(np.linalg.norm(emb, axis=1, keepdims=True), 1e-12)
    rng = np.random.default_rng(seed)
    best, best_inertia = None, np.inf
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for _ in range(n_init):
            cent, lab = kmeans2(emb, K, minit="++", seed=rng)
            inertia = float(np.sum((emb - cent[lab]) ** 2))
            if len(np.unique(lab)) == K and inertia < best_inertia - 1e-12:
                best, best_inertia = lab, inertia
    if best is None:
        # k-means kept collapsing clusters; fall back to sorted Fiedler order
        order = np.argsort(vecs[:, 1], kind="stable")
        best = np.empty(n, dtype=np.int64)
        for k, chunk in enumerate(np.array_split(order, K)):
            best[chunk] = k
    return ClusterAssignment(_canonical(np.asarray(best, dtype=np.int64)), K)


def select_cluster_heads(M, assignment: ClusterAssignment) -> ClusterAssignment:
    """Head of each cluster = member with the largest within-cluster similarity sum."""
    M = np.asarray(M, dtype=float)
    heads = []
    for k in range(assignment.K):
        mem = assignment.members(k)
        sums = M[np.ix_(mem, mem)].sum(axis=1)
        top = np.flatnonzero(sums >= sums.max() - 1e-12)[0]  # ties go to the lowest id
        heads.append(int(mem[top]))
    assignment.heads = heads
    return assignment
