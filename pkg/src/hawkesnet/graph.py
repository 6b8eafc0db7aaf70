"""Causal graph from kernel support, thresholding and scoring."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SchemaError


@dataclass(frozen=True)
class CausalGraph:
    """``adjacency[i, j]`` is True when there is an edge ``j -> i``."""

    adjacency: np.ndarray
    weights: np.ndarray
    sigma: float

    @property
    def m(self) -> int:
        return self.adjacency.shape[0]

    def edges(self) -> list[tuple[int, int]]:
        """0-based ``(source, target)`` pairs."""
        tgt, src = np.nonzero(self.adjacency)
        return sorted(zip(src.tolist(), tgt.tolist()))

    @classmethod
    def from_edges(cls, m: int, edges, one_based: bool = False) -> "CausalGraph":
        adj = np.zeros((m, m), dtype=bool)
        off = 1 if one_based else 0
        for src, dst in edges:
            if src == dst:
                continue
            adj[dst - off, src - off] = True
        return cls(adj, adj.astype(float), 0.5)


@dataclass(frozen=True)
class GraphScore:
    true_positives: int
    false_positives: int
    false_negatives: int
    precision: float
    recall: float
    f1: float
    shd: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def support_weights(coeffs) -> np.ndarray:
    return np.abs(np.asarray(coeffs, dtype=float)).sum(axis=0)


GAP_FLOOR = 0.1


def gap_threshold(weights, floor: float = GAP_FLOOR, min_ratio: float = 1.0) -> float:
    """Threshold at the largest ratio gap among sorted off-diagonal weights.

    Weights below ``floor`` times the largest are clamped to that level when
    forming ratios, so gaps among near-zero weights cannot win.  Returns
    ``inf`` (no edges) when all weights vanish or no ratio exceeds ``min_ratio``.
    """
    W = np.asarray(weights, dtype=float)
    off = np.sort(W[~np.eye(W.shape[0], dtype=bool)])
    if off.size == 0 or off[-1] <= 0:
        return float("inf")
    if off.size == 1:
        return float(off[0])
    lower = np.maximum(off[:-1], floor * off[-1])
    ratios = off[1:] / lower
    k = int(np.argmax(ratios))
    if ratios[k] <= min_ratio:
        return float("inf")
    return float(0.5 * (off[k] + off[k + 1]))


def build_graph(coeffs, sigma: float | None = None) -> CausalGraph:
    """Edge ``j -> i`` iff ``sum_d |A_d[i, j]| >= sigma`` and ``i != j``."""
    W = support_weights(coeffs)
    if sigma is None:
        sigma = gap_threshold(W)
    if sigma < 0:
        raise ValueError("threshold must be nonnegative")
    adj = W >= sigma
    np.fill_diagonal(adj, False)
    return CausalGraph(adj, W, float(sigma))


def score(candidate: CausalGraph, truth: CausalGraph) -> GraphScore:
    if candidate.m != truth.m:
        raise ValueError(f"graph sizes differ: {candidate.m} vs {truth.m}")
    off = ~np.eye(truth.m, dtype=bool)
    c, t = candidate.adjacency & off, truth.adjacency & off
    tp = int((c & t).sum())
    fp = int((c & ~t).sum())
    fn = int((~c & t).sum())
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return GraphScore(tp, fp, fn, p, r, f1, fp + fn)


# --- serialization -----------------------------------------------------------

def to_json(g: CausalGraph) -> dict:
    return {
        "m": g.m,
        "sigma": g.sigma if np.isfinite(g.sigma) else None,
        "edges": [list(e) for e in g.edges()],
        "weights": g.weights.tolist(),
    }


def from_json(d: dict) -> CausalGraph:
    try:
        m = int(d["m"])
        edges = [tuple(int(x) for x in e) for e in d["edges"]]
        g = CausalGraph.from_edges(m, edges)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SchemaError(f"malformed graph: {exc!r}") from exc
    W = np.asarray(d.get("weights", g.weights), dtype=float)
    sigma = d.get("sigma")
    return CausalGraph(g.adjacency, W, float("inf") if sigma is None else float(sigma))


def to_dot(g: CausalGraph, labels=None) -> str:
    labels = labels or [f"N{i + 1}" for i in range(g.m)]
    lines = ["digraph hawkes {"]
    lines += [f'  {i} [label="{labels[i]}"];' for i in range(g.m)]
    for src, dst in g.edges():
        lines.append(f'  {src} -> {dst} [weight="{g.weights[dst, src]:.6g}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_graph(g: CausalGraph, path) -> None:
    Path(path).write_text(json.dumps(to_json(g), indent=2) + "\n")


def load_graph(path) -> CausalGraph:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    return from_json(d)
