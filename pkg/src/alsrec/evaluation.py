"""Predictive (RMSE) and ranking (Precision@K / Recall@K) evaluation.

Ranking metrics score every item a sampled user has not rated in
training, take the top K, and count hits among held-out items rated at
or above the relevance threshold.  Training items are masked out of the
candidate list so they can never leak into the top K.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import ModelParams, rmse_entries
from .sparse import BY_USER, CsrMatrix

DEFAULT_THRESHOLD = 3.5


@dataclass(frozen=True)
class EvalConfig:
    K: int = 10
    relevance_threshold: float = DEFAULT_THRESHOLD
    sample_users: int = 3000
    seed: int = 0

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.sample_users < 1:
            raise ValueError("sample_users must be >= 1")
        if not float(self.relevance_threshold * 2).is_integer():
            raise ValueError("relevance threshold must sit on the half-star grid")


@dataclass
class EvalReport:
    rmse_train: float
    rmse_test: float
    precision_at_k: float
    recall_at_k: float
    users_evaluated: int

    def to_dict(self) -> dict:
        return {
            "rmse_train": self.rmse_train,
            "rmse_test": self.rmse_test,
            "precision_at_k": self.precision_at_k,
            "recall_at_k": self.recall_at_k,
            "users_evaluated": self.users_evaluated,
        }


def rmse(params: ModelParams, data: CsrMatrix) -> float:
    """Root mean squared error over all stored entries, unclipped."""
    return rmse_entries(params, data)


def top_k_for_user(params: ModelParams, u: int, train_items: np.ndarray,
                   K: int) -> np.ndarray:
    """Top-K item ids for user u, excluding train_items.

    Scores are full predictions; ties break by ascending item id.
    """
    scores = params.mu + params.b_user[u] + params.b_item
    if params.k > 0:
        scores = scores + params.V @ params.U[u]
    eligible = np.ones(params.n_items, dtype=bool)
    eligible[train_items] = False
    candidates = np.nonzero(eligible)[0]
    order = np.lexsort((candidates, -scores[candidates]))
    return candidates[order[:K]]


def topk_metrics(params: ModelParams, train: CsrMatrix, test: CsrMatrix,
                 cfg: EvalConfig) -> tuple[float, float, int]:
    """Per-user-averaged Precision@K and Recall@K over a seeded sample.

    Users are sampled without replacement from those with at least one
    test rating.  Users whose test items are all below the threshold
    contribute 0 to precision but are excluded from the recall average.
    Returns (precision, recall, users_evaluated).
    """
    if train.orientation != BY_USER or test.orientation != BY_USER:
        raise ValueError("topk_metrics expects by-user matrices")
    test_users = np.nonzero(test.row_counts() > 0)[0]
    if len(test_users) == 0:
        raise ValueError("test set has no users")
    if cfg.sample_users >= len(test_users):
        sampled = test_users
    else:
        rng = np.random.default_rng(cfg.seed)
        sampled = np.sort(rng.choice(test_users, size=cfg.sample_users,
                                     replace=False))
    precisions = []
    recalls = []
    for u in sampled:
        train_items, _ = train.row(u)
        test_items, test_vals = test.row(u)
        top = top_k_for_user(params, int(u), train_items, cfg.K)
        relevant = set(test_items[test_vals >= cfg.relevance_threshold].tolist())
        hits = sum(1 for i in top if int(i) in relevant)
        precisions.append(hits / cfg.K)
        if relevant:
            recalls.append(hits / len(relevant))
    precision = float(np.mean(precisions))
    recall = float(np.mean(recalls)) if recalls else 0.0
    return precision, recall, len(sampled)


def evaluate(params: ModelParams, train: CsrMatrix, test: CsrMatrix,
             cfg: EvalConfig) -> EvalReport:
    """Full report: RMSE on train and test plus ranking metrics."""
    precision, recall, n = topk_metrics(params, train, test, cfg)
    return EvalReport(
        rmse_train=rmse(params, train),
        rmse_test=rmse(params, test),
        precision_at_k=precision,
        recall_at_k=recall,
        users_evaluated=n,
    )
