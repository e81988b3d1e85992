"""Cold-start serving: fold a new user in, then score the catalog.

A new user's bias and trait vector come from exactly one ALS user-step
visit against the frozen trained item parameters.  Serving scores blend
baseline popularity against personal affinity:

    score = alpha * (mu + b_i) + u_u . v_i

Items the user just rated and items with too few training ratings are
excluded before ranking.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .engine import Hyperparams, ModelParams

DEFAULT_MIN_RATINGS = 100


@dataclass
class FoldInRequest:
    ratings: list[tuple[int, float]]    # (dense item id, stars)
    alpha: float = 0.05
    top_k: int = 10
    min_ratings: int = DEFAULT_MIN_RATINGS


@dataclass
class ScoredItem:
    item_id: int
    score: float
    popularity_part: float
    affinity_part: float


def fold_in_user(ratings: list[tuple[int, float]], params: ModelParams,
                 h: Hyperparams) -> tuple[np.ndarray, float]:
    """One user-step visit for a synthetic row, starting from a zero vector.

    Returns (u_vec, b_u).  Mirrors the trainer's per-user visit exactly:
    bias first (with the current, here zero, trait vector in the
    residual), then the ridge solve with the fresh bias.
    """
    k = params.k
    if not ratings:
        return np.zeros(k), 0.0
    items = np.asarray([i for i, _ in ratings], dtype=np.int64)
    stars = np.asarray([r for _, r in ratings], dtype=np.float64)
    if items.min() < 0 or items.max() >= params.n_items:
        bad = items[(items < 0) | (items >= params.n_items)]
        raise ValueError(f"unknown item ids: {bad.tolist()}")
    for r in stars:
        if not float(r * 2).is_integer() or not 0.5 <= r <= 5.0:
            raise ValueError(f"rating {r} not on half-star grid")
    base = stars - params.mu - params.b_item[items]
    b_u = h.lam * base.sum() / (h.tau + h.lam * len(stars))
    if k == 0:
        return np.zeros(0), float(b_u)
    Vr = params.V[items]
    A = h.lam * (Vr.T @ Vr) + h.tau * np.eye(k)
    rhs = h.lam * (Vr.T @ (base - b_u))
    u_vec = cho_solve(cho_factor(A, lower=True), rhs)
    return u_vec, float(b_u)


def score_items(u_vec: np.ndarray, b_u: float, params: ModelParams,
                req: FoldInRequest, item_rating_counts: np.ndarray) -> list[ScoredItem]:
    """Rank eligible items by alpha-blended score, descending.

    b_u is accepted for interface symmetry but deliberately left out of
    the score: it shifts every item equally and the serving formula
    omits it.
    """
    if req.top_k <= 0:
        raise ValueError("top_k must be positive")
    counts = np.asarray(item_rating_counts)
    if len(counts) != params.n_items:
        raise ValueError("counts array does not match item dimension")
    popularity = req.alpha * (params.mu + params.b_item)
    affinity = (params.V @ u_vec) if params.k > 0 else np.zeros(params.n_items)
    scores = popularity + affinity
    eligible = counts >= req.min_ratings
    eligible[[i for i, _ in req.ratings]] = False
    ids = np.nonzero(eligible)[0]
    order = np.lexsort((ids, -scores[ids]))
    top = ids[order[:req.top_k]]
    return [ScoredItem(int(i), float(scores[i]),
                       float(popularity[i]), float(affinity[i]))
            for i in top]
