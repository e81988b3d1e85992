"""Shared generators and independent oracles for the test suite.

The oracles here deliberately avoid the library's own code paths:
ridge solves go through an augmented least-squares system, objectives
through a dense triple loop, and PCA through a covariance
eigendecomposition.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from alsrec.ingest import RatingsTable
from alsrec.sparse import BY_ITEM, BY_USER, CsrMatrix, from_triples


def random_rating_table(rng, n_users=8, n_items=10, density=0.5) -> RatingsTable:
    """Random half-star ratings over random raw ids (not contiguous)."""
    user_raw = rng.choice(np.arange(1, 10 * n_users), size=n_users, replace=False)
    item_raw = rng.choice(np.arange(1, 10 * n_items), size=n_items, replace=False)
    records = []
    for u in user_raw:
        items = item_raw[rng.random(n_items) < density]
        if len(items) == 0:
            items = item_raw[[rng.integers(n_items)]]
        for i in items:
            stars = rng.integers(1, 11) * 0.5
            records.append((int(u), int(i), float(stars), int(rng.integers(1e9))))
    return RatingsTable.from_records(records)


def random_csr_pair(rng, n_users=10, n_items=12, density=0.4,
                    lo=0.5, hi=5.0) -> tuple[CsrMatrix, CsrMatrix]:
    """Random dense-id rating matrix in both orientations."""
    mask = rng.random((n_users, n_items)) < density
    # every row and column gets at least a chance of being empty; that is fine
    rows, cols = np.nonzero(mask)
    vals = rng.uniform(lo, hi, size=len(rows))
    by_user = from_triples(rows, cols, vals, n_users, n_items, BY_USER)
    by_item = from_triples(cols, rows, vals, n_items, n_users, BY_ITEM)
    return by_user, by_item


def ridge_solve_oracle(Vr: np.ndarray, resid: np.ndarray,
                       lam: float, tau: float) -> np.ndarray:
    """Independent ridge solve via an augmented least-squares system.

    minimizes lam*|Vr w - resid|^2 + tau*|w|^2 without forming the
    normal equations the engine uses.
    """
    k = Vr.shape[1]
    A = np.vstack([math.sqrt(lam) * Vr, math.sqrt(tau) * np.eye(k)])
    b = np.concatenate([math.sqrt(lam) * resid, np.zeros(k)])
    w, *_ = np.linalg.lstsq(A, b, rcond=None)
    return w


def naive_objective(mu, b_user, b_item, U, V, triples, lam, tau) -> float:
    """Triple-loop evaluation of the regularized loss."""
    total = 0.0
    for u, i, r in triples:
        pred = mu + b_user[u] + b_item[i]
        for f in range(U.shape[1]):
            pred += U[u, f] * V[i, f]
        total += (r - pred) ** 2
    reg = sum(b * b for b in b_user) + sum(b * b for b in b_item)
    reg += sum(x * x for x in U.ravel()) + sum(x * x for x in V.ravel())
    return lam * total + tau * reg


def planted_dataset(rng, n_users=300, n_items=150, k=3, density=0.2,
                    noise=0.1, mu=3.5, snap_to_grid=False):
    """Ratings generated from known low-rank factors plus Gaussian noise.

    Returns (train_by_user, train_by_item, test_by_user) with an 80/20
    per-user split of the observed entries.
    """
    b_u = rng.normal(0, 0.1, n_users)
    b_i = rng.normal(0, 0.1, n_items)
    U = rng.normal(0, 1 / math.sqrt(k), (n_users, k))
    V = rng.normal(0, 1 / math.sqrt(k), (n_items, k))
    tr_rows, tr_cols, tr_vals = [], [], []
    te_rows, te_cols, te_vals = [], [], []
    for u in range(n_users):
        items = np.nonzero(rng.random(n_items) < density)[0]
        if len(items) < 2:
            items = rng.choice(n_items, size=2, replace=False)
        r = mu + b_u[u] + b_i[items] + V[items] @ U[u] + rng.normal(0, noise, len(items))
        if snap_to_grid:
            r = np.clip(np.round(r * 2) / 2, 0.5, 5.0)
        perm = rng.permutation(len(items))
        n_train = max(1, int(0.8 * len(items)))
        for j in perm[:n_train]:
            tr_rows.append(u), tr_cols.append(items[j]), tr_vals.append(r[j])
        for j in perm[n_train:]:
            te_rows.append(u), te_cols.append(items[j]), te_vals.append(r[j])
    by_user = from_triples(tr_rows, tr_cols, tr_vals, n_users, n_items, BY_USER)
    by_item = from_triples(tr_cols, tr_rows, tr_vals, n_items, n_users, BY_ITEM)
    test = from_triples(te_rows, te_cols, te_vals, n_users, n_items, BY_USER)
    return by_user, by_item, test
