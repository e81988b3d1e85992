"""Alternating least squares trainer with bias and trait-vector terms.

Predicted rating: mu + b_u + b_i + u_u.v_i.  Training minimizes

    L = lam * sum (r - rhat)^2
      + tau * (|b_user|^2 + |b_item|^2 + |U|_F^2 + |V|_F^2)

by exact block coordinate descent: each epoch sweeps all users (biases
and trait vectors, items frozen), then all items (users frozen).  Every
per-row update is a closed-form ridge solve, so the objective can never
increase.

Row updates only read the frozen opposite block and write their own row,
so they can run on any number of worker threads with bit-identical
results.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from sklearn.base import BaseEstimator

from .sparse import BY_ITEM, BY_USER, CsrMatrix, transpose

RATING_MIN, RATING_MAX = 0.5, 5.0


@dataclass(frozen=True)
class Hyperparams:
    """Training knobs; k = 0 selects the bias-only model."""

    k: int = 10
    lam: float = 0.1
    tau: float = 0.25
    epochs: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if self.lam <= 0:
            raise ValueError("lambda must be > 0")
        if self.tau <= 0:
            raise ValueError("tau must be > 0 (keeps the normal equations positive definite)")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass
class ModelParams:
    """Global mean, bias arrays, and trait matrices (n x k, possibly k=0)."""

    mu: float
    b_user: np.ndarray
    b_item: np.ndarray
    U: np.ndarray
    V: np.ndarray

    @property
    def k(self) -> int:
        return self.U.shape[1]

    @property
    def n_users(self) -> int:
        return len(self.b_user)

    @property
    def n_items(self) -> int:
        return len(self.b_item)

    def copy(self) -> "ModelParams":
        return ModelParams(self.mu, self.b_user.copy(), self.b_item.copy(),
                           self.U.copy(), self.V.copy())


@dataclass
class EpochRecord:
    epoch: int
    objective: float
    train_rmse: float
    test_rmse: float
    seconds: float


@dataclass
class TrainHistory:
    records: list[EpochRecord] = field(default_factory=list)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("epoch,objective,train_rmse,test_rmse,seconds\n")
            for r in self.records:
                fh.write(f"{r.epoch},{r.objective!r},{r.train_rmse!r},"
                         f"{r.test_rmse!r},{r.seconds:.3f}\n")


def init_params(h: Hyperparams, n_users: int, n_items: int, mu: float) -> ModelParams:
    """Zero biases; trait entries ~ N(0, 1/sqrt(k)).

    A counter-based Philox generator keyed on the seed makes the draw
    independent of traversal or thread order.
    """
    if n_users <= 0 or n_items <= 0:
        raise ValueError("need at least one user and one item")
    k = h.k
    if k == 0:
        U = np.zeros((n_users, 0))
        V = np.zeros((n_items, 0))
    else:
        rng = np.random.Generator(np.random.Philox(h.seed))
        std = 1.0 / math.sqrt(k)
        U = rng.normal(0.0, std, size=(n_users, k))
        V = rng.normal(0.0, std, size=(n_items, k))
    return ModelParams(float(mu), np.zeros(n_users), np.zeros(n_items), U, V)


def _parallel_rows(n_rows: int, visit, n_threads: int) -> None:
    """Run visit(row) for every row, chunked over threads.

    Chunk boundaries cannot change results: each visit is a fixed
    sequence of numpy ops touching only its own output row.
    """
    if n_threads <= 1 or n_rows < 2:
        for r in range(n_rows):
            visit(r)
        return
    chunk = (n_rows + n_threads - 1) // n_threads

    def run(start: int) -> None:
        for r in range(start, min(start + chunk, n_rows)):
            visit(r)

    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        list(pool.map(run, range(0, n_rows, chunk)))


def _bias_step(b_out: np.ndarray, m: CsrMatrix, mu: float, b_other: np.ndarray,
               W_own: np.ndarray, W_other: np.ndarray,
               lam: float, tau: float, n_threads: int = 1) -> None:
    """Closed-form bias update for one side; rows with no ratings get 0.

    b_r = lam * sum(r - mu - b_other - w_r.w_other) / (tau + lam * n_r)
    """
    def visit(r: int) -> None:
        cols, vals = m.row(r)
        if len(vals) == 0:
            b_out[r] = 0.0
            return
        resid = vals - mu - b_other[cols]
        if W_own.shape[1] > 0:
            resid = resid - W_other[cols] @ W_own[r]
        b_out[r] = lam * resid.sum() / (tau + lam * len(vals))

    _parallel_rows(m.rows, visit, n_threads)


def _als_step(b_out: np.ndarray, W_out: np.ndarray, m: CsrMatrix, mu: float,
              b_other: np.ndarray, W_other: np.ndarray,
              lam: float, tau: float, n_threads: int = 1) -> None:
    """Joint per-row visit: exact bias update, then the k x k ridge solve.

    The bias uses the current trait vector in its residual; the trait
    solve then uses the fresh bias.  Both are exact coordinate
    minimizers, so each visit cannot increase the objective.
    """
    k = W_out.shape[1]
    eye = tau * np.eye(k)

    def visit(r: int) -> None:
        cols, vals = m.row(r)
        if len(vals) == 0:
            b_out[r] = 0.0
            W_out[r] = 0.0
            return
        Wo = W_other[cols]
        base = vals - mu - b_other[cols]
        b_new = lam * (base - Wo @ W_out[r]).sum() / (tau + lam * len(vals))
        resid = base - b_new
        A = lam * (Wo.T @ Wo) + eye
        rhs = lam * (Wo.T @ resid)
        try:
            w_new = cho_solve(cho_factor(A, lower=True), rhs)
            finite = np.isfinite(b_new) and np.all(np.isfinite(w_new))
        except (ValueError, np.linalg.LinAlgError):
            finite = False
        if not finite:
            raise FloatingPointError(
                f"non-finite update at row {r}; hyperparameters likely divergent")
        b_out[r] = b_new
        W_out[r] = w_new

    _parallel_rows(m.rows, visit, n_threads)


def bias_user_step(params: ModelParams, by_user: CsrMatrix, h: Hyperparams,
                   n_threads: int = 1) -> None:
    _bias_step(params.b_user, by_user, params.mu, params.b_item,
               params.U, params.V, h.lam, h.tau, n_threads)


def bias_item_step(params: ModelParams, by_item: CsrMatrix, h: Hyperparams,
                   n_threads: int = 1) -> None:
    _bias_step(params.b_item, by_item, params.mu, params.b_user,
               params.V, params.U, h.lam, h.tau, n_threads)


def als_user_step(params: ModelParams, by_user: CsrMatrix, h: Hyperparams,
                  n_threads: int = 1) -> None:
    _als_step(params.b_user, params.U, by_user, params.mu, params.b_item,
              params.V, h.lam, h.tau, n_threads)


def als_item_step(params: ModelParams, by_item: CsrMatrix, h: Hyperparams,
                  n_threads: int = 1) -> None:
    _als_step(params.b_item, params.V, by_item, params.mu, params.b_user,
              params.U, h.lam, h.tau, n_threads)


def predict_entries(params: ModelParams, m: CsrMatrix) -> np.ndarray:
    """Unclipped predictions for every stored entry, in storage order."""
    rows = m.row_of_entry()
    cols = m.indices
    if m.orientation == BY_USER:
        u, i = rows, cols
    else:
        u, i = cols, rows
    pred = params.mu + params.b_user[u] + params.b_item[i]
    if params.k > 0:
        pred = pred + np.einsum("ij,ij->i", params.U[u], params.V[i])
    return pred


def predict(params: ModelParams, u: int, i: int, clip: bool = False) -> float:
    """Predicted rating for one (user, item) pair."""
    if not 0 <= u < params.n_users:
        raise ValueError(f"user id {u} out of range")
    if not 0 <= i < params.n_items:
        raise ValueError(f"item id {i} out of range")
    val = params.mu + params.b_user[u] + params.b_item[i]
    if params.k > 0:
        val += float(params.U[u] @ params.V[i])
    if clip:
        val = min(max(val, RATING_MIN), RATING_MAX)
    return float(val)


def objective(params: ModelParams, train: CsrMatrix, h: Hyperparams) -> float:
    """Regularized squared-error loss over the training entries."""
    resid = train.values - predict_entries(params, train)
    reg = (np.dot(params.b_user, params.b_user)
           + np.dot(params.b_item, params.b_item)
           + np.sum(params.U * params.U)
           + np.sum(params.V * params.V))
    return float(h.lam * np.dot(resid, resid) + h.tau * reg)


def rmse_entries(params: ModelParams, m: CsrMatrix) -> float:
    """RMSE over the entries of m, predictions unclipped."""
    if m.nnz == 0:
        raise ValueError("cannot compute RMSE on an empty matrix")
    resid = m.values - predict_entries(params, m)
    return float(np.sqrt(np.dot(resid, resid) / m.nnz))


def train(by_user: CsrMatrix, by_item: CsrMatrix, h: Hyperparams,
          test_by_user: CsrMatrix | None = None,
          n_threads: int = 1) -> tuple[ModelParams, TrainHistory]:
    """Run h.epochs alternating sweeps; mu is the train-set mean, fixed."""
    if by_user.nnz != by_item.nnz or by_user.rows != by_item.cols:
        raise ValueError("by_user and by_item matrices disagree")
    mu = float(by_user.values.mean()) if by_user.nnz else 0.0
    params = init_params(h, by_user.rows, by_item.rows, mu)
    history = TrainHistory()
    for epoch in range(1, h.epochs + 1):
        t0 = time.perf_counter()
        if h.k == 0:
            bias_user_step(params, by_user, h, n_threads)
            bias_item_step(params, by_item, h, n_threads)
        else:
            als_user_step(params, by_user, h, n_threads)
            als_item_step(params, by_item, h, n_threads)
        seconds = time.perf_counter() - t0
        loss = objective(params, by_user, h)
        train_rmse = rmse_entries(params, by_user)
        test_rmse = (rmse_entries(params, test_by_user)
                     if test_by_user is not None and test_by_user.nnz else float("nan"))
        history.records.append(EpochRecord(epoch, loss, train_rmse, test_rmse, seconds))
    return params, history


class AlsRecommender(BaseEstimator):
    """Estimator wrapper: fit on a by-user CsrMatrix, predict rating pairs.

    Parameters mirror Hyperparams; n_threads controls the worker count
    for the row sweeps (any value gives bit-identical results).
    """

    def __init__(self, k=10, lam=0.1, tau=0.25, epochs=20, seed=0, n_threads=1):
        self.k = k
        self.lam = lam
        self.tau = tau
        self.epochs = epochs
        self.seed = seed
        self.n_threads = n_threads

    def _hyperparams(self) -> Hyperparams:
        return Hyperparams(k=self.k, lam=self.lam, tau=self.tau,
                           epochs=self.epochs, seed=self.seed)

    def fit(self, X: CsrMatrix, y=None, test: CsrMatrix | None = None):
        if X.orientation != BY_USER:
            raise ValueError("fit expects a by-user CsrMatrix")
        by_item = transpose(X)
        self.params_, self.history_ = train(X, by_item, self._hyperparams(),
                                            test_by_user=test,
                                            n_threads=self.n_threads)
        return self

    def predict(self, pairs, clip: bool = False) -> np.ndarray:
        """Predicted ratings for an array of (user, item) dense-id pairs."""
        pairs = np.asarray(pairs, dtype=np.int64)
        return np.array([predict(self.params_, int(u), int(i), clip=clip)
                         for u, i in pairs])
