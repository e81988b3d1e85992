"""Hyperparameter grid runner with resumable CSV results.

Every (k, lambda, tau) combination is trained for a fixed epoch budget
with the same initialization seed, then evaluated.  Rows land in
``results.csv`` as they finish; a rerun skips cells that already have a
row, so an interrupted grid picks up where it stopped.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import engine
from .evaluation import EvalConfig, evaluate
from .ingest import IndexMap, RatingsTable, build_csr, load_split_dir
from .sparse import BY_ITEM, BY_USER

RESULTS_HEADER = ["k", "lambda", "tau", "precision", "recall",
                  "train_rmse", "test_rmse", "seconds", "status"]

DEFAULT_K = [2, 10, 50, 100]
DEFAULT_LAMBDA = [0.1, 0.5]
DEFAULT_TAU = [0.05, 0.1, 0.25]


@dataclass
class GridSpec:
    k_values: list = field(default_factory=lambda: list(DEFAULT_K))
    lambda_values: list = field(default_factory=lambda: list(DEFAULT_LAMBDA))
    tau_values: list = field(default_factory=lambda: list(DEFAULT_TAU))
    epochs: int = 20
    eval: EvalConfig = field(default_factory=EvalConfig)
    seed: int = 0
    n_threads: int = 1

    def __post_init__(self):
        if not (self.k_values and self.lambda_values and self.tau_values):
            raise ValueError("grid value lists must be non-empty")

    @classmethod
    def from_json(cls, path) -> "GridSpec":
        cfg = json.loads(Path(path).read_text())
        ev = cfg.pop("eval", {})
        return cls(eval=EvalConfig(**ev), **cfg)

    def cells(self) -> list[tuple[int, float, float]]:
        return sorted((k, lam, tau)
                      for k in self.k_values
                      for lam in self.lambda_values
                      for tau in self.tau_values)


@dataclass
class GridResultRow:
    k: int
    lam: float
    tau: float
    precision: float
    recall: float
    train_rmse: float
    test_rmse: float
    seconds: float
    status: str = "ok"

    def key(self) -> tuple[int, float, float]:
        return (self.k, self.lam, self.tau)

    def to_csv_row(self) -> list:
        return [self.k, self.lam, self.tau,
                f"{self.precision:.6f}", f"{self.recall:.6f}",
                f"{self.train_rmse:.6f}", f"{self.test_rmse:.6f}",
                f"{self.seconds:.3f}", self.status]


def read_results_csv(path) -> list[GridResultRow]:
    rows = []
    path = Path(path)
    if not path.exists():
        return rows
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            rows.append(GridResultRow(
                k=int(rec["k"]), lam=float(rec["lambda"]), tau=float(rec["tau"]),
                precision=float(rec["precision"]), recall=float(rec["recall"]),
                train_rmse=float(rec["train_rmse"]), test_rmse=float(rec["test_rmse"]),
                seconds=float(rec["seconds"]), status=rec["status"]))
    return rows


def _write_results_csv(path, rows: list[GridResultRow]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(RESULTS_HEADER)
        for row in sorted(rows, key=GridResultRow.key):
            w.writerow(row.to_csv_row())


def run_grid(spec: GridSpec, data_dir, out_dir) -> list[GridResultRow]:
    """Train and evaluate every grid cell; returns rows sorted by (k, lambda, tau).

    A failed cell gets a `status=error` row with NaN metrics and the grid
    continues.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results_path = out / "results.csv"
    done = {row.key(): row for row in read_results_csv(results_path)}

    train_table, test_table, index = load_split_dir(data_dir)
    by_user = build_csr(train_table, index, BY_USER)
    by_item = build_csr(train_table, index, BY_ITEM)
    test_by_user = build_csr(test_table, index, BY_USER)

    rows = list(done.values())
    for k, lam, tau in spec.cells():
        if (k, lam, tau) in done:
            continue
        try:
            h = engine.Hyperparams(k=k, lam=lam, tau=tau,
                                   epochs=spec.epochs, seed=spec.seed)
            params, history = engine.train(by_user, by_item, h,
                                           test_by_user=test_by_user,
                                           n_threads=spec.n_threads)
            history.to_csv(out / f"history_k{k}_lam{lam:g}_tau{tau:g}.csv")
            report = evaluate(params, by_user, test_by_user, spec.eval)
            seconds = sum(r.seconds for r in history.records)
            row = GridResultRow(k, lam, tau, report.precision_at_k,
                                report.recall_at_k, report.rmse_train,
                                report.rmse_test, seconds)
        except Exception as exc:  # record and move on; one bad cell must not kill the grid
            row = GridResultRow(k, lam, tau, float("nan"), float("nan"),
                                float("nan"), float("nan"), 0.0,
                                status=f"error: {exc}")
        rows.append(row)
        _write_results_csv(results_path, rows)
    _write_results_csv(results_path, rows)
    return sorted(rows, key=GridResultRow.key)


def select_best(rows: list[GridResultRow],
                criterion: str = "test_rmse") -> GridResultRow:
    """Best successful row; ties break by smaller k, then larger tau."""
    ok = [r for r in rows if r.status == "ok"]
    if not ok:
        raise ValueError("no successful grid cells to select from")
    if criterion == "test_rmse":
        key = lambda r: (r.test_rmse, r.k, -r.tau)
    elif criterion == "precision":
        key = lambda r: (-r.precision, r.k, -r.tau)
    else:
        raise ValueError(f"unknown criterion {criterion!r}")
    return min(ok, key=key)
