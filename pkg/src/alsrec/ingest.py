"""Load MovieLens-style rating files, remap ids, split, and summarize.

Raw user/movie ids are remapped to contiguous dense indices so the rating
matrix can be stored as flat arrays.  The train/test split is stratified
per user: 80% of each user's ratings go to training, which guarantees
every test user is also seen during training.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .sparse import BY_ITEM, BY_USER, CsrMatrix, from_triples

RATINGS_HEADER = ["userId", "movieId", "rating", "timestamp"]
MOVIES_HEADER = ["movieId", "title", "genres"]


def _on_half_star_grid(r: float) -> bool:
    return 0.5 <= r <= 5.0 and float(r * 2).is_integer()


@dataclass
class RatingsTable:
    """Parallel arrays of (user, item, rating, timestamp) records."""

    user_ids: np.ndarray
    item_ids: np.ndarray
    ratings: np.ndarray
    timestamps: np.ndarray

    @property
    def n_records(self) -> int:
        return len(self.ratings)

    def select(self, mask: np.ndarray) -> "RatingsTable":
        return RatingsTable(self.user_ids[mask], self.item_ids[mask],
                            self.ratings[mask], self.timestamps[mask])

    @classmethod
    def from_records(cls, records) -> "RatingsTable":
        records = list(records)
        if not records:
            return cls.empty()
        u, i, r, t = zip(*records)
        return cls(np.asarray(u, dtype=np.int64), np.asarray(i, dtype=np.int64),
                   np.asarray(r, dtype=np.float64), np.asarray(t, dtype=np.int64))

    @classmethod
    def empty(cls) -> "RatingsTable":
        return cls(np.empty(0, np.int64), np.empty(0, np.int64),
                   np.empty(0, np.float64), np.empty(0, np.int64))


@dataclass
class IndexMap:
    """Bijection between raw ids and contiguous dense indices."""

    user_fwd: dict
    user_rev: np.ndarray
    item_fwd: dict
    item_rev: np.ndarray

    @property
    def n_users(self) -> int:
        return len(self.user_rev)

    @property
    def n_items(self) -> int:
        return len(self.item_rev)


@dataclass
class SplitPair:
    train: RatingsTable
    test: RatingsTable
    ratio: float
    seed: int


@dataclass
class StatsReport:
    global_mean: float
    rating_histogram: dict
    user_count_distribution: np.ndarray
    item_count_distribution: np.ndarray
    n_users: int
    n_items: int
    n_ratings: int

    def to_dict(self) -> dict:
        return {
            "global_mean": self.global_mean,
            "rating_histogram": {str(k): int(v) for k, v in self.rating_histogram.items()},
            "user_count_distribution": [int(c) for c in self.user_count_distribution],
            "item_count_distribution": [int(c) for c in self.item_count_distribution],
            "n_users": self.n_users,
            "n_items": self.n_items,
            "n_ratings": self.n_ratings,
        }


def parse_ratings(path) -> RatingsTable:
    """Parse a `userId,movieId,rating,timestamp` CSV.

    Duplicate (user, movie) pairs and off-grid ratings are hard errors:
    MovieLens guarantees uniqueness, so either signals corrupt input.
    """
    path = Path(path)
    users, items, ratings, stamps = [], [], [], []
    seen = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RATINGS_HEADER:
            raise ValueError(f"{path}: expected header {','.join(RATINGS_HEADER)}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            try:
                u, i = int(row[0]), int(row[1])
                r = float(row[2])
                t = int(row[3])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed row: {exc}") from None
            if not _on_half_star_grid(r):
                raise ValueError(f"{path}:{lineno}: rating {r} not on half-star grid")
            if (u, i) in seen:
                raise ValueError(f"{path}:{lineno}: duplicate rating for user {u}, movie {i}")
            seen.add((u, i))
            users.append(u)
            items.append(i)
            ratings.append(r)
            stamps.append(t)
    return RatingsTable(np.asarray(users, np.int64), np.asarray(items, np.int64),
                        np.asarray(ratings, np.float64), np.asarray(stamps, np.int64))


def parse_movies(path) -> list[tuple[int, str, list[str]]]:
    """Parse `movieId,title,genres` rows; genres are pipe-separated."""
    path = Path(path)
    out = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != MOVIES_HEADER:
            raise ValueError(f"{path}: expected header {','.join(MOVIES_HEADER)}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            genres = [] if row[2] in ("", "(no genres listed)") else row[2].split("|")
            out.append((int(row[0]), row[1], genres))
    return out


def build_index(table: RatingsTable) -> IndexMap:
    """Assign dense ids in ascending raw-id order."""
    if table.n_records == 0:
        raise ValueError("cannot index an empty ratings table")
    user_rev = np.unique(table.user_ids)
    item_rev = np.unique(table.item_ids)
    user_fwd = {int(raw): j for j, raw in enumerate(user_rev)}
    item_fwd = {int(raw): j for j, raw in enumerate(item_rev)}
    return IndexMap(user_fwd, user_rev, item_fwd, item_rev)


def stratified_split(table: RatingsTable, ratio: float, seed: int) -> SplitPair:
    """Per-user split: max(1, floor(ratio * count)) records go to train.

    Each user's records are shuffled with an rng keyed on (seed, raw user
    id), so the selection for one user is independent of every other.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"split ratio must be in (0, 1), got {ratio}")
    train_mask = np.zeros(table.n_records, dtype=bool)
    order = np.argsort(table.user_ids, kind="stable")
    boundaries = np.searchsorted(table.user_ids[order],
                                 np.unique(table.user_ids), side="left")
    boundaries = np.append(boundaries, table.n_records)
    for b, e in zip(boundaries[:-1], boundaries[1:]):
        positions = order[b:e]
        raw_uid = int(table.user_ids[positions[0]])
        rng = np.random.default_rng([seed, raw_uid])
        perm = rng.permutation(len(positions))
        n_train = max(1, math.floor(ratio * len(positions)))
        train_mask[positions[perm[:n_train]]] = True
    return SplitPair(table.select(train_mask), table.select(~train_mask),
                     ratio, seed)


def build_csr(table: RatingsTable, index: IndexMap, orientation: str) -> CsrMatrix:
    """Map raw ids through the index and pack into CSR form."""
    try:
        users = np.asarray([index.user_fwd[int(u)] for u in table.user_ids], np.int64)
        items = np.asarray([index.item_fwd[int(i)] for i in table.item_ids], np.int64)
    except KeyError as exc:
        raise ValueError(f"id {exc.args[0]} not present in index") from None
    if orientation == BY_USER:
        return from_triples(users, items, table.ratings,
                            index.n_users, index.n_items, BY_USER)
    if orientation == BY_ITEM:
        return from_triples(items, users, table.ratings,
                            index.n_items, index.n_users, BY_ITEM)
    raise ValueError(f"unknown orientation {orientation!r}")


def dataset_stats(table: RatingsTable) -> StatsReport:
    """Global mean, half-star histogram, and per-user/item rating counts.

    Count distributions come out sorted descending, ready for log-log
    frequency plots.
    """
    if table.n_records == 0:
        raise ValueError("cannot summarize an empty ratings table")
    grid = np.arange(0.5, 5.01, 0.5)
    hist = {float(g): int(np.count_nonzero(table.ratings == g)) for g in grid}
    hist = {g: c for g, c in hist.items() if c > 0}
    user_counts = np.sort(np.unique(table.user_ids, return_counts=True)[1])[::-1]
    item_counts = np.sort(np.unique(table.item_ids, return_counts=True)[1])[::-1]
    return StatsReport(
        global_mean=float(table.ratings.mean()),
        rating_histogram=hist,
        user_count_distribution=user_counts,
        item_count_distribution=item_counts,
        n_users=len(user_counts),
        n_items=len(item_counts),
        n_ratings=table.n_records,
    )


# --- split directory I/O -------------------------------------------------

def write_ratings_csv(table: RatingsTable, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(RATINGS_HEADER)
        for u, i, r, t in zip(table.user_ids, table.item_ids,
                              table.ratings, table.timestamps):
            w.writerow([int(u), int(i), f"{float(r):g}", int(t)])


def write_split_dir(split: SplitPair, out_dir) -> None:
    """Persist a split as train.csv + test.csv + split_meta.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_ratings_csv(split.train, out / "train.csv")
    write_ratings_csv(split.test, out / "test.csv")
    meta = {"ratio": split.ratio, "seed": split.seed,
            "n_train": split.train.n_records, "n_test": split.test.n_records}
    (out / "split_meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def load_split_dir(data_dir) -> tuple[RatingsTable, RatingsTable, IndexMap]:
    """Read a split directory back; the index covers train ∪ test."""
    data = Path(data_dir)
    train = parse_ratings(data / "train.csv")
    test = parse_ratings(data / "test.csv")
    full = RatingsTable(
        np.concatenate([train.user_ids, test.user_ids]),
        np.concatenate([train.item_ids, test.item_ids]),
        np.concatenate([train.ratings, test.ratings]),
        np.concatenate([train.timestamps, test.timestamps]),
    )
    return train, test, build_index(full)


def write_item_counts(table: RatingsTable, path) -> None:
    """Per-movie rating count and mean from (train) data: movieId,count,mean."""
    ids, inverse = np.unique(table.item_ids, return_inverse=True)
    counts = np.bincount(inverse)
    sums = np.bincount(inverse, weights=table.ratings)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["movieId", "count", "mean"])
        for raw, c, s in zip(ids, counts, sums):
            w.writerow([int(raw), int(c), f"{s / c:.6f}"])


def read_item_counts(path) -> dict[int, tuple[int, float]]:
    out = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            out[int(row[0])] = (int(row[1]), float(row[2]))
    return out
