"""Versioned binary model format.

Layout (little-endian): magic `ALSM`, format version u32, n_users u64,
n_items u64, k u32, mu f64, then b_user, b_item, U (row-major), V
(row-major) as f64 arrays, then a JSON trailer holding hyperparameters,
the seed, and the raw-id arrays of the index maps.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import Hyperparams, ModelParams

MAGIC = b"ALSM"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQQId")


@dataclass
class ModelBundle:
    """A trained model plus everything needed to serve it."""

    params: ModelParams
    hyperparams: Hyperparams
    user_raw_ids: np.ndarray
    item_raw_ids: np.ndarray

    @property
    def item_fwd(self) -> dict:
        return {int(raw): j for j, raw in enumerate(self.item_raw_ids)}

    @property
    def user_fwd(self) -> dict:
        return {int(raw): j for j, raw in enumerate(self.user_raw_ids)}


def save_model(path, bundle: ModelBundle) -> None:
    p = bundle.params
    h = bundle.hyperparams
    if len(bundle.user_raw_ids) != p.n_users or len(bundle.item_raw_ids) != p.n_items:
        raise ValueError("raw-id arrays do not match parameter shapes")
    trailer = json.dumps({
        "hyperparams": {"k": h.k, "lambda": h.lam, "tau": h.tau,
                        "epochs": h.epochs, "seed": h.seed},
        "seed": h.seed,
        "user_raw_ids": [int(x) for x in bundle.user_raw_ids],
        "item_raw_ids": [int(x) for x in bundle.item_raw_ids],
    }, sort_keys=True).encode("utf-8")
    with Path(path).open("wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION,
                              p.n_users, p.n_items, p.k, p.mu))
        for arr in (p.b_user, p.b_item, p.U, p.V):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        fh.write(trailer)


def load_model(path) -> ModelBundle:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated model file")
    magic, version, n_users, n_items, k, mu = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    off = _HEADER.size

    def take(count: int, shape) -> np.ndarray:
        nonlocal off
        nbytes = count * 8
        if off + nbytes > len(raw):
            raise ValueError(f"{path}: truncated parameter block")
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=off)
        off += nbytes
        return arr.astype(np.float64).reshape(shape)

    b_user = take(n_users, (n_users,))
    b_item = take(n_items, (n_items,))
    U = take(n_users * k, (n_users, k))
    V = take(n_items * k, (n_items, k))
    trailer = json.loads(raw[off:].decode("utf-8"))
    hj = trailer["hyperparams"]
    h = Hyperparams(k=hj["k"], lam=hj["lambda"], tau=hj["tau"],
                    epochs=hj["epochs"], seed=hj["seed"])
    return ModelBundle(
        params=ModelParams(mu, b_user, b_item, U, V),
        hyperparams=h,
        user_raw_ids=np.asarray(trailer["user_raw_ids"], dtype=np.int64),
        item_raw_ids=np.asarray(trailer["item_raw_ids"], dtype=np.int64),
    )
