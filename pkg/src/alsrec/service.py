"""HTTP facade over a trained model: catalog search, fold-in recommend,
model metadata.

Raw MovieLens ids are the only ids on the wire; dense training indices
never leak to clients.  The model and catalog are loaded once at startup
and treated as immutable, so concurrent requests need no locking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .engine import RATING_MAX, RATING_MIN
from .ingest import parse_movies, read_item_counts
from .model_io import ModelBundle
from .recommend import FoldInRequest, fold_in_user, score_items


@dataclass
class CatalogEntry:
    movie_id: int
    title: str
    genres: list[str]
    rating_count: int
    mean_rating: float


def build_catalog(movies_path, counts_path) -> list[CatalogEntry]:
    counts = read_item_counts(counts_path)
    entries = []
    for movie_id, title, genres in parse_movies(movies_path):
        c, m = counts.get(movie_id, (0, 0.0))
        entries.append(CatalogEntry(movie_id, title, genres, c, m))
    return entries


class RatingIn(BaseModel):
    movieId: int
    rating: float


class RecommendIn(BaseModel):
    ratings: list[RatingIn]
    alpha: float = 0.05
    topK: int = 10
    minCount: int = 100


def _r6(x: float) -> float:
    return round(float(x), 6)


def create_app(bundle: ModelBundle | None = None,
               catalog: list[CatalogEntry] | None = None) -> FastAPI:
    app = FastAPI(title="alsrec")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    catalog = catalog or []
    titles = {e.movie_id: e.title for e in catalog}

    # Dense per-item training counts, aligned with the model's item axis.
    counts_dense = None
    if bundle is not None:
        counts_by_raw = {e.movie_id: e.rating_count for e in catalog}
        counts_dense = np.array([counts_by_raw.get(int(raw), 0)
                                 for raw in bundle.item_raw_ids], dtype=np.int64)

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": "malformed request"})

    @app.get("/api/health")
    def health():
        return {"status": "ok", "model_loaded": bundle is not None}

    @app.get("/api/movies")
    def search_movies(q: str | None = None, limit: int = 20):
        if q is None:
            raise HTTPException(status_code=400, detail="query parameter q is required")
        if limit < 1:
            raise HTTPException(status_code=400, detail="limit must be >= 1")
        needle = q.lower()
        matches = [e for e in catalog if needle in e.title.lower()]
        matches.sort(key=lambda e: (-e.rating_count, e.title))
        return [{"movieId": e.movie_id, "title": e.title, "genres": e.genres,
                 "ratingCount": e.rating_count, "meanRating": _r6(e.mean_rating)}
                for e in matches[:limit]]

    @app.post("/api/recommend")
    def recommend(body: RecommendIn):
        if bundle is None:
            raise HTTPException(status_code=503, detail="no model loaded")
        if not body.ratings and body.alpha == 0:
            raise HTTPException(status_code=422,
                                detail="empty ratings with alpha=0: score is undetermined")
        item_fwd = bundle.item_fwd
        unknown = [r.movieId for r in body.ratings if r.movieId not in item_fwd]
        if unknown:
            raise HTTPException(status_code=422,
                                detail=f"unknown movie ids: {unknown}")
        for r in body.ratings:
            if not float(r.rating * 2).is_integer() or not RATING_MIN <= r.rating <= RATING_MAX:
                raise HTTPException(status_code=422,
                                    detail=f"rating {r.rating} not on half-star grid")
        dense = [(item_fwd[r.movieId], r.rating) for r in body.ratings]
        u_vec, b_u = fold_in_user(dense, bundle.params, bundle.hyperparams)
        req = FoldInRequest(ratings=dense, alpha=body.alpha,
                            top_k=body.topK, min_ratings=body.minCount)
        scored = score_items(u_vec, b_u, bundle.params, req, counts_dense)
        items = []
        for s in scored:
            raw = int(bundle.item_raw_ids[s.item_id])
            items.append({"movieId": raw,
                          "title": titles.get(raw, ""),
                          "score": _r6(s.score),
                          "popularityPart": _r6(s.popularity_part),
                          "affinityPart": _r6(s.affinity_part)})
        return {"items": items}

    @app.get("/api/model/info")
    def model_info():
        if bundle is None:
            raise HTTPException(status_code=503, detail="no model loaded")
        h = bundle.hyperparams
        return {"k": h.k, "lambda": h.lam, "tau": h.tau, "epochs": h.epochs,
                "n_users": bundle.params.n_users, "n_items": bundle.params.n_items,
                "global_mean": _r6(bundle.params.mu)}

    return app
