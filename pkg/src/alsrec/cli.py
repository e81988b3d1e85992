"""Command-line entry points: ingest, train, evaluate, grid, project,
recommend, serve."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import engine
from .analysis import pca_project
from .evaluation import EvalConfig, evaluate
from .experiments import GridSpec, run_grid, select_best
from .ingest import (IndexMap, build_csr, build_index, dataset_stats,
                     load_split_dir, parse_movies, parse_ratings,
                     read_item_counts, stratified_split, write_item_counts,
                     write_split_dir)
from .model_io import ModelBundle, load_model, save_model
from .recommend import FoldInRequest, fold_in_user, score_items
from .sparse import BY_ITEM, BY_USER


def _index_from_bundle(bundle: ModelBundle) -> IndexMap:
    return IndexMap(bundle.user_fwd, bundle.user_raw_ids,
                    bundle.item_fwd, bundle.item_raw_ids)


@click.group()
def main():
    """ALS matrix-factorization recommender toolkit."""


@main.command()
@click.option("--ratings", "ratings_path", required=True, type=click.Path(exists=True))
@click.option("--movies", "movies_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--split", "ratio", default=0.8, show_default=True)
@click.option("--seed", default=0, show_default=True)
def ingest(ratings_path, movies_path, out_dir, ratio, seed):
    """Parse ratings, write stats, split into train/test, emit counts."""
    table = parse_ratings(ratings_path)
    parse_movies(movies_path)  # validated here; served straight from file later
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stats = dataset_stats(table)
    (out / "stats.json").write_text(json.dumps(stats.to_dict(), indent=2) + "\n")
    split = stratified_split(table, ratio, seed)
    write_split_dir(split, out)
    write_item_counts(split.train, out / "counts.csv")
    click.echo(f"{table.n_records} ratings -> {split.train.n_records} train / "
               f"{split.test.n_records} test (global mean {stats.global_mean:.4f})")


@main.command()
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True))
@click.option("--k", default=10, show_default=True)
@click.option("--lambda", "lam", default=0.1, show_default=True)
@click.option("--tau", default=0.25, show_default=True)
@click.option("--epochs", default=20, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--threads", default=1, show_default=True)
@click.option("--out", "out_path", default="model.alsm", show_default=True)
def train(data_dir, k, lam, tau, epochs, seed, threads, out_path):
    """Train on a split directory and write a .alsm model file."""
    train_table, test_table, index = load_split_dir(data_dir)
    by_user = build_csr(train_table, index, BY_USER)
    by_item = build_csr(train_table, index, BY_ITEM)
    test_by_user = build_csr(test_table, index, BY_USER)
    h = engine.Hyperparams(k=k, lam=lam, tau=tau, epochs=epochs, seed=seed)
    params, history = engine.train(by_user, by_item, h,
                                   test_by_user=test_by_user, n_threads=threads)
    bundle = ModelBundle(params, h, index.user_rev, index.item_rev)
    save_model(out_path, bundle)
    history.to_csv(str(Path(out_path).with_suffix(".history.csv")))
    last = history.records[-1]
    click.echo(f"epoch {last.epoch}: objective {last.objective:.4f}, "
               f"train RMSE {last.train_rmse:.4f}, test RMSE {last.test_rmse:.4f}")


@main.command("evaluate")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True))
@click.option("--k", "top_k", default=10, show_default=True)
@click.option("--threshold", default=3.5, show_default=True)
@click.option("--sample", default=3000, show_default=True)
@click.option("--seed", default=0, show_default=True)
def evaluate_cmd(model_path, data_dir, top_k, threshold, sample, seed):
    """Evaluate a model against a split directory; prints a JSON report."""
    bundle = load_model(model_path)
    index = _index_from_bundle(bundle)
    train_table, test_table, _ = load_split_dir(data_dir)
    by_user = build_csr(train_table, index, BY_USER)
    test_by_user = build_csr(test_table, index, BY_USER)
    cfg = EvalConfig(K=top_k, relevance_threshold=threshold,
                     sample_users=sample, seed=seed)
    report = evaluate(bundle.params, by_user, test_by_user, cfg)
    click.echo(json.dumps(report.to_dict(), indent=2))


@main.command()
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def grid(data_dir, config_path, out_dir):
    """Run the hyperparameter grid; resumes if results.csv already exists."""
    spec = GridSpec.from_json(config_path) if config_path else GridSpec()
    rows = run_grid(spec, data_dir, out_dir)
    ok_rows = [r for r in rows if r.status == "ok"]
    if ok_rows:
        best = select_best(rows)
        click.echo(f"best cell: k={best.k} lambda={best.lam} tau={best.tau} "
                   f"test RMSE {best.test_rmse:.4f}")
    else:
        click.echo("no successful cells", err=True)
        sys.exit(1)


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--movies", "movies_path", required=True, type=click.Path(exists=True))
@click.option("--titles", "titles_path", type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def project(model_path, movies_path, titles_path, out_path):
    """Project item trait vectors to 2D; writes movieId,title,x,y."""
    bundle = load_model(model_path)
    if bundle.hyperparams.k < 2:
        raise click.ClickException("model must have k >= 2 to project")
    movies = parse_movies(movies_path)
    title_by_id = {mid: t for mid, t, _ in movies}
    if titles_path:
        wanted = {line.strip() for line in Path(titles_path).read_text().splitlines()
                  if line.strip()}
        selected = [mid for mid, t, _ in movies if t in wanted]
    else:
        selected = [mid for mid, _, _ in movies]
    item_fwd = bundle.item_fwd
    dense = [item_fwd[mid] for mid in selected if mid in item_fwd]
    raw = [mid for mid in selected if mid in item_fwd]
    if len(dense) < 2:
        raise click.ClickException("need at least 2 selected movies present in the model")
    proj = pca_project(bundle.params.V, dense)
    with Path(out_path).open("w", encoding="utf-8") as fh:
        fh.write("movieId,title,x,y\n")
        for mid, (x, y) in zip(raw, proj.coords):
            title = title_by_id.get(mid, "").replace('"', '""')
            fh.write(f'{mid},"{title}",{x:.6f},{y:.6f}\n')
    click.echo(f"wrote {len(raw)} points "
               f"(explained variance {proj.explained_variance_ratio.sum():.3f})")


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--movies", "movies_path", required=True, type=click.Path(exists=True))
@click.option("--counts", "counts_path", required=True, type=click.Path(exists=True))
@click.option("--rate", "rate_spec", required=True,
              help='Comma-separated raw-id:stars pairs, e.g. "1:5.0,364:5.0"')
@click.option("--alpha", default=0.05, show_default=True)
@click.option("--top", "top_k", default=10, show_default=True)
@click.option("--min-count", default=100, show_default=True)
def recommend(model_path, movies_path, counts_path, rate_spec, alpha, top_k, min_count):
    """Fold in the given ratings and print ranked recommendations."""
    bundle = load_model(model_path)
    item_fwd = bundle.item_fwd
    ratings = []
    for part in rate_spec.split(","):
        raw_s, stars_s = part.split(":")
        raw = int(raw_s)
        if raw not in item_fwd:
            raise click.ClickException(f"movie id {raw} not in model")
        ratings.append((item_fwd[raw], float(stars_s)))
    counts_by_raw = read_item_counts(counts_path)
    counts = np.array([counts_by_raw.get(int(r), (0, 0.0))[0]
                       for r in bundle.item_raw_ids], dtype=np.int64)
    title_by_id = {mid: t for mid, t, _ in parse_movies(movies_path)}
    u_vec, b_u = fold_in_user(ratings, bundle.params, bundle.hyperparams)
    req = FoldInRequest(ratings=ratings, alpha=alpha, top_k=top_k,
                        min_ratings=min_count)
    scored = score_items(u_vec, b_u, bundle.params, req, counts)
    click.echo(f"{'rank':>4}  {'score':>8}  {'popularity':>10}  {'affinity':>8}  title")
    for rank, s in enumerate(scored, 1):
        raw = int(bundle.item_raw_ids[s.item_id])
        click.echo(f"{rank:>4}  {s.score:8.4f}  {s.popularity_part:10.4f}  "
                   f"{s.affinity_part:8.4f}  {title_by_id.get(raw, str(raw))}")


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--movies", "movies_path", required=True, type=click.Path(exists=True))
@click.option("--counts", "counts_path", required=True, type=click.Path(exists=True))
@click.option("--port", default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(model_path, movies_path, counts_path, port, host):
    """Serve the recommendation API over HTTP."""
    import uvicorn

    from .service import build_catalog, create_app
    bundle = load_model(model_path)
    catalog = build_catalog(movies_path, counts_path)
    uvicorn.run(create_app(bundle, catalog), host=host, port=port)


if __name__ == "__main__":
    main()
