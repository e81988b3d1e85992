// Single-page client: search the catalog, stage star ratings, tune alpha,
// and render ranked recommendations with the popularity/affinity breakdown.

import { ApiClient, ApiError, MovieResult, RecommendedItem } from "./api.js";
import { ALPHA_PRESETS, SessionState, onHalfStarGrid } from "./state.js";

export interface AppOptions {
    debounceMs?: number;
    searchLimit?: number;
    minCount?: number;
}

const STAR_CHOICES = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0];

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className?: string,
    text?: string,
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    if (className) node.className = className;
    if (text !== undefined) node.textContent = text;
    return node;
}

export class App {
    private root: HTMLElement;
    private api: ApiClient;
    state: SessionState;
    private debounceMs: number;
    private searchLimit: number;
    private minCount: number;

    private searchInput!: HTMLInputElement;
    private searchList!: HTMLElement;
    private ratedList!: HTMLElement;
    private alphaSlider!: HTMLInputElement;
    private alphaValue!: HTMLElement;
    private recommendButton!: HTMLButtonElement;
    private resultsList!: HTMLElement;
    private errorBanner!: HTMLElement;

    private searchTimer: ReturnType<typeof setTimeout> | null = null;
    private recommendSeq = 0; // latest request wins; stale responses are dropped

    constructor(root: HTMLElement, api: ApiClient, state: SessionState, opts: AppOptions = {}) {
        this.root = root;
        this.api = api;
        this.state = state;
        this.debounceMs = opts.debounceMs ?? 250;
        this.searchLimit = opts.searchLimit ?? 20;
        this.minCount = opts.minCount ?? 100;
        this.build();
        this.renderRated();
        this.renderAlpha();
    }

    private build(): void {
        this.root.textContent = "";

        this.errorBanner = el("div", "error-banner");
        this.errorBanner.hidden = true;
        this.root.appendChild(this.errorBanner);

        const searchSection = el("section", "search");
        searchSection.appendChild(el("h2", undefined, "Find movies"));
        this.searchInput = el("input", "search-input");
        this.searchInput.type = "search";
        this.searchInput.placeholder = "Search the catalog…";
        this.searchInput.addEventListener("input", () => this.onSearchInput());
        searchSection.appendChild(this.searchInput);
        this.searchList = el("ul", "search-results");
        searchSection.appendChild(this.searchList);
        this.root.appendChild(searchSection);

        const ratedSection = el("section", "rated");
        ratedSection.appendChild(el("h2", undefined, "Your ratings"));
        this.ratedList = el("ul", "rated-list");
        ratedSection.appendChild(this.ratedList);
        this.root.appendChild(ratedSection);

        const recSection = el("section", "recommend");
        recSection.appendChild(el("h2", undefined, "Recommendations"));

        const alphaRow = el("div", "alpha-row");
        alphaRow.appendChild(el("label", undefined, "Popularity weight α"));
        this.alphaSlider = el("input", "alpha-slider");
        this.alphaSlider.type = "range";
        // log-spaced: slider position p in [0,1] maps to 10^(-2 + 2p), i.e. 0.01..1
        this.alphaSlider.min = "0";
        this.alphaSlider.max = "1";
        this.alphaSlider.step = "0.01";
        this.alphaSlider.addEventListener("input", () => {
            const p = Number(this.alphaSlider.value);
            this.setAlpha(Math.pow(10, -2 + 2 * p));
        });
        alphaRow.appendChild(this.alphaSlider);
        this.alphaValue = el("span", "alpha-value");
        alphaRow.appendChild(this.alphaValue);
        for (const preset of ALPHA_PRESETS) {
            const btn = el("button", "alpha-preset", `α=${preset}`);
            btn.type = "button";
            btn.dataset.alpha = String(preset);
            btn.addEventListener("click", () => this.setAlpha(preset));
            alphaRow.appendChild(btn);
        }
        recSection.appendChild(alphaRow);

        this.recommendButton = el("button", "recommend-button", "Recommend");
        this.recommendButton.type = "button";
        this.recommendButton.addEventListener("click", () => {
            void this.requestRecommendations();
        });
        recSection.appendChild(this.recommendButton);

        this.resultsList = el("ol", "recommend-results");
        recSection.appendChild(this.resultsList);
        this.root.appendChild(recSection);
    }

    // --- search ---

    private onSearchInput(): void {
        if (this.searchTimer !== null) clearTimeout(this.searchTimer);
        const query = this.searchInput.value.trim();
        if (query === "") {
            this.renderSearchResults([]);
            return;
        }
        this.searchTimer = setTimeout(() => {
            void this.runSearch(query);
        }, this.debounceMs);
    }

    async runSearch(query: string): Promise<void> {
        try {
            const movies = await this.api.searchMovies(query, this.searchLimit);
            this.clearError();
            this.renderSearchResults(movies);
        } catch (err) {
            this.showError(err);
        }
    }

    private renderSearchResults(movies: MovieResult[]): void {
        this.searchList.textContent = "";
        if (movies.length === 0) {
            const empty = el("li", "empty-state", "Type a title to search the catalog.");
            this.searchList.appendChild(empty);
            return;
        }
        for (const movie of movies) {
            const item = el("li", "search-result");
            item.dataset.movieId = String(movie.movieId);
            item.appendChild(el("span", "title", movie.title));
            item.appendChild(el("span", "genres", movie.genres.join(", ")));
            item.appendChild(
                el("span", "mean-rating", `★ ${movie.meanRating.toFixed(2)} (${movie.ratingCount})`),
            );
            const select = el("select", "star-control");
            const placeholder = el("option", undefined, "rate…");
            placeholder.value = "";
            select.appendChild(placeholder);
            for (const stars of STAR_CHOICES) {
                const opt = el("option", undefined, `${stars.toFixed(1)} ★`);
                opt.value = String(stars);
                select.appendChild(opt);
            }
            const current = this.state.rated.get(movie.movieId);
            if (current !== undefined) select.value = String(current);
            select.addEventListener("change", () => {
                if (select.value !== "") this.rate(movie.movieId, Number(select.value));
            });
            item.appendChild(select);
            this.searchList.appendChild(item);
        }
    }

    // --- ratings ---

    rate(movieId: number, stars: number): void {
        if (!onHalfStarGrid(stars)) return;
        this.state.rate(movieId, stars);
        this.renderRated();
        this.updateRecommendButton();
    }

    unrate(movieId: number): void {
        this.state.unrate(movieId);
        this.renderRated();
        this.updateRecommendButton();
    }

    private renderRated(): void {
        this.ratedList.textContent = "";
        for (const [movieId, stars] of this.state.rated.entries()) {
            const item = el("li", "rated-item");
            item.dataset.movieId = String(movieId);
            item.appendChild(el("span", "stars", `${stars.toFixed(1)} ★`));
            item.appendChild(el("span", "movie-id", `#${movieId}`));
            const remove = el("button", "remove-rating", "✕");
            remove.type = "button";
            remove.addEventListener("click", () => this.unrate(movieId));
            item.appendChild(remove);
            this.ratedList.appendChild(item);
        }
        this.updateRecommendButton();
    }

    // --- alpha ---

    setAlpha(alpha: number): void {
        this.state.setAlpha(alpha);
        this.renderAlpha();
        this.updateRecommendButton();
        // a new regime invalidates the current list; re-query if a request is allowed
        if (this.resultsList.childElementCount > 0 && this.state.canRequest()) {
            void this.requestRecommendations();
        }
    }

    private renderAlpha(): void {
        const alpha = this.state.alpha;
        this.alphaValue.textContent = `α = ${alpha.toPrecision(3)}`;
        const clamped = Math.min(Math.max(alpha, 0.01), 1.0);
        this.alphaSlider.value = String((Math.log10(clamped) + 2) / 2);
    }

    private updateRecommendButton(): void {
        const ok = this.state.canRequest();
        this.recommendButton.disabled = !ok;
        this.recommendButton.title = ok
            ? ""
            : "Rate at least one movie or raise α above zero.";
    }

    // --- recommendations ---

    async requestRecommendations(): Promise<void> {
        if (!this.state.canRequest()) return;
        const seq = ++this.recommendSeq;
        try {
            const items = await this.api.recommend({
                ratings: this.state.ratingsPayload(),
                alpha: this.state.alpha,
                topK: this.state.topK,
                minCount: this.minCount,
            });
            if (seq !== this.recommendSeq) return; // a newer request superseded this one
            this.clearError();
            this.state.lastResults = items;
            this.renderResults(items);
        } catch (err) {
            if (seq !== this.recommendSeq) return;
            this.showError(err);
        }
    }

    private renderResults(items: RecommendedItem[]): void {
        this.resultsList.textContent = "";
        // response order is the ranking; never reorder, and never show staged movies
        items.forEach((item, index) => {
            if (this.state.rated.has(item.movieId)) return;
            const row = el("li", "recommend-result");
            row.dataset.movieId = String(item.movieId);
            row.appendChild(el("span", "rank", String(index + 1)));
            row.appendChild(el("span", "title", item.title));
            row.appendChild(el("span", "score", item.score.toFixed(4)));
            row.appendChild(
                el(
                    "span",
                    "score-split",
                    `popularity ${item.popularityPart.toFixed(4)} + affinity ${item.affinityPart.toFixed(4)}`,
                ),
            );
            this.resultsList.appendChild(row);
        });
    }

    // --- errors ---

    private showError(err: unknown): void {
        const detail =
            err instanceof ApiError
                ? `Service error (${err.status}): ${err.message}`
                : `Network error: ${err instanceof Error ? err.message : String(err)}`;
        this.errorBanner.textContent = detail;
        this.errorBanner.hidden = false;
    }

    private clearError(): void {
        this.errorBanner.hidden = true;
        this.errorBanner.textContent = "";
    }
}

export function createApp(
    root: HTMLElement,
    api: ApiClient,
    state: SessionState,
    opts: AppOptions = {},
): App {
    return new App(root, api, state, opts);
}
