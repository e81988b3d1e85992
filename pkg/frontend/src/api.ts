// Thin client for the recommendation service JSON API.

export interface MovieResult {
    movieId: number;
    title: string;
    genres: string[];
    ratingCount: number;
    meanRating: number;
}

export interface RecommendedItem {
    movieId: number;
    title: string;
    score: number;
    popularityPart: number;
    affinityPart: number;
}

export interface RecommendRequest {
    ratings: { movieId: number; rating: number }[];
    alpha: number;
    topK: number;
    minCount: number;
}

export interface ModelInfo {
    k: number;
    lambda: number;
    tau: number;
    epochs: number;
    n_users: number;
    n_items: number;
    global_mean: number;
}

export class ApiError extends Error {
    constructor(public status: number, detail: string) {
        super(detail);
    }
}

async function raise(resp: Response): Promise<never> {
    let detail = `HTTP ${resp.status}`;
    try {
        const body = await resp.json();
        if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
        // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
}

export class ApiClient {
    constructor(private baseUrl: string = "") {}

    async searchMovies(query: string, limit = 20): Promise<MovieResult[]> {
        const q = encodeURIComponent(query);
        const resp = await fetch(`${this.baseUrl}/api/movies?q=${q}&limit=${limit}`);
        if (!resp.ok) await raise(resp);
        return resp.json();
    }

    async recommend(req: RecommendRequest): Promise<RecommendedItem[]> {
        const resp = await fetch(`${this.baseUrl}/api/recommend`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(req),
        });
        if (!resp.ok) await raise(resp);
        const body = await resp.json();
        return body.items;
    }

    async modelInfo(): Promise<ModelInfo> {
        const resp = await fetch(`${this.baseUrl}/api/model/info`);
        if (!resp.ok) await raise(resp);
        return resp.json();
    }
}
