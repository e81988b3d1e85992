// Session state: the ratings the visitor has staged, plus scoring knobs.
// Persisted to browser storage so a refresh keeps the session.

import type { RecommendedItem } from "./api.js";

export const ALPHA_PRESETS = [0.05, 0.5, 1.0];
const STORAGE_KEY = "alsrec-session";

export interface SessionSnapshot {
    rated: Record<string, number>;
    alpha: number;
    topK: number;
}

export function onHalfStarGrid(stars: number): boolean {
    return stars >= 0.5 && stars <= 5.0 && Number.isInteger(stars * 2);
}

export class SessionState {
    rated = new Map<number, number>();
    alpha = 0.05;
    topK = 10;
    lastResults: RecommendedItem[] = [];

    constructor(private storage: Storage | null = null) {
        this.restore();
    }

    rate(movieId: number, stars: number): void {
        if (!onHalfStarGrid(stars)) {
            throw new Error(`rating ${stars} is not on the half-star grid`);
        }
        this.rated.set(movieId, stars);
        this.persist();
    }

    unrate(movieId: number): void {
        this.rated.delete(movieId);
        this.persist();
    }

    setAlpha(alpha: number): void {
        if (alpha < 0) throw new Error("alpha must be >= 0");
        this.alpha = alpha;
        this.persist();
    }

    canRequest(): boolean {
        return this.rated.size > 0 || this.alpha > 0;
    }

    ratingsPayload(): { movieId: number; rating: number }[] {
        return [...this.rated.entries()].map(([movieId, rating]) => ({ movieId, rating }));
    }

    private persist(): void {
        if (!this.storage) return;
        const snap: SessionSnapshot = {
            rated: Object.fromEntries(
                [...this.rated.entries()].map(([k, v]) => [String(k), v]),
            ),
            alpha: this.alpha,
            topK: this.topK,
        };
        this.storage.setItem(STORAGE_KEY, JSON.stringify(snap));
    }

    private restore(): void {
        const raw = this.storage?.getItem(STORAGE_KEY);
        if (!raw) return;
        try {
            const snap = JSON.parse(raw) as SessionSnapshot;
            this.rated = new Map(
                Object.entries(snap.rated ?? {}).map(([k, v]) => [Number(k), v]),
            );
            if (typeof snap.alpha === "number") this.alpha = snap.alpha;
            if (typeof snap.topK === "number") this.topK = snap.topK;
        } catch {
            // corrupt snapshot: start fresh
        }
    }
}
