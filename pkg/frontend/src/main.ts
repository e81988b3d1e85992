import { ApiClient } from "./api.js";
import { SessionState } from "./state.js";
import { createApp } from "./app.js";

declare global {
    interface Window {
        API_BASE_URL?: string;
    }
}

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const api = new ApiClient(window.API_BASE_URL ?? "");
const state = new SessionState(window.localStorage);
createApp(root, api, state);
