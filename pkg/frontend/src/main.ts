import { ApiClient, ApiError } from "./api";
import { STRINGS } from "./locale";
import type { Period } from "./period";
import { selectRange, singleDay } from "./period";
import { renderDetail, renderGrid, renderKindTabs } from "./render";
import { ViewState } from "./state";
import type { MediaKind } from "./types";

const PAGE_SIZE = 50;

const baseUrl =
  new URLSearchParams(location.search).get("api") ?? "http://localhost:8008";
const client = new ApiClient(baseUrl);
const state = new ViewState();

const el = (id: string) => document.getElementById(id) as HTMLElement;

function setStatus(text: string): void {
  el("status").textContent = text;
}

/** <img>/<a> elements carry data-media; fill src/href via authenticated fetch. */
async function hydrateMedia(root: HTMLElement): Promise<void> {
  const nodes = root.querySelectorAll<HTMLElement>("[data-media]");
  for (const node of nodes) {
    const path = node.dataset.media;
    if (!path) continue;
    try {
      const blob = await client.fetchMedia(path);
      const url = URL.createObjectURL(blob);
      if (node instanceof HTMLImageElement) node.src = url;
      else if (node instanceof HTMLAnchorElement) node.href = url;
    } catch {
      node.classList.add("media-missing");
    }
  }
}

async function showGrid(period: Period, kind: MediaKind): Promise<void> {
  const requestId = state.beginRequest(period, kind);
  el("tabs").innerHTML = renderKindTabs(kind);
  try {
    const entries = await client.top(period, kind, PAGE_SIZE);
    if (!state.applyResults(requestId, entries)) return;
    const grid = el("grid");
    grid.innerHTML = renderGrid(entries);
    el("detail").innerHTML = "";
    void hydrateMedia(grid);
  } catch (err) {
    if (err instanceof ApiError && err.status === 401) {
      setStatus(STRINGS.sessionExpired);
      el("login").hidden = false;
    } else {
      setStatus(err instanceof Error ? err.message : String(err));
    }
  }
}

async function showDetail(clusterId: string): Promise<void> {
  const grid = el("grid");
  if (!state.openDetail(clusterId, grid.scrollTop) || state.period === null) return;
  const details = await client.content(clusterId, state.period);
  const panel = el("detail");
  panel.innerHTML = renderDetail(details);
  void hydrateMedia(panel);
}

function currentPeriod(): Period | null {
  const from = (el("from-date") as HTMLInputElement).value;
  const to = (el("to-date") as HTMLInputElement).value;
  if (from && !to) return singleDay(from);
  const period = selectRange(from, to);
  if (period === null) setStatus(STRINGS.invalidRange);
  return period;
}

function wireEvents(): void {
  el("login-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const username = (el("username") as HTMLInputElement).value;
    const password = (el("password") as HTMLInputElement).value;
    client
      .login(username, password)
      .then(() => {
        el("login").hidden = true;
        setStatus("");
        const period = currentPeriod();
        if (period) void showGrid(period, state.kind);
      })
      .catch(() => setStatus(STRINGS.loginFailed));
  });

  el("apply-period").addEventListener("click", () => {
    const period = currentPeriod();
    if (period && client.hasSession()) void showGrid(period, state.kind);
  });

  el("tabs").addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest<HTMLElement>("[data-kind]");
    if (!button) return;
    const period = state.switchKind(button.dataset.kind as MediaKind);
    if (period) void showGrid(period, state.kind);
  });

  el("grid").addEventListener("click", (event) => {
    const tile = (event.target as HTMLElement).closest<HTMLElement>("[data-cluster]");
    if (tile?.dataset.cluster) void showDetail(tile.dataset.cluster);
  });

  el("detail").addEventListener("click", (event) => {
    if ((event.target as HTMLElement).classList.contains("close-detail")) {
      const scrollTop = state.closeDetail();
      el("detail").innerHTML = "";
      el("grid").scrollTop = scrollTop;
    }
  });
}

document.title = STRINGS.appTitle;
el("app-title").textContent = STRINGS.appTitle;
el("login-heading").textContent = STRINGS.loginHeading;
el("tabs").innerHTML = renderKindTabs(state.kind);
wireEvents();
