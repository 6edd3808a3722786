// Single-page wiring: poll the service, paint the grid, forward clicks.
// All search state lives on the server; this file only holds the current
// payloads plus the user's selections.

import {
  ApiError,
  ExplorerClient,
  type ArchivePayload,
  type IndividualDetail,
  type MetricsPayload,
  type RunSummary,
} from "./api.js";
import { buildGridView, cellKey, heatmapHTML, isBinaryMap, type GridView } from "./heatmap.js";
import { ancestryLevels, isGridText } from "./lineage.js";
import { SingleFlight, startPolling } from "./poll.js";

const DEMO_CONFIG = {
  domain: { name: "tile_level", width: 10, height: 10 },
  engine: {
    algorithm: "ME",
    budget: 100000,
    init_count: 100,
    batch_size: 50,
    grid_resolution: [10, 10, 10],
  },
  seed: 1,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

const client = new ExplorerClient("");
const stepFlight = new SingleFlight();

interface State {
  run: RunSummary | null;
  axes: [number, number];
  archive: ArchivePayload | null;
  metrics: MetricsPayload | null;
  view: GridView | null;
  selected: { row: number; col: number } | null;
  detail: IndividualDetail | null;
  weights: Map<string, number>;
}

const state: State = {
  run: null,
  axes: [0, 1],
  archive: null,
  metrics: null,
  view: null,
  selected: null,
  detail: null,
  weights: new Map(),
};

const runSelect = el<HTMLSelectElement>("run-select");
const axisA = el<HTMLSelectElement>("axis-a");
const axisB = el<HTMLSelectElement>("axis-b");
const stepCount = el<HTMLInputElement>("step-count");
const stepBtn = el<HTMLButtonElement>("step-btn");
const weightInput = el<HTMLInputElement>("weight-input");
const favorBtn = el<HTMLButtonElement>("favor-btn");
const cadenceInput = el<HTMLInputElement>("cadence-input");
const banner = el<HTMLDivElement>("error-banner");
const statusBar = el<HTMLDivElement>("status");
const heatmapBox = el<HTMLDivElement>("heatmap");
const legend = el<HTMLDivElement>("legend");
const detailBox = el<HTMLDivElement>("detail");

function showError(message: string): void {
  banner.textContent = message;
  banner.classList.remove("hidden");
}

function clearError(): void {
  banner.classList.add("hidden");
}

function surfacing(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  return err instanceof Error ? err.message : String(err);
}

async function refreshRunList(): Promise<void> {
  const runs = await client.listRuns();
  const current = state.run?.run_id ?? "";
  runSelect.innerHTML = "";
  for (const run of runs) {
    const option = document.createElement("option");
    option.value = run.run_id;
    option.textContent = `${run.run_id} ${run.algorithm} ${run.domain} seed=${run.seed}`;
    runSelect.appendChild(option);
  }
  if (runs.length === 0) {
    const option = document.createElement("option");
    option.value = "";
    option.textContent = "no runs yet";
    runSelect.appendChild(option);
  }
  runSelect.value = runs.some((r) => r.run_id === current) ? current : (runs[0]?.run_id ?? "");
}

function fillAxisPickers(names: string[]): void {
  for (const [select, axis] of [
    [axisA, state.axes[0]],
    [axisB, state.axes[1]],
  ] as const) {
    select.innerHTML = "";
    names.forEach((name, i) => {
      const option = document.createElement("option");
      option.value = String(i);
      option.textContent = `${i}: ${name}`;
      select.appendChild(option);
    });
    select.value = String(axis);
  }
  const folded = state.run?.resolution ? isBinaryMap(state.run.resolution) : false;
  axisA.disabled = folded || names.length < 3;
  axisB.disabled = folded || names.length < 3;
}

async function connect(runId: string): Promise<void> {
  state.run = await client.getRun(runId);
  state.axes = [0, 1];
  state.selected = null;
  state.detail = null;
  state.weights = new Map();
  fillAxisPickers(state.run.descriptor_names);
  favorBtn.disabled = !state.run.supports_preferences;
  await pollTick();
}

async function pollTick(): Promise<void> {
  if (!state.run) return;
  const runId = state.run.run_id;
  state.archive = await client.archive(runId, state.axes);
  state.metrics = await client.metrics(runId);
  renderAll();
}

function renderStatus(): void {
  const a = state.archive;
  const m = state.metrics;
  if (!a || !m) {
    statusBar.textContent = "no run loaded";
    return;
  }
  const best = a.best_fitness === null ? "-" : a.best_fitness.toFixed(4);
  statusBar.innerHTML = [
    `<span>gen <b>${a.generation}</b></span>`,
    `<span>evals <b>${a.evaluations}</b></span>`,
    `<span>coverage <b>${(a.coverage * 100).toFixed(1)}%</b></span>`,
    `<span>qd <b>${a.qd_score.toFixed(3)}</b></span>`,
    `<span>best <b>${best}</b></span>`,
    m.finished ? `<span class="done">budget spent</span>` : "",
  ].join(" ");
}

function renderLegend(): void {
  if (!state.view) {
    legend.innerHTML = "";
    return;
  }
  legend.innerHTML =
    `<span>${state.view.lo.toFixed(3)}</span>` +
    `<div class="legend-bar"></div>` +
    `<span>${state.view.hi.toFixed(3)}</span>` +
    `<span class="legend-note">rows: ${esc(state.view.rowName)}, cols: ${esc(state.view.colName)}</span>`;
}

function renderHeatmap(): void {
  if (!state.archive) {
    heatmapBox.innerHTML = "";
    return;
  }
  try {
    state.view = buildGridView(state.archive, state.weights);
  } catch (err) {
    // no partial render on a malformed payload
    state.view = null;
    heatmapBox.innerHTML = "";
    legend.innerHTML = "";
    showError(surfacing(err));
    return;
  }
  heatmapBox.innerHTML = heatmapHTML(state.view, state.selected);
  renderLegend();
}

function selectedCell() {
  if (!state.view || !state.selected) return null;
  return state.view.matrix[state.selected.row]?.[state.selected.col] ?? null;
}

function renderDetail(): void {
  const cv = selectedCell();
  if (!cv) {
    detailBox.innerHTML = `<p class="dim">Click a cell to inspect its elite.</p>`;
    return;
  }
  const parts: string[] = [];
  const where = cv.cell ? `cell ${cellKey(cv.cell)}` : `pixel ${cv.row},${cv.col}`;
  const weightNote =
    cv.weight !== 1 ? ` <span class="badge">weight ${cv.weight}${cv.occupied ? "" : " (inert)"}</span>` : "";
  parts.push(`<h3>${esc(where)}${weightNote}</h3>`);

  if (!cv.occupied) {
    parts.push(`<p class="dim">Empty cell. Favoring it is accepted but stays inert until an elite arrives.</p>`);
    detailBox.innerHTML = parts.join("");
    return;
  }

  const counts = state.metrics?.selection_counts;
  if (counts && cv.cell) {
    const drawn = counts[cellKey(cv.cell)] ?? 0;
    const total = Object.values(counts).reduce((acc, n) => acc + n, 0);
    parts.push(`<p class="dim">parent draws: ${drawn} of ${total}</p>`);
  }

  const d = state.detail;
  if (!d || d.id !== cv.individualId) {
    parts.push(`<p class="dim">loading elite ${cv.individualId}...</p>`);
    detailBox.innerHTML = parts.join("");
    return;
  }

  parts.push(
    `<table class="facts">` +
      `<tr><td>individual</td><td>${d.id}</td></tr>` +
      `<tr><td>fitness</td><td>${d.fitness.toFixed(6)}</td></tr>` +
      `<tr><td>born</td><td>generation ${d.generation} (${esc(d.operation)})</td></tr>` +
      `<tr><td>descriptor</td><td>${d.descriptor.map((x) => x.toFixed(3)).join(", ")}</td></tr>` +
      `<tr><td>feasible</td><td>${d.feasible ? "yes" : `no (${d.infeasibility.toFixed(3)})`}</td></tr>` +
      `</table>`,
  );
  const gridText = isGridText(d.genome_text);
  parts.push(`<pre class="${gridText ? "level" : "genome"}">${esc(d.genome_text)}</pre>`);

  const levels = ancestryLevels(d);
  parts.push(`<h4>lineage</h4>`);
  for (const [depth, nodes] of levels.entries()) {
    const label = depth === 0 ? "self" : depth === 1 ? "parents" : `${depth} back`;
    const links = nodes
      .map(
        (node) =>
          `<button class="lineage-link" data-individual="${node.individual_id}">` +
          `#${node.individual_id} ${esc(node.operation)} f=${node.fitness.toFixed(3)}</button>`,
      )
      .join(" ");
    parts.push(`<div class="lineage-row"><span class="dim">${label}</span> ${links}</div>`);
  }
  detailBox.innerHTML = parts.join("");
}

function renderAll(): void {
  renderStatus();
  renderHeatmap();
  renderDetail();
}

async function inspect(individualId: number): Promise<void> {
  if (!state.run) return;
  state.detail = await client.individual(state.run.run_id, individualId);
  renderDetail();
}

heatmapBox.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest<HTMLElement>(".cell");
  if (!target || !state.view) return;
  state.selected = { row: Number(target.dataset.row), col: Number(target.dataset.col) };
  renderHeatmap();
  renderDetail();
  const cv = selectedCell();
  if (cv?.individualId != null) {
    inspect(cv.individualId).catch((err) => showError(surfacing(err)));
  }
});

detailBox.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest<HTMLElement>("[data-individual]");
  if (!target) return;
  inspect(Number(target.dataset.individual)).catch((err) => showError(surfacing(err)));
});

stepBtn.addEventListener("click", () => {
  if (!state.run || stepFlight.busy) return;
  const generations = Math.max(0, Number(stepCount.value) || 0);
  clearError();
  stepBtn.disabled = true;
  stepFlight
    .run(async () => {
      await client.step(state.run!.run_id, generations);
      await pollTick();
    })
    .catch((err) => showError(surfacing(err)))
    .finally(() => {
      stepBtn.disabled = false;
    });
});

favorBtn.addEventListener("click", () => {
  const cv = selectedCell();
  if (!state.run || !cv) return;
  if (!cv.cell) {
    showError("this view folds several cells together here; select an occupied cell to favor");
    return;
  }
  const weight = Number(weightInput.value) || 1;
  const cell = cv.cell;
  clearError();
  client
    .favorCell(state.run.run_id, cell, weight)
    .then((ack) => {
      if (ack.weight === 1) {
        state.weights.delete(cellKey(cell));
      } else {
        state.weights.set(cellKey(cell), ack.weight);
      }
      renderHeatmap();
      renderDetail();
    })
    .catch((err) => showError(surfacing(err)));
});

runSelect.addEventListener("change", () => {
  if (!runSelect.value) return;
  clearError();
  connect(runSelect.value).catch((err) => showError(surfacing(err)));
});

for (const select of [axisA, axisB]) {
  select.addEventListener("change", () => {
    const a = Number(axisA.value);
    const b = Number(axisB.value);
    if (a === b) {
      showError("heatmap axes must be distinct");
      return;
    }
    clearError();
    state.axes = [a, b];
    state.selected = null;
    pollTick().catch((err) => showError(surfacing(err)));
  });
}

el<HTMLButtonElement>("refresh-runs").addEventListener("click", () => {
  refreshRunList().catch((err) => showError(surfacing(err)));
});

el<HTMLButtonElement>("demo-run").addEventListener("click", () => {
  clearError();
  client
    .createRun(DEMO_CONFIG)
    .then(async (run) => {
      await refreshRunList();
      runSelect.value = run.run_id;
      await connect(run.run_id);
    })
    .catch((err) => showError(surfacing(err)));
});

const poller = startPolling(() => {
  if (!state.run || stepFlight.busy) return;
  return pollTick().catch((err) => showError(surfacing(err)));
}, Number(cadenceInput.value) || 2000);

cadenceInput.addEventListener("change", () => {
  poller.setCadence(Number(cadenceInput.value) || 2000);
});

refreshRunList()
  .then(() => {
    if (runSelect.value) return connect(runSelect.value);
  })
  .catch((err) => showError(surfacing(err)));
