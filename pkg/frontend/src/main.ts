// App wiring: poll-based refresh over the review API, decision drafting,
// stage control, and the read-only dashboards.

import { ApiError, OntoforgeClient } from "./api.js";
import {
  DraftMap, buildClassTree, buildMetricsCard, buildReviewQueue, buildStagePanel,
  buildTestTable, describeApiError, draftsToDecisions, setDraft,
} from "./model.js";
import { parseTurtle } from "./turtle.js";
import {
  clear, el, renderBanner, renderClassTree, renderLog, renderMetricsCard,
  renderQueue, renderStagePanel, renderStamp, renderTestTable,
} from "./ui.js";

const POLL_MS = 4000;

const client = new OntoforgeClient("");
let drafts: DraftMap = new Map();
let statusFilter = "Pending";
let kindFilter = "";

function $(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function showError(error: unknown) {
  const message = error instanceof ApiError ? describeApiError(error) : String(error);
  renderBanner($("banner"), message, "error");
}

function showInfo(message: string) {
  renderBanner($("banner"), message, "info");
}

async function refreshProject() {
  const summary = await client.project();
  $("title").textContent = summary.name;
  renderStagePanel($("stages"), buildStagePanel(summary), runStage, revertStage);

  const merges = clear($("modelets"));
  for (const modelet of summary.modelets) {
    const row = el("div", { class: "modelet" }, [
      el("span", {}, [`${modelet.id} (${modelet.title}) — ${modelet.status}`]),
    ]);
    if (modelet.status === "UnderTest") {
      const button = el("button", {}, ["merge"]);
      button.addEventListener("click", () => mergeModelet(modelet.id));
      row.append(button);
    }
    if (modelet.gate_report) {
      const failing = [...new Set(modelet.gate_report.failed_cases.map((c) => c.cq_id))];
      row.append(el("span", { class: "gate-report" },
        [` last merge failed: ${failing.join(", ") || "model errors"}`]));
    }
    merges.append(row);
  }
  renderStamp($("stamp"), new Date());
}

async function refreshQueue() {
  const proposals = await client.proposals(statusFilter || undefined);
  const rows = buildReviewQueue(proposals, { kind: kindFilter || undefined });
  renderQueue($("queue"), rows, drafts, (id, verdict) => {
    if (verdict === "edit") {
      const row = rows.find((r) => r.id === id);
      const current = JSON.stringify(row?.payload ?? {}, null, 1);
      const edited = window.prompt("Edit the payload JSON", current);
      if (edited === null) return;
      try {
        drafts = setDraft(drafts, id, "edit", JSON.parse(edited));
      } catch (error) {
        showError(`payload is not valid JSON: ${error}`);
        return;
      }
    } else {
      drafts = setDraft(drafts, id, verdict);
    }
    void refreshQueue();
  });
  $("draft-count").textContent = `${drafts.size} drafted decision(s)`;
}

async function refreshDashboards() {
  const [metrics, tests, log, turtle] = await Promise.all([
    client.metrics(), client.testsReport(), client.log(30), client.ontologyTurtle(),
  ]);
  renderMetricsCard($("metrics"), buildMetricsCard(metrics));
  renderTestTable($("tests"), buildTestTable(tests));
  renderLog($("log"), log);
  try {
    renderClassTree($("tree"), buildClassTree(parseTurtle(turtle).triples));
  } catch (error) {
    // parse trouble is shown as a diagnostic, never a blank panel
    clear($("tree")).append(el("p", { class: "banner error" },
      [`could not parse the exported model: ${error}`]));
  }
}

async function refreshAll() {
  try {
    await Promise.all([refreshProject(), refreshQueue(), refreshDashboards()]);
  } catch (error) {
    showError(error);
  }
}

async function submitDrafts() {
  if (!drafts.size) {
    showInfo("nothing drafted yet");
    return;
  }
  try {
    const result = await client.submitDecisions(draftsToDecisions(drafts));
    drafts = new Map();
    showInfo(`applied ${result.applied} decision(s)`);
    await refreshAll();
  } catch (error) {
    // drafts stay intact locally when the server rejects or is unreachable
    showError(error);
  }
}

async function runStage(stage: string) {
  try {
    const result = await client.runStage(stage);
    showInfo(`${stage}: ${result.proposals.length} proposal(s) awaiting review`);
    await refreshAll();
  } catch (error) {
    showError(error);
  }
}

async function revertStage(stage: string) {
  try {
    await client.revertStage(stage);
    showInfo(`reverted to ${stage}`);
    await refreshAll();
  } catch (error) {
    showError(error);
  }
}

async function mergeModelet(id: string) {
  try {
    const result = await client.mergeModelet(id);
    showInfo(`${result.modelet} merged`);
    await refreshAll();
  } catch (error) {
    showError(error);
    await refreshAll(); // gate reports become visible on the modelet row
  }
}

function bindControls() {
  $("submit").addEventListener("click", () => void submitDrafts());
  $("refresh").addEventListener("click", () => void refreshAll());
  ($("status-filter") as HTMLSelectElement).addEventListener("change", (event) => {
    statusFilter = (event.target as HTMLSelectElement).value;
    void refreshQueue();
  });
  ($("kind-filter") as HTMLInputElement).addEventListener("input", (event) => {
    kindFilter = (event.target as HTMLInputElement).value.trim();
    void refreshQueue();
  });
}

bindControls();
void refreshAll();
setInterval(() => void refreshAll(), POLL_MS);
