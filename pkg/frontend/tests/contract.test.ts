// Contract tests against a live backend: the demo project is materialized and
// served by the real CLI, and the client/view-model pair is exercised over it.

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, OntoforgeClient } from "../src/api.js";
import {
  buildGateFailureView, buildMetricsCard, buildReviewQueue, buildStagePanel,
  describeApiError, draftsToDecisions, setDraft,
} from "../src/model.js";
import { parseTurtle } from "../src/turtle.js";
import { buildClassTree } from "../src/model.js";

const PYTHON = process.env.ONTOFORGE_PYTHON ?? "python3";

interface Backend {
  client: OntoforgeClient;
  process: ChildProcess;
  dir: string;
}

function run(args: string[], cwd?: string): Promise<void> {
  return new Promise((resolve, reject) => {
    const child = spawn(PYTHON, ["-m", "ontoforge.cli", ...args], { cwd });
    let err = "";
    child.stderr.on("data", (chunk) => (err += chunk));
    child.on("exit", (code) =>
      code === 0 ? resolve() : reject(new Error(`${args.join(" ")} -> ${code}: ${err}`)));
  });
}

async function startServer(projectDir: string, mock = true): Promise<Backend> {
  const args = ["--project", join(projectDir, "project.json")];
  if (mock) args.push("--mock", join(projectDir, "mock"));
  args.push("serve", "--port", "0");
  const child = spawn(PYTHON, ["-m", "ontoforge.cli", ...args]);
  const base = await new Promise<string>((resolve, reject) => {
    let err = "";
    const timer = setTimeout(() => reject(new Error(`server did not start: ${err}`)), 30000);
    child.stderr.on("data", (chunk) => {
      err += chunk.toString();
      const match = /listening on (http:\/\/[^\s]+)/.exec(err);
      if (match) {
        clearTimeout(timer);
        resolve(match[1]);
      }
    });
    child.on("exit", (code) => reject(new Error(`server exited early (${code}): ${err}`)));
  });
  return { client: new OntoforgeClient(base), process: child, dir: projectDir };
}

let henri: Backend;
let table4: Backend;

beforeAll(async () => {
  const henriDir = mkdtempSync(join(tmpdir(), "ontoforge-henri-"));
  const table4Dir = mkdtempSync(join(tmpdir(), "ontoforge-table4-"));
  await run(["demo", "init", henriDir, "--dataset", "henri", "--variant", "gatefail"]);
  await run(["demo", "init", table4Dir, "--dataset", "table4"]);
  henri = await startServer(henriDir);
  table4 = await startServer(table4Dir, false);
});

afterAll(() => {
  for (const backend of [henri, table4]) {
    if (backend?.process) backend.process.kill();
    if (backend?.dir) rmSync(backend.dir, { recursive: true, force: true });
  }
});

describe("review queue against the live API", () => {
  it("shows pending proposals after a stage run and round-trips a batch accept", async () => {
    const run = await henri.client.runStage("ModelRefinement", { k: 3 });
    expect(run.status).toBe("AwaitingReview");

    const pending = await henri.client.proposals("Pending");
    const rows = buildReviewQueue(pending);
    expect(rows.length).toBeGreaterThan(0);
    expect(rows.map((r) => r.name)).toContain("hasSafetyFeature");

    let drafts = new Map();
    for (const row of rows) drafts = setDraft(drafts, row.id, "accept");
    const result = await henri.client.submitDecisions(draftsToDecisions(drafts));
    expect(result.applied).toBe(rows.length);

    // server truth: refetched state shows every drafted id as Accepted
    const accepted = await henri.client.proposals("Accepted");
    const acceptedIds = new Set(accepted.map((p) => p.id));
    for (const row of rows) expect(acceptedIds.has(row.id)).toBe(true);
    const stillPending = await henri.client.proposals("Pending");
    expect(stillPending).toHaveLength(0);
  });

  it("keeps drafts local when the server rejects a decision", async () => {
    const accepted = await henri.client.proposals("Accepted");
    let drafts = new Map();
    drafts = setDraft(drafts, accepted[0].id, "reject");
    await expect(henri.client.submitDecisions(draftsToDecisions(drafts)))
      .rejects.toMatchObject({ status: 409, kind: "AlreadyDecided" });
    expect(drafts.size).toBe(1); // drafts untouched for the operator to revise
  });
});

describe("stage panel against the live API", () => {
  it("surfaces the seeded merge-gate failure with the failing CQ id", async () => {
    let failure: ApiError | undefined;
    try {
      await henri.client.mergeModelet("modelet-1");
    } catch (error) {
      failure = error as ApiError;
    }
    expect(failure?.status).toBe(409);
    expect(failure?.kind).toBe("GateFailed");
    const view = buildGateFailureView(failure!.detail as never);
    expect(view.failingCqIds).toEqual(["CQ01"]);
    expect(describeApiError(failure!)).toContain("CQ01");

    // the report is also visible on the modelet row after a refresh
    const summary = await henri.client.project();
    const modelet = summary.modelets.find((m) => m.id === "modelet-1");
    expect(modelet?.status).toBe("UnderTest");
    expect(modelet?.gate_report?.failed_cases.length).toBeGreaterThan(0);
  });

  it("orders stages and marks the frontier", async () => {
    const summary = await henri.client.project();
    const rows = buildStagePanel(summary);
    expect(rows.map((r) => r.stage)).toEqual(summary.stage_order);
    expect(rows.filter((r) => r.isNext)).toHaveLength(1);
  });

  it("shows reverted downstream stages as NotStarted", async () => {
    const before = await henri.client.project();
    expect(before.stage_status.TestCaseGeneration).toBe("Passed");
    const result = await henri.client.revertStage("TestCaseGeneration");
    expect(result.stage_status.TestCaseGeneration).toBe("NotStarted");
    expect(result.stage_status.ModelRefinement).toBe("NotStarted");
    expect(result.stage_status.ModeletDevelopment).toBe("Passed");
  });
});

describe("dashboards against the live API", () => {
  it("metrics card shows the published relationship richness on table4-synth", async () => {
    const payload = await table4.client.metrics();
    const rows = buildMetricsCard(payload);
    const rr = rows.find((r) => r.label === "Relationship richness (RR)");
    expect(rr?.value).toBe("0.738095");
    const ar = rows.find((r) => r.label === "Attribute richness (AR)");
    expect(ar?.value).toBe("0.380952");
  });

  it("class tree builds from the exported Turtle", async () => {
    const turtle = await table4.client.ontologyTurtle();
    const tree = buildClassTree(parseTurtle(turtle).triples);
    const labels = new Set(tree.map((n) => n.label));
    expect(labels.has("C01")).toBe(true); // chain root
    const c01 = tree.find((n) => n.label === "C01")!;
    expect(c01.children[0]?.label).toBe("C02");
  });

  it("test report renders per-case rows", async () => {
    const payload = await henri.client.testsReport();
    expect(payload.query.total).toBe(10);
  });
});
