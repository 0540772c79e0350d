// Thin DOM layer: renders the pure view-models from model.ts.

import type { ClassNode, MetricRow, QueueRow, StageRow, TestTable } from "./model.js";
import type { DraftMap } from "./model.js";
import type { LogEntry } from "./api.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child instanceof Node ? child : document.createTextNode(child));
  }
  return node;
}

export function clear(node: HTMLElement): HTMLElement {
  while (node.firstChild) node.removeChild(node.firstChild);
  return node;
}

export function renderBanner(target: HTMLElement, message: string, tone: "error" | "info") {
  clear(target);
  if (message) target.append(el("div", { class: `banner ${tone}` }, [message]));
}

export function renderStagePanel(
  target: HTMLElement,
  rows: StageRow[],
  onRun: (stage: string) => void,
  onRevert: (stage: string) => void,
) {
  clear(target);
  const list = el("ul", { class: "stages" });
  for (const row of rows) {
    const item = el("li", { class: `stage ${row.status.toLowerCase()}` }, [
      el("span", { class: "stage-name" }, [row.stage]),
      el("span", { class: "stage-status" }, [row.status]),
    ]);
    if (row.isNext) {
      const button = el("button", {}, ["run"]);
      button.addEventListener("click", () => onRun(row.stage));
      item.append(button);
    }
    if (row.status === "Passed") {
      const button = el("button", { class: "secondary" }, ["revert"]);
      button.addEventListener("click", () => onRevert(row.stage));
      item.append(button);
    }
    list.append(item);
  }
  target.append(list);
}

export function renderQueue(
  target: HTMLElement,
  rows: QueueRow[],
  drafts: DraftMap,
  onDraft: (id: string, verdict: "accept" | "reject" | "edit") => void,
) {
  clear(target);
  if (!rows.length) {
    target.append(el("p", { class: "empty" }, ["No proposals match the current filter."]));
    return;
  }
  const table = el("table", { class: "queue" });
  table.append(el("thead", {}, [el("tr", {}, [
    el("th", {}, ["kind"]), el("th", {}, ["name"]), el("th", {}, ["summary"]),
    el("th", {}, ["status"]), el("th", {}, ["decision"]),
  ])]));
  const body = el("tbody");
  for (const row of rows) {
    const draft = drafts.get(row.id);
    const cell = el("td", { class: "decision" });
    if (row.status === "Pending") {
      for (const verdict of ["accept", "reject", "edit"] as const) {
        const button = el("button", {
          class: draft?.verdict === verdict ? "selected" : "",
        }, [verdict]);
        button.addEventListener("click", () => onDraft(row.id, verdict));
        cell.append(button);
      }
    } else {
      cell.append(row.status);
    }
    body.append(el("tr", { "data-id": row.id }, [
      el("td", {}, [row.kind]),
      el("td", { class: "name" }, [row.name]),
      el("td", { class: "summary" }, [row.summary.slice(0, 120)]),
      el("td", {}, [draft ? `${row.status} → ${draft.verdict}` : row.status]),
      cell,
    ]));
  }
  table.append(body);
  target.append(table);
}

export function renderMetricsCard(target: HTMLElement, rows: MetricRow[]) {
  clear(target);
  const dl = el("dl", { class: "metrics" });
  for (const row of rows) {
    dl.append(el("dt", {}, [row.label]));
    dl.append(el("dd", {}, [row.value]));
  }
  target.append(dl);
}

export function renderTestTable(target: HTMLElement, table: TestTable) {
  clear(target);
  target.append(el("p", { class: "headline" }, [
    `${table.headline}; model errors: ${table.modelErrors}, data errors: ${table.dataErrors}`,
  ]));
  const node = el("table", { class: "tests" });
  node.append(el("thead", {}, [el("tr", {}, [
    el("th", {}, ["case"]), el("th", {}, ["CQ"]), el("th", {}, ["status"]),
    el("th", {}, ["expected"]), el("th", {}, ["actual"]),
  ])]));
  const body = el("tbody");
  for (const row of table.rows) {
    body.append(el("tr", { class: row.status }, [
      el("td", {}, [row.id]), el("td", {}, [row.cqId]), el("td", {}, [row.status]),
      el("td", {}, [row.expected]), el("td", {}, [row.actual]),
    ]));
  }
  node.append(body);
  target.append(node);
}

export function renderClassTree(target: HTMLElement, roots: ClassNode[]) {
  clear(target);
  if (!roots.length) {
    target.append(el("p", { class: "empty" }, ["The model has no classes yet."]));
    return;
  }
  const render = (nodes: ClassNode[]): HTMLElement =>
    el("ul", { class: "tree" }, nodes.map((node) =>
      el("li", {}, [
        el("span", { title: node.iri }, [node.label]),
        ...(node.children.length ? [render(node.children)] : []),
      ])));
  target.append(render(roots));
}

export function renderLog(target: HTMLElement, entries: LogEntry[]) {
  clear(target);
  const list = el("ol", { class: "log" });
  for (const entry of [...entries].reverse()) {
    list.append(el("li", {}, [
      el("code", {}, [`#${entry.seq}`]),
      ` ${entry.actor} ${entry.action} ${entry.subject}`,
    ]));
  }
  target.append(list);
}

export function renderStamp(target: HTMLElement, when: Date) {
  clear(target);
  target.append(`data as of ${when.toLocaleTimeString()}`);
}
