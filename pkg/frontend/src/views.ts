// DOM rendering. Tables mirror the report layout: Bus ID / Nominal kV /
// Voltage (% of nominal), rows ascending by voltage.

import type { ContingencyReport, ViolationRow, WhatIfResult } from "./api.js";
import type { ConsoleState } from "./state.js";
import { formatPct, selectedReport, sparklinePoints, violatingRows } from "./state.js";

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

function violationTable(rows: ViolationRow[], emptyLabel: string): HTMLElement {
  if (rows.length === 0) {
    return el("p", "empty", emptyLabel);
  }
  const table = el("table", "violations");
  const head = el("tr");
  for (const label of ["Bus ID", "Nominal kV", "Voltage (% of nominal)", "Class"]) {
    head.appendChild(el("th", undefined, label));
  }
  table.appendChild(head);
  for (const row of rows) {
    const tr = el("tr", `class-${row.class}`);
    tr.appendChild(el("td", undefined, row.bus_id));
    tr.appendChild(el("td", undefined, String(row.nominal_kv)));
    tr.appendChild(el("td", undefined, formatPct(row.voltage_pct)));
    tr.appendChild(el("td", undefined, row.class));
    table.appendChild(tr);
  }
  return table;
}

export function renderBanner(root: HTMLElement, state: ConsoleState): void {
  root.replaceChildren();
  if (state.connected) return;
  const last = state.lastSequence === null ? "none" : `#${state.lastSequence}`;
  const reason = state.disconnectReason ?? "not connected";
  root.appendChild(
    el(
      "div",
      "stale-banner",
      `Stale data: stream lost (${reason}); showing last cycle ${last}`,
    ),
  );
}

export function renderStatus(root: HTMLElement, state: ConsoleState): void {
  root.replaceChildren();
  if (state.lastEvent === null) {
    root.appendChild(el("span", "muted", "waiting for first cycle"));
    return;
  }
  const e = state.lastEvent;
  root.appendChild(
    el(
      "span",
      undefined,
      `cycle #${e.sequence}: ${e.base_violations} base violations, ` +
        `top ${e.top_contingency ?? "none"} (SI ${e.top_severity_index.toFixed(3)}), ` +
        `${e.duration_ms.toFixed(0)} ms`,
    ),
  );
}

export function renderRanking(
  root: HTMLElement,
  state: ConsoleState,
  onSelect: (contingency: string) => void,
): void {
  root.replaceChildren();
  if (state.ranking.length === 0) {
    root.appendChild(el("p", "empty", "no ranking yet"));
    return;
  }
  const list = el("ol", "ranking");
  for (const entry of state.ranking) {
    const item = el("li");
    const button = el("button", "link", `${entry.contingency}`);
    button.addEventListener("click", () => onSelect(entry.contingency));
    item.appendChild(button);
    item.appendChild(
      el(
        "span",
        "muted",
        `  SI ${entry.severity_index.toFixed(3)}, ${entry.violations} violations, ${entry.status}`,
      ),
    );
    if (entry.contingency === state.selectedContingency) {
      item.className = "selected";
    }
    list.appendChild(item);
  }
  root.appendChild(list);
}

export function renderViolations(root: HTMLElement, state: ConsoleState): void {
  root.replaceChildren();
  const report: ContingencyReport | null = selectedReport(state);
  if (report === null) {
    root.appendChild(el("p", "empty", "no cycle results yet"));
    return;
  }
  root.appendChild(
    el("h3", undefined, `${report.contingency} (${report.status}, SI ${report.severity_index.toFixed(3)})`),
  );
  root.appendChild(
    violationTable(violatingRows(report), "no violations for this contingency"),
  );
}

export function renderSparkline(root: HTMLElement, state: ConsoleState): void {
  root.replaceChildren();
  const width = 260;
  const height = 48;
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  const line = document.createElementNS("http://www.w3.org/2000/svg", "polyline");
  line.setAttribute("fill", "none");
  line.setAttribute("stroke", "currentColor");
  line.setAttribute("stroke-width", "1.5");
  line.setAttribute("points", sparklinePoints(state.history, width, height));
  svg.appendChild(line);
  root.appendChild(el("h3", undefined, `top severity, last ${state.history.length} cycles`));
  root.appendChild(svg);
}

export function renderWhatIf(root: HTMLElement, state: ConsoleState): void {
  root.replaceChildren();
  if (state.lastError !== null) {
    root.appendChild(el("div", "error", state.lastError));
  }
  if (state.whatIfInFlight) {
    root.appendChild(el("p", "muted", "evaluating..."));
    return;
  }
  const result: WhatIfResult | null = state.lastWhatIf;
  if (result === null) return;
  const verdict = result.cleared ? "cleared" : "not cleared";
  const head = el("div", `verdict ${result.cleared ? "ok" : "bad"}`);
  head.appendChild(el("strong", undefined, verdict));
  head.appendChild(
    el(
      "span",
      "muted",
      `  post SI ${result.post_severity_index.toFixed(3)}, ` +
        `max drop vs steady state ${result.max_drop_vs_steady_state_pct.toFixed(2)}%`,
    ),
  );
  root.appendChild(head);

  const before = el("div", "whatif-col");
  before.appendChild(el("h4", undefined, "violations before plan"));
  before.appendChild(
    violationTable(
      result.violations_before.filter((r) => r.class !== "none"),
      "none",
    ),
  );
  const after = el("div", "whatif-col");
  after.appendChild(el("h4", undefined, "violations after plan"));
  after.appendChild(
    violationTable(
      result.violations_after.filter((r) => r.class !== "none"),
      "none",
    ),
  );
  const cols = el("div", "whatif-grid");
  cols.appendChild(before);
  cols.appendChild(after);
  root.appendChild(cols);
}
