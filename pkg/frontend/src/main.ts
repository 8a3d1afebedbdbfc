// Console wiring: one state value, re-rendered on every transition.

import { ApiClient, subscribeCycles } from "./api.js";
import type { ActionDraft, ModelInfo } from "./api.js";
import {
  addAction,
  addLoadDelta,
  applyCycleEvent,
  applyDashboard,
  beginWhatIf,
  buildWhatIfRequest,
  clearComposition,
  failWhatIf,
  finishWhatIf,
  initialState,
  markDisconnected,
  selectContingency,
  selectPlan,
} from "./state.js";
import type { ConsoleState } from "./state.js";
import {
  renderBanner,
  renderRanking,
  renderSparkline,
  renderStatus,
  renderViolations,
  renderWhatIf,
} from "./views.js";

const api = new ApiClient("");
let state: ConsoleState = initialState();
let model: ModelInfo | null = null;

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node;
}

function render(): void {
  renderBanner(byId("banner"), state);
  renderStatus(byId("status"), state);
  renderRanking(byId("ranking"), state, (contingency) => {
    state = selectContingency(state, contingency);
    syncSelectors();
    render();
  });
  renderViolations(byId("violations"), state);
  renderSparkline(byId("history"), state);
  renderWhatIf(byId("whatif-result"), state);
  (byId("whatif-submit") as HTMLButtonElement).disabled = state.whatIfInFlight;
  byId("composition").textContent = state.composedActions.length
    ? JSON.stringify(state.composedActions)
    : "(using catalog plan)";
}

async function refreshDashboard(): Promise<void> {
  const [violations, ranking, history] = await Promise.all([
    api.violations(),
    api.ranking(),
    api.history(0, Date.now() + 86_400_000),
  ]);
  state = applyDashboard(state, violations.contingencies, ranking, history.slice(-120));
  render();
}

function syncSelectors(): void {
  const picker = byId("contingency-select") as HTMLSelectElement;
  picker.value = state.selectedContingency ?? "";
}

function populateSelectors(info: ModelInfo): void {
  const contingency = byId("contingency-select") as HTMLSelectElement;
  contingency.replaceChildren(new Option("(none)", ""));
  for (const c of info.contingencies) {
    contingency.appendChild(new Option(`${c.id} [${c.kind}]`, c.id));
  }
  const plan = byId("plan-select") as HTMLSelectElement;
  plan.replaceChildren(new Option("(none)", ""));
  for (const p of info.plans) {
    plan.appendChild(new Option(`${p.id} (for ${p.intended_contingency})`, p.id));
  }
  const breaker = byId("action-breaker") as HTMLSelectElement;
  breaker.replaceChildren();
  for (const b of info.breakers) breaker.appendChild(new Option(b, b));
  const bus = byId("delta-bus") as HTMLSelectElement;
  bus.replaceChildren();
  for (const b of info.buses) bus.appendChild(new Option(b, b));
}

function wireForms(): void {
  (byId("contingency-select") as HTMLSelectElement).addEventListener("change", (ev) => {
    const value = (ev.target as HTMLSelectElement).value;
    state = selectContingency(state, value === "" ? null : value);
    render();
  });
  (byId("plan-select") as HTMLSelectElement).addEventListener("change", (ev) => {
    const value = (ev.target as HTMLSelectElement).value;
    state = selectPlan(state, value === "" ? null : value);
    render();
  });
  byId("action-add").addEventListener("click", () => {
    const kind = (byId("action-kind") as HTMLSelectElement).value;
    const breaker = (byId("action-breaker") as HTMLSelectElement).value;
    const draft: ActionDraft = { kind };
    if (kind === "open-breaker" || kind === "close-breaker") {
      draft.breaker = breaker;
    } else if (kind === "fast-bus-transfer" || kind === "temporary-feed") {
      draft.open = (byId("action-open") as HTMLInputElement).value || undefined;
      draft.close = breaker;
    } else if (kind === "shed-load-group") {
      draft.group = (byId("action-group") as HTMLInputElement).value;
    }
    state = addAction(state, draft);
    render();
  });
  byId("action-clear").addEventListener("click", () => {
    state = clearComposition(state);
    render();
  });
  byId("delta-add").addEventListener("click", () => {
    const bus = (byId("delta-bus") as HTMLSelectElement).value;
    const p = Number((byId("delta-p") as HTMLInputElement).value || "0");
    const q = Number((byId("delta-q") as HTMLInputElement).value || "0");
    state = addLoadDelta(state, { bus, delta_p_mw: p, delta_q_mvar: q });
    render();
  });
  byId("whatif-submit").addEventListener("click", () => {
    void submitWhatIf();
  });
}

async function submitWhatIf(): Promise<void> {
  try {
    state = beginWhatIf(state);
  } catch (err) {
    return; // one in-flight request at a time
  }
  render();
  try {
    const result = await api.whatif(buildWhatIfRequest(state));
    state = finishWhatIf(state, result);
  } catch (err) {
    state = failWhatIf(state, err instanceof Error ? err.message : String(err));
  }
  render();
}

async function bootstrap(): Promise<void> {
  model = await api.model();
  populateSelectors(model);
  wireForms();
  try {
    await refreshDashboard();
  } catch {
    // No completed cycle yet; the stream will trigger the first refresh.
  }
  subscribeCycles(
    "",
    (event) => {
      state = applyCycleEvent(state, event);
      render();
      void refreshDashboard().catch(() => undefined);
    },
    (reason) => {
      state = markDisconnected(state, reason);
      render();
    },
  );
  render();
}

void bootstrap();
