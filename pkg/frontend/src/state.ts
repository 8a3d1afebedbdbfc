// Console state and its pure transitions. Everything here derives from API
// responses; transitions never mutate, they return a new state value.

import type {
  ActionDraft,
  ContingencyReport,
  CycleEvent,
  HistoryRecord,
  LoadDeltaDraft,
  RankingEntry,
  ViolationRow,
  WhatIfRequest,
  WhatIfResult,
} from "./api.js";

export interface ConsoleState {
  connected: boolean;
  lastSequence: number | null;
  lastEvent: CycleEvent | null;
  disconnectReason: string | null;
  violations: ContingencyReport[];
  ranking: RankingEntry[];
  history: HistoryRecord[];
  selectedContingency: string | null;
  selectedPlan: string | null;
  composedActions: ActionDraft[];
  loadDeltas: LoadDeltaDraft[];
  whatIfInFlight: boolean;
  lastWhatIf: WhatIfResult | null;
  lastError: string | null;
}

export function initialState(): ConsoleState {
  return {
    connected: false,
    lastSequence: null,
    lastEvent: null,
    disconnectReason: null,
    violations: [],
    ranking: [],
    history: [],
    selectedContingency: null,
    selectedPlan: null,
    composedActions: [],
    loadDeltas: [],
    whatIfInFlight: false,
    lastWhatIf: null,
    lastError: null,
  };
}

export function applyCycleEvent(state: ConsoleState, event: CycleEvent): ConsoleState {
  return {
    ...state,
    connected: true,
    disconnectReason: null,
    lastEvent: event,
    lastSequence: event.sequence,
  };
}

export function applyDashboard(
  state: ConsoleState,
  violations: ContingencyReport[],
  ranking: RankingEntry[],
  history: HistoryRecord[],
): ConsoleState {
  return { ...state, violations, ranking, history };
}

export function markDisconnected(state: ConsoleState, reason: string): ConsoleState {
  // Data stays on screen; the banner carries the last sequence we trusted.
  return { ...state, connected: false, disconnectReason: reason };
}

export function selectContingency(state: ConsoleState, id: string | null): ConsoleState {
  return { ...state, selectedContingency: id };
}

export function selectPlan(state: ConsoleState, id: string | null): ConsoleState {
  return { ...state, selectedPlan: id, composedActions: id === null ? state.composedActions : [] };
}

export function addAction(state: ConsoleState, action: ActionDraft): ConsoleState {
  // Composing actions switches the what-if from a catalog plan to the draft.
  return { ...state, selectedPlan: null, composedActions: [...state.composedActions, action] };
}

export function removeAction(state: ConsoleState, index: number): ConsoleState {
  return {
    ...state,
    composedActions: state.composedActions.filter((_, i) => i !== index),
  };
}

export function clearComposition(state: ConsoleState): ConsoleState {
  return { ...state, composedActions: [], loadDeltas: [], selectedPlan: null };
}

export function addLoadDelta(state: ConsoleState, delta: LoadDeltaDraft): ConsoleState {
  return { ...state, loadDeltas: [...state.loadDeltas, delta] };
}

export function buildWhatIfRequest(state: ConsoleState): WhatIfRequest {
  const request: WhatIfRequest = {};
  if (state.selectedContingency !== null) request.contingency = state.selectedContingency;
  if (state.composedActions.length > 0) {
    request.actions = state.composedActions;
  } else if (state.selectedPlan !== null) {
    request.ras_plan = state.selectedPlan;
  }
  if (state.loadDeltas.length > 0) request.load_delta = state.loadDeltas;
  return request;
}

export function beginWhatIf(state: ConsoleState): ConsoleState {
  if (state.whatIfInFlight) {
    throw new Error("a what-if request is already in flight");
  }
  return { ...state, whatIfInFlight: true, lastError: null };
}

export function finishWhatIf(state: ConsoleState, result: WhatIfResult): ConsoleState {
  return { ...state, whatIfInFlight: false, lastWhatIf: result, lastError: null };
}

export function failWhatIf(state: ConsoleState, message: string): ConsoleState {
  return { ...state, whatIfInFlight: false, lastError: message };
}

// --- presentation helpers ----------------------------------------------------

export function violatingRows(report: ContingencyReport): ViolationRow[] {
  return report.rows.filter((row) => row.class !== "none");
}

export function sortedAscending(rows: ViolationRow[]): ViolationRow[] {
  return [...rows].sort((a, b) =>
    a.voltage_pct === b.voltage_pct
      ? a.bus_id.localeCompare(b.bus_id)
      : a.voltage_pct - b.voltage_pct,
  );
}

export function formatPct(value: number): string {
  const text = value.toFixed(2);
  return text.endsWith(".00") ? text.slice(0, -3) : text.replace(/0$/, "");
}

export function selectedReport(state: ConsoleState): ContingencyReport | null {
  if (state.violations.length === 0) return null;
  if (state.selectedContingency === null) {
    return state.violations[0] ?? null;
  }
  return (
    state.violations.find((c) => c.contingency === state.selectedContingency) ?? null
  );
}

export function sparklinePoints(
  history: HistoryRecord[],
  width: number,
  height: number,
): string {
  if (history.length === 0) return "";
  const max = Math.max(...history.map((h) => h.top_severity_index), 1e-9);
  const step = history.length > 1 ? width / (history.length - 1) : 0;
  return history
    .map((h, i) => {
      const x = (i * step).toFixed(1);
      const y = (height - (h.top_severity_index / max) * height).toFixed(1);
      return `${x},${y}`;
    })
    .join(" ");
}
