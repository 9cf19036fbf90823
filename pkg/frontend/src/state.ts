/** Pure view state and transitions.
 *
 * Everything here is a plain function over immutable-ish data so the
 * acceptance flows run in node against recorded fixtures. The view is
 * derived solely from service responses plus the user's own submissions;
 * no numbers are computed client-side beyond copying fields.
 */

import type { CampaignStatus, PosteriorPoint, Suggestion } from "./api.js";

export interface HistoryEntry {
  armId: string;
  y: number;
}

export interface WhatIfEntry {
  armId: string;
  y: number;
  suggestion: Suggestion;
}

export interface CampaignView {
  id: string | null;
  status: CampaignStatus | null;
  suggestion: Suggestion | null;
  history: HistoryEntry[];
  posterior: PosteriorPoint[];
  whatIf: WhatIfEntry[];
  pending: boolean;
  offline: boolean;
  error: { code: string; message: string } | null;
  inputErrors: Record<string, string>;
}

export function initialView(): CampaignView {
  return {
    id: null,
    status: null,
    suggestion: null,
    history: [],
    posterior: [],
    whatIf: [],
    pending: false,
    offline: false,
    error: null,
    inputErrors: {},
  };
}

/** Assay entries must be finite reals; anything else is rejected before
 * any request is sent. */
export function validateAssay(raw: string): { ok: true; value: number } | { ok: false; error: string } {
  const trimmed = raw.trim();
  if (trimmed === "") return { ok: false, error: "enter the measured value" };
  const value = Number(trimmed);
  if (!Number.isFinite(value)) {
    return { ok: false, error: `not a finite number: "${raw}"` };
  }
  return { ok: true, value };
}

export function applyStatus(view: CampaignView, status: CampaignStatus): CampaignView {
  return { ...view, id: status.id, status, offline: false, error: null };
}

export function applySuggestion(view: CampaignView, suggestion: Suggestion): CampaignView {
  return { ...view, suggestion, offline: false, error: null };
}

/** A confirmed observation: the service accepted (arm, y); the history
 * table grows and the stale suggestion is dropped. */
export function applyObservation(
  view: CampaignView,
  armId: string,
  y: number,
  status: CampaignStatus,
): CampaignView {
  return {
    ...view,
    status,
    id: status.id,
    history: [...view.history, { armId, y }],
    suggestion: null,
    offline: false,
    error: null,
  };
}

export function applyPosterior(view: CampaignView, points: PosteriorPoint[]): CampaignView {
  return { ...view, posterior: points, offline: false };
}

/** What-if results land in the scratchpad; the history table and the
 * committed suggestion are untouched. */
export function applyWhatIf(
  view: CampaignView,
  armId: string,
  y: number,
  suggestion: Suggestion,
): CampaignView {
  return { ...view, whatIf: [...view.whatIf, { armId, y, suggestion }], offline: false };
}

export function applyServiceError(
  view: CampaignView,
  code: string,
  message: string,
): CampaignView {
  return { ...view, error: { code, message } };
}

export function applyOffline(view: CampaignView): CampaignView {
  return { ...view, offline: true };
}

export function setInputError(view: CampaignView, field: string, message: string): CampaignView {
  return { ...view, inputErrors: { ...view.inputErrors, [field]: message } };
}

export function clearInputError(view: CampaignView, field: string): CampaignView {
  const rest = { ...view.inputErrors };
  delete rest[field];
  return { ...view, inputErrors: rest };
}

export function campaignComplete(view: CampaignView): boolean {
  return view.status?.status === "complete" || view.suggestion?.status === "complete";
}

/** Suggest / observe / what-if are disabled while a mutation is in
 * flight, while offline, or once the campaign is complete. */
export function mutationsDisabled(view: CampaignView): boolean {
  return view.pending || view.offline || campaignComplete(view);
}

/** The observation log as JSON lines, for export. Mirrors the service's
 * own append-only log format. */
export function exportLog(view: CampaignView): string {
  return view.history.map((h) => JSON.stringify({ arm_id: h.armId, y: h.y })).join("\n");
}
