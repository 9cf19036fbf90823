/** Coordinates the API client and the view state.
 *
 * DOM-free so the full suggest / observe / what-if flows can run against
 * a recorded-fixture client in node. Guarantees: invalid input never
 * reaches the client, at most one mutation is in flight, and service
 * errors surface verbatim with their code.
 */

import { ApiClient, ApiError, OfflineError, CampaignConfigBody } from "./api.js";
import {
  CampaignView,
  applyObservation,
  applyOffline,
  applyPosterior,
  applyServiceError,
  applyStatus,
  applySuggestion,
  applyWhatIf,
  clearInputError,
  initialView,
  mutationsDisabled,
  setInputError,
  validateAssay,
} from "./state.js";

export class CampaignController {
  view: CampaignView = initialView();

  constructor(
    private readonly client: ApiClient,
    private readonly onChange: (view: CampaignView) => void = () => {},
  ) {}

  private commit(view: CampaignView): void {
    this.view = view;
    this.onChange(view);
  }

  private fail(err: unknown): void {
    if (err instanceof OfflineError) {
      this.commit(applyOffline(this.view));
    } else if (err instanceof ApiError) {
      this.commit(applyServiceError(this.view, err.code, err.message));
    } else {
      throw err;
    }
  }

  private async mutate<T>(op: () => Promise<T>, apply: (result: T) => CampaignView): Promise<boolean> {
    if (this.view.pending) return false; // one in-flight mutation at a time
    this.commit({ ...this.view, pending: true });
    try {
      const result = await op();
      this.commit({ ...apply(result), pending: false });
      return true;
    } catch (err) {
      this.commit({ ...this.view, pending: false });
      this.fail(err);
      return false;
    }
  }

  async create(name: string, candidatesCsv: string, config: CampaignConfigBody): Promise<boolean> {
    return this.mutate(
      () => this.client.createCampaign(name, candidatesCsv, config),
      (status) => applyStatus(this.view, status),
    );
  }

  async refreshStatus(): Promise<void> {
    if (!this.view.id) return;
    try {
      this.commit(applyStatus(this.view, await this.client.getStatus(this.view.id)));
    } catch (err) {
      this.fail(err);
    }
  }

  async requestSuggestion(): Promise<boolean> {
    if (!this.view.id || mutationsDisabled(this.view)) return false;
    return this.mutate(
      () => this.client.suggest(this.view.id!),
      (suggestion) => applySuggestion(this.view, suggestion),
    );
  }

  /** Validates locally first: a non-numeric entry sets an inline error
   * and sends nothing. */
  async submitObservation(armId: string, rawValue: string): Promise<boolean> {
    const checked = validateAssay(rawValue);
    if (!checked.ok) {
      this.commit(setInputError(this.view, armId, checked.error));
      return false;
    }
    if (!this.view.id || mutationsDisabled(this.view)) return false;
    this.commit(clearInputError(this.view, armId));
    const y = checked.value;
    return this.mutate(
      () => this.client.observe(this.view.id!, armId, y),
      (status) => applyObservation(this.view, armId, y, status),
    );
  }

  async refreshPosterior(armIds: string[]): Promise<void> {
    if (!this.view.id || armIds.length === 0) return;
    try {
      const result = await this.client.posterior(this.view.id, armIds);
      this.commit(applyPosterior(this.view, result.arms));
    } catch (err) {
      this.fail(err);
    }
  }

  /** What-if never touches the committed campaign: the result goes to
   * the scratchpad only. */
  async submitWhatIf(armId: string, rawValue: string): Promise<boolean> {
    const checked = validateAssay(rawValue);
    if (!checked.ok) {
      this.commit(setInputError(this.view, `whatif:${armId}`, checked.error));
      return false;
    }
    if (!this.view.id || mutationsDisabled(this.view)) return false;
    this.commit(clearInputError(this.view, `whatif:${armId}`));
    const y = checked.value;
    return this.mutate(
      () => this.client.whatIf(this.view.id!, armId, y),
      (suggestion) => applyWhatIf(this.view, armId, y, suggestion),
    );
  }
}
