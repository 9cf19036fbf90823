/** Typed client for the advisor service JSON API.
 *
 * Every campaign number the UI shows comes out of these response types;
 * the client performs no inference of its own. `fetchFn` is injectable so
 * tests can replay recorded fixtures offline.
 */

export interface CampaignStatus {
  id: string;
  n_candidates: number;
  n_observed: number;
  status: "active" | "complete";
  has_truth: boolean;
  best_observed?: number;
  regret?: { average: number; simple: number };
}

export interface CandidateScore {
  arm_ids: string[];
  value: number;
}

export interface Suggestion {
  status: "active" | "complete";
  arm_ids: string[];
  candidates: CandidateScore[];
  hypothetical?: boolean;
}

export interface PosteriorPoint {
  arm_id: string;
  mean: number;
  std: number;
}

export interface CampaignConfigBody {
  policy: {
    name: string;
    horizon?: number;
    branches?: number;
    thompson_samples?: number;
    batch_size?: number;
  };
  goal?: "aregret" | "sregret";
  seed?: number;
  horizon?: number;
  gp?: { lengthscale?: number; signal_variance?: number; noise_variance?: number };
}

/** Service error surfaced verbatim: the body's code and message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

/** Network-level failure (server unreachable): the UI goes offline. */
export class OfflineError extends Error {
  constructor() {
    super("service unreachable");
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        method,
        headers: body === undefined ? {} : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch {
      throw new OfflineError();
    }
    const payload = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, payload.code ?? "error", payload.message ?? "");
    }
    return payload as T;
  }

  createCampaign(name: string, candidatesCsv: string, config: CampaignConfigBody) {
    return this.request<CampaignStatus>("POST", "/campaigns", {
      name,
      candidates_csv: candidatesCsv,
      config,
    });
  }

  getStatus(id: string) {
    return this.request<CampaignStatus>("GET", `/campaigns/${id}`);
  }

  suggest(id: string) {
    return this.request<Suggestion>("POST", `/campaigns/${id}/suggest`);
  }

  observe(id: string, armId: string, y: number) {
    return this.request<CampaignStatus>("POST", `/campaigns/${id}/observe`, {
      arm_id: armId,
      y,
    });
  }

  posterior(id: string, armIds: string[]) {
    return this.request<{ arms: PosteriorPoint[] }>(
      "GET",
      `/campaigns/${id}/posterior?arms=${armIds.join(",")}`,
    );
  }

  whatIf(id: string, armId: string, y: number) {
    return this.request<Suggestion>("POST", `/campaigns/${id}/whatif`, {
      arm_id: armId,
      y,
    });
  }
}
