/** Recorded-service fixture client.
 *
 * Fixtures under tests/fixtures/ hold verbatim {status, body} pairs
 * captured from the advisor service. The fake fetch replays them so the
 * real ApiClient code paths (including error mapping) run offline, and
 * every request is recorded for the "no request was sent" assertions.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { ApiClient } from "../src/api.js";

const FIXTURE_DIR = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export interface Recorded {
  status: number;
  body: unknown;
}

export function fixture(name: string): Recorded {
  return JSON.parse(readFileSync(join(FIXTURE_DIR, `${name}.json`), "utf-8"));
}

export class FixtureServer {
  /** route key = "METHOD /path" (query string stripped) */
  private routes = new Map<string, Recorded[]>();
  calls: { method: string; path: string; body?: unknown }[] = [];

  on(method: string, path: string, ...fixtureNames: string[]): this {
    const queue = this.routes.get(`${method} ${path}`) ?? [];
    queue.push(...fixtureNames.map(fixture));
    this.routes.set(`${method} ${path}`, queue);
    return this;
  }

  client(): ApiClient {
    const fakeFetch = async (url: string, init?: RequestInit): Promise<Response> => {
      const method = init?.method ?? "GET";
      const path = url.split("?")[0]!;
      this.calls.push({
        method,
        path,
        body: init?.body ? JSON.parse(init.body as string) : undefined,
      });
      const queue = this.routes.get(`${method} ${path}`);
      const recorded = queue && queue.length > 1 ? queue.shift()! : queue?.[0];
      if (!recorded) {
        return new Response(
          JSON.stringify({ code: "not_found", message: `no fixture for ${method} ${path}` }),
          { status: 404, headers: { "Content-Type": "application/json" } },
        );
      }
      return new Response(JSON.stringify(recorded.body), {
        status: recorded.status,
        headers: { "Content-Type": "application/json" },
      });
    };
    return new ApiClient("", fakeFetch);
  }
}

/** An always-unreachable transport, for offline-state tests. */
export function offlineClient(): { client: ApiClient; calls: number[] } {
  const calls: number[] = [];
  const failingFetch = async (): Promise<Response> => {
    calls.push(1);
    throw new TypeError("fetch failed");
  };
  return { client: new ApiClient("", failingFetch), calls };
}
