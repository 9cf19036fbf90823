/** DOM rendering and event wiring. All displayed values come straight
 * from the view, which in turn mirrors service responses. */

import { chartSvg } from "./chart.js";
import { CampaignController } from "./controller.js";
import { CampaignView, campaignComplete, exportLog, mutationsDisabled } from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function escapeHtml(text: string): string {
  return text.replace(/[&<>"]/g, (c) =>
    c === "&" ? "&amp;" : c === "<" ? "&lt;" : c === ">" ? "&gt;" : "&quot;",
  );
}

export function render(view: CampaignView): void {
  el("setup-panel").hidden = view.id !== null;
  el("campaign-panel").hidden = view.id === null;

  const banner = el("error-banner");
  if (view.offline) {
    banner.hidden = false;
    banner.textContent = "service unreachable — submissions disabled until it returns";
  } else if (view.error) {
    banner.hidden = false;
    banner.textContent = `${view.error.code}: ${view.error.message}`;
  } else {
    banner.hidden = true;
  }

  if (!view.id || !view.status) return;
  const s = view.status;
  el("campaign-name").textContent = s.id;
  el("progress").textContent = `${s.n_observed} / ${s.n_candidates} observed`;
  el("best").textContent = s.best_observed !== undefined ? s.best_observed.toFixed(3) : "—";
  el("regret").textContent = s.regret
    ? `avg ${s.regret.average.toFixed(3)}, simple ${s.regret.simple.toFixed(3)}`
    : "unknown (no ground truth uploaded)";

  const done = campaignComplete(view);
  el("complete-note").hidden = !done;
  (el("suggest-btn") as HTMLButtonElement).disabled = mutationsDisabled(view) || done;

  renderSuggestion(view);
  renderHistory(view);
  renderWhatIf(view);
  el("chart").innerHTML = chartSvg(view.posterior, s.best_observed ?? null);
}

function renderSuggestion(view: CampaignView): void {
  const host = el("suggestion");
  if (!view.suggestion || view.suggestion.status === "complete") {
    host.innerHTML = view.suggestion?.status === "complete"
      ? "<p>campaign complete — nothing left to suggest</p>"
      : "<p>no suggestion requested yet</p>";
    return;
  }
  const rows = view.suggestion.arm_ids
    .map((arm) => {
      const err = view.inputErrors[arm];
      return `<tr>
        <td><code>${escapeHtml(arm)}</code></td>
        <td><input type="text" class="assay-input" data-arm="${escapeHtml(arm)}"
             placeholder="measured value" ${mutationsDisabled(view) ? "disabled" : ""}></td>
        <td><button class="observe-btn" data-arm="${escapeHtml(arm)}"
             ${mutationsDisabled(view) ? "disabled" : ""}>submit</button>
             <button class="whatif-btn" data-arm="${escapeHtml(arm)}"
             ${mutationsDisabled(view) ? "disabled" : ""}>what-if</button></td>
        <td class="input-error">${err ? escapeHtml(err) : ""}</td>
      </tr>`;
    })
    .join("");
  const diag = view.suggestion.candidates
    .map((c) => `<li><code>${c.arm_ids.join(", ")}</code> → ${c.value.toFixed(4)}</li>`)
    .join("");
  host.innerHTML = `<table><thead><tr><th>suggested arm</th><th>assay result</th>
    <th></th><th></th></tr></thead><tbody>${rows}</tbody></table>
    <details><summary>candidate values</summary><ul>${diag}</ul></details>`;
}

function renderHistory(view: CampaignView): void {
  el("history-body").innerHTML = view.history
    .map(
      (h, i) =>
        `<tr><td>${i + 1}</td><td><code>${escapeHtml(h.armId)}</code></td><td>${h.y}</td></tr>`,
    )
    .join("");
}

function renderWhatIf(view: CampaignView): void {
  el("whatif-body").innerHTML = view.whatIf
    .map((w) => {
      const next =
        w.suggestion.status === "complete" ? "complete" : w.suggestion.arm_ids.join(", ");
      return `<tr><td><code>${escapeHtml(w.armId)}</code></td><td>${w.y}</td>
        <td>${escapeHtml(next)}</td></tr>`;
    })
    .join("");
}

export function wire(controller: CampaignController): void {
  el("create-btn").addEventListener("click", async () => {
    const name = (el("campaign-name-input") as HTMLInputElement).value.trim();
    const csv = (el("candidates-input") as HTMLTextAreaElement).value;
    const policy = (el("policy-select") as HTMLSelectElement).value;
    const num = (id: string) => Number((el(id) as HTMLInputElement).value);
    const ok = await controller.create(name || "browser-campaign", csv, {
      policy: {
        name: policy,
        batch_size: num("batch-input"),
        thompson_samples: num("samples-input"),
        branches: num("branches-input"),
        horizon: num("tree-horizon-input"),
      },
      goal: (el("goal-select") as HTMLSelectElement).value as "aregret" | "sregret",
    });
    if (ok) await refreshAll(controller);
  });

  el("suggest-btn").addEventListener("click", async () => {
    await controller.requestSuggestion();
  });

  el("export-btn").addEventListener("click", () => {
    const blob = new Blob([exportLog(controller.view)], { type: "application/jsonl" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = `${controller.view.id ?? "campaign"}-observations.jsonl`;
    link.click();
    URL.revokeObjectURL(link.href);
  });

  el("campaign-panel").addEventListener("click", async (event) => {
    const target = event.target as HTMLElement;
    const arm = target.dataset.arm;
    if (!arm) return;
    const input = document.querySelector<HTMLInputElement>(
      `.assay-input[data-arm="${CSS.escape(arm)}"]`,
    );
    if (target.classList.contains("observe-btn")) {
      if (await controller.submitObservation(arm, input?.value ?? "")) {
        await refreshAll(controller);
      }
    } else if (target.classList.contains("whatif-btn")) {
      await controller.submitWhatIf(arm, input?.value ?? "");
    }
  });

  window.addEventListener("online", () => controller.refreshStatus());
}

async function refreshAll(controller: CampaignController): Promise<void> {
  const n = controller.view.status?.n_candidates ?? 0;
  await controller.refreshStatus();
  // chart over every candidate the history has touched plus the frontier
  const ids = new Set<string>(controller.view.history.map((h) => h.armId));
  controller.view.suggestion?.arm_ids.forEach((a) => ids.add(a));
  if (ids.size > 0 && n > 0) {
    await controller.refreshPosterior([...ids].sort());
  }
}
