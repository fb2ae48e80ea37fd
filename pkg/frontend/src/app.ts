/**
 * Browser entry point: wires the voter and official controllers to the DOM.
 *
 * Login is dev-grade token entry matching the service's session model; the
 * base URL is the single configuration setting.
 */

import { ApiClient } from "./api.js";
import { BatchViewModel, OfficialController } from "./officialView.js";
import { SortKey } from "./report.js";
import { VoterController, VoterViewModel } from "./voterView.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function renderVoter(model: VoterViewModel): void {
  byId("voter-index").textContent = String(model.index);
  byId("voter-numeric").textContent = model.numeric20;
  const words = byId("voter-words");
  words.replaceChildren(
    ...model.wordTokens.map((word) => {
      const token = document.createElement("span");
      token.className = "word-token";
      token.textContent = word;
      return token;
    }),
  );
  byId("voter-error").textContent = model.error ?? "";
  const secretBox = byId("voter-secret");
  secretBox.textContent = model.oneTimeSecret
    ? `New secret (shown once, copy it now): ${model.oneTimeSecret}`
    : "";
}

function renderBatch(model: BatchViewModel, controller: OfficialController): void {
  byId("batch-error").textContent = model.error ?? "";
  const summary = byId("batch-summary");
  summary.textContent = model.error
    ? ""
    : Object.entries(model.summary)
        .map(([status, count]) => `${status}: ${count}`)
        .join("  ") + `  total: ${model.total}`;
  const table = byId<HTMLTableElement>("batch-table");
  table.replaceChildren();
  if (model.error) return;
  const head = table.createTHead().insertRow();
  const columns: [string, SortKey][] = [
    ["Envelope", "envelopeId"],
    ["Status", "status"],
    ["Index", "matchedIndex"],
  ];
  for (const [label, key] of columns) {
    const cell = document.createElement("th");
    cell.textContent = label;
    cell.onclick = () => renderBatch(controller.sortBy(model, key), controller);
    head.appendChild(cell);
  }
  const body = table.createTBody();
  for (const row of model.rows) {
    const tr = body.insertRow();
    tr.insertCell().textContent = row.envelopeId;
    const status = tr.insertCell();
    status.textContent = row.status;
    status.className = `badge badge-${row.status.toLowerCase()}`;
    status.title = row.reason;
    tr.insertCell().textContent = row.matchedIndex === null ? "" : String(row.matchedIndex);
  }
  const download = byId<HTMLAnchorElement>("notification-download");
  download.href = URL.createObjectURL(
    new Blob([model.notificationCsv], { type: "text/csv" }),
  );
  download.download = `notifications-${model.batchId}.csv`;
}

export function initApp(): void {
  const api = () =>
    new ApiClient({
      baseUrl: byId<HTMLInputElement>("base-url").value,
      token: byId<HTMLInputElement>("token").value,
    });

  byId("voter-load").onclick = async () => {
    const controller = new VoterController(
      api(),
      byId<HTMLInputElement>("voter-id").value,
      byId<HTMLInputElement>("election-id").value,
      (message) => window.confirm(message),
    );
    let model = await controller.load();
    renderVoter(model);
    byId("voter-advance").onclick = async () => {
      model = await controller.advance(model);
      renderVoter(model);
    };
    byId("voter-rotate").onclick = async () => {
      model = await controller.rotate();
      renderVoter(model);
    };
  };

  byId("check-run").onclick = async () => {
    const controller = new OfficialController(api());
    const result = await controller.check({
      voter_id: byId<HTMLInputElement>("check-voter").value,
      election_id: byId<HTMLInputElement>("check-election").value,
      code_text: byId<HTMLInputElement>("check-code").value,
    });
    const badge = byId("check-result");
    badge.textContent = result.status;
    badge.className = `badge badge-${result.status.toLowerCase()}`;
    byId("check-reason").textContent =
      result.matchedIndex === null
        ? result.reason
        : `${result.reason} (index ${result.matchedIndex})`;
  };

  byId("batch-run").onclick = async () => {
    const controller = new OfficialController(api());
    const file = byId<HTMLInputElement>("batch-file").files?.[0];
    if (!file) return;
    renderBatch(await controller.uploadBatch(await file.text()), controller);
  };
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", initApp);
}
