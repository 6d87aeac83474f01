/** Read-only view of the consistency findings for one plan. */

import type { Client } from "./api.js";

export class DiagnosticsView {
  private planSelect!: HTMLSelectElement;
  private summary!: HTMLElement;
  private body!: HTMLTableSectionElement;

  constructor(private readonly root: HTMLElement, private readonly client: Client) {
    this.root.innerHTML = `
      <div class="toolbar">
        <label>Plan <select id="diag-plan"></select></label>
        <span id="diag-summary" class="badge"></span>
      </div>
      <table id="diag-table">
        <thead><tr><th>Rule</th><th>Severity</th><th>Element</th><th>Message</th></tr></thead>
        <tbody></tbody>
      </table>
    `;
    this.planSelect = this.root.querySelector("#diag-plan")!;
    this.summary = this.root.querySelector("#diag-summary")!;
    this.body = this.root.querySelector("#diag-table tbody")!;
    this.planSelect.addEventListener("change", () => void this.refresh());
  }

  async load(): Promise<void> {
    const plans = await this.client.getPlans();
    this.planSelect.replaceChildren(
      ...plans.map((p) => new Option(p.plan_id, p.plan_id)),
    );
    await this.refresh();
  }

  async refresh(): Promise<void> {
    const plan = this.planSelect.value;
    if (!plan) return;
    const report = await this.client.getDiagnostics(plan);
    this.summary.textContent = `${report.errors} errors, ${report.warnings} warnings`;
    this.body.replaceChildren(
      ...report.diagnostics.map((diagnostic) => {
        const tr = document.createElement("tr");
        for (const value of [
          diagnostic.rule_id,
          diagnostic.severity,
          diagnostic.element,
          diagnostic.message,
        ]) {
          const td = document.createElement("td");
          td.textContent = value;
          tr.append(td);
        }
        return tr;
      }),
    );
  }
}
