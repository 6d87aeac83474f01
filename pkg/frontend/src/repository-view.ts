/** Read-only cross-plan queries over the knowledge repository. */

import type { Client } from "./api.js";
import { ApiError } from "./api.js";

const RELATIONS = [
  "isPeer",
  "Controls",
  "isControlledBy",
  "rolePursueGoal",
  "ParticipatesIn",
  "Involves",
];

export class RepositoryView {
  private conceptInput!: HTMLInputElement;
  private phaseInput!: HTMLInputElement;
  private planInput!: HTMLInputElement;
  private relationSelect!: HTMLSelectElement;
  private status!: HTMLElement;
  private unitBody!: HTMLTableSectionElement;
  private edgeBody!: HTMLTableSectionElement;

  constructor(private readonly root: HTMLElement, private readonly client: Client) {
    this.root.innerHTML = `
      <div class="toolbar">
        <label>Concept <input id="q-concept"></label>
        <label>Phase <input id="q-phase"></label>
        <label>Plan <input id="q-plan"></label>
        <button id="q-units">Query units</button>
        <label>Relation <select id="q-relation"></select></label>
        <button id="q-edges">Query edges</button>
        <span id="q-status" class="badge"></span>
      </div>
      <table id="unit-table">
        <thead><tr><th>Path</th><th>Concept</th><th>Name</th><th>Description</th><th>Source</th></tr></thead>
        <tbody></tbody>
      </table>
      <table id="edge-table">
        <thead><tr><th>From</th><th>To</th><th>Relation</th><th>Provenance</th></tr></thead>
        <tbody></tbody>
      </table>
    `;
    this.conceptInput = this.root.querySelector("#q-concept")!;
    this.phaseInput = this.root.querySelector("#q-phase")!;
    this.planInput = this.root.querySelector("#q-plan")!;
    this.relationSelect = this.root.querySelector("#q-relation")!;
    this.status = this.root.querySelector("#q-status")!;
    this.unitBody = this.root.querySelector("#unit-table tbody")!;
    this.edgeBody = this.root.querySelector("#edge-table tbody")!;
    for (const relation of RELATIONS) {
      this.relationSelect.append(new Option(relation, relation));
    }
    this.root
      .querySelector("#q-units")!
      .addEventListener("click", () => void this.queryUnits());
    this.root
      .querySelector("#q-edges")!
      .addEventListener("click", () => void this.queryEdges());
  }

  async queryUnits(): Promise<void> {
    try {
      const units = await this.client.getUnits({
        concept: this.conceptInput.value || undefined,
        phase: this.phaseInput.value || undefined,
        plan: this.planInput.value || undefined,
      });
      this.status.textContent = `${units.length} unit(s)`;
      this.unitBody.replaceChildren(
        ...units.map((unit) => {
          const tr = document.createElement("tr");
          for (const value of [
            unit.path, unit.concept, unit.name, unit.description, unit.source_model,
          ]) {
            const td = document.createElement("td");
            td.textContent = value;
            tr.append(td);
          }
          return tr;
        }),
      );
    } catch (error) {
      this.report(error);
    }
  }

  async queryEdges(): Promise<void> {
    try {
      const edges = await this.client.getEdges({ relation: this.relationSelect.value });
      this.status.textContent = `${edges.length} edge(s)`;
      this.edgeBody.replaceChildren(
        ...edges.map((edge) => {
          const tr = document.createElement("tr");
          for (const value of [edge.from_unit, edge.to_unit, edge.relation, edge.provenance]) {
            const td = document.createElement("td");
            td.textContent = value;
            tr.append(td);
          }
          return tr;
        }),
      );
    } catch (error) {
      this.report(error);
    }
  }

  private report(error: unknown): void {
    this.status.textContent =
      error instanceof ApiError ? `${error.errorClass}: ${error.message}` : String(error);
  }
}
