/**
 * Semantic mapping screen.
 *
 * Two tables: the plan's elements for the selected plan/phase/model with
 * their mapped concept (M1), and the annotated concepts of the catalogue
 * with their terminology (M2). Each unmapped element gets a selector whose
 * options come exclusively from `/api/candidates` for that element, ranked
 * by suggestion score with the top suggestion preselected; nothing is ever
 * committed without the practitioner pressing the button.
 */

import type { CandidateConcept, Client, ElementRow } from "./api.js";
import { ApiError } from "./api.js";
import { optimisticUpdate } from "./optimistic.js";

const STEREOTYPES = ["Goal", "Role", "Agent", "Activity", "Event", "EnvironmentEntity"];

interface RowState {
  row: ElementRow;
  tr: HTMLTableRowElement;
}

export class MappingScreen {
  private readonly client: Client;
  private readonly root: HTMLElement;
  private planSelect!: HTMLSelectElement;
  private phaseSelect!: HTMLSelectElement;
  private modelSelect!: HTMLSelectElement;
  private mapperInput!: HTMLInputElement;
  private badge!: HTMLElement;
  private banner!: HTMLElement;
  private m1Body!: HTMLTableSectionElement;
  private m2Body!: HTMLTableSectionElement;
  private rows = new Map<string, RowState>();
  private plans: { plan_id: string; phases: string[] }[] = [];

  constructor(root: HTMLElement, client: Client) {
    this.root = root;
    this.client = client;
    this.renderSkeleton();
  }

  private renderSkeleton(): void {
    this.root.innerHTML = `
      <div class="toolbar">
        <label>Plan <select id="plan-select"></select></label>
        <label>Phase <select id="phase-select"></select></label>
        <label>Model <select id="model-select"></select></label>
        <label>Mapper <input id="mapper-input" value="practitioner"></label>
        <span id="unmapped-badge" class="badge"></span>
      </div>
      <div id="banner" class="banner" hidden></div>
      <h2>M1: element knowledge of the agent-based model</h2>
      <table id="m1-table">
        <thead><tr>
          <th>#</th><th>Name</th><th>Mapped Annotated Concept</th>
          <th>Description</th><th>Action</th>
        </tr></thead>
        <tbody></tbody>
      </table>
      <h2>M2: annotated concepts of the metamodel</h2>
      <table id="m2-table">
        <thead><tr>
          <th>#</th><th>Annotation</th><th>Concept</th><th>Terminology</th>
        </tr></thead>
        <tbody></tbody>
      </table>
    `;
    this.planSelect = this.root.querySelector("#plan-select")!;
    this.phaseSelect = this.root.querySelector("#phase-select")!;
    this.modelSelect = this.root.querySelector("#model-select")!;
    this.mapperInput = this.root.querySelector("#mapper-input")!;
    this.badge = this.root.querySelector("#unmapped-badge")!;
    this.banner = this.root.querySelector("#banner")!;
    this.m1Body = this.root.querySelector("#m1-table tbody")!;
    this.m2Body = this.root.querySelector("#m2-table tbody")!;

    for (const stereotype of STEREOTYPES) {
      this.modelSelect.append(new Option(stereotype, stereotype));
    }
    this.modelSelect.value = "Role";
    this.planSelect.addEventListener("change", () => {
      this.populatePhases();
      void this.refresh();
    });
    this.phaseSelect.addEventListener("change", () => void this.refresh());
    this.modelSelect.addEventListener("change", () => void this.refresh());
  }

  async load(): Promise<void> {
    this.plans = await this.client.getPlans();
    this.planSelect.replaceChildren(
      ...this.plans.map((p) => new Option(p.plan_id, p.plan_id)),
    );
    this.populatePhases();
    await this.refresh();
  }

  private populatePhases(): void {
    const plan = this.plans.find((p) => p.plan_id === this.planSelect.value);
    this.phaseSelect.replaceChildren(
      ...(plan?.phases ?? []).map((phase) => new Option(phase, phase)),
    );
  }

  showBanner(text: string): void {
    this.banner.textContent = text;
    this.banner.hidden = false;
  }

  clearBanner(): void {
    this.banner.hidden = true;
    this.banner.textContent = "";
  }

  async refresh(): Promise<void> {
    const plan = this.planSelect.value;
    const phase = this.phaseSelect.value;
    const stereotype = this.modelSelect.value;
    if (!plan || !phase) return;

    const [page, concepts] = await Promise.all([
      this.client.getElements({ plan, phase, stereotype }),
      this.client.getRegistryConcepts({ phase, stereotype }),
    ]);

    this.renderConceptTable(concepts);
    this.rows.clear();
    this.m1Body.replaceChildren();
    for (const [index, row] of page.elements.entries()) {
      const tr = document.createElement("tr");
      tr.dataset.path = row.path;
      tr.append(
        cell(String(index + 1)),
        cell(row.name),
        conceptCell(row),
        cell(row.description),
        document.createElement("td"),
      );
      this.m1Body.append(tr);
      this.rows.set(row.path, { row, tr });
      if (row.mapping === null) {
        await this.attachSelector(row.path);
      } else {
        this.attachUnmapButton(row.path);
      }
    }
    this.updateBadge();
  }

  private renderConceptTable(concepts: CandidateConcept[]): void {
    this.m2Body.replaceChildren(
      ...concepts.map((concept, index) => {
        const tr = document.createElement("tr");
        tr.append(
          cell(String(index + 1)),
          cell(concept.stereotypes.map((s) => `<<${s}>>`).join(" & ")),
          cell(concept.name),
          cell(concept.definition),
        );
        return tr;
      }),
    );
  }

  /** Options come only from the candidates endpoint, best suggestion first. */
  private async attachSelector(path: string): Promise<void> {
    const state = this.rows.get(path);
    if (!state) return;
    const response = await this.client.getCandidates(path, true);
    const select = document.createElement("select");
    select.className = "candidate-select";
    for (const candidate of response.candidates) {
      const option = new Option(candidate.name, candidate.name);
      option.title = candidate.definition;
      select.append(option);
    }
    const button = document.createElement("button");
    button.className = "commit-btn";
    button.textContent = "Map";
    button.addEventListener("click", () => void this.commitSelection(path, select.value));
    const action = state.tr.cells[4]!;
    action.replaceChildren(select, button);
  }

  private attachUnmapButton(path: string): void {
    const state = this.rows.get(path);
    if (!state) return;
    const button = document.createElement("button");
    button.className = "unmap-btn";
    button.textContent = "Unmap";
    button.addEventListener("click", () => void this.retractSelection(path));
    state.tr.cells[4]!.replaceChildren(button);
  }

  /**
   * Commits one decision. The row updates optimistically and in place; a
   * rejection rolls the cell back, shows the server's error class and, on a
   * conflict, re-fetches the candidate list for the element.
   */
  async commitSelection(path: string, concept: string): Promise<void> {
    const state = this.rows.get(path);
    if (!state) return;
    this.clearBanner();
    const previous = state.row.mapping;
    try {
      await optimisticUpdate({
        current: previous,
        optimistic: { concept, mapper: this.mapperInput.value, timestamp: "" },
        apply: (mapping, pending) => {
          state.row = { ...state.row, mapping };
          this.updateRowCells(state, pending);
        },
        request: async () => {
          const record = await this.client.commitMapping({
            element: path,
            concept,
            mapper: this.mapperInput.value,
            expectedCurrent: previous ? previous.concept : null,
          });
          return {
            concept: record.concept ?? "",
            mapper: record.mapper,
            timestamp: record.timestamp,
          };
        },
      });
      this.attachUnmapButton(path);
      this.updateBadge();
    } catch (error) {
      this.reportError(error);
      if (error instanceof ApiError && error.status === 409) {
        await this.attachSelector(path);
      }
    }
  }

  async retractSelection(path: string): Promise<void> {
    const state = this.rows.get(path);
    if (!state) return;
    this.clearBanner();
    const previous = state.row.mapping;
    try {
      await optimisticUpdate({
        current: previous,
        optimistic: null,
        apply: (mapping, pending) => {
          state.row = { ...state.row, mapping };
          this.updateRowCells(state, pending);
        },
        request: async () => {
          await this.client.deleteMapping(path, this.mapperInput.value);
          return null;
        },
      });
      await this.attachSelector(path);
      this.updateBadge();
    } catch (error) {
      this.reportError(error);
    }
  }

  private reportError(error: unknown): void {
    if (error instanceof ApiError) {
      this.showBanner(`${error.errorClass}: ${error.message}`);
    } else {
      this.showBanner(`service unreachable: ${String(error)}`);
    }
  }

  private updateRowCells(state: RowState, pending: boolean): void {
    const mapped = state.tr.cells[2]!;
    mapped.textContent = state.row.mapping?.concept ?? "";
    mapped.classList.toggle("pending", pending);
    if (state.row.mapping && !pending) {
      mapped.title = `by ${state.row.mapping.mapper}`;
    } else {
      mapped.removeAttribute("title");
    }
  }

  private updateBadge(): void {
    let unmapped = 0;
    for (const { row } of this.rows.values()) {
      if (row.mapping === null) unmapped += 1;
    }
    this.badge.textContent = `${unmapped} unmapped`;
    this.badge.dataset.count = String(unmapped);
  }
}

function cell(text: string): HTMLTableCellElement {
  const td = document.createElement("td");
  td.textContent = text;
  return td;
}

function conceptCell(row: ElementRow): HTMLTableCellElement {
  const td = cell(row.mapping?.concept ?? "");
  td.className = "mapped-concept";
  if (row.mapping) td.title = `by ${row.mapping.mapper}`;
  return td;
}
