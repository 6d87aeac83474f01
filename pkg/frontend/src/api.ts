/**
 * Typed client for the mapping service JSON API.
 *
 * Every method talks to one `/api` endpoint; non-2xx responses are raised
 * as {@link ApiError} carrying the server's machine-readable error class.
 * The UI never invents data that these endpoints did not return.
 */

export interface PlanSummary {
  plan_id: string;
  title: string;
  phases: string[];
}

export interface MappingInfo {
  concept: string;
  mapper: string;
  timestamp: string;
}

export interface ElementRow {
  path: string;
  kind: string;
  name: string;
  description: string;
  stereotype: string | null;
  mapping: MappingInfo | null;
}

export interface ElementsPage {
  elements: ElementRow[];
  total: number;
  page: number;
  page_size: number;
}

export interface CandidateConcept {
  name: string;
  phase: string;
  stereotypes: string[];
  definition: string;
  score?: number;
}

export interface CandidatesResponse {
  element: string;
  stereotype: string | null;
  candidates: CandidateConcept[];
}

export interface MappingRecord {
  element: string;
  stereotype: string;
  concept: string | null;
  phase: string;
  mapper: string;
  timestamp: string;
  supersedes: number | null;
}

export interface KnowledgeUnitRow {
  unit_id: string;
  path: string;
  phase: string;
  concept: string;
  name: string;
  description: string;
  source_model: string;
}

export interface KnowledgeEdgeRow {
  from_unit: string;
  to_unit: string;
  relation: string;
  provenance: string;
}

export interface DiagnosticRow {
  rule_id: string;
  severity: string;
  element: string;
  message: string;
}

export interface DiagnosticsResponse {
  plan: string;
  diagnostics: DiagnosticRow[];
  errors: number;
  warnings: number;
}

export class ApiError extends Error {
  readonly status: number;
  readonly errorClass: string;
  readonly element?: string;

  constructor(status: number, errorClass: string, message: string, element?: string) {
    super(message);
    this.status = status;
    this.errorClass = errorClass;
    this.element = element;
  }
}

export class Client {
  constructor(private readonly baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      let errorClass = `HTTP${response.status}`;
      let message = response.statusText;
      let element: string | undefined;
      try {
        const body = (await response.json()) as {
          error_class?: string;
          message?: string;
          element?: string;
        };
        errorClass = body.error_class ?? errorClass;
        message = body.message ?? message;
        element = body.element;
      } catch {
        // fall through with the generic class
      }
      throw new ApiError(response.status, errorClass, message, element);
    }
    return (await response.json()) as T;
  }

  private query(params: Record<string, string | number | boolean | undefined>): string {
    const search = new URLSearchParams();
    for (const [key, value] of Object.entries(params)) {
      if (value !== undefined) search.set(key, String(value));
    }
    const rendered = search.toString();
    return rendered ? `?${rendered}` : "";
  }

  async getPlans(): Promise<PlanSummary[]> {
    const body = await this.request<{ plans: PlanSummary[] }>("/api/plans");
    return body.plans;
  }

  async getElements(params: {
    plan?: string;
    phase?: string;
    stereotype?: string;
    unmapped?: boolean;
    page?: number;
  }): Promise<ElementsPage> {
    return this.request<ElementsPage>("/api/elements" + this.query(params));
  }

  async getCandidates(element: string, ranked = false): Promise<CandidatesResponse> {
    return this.request<CandidatesResponse>(
      "/api/candidates" + this.query({ element, ranked }),
    );
  }

  async getRegistryConcepts(params: {
    phase?: string;
    stereotype?: string;
  }): Promise<CandidateConcept[]> {
    const body = await this.request<{ concepts: CandidateConcept[] }>(
      "/api/registry/concepts" + this.query(params),
    );
    return body.concepts;
  }

  async commitMapping(params: {
    element: string;
    concept: string;
    mapper: string;
    expectedCurrent?: string | null;
  }): Promise<MappingRecord> {
    const payload: Record<string, unknown> = {
      element: params.element,
      concept: params.concept,
      mapper: params.mapper,
    };
    if ("expectedCurrent" in params) {
      payload.expected_current = params.expectedCurrent;
    }
    const body = await this.request<{ record: MappingRecord }>("/api/mappings", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    return body.record;
  }

  async deleteMapping(element: string, mapper: string): Promise<MappingRecord> {
    const body = await this.request<{ record: MappingRecord }>(
      `/api/mappings/${element}` + this.query({ mapper }),
      { method: "DELETE" },
    );
    return body.record;
  }

  async getUnits(params: {
    concept?: string;
    phase?: string;
    plan?: string;
    source_model?: string;
  }): Promise<KnowledgeUnitRow[]> {
    const body = await this.request<{ units: KnowledgeUnitRow[] }>(
      "/api/repository/units" + this.query(params),
    );
    return body.units;
  }

  async getEdges(params: { relation?: string; unit?: string }): Promise<KnowledgeEdgeRow[]> {
    const body = await this.request<{ edges: KnowledgeEdgeRow[] }>(
      "/api/repository/edges" + this.query(params),
    );
    return body.edges;
  }

  async getDiagnostics(plan: string): Promise<DiagnosticsResponse> {
    return this.request<DiagnosticsResponse>("/api/diagnostics" + this.query({ plan }));
  }
}
