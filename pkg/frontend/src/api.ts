/** Typed client for the session API. All writes carry the expected revision. */

import type { Geometry, SessionInfo, StepPayload, StepView } from "./types.js";

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

/** The server moved on while we were looking at an older revision. */
export class ConflictError extends ApiError {
  constructor(message: string, readonly serverRevision: number) {
    super(message, 409);
  }
}

export class ValidationError extends ApiError {
  constructor(readonly problems: string[]) {
    super(problems.join("; "), 422);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(this.base + path, init);
    if (response.ok) return response;
    let body: { error?: string; revision?: number; problems?: string[] } = {};
    try {
      body = await response.json();
    } catch {
      /* non-JSON error body */
    }
    if (response.status === 409) {
      throw new ConflictError(body.error ?? "revision conflict", body.revision ?? -1);
    }
    if (response.status === 422 && body.problems) {
      throw new ValidationError(body.problems);
    }
    throw new ApiError(body.error ?? `request failed (${response.status})`, response.status);
  }

  async createSession(pdf: Blob | Uint8Array, autotag = true): Promise<SessionInfo> {
    const form = new FormData();
    const blob = pdf instanceof Blob ? pdf : new Blob([pdf as BlobPart], { type: "application/pdf" });
    form.append("file", blob, "upload.pdf");
    const response = await this.request(`/sessions?autotag=${autotag}`, {
      method: "POST",
      body: form,
    });
    return response.json();
  }

  async sessionInfo(id: string): Promise<SessionInfo> {
    return (await this.request(`/sessions/${id}`)).json();
  }

  async getStep(id: string, step: number): Promise<StepView> {
    return (await this.request(`/sessions/${id}/steps/${step}`)).json();
  }

  async putStep(
    id: string, step: number, payload: StepPayload, expectedRevision: number,
  ): Promise<{ id: string; revision: number; cascades: string[] }> {
    const response = await this.request(`/sessions/${id}/steps/${step}`, {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ expected_revision: expectedRevision, payload }),
    });
    return response.json();
  }

  async geometry(id: string, page: number): Promise<Geometry> {
    return (await this.request(`/sessions/${id}/pages/${page}/geometry`)).json();
  }

  async tagmap(id: string): Promise<{ revision: number; tagmap: unknown }> {
    return (await this.request(`/sessions/${id}/tagmap`)).json();
  }

  async exportPdf(id: string): Promise<ArrayBuffer> {
    const response = await this.request(`/sessions/${id}/export`, { method: "POST" });
    return response.arrayBuffer();
  }
}
