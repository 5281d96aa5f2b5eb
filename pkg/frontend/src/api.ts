/**
 * HTTP client for the explanation service: submit jobs, poll until done.
 */

import type {
  CompareParams,
  CompareResult,
  EngineEntry,
  ExplainParams,
  ExplanationDocument,
  JobSnapshot,
} from "./types";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(base + path, init);
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    throw new ApiError(response.status, body.detail ?? response.statusText);
  }
  return body as T;
}

function post<T>(base: string, path: string, payload: unknown): Promise<T> {
  return request<T>(base, path, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  listEngines(): Promise<{ engines: EngineEntry[] }> {
    return request(this.base, "/engines");
  }

  submitExplain(params: ExplainParams): Promise<{ job_id: string }> {
    return post(this.base, "/explain", params);
  }

  submitCompare(params: CompareParams): Promise<{ job_id: string }> {
    return post(this.base, "/compare", params);
  }

  getJob(jobId: string): Promise<JobSnapshot> {
    return request(this.base, `/jobs/${jobId}`);
  }

  /**
   * Poll a job until it settles. `onProgress` fires for every snapshot, so a
   * progress bar can track completed evaluations against the budget.
   */
  async pollJob(
    jobId: string,
    onProgress?: (snapshot: JobSnapshot) => void,
    intervalMs = 150,
    timeoutMs = 600_000,
  ): Promise<JobSnapshot> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const snapshot = await this.getJob(jobId);
      onProgress?.(snapshot);
      if (snapshot.state === "done") return snapshot;
      if (snapshot.state === "failed") {
        throw new ApiError(500, snapshot.error ?? "job failed");
      }
      if (Date.now() > deadline) throw new ApiError(408, `job ${jobId} timed out`);
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }

  async explain(
    params: ExplainParams,
    onProgress?: (snapshot: JobSnapshot) => void,
  ): Promise<ExplanationDocument> {
    const { job_id } = await this.submitExplain(params);
    const snapshot = await this.pollJob(job_id, onProgress);
    return snapshot.result as ExplanationDocument;
  }

  async compare(
    params: CompareParams,
    onProgress?: (snapshot: JobSnapshot) => void,
  ): Promise<CompareResult> {
    const { job_id } = await this.submitCompare(params);
    const snapshot = await this.pollJob(job_id, onProgress);
    return snapshot.result as CompareResult;
  }
}
