/** Wire types of the explanation service; the UI never invents these values. */

export interface ContributionEntry {
  square: string;
  piece: string;
  color: "white" | "black";
  phi: number;
}

export interface ExplanationDocument {
  schema_version: number;
  fen: string;
  evaluator: string;
  method: "exact" | "sampling";
  seed: number | null;
  base_value: number;
  full_value: number;
  evaluations_used: number;
  fallback_count: number;
  root_limit: Record<string, number>;
  perturb_limit: Record<string, number>;
  contributions: ContributionEntry[];
}

export interface DeltaEntry {
  square: string;
  piece: string;
  color: "white" | "black";
  phi_a: number;
  phi_b: number;
  delta: number;
}

export interface CompareResult {
  a: ExplanationDocument;
  b: ExplanationDocument;
  deltas: DeltaEntry[];
}

export interface JobProgress {
  done: number;
  total: number | null;
}

export interface JobSnapshot {
  id: string;
  kind: "explain" | "compare";
  state: "queued" | "running" | "done" | "failed";
  progress: JobProgress;
  result?: ExplanationDocument | CompareResult;
  error?: string;
}

export interface EngineEntry {
  id: string;
  kind: string;
  root_limit: Record<string, number>;
  perturb_limit: Record<string, number>;
}

export interface ExplainParams {
  fen: string;
  evaluator_id: string;
  max_evaluations?: number;
  seed?: number | null;
  exact_threshold?: number;
}

export interface CompareParams {
  fen: string;
  evaluator_a: string;
  evaluator_b: string;
  max_evaluations?: number;
  seed?: number | null;
  exact_threshold?: number;
}
