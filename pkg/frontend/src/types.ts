/** Wire shapes of the session service API. */

export type EventKind =
  | "LLM_REQUEST"
  | "LLM_RESPONSE"
  | "TOOL_CALL"
  | "TOOL_RESULT"
  | "FILE_SNAPSHOT"
  | "PHASE_CHANGE"
  | "FEEDBACK"
  | "HINT"
  | "VERDICT"
  | "OUTCOME";

export interface WireEvent {
  session_id: string;
  seq: number;
  ts: string;
  kind: EventKind;
  payload: Record<string, unknown>;
}

export interface SessionSummary {
  session_id: string;
  task_id: string;
  phase: string;
  status: string;
  paused: boolean;
  rounds_used: number;
  api_calls_used: number;
  tool_calls_used: number;
  last_seq: number;
  created: number;
  finished: boolean;
}

export interface WireVerdict {
  verified: boolean;
  reasons: string[];
  diagnostics: Record<string, unknown>[];
  checked_path: string;
}

export type ControlAction = "PAUSE" | "RESUME" | "ABORT" | "HINT";

/** Request failure with the service's stable error code attached. */
export class ServiceError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}
