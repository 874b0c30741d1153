/** Payload shapes of the review API (format "certpipe-review/1"). */

export type ItemStatus = "pending" | "corrected" | "accepted";

export interface QueueItem {
  id: string;
  scan: string | null;
  flags: string[];
  name: string | null;
  date: string | null;
  status: ItemStatus;
}

export interface QueuePage {
  format: string;
  items: QueueItem[];
  total: number;
  next_offset: number | null;
}

export interface ItemDetail extends QueueItem {
  excerpt?: string;
  gating_flags?: string[];
  record?: unknown;
}

export type CorrectionFieldName = "deceased_name" | "death_date";

export interface CorrectionField {
  field: CorrectionFieldName;
  new_value: string;
}

export interface CorrectionRequest {
  reviewer: string;
  stillborn?: boolean;
  corrections: CorrectionField[];
}

export interface SubmitResponse {
  status: string;
  events: unknown[];
}
