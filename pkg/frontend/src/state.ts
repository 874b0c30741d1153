import { ApiError } from "./api.js";
import type {
  CorrectionField,
  CorrectionRequest,
  ItemDetail,
  QueueItem,
  QueuePage,
  SubmitResponse,
} from "./types.js";

/** Structural view of the API client, so tests can use plain stubs. */
export interface ReviewApiLike {
  queue(offset?: number, limit?: number): Promise<QueuePage>;
  item(id: string): Promise<ItemDetail>;
  submitCorrections(id: string, body: CorrectionRequest): Promise<SubmitResponse>;
  accept(id: string, reviewer: string): Promise<{ status: string }>;
}

/** Draft edits for one item; dirty fields become correction events. */
export interface EditDraft {
  name: string;
  date: string;
  stillborn: boolean;
}

export function draftFrom(item: QueueItem): EditDraft {
  return { name: item.name ?? "", date: item.date ?? "", stillborn: false };
}

const DAYS_IN_MONTH = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

export function isCalendarDate(text: string): boolean {
  const m = /^(\d{4})-(\d{1,2})-(\d{1,2})$/.exec(text.trim());
  if (!m) return false;
  const year = Number(m[1]);
  const month = Number(m[2]);
  const day = Number(m[3]);
  if (month < 1 || month > 12 || day < 1) return false;
  const leap = (year % 4 === 0 && year % 100 !== 0) || year % 400 === 0;
  const max = month === 2 && leap ? 29 : DAYS_IN_MONTH[month - 1];
  return day <= max;
}

/** Validation messages; submit stays disabled while any are present. */
export function validateDraft(draft: EditDraft): string[] {
  const messages: string[] = [];
  if (draft.name.trim() === "" && !draft.stillborn) {
    messages.push("Name is empty: mark the record as stillborn or enter a name.");
  }
  if (draft.date.trim() !== "" && !isCalendarDate(draft.date)) {
    messages.push("Date must be a real calendar date (YYYY-MM-DD).");
  }
  return messages;
}

/** Only fields that changed against the server values are submitted. */
export function buildCorrections(draft: EditDraft, item: QueueItem): CorrectionField[] {
  const corrections: CorrectionField[] = [];
  if (draft.name.trim() !== (item.name ?? "")) {
    corrections.push({ field: "deceased_name", new_value: draft.name.trim() });
  }
  if (draft.date.trim() !== (item.date ?? "") && draft.date.trim() !== "") {
    corrections.push({ field: "death_date", new_value: draft.date.trim() });
  }
  return corrections;
}

export interface DraftStore {
  load(id: string): EditDraft | null;
  save(id: string, draft: EditDraft): void;
  clear(id: string): void;
}

export class MemoryDrafts implements DraftStore {
  private drafts = new Map<string, EditDraft>();

  load(id: string): EditDraft | null {
    return this.drafts.get(id) ?? null;
  }

  save(id: string, draft: EditDraft): void {
    this.drafts.set(id, { ...draft });
  }

  clear(id: string): void {
    this.drafts.delete(id);
  }
}

export type SubmitOutcome =
  | { kind: "corrected" }
  | { kind: "accepted" }
  | { kind: "conflict"; item: ItemDetail }
  | { kind: "invalid"; messages: string[] }
  | { kind: "network-error"; message: string };

/**
 * Queue state: rows in API order, cursor paging, selection, and the submit
 * flow with optimistic row updates. A 409 reloads the item and surfaces the
 * conflict; a network failure keeps the draft for the next attempt.
 */
export class QueueController {
  items: QueueItem[] = [];
  total = 0;
  nextOffset: number | null = null;
  selected = 0;
  reviewer = "volunteer";

  constructor(
    private readonly api: ReviewApiLike,
    readonly drafts: DraftStore = new MemoryDrafts(),
  ) {}

  async loadFirst(limit = 20): Promise<void> {
    const page = await this.api.queue(0, limit);
    this.items = page.items;
    this.total = page.total;
    this.nextOffset = page.next_offset;
    this.selected = 0;
  }

  async loadMore(limit = 20): Promise<void> {
    if (this.nextOffset === null) return;
    const page = await this.api.queue(this.nextOffset, limit);
    this.items = this.items.concat(page.items);
    this.total = page.total;
    this.nextOffset = page.next_offset;
  }

  selectedItem(): QueueItem | null {
    return this.items[this.selected] ?? null;
  }

  select(delta: number): void {
    if (!this.items.length) return;
    this.selected = Math.min(Math.max(this.selected + delta, 0), this.items.length - 1);
  }

  private replaceRow(updated: QueueItem): void {
    this.items = this.items.map((row) => (row.id === updated.id ? { ...row, ...updated } : row));
  }

  async submit(item: QueueItem, draft: EditDraft): Promise<SubmitOutcome> {
    const messages = validateDraft(draft);
    if (messages.length) {
      return { kind: "invalid", messages };
    }
    const corrections = buildCorrections(draft, item);
    try {
      if (corrections.length === 0) {
        await this.api.accept(item.id, this.reviewer);
        this.replaceRow({ ...item, status: "accepted" });
        this.drafts.clear(item.id);
        return { kind: "accepted" };
      }
      await this.api.submitCorrections(item.id, {
        reviewer: this.reviewer,
        stillborn: draft.stillborn || undefined,
        corrections,
      });
      this.replaceRow({
        ...item,
        status: "corrected",
        name: draft.name.trim() || item.name,
        date: draft.date.trim() || item.date,
      });
      this.drafts.clear(item.id);
      return { kind: "corrected" };
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        const fresh = await this.api.item(item.id);
        this.replaceRow(fresh);
        this.drafts.clear(item.id);
        return { kind: "conflict", item: fresh };
      }
      this.drafts.save(item.id, draft); // keep the volunteer's work
      const message = error instanceof Error ? error.message : String(error);
      return { kind: "network-error", message };
    }
  }

  async accept(item: QueueItem): Promise<SubmitOutcome> {
    try {
      await this.api.accept(item.id, this.reviewer);
      this.replaceRow({ ...item, status: "accepted" });
      return { kind: "accepted" };
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        const fresh = await this.api.item(item.id);
        this.replaceRow(fresh);
        return { kind: "conflict", item: fresh };
      }
      const message = error instanceof Error ? error.message : String(error);
      return { kind: "network-error", message };
    }
  }
}
