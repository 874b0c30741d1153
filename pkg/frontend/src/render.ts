import type { EditDraft } from "./state.js";
import type { ItemDetail, QueueItem } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Flags render verbatim; the server wording is the contract. */
export function flagBadges(flags: string[]): string {
  return flags
    .map((f) => `<span class="badge badge-${escapeHtml(f.toLowerCase())}">${escapeHtml(f)}</span>`)
    .join(" ");
}

export function rowHtml(item: QueueItem, selected: boolean): string {
  const classes = ["row", `status-${item.status}`];
  if (selected) classes.push("selected");
  return (
    `<li class="${classes.join(" ")}" data-id="${escapeHtml(item.id)}">` +
    `<span class="scan">${escapeHtml(item.scan ?? "(unknown scan)")}</span>` +
    `<span class="flags">${flagBadges(item.flags)}</span>` +
    `<span class="name">${escapeHtml(item.name ?? "—")}</span>` +
    `<span class="date">${escapeHtml(item.date ?? "—")}</span>` +
    `<span class="status">${escapeHtml(item.status)}</span>` +
    `</li>`
  );
}

export function queueHtml(items: QueueItem[], selectedIndex: number, hasMore: boolean): string {
  if (!items.length) {
    return `<p class="empty">The review queue is empty. Nothing is waiting for correction.</p>`;
  }
  const rows = items.map((item, i) => rowHtml(item, i === selectedIndex)).join("\n");
  const more = hasMore
    ? `<button class="load-more" data-action="load-more">Load more</button>`
    : "";
  return `<ul class="queue">\n${rows}\n</ul>\n${more}`;
}

export function detailHtml(item: ItemDetail, draft: EditDraft, messages: string[]): string {
  const invalid = messages.length > 0;
  const excerpt = item.excerpt ? escapeHtml(item.excerpt) : "(no excerpt)";
  const errors = messages.map((m) => `<li>${escapeHtml(m)}</li>`).join("");
  return `
<section class="detail" data-id="${escapeHtml(item.id)}">
  <h2>${escapeHtml(item.scan ?? item.id)}</h2>
  <p class="flags">${flagBadges(item.flags)}</p>
  <pre class="excerpt">${excerpt}</pre>
  <form class="edit" data-action="submit">
    <label>Deceased name
      <input name="name" value="${escapeHtml(draft.name)}" autocomplete="off">
    </label>
    <label>Death date
      <input name="date" value="${escapeHtml(draft.date)}" placeholder="YYYY-MM-DD" autocomplete="off">
    </label>
    <label class="stillborn">
      <input type="checkbox" name="stillborn" ${draft.stillborn ? "checked" : ""}>
      stillborn (allows an empty name)
    </label>
    <ul class="errors">${errors}</ul>
    <button type="submit" ${invalid ? "disabled" : ""}>Save correction</button>
    <button type="button" data-action="accept">Accept as-is</button>
  </form>
</section>`;
}

export function errorBannerHtml(message: string): string {
  return (
    `<div class="banner error">${escapeHtml(message)} ` +
    `<button data-action="retry">Retry</button></div>`
  );
}

export function conflictNoticeHtml(item: QueueItem): string {
  return (
    `<div class="banner conflict">Someone else handled this item first; ` +
    `showing the server state (${escapeHtml(item.status)}).</div>`
  );
}
