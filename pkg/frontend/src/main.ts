import { ReviewApi } from "./api.js";
import {
  conflictNoticeHtml,
  detailHtml,
  errorBannerHtml,
  queueHtml,
} from "./render.js";
import {
  draftFrom,
  EditDraft,
  DraftStore,
  QueueController,
  validateDraft,
} from "./state.js";

/** Drafts survive a reload via localStorage (network failures keep work). */
class LocalDrafts implements DraftStore {
  load(id: string): EditDraft | null {
    const raw = localStorage.getItem(`certpipe-draft:${id}`);
    return raw ? (JSON.parse(raw) as EditDraft) : null;
  }

  save(id: string, draft: EditDraft): void {
    localStorage.setItem(`certpipe-draft:${id}`, JSON.stringify(draft));
  }

  clear(id: string): void {
    localStorage.removeItem(`certpipe-draft:${id}`);
  }
}

const api = new ReviewApi("");
const controller = new QueueController(api, new LocalDrafts());

const queueEl = document.getElementById("queue")!;
const detailEl = document.getElementById("detail")!;
const bannerEl = document.getElementById("banner")!;

function currentDraft(): EditDraft | null {
  const item = controller.selectedItem();
  if (!item) return null;
  const form = detailEl.querySelector<HTMLFormElement>("form.edit");
  if (!form) return controller.drafts.load(item.id) ?? draftFrom(item);
  return {
    name: (form.elements.namedItem("name") as HTMLInputElement).value,
    date: (form.elements.namedItem("date") as HTMLInputElement).value,
    stillborn: (form.elements.namedItem("stillborn") as HTMLInputElement).checked,
  };
}

function render(notice = ""): void {
  bannerEl.innerHTML = notice;
  queueEl.innerHTML = queueHtml(
    controller.items,
    controller.selected,
    controller.nextOffset !== null,
  );
  const item = controller.selectedItem();
  if (!item) {
    detailEl.innerHTML = "";
    return;
  }
  const draft = controller.drafts.load(item.id) ?? draftFrom(item);
  detailEl.innerHTML = detailHtml(item, draft, validateDraft(draft));
}

function renderWithDraft(draft: EditDraft): void {
  const item = controller.selectedItem();
  if (!item) return;
  detailEl.innerHTML = detailHtml(item, draft, validateDraft(draft));
}

async function refresh(): Promise<void> {
  try {
    await controller.loadFirst();
    render();
  } catch (error) {
    bannerEl.innerHTML = errorBannerHtml(
      error instanceof Error ? error.message : String(error),
    );
  }
}

async function submitCurrent(): Promise<void> {
  const item = controller.selectedItem();
  const draft = currentDraft();
  if (!item || !draft) return;
  const outcome = await controller.submit(item, draft);
  switch (outcome.kind) {
    case "corrected":
    case "accepted":
      controller.select(1);
      render();
      break;
    case "conflict":
      render(conflictNoticeHtml(outcome.item));
      break;
    case "invalid":
      renderWithDraft(draft);
      break;
    case "network-error":
      render(errorBannerHtml(`Not sent, draft kept: ${outcome.message}`));
      break;
  }
}

document.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  const action = target.dataset.action;
  if (action === "load-more") {
    void controller.loadMore().then(() => render());
  } else if (action === "retry") {
    void refresh();
  } else if (action === "accept") {
    const item = controller.selectedItem();
    if (item) {
      void controller.accept(item).then((outcome) => {
        if (outcome.kind === "conflict") render(conflictNoticeHtml(outcome.item));
        else render();
      });
    }
  } else {
    const row = target.closest<HTMLElement>("li.row");
    if (row) {
      controller.selected = controller.items.findIndex((i) => i.id === row.dataset.id);
      render();
    }
  }
});

detailEl.addEventListener("submit", (event) => {
  event.preventDefault();
  void submitCurrent();
});

detailEl.addEventListener("input", () => {
  const item = controller.selectedItem();
  const draft = currentDraft();
  if (item && draft) {
    controller.drafts.save(item.id, draft);
    // re-validate without re-rendering inputs (keeps the caret in place)
    const form = detailEl.querySelector<HTMLFormElement>("form.edit");
    const button = form?.querySelector<HTMLButtonElement>("button[type=submit]");
    if (button) button.disabled = validateDraft(draft).length > 0;
  }
});

// keyboard-first: volunteers process items in bulk
document.addEventListener("keydown", (event) => {
  if ((event.target as HTMLElement).tagName === "INPUT") return;
  if (event.key === "j") {
    controller.select(1);
    render();
  } else if (event.key === "k") {
    controller.select(-1);
    render();
  } else if (event.key === "e") {
    detailEl.querySelector<HTMLInputElement>("input[name=name]")?.focus();
    event.preventDefault();
  } else if (event.key === "a") {
    const item = controller.selectedItem();
    if (item) void controller.accept(item).then(() => render());
  }
});

void refresh();
