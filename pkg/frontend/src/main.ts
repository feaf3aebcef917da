// Browser glue: render the view state into the page, wire up the form.
// Everything interesting lives in viewmodel.ts and console.ts; this file
// only translates state to DOM and DOM events to controller calls.

import { ConsoleController } from "./console.js";
import {
  Cell,
  ConsoleViewState,
  inputEnabled,
  windowCells,
} from "./viewmodel.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

function basename(path: string): string {
  const parts = path.split(/[\\/]/);
  return parts[parts.length - 1] || path;
}

function cellHtml(cell: Cell): string {
  switch (cell.kind) {
    case "banner":
      return `<pre class="cell banner">${escapeHtml(cell.text)}</pre>`;
    case "prompt": {
      const tag = cell.aux ? ` <span class="aux">[${escapeHtml(cell.aux)}]</span>` : "";
      return `<div class="cell prompt">${escapeHtml(cell.text)}${tag}</div>`;
    }
    case "input": {
      const cls = cell.pending ? "cell input pending" : "cell input";
      return `<div class="${cls}">${escapeHtml(cell.text)}</div>`;
    }
    case "math":
      // Server-produced markup, rendered as is.
      return `<div class="cell math">${cell.mathml}</div>`;
    case "math-source":
      return `<pre class="cell math-source">${escapeHtml(cell.latex)}</pre>`;
    case "text":
      return `<pre class="cell text">${escapeHtml(cell.text)}</pre>`;
    case "question":
      return `<div class="cell question">${escapeHtml(cell.text)}</div>`;
    case "plot":
      return `<div class="cell plot"><span class="chip">plot: ${escapeHtml(
        basename(cell.path),
      )}</span></div>`;
    case "end":
      return `<div class="cell end">session ended (${escapeHtml(cell.reason)})</div>`;
  }
}

function main(): void {
  const form = el<HTMLFormElement>("connect-form");
  const urlBox = el<HTMLInputElement>("server-url");
  const profileBox = el<HTMLInputElement>("profile");
  const corpusBox = el<HTMLInputElement>("corpus");
  const modeBox = el<HTMLSelectElement>("mode");
  const status = el<HTMLSpanElement>("status");
  const alertBox = el<HTMLDivElement>("alert");
  const alertText = el<HTMLSpanElement>("alert-text");
  const alertDismiss = el<HTMLButtonElement>("alert-dismiss");
  const retry = el<HTMLButtonElement>("retry");
  const transcript = el<HTMLDivElement>("transcript");
  const questionBanner = el<HTMLDivElement>("question-banner");
  const inputForm = el<HTMLFormElement>("input-form");
  const inputBox = el<HTMLInputElement>("input-box");
  const inlineError = el<HTMLDivElement>("inline-error");

  let controller: ConsoleController | null = null;

  function render(state: ConsoleViewState): void {
    status.textContent = `${state.connection}${
      state.sessionId ? ` (${state.sessionId})` : ""
    } ${state.phase}`;

    alertBox.hidden = state.alert === null;
    alertText.textContent = state.alert ?? "";
    retry.hidden = state.connection !== "disconnected" && state.connection !== "failed";

    const windowed = windowCells(state.cells);
    const head =
      windowed.hidden > 0
        ? `<div class="cell elided">${windowed.hidden} earlier cells hidden</div>`
        : "";
    transcript.innerHTML = head + windowed.visible.map(cellHtml).join("");
    transcript.scrollTop = transcript.scrollHeight;

    if (state.pendingQuestion) {
      const q = state.pendingQuestion;
      const hint = q.answers.length ? ` (${q.answers.join(" / ")})` : "";
      questionBanner.textContent = q.text + hint;
      questionBanner.hidden = false;
    } else {
      questionBanner.hidden = true;
    }

    inputBox.disabled = !inputEnabled(state);
    if (!inputBox.disabled && state.pendingQuestion) {
      inputBox.focus();
    }
    inlineError.hidden = state.inlineError === null;
    inlineError.textContent = state.inlineError ?? "";
  }

  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const url = urlBox.value.trim();
    controller = new ConsoleController(() => import("./transport.js").then(
      (m) => m.WebSocketTransport.connect(url),
    ));
    controller.onChange = render;
    void controller.connectAndCreate({
      profile: profileBox.value.trim(),
      mode: modeBox.value === "live" ? "live" : "replay",
      corpus: corpusBox.value.trim() || undefined,
    });
  });

  retry.addEventListener("click", () => {
    if (controller) {
      void controller.reconnect();
    }
  });

  alertDismiss.addEventListener("click", () => {
    if (controller) {
      controller.dismissAlert();
    }
  });

  inputForm.addEventListener("submit", (ev) => {
    ev.preventDefault();
    if (!controller || inputBox.disabled) {
      return;
    }
    const text = inputBox.value;
    inputBox.value = "";
    if (controller.state.pendingQuestion) {
      controller.answerQuestion(text);
    } else {
      controller.submitInput(text);
    }
  });
}

main();
