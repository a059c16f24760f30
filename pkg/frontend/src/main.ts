// DOM wiring for the editor page.  All semantic truth comes from the
// server; this file only renders state from the tested logic modules.

import { ApiClient, Diagnostic } from './api.js';
import { highlight } from './highlight.js';
import { KEYWORDS, offsetOf } from './tokens.js';
import {
  EditorSessionState, applyValidation, diagnosticsStale, editSource,
  errorCount, initialSession, loadExample,
} from './session.js';

const api = new ApiClient('');
let session: EditorSessionState = initialSession();

const el = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

const sourceArea = () => el<HTMLTextAreaElement>('source');
const highlightCode = () => el<HTMLElement>('highlight-code');

function renderSource(): void {
  const source = session.source;
  if (sourceArea().value !== source) sourceArea().value = source;
  // trailing newline keeps the overlay aligned on the last line
  highlightCode().innerHTML = highlight(source) + '\n';
  renderStatus();
}

function renderStatus(): void {
  const status = el<HTMLSpanElement>('status');
  if (session.lastDiagnostics === null) {
    status.textContent = 'not validated yet';
    status.className = 'status-neutral';
    return;
  }
  const errors = errorCount(session);
  const stale = diagnosticsStale(session) ? ' (stale: source edited)' : '';
  if (errors === 0) {
    status.textContent = `0 problems${stale}`;
    status.className = stale ? 'status-stale' : 'status-ok';
  } else {
    status.textContent = `${errors} problem${errors === 1 ? '' : 's'}${stale}`;
    status.className = stale ? 'status-stale' : 'status-bad';
  }
}

function renderDiagnostics(): void {
  const list = el<HTMLUListElement>('diagnostics-list');
  list.textContent = '';
  const diagnostics = session.lastDiagnostics ?? [];
  for (const diag of diagnostics) {
    const item = document.createElement('li');
    item.className = `diag diag-${diag.severity.toLowerCase()}`;
    item.textContent =
      `${diag.severity} ${diag.code} ${diag.line}:${diag.col} ${diag.message}`;
    item.addEventListener('click', () => moveCursorTo(diag));
    list.appendChild(item);
  }
  renderStatus();
}

function moveCursorTo(diag: Diagnostic): void {
  const area = sourceArea();
  const offset = offsetOf(session.source, diag.line, diag.col);
  area.focus();
  area.setSelectionRange(offset, offset);
  const lineHeight = 18;
  area.scrollTop = Math.max(0, (diag.line - 5) * lineHeight);
  syncScroll();
}

function showBanner(message: string): void {
  const banner = el<HTMLDivElement>('banner');
  banner.textContent = message;
  banner.hidden = false;
  window.setTimeout(() => { banner.hidden = true; }, 6000);
}

function syncScroll(): void {
  const layer = el<HTMLPreElement>('highlight-layer');
  layer.scrollTop = sourceArea().scrollTop;
  layer.scrollLeft = sourceArea().scrollLeft;
}

async function doValidate(): Promise<void> {
  const button = el<HTMLButtonElement>('btn-validate');
  button.disabled = true;
  try {
    const result = await api.validate(session.source);
    if (result === null) return; // superseded by a newer request
    session = applyValidation(session, result.diagnostics);
    renderDiagnostics();
  } catch (err) {
    showBanner(`validation request failed: ${(err as Error).message}`);
  } finally {
    button.disabled = false;
  }
}

function triggerDownload(data: ArrayBuffer, filename: string): void {
  const url = URL.createObjectURL(
    new Blob([data], { type: 'application/zip' }));
  const anchor = document.createElement('a');
  anchor.href = url;
  anchor.download = filename;
  document.body.appendChild(anchor);
  anchor.click();
  anchor.remove();
  URL.revokeObjectURL(url);
}

async function doGenerate(): Promise<void> {
  const button = el<HTMLButtonElement>('btn-generate');
  const config = el<HTMLInputElement>('config-name').value.trim() || 'Main';
  button.disabled = true;
  try {
    const result = await api.generate(session.source, config,
                                      session.selectedExample ?? undefined);
    if (result === null) return;
    if (result.kind === 'zip') {
      triggerDownload(result.data, result.filename);
      showBanner(`downloaded ${result.filename}`);
    } else if (result.kind === 'diagnostics') {
      session = applyValidation(session, result.diagnostics);
      renderDiagnostics();
    } else if (result.status === 404) {
      showBanner(`configuration not found: ${config}`);
    } else {
      showBanner(`generation failed (${result.status}): ${result.detail}`);
    }
  } catch (err) {
    showBanner(`generation request failed: ${(err as Error).message}`);
  } finally {
    button.disabled = false;
  }
}

function insertKeyword(word: string): void {
  const area = sourceArea();
  const start = area.selectionStart;
  const next = session.source.slice(0, start) + word +
    session.source.slice(area.selectionEnd);
  session = editSource(session, next);
  renderSource();
  area.focus();
  area.setSelectionRange(start + word.length, start + word.length);
}

function buildKeywordBar(): void {
  const bar = el<HTMLDivElement>('keyword-bar');
  for (const word of KEYWORDS) {
    const chip = document.createElement('button');
    chip.className = 'kw-chip';
    chip.textContent = word;
    chip.title = `insert "${word}" at the cursor`;
    chip.addEventListener('click', () => insertKeyword(word));
    bar.appendChild(chip);
  }
}

async function loadExampleByName(name: string): Promise<void> {
  const select = el<HTMLSelectElement>('example-select');
  const option = Array.from(select.options).find((o) => o.value === name);
  const source = option?.dataset.source ?? '';
  session = loadExample(session, name, source);
  renderSource();
  renderDiagnostics();
}

async function init(): Promise<void> {
  buildKeywordBar();
  sourceArea().addEventListener('input', () => {
    session = editSource(session, sourceArea().value);
    highlightCode().innerHTML = highlight(session.source) + '\n';
    renderStatus();
  });
  sourceArea().addEventListener('scroll', syncScroll);
  el<HTMLButtonElement>('btn-validate')
    .addEventListener('click', () => { void doValidate(); });
  el<HTMLButtonElement>('btn-generate')
    .addEventListener('click', () => { void doGenerate(); });

  const select = el<HTMLSelectElement>('example-select');
  select.addEventListener('change', () => {
    void loadExampleByName(select.value);
  });
  try {
    const examples = await api.examples();
    for (const example of examples) {
      const option = document.createElement('option');
      option.value = example.name;
      option.textContent = example.name;
      option.dataset.source = example.source;
      select.appendChild(option);
    }
    if (examples.length > 0) {
      select.value = examples[0].name;
      await loadExampleByName(examples[0].name);
    }
  } catch (err) {
    showBanner(`could not load examples: ${(err as Error).message}`);
  }
}

window.addEventListener('DOMContentLoaded', () => { void init(); });
