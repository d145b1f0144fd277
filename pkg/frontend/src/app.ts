// Browser shell: wires the form state, submit flow, and agreement panel to
// the DOM. Keyboard-first: digit keys type into the focused field, Tab walks
// the five fields in rubric order, Enter submits a complete form. Agreement
// refreshes on a 2 s poll; the server stays the single source of truth.

import { agreementPanel } from './agreementPanel.js';
import { WorkbenchClient } from './api.js';
import { liveBands, liveTotal, newRatingForm, setComponent } from './ratingForm.js';
import { nextUnrated, submitFlow } from './submitFlow.js';
import { COMPONENT_NAMES, type ComponentName, type PaintingJson } from './types.js';

const POLL_MS = 2000;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function main(): void {
  const client = new WorkbenchClient('');
  let raterId = localStorage.getItem('raterId') ?? '';
  let form = newRatingForm();
  let paintings: PaintingJson[] = [];
  let current: PaintingJson | null = null;
  let inFlight = false;

  const raterInput = el<HTMLInputElement>('rater-id');
  const image = el<HTMLImageElement>('painting-image');
  const title = el<HTMLElement>('painting-title');
  const totalOut = el<HTMLElement>('live-total');
  const statusOut = el<HTMLElement>('status-line');
  const submitButton = el<HTMLButtonElement>('submit');
  const iccOut = el<HTMLElement>('agreement-icc');
  const commonOut = el<HTMLElement>('agreement-common');
  const disagreementsOut = el<HTMLElement>('agreement-disagreements');

  raterInput.value = raterId;
  raterInput.addEventListener('change', () => {
    raterId = raterInput.value.trim();
    localStorage.setItem('raterId', raterId);
    void showNext();
  });

  function renderForm(): void {
    const bands = liveBands(form);
    for (const name of COMPONENT_NAMES) {
      const input = el<HTMLInputElement>(`field-${name}`);
      const bandOut = el<HTMLElement>(`band-${name}`);
      const errorOut = el<HTMLElement>(`error-${name}`);
      bandOut.textContent = bands[name] ?? '';
      errorOut.textContent = form.fieldErrors[name] ?? '';
      if (document.activeElement !== input) {
        input.value = form.values[name] !== undefined ? String(form.values[name]) : '';
      }
    }
    totalOut.textContent = String(liveTotal(form));
    statusOut.textContent = form.submitError ?? (form.status === 'submitting' ? 'sending…' : '');
    submitButton.disabled = inFlight || raterId === '';
    submitButton.textContent = form.status === 'retry' ? 'Retry submit' : 'Submit rating';
  }

  function renderPainting(): void {
    if (!current) {
      title.textContent = 'All paintings rated — thank you';
      image.removeAttribute('src');
      return;
    }
    title.textContent = `${current.id} (${current.source}, ${current.width}×${current.height})`;
    image.src = client.imageUrl(current.id);
  }

  async function refreshAgreement(): Promise<void> {
    try {
      const view = agreementPanel(await client.agreement());
      iccOut.textContent = `ICC: ${view.iccText}`;
      commonOut.textContent = view.commonText;
      disagreementsOut.innerHTML = '';
      for (const item of view.topDisagreements) {
        const li = document.createElement('li');
        li.textContent = `${item.paintingId}: Δtotal ${item.deltaTotal.toFixed(1)}`;
        disagreementsOut.appendChild(li);
      }
    } catch {
      iccOut.textContent = 'ICC: (service unreachable)';
    }
  }

  async function showNext(after?: string): Promise<void> {
    paintings = (await client.listPaintings(1, 1000)).items;
    const nextId = raterId ? nextUnrated(paintings, raterId, after) : (paintings[0]?.id ?? null);
    current = nextId ? (paintings.find((p) => p.id === nextId) ?? null) : null;
    form = newRatingForm();
    renderPainting();
    renderForm();
  }

  for (const name of COMPONENT_NAMES) {
    const input = el<HTMLInputElement>(`field-${name}`);
    input.addEventListener('input', () => {
      if (input.value === '') return;
      form = setComponent(form, name as ComponentName, input.value);
      renderForm();
    });
    input.addEventListener('keydown', (event) => {
      if (event.key === 'Enter') {
        event.preventDefault();
        void submit();
      }
    });
  }

  async function submit(): Promise<void> {
    if (!current || inFlight || raterId === '') return;
    inFlight = true;
    form = { ...form, status: 'submitting' };
    renderForm();
    const outcome = await submitFlow(form, current, raterId, client);
    inFlight = false;
    form = outcome.form;
    if (outcome.advanced) {
      await showNext(current.id);
      await refreshAgreement();
      const first = el<HTMLInputElement>(`field-${COMPONENT_NAMES[0]}`);
      first.focus();
    } else {
      renderForm();
    }
  }

  submitButton.addEventListener('click', () => void submit());

  void showNext();
  void refreshAgreement();
  setInterval(() => void refreshAgreement(), POLL_MS);
}

document.addEventListener('DOMContentLoaded', main);
