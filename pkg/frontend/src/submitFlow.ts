// Submission flow: POST the completed form, then advance to the next unrated
// painting. A 422 surfaces as an inline field error and does not advance; a
// network failure preserves the form and asks for a retry. At most one
// submission is in flight; the UI is not optimistic (server ack required).

import { ApiError, WorkbenchClient } from './api.js';
import {
  componentPayload,
  isComplete,
  newRatingForm,
  type RatingFormState,
} from './ratingForm.js';
import { COMPONENT_NAMES, type AgreementSnapshotJson, type PaintingJson } from './types.js';

export interface SubmitOutcome {
  form: RatingFormState;
  advanced: boolean;
  nextPaintingId: string | null;
  agreement: AgreementSnapshotJson | null;
}

/** First painting the rater has not yet rated, in manifest order. */
export function nextUnrated(
  paintings: PaintingJson[],
  raterId: string,
  after?: string,
): string | null {
  const start = after ? paintings.findIndex((p) => p.id === after) + 1 : 0;
  const pending = (p: PaintingJson) => !p.ratings.some((r) => r.rater_id === raterId);
  for (const p of paintings.slice(start)) {
    if (pending(p)) return p.id;
  }
  for (const p of paintings.slice(0, start)) {
    if (pending(p)) return p.id;
  }
  return null;
}

/**
 * Submit the form for one painting and compute what the UI does next.
 * The returned form is reset only on success.
 */
export async function submitFlow(
  form: RatingFormState,
  painting: PaintingJson,
  raterId: string,
  client: WorkbenchClient,
): Promise<SubmitOutcome> {
  if (!isComplete(form)) {
    return {
      form: { ...form, status: 'invalid', submitError: 'fill in all five components' },
      advanced: false,
      nextPaintingId: null,
      agreement: null,
    };
  }
  let response;
  try {
    response = await client.submitRating(painting.id, raterId, componentPayload(form));
  } catch (error) {
    if (error instanceof ApiError && error.status === 422) {
      const fieldErrors = { ...form.fieldErrors };
      const named = COMPONENT_NAMES.find((name) => error.detail.includes(name));
      if (named) fieldErrors[named] = error.detail;
      return {
        form: {
          ...form,
          status: 'invalid',
          fieldErrors,
          submitError: error.detail,
        },
        advanced: false,
        nextPaintingId: null,
        agreement: null,
      };
    }
    // network failure or server error: keep everything, offer retry
    const message = error instanceof Error ? error.message : String(error);
    return {
      form: { ...form, status: 'retry', submitError: message },
      advanced: false,
      nextPaintingId: null,
      agreement: null,
    };
  }
  const page = await client.listPaintings(1, 1000);
  return {
    form: newRatingForm(),
    advanced: true,
    nextPaintingId: nextUnrated(page.items, raterId, painting.id),
    agreement: response.agreement,
  };
}
