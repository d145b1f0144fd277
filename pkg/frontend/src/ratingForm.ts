// Rating form state: five integer inputs (0-20), a live total, and per-field
// band labels. Inputs outside the range are rejected at entry and leave the
// stored value untouched. The form never computes anything beyond the live
// total; agreement and comparisons come from the service.

import { bandOf, type BandName } from './bands.js';
import { COMPONENT_NAMES, type ComponentName, type ComponentScores } from './types.js';

export type SubmissionStatus = 'idle' | 'submitting' | 'submitted' | 'invalid' | 'retry';

export interface RatingFormState {
  values: Partial<ComponentScores>;
  dirty: boolean;
  status: SubmissionStatus;
  fieldErrors: Partial<Record<ComponentName, string>>;
  submitError: string | null;
}

export function newRatingForm(): RatingFormState {
  return { values: {}, dirty: false, status: 'idle', fieldErrors: {}, submitError: null };
}

/**
 * Validate and store one component entry. Non-integers and values outside
 * [0, 20] are rejected: the field error is set and the previous value kept.
 */
export function setComponent(
  form: RatingFormState,
  name: ComponentName,
  raw: number | string,
): RatingFormState {
  const value = typeof raw === 'string' ? Number(raw.trim()) : raw;
  const errors = { ...form.fieldErrors };
  if (!Number.isInteger(value) || value < 0 || value > 20) {
    errors[name] = `${name} must be an integer between 0 and 20`;
    return { ...form, fieldErrors: errors, dirty: true };
  }
  delete errors[name];
  return {
    ...form,
    values: { ...form.values, [name]: value },
    fieldErrors: errors,
    dirty: true,
    submitError: null,
  };
}

/** Sum of the currently entered components (missing fields count 0). */
export function liveTotal(form: RatingFormState): number {
  return COMPONENT_NAMES.reduce((sum, name) => sum + (form.values[name] ?? 0), 0);
}

/** Band label per component; null until the field has a value. */
export function liveBands(form: RatingFormState): Record<ComponentName, BandName | null> {
  const out = {} as Record<ComponentName, BandName | null>;
  for (const name of COMPONENT_NAMES) {
    const value = form.values[name];
    out[name] = value === undefined ? null : bandOf(value);
  }
  return out;
}

/** True once every component has a valid value and no field error remains. */
export function isComplete(form: RatingFormState): boolean {
  return (
    COMPONENT_NAMES.every((name) => form.values[name] !== undefined) &&
    Object.keys(form.fieldErrors).length === 0
  );
}

/** The payload component block; only valid on a complete form. */
export function componentPayload(form: RatingFormState): ComponentScores {
  if (!isComplete(form)) {
    throw new Error('form is incomplete');
  }
  return Object.fromEntries(
    COMPONENT_NAMES.map((name) => [name, form.values[name] as number]),
  ) as ComponentScores;
}
