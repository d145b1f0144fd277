// Quality band labels for a single component score (0-20).
// The live form shows these next to each input; they are display hints only,
// every authoritative number comes from the service.

export type BandName = 'Poor' | 'Fair' | 'Good' | 'Excellent';

/**
 * Band containing a component score. A 0 falls into Poor.
 * @throws RangeError outside [0, 20]
 */
export function bandOf(component: number): BandName {
  if (!Number.isFinite(component) || component < 0 || component > 20) {
    throw new RangeError(`component score ${component} outside [0, 20]`);
  }
  if (component <= 5) return 'Poor';
  if (component <= 10) return 'Fair';
  if (component <= 15) return 'Good';
  return 'Excellent';
}
