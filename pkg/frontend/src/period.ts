/** Inclusive date-range selection; all dates travel as YYYY-MM-DD strings. */

export interface Period {
  from: string;
  to: string;
}

const DATE_SHAPE = /^\d{4}-\d{2}-\d{2}$/;

export function isIsoDate(value: string): boolean {
  if (!DATE_SHAPE.test(value)) return false;
  const parsed = new Date(value + "T00:00:00Z");
  return !Number.isNaN(parsed.getTime()) && parsed.toISOString().slice(0, 10) === value;
}

/** A single click selects that one day. */
export function singleDay(day: string): Period | null {
  if (!isIsoDate(day)) return null;
  return { from: day, to: day };
}

/**
 * A drag or two-click selection; refused (null) when the range is inverted
 * or either end is not a real date, so no request can be issued for it.
 */
export function selectRange(from: string, to: string): Period | null {
  if (!isIsoDate(from) || !isIsoDate(to)) return null;
  if (to < from) return null;
  return { from, to };
}

export function dayCount(period: Period): number {
  const from = Date.parse(period.from + "T00:00:00Z");
  const to = Date.parse(period.to + "T00:00:00Z");
  return Math.round((to - from) / 86_400_000) + 1;
}

export function samePeriod(a: Period | null, b: Period | null): boolean {
  if (a === null || b === null) return a === b;
  return a.from === b.from && a.to === b.to;
}
