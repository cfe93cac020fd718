/** Bar geometry for breakdown charts.
 *
 * The only place chart math lives: view modules pass metric values in
 * and get css-ready fractions back, keeping the rendering layer free of
 * arithmetic on API fields. Missing values get zero-width bars; the
 * label next to them is rendered by the view, not computed here.
 */

export function barFractions(values: (number | null)[]): number[] {
  let max = 0;
  for (const v of values) {
    if (v !== null && v > max) max = v;
  }
  if (max <= 0) return values.map(() => 0);
  return values.map((v) => (v === null || v < 0 ? 0 : v / max));
}

export function percentWidth(fraction: number): string {
  return `${(fraction * 100).toFixed(1)}%`;
}

/** The unattributed remainder band for a stacked bar whose named parts
 * must sum to the whole; clamped so bad inputs cannot produce a
 * negative width. */
export function remainderPart(total: number, parts: number[]): number {
  const claimed = parts.reduce((a, b) => a + b, 0);
  return Math.max(0, total - claimed);
}

/** Widths for one stacked bar. "stacked" sizes parts against the
 * largest bar in the chart so bars are comparable; "percent" normalizes
 * each bar to its own total. */
export function stackedFractions(
  parts: number[],
  maxTotal: number,
  mode: "stacked" | "percent",
): number[] {
  const total = parts.reduce((a, b) => a + b, 0);
  const denom = mode === "percent" ? total : maxTotal;
  if (denom <= 0) return parts.map(() => 0);
  return parts.map((p) => (p < 0 ? 0 : p / denom));
}
