/** Display formatting. Every probability shown in the UI is the API value
 * rounded half-even to 3 decimals; nothing else touches the numbers. */

/** Round a probability in [0, 1] to 3 decimals with ties going to even. */
export function roundHalfEven3(x: number): number {
  const scaled = x * 1000;
  const floor = Math.floor(scaled);
  const diff = scaled - floor;
  let units: number;
  if (diff > 0.5) {
    units = floor + 1;
  } else if (diff < 0.5) {
    units = floor;
  } else {
    units = floor % 2 === 0 ? floor : floor + 1;
  }
  return units / 1000;
}

/** Fixed three-decimal text of the half-even-rounded value. */
export function formatProb(x: number): string {
  const units = Math.round(roundHalfEven3(x) * 1000);
  const whole = Math.floor(units / 1000);
  const frac = String(units % 1000).padStart(3, "0");
  return `${whole}.${frac}`;
}

/** Percent width for bar rendering (layout only, never displayed as text). */
export function barWidthPct(x: number): string {
  return `${Math.max(0, Math.min(100, x * 100))}%`;
}
