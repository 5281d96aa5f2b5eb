/**
 * Sign-to-color convention, mirroring the server-side renderer exactly:
 * red family for contributions that favour White, blue for Black, neutral at
 * zero, domain clamped to the largest |phi| of the explanation.
 */

export const NEUTRAL_COLOR = "#F7F7F7";
export const POSITIVE_COLOR = "#67001F";
export const NEGATIVE_COLOR = "#053061";

function channels(hex: string): [number, number, number] {
  return [
    parseInt(hex.slice(1, 3), 16),
    parseInt(hex.slice(3, 5), 16),
    parseInt(hex.slice(5, 7), 16),
  ];
}

function mix(from: string, to: string, t: number): string {
  const [fr, fg, fb] = channels(from);
  const [tr, tg, tb] = channels(to);
  const hex = (v: number) => Math.round(v).toString(16).padStart(2, "0").toUpperCase();
  return `#${hex(fr + (tr - fr) * t)}${hex(fg + (tg - fg) * t)}${hex(fb + (tb - fb) * t)}`;
}

export function colorForPhi(phi: number, maxAbs: number): string {
  if (maxAbs === 0) return NEUTRAL_COLOR;
  const t = Math.max(-1, Math.min(1, phi / maxAbs));
  if (t === 0) return NEUTRAL_COLOR;
  return mix(NEUTRAL_COLOR, t > 0 ? POSITIVE_COLOR : NEGATIVE_COLOR, Math.abs(t));
}

export function maxAbsPhi(phis: number[]): number {
  return phis.reduce((acc, phi) => Math.max(acc, Math.abs(phi)), 0);
}
