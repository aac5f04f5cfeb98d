/**
 * Region colors: a colorblind-safe set (Okabe-Ito derived, darkened where
 * needed for contrast on the white page). No pair differs only along the
 * red-green axis, and every color keeps ample contrast against white.
 */

import type { RegionType } from "./types.js";

export const REGION_COLORS: Record<RegionType, string> = {
  paragraph: "#0072B2", // blue
  heading: "#B94700",   // dark vermillion
  list: "#007A5B",      // bluish green
  formula: "#A5537F",   // reddish purple
  figure: "#7A5B20",    // dark bronze
  caption: "#285A8F",   // slate blue
  artifact: "#5C5C5C",  // gray
  table: "#1A1A1A",     // near black
};

export const ORDER_LINE_COLOR = "#4B0082"; // indigo, distinct from all region colors
export const SELECTION_COLOR = "#B8860B";  // dark goldenrod
export const GRID_LINE_COLOR = "#6A3D9A";

export function hexToRgb(hex: string): [number, number, number] {
  const v = hex.replace("#", "");
  return [
    parseInt(v.slice(0, 2), 16),
    parseInt(v.slice(2, 4), 16),
    parseInt(v.slice(4, 6), 16),
  ];
}

function channel(c: number): number {
  const s = c / 255;
  return s <= 0.03928 ? s / 12.92 : Math.pow((s + 0.055) / 1.055, 2.4);
}

export function relativeLuminance(hex: string): number {
  const [r, g, b] = hexToRgb(hex);
  return 0.2126 * channel(r) + 0.7152 * channel(g) + 0.0722 * channel(b);
}

export function contrastRatio(a: string, b: string): number {
  const la = relativeLuminance(a);
  const lb = relativeLuminance(b);
  const [hi, lo] = la > lb ? [la, lb] : [lb, la];
  return (hi + 0.05) / (lo + 0.05);
}

/**
 * Rough deuteranopia simulation: project out the red-green difference.
 * Colors that survive this projection at a distance are distinguishable
 * without red-green vision.
 */
export function deuteranopiaProject(hex: string): [number, number, number] {
  const [r, g, b] = hexToRgb(hex);
  const merged = 0.55 * r + 0.45 * g;
  return [merged, merged, b];
}

export function colorDistance(a: [number, number, number], b: [number, number, number]): number {
  return Math.hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}
