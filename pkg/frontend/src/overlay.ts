/**
 * Overlay models for the page view, derived purely from server geometry.
 * No client-only truth: the same geometry payload always yields the same
 * overlay, and layer toggles only filter what is drawn.
 */

import { GRID_LINE_COLOR, ORDER_LINE_COLOR, REGION_COLORS } from "./palette.js";
import type { BBox, Geometry, RegionType } from "./types.js";

export interface OverlayBox {
  region: string;
  bbox: BBox;
  color: string;
  /** Shown in the top right corner of the outline box. */
  label: string;
  rtype: RegionType;
}

export interface OverlayOrderStop {
  region: string;
  index: number; // 1-based, drawn next to the node
  x: number;
  y: number;
}

export interface OverlaySegment {
  region: string;
  x0: number;
  y0: number;
  x1: number;
  y1: number;
  color: string;
}

export interface Overlay {
  boxes: OverlayBox[];
  orderStops: OverlayOrderStop[];
  gridSegments: OverlaySegment[];
}

export interface Layers {
  regions: boolean;
  order: boolean;
  grids: boolean;
  labels: boolean;
}

function center(bbox: BBox): [number, number] {
  return [(bbox[0] + bbox[2]) / 2, (bbox[1] + bbox[3]) / 2];
}

export function buildOverlay(geometry: Geometry, layers: Layers, headingLevels?: Map<string, number>): Overlay {
  const boxes: OverlayBox[] = [];
  if (layers.regions) {
    for (const region of geometry.regions) {
      let label: string = region.type;
      if (region.type === "heading" && headingLevels?.has(region.id)) {
        label = `H${headingLevels.get(region.id)}`;
      }
      boxes.push({
        region: region.id,
        bbox: region.bbox,
        color: REGION_COLORS[region.type],
        label: layers.labels ? label : "",
        rtype: region.type,
      });
    }
  }

  const orderStops: OverlayOrderStop[] = [];
  if (layers.order) {
    const byId = new Map(geometry.regions.map((r) => [r.id, r]));
    geometry.reading_order.forEach((rid, i) => {
      const region = byId.get(rid);
      if (!region) return;
      const [x, y] = center(region.bbox);
      orderStops.push({ region: rid, index: i + 1, x, y });
    });
  }

  const gridSegments: OverlaySegment[] = [];
  if (layers.grids) {
    const byId = new Map(geometry.regions.map((r) => [r.id, r]));
    for (const grid of geometry.grids) {
      const region = byId.get(grid.region);
      if (!region) continue;
      const [x0, y0, x1, y1] = region.bbox;
      for (const y of grid.h_lines) {
        gridSegments.push({ region: grid.region, x0, y0: y, x1, y1: y, color: GRID_LINE_COLOR });
      }
      for (const x of grid.v_lines) {
        gridSegments.push({ region: grid.region, x0: x, y0, x1: x, y1, color: GRID_LINE_COLOR });
      }
    }
    for (const spec of geometry.list_separators) {
      const region = byId.get(spec.region);
      if (!region) continue;
      const [x0, , x1] = region.bbox;
      for (const y of spec.separators) {
        gridSegments.push({ region: spec.region, x0, y0: y, x1, y1: y, color: GRID_LINE_COLOR });
      }
    }
  }

  return { boxes, orderStops, gridSegments };
}

/** Polyline between consecutive order stops, for the directed line graph. */
export function orderPolyline(stops: OverlayOrderStop[]): OverlaySegment[] {
  const out: OverlaySegment[] = [];
  for (let i = 1; i < stops.length; i++) {
    out.push({
      region: stops[i].region,
      x0: stops[i - 1].x,
      y0: stops[i - 1].y,
      x1: stops[i].x,
      y1: stops[i].y,
      color: ORDER_LINE_COLOR,
    });
  }
  return out;
}
