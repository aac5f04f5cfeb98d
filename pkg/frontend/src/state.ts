/**
 * Session state and the command layer.
 *
 * Every mutation the UI can make — by pointer or by keyboard — is one command
 * method here, so the drawing interactions and their keyboard-accessible
 * alternatives share a single code path into put_step. A revision conflict
 * flips `conflicted`; the views then offer a reload instead of overwriting.
 */

import { ApiClient, ConflictError } from "./api.js";
import type {
  BBox, Geometry, RegionType, SessionInfo, StepPayload, StepView,
} from "./types.js";

export type Listener = () => void;

export class SessionStateError extends Error {}

export class Store {
  session: SessionInfo | null = null;
  step = 1;
  page = 0;
  zoom = 1.0;
  layers = { regions: true, order: true, grids: true, labels: true };
  selection = new Set<string>(); // op ids on the current page
  selectedRegion: string | null = null;
  conflicted = false;
  lastCascades: string[] = [];
  views = new Map<number, StepView>();
  geometries = new Map<number, Geometry>();

  private listeners: Listener[] = [];

  constructor(readonly api: ApiClient) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  protected notify(): void {
    for (const listener of this.listeners) listener();
  }

  get revision(): number {
    if (!this.session) throw new SessionStateError("no session loaded");
    return this.session.revision;
  }

  get sessionId(): string {
    if (!this.session) throw new SessionStateError("no session loaded");
    return this.session.id;
  }

  // -- loading ---------------------------------------------------------------

  async open(pdf: Blob | Uint8Array, autotag = true): Promise<void> {
    this.session = await this.api.createSession(pdf, autotag);
    await this.refresh();
  }

  async attach(sessionId: string): Promise<void> {
    this.session = await this.api.sessionInfo(sessionId);
    await this.refresh();
  }

  async reload(): Promise<void> {
    this.session = await this.api.sessionInfo(this.sessionId);
    this.conflicted = false;
    await this.refresh();
  }

  async refresh(): Promise<void> {
    this.views.set(this.step, await this.api.getStep(this.sessionId, this.step));
    this.geometries.set(this.page, await this.api.geometry(this.sessionId, this.page));
    this.notify();
  }

  async gotoStep(step: number): Promise<void> {
    if (step < 1 || step > 8) throw new SessionStateError(`no step ${step}`);
    this.step = step;
    await this.refresh();
  }

  async gotoPage(page: number): Promise<void> {
    if (!this.session || page < 0 || page >= this.session.pages) return;
    this.page = page;
    this.selection.clear();
    await this.refresh();
  }

  setZoom(zoom: number): void {
    this.zoom = Math.min(4, Math.max(0.25, zoom));
    this.notify();
  }

  toggleLayer(name: keyof Store["layers"]): void {
    this.layers[name] = !this.layers[name];
    this.notify();
  }

  toggleOpSelection(opId: string): void {
    if (this.selection.has(opId)) this.selection.delete(opId);
    else this.selection.add(opId);
    this.notify();
  }

  // -- the single write path ---------------------------------------------------

  async put(step: number, payload: StepPayload): Promise<string[]> {
    if (this.conflicted) {
      throw new SessionStateError("session is stale; reload before editing");
    }
    try {
      const result = await this.api.putStep(this.sessionId, step, payload, this.revision);
      this.session = { ...this.session!, revision: result.revision };
      this.lastCascades = result.cascades;
      await this.refresh();
      return result.cascades;
    } catch (error) {
      if (error instanceof ConflictError) {
        this.conflicted = true;
        this.notify();
      }
      throw error;
    }
  }

  // -- step 1: regions -----------------------------------------------------------

  async autoDetectRegions(confirmReplace: boolean): Promise<void> {
    await this.put(1, { op: "auto_detect", confirm_replace: confirmReplace });
  }

  async createRegionFromSelection(rtype: RegionType): Promise<void> {
    if (this.selection.size === 0) {
      throw new SessionStateError("select untagged content first");
    }
    await this.put(1, {
      op: "create",
      page: this.page,
      op_ids: [...this.selection].sort(),
      rtype,
    });
    this.selection.clear();
  }

  async deleteRegions(ids: string[]): Promise<void> {
    await this.put(1, { op: "delete", ids });
  }

  async resizeRegion(id: string, bbox: BBox): Promise<void> {
    await this.put(1, { op: "resize", id, bbox });
  }

  async setRegionType(id: string, rtype: RegionType): Promise<void> {
    await this.put(1, { op: "set_type", id, rtype });
  }

  // -- step 2: reading order ---------------------------------------------------

  /** Pointer path: the freehand line drawn over the page view. */
  async drawReadingOrder(points: [number, number][]): Promise<void> {
    await this.put(2, { op: "draw", page: this.page, polyline: points });
  }

  /** Keyboard path: reorder through the list, one position at a time. */
  async moveRegionToIndex(regionId: string, index: number): Promise<void> {
    await this.put(2, { op: "move", page: this.page, region: regionId, index });
  }

  async moveRegionBy(regionId: string, delta: number): Promise<void> {
    const order = this.geometries.get(this.page)?.reading_order ?? [];
    const at = order.indexOf(regionId);
    if (at < 0) throw new SessionStateError(`${regionId} is not in the reading order`);
    const target = Math.min(order.length - 1, Math.max(0, at + delta));
    if (target !== at) await this.moveRegionToIndex(regionId, target);
  }

  async demoteToArtifact(regionId: string): Promise<void> {
    await this.put(2, { op: "demote", region: regionId });
  }

  // -- step 3: headings ------------------------------------------------------------

  async setHeadingLevel(regionId: string, level: number): Promise<void> {
    await this.put(3, { op: "set_level", region: regionId, level });
  }

  async autoDetectHeadingLevels(): Promise<void> {
    await this.put(3, { op: "auto_detect" });
  }

  // -- step 4: tables (numeric inputs are the keyboard path) -----------------------

  async setTableGrid(
    regionId: string, hLines: number[], vLines: number[], headerMode: string,
  ): Promise<void> {
    await this.put(4, {
      op: "set_grid",
      region: regionId,
      h_lines: [...hLines].sort((a, b) => a - b),
      v_lines: [...vLines].sort((a, b) => a - b),
      header_mode: headerMode,
    });
  }

  /** Pointer path: a click in the page view adds one separator line. */
  async addTableLine(
    regionId: string, axis: "h" | "v", coordinate: number,
    current: { h_lines: number[]; v_lines: number[]; header_mode: string },
  ): Promise<void> {
    const h = axis === "h" ? [...current.h_lines, coordinate] : current.h_lines;
    const v = axis === "v" ? [...current.v_lines, coordinate] : current.v_lines;
    await this.setTableGrid(regionId, h, v, current.header_mode);
  }

  // -- step 5: lists ------------------------------------------------------------------

  async setListItems(
    regionId: string, separators: number[], nesting: Record<string, number>,
  ): Promise<void> {
    await this.put(5, {
      op: "set_items",
      region: regionId,
      separators: [...separators].sort((a, b) => a - b),
      nesting,
    });
  }

  // -- step 6: figures -----------------------------------------------------------------

  async setFigureAlt(regionId: string, text: string, decorative: boolean): Promise<void> {
    await this.put(6, { op: "set_alt", region: regionId, text, decorative });
  }

  // -- step 7: formulas ----------------------------------------------------------------

  async setFormulaLatex(regionId: string, latex: string): Promise<void> {
    await this.put(7, { op: "set_latex", region: regionId, latex });
  }

  async setFormulaManualAlt(regionId: string, text: string): Promise<void> {
    await this.put(7, { op: "set_alt_manual", region: regionId, text });
  }

  // -- step 8: metadata ----------------------------------------------------------------

  async setMeta(title: string, author: string, language: string): Promise<void> {
    await this.put(8, { op: "set_meta", title, author, language });
  }

  async markDone(step: number, done = true): Promise<void> {
    await this.put(step, { op: "noop", mark_done: done });
  }

  async exportPdf(): Promise<ArrayBuffer> {
    return this.api.exportPdf(this.sessionId);
  }
}

/** Word countdown mirrored client-side for instant feedback (limit 50). */
export function wordsRemaining(text: string, limit = 50): number {
  const words = text.trim().length === 0 ? 0 : text.trim().split(/\s+/).length;
  return limit - words;
}

/** Collect a pointer trail into the polyline payload (page coordinates). */
export function polylineFromTrail(trail: [number, number][]): [number, number][] {
  const out: [number, number][] = [];
  for (const point of trail) {
    const last = out[out.length - 1];
    if (!last || last[0] !== point[0] || last[1] !== point[1]) out.push(point);
  }
  return out;
}
