/** Payload types for the session API. The server is the source of truth. */

export type RegionType =
  | "paragraph" | "heading" | "list" | "formula" | "figure" | "caption"
  | "artifact" | "table";

export type BBox = [number, number, number, number]; // x0, y0, x1, y1 (points, y up)

export interface SessionInfo {
  id: string;
  revision: number;
  created: string;
  updated: string;
  pages: number;
  steps_done: boolean[];
}

export interface RegionEntry {
  id: string;
  bbox: BBox;
  type: RegionType;
  ops: string[];
  score?: number;
  text?: string;
}

export interface StepViewBase {
  step: number;
  revision: number;
  done: boolean;
}

export interface RegionsView extends StepViewBase {
  pages: { page: number; regions: RegionEntry[]; untagged: string[]; artifacts: string[] }[];
}

export interface OrderView extends StepViewBase {
  pages: {
    page: number;
    sequence: { region: string; bbox: BBox; type: RegionType; text: string }[];
  }[];
}

export interface HeadingsView extends StepViewBase {
  outline: {
    region: string;
    page: number;
    level: number;
    allowed_levels: number[];
    text: string;
  }[];
}

export interface TablesView extends StepViewBase {
  tables: {
    region: string;
    page: number;
    bbox: BBox;
    h_lines: number[];
    v_lines: number[];
    header_mode: string;
    cells: string[][];
  }[];
}

export interface ListsView extends StepViewBase {
  lists: {
    region: string;
    page: number;
    separators: number[];
    nesting: Record<string, number>;
    items: string[];
  }[];
}

export interface FiguresView extends StepViewBase {
  figures: {
    region: string;
    page: number;
    bbox: BBox;
    alt: string;
    decorative: boolean;
    words_remaining: number;
  }[];
  word_limit: number;
}

export interface FormulasView extends StepViewBase {
  formulas: {
    region: string;
    page: number;
    bbox: BBox;
    latex: string;
    alt: string;
    manual: boolean;
  }[];
}

export interface MetaView extends StepViewBase {
  meta: { title: string; author: string; language: string };
  steps_done: boolean[];
  pages: { page: number; regions_by_type: Record<string, number>; artifact_ops: number }[];
}

export type StepView =
  | RegionsView | OrderView | HeadingsView | TablesView | ListsView
  | FiguresView | FormulasView | MetaView;

export interface GeometryOp {
  id: string;
  kind: "text-run" | "image" | "path";
  bbox: BBox;
  text: string | null;
  font_size: number | null;
}

export interface Geometry {
  page: { index: number; width: number; height: number };
  ops: GeometryOp[];
  regions: RegionEntry[];
  reading_order: string[];
  artifacts: string[];
  grids: { region: string; h_lines: number[]; v_lines: number[]; header_mode: string }[];
  list_separators: { region: string; separators: number[] }[];
}

export type StepPayload = Record<string, unknown>;
