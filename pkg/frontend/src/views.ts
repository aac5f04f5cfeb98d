/**
 * DOM rendering: step navigation on the left, the step workspace in the
 * center, the schematic page view with overlays on the right. Rendering is a
 * pure function of the Store; every mutation goes through Store commands.
 */

import { ValidationError } from "./api.js";
import { buildOverlay, orderPolyline } from "./overlay.js";
import { REGION_COLORS, SELECTION_COLOR } from "./palette.js";
import { Store, polylineFromTrail, wordsRemaining } from "./state.js";
import type {
  BBox, FiguresView, FormulasView, Geometry, HeadingsView, ListsView,
  MetaView, OrderView, RegionType, RegionsView, TablesView,
} from "./types.js";

const STEP_NAMES = [
  "1 Regions", "2 Reading Order", "3 Heading Levels", "4 Tables",
  "5 Lists", "6 Figures", "7 Formulas", "8 Meta & Review",
];

const STEP_HELP = [
  "Mark the regions on this page: select untagged content in the page view and give it a type, or run automatic detection. Delete or resize regions and change their type in the list below.",
  "Put the regions of each page into the order a screen reader should follow. Draw a line across the regions in reading order, or reorder the list with the arrow controls (Alt+Arrow keys work too). Regions the line misses keep their old order.",
  "Give every heading its level. The choices are restricted to levels that keep the outline valid; automatic detection ranks headings by font size and can be corrected afterwards.",
  "Split each table into rows and columns: click inside the table to place lines (switch between row and column lines), or type the line positions. Then say which cells are headers.",
  "Split each list into items by placing horizontal separators, by clicking or by typing positions. Nest an item under another to make a list inside a list.",
  "Write a short description for every figure; the counter counts down from 50 words. Purely decorative figures can be marked as such instead.",
  "Check each formula's notation, fix it in the code box or with the keyboard below, and the spoken text regenerates automatically. You can also replace the spoken text by hand.",
  "Fill in title, author, and language, review each page's overlay, and export the tagged file. Everything else the standard requires is set automatically.",
];

const REGION_TYPES: RegionType[] = [
  "paragraph", "heading", "list", "formula", "figure", "caption", "artifact", "table",
];

const MATH_KEYS: [string, string][] = [
  ["frac", "\\frac{a}{b}"], ["sqrt", "\\sqrt{x}"], ["x^n", "x^{n}"],
  ["x_n", "x_{n}"], ["sum", "\\sum_{i = 1}^{n}"], ["int", "\\int_{0}^{1}"],
  ["<=", "\\leq"], [">=", "\\geq"], ["!=", "\\neq"], ["times", "\\times"],
  ["alpha", "\\alpha"], ["beta", "\\beta"], ["pi", "\\pi"],
];

type Mode = { kind: "idle" } | { kind: "draw-order"; trail: [number, number][] }
  | { kind: "table-lines"; axis: "h" | "v"; region: string }
  | { kind: "list-lines"; region: string };

let mode: Mode = { kind: "idle" };

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, attrs: Record<string, string> = {}, ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") node.className = v;
    else node.setAttribute(k, v);
  }
  node.append(...children);
  return node;
}

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS("http://www.w3.org/2000/svg", tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

function report(error: unknown): void {
  const box = document.getElementById("messages");
  if (!box) return;
  const text = error instanceof ValidationError
    ? `Export blocked: ${error.problems.join("; ")}`
    : String((error as Error).message ?? error);
  box.textContent = text;
  box.classList.add("visible");
  setTimeout(() => box.classList.remove("visible"), 6000);
}

function run(promise: Promise<unknown>): void {
  promise.catch(report);
}

export function renderApp(root: HTMLElement, store: Store): void {
  root.replaceChildren();
  if (!store.session) {
    root.append(renderUpload(store));
    return;
  }
  const banner = store.conflicted
    ? el(
        "div", { class: "conflict", role: "alert" },
        "Someone else changed this session. ",
        button("Reload latest", () => run(store.reload())),
      )
    : el("div");
  root.append(
    banner,
    el(
      "div", { class: "panes" },
      renderNav(store),
      renderWorkspace(store),
      renderPageView(store),
    ),
    el("div", { id: "messages", class: "messages", role: "status" }),
  );
}

function button(label: string, onClick: () => void, attrs: Record<string, string> = {}): HTMLButtonElement {
  const b = el("button", { type: "button", ...attrs }, label);
  b.addEventListener("click", onClick);
  return b;
}

function renderUpload(store: Store): HTMLElement {
  const input = el("input", { type: "file", accept: "application/pdf" });
  const auto = el("input", { type: "checkbox", id: "auto", checked: "checked" });
  const open = button("Start remediation", () => {
    const file = (input as HTMLInputElement).files?.[0];
    if (file) run(store.open(file, (auto as HTMLInputElement).checked));
  });
  return el(
    "div", { class: "upload" },
    el("h1", {}, "pdfremedy"),
    el("p", {}, "Upload a PDF to make it readable for screen readers, step by step."),
    input,
    el("label", { for: "auto" }, auto, " detect regions automatically"),
    open,
  );
}

function renderNav(store: Store): HTMLElement {
  const items = STEP_NAMES.map((name, i) => {
    const step = i + 1;
    const done = store.session?.steps_done[i] ? " done" : "";
    const current = store.step === step ? "true" : "false";
    const b = button(
      name + (store.session?.steps_done[i] ? " ✓" : ""),
      () => run(store.gotoStep(step)),
      { "aria-current": current, class: `nav-step${done}` },
    );
    return el("li", {}, b);
  });
  return el("nav", { class: "pane nav", "aria-label": "steps" }, el("ol", {}, ...items));
}

function instruction(step: number): HTMLElement {
  return el("div", { class: "instruction" }, STEP_HELP[step - 1]);
}

function doneToggle(store: Store): HTMLElement {
  const view = store.views.get(store.step);
  const checked = view?.done ?? false;
  const box = el("input", { type: "checkbox", id: "done" }) as HTMLInputElement;
  box.checked = checked;
  box.addEventListener("change", () => run(store.markDone(store.step, box.checked)));
  return el("label", { class: "done-toggle", for: "done" }, box, " step completed");
}

function renderWorkspace(store: Store): HTMLElement {
  const body = el("div", { class: "workspace-body" });
  switch (store.step) {
    case 1: body.append(...regionsWorkspace(store)); break;
    case 2: body.append(...orderWorkspace(store)); break;
    case 3: body.append(...headingsWorkspace(store)); break;
    case 4: body.append(...tablesWorkspace(store)); break;
    case 5: body.append(...listsWorkspace(store)); break;
    case 6: body.append(...figuresWorkspace(store)); break;
    case 7: body.append(...formulasWorkspace(store)); break;
    default: body.append(...metaWorkspace(store));
  }
  return el(
    "section", { class: "pane workspace", "aria-label": "workspace" },
    instruction(store.step), body, doneToggle(store),
  );
}

function regionsWorkspace(store: Store): HTMLElement[] {
  const view = store.views.get(1) as RegionsView | undefined;
  const page = view?.pages.find((p) => p.page === store.page);
  const typePick = el("select", { "aria-label": "type for new region" }) as HTMLSelectElement;
  for (const t of REGION_TYPES) typePick.append(el("option", { value: t }, t));
  const createRow = el(
    "div", { class: "row" },
    button("Detect regions", () => {
      const existing = (page?.regions.length ?? 0) > 0;
      const go = !existing || confirm("Detection replaces the regions you already have. Continue?");
      if (go) run(store.autoDetectRegions(true));
    }),
    button(`Create region from selection (${store.selection.size})`, () =>
      run(store.createRegionFromSelection(typePick.value as RegionType)),
    ),
    typePick,
  );
  const list = el("ul", { class: "region-list" });
  for (const region of page?.regions ?? []) {
    const pick = el("select", { "aria-label": `type of ${region.id}` }) as HTMLSelectElement;
    for (const t of REGION_TYPES) {
      const opt = el("option", { value: t }, t);
      if (t === region.type) opt.setAttribute("selected", "selected");
      pick.append(opt);
    }
    pick.addEventListener("change", () =>
      run(store.setRegionType(region.id, pick.value as RegionType)),
    );
    const item = el(
      "li", { class: store.selectedRegion === region.id ? "selected" : "" },
      el("span", { class: "swatch", style: `background:${REGION_COLORS[region.type]}` }),
      el("code", {}, region.id), " ", pick, " ",
      button("Delete", () => run(store.deleteRegions([region.id]))),
      el("div", { class: "region-text" }, region.text ?? ""),
    );
    item.addEventListener("click", () => {
      store.selectedRegion = region.id;
      renderApp(document.getElementById("app")!, store);
    });
    list.append(item);
  }
  const untagged = el(
    "p", {}, `${page?.untagged.length ?? 0} untagged ops on this page; ` +
    `${page?.artifacts.length ?? 0} in the artifact pool.`,
  );
  return [createRow, untagged, list];
}

function orderWorkspace(store: Store): HTMLElement[] {
  const view = store.views.get(2) as OrderView | undefined;
  const page = view?.pages.find((p) => p.page === store.page);
  const drawBtn = button(
    mode.kind === "draw-order" ? "Drawing... (click-drag on the page)" : "Draw reading order",
    () => {
      mode = mode.kind === "draw-order" ? { kind: "idle" } : { kind: "draw-order", trail: [] };
      renderApp(document.getElementById("app")!, store);
    },
  );
  const list = el("ol", { class: "order-list", "aria-label": "reading order" });
  const sequence = page?.sequence ?? [];
  sequence.forEach((entry, i) => {
    list.append(
      el(
        "li", {},
        el("span", { class: "swatch", style: `background:${REGION_COLORS[entry.type]}` }),
        el("span", { class: "order-text" }, `${entry.text || entry.region}`),
        button("↑", () => run(store.moveRegionToIndex(entry.region, Math.max(0, i - 1))),
          { "aria-label": `move ${entry.region} earlier` }),
        button("↓", () =>
          run(store.moveRegionToIndex(entry.region, Math.min(sequence.length - 1, i + 1))),
          { "aria-label": `move ${entry.region} later` }),
        button("artifact", () => run(store.demoteToArtifact(entry.region)),
          { "aria-label": `demote ${entry.region} to artifact` }),
      ),
    );
  });
  return [el("div", { class: "row" }, drawBtn), list];
}

function headingsWorkspace(store: Store): HTMLElement[] {
  const view = store.views.get(3) as HeadingsView | undefined;
  const auto = button("Detect levels from font sizes", () => run(store.autoDetectHeadingLevels()));
  const list = el("ol", { class: "outline" });
  for (const entry of view?.outline ?? []) {
    const pick = el("select", { "aria-label": `level of ${entry.text}` }) as HTMLSelectElement;
    for (const lv of entry.allowed_levels) {
      const opt = el("option", { value: String(lv) }, `H${lv}`);
      if (lv === entry.level) opt.setAttribute("selected", "selected");
      pick.append(opt);
    }
    pick.addEventListener("change", () =>
      run(store.setHeadingLevel(entry.region, Number(pick.value))),
    );
    const jump = button(entry.text || entry.region, () => run(store.gotoPage(entry.page)), {
      class: "link", "aria-label": `go to page ${entry.page + 1}`,
    });
    list.append(el("li", { style: `margin-left:${(entry.level - 1) * 14}px` }, pick, " ", jump));
  }
  return [el("div", { class: "row" }, auto), list];
}

function numberList(
  label: string, values: number[], onChange: (values: number[]) => void,
): HTMLElement {
  const input = el("input", {
    type: "text", value: values.map((v) => v.toFixed(1)).join(", "),
    "aria-label": label,
  }) as HTMLInputElement;
  input.addEventListener("change", () => {
    const parsed = input.value.split(",").map((s) => Number(s.trim())).filter((v) => !Number.isNaN(v));
    onChange(parsed);
  });
  return el("label", { class: "numbers" }, `${label}: `, input);
}

function tablesWorkspace(store: Store): HTMLElement[] {
  const view = store.views.get(4) as TablesView | undefined;
  const out: HTMLElement[] = [];
  for (const table of view?.tables ?? []) {
    if (table.page !== store.page) continue;
    const grid = { h_lines: table.h_lines, v_lines: table.v_lines, header_mode: table.header_mode };
    const modeBtns = el(
      "div", { class: "row" },
      button(mode.kind === "table-lines" && mode.axis === "h" && mode.region === table.region
        ? "Placing row lines..." : "Place row lines", () => {
        mode = { kind: "table-lines", axis: "h", region: table.region };
        renderApp(document.getElementById("app")!, store);
      }),
      button(mode.kind === "table-lines" && mode.axis === "v" && mode.region === table.region
        ? "Placing column lines..." : "Place column lines", () => {
        mode = { kind: "table-lines", axis: "v", region: table.region };
        renderApp(document.getElementById("app")!, store);
      }),
    );
    const headers = el("select", { "aria-label": "header cells" }) as HTMLSelectElement;
    for (const [value, label] of [
      ["none", "no header cells"], ["first_row", "first row is headers"],
      ["first_col", "first column is headers"], ["both", "first row and column"],
    ] as [string, string][]) {
      const opt = el("option", { value }, label);
      if (value === table.header_mode) opt.setAttribute("selected", "selected");
      headers.append(opt);
    }
    headers.addEventListener("change", () =>
      run(store.setTableGrid(table.region, table.h_lines, table.v_lines, headers.value)),
    );
    const preview = el("table", { class: "cells" });
    for (const row of table.cells) {
      preview.append(el("tr", {}, ...row.map((cell) => el("td", {}, cell))));
    }
    out.push(
      el(
        "div", { class: "object-card" },
        el("h3", {}, `Table ${table.region}`),
        modeBtns,
        numberList("row line positions", table.h_lines, (v) =>
          run(store.setTableGrid(table.region, v, table.v_lines, table.header_mode))),
        numberList("column line positions", table.v_lines, (v) =>
          run(store.setTableGrid(table.region, table.h_lines, v, table.header_mode))),
        el("div", { class: "row" }, headers),
        preview,
      ),
    );
  }
  if (!out.length) out.push(el("p", {}, "No table regions on this page."));
  return out;
}

function listsWorkspace(store: Store): HTMLElement[] {
  const view = store.views.get(5) as ListsView | undefined;
  const out: HTMLElement[] = [];
  for (const spec of view?.lists ?? []) {
    if (spec.page !== store.page) continue;
    const placing = mode.kind === "list-lines" && mode.region === spec.region;
    const place = button(placing ? "Placing separators..." : "Place separators", () => {
      mode = placing ? { kind: "idle" } : { kind: "list-lines", region: spec.region };
      renderApp(document.getElementById("app")!, store);
    });
    const items = el("ol", { class: "items" });
    spec.items.forEach((text, i) => {
      const parent = el("select", { "aria-label": `nest item ${i + 1} under` }) as HTMLSelectElement;
      parent.append(el("option", { value: "" }, "top level"));
      spec.items.forEach((_, j) => {
        if (j !== i) {
          const opt = el("option", { value: String(j) }, `under item ${j + 1}`);
          if (spec.nesting[String(i)] === j) opt.setAttribute("selected", "selected");
          parent.append(opt);
        }
      });
      parent.addEventListener("change", () => {
        const nesting = { ...spec.nesting };
        if (parent.value === "") delete nesting[String(i)];
        else nesting[String(i)] = Number(parent.value);
        run(store.setListItems(spec.region, spec.separators, nesting));
      });
      items.append(el("li", {}, el("span", {}, text || `item ${i + 1}`), " ", parent));
    });
    out.push(
      el(
        "div", { class: "object-card" },
        el("h3", {}, `List ${spec.region}`),
        el("div", { class: "row" }, place),
        numberList("separator positions", spec.separators, (v) =>
          run(store.setListItems(spec.region, v, spec.nesting))),
        items,
      ),
    );
  }
  if (!out.length) out.push(el("p", {}, "No list regions on this page."));
  return out;
}

function figuresWorkspace(store: Store): HTMLElement[] {
  const view = store.views.get(6) as FiguresView | undefined;
  const out: HTMLElement[] = [];
  for (const figure of view?.figures ?? []) {
    const text = el("textarea", { rows: "4", "aria-label": "alternative text" }) as HTMLTextAreaElement;
    text.value = figure.alt;
    const counter = el("span", {
      class: figure.words_remaining < 0 ? "countdown over" : "countdown",
      role: "status",
    }, String(figure.words_remaining));
    text.addEventListener("input", () => {
      const left = wordsRemaining(text.value, 50);
      counter.textContent = String(left);
      counter.className = left < 0 ? "countdown over" : "countdown";
    });
    const decorative = el("input", { type: "checkbox" }) as HTMLInputElement;
    decorative.checked = figure.decorative;
    const save = button("Save description", () =>
      run(store.setFigureAlt(figure.region, text.value, decorative.checked)),
    );
    out.push(
      el(
        "div", { class: "object-card" },
        el("h3", {}, `Figure ${figure.region} (page ${figure.page + 1})`),
        text,
        el("div", { class: "row" }, "words left: ", counter),
        el("label", {}, decorative, " decorative (skipped by screen readers)"),
        el("div", { class: "row" }, save),
      ),
    );
  }
  if (!out.length) out.push(el("p", {}, "No figures in this document."));
  return out;
}

function formulasWorkspace(store: Store): HTMLElement[] {
  const view = store.views.get(7) as FormulasView | undefined;
  const out: HTMLElement[] = [];
  for (const formula of view?.formulas ?? []) {
    const code = el("textarea", { rows: "3", "aria-label": "formula notation" }) as HTMLTextAreaElement;
    code.value = formula.latex;
    const keys = el("div", { class: "math-keys", role: "group", "aria-label": "math keyboard" });
    for (const [label, snippet] of MATH_KEYS) {
      keys.append(button(label, () => {
        const at = code.selectionStart ?? code.value.length;
        code.value = code.value.slice(0, at) + snippet + code.value.slice(at);
        code.focus();
      }));
    }
    const spoken = el("p", { class: "spoken", role: "status" },
      formula.alt ? `Spoken: ${formula.alt}` : "No spoken text yet.");
    const manual = el("textarea", { rows: "2", "aria-label": "manual spoken text" }) as HTMLTextAreaElement;
    manual.value = formula.manual ? formula.alt : "";
    out.push(
      el(
        "div", { class: "object-card" },
        el("h3", {}, `Formula ${formula.region} (page ${formula.page + 1})`),
        el("div", { class: "formula-area" },
          el("div", { class: "formula-box" }, "original at ",
            el("code", {}, formula.bbox.map((v) => v.toFixed(0)).join(", "))),
          code),
        keys,
        el("div", { class: "row" },
          button("Regenerate spoken text", () => run(store.setFormulaLatex(formula.region, code.value)))),
        spoken,
        el("details", {},
          el("summary", {}, "replace spoken text manually"),
          manual,
          button("Save manual text", () =>
            run(store.setFormulaManualAlt(formula.region, manual.value)))),
      ),
    );
  }
  if (!out.length) out.push(el("p", {}, "No formulas in this document."));
  return out;
}

function metaWorkspace(store: Store): HTMLElement[] {
  const view = store.views.get(8) as MetaView | undefined;
  const title = el("input", { type: "text", "aria-label": "title" }) as HTMLInputElement;
  title.value = view?.meta.title ?? "";
  const author = el("input", { type: "text", "aria-label": "author" }) as HTMLInputElement;
  author.value = view?.meta.author ?? "";
  const language = el("input", { type: "text", "aria-label": "language" }) as HTMLInputElement;
  language.value = view?.meta.language ?? "";
  const save = button("Save metadata", () =>
    run(store.setMeta(title.value, author.value, language.value)),
  );
  const download = button("Export tagged PDF", () =>
    run(
      store.exportPdf().then((bytes) => {
        const url = URL.createObjectURL(new Blob([bytes], { type: "application/pdf" }));
        const a = el("a", { href: url, download: "tagged.pdf" });
        document.body.append(a);
        a.click();
        a.remove();
      }),
    ),
  );
  const review = el("ul", {});
  for (const page of view?.pages ?? []) {
    const counts = Object.entries(page.regions_by_type)
      .map(([k, v]) => `${v} ${k}`).join(", ");
    review.append(el(
      "li", {},
      button(`page ${page.page + 1}`, () => run(store.gotoPage(page.page)), { class: "link" }),
      ` ${counts || "empty"}; ${page.artifact_ops} artifact ops`,
    ));
  }
  return [
    el("label", {}, "Title ", title),
    el("label", {}, "Author ", author),
    el("label", {}, "Language ", language),
    el("div", { class: "row" }, save, download),
    el("h3", {}, "Page review"),
    review,
  ];
}

// -- the page view ------------------------------------------------------------------

function renderPageView(store: Store): HTMLElement {
  const geometry = store.geometries.get(store.page);
  const pane = el("section", { class: "pane pageview", "aria-label": "page view" });
  const toggles = el("div", { class: "row layers" });
  for (const name of ["regions", "order", "grids", "labels"] as const) {
    const box = el("input", { type: "checkbox", id: `layer-${name}` }) as HTMLInputElement;
    box.checked = store.layers[name];
    box.addEventListener("change", () => store.toggleLayer(name));
    toggles.append(el("label", { for: `layer-${name}` }, box, ` ${name}`));
  }
  const zoom = el(
    "div", { class: "row" },
    button("−", () => store.setZoom(store.zoom / 1.25), { "aria-label": "zoom out" }),
    el("span", {}, ` ${Math.round(store.zoom * 100)}% `),
    button("+", () => store.setZoom(store.zoom * 1.25), { "aria-label": "zoom in" }),
    el("span", { class: "page-indicator" },
      ` page ${store.page + 1} / ${store.session?.pages ?? 1} `),
    button("prev", () => run(store.gotoPage(store.page - 1))),
    button("next", () => run(store.gotoPage(store.page + 1))),
  );
  pane.append(toggles, zoom);
  if (!geometry) {
    pane.append(el("p", {}, "loading page..."));
    return pane;
  }
  pane.append(renderSvg(store, geometry));
  return pane;
}

function renderSvg(store: Store, geometry: Geometry): SVGElement {
  const { width, height } = geometry.page;
  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width * store.zoom),
    height: String(height * store.zoom),
    class: "page-svg",
    role: "img",
  });
  const flip = (y: number) => height - y;

  svg.append(svgEl("rect", {
    x: "0", y: "0", width: String(width), height: String(height), class: "paper",
  }));

  for (const op of geometry.ops) {
    const [x0, y0, x1, y1] = op.bbox;
    if (op.kind === "text-run" && op.text) {
      const text = svgEl("text", {
        x: String(x0),
        y: String(flip(y0) - (op.font_size ?? 10) * 0.21),
        "font-size": String(op.font_size ?? 10),
        class: store.selection.has(op.id) ? "op-text selected" : "op-text",
        "data-op": op.id,
      });
      text.textContent = op.text;
      svg.append(text);
    } else {
      svg.append(svgEl("rect", {
        x: String(x0), y: String(flip(y1)),
        width: String(Math.max(x1 - x0, 0.5)), height: String(Math.max(y1 - y0, 0.5)),
        class: `op-${op.kind}` + (store.selection.has(op.id) ? " selected" : ""),
        "data-op": op.id,
      }));
    }
  }

  const overlay = buildOverlay(geometry, store.layers);
  for (const box of overlay.boxes) {
    const [x0, y0, x1, y1] = box.bbox;
    const rect = svgEl("rect", {
      x: String(x0), y: String(flip(y1)), width: String(x1 - x0), height: String(y1 - y0),
      class: "region-box" + (store.selectedRegion === box.region ? " selected" : ""),
      stroke: store.selectedRegion === box.region ? SELECTION_COLOR : box.color,
      "data-region": box.region,
    });
    svg.append(rect);
    if (box.label) {
      const label = svgEl("text", {
        x: String(x1 - 2), y: String(flip(y1) + 8),
        class: "region-label", fill: box.color, "text-anchor": "end",
        "font-size": "7",
      });
      label.textContent = box.label;
      svg.append(label);
    }
  }
  if (store.layers.order) {
    for (const seg of orderPolyline(overlay.orderStops)) {
      svg.append(svgEl("line", {
        x1: String(seg.x0), y1: String(flip(seg.y0)),
        x2: String(seg.x1), y2: String(flip(seg.y1)),
        stroke: seg.color, class: "order-line", "marker-end": "url(#arrow)",
      }));
    }
    for (const stop of overlay.orderStops) {
      const dot = svgEl("circle", {
        cx: String(stop.x), cy: String(flip(stop.y)), r: "7", class: "order-dot",
      });
      const num = svgEl("text", {
        x: String(stop.x), y: String(flip(stop.y) + 3),
        class: "order-num", "text-anchor": "middle", "font-size": "8",
      });
      num.textContent = String(stop.index);
      svg.append(dot, num);
    }
  }
  for (const seg of overlay.gridSegments) {
    svg.append(svgEl("line", {
      x1: String(seg.x0), y1: String(flip(seg.y0)),
      x2: String(seg.x1), y2: String(flip(seg.y1)),
      stroke: seg.color, class: "grid-line",
    }));
  }

  attachPointer(svg, store, geometry, flip);
  return svg;
}

function svgPoint(svg: SVGElement, event: PointerEvent): [number, number] {
  const rect = (svg as SVGGraphicsElement).getBoundingClientRect();
  const vb = (svg as SVGSVGElement).viewBox.baseVal;
  const x = ((event.clientX - rect.left) / rect.width) * vb.width;
  const y = ((event.clientY - rect.top) / rect.height) * vb.height;
  return [x, y];
}

function attachPointer(
  svg: SVGElement, store: Store, geometry: Geometry, flip: (y: number) => number,
): void {
  svg.addEventListener("pointerdown", (event) => {
    const [x, yTop] = svgPoint(svg, event as PointerEvent);
    const y = flip(yTop);
    if (mode.kind === "draw-order") {
      mode = { kind: "draw-order", trail: [[x, y]] };
      return;
    }
    if (mode.kind === "table-lines") {
      const grid = geometry.grids.find((g) => g.region === (mode as { region: string }).region)
        ?? { region: mode.region, h_lines: [], v_lines: [], header_mode: "none" };
      run(store.addTableLine(mode.region, mode.axis, mode.axis === "h" ? y : x, grid));
      return;
    }
    if (mode.kind === "list-lines") {
      const spec = geometry.list_separators.find((s) => s.region === (mode as { region: string }).region);
      const separators = [...(spec?.separators ?? []), y];
      run(store.setListItems(mode.region, separators, {}));
      return;
    }
    const target = event.target as Element;
    const opId = target.getAttribute("data-op");
    if (opId && store.step === 1) {
      store.toggleOpSelection(opId);
      return;
    }
    const regionId = target.getAttribute("data-region");
    if (regionId) {
      store.selectedRegion = regionId;
      renderApp(document.getElementById("app")!, store);
    }
  });
  svg.addEventListener("pointermove", (event) => {
    if (mode.kind !== "draw-order" || mode.trail.length === 0) return;
    const [x, yTop] = svgPoint(svg, event as PointerEvent);
    mode.trail.push([x, flip(yTop)]);
  });
  svg.addEventListener("pointerup", () => {
    if (mode.kind !== "draw-order" || mode.trail.length < 2) return;
    const polyline = polylineFromTrail(mode.trail);
    mode = { kind: "idle" };
    if (polyline.length >= 2) run(store.drawReadingOrder(polyline));
  });
}
