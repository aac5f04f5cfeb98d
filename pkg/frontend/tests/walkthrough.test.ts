/**
 * End-to-end: all eight steps on the study fixture through the UI's own
 * api-client and state layer, against a real server, finishing with an
 * export that scores 100.0 on every criterion.
 *
 * The walkthrough uses only the keyboard-accessible command paths (explicit
 * selection, list reordering, numeric grid and separator inputs), proving
 * the drawing interactions' parity controls work end to end. There is no
 * browser in this environment, so the DOM layer is covered by the build and
 * its unit tests instead of a pixel-level run.
 */

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import * as path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { Store } from "../src/state.js";

const ROOT = path.resolve(__dirname, "../..");
const PORT = 18000 + Math.floor(Math.random() * 10000);
const BASE = `http://127.0.0.1:${PORT}`;

interface GoldenRegion {
  id: string;
  bbox: number[];
  type: string;
  ops: string[];
}

interface GoldenTagmap {
  pages: { index: number; regions: GoldenRegion[]; reading_order: string[] }[];
  headings: { region: string; level: number }[];
  tables: { region: string; h_lines: number[]; v_lines: number[]; header_mode: string }[];
  lists: { region: string; separators: number[]; nesting: Record<string, number> }[];
  figures: { region: string; alt: string; decorative: boolean }[];
  formulas: { region: string; latex: string; alt: string }[];
  meta: { title: string; author: string; language: string };
}

let work: string;
let server: ChildProcess;
let golden: GoldenTagmap;

beforeAll(async () => {
  work = mkdtempSync(path.join(tmpdir(), "pdfremedy-ui-"));
  execFileSync(
    "python3",
    [
      "-c",
      [
        "import json, sys",
        "from fixture_study import build_study_fixture",
        "fx = build_study_fixture()",
        `open(sys.argv[1] + '/study.pdf', 'wb').write(fx.pdf)`,
        `open(sys.argv[1] + '/golden.json', 'wb').write(fx.golden.to_bytes())`,
        `open(sys.argv[1] + '/truth.json', 'w').write(json.dumps(fx.truth.to_json()))`,
      ].join("\n"),
      work,
    ],
    { cwd: ROOT, env: { ...process.env, PYTHONPATH: path.join(ROOT, "tests") } },
  );
  golden = JSON.parse(readFileSync(path.join(work, "golden.json"), "utf-8"));

  server = spawn(
    "python3",
    ["-m", "pdfremedy.cli", "serve", "--port", String(PORT), "--data",
     path.join(work, "data")],
    { cwd: ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const response = await fetch(`${BASE}/sessions/probe`);
      if (response.status === 404) break;
    } catch {
      /* not up yet */
    }
    if (Date.now() > deadline) throw new Error("server did not come up");
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
}, 60_000);

afterAll(() => {
  server?.kill();
});

describe("eight-step walkthrough against a live server", () => {
  it("exports a file that scores 100.0 on all thirteen criteria", async () => {
    const store = new Store(new ApiClient(BASE));
    const pdf = readFileSync(path.join(work, "study.pdf"));
    await store.open(new Uint8Array(pdf), true);
    expect(store.session!.pages).toBe(3);

    // Step 1: replace the auto regions with the golden selection.
    await store.gotoStep(1);
    const regionsView = store.views.get(1) as {
      pages: { regions: { id: string }[] }[];
    };
    const autoIds = regionsView.pages.flatMap((p) => p.regions.map((r) => r.id));
    expect(autoIds.length).toBeGreaterThan(0);
    await store.deleteRegions(autoIds);
    for (const page of golden.pages) {
      for (const region of page.regions) {
        store.page = page.index;
        store.selection = new Set(region.ops);
        await store.createRegionFromSelection(region.type as never);
      }
    }
    await store.markDone(1);

    // Map golden region ids to the server-assigned ones by op set.
    const tagmap = (await store.api.tagmap(store.sessionId)).tagmap as GoldenTagmap;
    const byOps = new Map<string, string>();
    for (const page of tagmap.pages) {
      for (const region of page.regions) {
        byOps.set([...region.ops].sort().join("|"), region.id);
      }
    }
    const mapped = new Map<string, string>();
    for (const page of golden.pages) {
      for (const region of page.regions) {
        const key = [...region.ops].sort().join("|");
        const found = byOps.get(key);
        expect(found, `created region for ${region.id}`).toBeDefined();
        mapped.set(region.id, found!);
      }
    }

    // Step 2: reorder each page through the list commands (keyboard path).
    await store.gotoStep(2);
    for (const page of golden.pages) {
      await store.gotoPage(page.index);
      const target = page.reading_order.map((rid) => mapped.get(rid)!);
      for (let i = 0; i < target.length; i++) {
        await store.moveRegionToIndex(target[i], i);
      }
      const order = store.geometries.get(page.index)!.reading_order;
      expect(order).toEqual(target);
    }
    await store.markDone(2);

    // Step 3: constrained heading levels.
    await store.gotoStep(3);
    for (const row of golden.headings) {
      await store.setHeadingLevel(mapped.get(row.region)!, row.level);
    }
    await store.markDone(3);

    // Step 4: numeric grid inputs (keyboard path for line drawing).
    await store.gotoStep(4);
    for (const table of golden.tables) {
      await store.setTableGrid(
        mapped.get(table.region)!, table.h_lines, table.v_lines, table.header_mode,
      );
    }
    await store.markDone(4);

    // Step 5: numeric separators and nesting menus.
    await store.gotoStep(5);
    for (const list of golden.lists) {
      await store.setListItems(mapped.get(list.region)!, list.separators, list.nesting);
    }
    await store.markDone(5);

    // Step 6: figure alt with the countdown.
    await store.gotoStep(6);
    for (const figure of golden.figures) {
      await store.setFigureAlt(mapped.get(figure.region)!, figure.alt, figure.decorative);
    }
    const figuresView = store.views.get(6) as { figures: { words_remaining: number }[] };
    expect(figuresView.figures[0].words_remaining).toBeGreaterThan(0);
    await store.markDone(6);

    // Step 7: formula notation; the server regenerates the spoken text.
    await store.gotoStep(7);
    for (const formula of golden.formulas) {
      await store.setFormulaLatex(mapped.get(formula.region)!, formula.latex);
    }
    const formulasView = store.views.get(7) as { formulas: { alt: string }[] };
    for (const f of formulasView.formulas) {
      expect(f.alt.length).toBeGreaterThan(0);
    }
    await store.markDone(7);

    // Step 8: metadata, then export.
    await store.gotoStep(8);
    await store.setMeta(golden.meta.title, golden.meta.author, golden.meta.language);
    await store.markDone(8);

    const exported = await store.exportPdf();
    const out = path.join(work, "exported.pdf");
    writeFileSync(out, Buffer.from(exported));

    const csv = execFileSync(
      "python3",
      ["-m", "pdfremedy.cli", "score", out, "--truth",
       path.join(work, "truth.json"), "--format", "csv"],
      { cwd: ROOT, encoding: "utf-8" },
    );
    const lines = csv.trim().split("\n");
    expect(lines).toHaveLength(1 + 13 + 1);
    for (const line of lines.slice(1, 14)) {
      const score = line.split(",")[1];
      expect(score, line).toBe("100.0");
    }
    const average = lines[14].split(",")[1];
    expect(average).toBe("100.0");
  }, 120_000);

  it("surfaces a conflict instead of overwriting concurrent edits", async () => {
    const alice = new Store(new ApiClient(BASE));
    const pdf = readFileSync(path.join(work, "study.pdf"));
    await alice.open(new Uint8Array(pdf), true);
    const bob = new Store(new ApiClient(BASE));
    await bob.attach(alice.sessionId);

    await alice.setMeta("Alice was here", "a", "en");
    await expect(bob.setMeta("Bob too", "b", "en")).rejects.toThrow(/revision/);
    expect(bob.conflicted).toBe(true);
    await bob.reload();
    expect(bob.conflicted).toBe(false);
    await bob.setMeta("Bob too", "b", "en"); // succeeds after reload
  }, 60_000);
});
