/**
 * Keyboard alternatives for every drawing interaction, bound per step.
 * Bindings call the same Store commands the pointer paths use, so parity is
 * structural rather than re-implemented.
 */

import type { Store } from "./state.js";

export interface Binding {
  key: string; // KeyboardEvent.key, with "Alt+" prefix when altKey is required
  description: string;
  run(store: Store): Promise<void> | void;
}

function selectedRegion(store: Store): string | null {
  return store.selectedRegion;
}

export function bindingsForStep(step: number): Binding[] {
  const common: Binding[] = [
    {
      key: "Alt+ArrowRight",
      description: "next step",
      run: (s) => s.gotoStep(Math.min(8, s.step + 1)),
    },
    {
      key: "Alt+ArrowLeft",
      description: "previous step",
      run: (s) => s.gotoStep(Math.max(1, s.step - 1)),
    },
    {
      key: "Alt+PageDown",
      description: "next page",
      run: (s) => s.gotoPage(s.page + 1),
    },
    {
      key: "Alt+PageUp",
      description: "previous page",
      run: (s) => s.gotoPage(s.page - 1),
    },
    { key: "Alt++", description: "zoom in", run: (s) => s.setZoom(s.zoom * 1.25) },
    { key: "Alt+-", description: "zoom out", run: (s) => s.setZoom(s.zoom / 1.25) },
  ];
  if (step === 2) {
    // parity for the drawn reading order: reorder the focused region directly
    common.push(
      {
        key: "Alt+ArrowUp",
        description: "move selected region earlier in the reading order",
        run: async (s) => {
          const rid = selectedRegion(s);
          if (rid) await s.moveRegionBy(rid, -1);
        },
      },
      {
        key: "Alt+ArrowDown",
        description: "move selected region later in the reading order",
        run: async (s) => {
          const rid = selectedRegion(s);
          if (rid) await s.moveRegionBy(rid, +1);
        },
      },
      {
        key: "Alt+Delete",
        description: "turn the selected region into an artifact",
        run: async (s) => {
          const rid = selectedRegion(s);
          if (rid) await s.demoteToArtifact(rid);
        },
      },
    );
  }
  if (step === 1) {
    common.push({
      key: "Alt+Delete",
      description: "delete the selected region (content returns to untagged)",
      run: async (s) => {
        const rid = selectedRegion(s);
        if (rid) await s.deleteRegions([rid]);
      },
    });
  }
  return common;
}

export function matchBinding(bindings: Binding[], event: { key: string; altKey: boolean }): Binding | undefined {
  const name = (event.altKey ? "Alt+" : "") + event.key;
  return bindings.find((b) => b.key === name);
}

export function installKeyboard(store: Store, target: { addEventListener: Window["addEventListener"] }): void {
  target.addEventListener("keydown", (event: KeyboardEvent) => {
    const binding = matchBinding(bindingsForStep(store.step), event);
    if (binding) {
      event.preventDefault();
      void binding.run(store);
    }
  });
}
