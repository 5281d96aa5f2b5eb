/**
 * End-to-end acceptance (A10): the UI drives the real explanation service.
 *
 * Spawns `python3 -m chesshap.cli serve` on a free port, mounts the app in
 * jsdom against it, and checks that (1) the explain flow on the two-piece
 * board displays exactly the phi values of the returned document, (2)
 * editing the board grays the overlay, and (3) comparing an engine with
 * itself yields an all-zero delta table.
 */

import { type ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { App } from "../src/app";
import { formatPhi } from "../src/waterfall";
import type { ExplanationDocument } from "../src/types";

const TWO_PIECE = "8/2k5/2q5/8/4R3/5K2/8/8 w - - 0 1";

let proc: ChildProcess;
let base: string;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address && typeof address === "object") {
        const port = address.port;
        server.close(() => resolve(port));
      } else {
        reject(new Error("no port"));
      }
    });
  });
}

async function waitForService(url: string, timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const response = await fetch(url + "/engines");
      if (response.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error("service never came up");
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
}

async function waitFor(predicate: () => boolean, what: string, timeoutMs = 20000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!predicate()) {
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${what}`);
    await new Promise((resolve) => setTimeout(resolve, 25));
  }
}

beforeAll(async () => {
  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  const dir = mkdtempSync(join(tmpdir(), "chesshap-e2e-"));
  const config = join(dir, "service.json");
  writeFileSync(config, JSON.stringify({ host: "127.0.0.1", port }));
  proc = spawn("python3", ["-m", "chesshap.cli", "serve", "--config", config], {
    stdio: "ignore",
  });
  await waitForService(base);
});

afterAll(() => {
  proc?.kill();
});

describe("explain flow against the live service", () => {
  it("displays phi values verbatim from the document and grays on edit", async () => {
    const root = document.createElement("div");
    document.body.append(root);
    const app = new App(root, base);
    await app.mount();

    // Load the two-piece board through the FEN field, as a user would.
    const fenInput = root.querySelector(".fen-input") as HTMLInputElement;
    fenInput.value = TWO_PIECE;
    fenInput.dispatchEvent(new Event("change"));
    expect(app.board.fen()).toBe(TWO_PIECE);

    (root.querySelector(".explain-button") as HTMLButtonElement).click();
    await waitFor(
      () => root.querySelectorAll(".waterfall-row").length === 2,
      "the waterfall to fill",
    );

    // The displayed numbers must be the document's numbers, verbatim.
    const doc = app.board.overlay as ExplanationDocument;
    expect(doc.fen).toBe(TWO_PIECE);
    const shown = new Map(
      [...root.querySelectorAll(".waterfall-row")].map((row) => [
        row.querySelector(".waterfall-label")?.textContent?.split(" ")[0],
        row.querySelector(".waterfall-phi")?.textContent,
      ]),
    );
    for (const contribution of doc.contributions) {
      expect(shown.get(contribution.square)).toBe(formatPhi(contribution.phi));
    }
    // and they match the known exact attribution at displayed precision
    expect(shown.get("e4")).toBe("+0.25721");
    expect(shown.get("c6")).toBe("-0.57057");

    // A fresh overlay tints the queen square; an edit grays it out.
    const queenSquare = root.querySelector('[data-square="c6"]') as HTMLElement;
    expect(queenSquare.classList.contains("stale-tint")).toBe(false);
    expect(queenSquare.style.boxShadow).not.toBe("");

    app.board.setTool({ kind: "erase" });
    queenSquare.dispatchEvent(new MouseEvent("mouseup", { bubbles: true }));
    expect(app.board.overlayStale).toBe(true);
    const rookSquare = root.querySelector('[data-square="e4"]') as HTMLElement;
    expect(rookSquare.classList.contains("stale-tint")).toBe(true);
    expect(rookSquare.style.boxShadow).toMatch(/#9E9E9E/);

    root.remove();
  });

  it("compare view with the same engine twice shows all-zero deltas", async () => {
    const root = document.createElement("div");
    document.body.append(root);
    const app = new App(root, base);
    await app.mount();

    const fenInput = root.querySelector(".fen-input") as HTMLInputElement;
    fenInput.value = TWO_PIECE;
    fenInput.dispatchEvent(new Event("change"));

    (root.querySelector(".compare-button") as HTMLButtonElement).click();
    await waitFor(
      () => root.querySelectorAll(".delta-row").length === 2,
      "the delta table to fill",
    );

    const deltaCells = [...root.querySelectorAll(".delta-row")].map(
      (row) => row.querySelectorAll("td")[3]?.textContent,
    );
    expect(deltaCells).toEqual(["+0.00000", "+0.00000"]);

    // clicking a row highlights that square on both boards
    (root.querySelector(".delta-row") as HTMLElement).click();
    const firstSquare = (root.querySelector(".delta-row") as HTMLElement).dataset.square!;
    for (const board of app.compareBoards) {
      const highlighted = board.root.querySelector(".square.highlight") as HTMLElement;
      expect(highlighted.dataset.square).toBe(firstSquare);
    }

    root.remove();
  });
});
