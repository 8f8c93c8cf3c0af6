import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { mount } from "../src/main.js";
import { highlightedElementIds } from "../src/views/charts.js";
import { T0, flush, installStub, makeFixture, mountDom } from "./stub.js";

const WEEK = 604800;

describe("engine-driven cross-view highlighting", () => {
  beforeEach(() => {
    mountDom();
  });

  async function boot() {
    const fixture = makeFixture();
    installStub(fixture);
    const app = mount(document, new ApiClient());
    await app.submitGoal("goal");
    await flush();
    await flush();
    return { app, fixture };
  }

  it("word hover highlights exactly the traced time points", async () => {
    const { app, fixture } = await boot();
    await app.hoverWord("item:word:lockdown");
    await flush();
    const charts = document.getElementById("charts")!;
    const expected = fixture.traces["item:word:lockdown|time_point"];
    expect(highlightedElementIds(charts)).toEqual([...expected].sort());
    await app.hoverWord(null);
    await flush();
    expect(highlightedElementIds(charts)).toEqual([]);
  });

  it("time-brush highlight equals the engine trace response for 20 scripted "
     + "interactions", async () => {
    const { app, fixture } = await boot();
    const charts = document.getElementById("charts")!;
    for (let i = 0; i < 20; i++) {
      const start = T0 + i * WEEK;
      const end = T0 + (i + 3) * WEEK;
      await app.brush(start, end);
      await flush();
      const engineResponse = fixture.windows[`${start}|${end}|word`];
      // state holds the engine response verbatim
      expect([...app.store.get().highlightedElements].sort())
        .toEqual([...engineResponse].sort());
      // and the DOM highlight set matches it exactly (all ids are cloud words)
      expect(highlightedElementIds(charts)).toEqual([...engineResponse].sort());
    }
  });

  it("ui never computes highlights locally: no trace, no highlight", async () => {
    const { app } = await boot();
    const log = (globalThis.fetch as unknown as { calls?: string[] }).calls;
    const charts = document.getElementById("charts")!;
    // a hover over a word with no stubbed trace route returns 404; the UI
    // must surface nothing rather than joining spec data itself
    await expect(app.hoverWord("item:word:reopen")).rejects.toThrow();
    await flush();
    expect(highlightedElementIds(charts)).toEqual([]);
  });
});
