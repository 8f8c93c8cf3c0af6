import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { mount } from "../src/main.js";
import { countDisplayNodes } from "../src/store.js";
import { NODE_KINDS } from "../src/types.js";
import { renderedNodeCount } from "../src/views/tree.js";
import { flush, installStub, makeFixture, mountDom } from "./stub.js";

describe("chat panel and agent tree", () => {
  beforeEach(() => {
    mountDom();
  });

  async function boot() {
    const fixture = makeFixture();
    installStub(fixture);
    const app = mount(document, new ApiClient());
    await app.submitGoal("how did discussion change over time?");
    await flush();
    return { app, fixture };
  }

  it("renders the tree after a goal is submitted", async () => {
    const { fixture } = await boot();
    const tree = document.getElementById("agent-tree")!;
    expect(renderedNodeCount(tree)).toBe(countDisplayNodes(fixture.tree));
  });

  it("blocks empty goal text client-side without any request", async () => {
    const fixture = makeFixture();
    const log = installStub(fixture);
    mount(document, new ApiClient());
    const form = document.querySelector<HTMLFormElement>("#chat-panel form")!;
    form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    await flush();
    expect(log.calls.length).toBe(0);
    expect(document.querySelector("#chat-panel input")!.classList
      .contains("invalid")).toBe(true);
  });

  it("shows the miner badge with the configuration count", async () => {
    await boot();
    const badge = document.querySelector("#agent-tree .kind-miner .node-badge")!;
    expect(badge.textContent).toBe("12");
  });

  it("renders a legend matching the API kind enum exactly", async () => {
    await boot();
    const legend = [...document.querySelectorAll("#agent-tree .legend-entry")]
      .map((el) => (el as HTMLElement).dataset.kind);
    expect(legend).toEqual([...NODE_KINDS]);
  });

  it("expands a merged query node into its raw nodes", async () => {
    const { app, fixture } = await boot();
    const merged = fixture.tree.children[0].children[0];
    expect(merged.badge["merged_queries"]).toBe(2);
    await app.expand(merged.display_id);
    await flush();
    const raw = document.querySelectorAll("#agent-tree .raw-node");
    expect(raw.length).toBe(1);
  });

  it("refinement mid-session adds directions without a reload", async () => {
    const { app } = await boot();
    const before = document.getElementById("agent-tree")!.innerHTML;
    await app.submitGoal("also look at engagement");
    await flush();
    expect(document.getElementById("agent-tree")!.innerHTML.length)
      .toBeGreaterThan(0);
    expect(before).not.toBe("");
  });
});
