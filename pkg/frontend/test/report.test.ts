import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { mount } from "../src/main.js";
import { flush, installStub, makeFixture, mountDom } from "./stub.js";

describe("report view cross-highlighting", () => {
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

  it("renders 5W slots with explicit empties", async () => {
    await boot();
    const items = document.querySelectorAll("#report-view .insight-item");
    expect(items.length).toBe(2);
    const second = items[1];
    const empties = second.querySelectorAll("dd.empty");
    expect(empties.length).toBe(3); // who, where, why are null in the fixture
  });

  it("hovering an item highlights its tree node, unhover clears", async () => {
    const { fixture } = await boot();
    const card = document.querySelector<HTMLElement>(
      '[data-insight-id="insight-1"]')!;
    card.dispatchEvent(new Event("mouseenter"));
    await flush();
    const highlighted = [...document.querySelectorAll(
      "#agent-tree .tree-node.highlighted")];
    expect(highlighted.length).toBe(1);
    const rawIds = (highlighted[0] as HTMLElement).dataset.rawIds!.split(",");
    expect(rawIds).toContain(fixture.report.items[0].source_node);

    card.dispatchEvent(new Event("mouseleave"));
    await flush();
    expect(document.querySelectorAll("#agent-tree .tree-node.highlighted").length)
      .toBe(0);
  });

  it("hovering a tree node highlights its report items (vice versa)", async () => {
    await boot();
    const minerCard = document.querySelector<HTMLElement>(
      "#agent-tree .tree-node.kind-miner")!;
    minerCard.dispatchEvent(new Event("mouseenter"));
    await flush();
    const highlighted = [...document.querySelectorAll(
      "#report-view .insight-item.highlighted")];
    expect(highlighted.map((el) => (el as HTMLElement).dataset.insightId))
      .toEqual(["insight-2"]); // insight-2's source node is the miner n0004
    minerCard.dispatchEvent(new Event("mouseleave"));
    await flush();
    expect(document.querySelectorAll("#report-view .insight-item.highlighted")
      .length).toBe(0);
  });

  it("renders the referenced viz specs as coordinated charts", async () => {
    await boot();
    const panels = [...document.querySelectorAll("#charts .viz")];
    expect(panels.map((p) => (p as HTMLElement).dataset.vizId).sort())
      .toEqual(["viz-n0005-1", "viz-n0005-4"]);
    expect(document.querySelectorAll("#charts .cloud-word").length).toBe(6);
    expect(document.querySelectorAll("#charts circle.time-point").length).toBe(26);
  });
});
