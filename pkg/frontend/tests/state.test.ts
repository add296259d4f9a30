import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ConsoleStore, jsonDiff } from "../src/state.js";
import { candidateLeg as leg, stubService } from "./stub.js";
import type { StubOptions } from "./stub.js";

function setup(options?: StubOptions) {
  const stub = stubService(options);
  const api = new ApiClient("http://stub", stub.fetcher);
  return { store: new ConsoleStore(api), api, stub };
}

describe("ConsoleStore", () => {
  it("caches the whatif response verbatim after a toggle", async () => {
    const { store, api } = setup();
    await store.toggleLeg(leg("Alder"));
    expect(store.displayed).not.toBeNull();
    const direct = await api.whatif(store.legs, store.bankroll);
    expect(jsonDiff(store.displayed, direct)).toEqual([]);
    expect(store.violations).toEqual([]);
  });

  it("toggling the same leg twice restores the panel", async () => {
    const { store } = setup();
    await store.toggleLeg(leg("Alder"));
    await store.toggleLeg(leg("Elm"));
    const before = JSON.stringify(store.snapshot());
    await store.toggleLeg(leg("Cedar", "A"));
    await store.toggleLeg(leg("Cedar", "A"));
    expect(JSON.stringify(store.snapshot())).toBe(before);
  });

  it("an empty accumulator shows a blank panel without calling the service", async () => {
    const { store, stub } = setup();
    await store.refresh();
    expect(store.displayed).toBeNull();
    expect(stub.calls.whatif).toBe(0);
  });

  it("conflicting outcomes surface as violations and block recording", async () => {
    const { store, stub } = setup();
    await store.openSession("100");
    await store.toggleLeg(leg("Alder", "H"));
    await store.toggleLeg(leg("Alder", "D"));
    expect(store.displayed).toBeNull();
    expect(store.violations[0]?.constraint).toBe("conflicting-outcomes");
    const wagersBefore = stub.calls.wagers;
    await store.recordWager("10");
    expect(store.error).toContain("violation");
    expect(stub.calls.wagers).toBe(wagersBefore);
  });

  it("mixed bookmakers are rejected with the matching violation", async () => {
    const { store } = setup();
    await store.toggleLeg(leg("Alder", "H", "B365"));
    await store.toggleLeg(leg("Elm", "H", "BW"));
    expect(store.violations[0]?.constraint).toBe("mixed-bookmaker");
  });

  it("changing the bankroll refreshes stake amounts", async () => {
    const { store } = setup();
    await store.toggleLeg(leg("Alder"));
    const before = store.displayed!.stakes!.kelly.amount;
    await store.setBankroll("200.00");
    const after = store.displayed!.stakes!.kelly.amount;
    expect(after).not.toBe(before);
  });

  it("audit passes while the service agrees and fails once it drifts", async () => {
    const { store, stub } = setup({ tamperWhatifAfter: 2 });
    await store.toggleLeg(leg("Alder"));
    expect(stub.calls.whatif).toBe(1);
    const clean = await store.audit();
    expect(clean).toEqual({ checked: true, clean: true, diffs: [] });
    expect(stub.calls.whatif).toBe(2);

    const drifted = await store.audit(); // third call is tampered
    expect(drifted.clean).toBe(false);
    expect(drifted.diffs.join("\n")).toContain("kelly_fraction");
  });

  it("audit of a blank panel reports nothing to check", async () => {
    const { store } = setup();
    const report = await store.audit();
    expect(report).toEqual({ checked: false, clean: true, diffs: [] });
  });

  it("loading a recommendation reproduces its totals through whatif", async () => {
    const { store } = setup();
    const response = await store.loadRecommendation();
    expect("no_bet" in response).toBe(false);
    if (!("no_bet" in response)) {
      expect(store.legs.length).toBe(response.accumulator.legs.length);
      expect(store.displayed!.totals).toEqual(response.totals);
      expect(store.displayed!.kelly_fraction).toBe(response.kelly_fraction);
      expect(store.displayed!.variance_adjusted).toBe(response.variance_adjusted);
    }
  });

  it("a no-bet verdict leaves the panel untouched", async () => {
    const { store } = setup();
    await store.toggleLeg(leg("Alder"));
    const before = JSON.stringify(store.snapshot());
    store.setParams({ min_exp: 1e9 });
    const response = await store.loadRecommendation();
    expect("no_bet" in response).toBe(true);
    expect(JSON.stringify(store.snapshot())).toBe(before);
  });

  it("a winning wager lifts the bankroll and leaves the base alone", async () => {
    const { store } = setup();
    await store.openSession("500");
    await store.toggleLeg(leg("Alder", "H")); // known home win
    await store.recordWager("50");
    const entry = store.session!.entries[0]!;
    expect(entry.won).toBe(true);
    expect(entry.net_gain).toBe("55.00"); // 50 * (2.1 - 1)
    expect(store.session!.bankroll).toBe("555.00");
    expect(store.session!.staking_base).toBe("500.00");
    expect(store.bankroll).toBe("555.00");
  });

  it("a losing wager drops bankroll and staking base together", async () => {
    const { store } = setup();
    await store.openSession("500");
    await store.toggleLeg(leg("Alder", "D")); // actual result was H
    await store.recordWager("80");
    const entry = store.session!.entries[0]!;
    expect(entry.won).toBe(false);
    expect(entry.net_gain).toBe("-80.00");
    expect(store.session!.bankroll).toBe("420.00");
    expect(store.session!.staking_base).toBe("420.00");
  });

  it("a zero-amount wager is a recorded no-op", async () => {
    const { store } = setup();
    await store.openSession("100");
    await store.toggleLeg(leg("Alder"));
    await store.recordWager("0");
    const entry = store.session!.entries[0]!;
    expect(entry.net_gain).toBe("0.00");
    expect(entry.won).toBe(false);
    expect(store.session!.bankroll).toBe("100.00");
  });

  it("an over-bankroll wager is rejected inline and changes nothing", async () => {
    const { store } = setup();
    await store.openSession("100");
    await store.toggleLeg(leg("Alder"));
    await store.recordWager("100.01");
    expect(store.error).toContain("exceeds bankroll");
    expect(store.session!.entries).toEqual([]);
    expect(store.session!.bankroll).toBe("100.00");
  });

  it("transport failure surfaces as an offline error", async () => {
    const api = new ApiClient("http://nowhere", () => Promise.reject(new Error("refused")));
    const store = new ConsoleStore(api);
    store.legs = [leg("Alder")];
    await store.refresh();
    expect(store.displayed).toBeNull();
    expect(store.error).toBe("service unreachable");
  });
});
