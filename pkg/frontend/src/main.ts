import { ApiClient } from "./api.js";
import { legKey, renderScatter, scatterLayout } from "./scatter.js";
import { ConsoleStore } from "./state.js";
import type { CandidateRow, FilterMode, OutcomeCode } from "./types.js";
import { isNoBet } from "./types.js";

const SHELL = `
  <header>
    <h1>accabet console</h1>
    <span id="status" class="badge">connecting</span>
  </header>
  <div id="offline" class="banner hidden">service unreachable; controls disabled</div>
  <main id="controls">
    <section class="chart">
      <div class="row">
        <label>matchday <select id="matchday"></select></label>
        <label>filter
          <select id="filter">
            <option value="intra" selected>intra</option>
            <option value="inter">inter</option>
            <option value="none">none</option>
          </select>
        </label>
        <span class="hint">click a kept point to toggle it as a leg</span>
      </div>
      <div id="scatter-host"></div>
    </section>
    <section class="panel">
      <h2>what-if</h2>
      <ul id="legs"></ul>
      <div id="violations" class="violations"></div>
      <table id="totals-table">
        <tr><th>odds</th><td id="t-odds"></td></tr>
        <tr><th>prob</th><td id="t-prob"></td></tr>
        <tr><th>exp</th><td id="t-exp"></td></tr>
        <tr><th>kelly</th><td id="t-kelly"></td></tr>
        <tr><th>variance-adjusted</th><td id="t-va"></td></tr>
        <tr><th>kelly stake</th><td id="t-kelly-amount"></td></tr>
        <tr><th>va stake</th><td id="t-va-amount"></td></tr>
      </table>
      <div class="row">
        <label>bankroll <input id="bankroll" value="100.00" size="8"></label>
        <button id="audit">audit panel</button>
        <span id="audit-result"></span>
      </div>
      <div class="row">
        <label>p_min <input id="p-min" value="0.25" size="5"></label>
        <label>min_exp <input id="min-exp" value="2.0" size="5"></label>
        <label>max_time <input id="max-time" value="10" size="4"></label>
        <label>seed <input id="seed" value="0" size="4"></label>
        <button id="recommend">recommend</button>
        <span id="recommend-note"></span>
      </div>
      <div id="panel-error" class="error"></div>
    </section>
    <section class="ledger">
      <h2>session</h2>
      <div class="row">
        <button id="open-session">new session</button>
        <label>amount <input id="amount" value="10.00" size="8"></label>
        <button id="record">record wager</button>
      </div>
      <div class="row">
        <span>bankroll <strong id="s-bankroll">-</strong></span>
        <span>staking base <strong id="s-base">-</strong></span>
      </div>
      <table id="ledger-table">
        <thead><tr><th>day</th><th>legs</th><th>odds</th><th>amount</th><th>won</th><th>net</th><th>bankroll</th></tr></thead>
        <tbody></tbody>
      </table>
    </section>
  </main>
`;

function el<T extends HTMLElement>(root: ParentNode, selector: string): T {
  const found = root.querySelector(selector);
  if (!found) {
    throw new Error(`missing element ${selector}`);
  }
  return found as T;
}

/** Render the raw service value; audit depends on nothing being reformatted. */
function verbatim(value: number | string | null | undefined): string {
  return value === null || value === undefined ? "-" : String(value);
}

export async function boot(root: HTMLElement, api: ApiClient): Promise<ConsoleStore> {
  root.innerHTML = SHELL;
  const store = new ConsoleStore(api);
  const doc = root.ownerDocument;

  const statusBadge = el<HTMLElement>(root, "#status");
  const offline = el<HTMLElement>(root, "#offline");
  const controls = el<HTMLElement>(root, "#controls");
  const matchdaySelect = el<HTMLSelectElement>(root, "#matchday");
  const filterSelect = el<HTMLSelectElement>(root, "#filter");
  const scatterHost = el<HTMLElement>(root, "#scatter-host");
  const legList = el<HTMLUListElement>(root, "#legs");
  const violationBox = el<HTMLElement>(root, "#violations");
  const errorBox = el<HTMLElement>(root, "#panel-error");
  const auditResult = el<HTMLElement>(root, "#audit-result");
  const recommendNote = el<HTMLElement>(root, "#recommend-note");

  let candidates: CandidateRow[] = [];

  function renderPanel(): void {
    const shown = store.displayed;
    el<HTMLElement>(root, "#t-odds").textContent = verbatim(shown?.totals.odds);
    el<HTMLElement>(root, "#t-prob").textContent = verbatim(shown?.totals.prob);
    el<HTMLElement>(root, "#t-exp").textContent = verbatim(shown?.totals.exp);
    el<HTMLElement>(root, "#t-kelly").textContent = verbatim(shown?.kelly_fraction);
    el<HTMLElement>(root, "#t-va").textContent = verbatim(shown?.variance_adjusted);
    el<HTMLElement>(root, "#t-kelly-amount").textContent = verbatim(shown?.stakes?.kelly.amount);
    el<HTMLElement>(root, "#t-va-amount").textContent = verbatim(
      shown?.stakes?.variance_adjusted.amount,
    );
    legList.innerHTML = "";
    for (const leg of store.legs) {
      const item = doc.createElement("li");
      item.textContent = `${leg.home_team} v ${leg.away_team} (${leg.outcome}) @ ${leg.bookmaker} ${leg.odds}`;
      legList.appendChild(item);
    }
    violationBox.textContent = store.violations.map((v) => `${v.constraint}: ${v.legs.join("; ")}`).join("\n");
    errorBox.textContent = store.error ?? "";
    renderSession();
    renderChart();
  }

  function renderSession(): void {
    const session = store.session;
    el<HTMLElement>(root, "#s-bankroll").textContent = session ? session.bankroll : "-";
    el<HTMLElement>(root, "#s-base").textContent = session ? session.staking_base : "-";
    const body = el<HTMLTableSectionElement>(root, "#ledger-table tbody");
    body.innerHTML = "";
    for (const entry of session?.entries ?? []) {
      const row = doc.createElement("tr");
      const legs = entry.legs.map((l) => `${l.home_team} (${l.outcome})`).join(", ");
      for (const cell of [
        String(entry.matchday),
        legs,
        verbatim(entry.odds),
        entry.amount,
        entry.won ? "yes" : "no",
        entry.net_gain,
        entry.bankroll,
      ]) {
        const td = doc.createElement("td");
        td.textContent = cell;
        row.appendChild(td);
      }
      body.appendChild(row);
    }
  }

  function renderChart(): void {
    const selected = new Set(store.legs.map(legKey));
    const layout = scatterLayout(candidates, { selected });
    scatterHost.innerHTML = "";
    scatterHost.appendChild(
      renderScatter(doc, layout, (row) => {
        void store.toggleLeg(row).then(renderPanel);
      }),
    );
  }

  async function reloadCandidates(): Promise<void> {
    const day = Number(matchdaySelect.value || store.matchday);
    store.matchday = day;
    const listing = await api.candidates(day, filterSelect.value as FilterMode);
    candidates = listing.candidates;
    renderChart();
  }

  try {
    const status = await api.status();
    statusBadge.textContent = status.dataset_loaded
      ? `${status.matchdays} matchdays loaded`
      : "no dataset loaded";
    if (status.dataset_loaded) {
      const rows = await api.matchdays();
      matchdaySelect.innerHTML = rows
        .map((r) => `<option value="${r.matchday}">${r.matchday}</option>`)
        .join("");
      await reloadCandidates();
    }
  } catch {
    offline.classList.remove("hidden");
    controls.classList.add("disabled");
    statusBadge.textContent = "offline";
    for (const control of Array.from(controls.querySelectorAll("button, input, select"))) {
      (control as HTMLButtonElement).disabled = true;
    }
    return store;
  }

  matchdaySelect.addEventListener("change", () => void reloadCandidates());
  filterSelect.addEventListener("change", () => void reloadCandidates());

  el<HTMLInputElement>(root, "#bankroll").addEventListener("change", (event) => {
    const value = (event.target as HTMLInputElement).value;
    void store.setBankroll(value).then(renderPanel);
  });

  el<HTMLButtonElement>(root, "#audit").addEventListener("click", () => {
    void store.audit().then((report) => {
      auditResult.textContent = !report.checked
        ? "nothing to audit"
        : report.clean
          ? "panel verified"
          : `MISMATCH: ${report.diffs.join(", ")}`;
      auditResult.className = report.clean ? "ok" : "bad";
    });
  });

  el<HTMLButtonElement>(root, "#recommend").addEventListener("click", () => {
    store.setParams({
      p_min: Number(el<HTMLInputElement>(root, "#p-min").value),
      min_exp: Number(el<HTMLInputElement>(root, "#min-exp").value),
      max_time: Number(el<HTMLInputElement>(root, "#max-time").value),
      seed: Number(el<HTMLInputElement>(root, "#seed").value),
    });
    void store.loadRecommendation().then((response) => {
      recommendNote.textContent = isNoBet(response)
        ? `no bet: ${response.no_bet} after ${response.iterations} iterations`
        : `picked ${response.accumulator.legs.length} legs @ ${response.accumulator.bookmaker}`;
      renderPanel();
    });
  });

  el<HTMLButtonElement>(root, "#open-session").addEventListener("click", () => {
    const bankroll = el<HTMLInputElement>(root, "#bankroll").value;
    void store.openSession(bankroll).then(renderPanel);
  });

  el<HTMLButtonElement>(root, "#record").addEventListener("click", () => {
    const amount = el<HTMLInputElement>(root, "#amount").value;
    void store.recordWager(amount).then(renderPanel);
  });

  renderPanel();
  return store;
}

/** Entry point used by index.html; tests call boot() with a stub client. */
export function start(): void {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? "http://127.0.0.1:8000";
  const root = document.getElementById("app");
  if (root) {
    void boot(root, new ApiClient(base));
  }
}

export type { OutcomeCode };
