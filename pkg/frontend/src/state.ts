import { ApiClient, ApiError } from "./api.js";
import { legKey } from "./scatter.js";
import type {
  Leg,
  RecommendResponse,
  SessionView,
  SolverParams,
  Violation,
  WhatifResponse,
} from "./types.js";

const OUTCOME_RANK: Record<string, number> = { H: 0, D: 1, A: 2 };

function legOrder(a: Leg, b: Leg): number {
  const ka = [a.league, a.matchday, a.home_team, a.away_team, OUTCOME_RANK[a.outcome], a.bookmaker];
  const kb = [b.league, b.matchday, b.home_team, b.away_team, OUTCOME_RANK[b.outcome], b.bookmaker];
  for (let i = 0; i < ka.length; i++) {
    const x = ka[i] as string | number;
    const y = kb[i] as string | number;
    if (x < y) return -1;
    if (x > y) return 1;
  }
  return 0;
}

/** Recursively collect the paths where two JSON values differ. */
export function jsonDiff(a: unknown, b: unknown, path = "$"): string[] {
  if (a === b) return [];
  if (a === null || b === null || typeof a !== "object" || typeof b !== "object") {
    return typeof a === typeof b && JSON.stringify(a) === JSON.stringify(b)
      ? []
      : [`${path}: ${JSON.stringify(a)} != ${JSON.stringify(b)}`];
  }
  const keys = new Set([...Object.keys(a as object), ...Object.keys(b as object)]);
  const diffs: string[] = [];
  for (const key of keys) {
    diffs.push(
      ...jsonDiff(
        (a as Record<string, unknown>)[key],
        (b as Record<string, unknown>)[key],
        `${path}.${key}`,
      ),
    );
  }
  return diffs;
}

/** Everything the panel shows, for snapshot/involution comparisons. */
export interface PanelSnapshot {
  legs: Leg[];
  displayed: WhatifResponse | null;
  violations: Violation[];
  bankroll: string;
  error: string | null;
}

export interface AuditReport {
  /** false when the panel is blank and there was nothing to verify. */
  checked: boolean;
  clean: boolean;
  diffs: string[];
}

/**
 * The console's working state: an accumulator under construction, the
 * verbatim service response backing the panel, and the betting session.
 *
 * No domain math happens here. Every number shown to the user is stored
 * exactly as the service sent it, which is what makes audit() meaningful:
 * it re-asks the service for the current legs and diffs the fresh answer
 * against the displayed copy.
 */
export class ConsoleStore {
  legs: Leg[] = [];
  bankroll = "100.00";
  params: SolverParams = { p_min: 0.25, min_exp: 2.0, max_time: 10, seed: 0 };
  matchday = 1;

  /** Verbatim /whatif response currently displayed, null when blank or invalid. */
  displayed: WhatifResponse | null = null;
  violations: Violation[] = [];
  error: string | null = null;
  session: SessionView | null = null;

  constructor(private readonly api: ApiClient) {}

  hasLeg(leg: Leg): boolean {
    const key = legKey(leg);
    return this.legs.some((l) => legKey(l) === key);
  }

  /** Add the leg if absent, remove it if present, then revalidate. */
  async toggleLeg(leg: Leg): Promise<void> {
    const key = legKey(leg);
    if (this.hasLeg(leg)) {
      this.legs = this.legs.filter((l) => legKey(l) !== key);
    } else {
      this.legs = [...this.legs, leg].sort(legOrder);
    }
    await this.refresh();
  }

  async setBankroll(value: string): Promise<void> {
    this.bankroll = value;
    await this.refresh();
  }

  setParams(partial: Partial<SolverParams>): void {
    this.params = { ...this.params, ...partial };
  }

  /** Revalidate the working accumulator and cache the service's answer. */
  async refresh(): Promise<void> {
    this.error = null;
    if (this.legs.length === 0) {
      this.displayed = null;
      this.violations = [];
      return;
    }
    try {
      this.displayed = await this.api.whatif(this.legs, this.bankroll);
      this.violations = [];
    } catch (err) {
      this.displayed = null;
      if (err instanceof ApiError && err.status === 422) {
        this.violations = err.violations;
      } else {
        this.violations = [];
        this.error = err instanceof ApiError ? err.detail : String(err);
      }
    }
  }

  /**
   * Re-fetch the panel's numbers and diff them against what is displayed.
   * A blank panel (no legs) verifies trivially but reports checked: false.
   */
  async audit(): Promise<AuditReport> {
    if (this.legs.length === 0) {
      return { checked: false, clean: this.displayed === null, diffs: [] };
    }
    try {
      const fresh = await this.api.whatif(this.legs, this.bankroll);
      if (this.displayed === null) {
        return {
          checked: true,
          clean: false,
          diffs: ["panel is blank but the service returned totals"],
        };
      }
      const diffs = jsonDiff(this.displayed, fresh);
      return { checked: true, clean: diffs.length === 0, diffs };
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        const diffs =
          this.displayed === null
            ? jsonDiff(this.violations, err.violations)
            : ["panel shows totals but the service now rejects the legs"];
        return { checked: true, clean: diffs.length === 0, diffs };
      }
      throw err;
    }
  }

  /** Ask the solver for a matchday pick and load it into the panel. */
  async loadRecommendation(): Promise<RecommendResponse> {
    const response = await this.api.recommend(this.matchday, this.params);
    if (!("no_bet" in response)) {
      this.legs = [...response.accumulator.legs].sort(legOrder);
      await this.refresh();
    }
    return response;
  }

  async openSession(bankroll: string): Promise<void> {
    this.session = await this.api.createSession(bankroll);
    this.bankroll = this.session.bankroll;
    await this.refresh();
  }

  /**
   * Record the working accumulator as a wager. Historical results are
   * known, so the service settles immediately; the returned ledger is the
   * single source of truth for bankroll and staking base.
   */
  async recordWager(amount: string): Promise<void> {
    if (this.session === null) {
      this.error = "open a session first";
      return;
    }
    if (this.displayed === null || this.violations.length > 0) {
      this.error = "resolve the violations before recording";
      return;
    }
    try {
      this.session = await this.api.recordWager(
        this.session.token,
        this.matchday,
        this.legs,
        amount,
      );
      this.bankroll = this.session.bankroll;
      this.error = null;
      await this.refresh();
    } catch (err) {
      this.error = err instanceof ApiError ? err.detail : String(err);
    }
  }

  snapshot(): PanelSnapshot {
    return JSON.parse(
      JSON.stringify({
        legs: this.legs,
        displayed: this.displayed,
        violations: this.violations,
        bankroll: this.bankroll,
        error: this.error,
      }),
    ) as PanelSnapshot;
  }
}
