/** Wire types for the accabet HTTP+JSON service, field for field. */

export type OutcomeCode = "H" | "D" | "A";

export type FilterMode = "none" | "intra" | "inter";

/** One leg of an accumulator, as the service sends and accepts it. */
export interface Leg {
  league: string;
  matchday: number;
  home_team: string;
  away_team: string;
  outcome: OutcomeCode;
  bookmaker: string;
  odds: number;
  prob: number;
}

export interface ServiceStatus {
  name: string;
  dataset_loaded: boolean;
  matchdays: number;
}

export interface MatchdayRow {
  matchday: number;
  fixtures: number;
  candidates: number;
  kept_intra: number;
  kept_inter: number;
}

/** A candidate bet with its dominance verdict under the requested filter. */
export interface CandidateRow extends Leg {
  kept: boolean;
  /** The dominating bet when eliminated, null when kept. */
  dominated_by: Leg | null;
}

export interface FixtureResult {
  league: string;
  matchday: number;
  home_team: string;
  away_team: string;
  result: OutcomeCode;
}

export interface CandidateListing {
  matchday: number;
  filter: FilterMode;
  candidates: CandidateRow[];
  results: FixtureResult[];
}

export interface Totals {
  odds: number;
  prob: number;
  exp: number;
}

export interface Moments {
  expected_return: number;
  variance: number;
}

/** Stake fraction plus the money amount for the bankroll that was sent. */
export interface StakeQuote {
  fraction: number;
  amount: string;
}

export interface WhatifResponse {
  totals: Totals;
  kelly_fraction: number;
  variance_adjusted: number;
  moments: Moments;
  split_moments: Moments;
  stakes: { kelly: StakeQuote; variance_adjusted: StakeQuote } | null;
}

/** One structured constraint failure from a 422 response. */
export interface Violation {
  constraint: string;
  legs: string[];
  [extra: string]: unknown;
}

export interface SolverParams {
  p_min?: number;
  min_exp?: number;
  max_time?: number;
  population?: number;
  seed?: number;
  max_legs?: number | null;
  filter?: "intra";
}

export interface NoBet {
  no_bet: string;
  iterations: number;
}

export interface Recommendation {
  accumulator: { bookmaker: string; legs: Leg[] };
  totals: Totals;
  kelly_fraction: number;
  variance_adjusted: number;
}

export type RecommendResponse = NoBet | Recommendation;

export function isNoBet(r: RecommendResponse): r is NoBet {
  return "no_bet" in r;
}

/** A settled ledger entry; money travels as decimal strings. */
export interface WagerEntry {
  matchday: number;
  legs: Leg[];
  odds: number;
  prob: number;
  amount: string;
  won: boolean;
  net_gain: string;
  bankroll: string;
  staking_base: string;
}

export interface SessionView {
  token: string;
  bankroll: string;
  staking_base: string;
  entries: WagerEntry[];
}
