"""Accumulator bet selection and season backtesting engine."""

from .domain import (
    Accumulator,
    AccumulatorTotals,
    BookmakerRef,
    CandidateBet,
    ConstraintViolation,
    MatchRef,
    Outcome,
    accumulator_totals,
    validate_accumulator,
)
from .dominance import FilterMode, ReductionReport, apply_filter, inter_filter, intra_filter
from .solver import SearchOutcome, SearchReason, SolverParams, enumerate_oracle, sds_search
from .staking import (
    BetMoments,
    Sizing,
    accumulator_moments,
    kelly_fraction,
    split_singles_moments,
    variance_adjusted_stake,
)
from .backtest import StrategyCombo, parse_combo, run_season, settle, summarize

__version__ = "0.1.0"
