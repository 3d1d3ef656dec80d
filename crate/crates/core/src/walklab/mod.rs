//! Random walks on marked groups.
//!
//! Step measures live on the free group `F_d` and are pushed forward along a
//! marking. Distributions are computed exactly by iterated convolution, in
//! `f64` or in exact rationals; entropies are in nats.

mod compare;
mod measure;
mod stats;
mod table;

pub use compare::{
    entropy_and_return, kernel_conditional_measure, quotient_comparison, quotient_comparison_report,
    ComparisonRow, KernelMeasure, KernelOptions, KernelReport, QuotientComparison, SandwichRow, TOLERANCE,
};
pub use measure::{parse_probability, MeasureOptions, StepDistribution, DEFAULT_NONDEGENERACY_HORIZON};
pub use stats::{
    entropy_profile, fundamental_inequality_report, growth_profile, monte_carlo_lengths, speed_estimate,
    spectral_radius_profile, volume_profile, walk_stats, Budgets, FundamentalInequality, ProfileConfig, RadiusRow,
    SpeedEstimate, SpeedMode, TimeRow, WalkStatsReport, WordMetric,
};
pub use table::{
    exact_convolution, Convolver, DistributionTable, ElementMeasure, Prob, TableEntry, DEFAULT_CONVOLUTION_CAP,
};
