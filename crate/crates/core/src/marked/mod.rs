//! Marked groups over pluggable backends.
//!
//! Backends: free groups, free abelian groups, the Fabrykowski-Gupta group
//! `G`, the extensions `Γ_n`, re-markings of any of these by words, and
//! diagonal products. Agreement between marked groups is measured in relation
//! length: `L` agreeing relations correspond to coinciding marked balls of
//! radius `⌊L/2⌋`.

mod agreement;
mod ball;
mod group;
mod search;

pub use agreement::{
    agreement_radius, agreement_radius_with_budget, diagonal_product, verify_quotient, Agreement,
    DEFAULT_QUOTIENT_HORIZON,
};
pub use ball::{Ball, BallEntry, DEFAULT_BALL_CAP};
pub use group::{Backend, Element, MarkedGroup};
pub use search::{
    certify_generation, evaluate_marking, lift_marking, search_markings, GenerationCertificate, MarkingSearchResult,
    SearchConfig,
};
