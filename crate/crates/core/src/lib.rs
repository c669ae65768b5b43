//! Analysis toolkit for links assisted by multiple reconfigurable
//! intelligent surfaces over Nakagami-m fading.
//!
//! The crate derives, for a source-destination pair served by K passive
//! reflecting surfaces with selection over the strongest one:
//!
//! * per-surface and selection-combined SNR statistics through a two-moment
//!   Gamma fit of the element-sum channel ([`snr_stats`]),
//! * outage probability, its high-SNR power law (diversity order and coding
//!   gain) and a Stirling-type upper bound, plus the average symbol error
//!   probability of p·Q(sqrt(2qγ)) modulations ([`metrics`]),
//! * a reproducible chunked Monte-Carlo simulator used as the ground truth
//!   for every analytic path ([`montecarlo`]),
//! * element-count and placement optimization by a path-following loop on
//!   the log outage bound ([`optimizer`]).
//!
//! The `parallel` feature (default) runs Monte-Carlo blocks and corner
//! enumeration on a rayon pool; disabling it falls back to sequential loops
//! with bit-identical results.

pub mod channel;
pub mod error;
pub mod metrics;
pub mod montecarlo;
pub mod numerics;
pub mod optimizer;
pub mod snr_stats;

pub use channel::{GammaFit, GlobalConfig, RisLinkConfig};
pub use error::{Error, Result};
pub use metrics::{AsymptoticSummary, ModulationScheme};
pub use montecarlo::{McEstimate, McRun};
pub use numerics::Tolerance;
pub use optimizer::{ElementProblem, PlacementProblem, UbCoefficients};
pub use snr_stats::{Scenario, SeriesTruncation};
