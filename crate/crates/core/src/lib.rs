//! Composite games of chance analysed as random walks in periodic environments.
//!
//! Simple games are spatially periodic coin-tossing rules ([`PeriodicGame`]).
//! They combine either stochastically (per-residue mixtures, see
//! [`composer::mix`]) or deterministically (a fixed cycle of games, see
//! [`composer::compose_cycle`]). Either way the capital, observed on the right
//! time scale, is a walk in a periodic environment, and [`classifier`] decides
//! whether it drifts to `+inf`, `-inf` or is recurrent from the spectrum of the
//! monodromy matrix.

pub mod classifier;
pub mod composer;
pub mod error;
pub mod game;
pub mod io;
pub mod oracle;
pub mod probability;
pub mod roots;
pub mod spectral;
pub mod sweep;

pub use classifier::{classify_kernel, classify_schedule, Method, SpectralReport, DEFAULT_TOLERANCE};
pub use composer::{CompositionSchedule, EnvironmentKernel, StepDistribution};
pub use error::{Error, Result};
pub use game::{Classification, PeriodicGame};
pub use oracle::DriftEstimate;
pub use probability::Probability;
