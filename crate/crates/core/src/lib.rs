//! Simulation of measurement-device-independent quantum key distribution
//! with weak-coherent and modified-coherent (squeezed) pulse sources:
//! photon-number statistics, an exact model of the four-detector Bell-state
//! measurement, decoy-state yield bounds by linear programming, and
//! key-rate sweeps over distance, decoy intensity, pulse count and the
//! photon-elimination parameter.

pub mod bsm;
pub mod decoy;
pub mod keyrate;
pub mod simplex;
pub mod sources;
pub mod sweep;

pub use bsm::{
    Basis, BellClass, BsmError, ChannelDetector, ClickModel, CoincidencePattern, PairGain,
    Polarization, SinglePhotonStats,
};
pub use decoy::{DecoyConfig, DecoyError, Interval, LpBounds, LpStatus, ObservedGains, PairObservation};
pub use keyrate::{KeyRateError, KeyRateInputs};
pub use sources::{McsParams, PhotonDistribution, SourceError, SourceKind, SourceSpec};
pub use sweep::{
    DistanceConvention, ExperimentConfig, KeyRatePoint, RateMode, SweepError,
};
