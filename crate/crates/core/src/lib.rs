//! Co-adapted couplings of Brownian motions whose distance follows a
//! prescribed deterministic function, on Euclidean space, spheres and
//! hyperbolic half-spaces of any constant curvature.

pub mod coupling;
pub mod engine;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod model_space;
pub mod noise;
pub mod profiles;
pub mod verify;

pub use coupling::CouplingMatrices;
pub use engine::{simulate_path, step, CoupledState, PathRecord, RateRule, Sample, Scheme, StepConfig};
pub use ensemble::{Ensemble, PathSummary, Trace};
pub use error::{Error, Result};
pub use model_space::{geodesic_distance, Point, SpaceKind, SpaceSpec};
pub use noise::NoiseStream;
pub use profiles::{DistanceProfile, ProfileKind, Table};
