//! Group actions on compact metric spaces: invariant means by Følner
//! averaging, orbit-closure quadrature, Lyapunov-stability probes,
//! almost-periodicity tests, covering-number invariant measures and an
//! orbit-census classification of the associated Hilbert module.
//!
//! ```
//! use orbital::{fixture, folner_average, AveragingConfig, ScenarioId};
//!
//! let rotation = fixture(ScenarioId::Rotation);
//! let x = rotation.space().parse_point("t=0.2").unwrap();
//! let mean = folner_average(&rotation, "cos1", &x, &AveragingConfig::default()).unwrap();
//! assert!(mean.converged && mean.value.norm() < 1e-2);
//! ```

pub mod action;
pub mod averaging;
pub mod census;
pub mod error;
pub mod group;
pub mod measure;
pub mod scenarios;
pub mod space;
pub mod stability;
pub mod sum;

pub use action::{ActionScenario, Closure, GroundTruth, MeanTruth, Observable, ScenarioFlags};
pub use averaging::{
    expectation_field, folner_average, inner_product, orbit_closure_average, visit_frequency, AverageReport,
    AveragingConfig, ContinuityVerdict, FieldParams, FieldReport,
};
pub use census::{
    census, classify_module, orbit_probe, ClassifyParams, CensusParams, ModuleClassification, ModuleLabel, OrbitCensus,
    OrbitProbe, OrbitVerdict, Rule,
};
pub use error::{Error, Result};
pub use group::{FolnerSet, GroupDescriptor, GroupElement, GroupKind};
pub use measure::{
    covering_index, exact_arc_cover, invariant_measure_estimate, lattice_subset, uniqueness_check, CoveringResult,
    MeasureEstimate, MeasureParams, UniquenessCheck,
};
pub use num_complex::Complex64;
pub use scenarios::{build, field_grid, fixture, ScenarioSpec, GOLDEN_ALPHA};
pub use space::{
    greedy_epsilon_net, CompactSubset, ConeCoord, Coords, JLevel, MetricSpace, Point, Region, ScenarioId, SpiralCoord,
    POINT_EQ_TOL,
};
pub use stability::{
    almost_periodicity_test, replay_witness, stability_probe, uniform_continuity_probe, AlmostPeriodicityReport, ApParams, ApVerdict,
    ProbeParams, StabilityReport, Witness,
};
