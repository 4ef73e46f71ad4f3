//! Time evolution of shape measures: flows of tangent fields, geodesic
//! shooting and the diagnostics that check a computed path.

pub mod diagnostics;
pub mod flow;
pub mod geodesic;

pub use diagnostics::{
    density_uniformity, hessian_departure, hessian_stats, mesh_average, path_flow, seed_particles,
    transport_rate, verify_continuity, ContinuityEntry, ContinuityStep, Polynomial,
    UniformityReport,
};
pub use flow::{
    chord_deviation, integrate_flow, ConstantField, FlowField, LinearField, MeshFlow, ParticleSet,
    PathFlow,
};
pub use geodesic::{
    kinetic_energy_density, normal_trace, path_length, shoot_geodesic, shoot_geodesic_with,
    GeodesicPath, PathStatus, ShootOptions, StepDiagnostics, MIN_STEPS,
};
