//! Resonance laboratory for the quadratic nonlinear Schrödinger equation on a
//! periodic two-dimensional box.
//!
//! - [`lattice`]: integer wavevectors, bounded domains, the resonant-triad predicate.
//! - [`resonance`]: the sets `S¹`, `S²` by brute force and by parametric families.
//! - [`clusters`]: triad-sharing graph, PP/AP/AA connections, N-stars.
//! - [`dynamics`]: effective equations in slow time and their ensembles.
//! - [`direct`]: the truncated equation in fast time and the averaging check.
//! - [`noise`]: counter-addressed complex Gaussian increments.
//! - [`export`]: CSV / JSON / edge-list writers.

pub mod clusters;
pub mod direct;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod lattice;
pub mod noise;
pub mod resonance;

pub use clusters::{build_graph, component_stats, find_nstars, NStar, TriadGraph};
pub use direct::{
    averaging_error, fast_drift, integrate_fast, to_interaction, AveragingConfig, DirectSystem, FastState,
};
pub use dynamics::{
    build_mode_system, drift, simulate_ensemble, step, Case, Damping, EnsembleStats, Forcing, ModeSystem, Scheme,
    SimConfig, StateVector,
};
pub use error::{Error, Result};
pub use lattice::{is_resonant_triad, satisfies_rectangular, BoxShape, Domain, Triad, WaveVector};
pub use resonance::{
    enumerate_bruteforce, generate_axis_family, generate_general_family, resonance_set, ResonanceSet, SetKind,
};
