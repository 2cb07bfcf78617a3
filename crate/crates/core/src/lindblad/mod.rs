//! Time evolution and stationary states of Lindblad master equations.

pub mod generator;
pub mod integrate;
pub mod scan;
pub mod steady;

pub use generator::{unvectorize, vectorize, GeneratorBuilder, MasterEquation};
pub use integrate::{
    evolve, evolve_sampled, evolve_with, steady_state_integrate, steady_state_integrate_with, unitary_propagator,
    Integrator, IntegratorOptions,
};
pub use scan::{arm_steady_state, field_tail_mass, truncation_scan, TruncationScan};
pub use steady::{
    liouvillian_spectrum, null_multiplicity, steady_state_null, steady_state_null_with, Method, NullSpaceOptions,
    SteadyStateReport,
};
