//! Non-stationary model of a catalytic converter channel.
//!
//! Inside the cylinder each species obeys the quasi-static Graetz equation
//! `(1 - r^2) dC_f/dz = (beta/r) d/dr (r dC_f/dr)`; on the wall it obeys
//! `dC_s/dt = -gamma dC_f/dr(1) + delta r(C_s^+) + theta d2C_s/dz2`. The two
//! are tied by `C_f(1, z) = C_s(z)` and solved per time step by fixed-point
//! iteration.
//!
//! The solvers are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod coupler;
pub mod error;
pub mod fluid;
pub mod io;
pub mod kinetics;
pub mod model;
pub mod qualcheck;
pub mod scalar;
pub mod simulation;
pub mod study;
pub mod tridiag;
pub mod wall;

pub use coupler::{Coupler, CouplerSettings, CouplingState};
pub use error::{Error, Result};
pub use fluid::{
    march_fluid, wall_flux, wall_flux_gradient, wall_flux_integral, FluidMarcher, FluxForm,
    RadialOperator,
};
pub use io::config::{load_config, parse_config, Config, ConfigErrors};
pub use io::output::ProbeSeries;
pub use io::report::{CheckReport, RunReport};
pub use kinetics::{
    estimate_lipschitz, eval_rates, verify_hypotheses, HypothesisReport, KineticsModel,
    KineticsSpec, LipschitzEstimate,
};
pub use model::{
    contraction_margin, validate_config, weighted_fluid_norm, ContractionDiagnostics, FluidField,
    Grid, InitialData, ModelConfig, Snapshot, SpeciesParams, ValidationReport, WallField,
};
pub use qualcheck::{
    check_envelopes, check_nonnegativity, energy_growth_report, BoundEnvelope, EnergyGrowthReport,
};
pub use scalar::Real;
pub use simulation::{check_config, run_simulation, RunOptions, SimulationOutput};
pub use study::{convergence_study, ConvergenceStudy};
pub use wall::{step_wall, WallStepInput, WallStepper};

pub type Grid64 = Grid<f64>;
pub type SpeciesParams64 = SpeciesParams<f64>;
pub type FluidField64 = FluidField<f64>;
pub type WallField64 = WallField<f64>;
pub type ModelConfig64 = ModelConfig<f64>;
pub type KineticsModel64 = KineticsModel<f64>;
pub type CouplerSettings64 = CouplerSettings<f64>;
pub type RunReport64 = RunReport<f64>;
pub type Config64 = Config<f64>;
