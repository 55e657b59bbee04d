//! Per-step fixed-point coupling of fluid and wall.
//!
//! One iteration marches the fluid against the current wall iterate, takes
//! its wall flux, advances the wall from the previous time level with rates
//! lagged at that level, and relaxes. Iteration stops when the sup-norm
//! change of the wall falls below `tol`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluid::{wall_flux, FluidMarcher, FluxForm};
use crate::kinetics::{wall_rates, KineticsModel};
use crate::model::{FluidField, Grid, SpeciesParams, WallField};
use crate::scalar::{serde_real, Real};
use crate::wall::WallStepper;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CouplerSettings<T: Real> {
    #[serde(with = "serde_real")]
    pub tol: T,
    pub max_iter: usize,
    pub flux_form: FluxForm,
    #[serde(with = "serde_real")]
    pub relaxation: T,
}

impl<T: Real> Default for CouplerSettings<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10),
            max_iter: 50,
            flux_form: FluxForm::Gradient,
            relaxation: T::one(),
        }
    }
}

impl<T: Real> CouplerSettings<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero()) {
            return Err(Error::Settings(format!(
                "coupler.tol = {} must be > 0",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Settings("coupler.max_iter must be >= 1".into()));
        }
        if !(self.relaxation > T::zero() && self.relaxation <= T::one()) {
            return Err(Error::Settings(format!(
                "coupler.relaxation = {} must lie in (0, 1]",
                self.relaxation
            )));
        }
        Ok(())
    }
}

/// Accepted state at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingState<T: Real> {
    pub step: usize,
    pub time: T,
    pub wall: WallField<T>,
    pub fluid: FluidField<T>,
    pub iterations_last_step: usize,
    /// Sup-norm wall change of every iteration of the last step.
    pub residual_history: Vec<T>,
}

/// Everything needed to advance one time step, prefactored.
#[derive(Debug, Clone)]
pub struct Coupler<T: Real> {
    grid: Grid<T>,
    params: Vec<SpeciesParams<T>>,
    kinetics: KineticsModel<T>,
    inlet: Vec<Vec<T>>,
    settings: CouplerSettings<T>,
    marcher: FluidMarcher<T>,
    stepper: WallStepper<T>,
}

impl<T: Real> Coupler<T> {
    pub fn new(
        grid: &Grid<T>,
        params: &[SpeciesParams<T>],
        kinetics: &KineticsModel<T>,
        inlet: &[Vec<T>],
        settings: CouplerSettings<T>,
    ) -> Result<Self> {
        settings.validate()?;
        if kinetics.arity() != params.len() {
            return Err(Error::Arity {
                kinetics: kinetics.arity(),
                species: params.len(),
            });
        }
        if !(grid.dt > T::zero()) {
            return Err(Error::Settings(format!(
                "grid.dt = {} must be > 0",
                grid.dt
            )));
        }
        Ok(Self {
            grid: *grid,
            params: params.to_vec(),
            kinetics: kinetics.clone(),
            inlet: inlet.to_vec(),
            settings,
            marcher: FluidMarcher::new(params, grid)?,
            stepper: WallStepper::new(params, grid, grid.dt)?,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn settings(&self) -> &CouplerSettings<T> {
        &self.settings
    }

    /// State at `t = 0`: the initial wall and the fluid marched against it.
    pub fn initial_state(&self, wall_init: &[Vec<T>]) -> Result<CouplingState<T>> {
        let wall = WallField::new(wall_init.to_vec(), T::zero());
        let fluid = self.marcher.march(&wall, &self.inlet)?;
        Ok(CouplingState {
            step: 0,
            time: T::zero(),
            wall,
            fluid,
            iterations_last_step: 0,
            residual_history: Vec::new(),
        })
    }

    /// Advances one step starting the iteration from the current wall.
    pub fn advance_step(&self, state: &CouplingState<T>) -> Result<CouplingState<T>> {
        self.advance_from(state, &state.wall)
    }

    /// Advances one step starting the iteration from `guess`.
    pub fn advance_from(
        &self,
        state: &CouplingState<T>,
        guess: &WallField<T>,
    ) -> Result<CouplingState<T>> {
        let step = state.step + 1;
        let rates = wall_rates(&self.kinetics, &state.wall)?;
        let omega = self.settings.relaxation;
        let mut iterate = guess.clone();
        let mut residuals = Vec::new();
        let mut converged = false;

        for _ in 0..self.settings.max_iter {
            let fluid = self.marcher.march(&iterate, &self.inlet)?;
            let flux = wall_flux(self.settings.flux_form, &fluid, &self.grid, &self.params)?;
            let mut next = self
                .stepper
                .step(&state.wall, &flux, &rates, &self.params)?;
            if omega != T::one() {
                for (n, it) in next.values.iter_mut().zip(&iterate.values) {
                    for (x, &y) in n.iter_mut().zip(it) {
                        *x = y + omega * (*x - y);
                    }
                }
            }
            if let Some(species) = next
                .values
                .iter()
                .position(|v| v.iter().any(|x| !x.is_finite()))
            {
                return Err(Error::NonFinite { species });
            }
            let res = next.sup_distance(&iterate);
            residuals.push(res);
            iterate = next;
            if res < self.settings.tol {
                converged = true;
                break;
            }
        }

        if !converged {
            log::debug!("step {step}: residuals {residuals:?}");
            return Err(Error::NonConverged {
                step,
                last: residuals.last().map_or(f64::NAN, |r| r.as_f64()),
                residuals: residuals.iter().map(|r| r.as_f64()).collect(),
            });
        }
        let fluid = self.marcher.march(&iterate, &self.inlet)?;
        log::debug!("step {step}: {} iterations", residuals.len());
        Ok(CouplingState {
            step,
            time: self.grid.time(step),
            wall: WallField::new(iterate.values, self.grid.time(step)),
            fluid: FluidField {
                time: self.grid.time(step),
                ..fluid
            },
            iterations_last_step: residuals.len(),
            residual_history: residuals,
        })
    }
}
