//! One time step of the wall system
//!
//! ```text
//! dC_s/dt = -gamma flux + delta r + theta d2C_s/dz2,    theta dC_s/dz = 0 at z = 0, 1
//! ```
//!
//! Axial diffusion is backward Euler; flux and rates enter explicitly from
//! the caller. Neumann ends use mirrored ghost nodes, which makes the
//! trapezoid integral of `C_s` an exact invariant of the diffusion part.

use crate::error::{Error, Result};
use crate::model::{Grid, SpeciesParams, WallField};
use crate::scalar::Real;
use crate::tridiag::{FactoredTridiagonal, Tridiagonal};

/// Inputs of one wall step. All vectors live on the axial grid.
#[derive(Debug, Clone, Copy)]
pub struct WallStepInput<'a, T: Real> {
    pub wall_prev: &'a WallField<T>,
    /// `dC_f/dr (1, z)` per species.
    pub flux: &'a [Vec<T>],
    /// `r_i` per species, evaluated at the lag chosen by the caller.
    pub rates: &'a [Vec<T>],
    pub dt: T,
    pub params: &'a [SpeciesParams<T>],
    pub grid: &'a Grid<T>,
}

/// `theta D_zz` with ghost-node Neumann rows, as (lower, upper) couplings.
fn axial_laplacian<T: Real>(theta: T, grid: &Grid<T>) -> (Vec<T>, Vec<T>) {
    let nz = grid.nz;
    let s = theta / (grid.dz() * grid.dz());
    let two = T::lit(2.0);
    let mut lower = vec![s; nz + 1];
    let mut upper = vec![s; nz + 1];
    lower[0] = T::zero();
    upper[0] = two * s;
    lower[nz] = two * s;
    upper[nz] = T::zero();
    (lower, upper)
}

/// Prefactored `(I - dt theta D_zz)` for every species.
#[derive(Debug, Clone)]
pub struct WallStepper<T: Real> {
    grid: Grid<T>,
    dt: T,
    couplings: Vec<(Vec<T>, Vec<T>)>,
    factored: Vec<FactoredTridiagonal<T>>,
}

impl<T: Real> WallStepper<T> {
    pub fn new(params: &[SpeciesParams<T>], grid: &Grid<T>, dt: T) -> Result<Self> {
        assert!(dt > T::zero(), "dt must be positive");
        let couplings: Vec<_> = params
            .iter()
            .map(|p| axial_laplacian(p.theta_s, grid))
            .collect();
        let factored = couplings
            .iter()
            .map(|(lo, up)| {
                let m = Tridiagonal {
                    lower: lo.iter().map(|&a| -dt * a).collect(),
                    diag: lo
                        .iter()
                        .zip(up)
                        .map(|(&a, &b)| T::one() + dt * (a + b))
                        .collect(),
                    upper: up.iter().map(|&b| -dt * b).collect(),
                };
                m.factor()
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            grid: *grid,
            dt,
            couplings,
            factored,
        })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// Advances `wall_prev` by `dt` with the given flux and rates.
    pub fn step(
        &self,
        wall_prev: &WallField<T>,
        flux: &[Vec<T>],
        rates: &[Vec<T>],
        params: &[SpeciesParams<T>],
    ) -> Result<WallField<T>> {
        let nodes = self.grid.axial_nodes();
        let n = self.factored.len();
        let shapes = wall_prev.species() == n
            && flux.len() == n
            && rates.len() == n
            && params.len() == n
            && wall_prev
                .values
                .iter()
                .chain(flux)
                .chain(rates)
                .all(|v| v.len() == nodes);
        if !shapes {
            return Err(Error::GridMismatch(format!(
                "wall step expects {n} species with {nodes} axial samples each"
            )));
        }
        let dt = self.dt;
        let nz = self.grid.nz;
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            let c = &wall_prev.values[i];
            let (lo, up) = &self.couplings[i];
            let p = &params[i];
            // Increment form: (I - dt theta D) d = dt (theta D c + source)
            let mut inc: Vec<T> = (0..=nz)
                .map(|k| {
                    let mut lap = T::zero();
                    if k > 0 {
                        lap += lo[k] * (c[k - 1] - c[k]);
                    }
                    if k < nz {
                        lap += up[k] * (c[k + 1] - c[k]);
                    }
                    dt * (lap - p.gamma_s * flux[i][k] + p.delta * rates[i][k])
                })
                .collect();
            self.factored[i].solve_in_place(&mut inc);
            values.push(c.iter().zip(&inc).map(|(&a, &d)| a + d).collect());
        }
        Ok(WallField::new(values, wall_prev.time + dt))
    }
}

/// One wall step (see [`WallStepper::step`]).
pub fn step_wall<T: Real>(input: &WallStepInput<'_, T>) -> Result<WallField<T>> {
    if !(input.dt > T::zero()) {
        return Err(Error::GridMismatch(format!(
            "dt = {} must be positive",
            input.dt
        )));
    }
    WallStepper::new(input.params, input.grid, input.dt)?.step(
        input.wall_prev,
        input.flux,
        input.rates,
        input.params,
    )
}
