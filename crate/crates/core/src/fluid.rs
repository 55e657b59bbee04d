//! Axial marching of the fluid equation
//!
//! ```text
//! (1 - r^2) dC/dz = (beta / r) d/dr (r dC/dr),   dC/dr(0) = 0,   C(1, z) = wall(z)
//! ```
//!
//! Backward Euler in `z`, finite volumes in `r`. The face fluxes use
//! `r_{j +- 1/2}`; the cell around the axis is `[0, dr/2]`, which yields the
//! row `4 beta (C_1 - C_0) / dr^2` and keeps the system an M-matrix. The
//! fluid has no time derivative: each march is quasi-static for the wall
//! trace it receives.

use crate::error::{Error, Result};
use crate::model::{FluidField, Grid, SpeciesParams, WallField};
use crate::scalar::Real;
use crate::tridiag::{FactoredTridiagonal, Tridiagonal};

/// Which discrete wall flux the coupling consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluxForm {
    /// One-sided second-order difference of `C` at `r = 1`.
    #[default]
    Gradient,
    /// `(1/beta) int_0^1 dC/dz r (1 - r^2) dr`.
    Integral,
}

/// Discrete `beta (1/r) d/dr (r d/dr)` on the unknowns `j = 0..nr-1`, with
/// the Dirichlet node `j = nr` eliminated.
#[derive(Debug, Clone)]
pub struct RadialOperator<T: Real> {
    pub beta: T,
    /// Off-diagonal couplings, `lower[j]` to `j-1`, `upper[j]` to `j+1`.
    /// Both are nonpositive. `upper[nr-1]` couples to the wall node.
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    /// Diffusion part of the diagonal, `-(lower + upper)`.
    pub diag: Vec<T>,
    /// `r_j (1 - r_j^2)`, all `nr + 1` nodes.
    pub weights: Vec<T>,
    /// `(1 - r_j^2) / dz` for the unknowns.
    pub marching: Vec<T>,
}

impl<T: Real> RadialOperator<T> {
    pub fn new(beta: T, grid: &Grid<T>) -> Self {
        let nr = grid.nr;
        let dr = grid.dr();
        let inv_dr2 = T::one() / (dr * dr);
        let half = T::lit(0.5);
        let mut lower = vec![T::zero(); nr];
        let mut upper = vec![T::zero(); nr];
        let mut diag = vec![T::zero(); nr];
        for j in 0..nr {
            if j == 0 {
                upper[0] = -T::lit(4.0) * beta * inv_dr2;
            } else {
                let r = grid.r(j);
                let minus = (r - half * dr) / r;
                let plus = (r + half * dr) / r;
                lower[j] = -beta * minus * inv_dr2;
                upper[j] = -beta * plus * inv_dr2;
            }
            diag[j] = -(lower[j] + upper[j]);
        }
        let dz = grid.dz();
        let marching = (0..nr)
            .map(|j| {
                let r = grid.r(j);
                (T::one() - r * r) / dz
            })
            .collect();
        Self {
            beta,
            lower,
            upper,
            diag,
            weights: grid.flow_weights(),
            marching,
        }
    }

    /// `[(1 - r^2)/dz I - L]` on the unknowns.
    pub fn step_matrix(&self) -> Tridiagonal<T> {
        Tridiagonal {
            lower: self.lower.clone(),
            diag: self
                .diag
                .iter()
                .zip(&self.marching)
                .map(|(&d, &m)| d + m)
                .collect(),
            upper: self.upper.clone(),
        }
    }

    /// `(L c)_j` for `j < nr`, using the full profile including the wall node.
    pub fn apply(&self, c: &[T], out: &mut [T]) {
        let nr = self.diag.len();
        for j in 0..nr {
            // written in differences so constants map to exactly zero
            let mut acc = -self.upper[j] * (c[j + 1] - c[j]);
            if j > 0 {
                acc += -self.lower[j] * (c[j - 1] - c[j]);
            }
            out[j] = acc;
        }
    }
}

/// Prefactored marcher for every species on one grid.
#[derive(Debug, Clone)]
pub struct FluidMarcher<T: Real> {
    grid: Grid<T>,
    ops: Vec<RadialOperator<T>>,
    factored: Vec<FactoredTridiagonal<T>>,
}

impl<T: Real> FluidMarcher<T> {
    pub fn new(params: &[SpeciesParams<T>], grid: &Grid<T>) -> Result<Self> {
        let ops: Vec<_> = params
            .iter()
            .map(|p| RadialOperator::new(p.beta_f, grid))
            .collect();
        let factored = ops
            .iter()
            .map(|op| {
                let m = op.step_matrix();
                debug_assert!(m.is_m_matrix());
                m.factor()
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            grid: *grid,
            ops,
            factored,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn operator(&self, species: usize) -> &RadialOperator<T> {
        &self.ops[species]
    }

    /// Marches every species from the inlet to `z = 1` against `wall`.
    ///
    /// Row `z = 0` is the inlet except at `r = 1`, and column `r = 1` is the
    /// wall trace everywhere, both copied bitwise. When the data are
    /// incompatible at the corner the wall value wins.
    pub fn march(&self, wall: &WallField<T>, inlet: &[Vec<T>]) -> Result<FluidField<T>> {
        let g = &self.grid;
        let (nr, nz) = (g.nr, g.nz);
        let n = self.ops.len();
        if wall.species() != n || inlet.len() != n {
            return Err(Error::GridMismatch(format!(
                "{} species in parameters, {} in wall, {} inlet profiles",
                n,
                wall.species(),
                inlet.len()
            )));
        }
        if wall.values.iter().any(|w| w.len() != nz + 1) || inlet.iter().any(|p| p.len() != nr + 1)
        {
            return Err(Error::GridMismatch(format!(
                "wall needs {} and inlet {} samples per species",
                nz + 1,
                nr + 1
            )));
        }

        let mut field = FluidField::zeros(n, nr, nz, wall.time);
        let mut inc = vec![T::zero(); nr];
        for i in 0..n {
            let op = &self.ops[i];
            let lu = &self.factored[i];
            let w = &wall.values[i];
            {
                let row0 = field.row_mut(i, 0);
                row0.copy_from_slice(&inlet[i]);
                row0[nr] = w[0];
            }
            for k in 1..=nz {
                // Increment form: [(1-r^2)/dz - L] d = L C^{k-1}, with the
                // Dirichlet increment eliminated into the last row.
                let (prev, next) = field.values[i].split_at_mut(k * (nr + 1));
                let prev = &prev[(k - 1) * (nr + 1)..];
                op.apply(prev, &mut inc);
                let wall_inc = w[k] - prev[nr];
                inc[nr - 1] -= op.upper[nr - 1] * wall_inc;
                lu.solve_in_place(&mut inc);
                let next = &mut next[..nr + 1];
                for j in 0..nr {
                    next[j] = prev[j] + inc[j];
                }
                next[nr] = w[k];
            }
        }
        Ok(field)
    }
}

/// One-shot march (see [`FluidMarcher::march`]).
pub fn march_fluid<T: Real>(
    wall: &WallField<T>,
    inlet: &[Vec<T>],
    params: &[SpeciesParams<T>],
    grid: &Grid<T>,
) -> Result<FluidField<T>> {
    FluidMarcher::new(params, grid)?.march(wall, inlet)
}

/// `dC/dr (1, z_k)` by the one-sided second-order difference
/// `(3 C_nr - 4 C_{nr-1} + C_{nr-2}) / (2 dr)`.
pub fn wall_flux_gradient<T: Real>(field: &FluidField<T>, grid: &Grid<T>) -> Result<Vec<Vec<T>>> {
    check_field(field, grid)?;
    if grid.nr < 2 {
        return Err(Error::GridMismatch("gradient flux needs nr >= 2".into()));
    }
    let nr = grid.nr;
    let inv = T::one() / (T::lit(2.0) * grid.dr());
    let three = T::lit(3.0);
    Ok((0..field.species())
        .map(|i| {
            (0..=grid.nz)
                .map(|k| {
                    let c = field.row(i, k);
                    let outer = c[nr] - c[nr - 1];
                    let inner = c[nr - 1] - c[nr - 2];
                    (three * outer - inner) * inv
                })
                .collect()
        })
        .collect())
}

/// `(1/beta) int_0^1 dC/dz r (1 - r^2) dr` at each station: centred
/// z-difference (one-sided at the ends), trapezoid in `r`.
pub fn wall_flux_integral<T: Real>(
    field: &FluidField<T>,
    grid: &Grid<T>,
    params: &[SpeciesParams<T>],
) -> Result<Vec<Vec<T>>> {
    check_field(field, grid)?;
    if grid.nz < 2 {
        return Err(Error::GridMismatch("integral flux needs nz >= 2".into()));
    }
    if params.len() != field.species() {
        return Err(Error::GridMismatch(
            "parameter count differs from field".into(),
        ));
    }
    let nz = grid.nz;
    let dz = grid.dz();
    let two_dz = T::lit(2.0) * dz;
    let mut dcdz = vec![T::zero(); grid.radial_nodes()];
    Ok(params
        .iter()
        .enumerate()
        .map(|(i, p)| {
            (0..=nz)
                .map(|k| {
                    let (lo, hi, span) = match k {
                        0 => (0, 1, dz),
                        k if k == nz => (nz - 1, nz, dz),
                        k => (k - 1, k + 1, two_dz),
                    };
                    let (a, b) = (field.row(i, lo), field.row(i, hi));
                    for ((d, &x), &y) in dcdz.iter_mut().zip(a).zip(b) {
                        *d = (y - x) / span;
                    }
                    grid.radial_weighted_integral(&dcdz) / p.beta_f
                })
                .collect()
        })
        .collect())
}

/// Wall flux in the requested form.
pub fn wall_flux<T: Real>(
    form: FluxForm,
    field: &FluidField<T>,
    grid: &Grid<T>,
    params: &[SpeciesParams<T>],
) -> Result<Vec<Vec<T>>> {
    match form {
        FluxForm::Gradient => wall_flux_gradient(field, grid),
        FluxForm::Integral => wall_flux_integral(field, grid, params),
    }
}

fn check_field<T: Real>(field: &FluidField<T>, grid: &Grid<T>) -> Result<()> {
    if field.matches_grid(grid) {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "field is {}x{}, grid is {}x{}",
            field.nr, field.nz, grid.nr, grid.nz
        )))
    }
}
