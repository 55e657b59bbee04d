//! Grid-refinement studies on the Graetz problem: inlet 1, wall 0, `beta = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluid::{march_fluid, wall_flux_gradient, wall_flux_integral};
use crate::model::{FluidField, Grid, SpeciesParams, WallField};
use crate::scalar::Real;

/// Axial resolution held fixed while the radial grid is refined.
pub const RADIAL_STUDY_NZ: usize = 512;
pub const BASE_NR: usize = 16;
pub const BASE_NZ: usize = 32;

pub fn graetz_params<T: Real>() -> Vec<SpeciesParams<T>> {
    vec![SpeciesParams::uniform("C", T::one(), -T::one())]
}

/// Graetz field with inlet 1 and wall 0.
pub fn graetz_field<T: Real>(nr: usize, nz: usize) -> Result<(FluidField<T>, Grid<T>)> {
    let grid = Grid::new(nr, nz, T::one(), T::one());
    let wall = WallField::new(vec![vec![T::zero(); nz + 1]], T::zero());
    let inlet = vec![vec![T::one(); nr + 1]];
    Ok((march_fluid(&wall, &inlet, &graetz_params(), &grid)?, grid))
}

/// `C(0, 1)` of the Graetz field.
pub fn graetz_centerline<T: Real>(nr: usize, nz: usize) -> Result<T> {
    Ok(graetz_field::<T>(nr, nz)?.0.get(0, 0, nz))
}

/// Order `p` from three values on grids refined by 2: `log2 |a-b| / |b-c|`.
pub fn observed_order(coarse: f64, mid: f64, fine: f64) -> f64 {
    ((coarse - mid) / (mid - fine)).abs().log2()
}

/// Order from two error measures on grids refined by 2.
pub fn decay_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Discrete `L^2(z)` distance between the gradient and integral wall fluxes
/// of species 0, on the nodes `z_k`, `k = 1..nz` (trapezoid weights). The
/// inlet node is left out: the continuous flux is unbounded there when
/// inlet and wall disagree at the corner.
pub fn flux_gap_l2<T: Real>(
    field: &FluidField<T>,
    grid: &Grid<T>,
    params: &[SpeciesParams<T>],
) -> Result<T> {
    let g = wall_flux_gradient(field, grid)?;
    let q = wall_flux_integral(field, grid, params)?;
    let nz = grid.nz;
    let half = T::lit(0.5);
    let sum = (1..=nz).fold(T::zero(), |acc, k| {
        let w = if k == nz { half } else { T::one() };
        let d = g[0][k] - q[0][k];
        acc + w * d * d
    });
    Ok((sum * grid.dz()).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialLevel {
    pub nr: usize,
    pub nz: usize,
    pub centerline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxLevel {
    pub nr: usize,
    pub nz: usize,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub radial: Vec<RadialLevel>,
    /// One order per consecutive triple of `radial`.
    pub radial_orders: Vec<f64>,
    pub flux: Vec<FluxLevel>,
    /// One order per consecutive pair of `flux`.
    pub flux_orders: Vec<f64>,
}

/// `levels >= 3` refinements, each doubling the resolution.
pub fn convergence_study(levels: usize) -> Result<ConvergenceStudy> {
    if levels < 3 {
        return Err(Error::Settings(format!(
            "convergence needs at least 3 levels, got {levels}"
        )));
    }
    let radial = (0..levels)
        .map(|l| {
            let nr = BASE_NR << l;
            Ok(RadialLevel {
                nr,
                nz: RADIAL_STUDY_NZ,
                centerline: graetz_centerline::<f64>(nr, RADIAL_STUDY_NZ)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let radial_orders = radial
        .windows(3)
        .map(|w| observed_order(w[0].centerline, w[1].centerline, w[2].centerline))
        .collect();
    let params = graetz_params::<f64>();
    let flux = (0..levels)
        .map(|l| {
            let (nr, nz) = (BASE_NR << l, BASE_NZ << l);
            let (field, grid) = graetz_field::<f64>(nr, nz)?;
            Ok(FluxLevel {
                nr,
                nz,
                gap: flux_gap_l2(&field, &grid, &params)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let flux_orders = flux
        .windows(2)
        .map(|w| decay_order(w[0].gap, w[1].gap))
        .collect();
    Ok(ConvergenceStudy {
        radial,
        radial_orders,
        flux,
        flux_orders,
    })
}

impl ConvergenceStudy {
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "Graetz centerline C(0, 1), radial refinement at nz = {RADIAL_STUDY_NZ}"
        );
        for l in &self.radial {
            let _ = writeln!(s, "  nr = {:<6}{:.12e}", l.nr, l.centerline);
        }
        for (w, p) in self.radial.windows(3).zip(&self.radial_orders) {
            let _ = writeln!(
                s,
                "  order over nr = {}, {}, {}: {p:.4}",
                w[0].nr, w[1].nr, w[2].nr
            );
        }
        let _ = writeln!(s, "Wall flux, gradient vs integral form, L2(z) gap");
        for l in &self.flux {
            let _ = writeln!(s, "  {:>5} x {:<6}{:.6e}", l.nr, l.nz, l.gap);
        }
        for (w, p) in self.flux.windows(2).zip(&self.flux_orders) {
            let _ = writeln!(
                s,
                "  order {}x{} -> {}x{}: {p:.4}",
                w[0].nr, w[0].nz, w[1].nr, w[1].nz
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_exact_sequences() {
        assert!((observed_order(1.0 + 1.0, 1.0 + 0.25, 1.0 + 0.0625) - 2.0).abs() < 1e-12);
        assert!((decay_order(0.4, 0.2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_levels() {
        assert!(convergence_study(2).is_err());
    }

    #[test]
    fn gap_vanishes_for_constant_fields() {
        let grid = Grid::new(8, 8, 1.0, 1.0);
        let f = FluidField::from_fn(&grid, 1, 0.0, |_, _, _| 0.7);
        assert_eq!(flux_gap_l2(&f, &grid, &graetz_params()).unwrap(), 0.0);
    }
}
