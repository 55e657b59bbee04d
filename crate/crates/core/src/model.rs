//! Grids and fields of the converter model, plus configuration checks.
//!
//! The fluid unknown `C_if(r, z)` lives on `[0,1] x [0,1]` with the wall at
//! `r = 1`; the wall unknown `C_is(z)` lives on the axial grid alone. Both
//! grids are uniform and contain their endpoints.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::KineticsSpec;
use crate::scalar::{serde_real, Real};

/// Largest inlet/wall mismatch at the `(r, z) = (1, 0)` corner that is still
/// considered compatible.
pub const COMPATIBILITY_TOL: f64 = 1e-12;

/// Transport and coupling constants of one species (or of the temperature).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SpeciesParams<T: Real> {
    pub name: String,
    /// Radial diffusivity in the fluid, `> 0`.
    pub beta_f: T,
    /// Wall coupling coefficient, `> 0`.
    pub gamma_s: T,
    /// Axial diffusivity on the wall, `>= 0`.
    pub theta_s: T,
    /// `-1` for consumed species, `+1` for produced ones.
    pub delta: T,
}

impl<T: Real> SpeciesParams<T> {
    pub fn new(name: impl Into<String>, beta_f: T, gamma_s: T, theta_s: T, delta: T) -> Self {
        Self {
            name: name.into(),
            beta_f,
            gamma_s,
            theta_s,
            delta,
        }
    }

    /// Same constants for every field; handy in tests.
    pub fn uniform(name: impl Into<String>, value: T, delta: T) -> Self {
        Self::new(name, value, value, value, delta)
    }

    pub fn is_consumed(&self) -> bool {
        self.delta == -T::one()
    }

    pub fn is_produced(&self) -> bool {
        self.delta == T::one()
    }

    /// `beta_f / gamma_s`, the weight of this species in the dissipativity
    /// inequality.
    pub fn dissipation_weight(&self) -> T {
        self.beta_f / self.gamma_s
    }
}

/// Uniform grid: `r_j = j/nr`, `z_k = k/nz`, plus the time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Grid<T: Real> {
    pub nr: usize,
    pub nz: usize,
    pub dt: T,
    pub t_end: T,
}

impl<T: Real> Grid<T> {
    pub const MIN_CELLS: usize = 4;

    pub fn new(nr: usize, nz: usize, dt: T, t_end: T) -> Self {
        Self { nr, nz, dt, t_end }
    }

    pub fn dr(&self) -> T {
        T::one() / T::from_usize_lossy(self.nr)
    }

    pub fn dz(&self) -> T {
        T::one() / T::from_usize_lossy(self.nz)
    }

    /// Radial node; `r(nr)` is exactly one.
    pub fn r(&self, j: usize) -> T {
        T::from_usize_lossy(j) / T::from_usize_lossy(self.nr)
    }

    /// Axial node; `z(nz)` is exactly one.
    pub fn z(&self, k: usize) -> T {
        T::from_usize_lossy(k) / T::from_usize_lossy(self.nz)
    }

    pub fn radial_nodes(&self) -> usize {
        self.nr + 1
    }

    pub fn axial_nodes(&self) -> usize {
        self.nz + 1
    }

    /// Number of time steps covering `[0, t_end]`.
    pub fn steps(&self) -> usize {
        let ratio = (self.t_end / self.dt).as_f64();
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
            nearest as usize
        } else {
            ratio.ceil() as usize
        }
    }

    /// Time of level `n`.
    pub fn time(&self, n: usize) -> T {
        T::from_usize_lossy(n) * self.dt
    }

    /// Quadrature weights `r_j (1 - r_j^2)` at the radial nodes.
    pub fn flow_weights(&self) -> Vec<T> {
        (0..=self.nr)
            .map(|j| {
                let r = self.r(j);
                r * (T::one() - r * r)
            })
            .collect()
    }

    /// Trapezoid of `f(r_j) r_j (1 - r_j^2)` over `[0, 1]`.
    pub fn radial_weighted_integral(&self, f: &[T]) -> T {
        assert_eq!(f.len(), self.radial_nodes());
        let half = T::lit(0.5);
        let mut acc = T::zero();
        for j in 0..=self.nr {
            let r = self.r(j);
            let w = r * (T::one() - r * r);
            let end = if j == 0 || j == self.nr {
                half
            } else {
                T::one()
            };
            acc += end * w * f[j];
        }
        acc * self.dr()
    }

    /// Trapezoid of `f(z_k)` over `[0, 1]`.
    pub fn axial_integral(&self, f: &[T]) -> T {
        assert_eq!(f.len(), self.axial_nodes());
        let half = T::lit(0.5);
        let inner = f[1..self.nz].iter().fold(T::zero(), |a, &v| a + v);
        (inner + half * (f[0] + f[self.nz])) * self.dz()
    }
}

/// Inlet profiles `C_i0(r)` and wall initial data `C_is0(z)`, per species.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct InitialData<T: Real> {
    pub inlet: Vec<Vec<T>>,
    pub wall_init: Vec<Vec<T>>,
}

impl<T: Real> InitialData<T> {
    /// Every species constant; `inlet[i] = wall[i] = values[i]`.
    pub fn constant(grid: &Grid<T>, inlet: &[T], wall: &[T]) -> Self {
        Self {
            inlet: inlet
                .iter()
                .map(|&c| vec![c; grid.radial_nodes()])
                .collect(),
            wall_init: wall.iter().map(|&c| vec![c; grid.axial_nodes()]).collect(),
        }
    }
}

/// All fluid unknowns at one time level. Storage is z-major:
/// `values[i][k * (nr + 1) + j] = C_if(r_j, z_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FluidField<T: Real> {
    pub nr: usize,
    pub nz: usize,
    pub values: Vec<Vec<T>>,
    pub time: T,
}

impl<T: Real> FluidField<T> {
    pub fn zeros(species: usize, nr: usize, nz: usize, time: T) -> Self {
        Self {
            nr,
            nz,
            values: vec![vec![T::zero(); (nr + 1) * (nz + 1)]; species],
            time,
        }
    }

    /// Field sampled from `f(species, r, z)`.
    pub fn from_fn(grid: &Grid<T>, species: usize, time: T, f: impl Fn(usize, T, T) -> T) -> Self {
        let mut field = Self::zeros(species, grid.nr, grid.nz, time);
        for (i, v) in field.values.iter_mut().enumerate() {
            for k in 0..=grid.nz {
                for j in 0..=grid.nr {
                    v[k * (grid.nr + 1) + j] = f(i, grid.r(j), grid.z(k));
                }
            }
        }
        field
    }

    pub fn species(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn get(&self, species: usize, j: usize, k: usize) -> T {
        self.values[species][k * (self.nr + 1) + j]
    }

    /// Radial profile of one species at axial station `k`.
    pub fn row(&self, species: usize, k: usize) -> &[T] {
        let w = self.nr + 1;
        &self.values[species][k * w..(k + 1) * w]
    }

    pub fn row_mut(&mut self, species: usize, k: usize) -> &mut [T] {
        let w = self.nr + 1;
        &mut self.values[species][k * w..(k + 1) * w]
    }

    /// Values at `r = 1` for every axial station.
    pub fn wall_trace(&self, species: usize) -> Vec<T> {
        (0..=self.nz)
            .map(|k| self.get(species, self.nr, k))
            .collect()
    }

    pub fn matches_grid(&self, grid: &Grid<T>) -> bool {
        self.nr == grid.nr && self.nz == grid.nz
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            nr: self.nr,
            nz: self.nz,
            values: self
                .values
                .iter()
                .map(|v| v.iter().map(|&x| f(x)).collect())
                .collect(),
            time: self.time,
        }
    }
}

/// Wall unknowns at one time level, `values[i][k] = C_is(z_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct WallField<T: Real> {
    pub values: Vec<Vec<T>>,
    pub time: T,
}

impl<T: Real> WallField<T> {
    pub fn new(values: Vec<Vec<T>>, time: T) -> Self {
        Self { values, time }
    }

    pub fn species(&self) -> usize {
        self.values.len()
    }

    pub fn axial_nodes(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// State vector `(C_1s, ..., C_Ns)` at station `k`.
    pub fn state_at(&self, k: usize, out: &mut [T]) {
        for (o, v) in out.iter_mut().zip(&self.values) {
            *o = v[k];
        }
    }

    /// `max |self - other|` over every species and station.
    pub fn sup_distance(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| (x - y).abs()))
            .fold(T::zero(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().flatten().all(|x| x.is_finite())
    }
}

/// Fluid and wall at one accepted time level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Snapshot<T: Real> {
    pub step: usize,
    pub time: T,
    pub fluid: FluidField<T>,
    pub wall: WallField<T>,
}

/// Full description of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig<T: Real> {
    pub grid: Grid<T>,
    pub species: Vec<SpeciesParams<T>>,
    pub kinetics: KineticsSpec<T>,
    pub initial: InitialData<T>,
}

impl<T: Real> ModelConfig<T> {
    pub fn species_names(&self) -> Vec<String> {
        self.species.iter().map(|s| s.name.clone()).collect()
    }
}

/// Outcome of the existence condition `mu < 2/sqrt(e)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ContractionDiagnostics<T: Real> {
    /// `sup_i (gamma_is/beta_if)^(1/2) / inf_i theta_is`; `+inf` when some
    /// `theta_is` is zero.
    #[serde(with = "serde_real")]
    pub mu: T,
    /// `2 / sqrt(e)`.
    #[serde(with = "serde_real")]
    pub threshold: T,
    /// Lipschitz constant `mu sqrt(e) / 2` of the coupling map.
    #[serde(with = "serde_real")]
    pub margin: T,
    /// Weight minimising the bound, `alpha^2 = 2/mu`.
    #[serde(with = "serde_real")]
    pub alpha_opt: T,
    pub satisfied: bool,
    pub degenerate: bool,
}

impl<T: Real> ContractionDiagnostics<T> {
    /// The three equivalent forms of the condition agree.
    pub fn is_consistent(&self) -> bool {
        self.satisfied == (self.margin < T::one()) && self.satisfied == (self.mu < self.threshold)
    }
}

/// Evaluates the contraction condition for a set of species.
pub fn contraction_margin<T: Real>(params: &[SpeciesParams<T>]) -> ContractionDiagnostics<T> {
    assert!(!params.is_empty(), "at least one species");
    let two = T::lit(2.0);
    let sqrt_e = T::one().exp().sqrt();
    let threshold = two / sqrt_e;

    let coupling = params
        .iter()
        .map(|p| (p.gamma_s / p.beta_f).sqrt())
        .fold(T::zero(), T::max);
    let theta_min = params.iter().map(|p| p.theta_s).fold(T::infinity(), T::min);
    let degenerate = !(theta_min > T::zero());

    if degenerate {
        return ContractionDiagnostics {
            mu: T::infinity(),
            threshold,
            margin: T::infinity(),
            alpha_opt: T::zero(),
            satisfied: false,
            degenerate,
        };
    }

    let mu = coupling / theta_min;
    let margin = mu * sqrt_e / two;
    // Existence condition in unscaled form.
    let satisfied = sqrt_e / two * coupling < theta_min;
    let diag = ContractionDiagnostics {
        mu,
        threshold,
        margin,
        alpha_opt: (two / mu).sqrt(),
        satisfied,
        degenerate,
    };
    if !diag.is_consistent() {
        log::warn!("contraction forms disagree at the rounding boundary: {diag:?}");
    }
    diag
}

/// Weighted fluid norm squared, per species: the supremum over axial
/// stations of the time integral (left rectangle) of the radial integral of
/// `U^2 r (1 - r^2)` (trapezoid).
pub fn weighted_fluid_norm<T: Real>(history: &[FluidField<T>], grid: &Grid<T>) -> Result<Vec<T>> {
    let first = history
        .first()
        .ok_or_else(|| Error::GridMismatch("empty field history".into()))?;
    if let Some(bad) = history
        .iter()
        .position(|f| !f.matches_grid(grid) || f.species() != first.species())
    {
        return Err(Error::GridMismatch(format!(
            "history entry {bad} does not match the {}x{} grid",
            grid.nr, grid.nz
        )));
    }
    let stations = station_time_integrals(history, grid, |x| x * x);
    Ok(stations
        .iter()
        .map(|s| s.iter().copied().fold(T::zero(), T::max))
        .collect())
}

/// `int_0^T int_0^1 g(U) r (1 - r^2) dr dt` for every species and station,
/// left-rectangle in time using the time tags of the history.
pub(crate) fn station_time_integrals<T: Real>(
    history: &[FluidField<T>],
    grid: &Grid<T>,
    g: impl Fn(T) -> T,
) -> Vec<Vec<T>> {
    let species = history[0].species();
    let mut acc = vec![vec![T::zero(); grid.axial_nodes()]; species];
    let mut buf = vec![T::zero(); grid.radial_nodes()];
    for pair in history.windows(2) {
        let (now, next) = (&pair[0], &pair[1]);
        let span = next.time - now.time;
        for (i, acc_i) in acc.iter_mut().enumerate() {
            for (k, slot) in acc_i.iter_mut().enumerate() {
                for (b, &u) in buf.iter_mut().zip(now.row(i, k)) {
                    *b = g(u);
                }
                *slot += span * grid.radial_weighted_integral(&buf);
            }
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub severity: Severity,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    fn push(&mut self, severity: Severity, code: &str, message: String) {
        self.issues.push(Issue {
            severity,
            code: code.to_string(),
            message,
        });
    }

    pub fn error(&mut self, code: &str, message: impl Into<String>) {
        self.push(Severity::Error, code, message.into());
    }

    pub fn warning(&mut self, code: &str, message: impl Into<String>) {
        self.push(Severity::Warning, code, message.into());
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Warning)
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.issues.iter().any(|i| i.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            let tag = match issue.severity {
                Severity::Error => "ERROR",
                Severity::Warning => "WARNING",
            };
            writeln!(f, "{tag} {}: {}", issue.code, issue.message)?;
        }
        Ok(())
    }
}

/// Checks hard invariants (errors) and the structural conditions of the
/// model (warnings). Pure; never aborts on warnings.
pub fn validate_config<T: Real>(cfg: &ModelConfig<T>) -> ValidationReport {
    let mut report = ValidationReport::default();
    let grid = &cfg.grid;

    if grid.nr < Grid::<T>::MIN_CELLS || grid.nz < Grid::<T>::MIN_CELLS {
        report.error(
            "GRID_TOO_SMALL",
            format!(
                "grid.nr = {} and grid.nz = {} must both be >= {}",
                grid.nr,
                grid.nz,
                Grid::<T>::MIN_CELLS
            ),
        );
    }
    if !(grid.dt > T::zero()) || !grid.dt.is_finite() {
        report.error(
            "BAD_TIME_STEP",
            format!("grid.dt = {} must be > 0", grid.dt),
        );
    } else if !(grid.t_end >= grid.dt) || !grid.t_end.is_finite() {
        report.error(
            "BAD_HORIZON",
            format!(
                "grid.t_end = {} must be >= grid.dt = {}",
                grid.t_end, grid.dt
            ),
        );
    }

    if cfg.species.is_empty() {
        report.error("NO_SPECIES", "at least one species section is required");
    }
    for s in &cfg.species {
        let name = &s.name;
        if !(s.beta_f > T::zero()) {
            report.error(
                "NONPOSITIVE_BETA",
                format!("species.{name}.beta_f = {} must be > 0", s.beta_f),
            );
        }
        if !(s.gamma_s > T::zero()) {
            report.error(
                "NONPOSITIVE_GAMMA",
                format!("species.{name}.gamma_s = {} must be > 0", s.gamma_s),
            );
        }
        if !(s.theta_s >= T::zero()) {
            report.error(
                "NEGATIVE_THETA",
                format!("species.{name}.theta_s = {} must be >= 0", s.theta_s),
            );
        } else if s.theta_s == T::zero() {
            report.warning(
                "DEGENERATE",
                format!("species.{name}.theta_s = 0: no axial wall diffusion, existence condition cannot hold"),
            );
        }
        if !(s.is_consumed() || s.is_produced()) {
            report.error(
                "BAD_DELTA",
                format!("species.{name}.delta = {} must be -1 or +1", s.delta),
            );
        }
    }

    let n = cfg.species.len();
    let init = &cfg.initial;
    let mut shapes_ok = init.inlet.len() == n && init.wall_init.len() == n;
    if !shapes_ok {
        report.error(
            "SAMPLE_COUNT",
            format!(
                "initial data covers {} inlet / {} wall profiles for {n} species",
                init.inlet.len(),
                init.wall_init.len()
            ),
        );
    }
    for (i, s) in cfg.species.iter().enumerate() {
        if let Some(p) = init.inlet.get(i) {
            if p.len() != grid.radial_nodes() {
                shapes_ok = false;
                report.error(
                    "SAMPLE_COUNT",
                    format!(
                        "species.{}.inlet has {} samples, expected {}",
                        s.name,
                        p.len(),
                        grid.radial_nodes()
                    ),
                );
            } else if p.iter().any(|x| !x.is_finite()) {
                report.error(
                    "NONFINITE",
                    format!("species.{}.inlet has non-finite samples", s.name),
                );
            }
        }
        if let Some(p) = init.wall_init.get(i) {
            if p.len() != grid.axial_nodes() {
                shapes_ok = false;
                report.error(
                    "SAMPLE_COUNT",
                    format!(
                        "species.{}.wall_init has {} samples, expected {}",
                        s.name,
                        p.len(),
                        grid.axial_nodes()
                    ),
                );
            } else if p.iter().any(|x| !x.is_finite()) {
                report.error(
                    "NONFINITE",
                    format!("species.{}.wall_init has non-finite samples", s.name),
                );
            }
        }
    }

    if let Some(arity) = cfg.kinetics.arity_hint() {
        if arity != n {
            report.error(
                "KINETICS_ARITY",
                format!("kinetics expects {arity} species, configuration declares {n}"),
            );
        }
    }

    if shapes_ok {
        let tol = T::lit(COMPATIBILITY_TOL);
        for (i, s) in cfg.species.iter().enumerate() {
            let at_wall = init.inlet[i][grid.nr];
            let at_inlet = init.wall_init[i][0];
            if (at_wall - at_inlet).abs() > tol {
                report.warning(
                    "COMPATIBILITY",
                    format!(
                        "species.{}: inlet(r=1) = {at_wall} differs from wall_init(z=0) = {at_inlet}",
                        s.name
                    ),
                );
            }
        }
    }

    let positive = cfg
        .species
        .iter()
        .all(|s| s.beta_f > T::zero() && s.gamma_s > T::zero());
    if positive && !cfg.species.is_empty() {
        let diag = contraction_margin(&cfg.species);
        if !diag.satisfied && !diag.degenerate {
            report.warning(
                "CONTRACTION",
                format!(
                    "mu = {} >= 2/sqrt(e) = {}; fixed-point convergence is not guaranteed",
                    diag.mu, diag.threshold
                ),
            );
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::KineticsSpec;

    fn constant_config(c: f64) -> ModelConfig<f64> {
        let grid = Grid::new(8, 8, 0.01, 0.1);
        let species = vec![
            SpeciesParams::uniform("A", 1.0, -1.0),
            SpeciesParams::uniform("B", 1.0, 1.0),
        ];
        ModelConfig {
            initial: InitialData::constant(&grid, &[c, c], &[c, c]),
            grid,
            species,
            kinetics: KineticsSpec::Zero,
        }
    }

    #[test]
    fn constant_data_validates_clean() {
        let report = validate_config(&constant_config(0.3));
        assert!(report.is_empty(), "{report}");
    }

    #[test]
    fn zero_beta_is_an_error_naming_the_field() {
        let mut cfg = constant_config(1.0);
        cfg.species[1].beta_f = 0.0;
        let report = validate_config(&cfg);
        let err = report.errors().next().expect("an error");
        assert_eq!(err.code, "NONPOSITIVE_BETA");
        assert!(err.message.contains("species.B.beta_f"));
    }

    #[test]
    fn bad_delta_and_small_grid_are_errors() {
        let mut cfg = constant_config(1.0);
        cfg.species[0].delta = 0.5;
        cfg.grid.nr = 3;
        let report = validate_config(&cfg);
        assert!(report.has_code("BAD_DELTA"));
        assert!(report.has_code("GRID_TOO_SMALL"));
    }

    #[test]
    fn incompatible_corner_is_only_a_warning() {
        let grid = Grid::new(8, 8, 0.01, 0.1);
        let mut cfg = constant_config(1.0);
        cfg.initial = InitialData::constant(&grid, &[0.02, 500.0], &[0.02, 490.0]);
        let report = validate_config(&cfg);
        assert!(!report.has_errors());
        let warnings: Vec<_> = report.warnings().collect();
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].code, "COMPATIBILITY");
        assert!(warnings[0].message.contains("species.B"));
    }

    #[test]
    fn degenerate_theta_warns() {
        let mut cfg = constant_config(1.0);
        cfg.species[0].theta_s = 0.0;
        let report = validate_config(&cfg);
        assert!(!report.has_errors());
        assert!(report.has_code("DEGENERATE"));
        // mu is infinite, which is reported as degenerate rather than CONTRACTION
        assert!(!report.has_code("CONTRACTION"));
    }

    #[test]
    fn validation_is_idempotent() {
        let mut cfg = constant_config(1.0);
        cfg.species[0].gamma_s = 9.0;
        assert_eq!(validate_config(&cfg), validate_config(&cfg));
        assert!(validate_config(&cfg).has_code("CONTRACTION"));
    }

    #[test]
    fn unit_constants_contract() {
        let d = contraction_margin(&[SpeciesParams::uniform("A", 1.0f64, -1.0)]);
        assert_eq!(d.mu, 1.0);
        assert!((d.margin - 0.5 * 1f64.exp().sqrt()).abs() < 1e-15);
        assert!((d.margin - 0.8243606353500641).abs() < 1e-12);
        assert!((d.alpha_opt - 2f64.sqrt()).abs() < 1e-15);
        assert!(d.satisfied && d.is_consistent() && !d.degenerate);
    }

    #[test]
    fn strong_coupling_fails_condition() {
        let d = contraction_margin(&[SpeciesParams::new("A", 1.0f64, 4.0, 1.0, -1.0)]);
        assert_eq!(d.mu, 2.0);
        assert!((d.threshold - 1.2130613194252668).abs() < 1e-15);
        assert!(!d.satisfied && d.is_consistent());
    }

    #[test]
    fn zero_theta_gives_infinite_mu() {
        let d = contraction_margin(&[
            SpeciesParams::uniform("A", 1.0f64, -1.0),
            SpeciesParams::new("B", 1.0, 1.0, 0.0, 1.0),
        ]);
        assert!(d.mu.is_infinite() && d.mu > 0.0);
        assert!(!d.satisfied && d.degenerate);
    }

    #[test]
    fn mu_scales_with_root_of_gamma() {
        let base = [
            SpeciesParams::new("A", 1.3f64, 0.7, 2.0, -1.0),
            SpeciesParams::new("B", 0.4, 0.9, 1.5, 1.0),
        ];
        let mu0 = contraction_margin(&base).mu;
        for c in [0.01, 0.5, 3.0, 250.0] {
            let scaled: Vec<_> = base
                .iter()
                .map(|p| SpeciesParams {
                    gamma_s: c * p.gamma_s,
                    ..p.clone()
                })
                .collect();
            let mu = contraction_margin(&scaled).mu;
            assert!((mu - c.sqrt() * mu0).abs() <= 1e-14 * mu, "c = {c}");
        }
    }

    fn history(grid: &Grid<f64>, f: impl Fn(f64, f64, f64) -> f64) -> Vec<FluidField<f64>> {
        (0..=grid.steps())
            .map(|n| {
                let t = grid.time(n);
                FluidField::from_fn(grid, 1, t, |_, r, z| f(r, z, t))
            })
            .collect()
    }

    #[test]
    fn weighted_norm_of_unit_field() {
        let grid = Grid::new(64, 8, 0.05, 2.0);
        let norm = weighted_fluid_norm(&history(&grid, |_, _, _| 1.0), &grid).unwrap();
        // T * int_0^1 r(1-r^2) dr = T/4, trapezoid error O(dr^2)
        assert!(
            (norm[0] - 0.5).abs() < 2.0 * grid.dr().powi(2),
            "{}",
            norm[0]
        );
    }

    #[test]
    fn weighted_norm_of_zero_field_is_zero() {
        let grid = Grid::new(16, 8, 0.1, 1.0);
        let norm = weighted_fluid_norm(&history(&grid, |_, _, _| 0.0), &grid).unwrap();
        assert_eq!(norm, vec![0.0]);
    }

    #[test]
    fn weighted_norm_of_radial_field_matches_quadrature_oracle() {
        // Composite Simpson on 20000 panels of r^3 (1 - r^2): independent of
        // the trapezoid rule under test. Exact value 1/12.
        let m = 20_000;
        let h = 1.0 / m as f64;
        let g = |r: f64| r.powi(3) * (1.0 - r * r);
        let simpson: f64 = (0..=m)
            .map(|i| {
                let w = if i == 0 || i == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * g(i as f64 * h)
            })
            .sum::<f64>()
            * h
            / 3.0;
        assert!((simpson - 1.0 / 12.0).abs() < 1e-14);

        let grid = Grid::new(256, 4, 0.1, 1.0);
        let norm = weighted_fluid_norm(&history(&grid, |r, _, _| r), &grid).unwrap();
        assert!((norm[0] - simpson).abs() < 1e-4, "{}", norm[0]);
    }

    #[test]
    fn weighted_norm_rejects_mismatched_history() {
        let grid = Grid::new(8, 8, 0.1, 0.2);
        let mut h = history(&grid, |_, _, _| 1.0);
        h.push(FluidField::zeros(1, 16, 8, 0.3));
        assert!(matches!(
            weighted_fluid_norm(&h, &grid),
            Err(Error::GridMismatch(_))
        ));
        assert!(weighted_fluid_norm::<f64>(&[], &grid).is_err());
    }

    #[test]
    fn weighted_norm_is_quadratic() {
        let grid = Grid::new(16, 8, 0.1, 0.5);
        let h = history(&grid, |r, z, t| (3.0 * r + z).sin() + t);
        let base = weighted_fluid_norm(&h, &grid).unwrap()[0];
        for c in [-2.0, 0.5, 4.0] {
            let scaled: Vec<_> = h.iter().map(|f| f.map(|x| c * x)).collect();
            let n = weighted_fluid_norm(&scaled, &grid).unwrap()[0];
            assert!((n - c * c * base).abs() <= 1e-14 * n.abs().max(1.0));
        }
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let g = Grid::new(7, 13, 0.1f64, 1.0);
        assert_eq!(g.r(0), 0.0);
        assert_eq!(g.r(7), 1.0);
        assert_eq!(g.z(13), 1.0);
        let g32 = Grid::new(7, 13, 0.1f32, 1.0);
        assert_eq!(g32.r(7), 1.0f32);
    }

    #[test]
    fn step_count_tolerates_rounding() {
        assert_eq!(Grid::new(4, 4, 0.01f64, 1.0).steps(), 100);
        assert_eq!(Grid::new(4, 4, 0.3f64, 1.0).steps(), 4);
        assert_eq!(Grid::new(4, 4, 0.1f32, 0.3).steps(), 3);
    }
}
