//! Runtime versions of the qualitative bounds on computed trajectories.
//! Consumed species are bounded above by their data; produced species are
//! bounded below by their data and above by an exponential envelope.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    station_time_integrals, FluidField, Grid, InitialData, Snapshot, SpeciesParams, WallField,
};
use crate::scalar::{serde_real, Real};

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "field", rename_all = "lowercase")]
pub enum Location {
    Fluid { j: usize, k: usize },
    Wall { k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PointViolation<T: Real> {
    pub species: usize,
    pub location: Location,
    pub time: T,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NonnegativityVerdict<T: Real> {
    pub pass: bool,
    pub violations: Vec<PointViolation<T>>,
}

/// Every grid value below `-tol`.
pub fn check_nonnegativity<T: Real>(
    fluid: &FluidField<T>,
    wall: &WallField<T>,
    tol: T,
) -> NonnegativityVerdict<T> {
    let mut violations = Vec::new();
    for (i, v) in fluid.values.iter().enumerate() {
        for (idx, &x) in v.iter().enumerate() {
            if x < -tol {
                violations.push(PointViolation {
                    species: i,
                    location: Location::Fluid {
                        j: idx % (fluid.nr + 1),
                        k: idx / (fluid.nr + 1),
                    },
                    time: fluid.time,
                    value: x,
                });
            }
        }
    }
    for (i, v) in wall.values.iter().enumerate() {
        for (k, &x) in v.iter().enumerate() {
            if x < -tol {
                violations.push(PointViolation {
                    species: i,
                    location: Location::Wall { k },
                    time: wall.time,
                    value: x,
                });
            }
        }
    }
    NonnegativityVerdict {
        pass: violations.is_empty(),
        violations,
    }
}

/// Bounds computed from initial data alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BoundEnvelope<T: Real> {
    /// `max(sup inlet, sup wall_init)`; bound of consumed species.
    pub a_upper: Vec<T>,
    pub a_min: Vec<T>,
    pub a_max: Vec<T>,
    #[serde(with = "serde_real")]
    pub lambda: T,
}

impl<T: Real> BoundEnvelope<T> {
    pub fn from_initial(initial: &InitialData<T>, lambda: T) -> Self {
        let sup = |v: &[T]| v.iter().copied().fold(T::neg_infinity(), T::max);
        let inf = |v: &[T]| v.iter().copied().fold(T::infinity(), T::min);
        let (a_min, a_max): (Vec<T>, Vec<T>) = initial
            .inlet
            .iter()
            .zip(&initial.wall_init)
            .map(|(a, b)| (inf(a).min(inf(b)), sup(a).max(sup(b))))
            .unzip();
        Self {
            a_upper: a_max.clone(),
            a_min,
            a_max,
            lambda,
        }
    }

    /// Bound of a consumed species from a later snapshot, used to confirm
    /// the initial bound is never exceeded.
    pub fn upper_from_snapshot(fluid: &FluidField<T>, wall: &WallField<T>) -> Vec<T> {
        fluid
            .values
            .iter()
            .zip(&wall.values)
            .map(|(a, b)| a.iter().chain(b).copied().fold(T::neg_infinity(), T::max))
            .collect()
    }

    pub fn exponential_bound(&self, species: usize, t: T) -> T {
        self.a_max[species] * (self.lambda * t).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeItem {
    /// `C <= A_i0`, consumed species.
    Upper,
    /// `C >= a_i0_min`, produced species.
    Lower,
    /// `C <= a_i0_max e^(lambda t)`, produced species.
    Exponential,
}

impl EnvelopeItem {
    pub fn key(self) -> &'static str {
        match self {
            Self::Upper => "UPPER_BOUND",
            Self::Lower => "LOWER_BOUND",
            Self::Exponential => "EXPONENTIAL_ENVELOPE",
        }
    }
}

/// Outcome of one item for one species. `excess` is the largest amount by
/// which any value crossed the bound (negative when strictly inside).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EnvelopeVerdict<T: Real> {
    pub species: usize,
    pub item: EnvelopeItem,
    pub pass: bool,
    #[serde(with = "serde_real")]
    pub excess: T,
    #[serde(with = "serde_real")]
    pub at_time: T,
}

/// Streaming envelope checker; feed it every accepted level.
#[derive(Debug, Clone)]
pub struct EnvelopeChecker<T: Real> {
    envelope: BoundEnvelope<T>,
    tol: T,
    verdicts: Vec<EnvelopeVerdict<T>>,
}

impl<T: Real> EnvelopeChecker<T> {
    pub fn new(envelope: BoundEnvelope<T>, params: &[SpeciesParams<T>], tol: T) -> Self {
        let mut verdicts = Vec::new();
        for (i, p) in params.iter().enumerate() {
            let items: &[EnvelopeItem] = if p.is_consumed() {
                &[EnvelopeItem::Upper]
            } else {
                &[EnvelopeItem::Lower, EnvelopeItem::Exponential]
            };
            for &item in items {
                verdicts.push(EnvelopeVerdict {
                    species: i,
                    item,
                    pass: true,
                    excess: T::neg_infinity(),
                    at_time: T::zero(),
                });
            }
        }
        Self {
            envelope,
            tol,
            verdicts,
        }
    }

    pub fn observe(&mut self, fluid: &FluidField<T>, wall: &WallField<T>) {
        let t = wall.time;
        for v in &mut self.verdicts {
            let i = v.species;
            let values = fluid.values[i].iter().chain(&wall.values[i]).copied();
            let excess = match v.item {
                EnvelopeItem::Upper => {
                    let bound = self.envelope.a_upper[i];
                    values.map(|x| x - bound).fold(T::neg_infinity(), T::max)
                }
                EnvelopeItem::Lower => {
                    let bound = self.envelope.a_min[i];
                    values.map(|x| bound - x).fold(T::neg_infinity(), T::max)
                }
                EnvelopeItem::Exponential => {
                    let bound = self.envelope.exponential_bound(i, t);
                    values.map(|x| x - bound).fold(T::neg_infinity(), T::max)
                }
            };
            if excess > v.excess {
                v.excess = excess;
                v.at_time = t;
            }
            v.pass = v.excess <= self.tol;
        }
    }

    pub fn verdicts(&self) -> &[EnvelopeVerdict<T>] {
        &self.verdicts
    }

    pub fn finish(self) -> Vec<EnvelopeVerdict<T>> {
        self.verdicts
    }
}

/// Envelope items over a stored trajectory.
pub fn check_envelopes<T: Real>(
    trajectory: &[Snapshot<T>],
    envelope: &BoundEnvelope<T>,
    params: &[SpeciesParams<T>],
    tol: T,
) -> Vec<EnvelopeVerdict<T>> {
    let mut checker = EnvelopeChecker::new(envelope.clone(), params, tol);
    for s in trajectory {
        checker.observe(&s.fluid, &s.wall);
    }
    checker.finish()
}

/// Wall energy series with its minimal affine envelope, and the fluid
/// station integrals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EnergyGrowthReport<T: Real> {
    pub times: Vec<T>,
    /// `energy[i][n] = int_0^1 C_is(z, t_n)^2 dz`.
    pub energy: Vec<Vec<T>>,
    pub slope: Vec<T>,
    pub intercept: Vec<T>,
    /// `int_0^T int_0^1 C_if^2 r (1 - r^2) dr dt` per station.
    pub fluid_station_integrals: Vec<Vec<T>>,
    pub dominated: bool,
}

/// Incremental form of [`energy_growth_report`].
#[derive(Debug, Clone)]
pub struct EnergyAccumulator<T: Real> {
    grid: Grid<T>,
    times: Vec<T>,
    energy: Vec<Vec<T>>,
    stations: Vec<Vec<T>>,
    last_fluid: Option<FluidField<T>>,
}

impl<T: Real> EnergyAccumulator<T> {
    pub fn new(grid: &Grid<T>, species: usize) -> Self {
        Self {
            grid: *grid,
            times: Vec::new(),
            energy: vec![Vec::new(); species],
            stations: vec![vec![T::zero(); grid.axial_nodes()]; species],
            last_fluid: None,
        }
    }

    pub fn observe(&mut self, fluid: &FluidField<T>, wall: &WallField<T>) {
        let g = &self.grid;
        self.times.push(wall.time);
        for (e, w) in self.energy.iter_mut().zip(&wall.values) {
            let sq: Vec<T> = w.iter().map(|&x| x * x).collect();
            e.push(g.axial_integral(&sq));
        }
        if let Some(prev) = self.last_fluid.take() {
            let pair = [prev, fluid.clone()];
            let inc = station_time_integrals(&pair, g, |x| x * x);
            for (acc, d) in self.stations.iter_mut().zip(inc) {
                for (a, b) in acc.iter_mut().zip(d) {
                    *a += b;
                }
            }
        }
        self.last_fluid = Some(fluid.clone());
    }

    pub fn finish(self) -> Result<EnergyGrowthReport<T>> {
        if self.times.len() < 2 {
            return Err(Error::GridMismatch(
                "energy report needs at least two time levels".into(),
            ));
        }
        let t0 = self.times[0];
        let mut slope = Vec::new();
        let mut intercept = Vec::new();
        let mut dominated = true;
        for e in &self.energy {
            let b = e[0];
            let a = self
                .times
                .iter()
                .zip(e)
                .skip(1)
                .map(|(&t, &x)| (x - b) / (t - t0))
                .fold(T::neg_infinity(), T::max);
            let slack = T::lit(1e-12);
            dominated &= self
                .times
                .iter()
                .zip(e)
                .all(|(&t, &x)| x <= a * (t - t0) + b + slack * T::one().max(x.abs()));
            dominated &= a.is_finite();
            slope.push(a);
            intercept.push(b);
        }
        Ok(EnergyGrowthReport {
            times: self.times,
            energy: self.energy,
            slope,
            intercept,
            fluid_station_integrals: self.stations,
            dominated,
        })
    }
}

/// Energy series and envelope of a stored trajectory.
pub fn energy_growth_report<T: Real>(
    trajectory: &[Snapshot<T>],
    grid: &Grid<T>,
) -> Result<EnergyGrowthReport<T>> {
    let species = trajectory.first().map_or(0, |s| s.wall.species());
    let mut acc = EnergyAccumulator::new(grid, species);
    for s in trajectory {
        acc.observe(&s.fluid, &s.wall);
    }
    acc.finish()
}
