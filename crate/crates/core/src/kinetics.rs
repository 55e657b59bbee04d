//! Surface reaction rates and sampling checks of their structural hypotheses.
//!
//! A rate law maps the wall state `(C_1s, ..., C_Ns)` to nonnegative rates
//! `r_i`; the sign `delta_i` is applied by the wall equation, not here.
//! Inputs are always clipped to their positive part and then clamped to a
//! per-species box, so every law is globally Lipschitz on what it sees.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SpeciesParams, WallField};
use crate::scalar::Real;

/// Minimum number of sample points (and pairs) per hypothesis.
pub const MIN_SAMPLES: usize = 1024;
/// Slack used when testing the hypotheses for violations.
pub const HYPOTHESIS_SLACK: f64 = 1e-12;
/// Sampled pairs for the Lipschitz estimate.
pub const LIPSCHITZ_PAIRS: usize = 10_000;
/// Inflation applied to the largest observed difference quotient.
pub const LIPSCHITZ_SAFETY: f64 = 1.25;

/// Raw rate law, evaluated on already clipped and clamped states.
pub trait RateLaw<T: Real>: Send + Sync {
    fn arity(&self) -> usize;
    fn rates(&self, state: &[T], out: &mut [T]);
}

/// `r = 0`.
#[derive(Debug, Clone)]
pub struct ZeroRates {
    pub arity: usize,
}

impl<T: Real> RateLaw<T> for ZeroRates {
    fn arity(&self) -> usize {
        self.arity
    }

    fn rates(&self, _: &[T], out: &mut [T]) {
        out.fill(T::zero());
    }
}

/// `r_i = k x_i`.
#[derive(Debug, Clone)]
pub struct LinearConsumption<T> {
    pub arity: usize,
    pub rate_constant: T,
}

impl<T: Real> RateLaw<T> for LinearConsumption<T> {
    fn arity(&self) -> usize {
        self.arity
    }

    fn rates(&self, state: &[T], out: &mut [T]) {
        for (o, &x) in out.iter_mut().zip(state) {
            *o = self.rate_constant * x;
        }
    }
}

/// Single-step oxidation `fuel + oxidizer -> products` with mass-action
/// kinetics and an Arrhenius factor:
///
/// ```text
/// r = A * exp(-E / T) * x_fuel * x_oxidizer,    r_i = channel_i * r
/// ```
///
/// The temperature channel carries `heat_release * r`; species that take no
/// part in the reaction have a zero channel.
#[derive(Debug, Clone)]
pub struct CoOxidation<T> {
    pub fuel: usize,
    pub oxidizer: usize,
    pub temperature: Option<usize>,
    pub prefactor: T,
    pub activation_energy: T,
    pub channels: Vec<T>,
}

impl<T: Real> CoOxidation<T> {
    pub fn arrhenius(&self, state: &[T]) -> T {
        match self.temperature {
            Some(_) if self.activation_energy == T::zero() => T::one(),
            Some(t) if state[t] > T::zero() => (-self.activation_energy / state[t]).exp(),
            Some(_) => T::zero(),
            None => T::one(),
        }
    }

    pub fn reaction_rate(&self, state: &[T]) -> T {
        self.prefactor * self.arrhenius(state) * state[self.fuel] * state[self.oxidizer]
    }
}

impl<T: Real> RateLaw<T> for CoOxidation<T> {
    fn arity(&self) -> usize {
        self.channels.len()
    }

    fn rates(&self, state: &[T], out: &mut [T]) {
        let r = self.reaction_rate(state);
        for (o, &c) in out.iter_mut().zip(&self.channels) {
            *o = c * r;
        }
    }
}

/// Wraps a closure as a rate law.
pub struct FnRates<F> {
    pub arity: usize,
    pub f: F,
}

impl<T: Real, F: Fn(&[T], &mut [T]) + Send + Sync> RateLaw<T> for FnRates<F> {
    fn arity(&self) -> usize {
        self.arity
    }

    fn rates(&self, state: &[T], out: &mut [T]) {
        (self.f)(state, out)
    }
}

/// A rate law together with its evaluation box and optional known Lipschitz
/// constants.
#[derive(Clone)]
pub struct KineticsModel<T: Real> {
    law: Arc<dyn RateLaw<T>>,
    pub name: String,
    pub lipschitz_hint: Option<Vec<T>>,
    pub domain_box: Vec<(T, T)>,
}

impl<T: Real> fmt::Debug for KineticsModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KineticsModel")
            .field("name", &self.name)
            .field("arity", &self.arity())
            .field("lipschitz_hint", &self.lipschitz_hint)
            .field("domain_box", &self.domain_box)
            .finish()
    }
}

impl<T: Real> KineticsModel<T> {
    /// Unbounded box `[0, inf)` on every species.
    pub fn new(name: impl Into<String>, law: impl RateLaw<T> + 'static) -> Self {
        let n = law.arity();
        Self {
            law: Arc::new(law),
            name: name.into(),
            lipschitz_hint: None,
            domain_box: vec![(T::zero(), T::infinity()); n],
        }
    }

    pub fn zero(arity: usize) -> Self {
        Self::new("zero", ZeroRates { arity }).with_hint(vec![T::zero(); arity])
    }

    pub fn linear_consumption(arity: usize, rate_constant: T) -> Self {
        Self::new(
            "linear_consumption",
            LinearConsumption {
                arity,
                rate_constant,
            },
        )
        .with_hint(vec![rate_constant.abs(); arity])
    }

    pub fn from_fn<F>(name: impl Into<String>, arity: usize, f: F) -> Self
    where
        F: Fn(&[T], &mut [T]) + Send + Sync + 'static,
    {
        Self::new(name, FnRates { arity, f })
    }

    pub fn with_box(mut self, domain_box: Vec<(T, T)>) -> Self {
        assert_eq!(domain_box.len(), self.arity(), "one interval per species");
        self.domain_box = domain_box;
        self
    }

    pub fn with_hint(mut self, hint: Vec<T>) -> Self {
        self.lipschitz_hint = Some(hint);
        self
    }

    pub fn arity(&self) -> usize {
        self.law.arity()
    }

    /// Positive part, then clamp into the domain box.
    pub fn admissible_state(&self, state: &[T], out: &mut [T]) {
        for ((o, &x), &(lo, hi)) in out.iter_mut().zip(state).zip(&self.domain_box) {
            *o = x.max(T::zero()).max(lo).min(hi);
        }
    }

    /// Rates at `state`. Fails on non-finite input, naming the species index.
    pub fn eval_rates_into(&self, state: &[T], out: &mut [T]) -> Result<()> {
        assert_eq!(state.len(), self.arity(), "state length");
        if let Some(bad) = state.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { species: bad });
        }
        let mut clipped = vec![T::zero(); state.len()];
        self.admissible_state(state, &mut clipped);
        self.law.rates(&clipped, out);
        Ok(())
    }

    /// Rates on clipped input without the finiteness check; used by the
    /// samplers, which only generate finite points.
    fn rates_unchecked(&self, state: &[T], scratch: &mut [T], out: &mut [T]) {
        self.admissible_state(state, scratch);
        self.law.rates(scratch, out);
    }

    /// Finite box used for sampling: unbounded upper ends are replaced by
    /// `lo + 1`.
    pub fn sampling_box(&self) -> Vec<(f64, f64)> {
        self.domain_box
            .iter()
            .map(|&(lo, hi)| {
                let lo = lo.as_f64().max(0.0);
                let hi = hi.as_f64();
                (lo, if hi.is_finite() { hi } else { lo + 1.0 })
            })
            .collect()
    }
}

/// Rates at `state` (see [`KineticsModel::eval_rates_into`]).
pub fn eval_rates<T: Real>(model: &KineticsModel<T>, state: &[T]) -> Result<Vec<T>> {
    let mut out = vec![T::zero(); model.arity()];
    model.eval_rates_into(state, &mut out)?;
    Ok(out)
}

/// Rates at every axial station of a wall field, `out[i][k]`.
pub fn wall_rates<T: Real>(model: &KineticsModel<T>, wall: &WallField<T>) -> Result<Vec<Vec<T>>> {
    let n = wall.species();
    if model.arity() != n {
        return Err(Error::Arity {
            kinetics: model.arity(),
            species: n,
        });
    }
    let nodes = wall.axial_nodes();
    let mut out = vec![vec![T::zero(); nodes]; n];
    let mut state = vec![T::zero(); n];
    let mut r = vec![T::zero(); n];
    for k in 0..nodes {
        wall.state_at(k, &mut state);
        model.eval_rates_into(&state, &mut r)?;
        for (o, &v) in out.iter_mut().zip(&r) {
            o[k] = v;
        }
    }
    Ok(out)
}

/// Configuration-level choice of rate law, resolved against species names by
/// [`KineticsSpec::build`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub enum KineticsSpec<T: Real> {
    Zero,
    LinearConsumption { rate_constant: T },
    CoOxidation(CoOxidationSpec<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CoOxidationSpec<T: Real> {
    pub prefactor: T,
    pub activation_energy: T,
    pub heat_release: T,
    pub fuel: String,
    pub oxidizer: String,
    pub temperature: Option<String>,
    pub products: Vec<String>,
    /// `(species, lo, hi)`; species without an entry use `[0, inf)`.
    pub boxes: Vec<(String, T, T)>,
}

impl<T: Real> KineticsSpec<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::LinearConsumption { .. } => "linear_consumption",
            Self::CoOxidation(_) => "co_oxidation",
        }
    }

    /// Species count the law requires, when fixed independently of the config.
    pub fn arity_hint(&self) -> Option<usize> {
        None
    }

    pub fn build(&self, species: &[String]) -> Result<KineticsModel<T>> {
        let n = species.len();
        let index = |name: &str| {
            species.iter().position(|s| s == name).ok_or_else(|| {
                Error::GridMismatch(format!("kinetics refers to unknown species `{name}`"))
            })
        };
        Ok(match self {
            Self::Zero => KineticsModel::zero(n),
            Self::LinearConsumption { rate_constant } => {
                KineticsModel::linear_consumption(n, *rate_constant)
            }
            Self::CoOxidation(spec) => {
                let fuel = index(&spec.fuel)?;
                let oxidizer = index(&spec.oxidizer)?;
                let temperature = spec.temperature.as_deref().map(index).transpose()?;
                let mut channels = vec![T::zero(); n];
                channels[fuel] = T::one();
                channels[oxidizer] = T::one();
                for p in &spec.products {
                    channels[index(p)?] = T::one();
                }
                if let Some(t) = temperature {
                    channels[t] = spec.heat_release;
                }
                let mut domain_box = vec![(T::zero(), T::infinity()); n];
                for (name, lo, hi) in &spec.boxes {
                    domain_box[index(name)?] = (*lo, *hi);
                }
                let law = CoOxidation {
                    fuel,
                    oxidizer,
                    temperature,
                    prefactor: spec.prefactor,
                    activation_energy: spec.activation_energy,
                    channels,
                };
                KineticsModel::new("co_oxidation", law).with_box(domain_box)
            }
        })
    }
}

/// One sampled counterexample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Violation<T: Real> {
    pub point: Vec<T>,
    /// Second point of the pair, for the pairwise inequality.
    pub partner: Option<Vec<T>>,
    /// Offending rate channel, when the check is per channel.
    pub channel: Option<usize>,
    pub magnitude: T,
}

/// Sampling verdicts for the structural hypotheses on the rates:
/// nonnegativity (H1), vanishing when a consumed species is absent (H2),
/// the weighted monotonicity inequality (H3) and its `y = 0` consequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct HypothesisReport<T: Real> {
    pub h1_pass: bool,
    pub h2_pass: bool,
    pub h3_pass: bool,
    pub dissipation_pass: bool,
    pub h1_worst: Option<Violation<T>>,
    pub h2_worst: Option<Violation<T>>,
    pub h3_worst: Option<Violation<T>>,
    pub dissipation_worst: Option<Violation<T>>,
    pub samples_used: usize,
}

impl<T: Real> HypothesisReport<T> {
    pub fn all_pass(&self) -> bool {
        self.h1_pass && self.h2_pass && self.h3_pass && self.dissipation_pass
    }
}

fn record<T: Real>(worst: &mut Option<Violation<T>>, candidate: Violation<T>) {
    if worst
        .as_ref()
        .is_none_or(|w| candidate.magnitude > w.magnitude)
    {
        *worst = Some(candidate);
    }
}

fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut n = 2u64;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= n).all(|&p| !n.is_multiple_of(p)) {
            out.push(n);
        }
        n += 1;
    }
    out
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut acc = 0.0;
    while i > 0 {
        acc += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    acc
}

/// Randomly shifted Halton points in the box.
fn halton_points(bounds: &[(f64, f64)], count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let bases = primes(bounds.len());
    let shifts: Vec<f64> = bounds.iter().map(|_| rng.gen::<f64>()).collect();
    (1..=count as u64)
        .map(|i| {
            bounds
                .iter()
                .zip(&bases)
                .zip(&shifts)
                .map(|((&(lo, hi), &b), &s)| {
                    let u = (radical_inverse(i, b) + s).fract();
                    lo + u * (hi - lo)
                })
                .collect()
        })
        .collect()
}

fn corners(bounds: &[(f64, f64)]) -> Vec<Vec<f64>> {
    if bounds.len() > 12 {
        return Vec::new();
    }
    (0..1usize << bounds.len())
        .map(|mask| {
            bounds
                .iter()
                .enumerate()
                .map(|(d, &(lo, hi))| if mask >> d & 1 == 1 { hi } else { lo })
                .collect()
        })
        .collect()
}

fn uniform_point(bounds: &[(f64, f64)], rng: &mut ChaCha8Rng) -> Vec<f64> {
    bounds
        .iter()
        .map(|&(lo, hi)| lo + rng.gen::<f64>() * (hi - lo))
        .collect()
}

fn to_real<T: Real>(p: &[f64]) -> Vec<T> {
    p.iter().map(|&x| T::lit(x)).collect()
}

/// Samples the hypotheses on the model's box. Violations are data, not
/// errors; identical seeds give identical reports.
pub fn verify_hypotheses<T: Real>(
    model: &KineticsModel<T>,
    params: &[SpeciesParams<T>],
    seed: u64,
) -> Result<HypothesisReport<T>> {
    let n = model.arity();
    if params.len() != n {
        return Err(Error::Arity {
            kinetics: n,
            species: params.len(),
        });
    }
    let slack = T::lit(HYPOTHESIS_SLACK);
    let bounds = model.sampling_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut points = corners(&bounds);
    points.extend(halton_points(&bounds, MIN_SAMPLES, &mut rng));

    let mut scratch = vec![T::zero(); n];
    let mut rx = vec![T::zero(); n];
    let mut ry = vec![T::zero(); n];

    let mut h1_worst = None;
    let mut h2_worst = None;
    let mut h3_worst = None;
    let mut dissipation_worst = None;

    for p in &points {
        let x: Vec<T> = to_real(p);
        model.rates_unchecked(&x, &mut scratch, &mut rx);

        // H1
        for (i, &r) in rx.iter().enumerate() {
            if r < -slack {
                record(
                    &mut h1_worst,
                    Violation {
                        point: x.clone(),
                        partner: None,
                        channel: Some(i),
                        magnitude: -r,
                    },
                );
            }
        }

        // y = 0 consequence of H2 + H3
        let dissipation = -params
            .iter()
            .zip(&rx)
            .zip(&x)
            .fold(T::zero(), |acc, ((s, &r), &xi)| {
                acc + s.delta * s.dissipation_weight() * r * xi
            });
        if dissipation < -slack {
            record(
                &mut dissipation_worst,
                Violation {
                    point: x.clone(),
                    partner: None,
                    channel: None,
                    magnitude: -dissipation,
                },
            );
        }

        // H2: a consumed species at zero switches its own rate off
        for (i, s) in params.iter().enumerate() {
            if !s.is_consumed() {
                continue;
            }
            let mut z = x.clone();
            z[i] = T::zero();
            model.rates_unchecked(&z, &mut scratch, &mut ry);
            if ry[i].abs() > slack {
                record(
                    &mut h2_worst,
                    Violation {
                        point: z,
                        partner: None,
                        channel: Some(i),
                        magnitude: ry[i].abs(),
                    },
                );
            }
        }
    }

    // H3 on independent pairs, plus pairs anchored at the box corner `lo`.
    let lo: Vec<f64> = bounds.iter().map(|b| b.0).collect();
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..MIN_SAMPLES)
        .map(|_| {
            (
                uniform_point(&bounds, &mut rng),
                uniform_point(&bounds, &mut rng),
            )
        })
        .collect();
    pairs.extend(
        points
            .iter()
            .take(MIN_SAMPLES / 4)
            .map(|p| (p.clone(), lo.clone())),
    );
    for (px, py) in &pairs {
        let x: Vec<T> = to_real(px);
        let y: Vec<T> = to_real(py);
        model.rates_unchecked(&x, &mut scratch, &mut rx);
        model.rates_unchecked(&y, &mut scratch, &mut ry);
        let mut sum = T::zero();
        for i in 0..n {
            let s = &params[i];
            sum += s.delta * s.dissipation_weight() * (rx[i] - ry[i]) * (x[i] - y[i]);
        }
        let value = -sum;
        if value < -slack {
            record(
                &mut h3_worst,
                Violation {
                    point: x,
                    partner: Some(y),
                    channel: None,
                    magnitude: -value,
                },
            );
        }
    }

    let samples_used = points.len().min(pairs.len());
    assert!(
        samples_used >= 1000,
        "hypothesis sampling below 1000 points"
    );
    Ok(HypothesisReport {
        h1_pass: h1_worst.is_none(),
        h2_pass: h2_worst.is_none(),
        h3_pass: h3_worst.is_none(),
        dissipation_pass: dissipation_worst.is_none(),
        h1_worst,
        h2_worst,
        h3_worst,
        dissipation_worst,
        samples_used,
    })
}

/// Per-channel Lipschitz constants with respect to the l1 distance of states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LipschitzEstimate<T: Real> {
    /// Largest observed difference quotient per channel.
    pub observed: Vec<T>,
    /// `observed` inflated by [`LIPSCHITZ_SAFETY`].
    pub k: Vec<T>,
    /// `max_i k_i`.
    pub lambda: T,
    pub pairs: usize,
}

pub fn estimate_lipschitz<T: Real>(
    model: &KineticsModel<T>,
    seed: u64,
) -> Result<LipschitzEstimate<T>> {
    estimate_lipschitz_with(model, seed, LIPSCHITZ_PAIRS)
}

/// Difference quotients over `pairs` sampled pairs. Even pairs are short
/// axis-aligned steps (these resolve the local slope), odd pairs are
/// independent points. The draw sequence does not depend on `pairs`, so the
/// estimate is monotone in the sample count for a fixed seed.
pub fn estimate_lipschitz_with<T: Real>(
    model: &KineticsModel<T>,
    seed: u64,
    pairs: usize,
) -> Result<LipschitzEstimate<T>> {
    let n = model.arity();
    let bounds: Vec<(f64, f64)> = model
        .domain_box
        .iter()
        .enumerate()
        .map(|(i, &(lo, hi))| {
            let (lo, hi) = (lo.as_f64().max(0.0), hi.as_f64());
            if hi.is_finite() {
                Ok((lo, hi))
            } else {
                Err(Error::UnboundedDomain { species: i })
            }
        })
        .collect::<Result<_>>()?;

    let step_rel = T::epsilon().as_f64().cbrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut observed = vec![T::zero(); n];
    let mut scratch = vec![T::zero(); n];
    let mut rx = vec![T::zero(); n];
    let mut ry = vec![T::zero(); n];

    for p in 0..pairs {
        let px = uniform_point(&bounds, &mut rng);
        let py = if p % 2 == 0 {
            let axis = rng.gen_range(0..n);
            let (lo, hi) = bounds[axis];
            let h = step_rel * (hi - lo);
            let mut y = px.clone();
            y[axis] = if px[axis] + h <= hi {
                px[axis] + h
            } else {
                px[axis] - h
            };
            y
        } else {
            uniform_point(&bounds, &mut rng)
        };
        let x: Vec<T> = to_real(&px);
        let y: Vec<T> = to_real(&py);
        let dist = x
            .iter()
            .zip(&y)
            .fold(T::zero(), |a, (&u, &v)| a + (u - v).abs());
        if dist == T::zero() {
            continue;
        }
        model.rates_unchecked(&x, &mut scratch, &mut rx);
        model.rates_unchecked(&y, &mut scratch, &mut ry);
        for i in 0..n {
            let q = (rx[i] - ry[i]).abs() / dist;
            if q > observed[i] {
                observed[i] = q;
            }
        }
    }

    let safety = T::lit(LIPSCHITZ_SAFETY);
    let k: Vec<T> = observed.iter().map(|&o| o * safety).collect();
    let lambda = k.iter().copied().fold(T::zero(), T::max);
    Ok(LipschitzEstimate {
        observed,
        k,
        lambda,
        pairs,
    })
}

/// `lambda = sup_i k_i`, from the model's hint when it has one.
pub fn lipschitz_lambda<T: Real>(model: &KineticsModel<T>, seed: u64) -> Result<T> {
    match &model.lipschitz_hint {
        Some(h) => Ok(h.iter().copied().fold(T::zero(), T::max)),
        None => Ok(estimate_lipschitz(model, seed)?.lambda),
    }
}
