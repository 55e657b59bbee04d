//! End-to-end run, from config validation to the streaming property checks.

use crate::coupler::{Coupler, CouplerSettings, CouplingState};
use crate::error::{Error, Result};
use crate::io::output::ProbeSeries;
use crate::io::report::{CheckReport, ProbeSummary, RunReport};
use crate::kinetics::{estimate_lipschitz, verify_hypotheses, wall_rates, KineticsModel};
use crate::model::{contraction_margin, validate_config, ModelConfig, Snapshot};
use crate::qualcheck::{
    check_nonnegativity, BoundEnvelope, EnergyAccumulator, EnvelopeChecker, NonnegativityVerdict,
};
use crate::scalar::Real;

/// Rates below this sup norm count as a finished reaction.
pub const REACTION_END_TOL: f64 = 1e-8;
/// Wall changes slower than this per unit time count as steady.
pub const STEADY_TOL: f64 = 1e-8;
/// Nonnegativity violations kept in the report; the verdict counts all.
pub const MAX_REPORTED_VIOLATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Sampling seed for the hypothesis and Lipschitz estimators.
    pub seed: u64,
    /// Snapshot and probe cadence in steps; the first and last level are
    /// always kept.
    pub probe_every: usize,
    pub keep_trajectory: bool,
    pub check_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            probe_every: 1,
            keep_trajectory: true,
            check_tol: crate::qualcheck::DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutput<T: Real> {
    pub report: RunReport<T>,
    pub trajectory: Vec<Snapshot<T>>,
    pub probes: ProbeSeries<T>,
    /// Picard residuals of every step.
    pub residuals: Vec<Vec<T>>,
}

fn snapshot<T: Real>(s: &CouplingState<T>) -> Snapshot<T> {
    Snapshot {
        step: s.step,
        time: s.time,
        fluid: s.fluid.clone(),
        wall: s.wall.clone(),
    }
}

fn sup_rates<T: Real>(kinetics: &KineticsModel<T>, s: &CouplingState<T>) -> Result<T> {
    Ok(wall_rates(kinetics, &s.wall)?
        .iter()
        .flatten()
        .fold(T::zero(), |a, &r| a.max(r.abs())))
}

/// Runs `cfg` from `t = 0` to `t_end`.
pub fn run_simulation<T: Real>(
    cfg: &ModelConfig<T>,
    settings: &CouplerSettings<T>,
    options: &RunOptions,
) -> Result<SimulationOutput<T>> {
    let validation = validate_config(cfg);
    if validation.has_errors() {
        return Err(Error::InvalidConfig(validation));
    }
    for w in validation.warnings() {
        log::warn!("{}: {}", w.code, w.message);
    }
    let probe_every = options.probe_every.max(1);
    let grid = cfg.grid;
    let params = &cfg.species;
    let names = cfg.species_names();

    let diagnostics = contraction_margin(params);
    let kinetics = cfg.kinetics.build(&names)?;
    let hypotheses = verify_hypotheses(&kinetics, params, options.seed)?;
    let lipschitz = match &kinetics.lipschitz_hint {
        Some(h) => h.clone(),
        None => estimate_lipschitz(&kinetics, options.seed)?.k,
    };
    let lambda = lipschitz.iter().copied().fold(T::zero(), T::max);
    let dt_guard_ok = !(lambda > T::zero()) || grid.dt <= T::lit(0.5) / lambda;
    if !dt_guard_ok {
        log::warn!(
            "dt = {} exceeds 0.5/lambda = {} (lambda = {lambda}); explicit rates may be unstable",
            grid.dt,
            T::lit(0.5) / lambda
        );
    }
    log::info!(
        "mu = {}, contraction {}",
        diagnostics.mu,
        if diagnostics.satisfied {
            "satisfied"
        } else {
            "not satisfied"
        }
    );

    let coupler = Coupler::new(&grid, params, &kinetics, &cfg.initial.inlet, *settings)?;
    let mut state = coupler.initial_state(&cfg.initial.wall_init)?;

    let tol = T::lit(options.check_tol);
    let envelope = BoundEnvelope::from_initial(&cfg.initial, lambda);
    let mut envelopes = EnvelopeChecker::new(envelope.clone(), params, tol);
    let mut energy = EnergyAccumulator::new(&grid, params.len());
    let mut nonneg = NonnegativityVerdict {
        pass: true,
        violations: Vec::new(),
    };
    let mut nonneg_count = 0usize;
    let mut probes = ProbeSeries::new(names.clone());
    let mut trajectory = Vec::new();
    let mut residuals = Vec::new();
    let mut iterations = Vec::new();
    let mut reaction_ended = None;
    let mut steady_state = None;
    let mut max_ratio = T::zero();
    let mut ratios_below_one = true;

    let steps = grid.steps();
    let mut observe = |s: &CouplingState<T>, prev: Option<&CouplingState<T>>| -> Result<()> {
        let v = check_nonnegativity(&s.fluid, &s.wall, tol);
        nonneg_count += v.violations.len();
        nonneg.pass &= v.pass;
        let room = MAX_REPORTED_VIOLATIONS.saturating_sub(nonneg.violations.len());
        nonneg
            .violations
            .extend(v.violations.into_iter().take(room));
        envelopes.observe(&s.fluid, &s.wall);
        energy.observe(&s.fluid, &s.wall);
        if reaction_ended.is_none() && sup_rates(&kinetics, s)? < T::lit(REACTION_END_TOL) {
            reaction_ended = Some(s.time);
        }
        if let Some(p) = prev {
            if steady_state.is_none() && s.wall.sup_distance(&p.wall) / grid.dt < T::lit(STEADY_TOL)
            {
                steady_state = Some(s.time);
            }
        }
        if s.step.is_multiple_of(probe_every) || s.step == steps {
            probes.record(&s.wall);
            if options.keep_trajectory {
                trajectory.push(snapshot(s));
            }
        }
        Ok(())
    };

    observe(&state, None)?;
    for _ in 0..steps {
        let next = coupler.advance_step(&state)?;
        for w in next.residual_history.windows(2).skip(1) {
            if w[0] > T::zero() {
                let q = w[1] / w[0];
                max_ratio = max_ratio.max(q);
                ratios_below_one &= q < T::one();
            }
        }
        iterations.push(next.iterations_last_step);
        residuals.push(next.residual_history.clone());
        observe(&next, Some(&state))?;
        state = next;
    }
    if nonneg_count > nonneg.violations.len() {
        log::warn!(
            "{nonneg_count} nonnegativity violations, {} reported",
            nonneg.violations.len()
        );
    }

    let energy = energy.finish()?;
    let weighted_fluid_norm = energy
        .fluid_station_integrals
        .iter()
        .map(|s| s.iter().copied().fold(T::zero(), T::max))
        .collect();
    let probe_summary = (0..names.len())
        .map(|i| {
            let col = probes.column(i);
            ProbeSummary {
                species: names[i].clone(),
                initial: col[0],
                last: *col.last().expect("at least one probe"),
                min: col.iter().copied().fold(T::infinity(), T::min),
                max: col.iter().copied().fold(T::neg_infinity(), T::max),
            }
        })
        .collect();

    let report = RunReport {
        kinetics: kinetics.name.clone(),
        species: names,
        grid,
        coupler: *settings,
        seed: options.seed,
        warnings: validation.warnings().cloned().collect(),
        diagnostics,
        hypotheses,
        lipschitz,
        lambda,
        dt_guard_ok,
        iterations,
        residual_ratios_below_one: ratios_below_one,
        max_residual_ratio: max_ratio,
        check_tol: tol,
        nonnegativity: nonneg,
        envelope,
        envelopes: envelopes.finish(),
        energy,
        weighted_fluid_norm,
        reaction_ended,
        steady_state,
        probe_summary,
    };
    Ok(SimulationOutput {
        report,
        trajectory,
        probes,
        residuals,
    })
}

/// Config checks and rate diagnostics, without running the model.
pub fn check_config<T: Real>(cfg: &ModelConfig<T>, seed: u64) -> Result<CheckReport<T>> {
    let validation = validate_config(cfg);
    if validation.has_errors() {
        return Err(Error::InvalidConfig(validation));
    }
    let names = cfg.species_names();
    let kinetics = cfg.kinetics.build(&names)?;
    let hypotheses = verify_hypotheses(&kinetics, &cfg.species, seed)?;
    let lipschitz = match &kinetics.lipschitz_hint {
        Some(h) => Some(h.clone()),
        None => match estimate_lipschitz(&kinetics, seed) {
            Ok(e) => Some(e.k),
            Err(Error::UnboundedDomain { .. }) => None,
            Err(e) => return Err(e),
        },
    };
    Ok(CheckReport {
        kinetics: kinetics.name.clone(),
        species: names,
        seed,
        warnings: validation.warnings().cloned().collect(),
        diagnostics: contraction_margin(&cfg.species),
        hypotheses,
        lipschitz,
    })
}
