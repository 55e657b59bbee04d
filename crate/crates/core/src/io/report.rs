//! Run reports: a readable body followed by a `KEY=VALUE` footer.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coupler::CouplerSettings;
use crate::error::Result;
use crate::fluid::FluxForm;
use crate::io::output::{format_sig9, write_file};
use crate::kinetics::{HypothesisReport, Violation};
use crate::model::{ContractionDiagnostics, Grid, Issue};
use crate::qualcheck::{BoundEnvelope, EnergyGrowthReport, EnvelopeVerdict, NonnegativityVerdict};
use crate::scalar::{serde_real, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ProbeSummary<T: Real> {
    pub species: String,
    pub initial: T,
    pub last: T,
    pub min: T,
    pub max: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RunReport<T: Real> {
    pub kinetics: String,
    pub species: Vec<String>,
    pub grid: Grid<T>,
    pub coupler: CouplerSettings<T>,
    pub seed: u64,
    pub warnings: Vec<Issue>,
    pub diagnostics: ContractionDiagnostics<T>,
    pub hypotheses: HypothesisReport<T>,
    /// Per-channel Lipschitz constants used for the exponential envelope.
    pub lipschitz: Vec<T>,
    #[serde(with = "serde_real")]
    pub lambda: T,
    /// `dt <= 0.5 / lambda`.
    pub dt_guard_ok: bool,
    pub iterations: Vec<usize>,
    pub residual_ratios_below_one: bool,
    #[serde(with = "serde_real")]
    pub max_residual_ratio: T,
    #[serde(with = "serde_real")]
    pub check_tol: T,
    pub nonnegativity: NonnegativityVerdict<T>,
    pub envelope: BoundEnvelope<T>,
    pub envelopes: Vec<EnvelopeVerdict<T>>,
    pub energy: EnergyGrowthReport<T>,
    /// Squared weighted fluid norm per species.
    pub weighted_fluid_norm: Vec<T>,
    pub reaction_ended: Option<T>,
    pub steady_state: Option<T>,
    pub probe_summary: Vec<ProbeSummary<T>>,
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn fixed9<T: Real>(x: T) -> String {
    let x = x.as_f64();
    if x.is_finite() {
        format!("{x:.9}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Time rounded to 9 significant digits in shortest form, `0.0` style.
pub fn format_time<T: Real>(t: T) -> String {
    let rounded: f64 = format!("{:.8e}", t.as_f64()).parse().expect("round trip");
    format!("{rounded:?}")
}

fn format_option<T: Real>(t: Option<T>) -> String {
    t.map_or_else(|| "none".into(), format_time)
}

fn point<T: Real>(p: &[T]) -> String {
    let parts: Vec<String> = p.iter().map(|&x| format_sig9(x)).collect();
    format!("({})", parts.join(", "))
}

fn describe<T: Real>(v: &Option<Violation<T>>, names: &[String]) -> String {
    let Some(v) = v else {
        return String::new();
    };
    let mut s = format!(" worst {} at {}", format_sig9(v.magnitude), point(&v.point));
    if let Some(p) = &v.partner {
        let _ = write!(s, " vs {}", point(p));
    }
    if let Some(c) = v.channel {
        let _ = write!(s, " channel {}", names.get(c).map_or("?", String::as_str));
    }
    s
}

impl<T: Real> RunReport<T> {
    pub fn energy_pass(&self) -> bool {
        self.energy.dominated
    }

    /// Every qualitative check passed.
    pub fn checks_pass(&self) -> bool {
        self.nonnegativity.pass && self.envelopes.iter().all(|v| v.pass) && self.energy_pass()
    }

    /// `(KEY, VALUE)` pairs of the footer, in output order.
    pub fn footer(&self) -> Vec<(String, String)> {
        let d = &self.diagnostics;
        let h = &self.hypotheses;
        let mut f: Vec<(String, String)> = vec![
            ("MU".into(), fixed9(d.mu)),
            ("THRESHOLD".into(), fixed9(d.threshold)),
            ("MARGIN".into(), fixed9(d.margin)),
            ("ALPHA_OPT".into(), fixed9(d.alpha_opt)),
            ("SATISFIED".into(), d.satisfied.to_string()),
            ("DEGENERATE".into(), d.degenerate.to_string()),
            ("H1".into(), verdict(h.h1_pass).into()),
            ("H2".into(), verdict(h.h2_pass).into()),
            ("H3".into(), verdict(h.h3_pass).into()),
            ("DISSIPATION".into(), verdict(h.dissipation_pass).into()),
            ("LAMBDA".into(), format_sig9(self.lambda)),
            ("DT_GUARD".into(), verdict(self.dt_guard_ok).into()),
            ("STEPS".into(), self.iterations.len().to_string()),
            (
                "MAX_ITERATIONS".into(),
                self.iterations
                    .iter()
                    .max()
                    .copied()
                    .unwrap_or(0)
                    .to_string(),
            ),
            (
                "RESIDUAL_RATIOS".into(),
                verdict(self.residual_ratios_below_one).into(),
            ),
            ("REACTION_ENDED".into(), format_option(self.reaction_ended)),
            ("STEADY_STATE".into(), format_option(self.steady_state)),
            (
                "CHECK_NONNEGATIVITY".into(),
                verdict(self.nonnegativity.pass).into(),
            ),
        ];
        for v in &self.envelopes {
            f.push((
                format!("CHECK_{}_{}", v.item.key(), self.species[v.species]),
                verdict(v.pass).into(),
            ));
        }
        f.push((
            "CHECK_ENERGY_ENVELOPE".into(),
            verdict(self.energy_pass()).into(),
        ));
        f.push(("CHECKS".into(), verdict(self.checks_pass()).into()));
        f
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let g = &self.grid;
        let c = &self.coupler;
        let names = &self.species;
        let _ = writeln!(s, "Catalytic converter run report");
        let _ = writeln!(s);
        let _ = writeln!(s, "kinetics   {}", self.kinetics);
        let _ = writeln!(s, "species    {}", names.join(", "));
        let _ = writeln!(
            s,
            "grid       nr={} nz={} dt={} t_end={} ({} steps)",
            g.nr,
            g.nz,
            format_sig9(g.dt),
            format_sig9(g.t_end),
            self.iterations.len()
        );
        let form = match c.flux_form {
            FluxForm::Gradient => "gradient",
            FluxForm::Integral => "integral",
        };
        let _ = writeln!(
            s,
            "coupler    tol={} max_iter={} flux_form={form} relaxation={}",
            format_sig9(c.tol),
            c.max_iter,
            format_sig9(c.relaxation)
        );
        let _ = writeln!(s, "seed       {}", self.seed);

        let d = &self.diagnostics;
        let _ = writeln!(s, "\nContraction");
        let _ = writeln!(
            s,
            "  mu = {}, threshold 2/sqrt(e) = {}, margin = {}, alpha_opt = {}",
            fixed9(d.mu),
            fixed9(d.threshold),
            fixed9(d.margin),
            fixed9(d.alpha_opt)
        );
        let status = if d.degenerate {
            "no (degenerate: some theta_s = 0)"
        } else if d.satisfied {
            "yes"
        } else {
            "no"
        };
        let _ = writeln!(s, "  existence condition holds: {status}");

        if !self.warnings.is_empty() {
            let _ = writeln!(s, "\nWarnings");
            for w in &self.warnings {
                let _ = writeln!(s, "  {}: {}", w.code, w.message);
            }
        }

        let h = &self.hypotheses;
        let _ = writeln!(s, "\nRate hypotheses ({} samples)", h.samples_used);
        let rows = [
            ("nonnegative rates", h.h1_pass, &h.h1_worst),
            ("vanishing without reactant", h.h2_pass, &h.h2_worst),
            ("weighted monotonicity", h.h3_pass, &h.h3_worst),
            (
                "dissipation against zero",
                h.dissipation_pass,
                &h.dissipation_worst,
            ),
        ];
        for (label, pass, worst) in rows {
            let _ = writeln!(
                s,
                "  {label:<28}{}{}",
                verdict(pass),
                describe(worst, names)
            );
        }
        let ks: Vec<String> = self.lipschitz.iter().map(|&k| format_sig9(k)).collect();
        let _ = writeln!(
            s,
            "  Lipschitz k = [{}], lambda = {}",
            ks.join(", "),
            format_sig9(self.lambda)
        );
        let _ = writeln!(s, "  dt <= 0.5/lambda: {}", verdict(self.dt_guard_ok));

        let _ = writeln!(s, "\nCoupling");
        let it = &self.iterations;
        if !it.is_empty() {
            let mean = it.iter().sum::<usize>() as f64 / it.len() as f64;
            let _ = writeln!(
                s,
                "  Picard iterations per step: min {}, mean {:.2}, max {}",
                it.iter().min().unwrap(),
                mean,
                it.iter().max().unwrap()
            );
        }
        let _ = writeln!(
            s,
            "  largest residual ratio after the first iteration: {}",
            format_sig9(self.max_residual_ratio)
        );

        let _ = writeln!(
            s,
            "\nQualitative checks (tol {})",
            format_sig9(self.check_tol)
        );
        let _ = writeln!(
            s,
            "  nonnegativity                 {} ({} violations listed)",
            verdict(self.nonnegativity.pass),
            self.nonnegativity.violations.len()
        );
        for v in &self.envelopes {
            let i = v.species;
            let bound = match v.item {
                crate::qualcheck::EnvelopeItem::Upper => {
                    format!("<= {}", format_sig9(self.envelope.a_upper[i]))
                }
                crate::qualcheck::EnvelopeItem::Lower => {
                    format!(">= {}", format_sig9(self.envelope.a_min[i]))
                }
                crate::qualcheck::EnvelopeItem::Exponential => {
                    format!("<= {} e^(lambda t)", format_sig9(self.envelope.a_max[i]))
                }
            };
            let _ = writeln!(
                s,
                "  {:<6}{:<24}{} (excess {} at t = {})",
                names[i],
                bound,
                verdict(v.pass),
                format_sig9(v.excess),
                format_time(v.at_time)
            );
        }
        let _ = writeln!(
            s,
            "  energy envelope               {}",
            verdict(self.energy_pass())
        );
        for (i, n) in names.iter().enumerate() {
            let _ = writeln!(
                s,
                "    {n:<6}E(t) <= {} t + {}   weighted fluid norm^2 {}",
                format_sig9(self.energy.slope[i]),
                format_sig9(self.energy.intercept[i]),
                format_sig9(self.weighted_fluid_norm[i])
            );
        }

        let _ = writeln!(s, "\nOutlet z = 1");
        let _ = writeln!(
            s,
            "  {:<8}{:>16}{:>16}{:>16}{:>16}",
            "species", "initial", "final", "min", "max"
        );
        for p in &self.probe_summary {
            let _ = writeln!(
                s,
                "  {:<8}{:>16}{:>16}{:>16}{:>16}",
                p.species,
                format_sig9(p.initial),
                format_sig9(p.last),
                format_sig9(p.min),
                format_sig9(p.max)
            );
        }
        let _ = writeln!(
            s,
            "  reaction ended: {}",
            format_option(self.reaction_ended)
        );
        let _ = writeln!(s, "  wall steady:    {}", format_option(self.steady_state));

        let _ = writeln!(s);
        for (k, v) in self.footer() {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// Outcome of the `check` subcommand: validation and rate diagnostics only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CheckReport<T: Real> {
    pub kinetics: String,
    pub species: Vec<String>,
    pub seed: u64,
    pub warnings: Vec<Issue>,
    pub diagnostics: ContractionDiagnostics<T>,
    pub hypotheses: HypothesisReport<T>,
    /// `None` when the rate box is unbounded and no hint is given.
    pub lipschitz: Option<Vec<T>>,
}

impl<T: Real> CheckReport<T> {
    pub fn hypotheses_pass(&self) -> bool {
        self.hypotheses.all_pass()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let d = &self.diagnostics;
        let h = &self.hypotheses;
        let _ = writeln!(s, "kinetics   {}", self.kinetics);
        let _ = writeln!(s, "species    {}", self.species.join(", "));
        let _ = writeln!(s, "seed       {}", self.seed);
        for w in &self.warnings {
            let _ = writeln!(s, "warning    {}: {}", w.code, w.message);
        }
        let _ = writeln!(s, "\nRate hypotheses ({} samples)", h.samples_used);
        let rows = [
            ("nonnegative rates", h.h1_pass, &h.h1_worst),
            ("vanishing without reactant", h.h2_pass, &h.h2_worst),
            ("weighted monotonicity", h.h3_pass, &h.h3_worst),
            (
                "dissipation against zero",
                h.dissipation_pass,
                &h.dissipation_worst,
            ),
        ];
        for (label, pass, worst) in rows {
            let _ = writeln!(
                s,
                "  {label:<28}{}{}",
                verdict(pass),
                describe(worst, &self.species)
            );
        }
        let lambda = self
            .lipschitz
            .as_ref()
            .map(|k| k.iter().copied().fold(T::zero(), T::max));
        let _ = writeln!(s);
        let _ = writeln!(s, "MU={}", fixed9(d.mu));
        let _ = writeln!(s, "THRESHOLD={}", fixed9(d.threshold));
        let _ = writeln!(s, "SATISFIED={}", d.satisfied);
        let _ = writeln!(s, "DEGENERATE={}", d.degenerate);
        let _ = writeln!(s, "H1={}", verdict(h.h1_pass));
        let _ = writeln!(s, "H2={}", verdict(h.h2_pass));
        let _ = writeln!(s, "H3={}", verdict(h.h3_pass));
        let _ = writeln!(s, "DISSIPATION={}", verdict(h.dissipation_pass));
        let _ = writeln!(
            s,
            "LAMBDA={}",
            lambda.map_or_else(|| "unbounded".into(), format_sig9)
        );
        s
    }
}

pub fn write_report<T: Real>(report: &RunReport<T>, path: &Path) -> Result<()> {
    write_file(path, &report.to_text())
}

/// Trailing `KEY=VALUE` block of a report.
pub fn parse_footer(text: &str) -> BTreeMap<String, String> {
    let lines: Vec<&str> = text.lines().collect();
    let start = lines
        .iter()
        .rposition(|l| l.trim().is_empty())
        .map_or(0, |i| i + 1);
    lines[start..]
        .iter()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}
