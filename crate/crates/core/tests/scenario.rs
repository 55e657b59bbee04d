use std::path::{Path, PathBuf};

use gcsim_core::io::config::ConfigErrorKind;
use gcsim_core::io::output::{probe_csv, snapshot_csv};
use gcsim_core::io::report::{parse_footer, write_report};
use gcsim_core::kinetics::KineticsSpec;
use gcsim_core::{
    load_config, parse_config, run_simulation, Config64, CouplerSettings, Error, Grid, InitialData,
    ModelConfig, RunOptions, RunReport, SpeciesParams,
};

fn example_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/co_oxidation.cfg")
}

fn example() -> Config64 {
    load_config(&example_path()).unwrap()
}

fn zero_kinetics_config() -> ModelConfig<f64> {
    let grid = Grid::new(8, 16, 0.05, 0.5);
    ModelConfig {
        grid,
        species: vec![
            SpeciesParams::uniform("A", 1.0, -1.0),
            SpeciesParams::uniform("B", 1.0, 1.0),
        ],
        kinetics: KineticsSpec::Zero,
        initial: InitialData::constant(&grid, &[0.3, 1.5], &[0.3, 1.5]),
    }
}

#[test]
fn shipped_example_encodes_outlet_scenario() {
    let cfg = example();
    assert_eq!(cfg.model.species_names(), ["CO", "O2", "CO2", "T"]);
    let inlet: Vec<f64> = cfg.model.initial.inlet.iter().map(|p| p[0]).collect();
    let wall: Vec<f64> = cfg.model.initial.wall_init.iter().map(|p| p[0]).collect();
    assert_eq!(inlet, [0.02, 0.05, 0.0, 500.0]);
    assert_eq!(wall, [0.02, 0.05, 0.0, 490.0]);
    for (p, d) in cfg.model.species.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
        assert_eq!(
            (p.beta_f, p.gamma_s, p.theta_s, p.delta),
            (1.0, 1.0, 1.0, d)
        );
    }
    assert!(cfg.model.initial.inlet.iter().all(|p| p.len() == 33));
    assert!(cfg.model.initial.wall_init.iter().all(|p| p.len() == 65));
}

#[test]
fn missing_beta_is_named() {
    let text = std::fs::read_to_string(example_path()).unwrap();
    let broken = text.replacen("[species.O2]\nbeta_f = 1\n", "[species.O2]\n", 1);
    let err = parse_config::<f64>(&broken, Path::new(".")).unwrap_err();
    assert!(
        err.has(ConfigErrorKind::MissingKey, "species.O2", "beta_f"),
        "{err}"
    );
}

#[test]
fn zero_kinetics_footer() {
    let out = run_simulation(
        &zero_kinetics_config(),
        &CouplerSettings::default(),
        &RunOptions::default(),
    )
    .unwrap();
    let footer = parse_footer(&out.report.to_text());
    assert_eq!(footer["REACTION_ENDED"], "0.0");
    assert_eq!(footer["SATISFIED"], "true");
    assert_eq!(footer["THRESHOLD"], "1.213061319");
    assert_eq!(footer["MU"], "1.000000000");
    assert_eq!(footer["CHECKS"], "PASS");
    assert!(out.report.iterations.iter().all(|&n| n == 1));
}

#[test]
fn report_json_round_trips() {
    let cfg = example();
    let mut cfg_short = cfg.model.clone();
    cfg_short.grid = Grid::new(8, 16, 0.01, 0.05);
    cfg_short.initial = InitialData::constant(
        &cfg_short.grid,
        &[0.02, 0.05, 0.0, 500.0],
        &[0.02, 0.05, 0.0, 490.0],
    );
    let out = run_simulation(&cfg_short, &cfg.coupler, &RunOptions::default()).unwrap();
    let back = RunReport::<f64>::from_json(&out.report.to_json()).unwrap();
    assert_eq!(back, out.report);
    assert_eq!(back.to_text(), out.report.to_text());
}

#[test]
fn outputs_are_deterministic_and_ordered() {
    let cfg = example();
    let opts = RunOptions {
        seed: 7,
        probe_every: 25,
        ..RunOptions::default()
    };
    let a = run_simulation(&cfg.model, &cfg.coupler, &opts).unwrap();
    let b = run_simulation(&cfg.model, &cfg.coupler, &opts).unwrap();
    assert_eq!(a.report.to_text(), b.report.to_text());
    assert_eq!(probe_csv(&a.probes), probe_csv(&b.probes));
    assert!(probe_csv(&a.probes).starts_with("t,CO,O2,CO2,T\n"));
    assert_eq!(a.probes.times.len(), 5);
    let names = cfg.model.species_names();
    for (x, y) in a.trajectory.iter().zip(&b.trajectory) {
        assert_eq!(
            snapshot_csv(&x.fluid, &cfg.model.grid, &names).unwrap(),
            snapshot_csv(&y.fluid, &cfg.model.grid, &names).unwrap()
        );
    }
    let dir = tempfile::tempdir().unwrap();
    let (p, q) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    write_report(&a.report, &p).unwrap();
    write_report(&b.report, &q).unwrap();
    assert_eq!(std::fs::read(p).unwrap(), std::fs::read(q).unwrap());
}

#[test]
fn io_errors_carry_the_path() {
    let out = run_simulation(
        &zero_kinetics_config(),
        &CouplerSettings::default(),
        &RunOptions::default(),
    )
    .unwrap();
    let path = Path::new("/nonexistent-dir/report.txt");
    match write_report(&out.report, path) {
        Err(Error::Io { path: p, .. }) => assert_eq!(p, path),
        other => panic!("{other:?}"),
    }
}

#[test]
fn iteration_cap_surfaces_history() {
    let cfg = example();
    let settings = CouplerSettings {
        max_iter: 2,
        ..cfg.coupler
    };
    match run_simulation(&cfg.model, &settings, &RunOptions::default()) {
        Err(Error::NonConverged {
            step, residuals, ..
        }) => {
            assert_eq!(step, 1);
            assert_eq!(residuals.len(), 2);
        }
        other => panic!("{:?}", other.map(|o| o.report.iterations)),
    }
}
