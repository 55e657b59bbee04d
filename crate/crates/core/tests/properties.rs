use gcsim_core::io::config::{normalize, parse_document, serialize};
use gcsim_core::io::output::format_sig9;
use gcsim_core::kinetics::KineticsSpec;
use gcsim_core::tridiag::Tridiagonal;
use gcsim_core::{
    march_fluid, run_simulation, verify_hypotheses, CouplerSettings, Grid, InitialData,
    ModelConfig, RunOptions, SpeciesParams, WallField, WallStepper,
};
use proptest::prelude::*;

fn profile(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn thomas_solves_diagonally_dominant_systems(
        rows in prop::collection::vec((-1.0f64..0.0, -1.0f64..0.0, 0.01f64..2.0, -5.0f64..5.0), 1..40)
    ) {
        let n = rows.len();
        let lower: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let upper: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let diag: Vec<f64> = rows.iter().map(|r| r.0.abs() + r.1.abs() + r.2).collect();
        let rhs: Vec<f64> = rows.iter().map(|r| r.3).collect();
        let m = Tridiagonal { lower, diag, upper };
        prop_assert!(m.is_m_matrix());
        let mut x = rhs.clone();
        m.factor().unwrap().solve_in_place(&mut x);
        let mut y = vec![0.0; n];
        m.apply(&x, &mut y);
        for (a, b) in y.iter().zip(&rhs) {
            prop_assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn fluid_stays_within_data_bounds(
        beta in 0.05f64..20.0,
        inlet in profile(9, -3.0, 3.0),
        wall in profile(17, -3.0, 3.0),
    ) {
        let grid = Grid::new(8, 16, 0.1, 1.0);
        let params = [SpeciesParams::new("A", beta, 1.0, 1.0, -1.0)];
        let f = march_fluid(&WallField::new(vec![wall.clone()], 0.0), std::slice::from_ref(&inlet), &params, &grid).unwrap();
        let lo = inlet.iter().chain(&wall).copied().fold(f64::INFINITY, f64::min);
        let hi = inlet.iter().chain(&wall).copied().fold(f64::NEG_INFINITY, f64::max);
        for k in 0..=grid.nz {
            for &v in f.row(0, k) {
                prop_assert!(v >= lo - 1e-10 && v <= hi + 1e-10, "{v} outside [{lo}, {hi}]");
            }
        }
        prop_assert_eq!(f.wall_trace(0), wall);
    }

    #[test]
    fn fluid_commutes_with_shifts(
        inlet in profile(9, 0.0, 1.0),
        wall in profile(17, 0.0, 1.0),
        shift in -5.0f64..5.0,
    ) {
        let grid = Grid::new(8, 16, 0.1, 1.0);
        let params = [SpeciesParams::uniform("A", 1.0, -1.0)];
        let base = march_fluid(&WallField::new(vec![wall.clone()], 0.0), std::slice::from_ref(&inlet), &params, &grid).unwrap();
        let up = |v: &[f64]| v.iter().map(|x| x + shift).collect::<Vec<_>>();
        let moved = march_fluid(&WallField::new(vec![up(&wall)], 0.0), &[up(&inlet)], &params, &grid).unwrap();
        for k in 0..=grid.nz {
            for (a, b) in base.row(0, k).iter().zip(moved.row(0, k)) {
                prop_assert!((a + shift - b).abs() < 1e-12 * (1.0 + shift.abs()));
            }
        }
    }

    #[test]
    fn wall_diffusion_conserves_and_contracts(
        init in profile(33, -2.0, 2.0),
        theta in 0.0f64..5.0,
        dt in 1e-4f64..0.5,
    ) {
        let grid = Grid::new(4, 32, dt, 1.0);
        let params = [SpeciesParams::new("A", 1.0, 1.0, theta, -1.0)];
        let stepper = WallStepper::new(&params, &grid, dt).unwrap();
        let zero = vec![vec![0.0; 33]];
        let prev = WallField::new(vec![init.clone()], 0.0);
        let next = stepper.step(&prev, &zero, &zero, &params).unwrap();
        let mass = |v: &[f64]| grid.axial_integral(v);
        prop_assert!((mass(&init) - mass(&next.values[0])).abs() < 1e-12);
        let (lo, hi) = init.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        prop_assert!(next.values[0].iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12));
    }

    #[test]
    fn sig9_keeps_nine_digits(x in prop::num::f64::NORMAL) {
        let s = format_sig9(x);
        let back: f64 = s.parse().unwrap();
        prop_assert!(((back - x) / x).abs() <= 5.0000001e-9, "{x} -> {s}");
        prop_assert_eq!(format_sig9(back), s);
    }

    #[test]
    fn linear_consumption_satisfies_hypotheses(k in 0.0f64..50.0, seed: u64) {
        let spec = KineticsSpec::LinearConsumption { rate_constant: k };
        let names = vec!["A".to_string(), "B".to_string()];
        let model = spec.build(&names).unwrap().with_box(vec![(0.0, 1.0); 2]);
        let params = [SpeciesParams::uniform("A", 1.0, -1.0), SpeciesParams::uniform("B", 1.0, -1.0)];
        prop_assert!(verify_hypotheses(&model, &params, seed).unwrap().all_pass());
    }

    #[test]
    fn config_text_round_trips(
        nr in 2usize..64, nz in 2usize..64, dt in 1e-4f64..1.0,
        beta in 1e-3f64..1e3, gamma in 1e-3f64..1e3, theta in 0.0f64..1e3,
        inlet in -1e3f64..1e3, wall in -1e3f64..1e3,
    ) {
        let text = format!(
            "# generated\n[grid]\nnr = {nr}\n  nz={nz}\ndt = {dt:e}\nt_end = 1\n\n[kinetics]\nmodel = zero\n\n\
             [species.X]\nbeta_f = {beta}\ngamma_s = {gamma:e}\ntheta_s = {theta}\ndelta = -1\n\
             inlet = const:{inlet}\nwall_init = const:{wall}\n"
        );
        let doc = parse_document::<f64>(&text).unwrap();
        let canon = serialize(&doc);
        prop_assert_eq!(&canon, &normalize::<f64>(&text).unwrap());
        prop_assert_eq!(parse_document::<f64>(&canon).unwrap(), doc);
        prop_assert_eq!(normalize::<f64>(&canon).unwrap(), canon);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn consumption_runs_stay_nonnegative(
        k in 0.0f64..40.0,
        inlet in 0.0f64..1.0,
        wall in 0.0f64..1.0,
    ) {
        let grid = Grid::new(6, 12, 0.02, 0.2);
        let cfg = ModelConfig {
            grid,
            species: vec![SpeciesParams::uniform("A", 1.0, -1.0)],
            kinetics: KineticsSpec::LinearConsumption { rate_constant: k },
            initial: InitialData::constant(&grid, &[inlet], &[wall]),
        };
        let opts = RunOptions { keep_trajectory: false, ..RunOptions::default() };
        let out = run_simulation(&cfg, &CouplerSettings::default(), &opts).unwrap();
        prop_assert!(out.report.nonnegativity.pass);
        prop_assert!(out.report.envelopes.iter().all(|v| v.pass));
    }
}
