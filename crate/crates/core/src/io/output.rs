//! Plot-ready CSV files. Numbers carry 9 significant digits in the style of
//! C's `%.9g`, so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FluidField, Grid, WallField};
use crate::scalar::Real;

/// `%.9g`: fixed notation for exponents in `[-4, 9)`, scientific otherwise,
/// trailing zeros removed.
pub fn format_sig9<T: Real>(x: T) -> String {
    let x = x.as_f64();
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Outlet values `C_is(1, t)` sampled over time.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ProbeSeries<T: Real> {
    pub species: Vec<String>,
    pub times: Vec<T>,
    /// `values[n][i]` at `times[n]`.
    pub values: Vec<Vec<T>>,
}

impl<T: Real> ProbeSeries<T> {
    pub fn new(species: Vec<String>) -> Self {
        Self {
            species,
            times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn record(&mut self, wall: &WallField<T>) {
        self.times.push(wall.time);
        self.values.push(
            wall.values
                .iter()
                .map(|v| *v.last().expect("non-empty wall"))
                .collect(),
        );
    }

    /// Time series of one species.
    pub fn column(&self, species: usize) -> Vec<T> {
        self.values.iter().map(|row| row[species]).collect()
    }
}

pub fn snapshot_csv<T: Real>(
    field: &FluidField<T>,
    grid: &Grid<T>,
    species: &[String],
) -> Result<String> {
    if !field.matches_grid(grid) || field.species() != species.len() {
        return Err(Error::GridMismatch(format!(
            "field {}x{} with {} species, grid {}x{} with {} names",
            field.nr,
            field.nz,
            field.species(),
            grid.nr,
            grid.nz,
            species.len()
        )));
    }
    let mut out = String::from("r,z");
    for s in species {
        out.push(',');
        out.push_str(s);
    }
    out.push('\n');
    for k in 0..=grid.nz {
        let z = format_sig9(grid.z(k));
        for j in 0..=grid.nr {
            let _ = write!(out, "{},{}", format_sig9(grid.r(j)), z);
            for i in 0..field.species() {
                let _ = write!(out, ",{}", format_sig9(field.get(i, j, k)));
            }
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn probe_csv<T: Real>(series: &ProbeSeries<T>) -> String {
    let mut out = String::from("t");
    for s in &series.species {
        out.push(',');
        out.push_str(s);
    }
    out.push('\n');
    for (t, row) in series.times.iter().zip(&series.values) {
        out.push_str(&format_sig9(*t));
        for &v in row {
            out.push(',');
            out.push_str(&format_sig9(v));
        }
        out.push('\n');
    }
    out
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_snapshot_csv<T: Real>(
    field: &FluidField<T>,
    grid: &Grid<T>,
    species: &[String],
    path: &Path,
) -> Result<()> {
    write_file(path, &snapshot_csv(field, grid, species)?)
}

pub fn write_probe_csv<T: Real>(series: &ProbeSeries<T>, path: &Path) -> Result<()> {
    write_file(path, &probe_csv(series))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_matches_printf() {
        let cases = [
            (0.02, "0.02"),
            (500.0, "500"),
            (1.0 / 3.0, "0.333333333"),
            (2.0 / std::f64::consts::E.sqrt(), "1.21306132"),
            (123456789.4, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (1e-5, "1e-05"),
            (1.5e-7, "1.5e-07"),
            (-0.125, "-0.125"),
            (0.0001, "0.0001"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(format_sig9(x), want, "{x}");
        }
    }

    #[test]
    fn constant_field_cells_are_identical() {
        let grid = Grid::new(4, 4, 0.1, 1.0);
        let field = FluidField::from_fn(&grid, 2, 0.0, |_, _, _| 0.1 + 0.2);
        let csv = snapshot_csv(&field, &grid, &["A".into(), "B".into()]).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("r,z,A,B"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 25);
        assert_eq!(rows[0], "0,0,0.3,0.3");
        assert_eq!(rows[5], "0,0.25,0.3,0.3");
        assert!(rows.iter().all(|r| r.ends_with(",0.3,0.3")));
    }

    #[test]
    fn empty_probe_is_header_only() {
        let s = ProbeSeries::<f64>::new(vec!["CO".into(), "O2".into()]);
        assert_eq!(probe_csv(&s), "t,CO,O2\n");
    }
}
