//! Line-oriented configuration files.
//!
//! ```text
//! [grid]
//! nr = 32
//! [species.CO]
//! inlet = const:0.02
//! wall_init = file:co_wall.txt
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Keys are unique per
//! section and unknown keys are errors. Only `[coupler]` keys have
//! defaults. `file:` paths are resolved against the config's directory.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::coupler::CouplerSettings;
use crate::fluid::FluxForm;
use crate::kinetics::{CoOxidationSpec, KineticsSpec};
use crate::model::{Grid, InitialData, ModelConfig, SpeciesParams};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigErrorKind {
    MissingKey,
    UnknownKey,
    BadNumber,
    BadValue,
    FileNotFound,
    LengthMismatch,
}

impl ConfigErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            Self::MissingKey => "MISSING_KEY",
            Self::UnknownKey => "UNKNOWN_KEY",
            Self::BadNumber => "BAD_NUMBER",
            Self::BadValue => "BAD_VALUE",
            Self::FileNotFound => "FILE_NOT_FOUND",
            Self::LengthMismatch => "LENGTH_MISMATCH",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub kind: ConfigErrorKind,
    pub section: String,
    pub key: String,
    /// 1-based; 0 when the section itself is absent.
    pub line: usize,
    pub detail: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {} ", self.line, self.kind.code())?;
        if self.key.is_empty() {
            write!(f, "[{}]", self.section)?;
        } else {
            write!(f, "{}.{}", self.section, self.key)?;
        }
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

/// Every problem found in one file, in line order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl ConfigErrors {
    pub fn has(&self, kind: ConfigErrorKind, section: &str, key: &str) -> bool {
        self.0
            .iter()
            .any(|e| e.kind == kind && e.section == section && e.key == key)
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, e) in self.0.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, PartialEq)]
pub enum Profile<T: Real> {
    Const(T),
    File(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesEntry<T: Real> {
    pub params: SpeciesParams<T>,
    pub inlet: Profile<T>,
    pub wall_init: Profile<T>,
}

/// Parsed file before profile files are read.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDocument<T: Real> {
    pub grid: Grid<T>,
    pub coupler: CouplerSettings<T>,
    pub kinetics: KineticsSpec<T>,
    pub species: Vec<SpeciesEntry<T>>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config<T: Real> {
    pub model: ModelConfig<T>,
    pub coupler: CouplerSettings<T>,
    pub document: ConfigDocument<T>,
}

struct Entry {
    key: String,
    value: String,
    line: usize,
    used: bool,
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

struct Reader {
    errors: Vec<ConfigError>,
}

impl Reader {
    fn push(
        &mut self,
        kind: ConfigErrorKind,
        section: &str,
        key: &str,
        line: usize,
        detail: impl Into<String>,
    ) {
        self.errors.push(ConfigError {
            kind,
            section: section.to_string(),
            key: key.to_string(),
            line,
            detail: detail.into(),
        });
    }

    fn raw<'s>(&mut self, s: &'s mut Section, key: &str) -> Option<(&'s str, usize)> {
        let e = s.entries.iter_mut().find(|e| e.key == key)?;
        e.used = true;
        Some((e.value.as_str(), e.line))
    }

    fn required<'s>(&mut self, s: &'s mut Section, key: &str) -> Option<(&'s str, usize)> {
        let (name, line) = (s.name.clone(), s.line);
        let found = self.raw(s, key);
        if found.is_none() {
            self.push(
                ConfigErrorKind::MissingKey,
                &name,
                key,
                line,
                "required key is absent",
            );
        }
        found
    }

    fn number<T: Real>(&mut self, section: &str, key: &str, value: &str, line: usize) -> Option<T> {
        match value.parse::<f64>() {
            Ok(x) => Some(T::lit(x)),
            Err(_) => {
                self.push(
                    ConfigErrorKind::BadNumber,
                    section,
                    key,
                    line,
                    format!("`{value}` is not a number"),
                );
                None
            }
        }
    }

    fn real<T: Real>(&mut self, s: &mut Section, key: &str) -> Option<T> {
        let name = s.name.clone();
        let (v, line) = self.required(s, key)?;
        let v = v.to_string();
        self.number(&name, key, &v, line)
    }

    fn count(&mut self, s: &mut Section, key: &str) -> Option<usize> {
        let name = s.name.clone();
        let (v, line) = self.required(s, key)?;
        match v.parse::<usize>() {
            Ok(n) => Some(n),
            Err(_) => {
                let detail = format!("`{v}` is not a nonnegative integer");
                self.push(ConfigErrorKind::BadNumber, &name, key, line, detail);
                None
            }
        }
    }

    fn text(&mut self, s: &mut Section, key: &str) -> Option<String> {
        self.required(s, key).map(|(v, _)| v.to_string())
    }

    fn profile<T: Real>(&mut self, s: &mut Section, key: &str) -> Option<Profile<T>> {
        let name = s.name.clone();
        let (v, line) = self.required(s, key)?;
        let v = v.to_string();
        if let Some(x) = v.strip_prefix("const:") {
            self.number(&name, key, x.trim(), line).map(Profile::Const)
        } else if let Some(p) = v.strip_prefix("file:") {
            Some(Profile::File(p.trim().to_string()))
        } else {
            let detail = format!("`{v}` must be `const:<number>` or `file:<path>`");
            self.push(ConfigErrorKind::BadValue, &name, key, line, detail);
            None
        }
    }

    fn leftovers(&mut self, s: &Section) {
        for e in s.entries.iter().filter(|e| !e.used) {
            self.push(
                ConfigErrorKind::UnknownKey,
                &s.name,
                &e.key,
                e.line,
                "not a recognised key",
            );
        }
    }
}

fn split_sections(text: &str, reader: &mut Reader) -> Vec<Section> {
    let mut sections: Vec<Section> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if let Some(name) = l.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let name = name.trim().to_string();
            if sections.iter().any(|s| s.name == name) {
                reader.push(
                    ConfigErrorKind::UnknownKey,
                    &name,
                    "",
                    line,
                    "section repeated",
                );
            }
            sections.push(Section {
                name,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let Some(current) = sections.last_mut() else {
            reader.push(
                ConfigErrorKind::UnknownKey,
                "",
                l,
                line,
                "key outside of any section",
            );
            continue;
        };
        match l.split_once('=') {
            Some((k, v)) => {
                let key = k.trim().to_string();
                if current.entries.iter().any(|e| e.key == key) {
                    let sec = current.name.clone();
                    reader.push(
                        ConfigErrorKind::UnknownKey,
                        &sec,
                        &key,
                        line,
                        "key repeated",
                    );
                    continue;
                }
                current.entries.push(Entry {
                    key,
                    value: v.trim().to_string(),
                    line,
                    used: false,
                });
            }
            None => {
                let sec = current.name.clone();
                reader.push(
                    ConfigErrorKind::UnknownKey,
                    &sec,
                    l,
                    line,
                    "expected `key = value`",
                );
            }
        }
    }
    sections
}

fn take_section(sections: &mut Vec<Section>, name: &str) -> Section {
    match sections.iter().position(|s| s.name == name) {
        Some(i) => sections.remove(i),
        None => Section {
            name: name.to_string(),
            line: 0,
            entries: Vec::new(),
        },
    }
}

/// Parses the text without touching the file system.
pub fn parse_document<T: Real>(text: &str) -> Result<ConfigDocument<T>, ConfigErrors> {
    let mut r = Reader { errors: Vec::new() };
    let mut sections = split_sections(text, &mut r);

    let mut g = take_section(&mut sections, "grid");
    let nr = r.count(&mut g, "nr");
    let nz = r.count(&mut g, "nz");
    let dt = r.real::<T>(&mut g, "dt");
    let t_end = r.real::<T>(&mut g, "t_end");
    r.leftovers(&g);

    let mut c = take_section(&mut sections, "coupler");
    let mut coupler = CouplerSettings::<T>::default();
    if let Some((v, line)) = r.raw(&mut c, "tol") {
        let v = v.to_string();
        if let Some(x) = r.number(&c.name, "tol", &v, line) {
            coupler.tol = x;
        }
    }
    if let Some((v, line)) = r.raw(&mut c, "max_iter") {
        match v.parse::<usize>() {
            Ok(n) => coupler.max_iter = n,
            Err(_) => {
                let detail = format!("`{v}` is not a nonnegative integer");
                r.push(
                    ConfigErrorKind::BadNumber,
                    "coupler",
                    "max_iter",
                    line,
                    detail,
                );
            }
        }
    }
    if let Some((v, line)) = r.raw(&mut c, "flux_form") {
        match v {
            "gradient" => coupler.flux_form = FluxForm::Gradient,
            "integral" => coupler.flux_form = FluxForm::Integral,
            other => {
                let detail = format!("`{other}` must be `gradient` or `integral`");
                r.push(
                    ConfigErrorKind::BadValue,
                    "coupler",
                    "flux_form",
                    line,
                    detail,
                );
            }
        }
    }
    if let Some((v, line)) = r.raw(&mut c, "relaxation") {
        let v = v.to_string();
        if let Some(x) = r.number(&c.name, "relaxation", &v, line) {
            coupler.relaxation = x;
        }
    }
    r.leftovers(&c);

    let mut k = take_section(&mut sections, "kinetics");
    let kinetics = parse_kinetics::<T>(&mut k, &mut r);
    r.leftovers(&k);

    let mut species = Vec::new();
    let mut rest = Vec::new();
    for mut s in sections {
        let Some(name) = s.name.strip_prefix("species.").map(str::to_string) else {
            rest.push(s);
            continue;
        };
        let beta = r.real::<T>(&mut s, "beta_f");
        let gamma = r.real::<T>(&mut s, "gamma_s");
        let theta = r.real::<T>(&mut s, "theta_s");
        let delta = r.real::<T>(&mut s, "delta");
        let inlet = r.profile::<T>(&mut s, "inlet");
        let wall_init = r.profile::<T>(&mut s, "wall_init");
        r.leftovers(&s);
        if let (Some(b), Some(g), Some(t), Some(d), Some(i), Some(w)) =
            (beta, gamma, theta, delta, inlet, wall_init)
        {
            species.push(SpeciesEntry {
                params: SpeciesParams::new(name, b, g, t, d),
                inlet: i,
                wall_init: w,
            });
        }
    }
    for s in rest {
        r.push(
            ConfigErrorKind::UnknownKey,
            &s.name,
            "",
            s.line,
            "unknown section",
        );
    }

    if let Some(kin) = &kinetics {
        check_kinetics_names(kin, &species, &k, &mut r);
    }

    let mut errors = r.errors;
    errors.sort_by_key(|e| e.line);
    match (nr, nz, dt, t_end, kinetics) {
        (Some(nr), Some(nz), Some(dt), Some(t_end), Some(kinetics)) if errors.is_empty() => {
            Ok(ConfigDocument {
                grid: Grid::new(nr, nz, dt, t_end),
                coupler,
                kinetics,
                species,
            })
        }
        _ => Err(ConfigErrors(errors)),
    }
}

fn parse_kinetics<T: Real>(k: &mut Section, r: &mut Reader) -> Option<KineticsSpec<T>> {
    let (model, line) = r.required(k, "model").map(|(v, l)| (v.to_string(), l))?;
    match model.as_str() {
        "zero" => Some(KineticsSpec::Zero),
        "linear_consumption" => r
            .real(k, "rate_constant")
            .map(|rate_constant| KineticsSpec::LinearConsumption { rate_constant }),
        "co_oxidation" => {
            let prefactor = r.real(k, "prefactor");
            let activation_energy = r.real(k, "activation_energy");
            let heat_release = r.real(k, "heat_release");
            let fuel = r.text(k, "fuel");
            let oxidizer = r.text(k, "oxidizer");
            let temperature = r.text(k, "temperature").map(|t| (t != "none").then_some(t));
            let products = r.text(k, "products").map(|p| {
                p.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect::<Vec<_>>()
            });
            let box_keys: Vec<(String, String, usize)> = k
                .entries
                .iter_mut()
                .filter_map(|e| {
                    let name = e.key.strip_prefix("box.")?.to_string();
                    e.used = true;
                    Some((name, e.value.clone(), e.line))
                })
                .collect();
            let mut boxes = Vec::new();
            for (name, value, line) in box_keys {
                let key = format!("box.{name}");
                let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                if parts.len() != 2 {
                    r.push(
                        ConfigErrorKind::BadValue,
                        "kinetics",
                        &key,
                        line,
                        "expected `<lo>, <hi>`",
                    );
                    continue;
                }
                let lo = r.number::<T>("kinetics", &key, parts[0], line);
                let hi = r.number::<T>("kinetics", &key, parts[1], line);
                if let (Some(lo), Some(hi)) = (lo, hi) {
                    boxes.push((name, lo, hi));
                }
            }
            Some(KineticsSpec::CoOxidation(CoOxidationSpec {
                prefactor: prefactor?,
                activation_energy: activation_energy?,
                heat_release: heat_release?,
                fuel: fuel?,
                oxidizer: oxidizer?,
                temperature: temperature?,
                products: products?,
                boxes,
            }))
        }
        other => {
            let detail = format!("`{other}` is not one of zero, linear_consumption, co_oxidation");
            r.push(ConfigErrorKind::BadValue, "kinetics", "model", line, detail);
            None
        }
    }
}

fn check_kinetics_names<T: Real>(
    kin: &KineticsSpec<T>,
    species: &[SpeciesEntry<T>],
    k: &Section,
    r: &mut Reader,
) {
    let KineticsSpec::CoOxidation(spec) = kin else {
        return;
    };
    let known = |n: &str| species.iter().any(|s| s.params.name == n);
    let line_of = |key: &str| {
        k.entries
            .iter()
            .find(|e| e.key == key)
            .map_or(k.line, |e| e.line)
    };
    let mut refs: Vec<(String, &str)> = vec![
        ("fuel".into(), spec.fuel.as_str()),
        ("oxidizer".into(), spec.oxidizer.as_str()),
    ];
    if let Some(t) = &spec.temperature {
        refs.push(("temperature".into(), t.as_str()));
    }
    for p in &spec.products {
        refs.push(("products".into(), p.as_str()));
    }
    for (name, _, _) in &spec.boxes {
        refs.push((format!("box.{name}"), name.as_str()));
    }
    for (key, name) in refs {
        if !known(name) {
            let detail = format!("no section [species.{name}]");
            r.push(
                ConfigErrorKind::BadValue,
                "kinetics",
                &key,
                line_of(&key),
                detail,
            );
        }
    }
}

/// Shortest text that parses back to the same value.
pub fn format_number<T: Real>(x: T) -> String {
    let plain = format!("{x}");
    let sci = format!("{x:e}");
    if sci.len() < plain.len() {
        sci
    } else {
        plain
    }
}

fn format_profile<T: Real>(p: &Profile<T>) -> String {
    match p {
        Profile::Const(x) => format!("const:{}", format_number(*x)),
        Profile::File(path) => format!("file:{path}"),
    }
}

/// Canonical text: fixed section and key order, coupler defaults explicit.
pub fn serialize<T: Real>(doc: &ConfigDocument<T>) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let g = &doc.grid;
    let _ = writeln!(s, "[grid]");
    let _ = writeln!(s, "nr = {}", g.nr);
    let _ = writeln!(s, "nz = {}", g.nz);
    let _ = writeln!(s, "dt = {}", format_number(g.dt));
    let _ = writeln!(s, "t_end = {}", format_number(g.t_end));
    let c = &doc.coupler;
    let _ = writeln!(s, "\n[coupler]");
    let _ = writeln!(s, "tol = {}", format_number(c.tol));
    let _ = writeln!(s, "max_iter = {}", c.max_iter);
    let form = match c.flux_form {
        FluxForm::Gradient => "gradient",
        FluxForm::Integral => "integral",
    };
    let _ = writeln!(s, "flux_form = {form}");
    let _ = writeln!(s, "relaxation = {}", format_number(c.relaxation));
    let _ = writeln!(s, "\n[kinetics]");
    let _ = writeln!(s, "model = {}", doc.kinetics.name());
    match &doc.kinetics {
        KineticsSpec::Zero => {}
        KineticsSpec::LinearConsumption { rate_constant } => {
            let _ = writeln!(s, "rate_constant = {}", format_number(*rate_constant));
        }
        KineticsSpec::CoOxidation(k) => {
            let _ = writeln!(s, "prefactor = {}", format_number(k.prefactor));
            let _ = writeln!(
                s,
                "activation_energy = {}",
                format_number(k.activation_energy)
            );
            let _ = writeln!(s, "heat_release = {}", format_number(k.heat_release));
            let _ = writeln!(s, "fuel = {}", k.fuel);
            let _ = writeln!(s, "oxidizer = {}", k.oxidizer);
            let _ = writeln!(
                s,
                "temperature = {}",
                k.temperature.as_deref().unwrap_or("none")
            );
            let _ = writeln!(s, "products = {}", k.products.join(", "));
            for (name, lo, hi) in &k.boxes {
                let _ = writeln!(
                    s,
                    "box.{name} = {}, {}",
                    format_number(*lo),
                    format_number(*hi)
                );
            }
        }
    }
    for sp in &doc.species {
        let p = &sp.params;
        let _ = writeln!(s, "\n[species.{}]", p.name);
        let _ = writeln!(s, "beta_f = {}", format_number(p.beta_f));
        let _ = writeln!(s, "gamma_s = {}", format_number(p.gamma_s));
        let _ = writeln!(s, "theta_s = {}", format_number(p.theta_s));
        let _ = writeln!(s, "delta = {}", format_number(p.delta));
        let _ = writeln!(s, "inlet = {}", format_profile(&sp.inlet));
        let _ = writeln!(s, "wall_init = {}", format_profile(&sp.wall_init));
    }
    s
}

/// `serialize(parse_document(text))`.
pub fn normalize<T: Real>(text: &str) -> Result<String, ConfigErrors> {
    parse_document::<T>(text).map(|d| serialize(&d))
}

fn read_profile<T: Real>(
    profile: &Profile<T>,
    nodes: usize,
    base_dir: &Path,
    section: &str,
    key: &str,
    errors: &mut Vec<ConfigError>,
) -> Option<Vec<T>> {
    let err = |kind, detail: String| ConfigError {
        kind,
        section: section.to_string(),
        key: key.to_string(),
        line: 0,
        detail,
    };
    match profile {
        Profile::Const(x) => Some(vec![*x; nodes]),
        Profile::File(rel) => {
            let path: PathBuf = base_dir.join(rel);
            let text = match std::fs::read_to_string(&path) {
                Ok(t) => t,
                Err(e) => {
                    errors.push(err(
                        ConfigErrorKind::FileNotFound,
                        format!("{}: {e}", path.display()),
                    ));
                    return None;
                }
            };
            let mut values = Vec::new();
            for (n, l) in text.lines().enumerate() {
                let l = l.trim();
                if l.is_empty() {
                    continue;
                }
                match l.parse::<f64>() {
                    Ok(x) => values.push(T::lit(x)),
                    Err(_) => {
                        let detail =
                            format!("{} line {}: `{l}` is not a number", path.display(), n + 1);
                        errors.push(err(ConfigErrorKind::BadNumber, detail));
                        return None;
                    }
                }
            }
            if values.len() != nodes {
                let detail = format!(
                    "{} has {} values, grid needs {nodes}",
                    path.display(),
                    values.len()
                );
                errors.push(err(ConfigErrorKind::LengthMismatch, detail));
                return None;
            }
            Some(values)
        }
    }
}

impl<T: Real> ConfigDocument<T> {
    /// Reads profile files relative to `base_dir`. Error lines point at the
    /// profile key in `text` when given.
    pub fn resolve(&self, base_dir: &Path, text: Option<&str>) -> Result<Config<T>, ConfigErrors> {
        let mut errors = Vec::new();
        let mut inlet = Vec::new();
        let mut wall_init = Vec::new();
        for sp in &self.species {
            let section = format!("species.{}", sp.params.name);
            let before = errors.len();
            let i = read_profile(
                &sp.inlet,
                self.grid.radial_nodes(),
                base_dir,
                &section,
                "inlet",
                &mut errors,
            );
            let w = read_profile(
                &sp.wall_init,
                self.grid.axial_nodes(),
                base_dir,
                &section,
                "wall_init",
                &mut errors,
            );
            if let Some(text) = text {
                for e in &mut errors[before..] {
                    e.line = locate(text, &e.section, &e.key);
                }
            }
            inlet.extend(i);
            wall_init.extend(w);
        }
        if !errors.is_empty() {
            return Err(ConfigErrors(errors));
        }
        Ok(Config {
            model: ModelConfig {
                grid: self.grid,
                species: self.species.iter().map(|s| s.params.clone()).collect(),
                kinetics: self.kinetics.clone(),
                initial: InitialData { inlet, wall_init },
            },
            coupler: self.coupler,
            document: self.clone(),
        })
    }
}

fn locate(text: &str, section: &str, key: &str) -> usize {
    let mut current = "";
    for (n, raw) in text.lines().enumerate() {
        let l = raw.trim();
        if let Some(name) = l.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = name.trim();
        } else if current == section && l.split_once('=').is_some_and(|(k, _)| k.trim() == key) {
            return n + 1;
        }
    }
    0
}

/// Parses `text` and reads its profile files relative to `base_dir`.
pub fn parse_config<T: Real>(text: &str, base_dir: &Path) -> Result<Config<T>, ConfigErrors> {
    parse_document::<T>(text)?.resolve(base_dir, Some(text))
}

/// Reads and parses a config file.
pub fn load_config<T: Real>(path: &Path) -> crate::error::Result<Config<T>> {
    let text = std::fs::read_to_string(path).map_err(|source| crate::error::Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(parse_config(&text, base)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
# two species
[grid]
nr = 8
nz = 16
dt = 0.01
t_end = 0.1

[kinetics]
model = linear_consumption
rate_constant = 2

[species.A]
beta_f = 1
gamma_s = 1
theta_s = 0.5
delta = -1
inlet = const:0.3
wall_init = const:0.3

[species.B]
beta_f = 2
gamma_s = 1
theta_s = 1
delta = 1
inlet = const:0
wall_init = const:0
";

    #[test]
    fn minimal_config_round_trips() {
        let doc = parse_document::<f64>(MINIMAL).unwrap();
        assert_eq!(doc.species.len(), 2);
        assert_eq!(doc.coupler, CouplerSettings::default());
        let once = serialize(&doc);
        assert_eq!(once, normalize::<f64>(MINIMAL).unwrap());
        assert_eq!(normalize::<f64>(&once).unwrap(), once);
        assert!(once.contains("tol = 1e-10\n"));
    }

    #[test]
    fn missing_key_names_section_and_key() {
        let text = MINIMAL.replace("beta_f = 2\n", "");
        let err = parse_document::<f64>(&text).unwrap_err();
        assert!(
            err.has(ConfigErrorKind::MissingKey, "species.B", "beta_f"),
            "{err}"
        );
        let msg = err.to_string();
        assert!(msg.contains("MISSING_KEY species.B.beta_f"), "{msg}");
        assert!(msg.starts_with("line 20:"), "{msg}");
    }

    #[test]
    fn unknown_and_bad_values_are_reported_with_lines() {
        let text = MINIMAL
            .replace("theta_s = 0.5", "thetas = 0.5")
            .replace("dt = 0.01", "dt = fast");
        let err = parse_document::<f64>(&text).unwrap_err();
        assert!(err.has(ConfigErrorKind::UnknownKey, "species.A", "thetas"));
        assert!(err.has(ConfigErrorKind::MissingKey, "species.A", "theta_s"));
        assert!(err.has(ConfigErrorKind::BadNumber, "grid", "dt"));
        let dt = err.0.iter().find(|e| e.key == "dt").unwrap();
        assert_eq!(dt.line, 5);
    }

    #[test]
    fn coupler_keys_are_optional_and_checked() {
        let text = format!("{MINIMAL}\n[coupler]\nmax_iter = 7\nflux_form = integral\n");
        let doc = parse_document::<f64>(&text).unwrap();
        assert_eq!(doc.coupler.max_iter, 7);
        assert_eq!(doc.coupler.flux_form, FluxForm::Integral);
        let bad = format!("{MINIMAL}\n[coupler]\nflux_form = sideways\n");
        let err = parse_document::<f64>(&bad).unwrap_err();
        assert!(err.has(ConfigErrorKind::BadValue, "coupler", "flux_form"));
    }

    #[test]
    fn profile_files_are_checked() {
        let dir = tempfile::tempdir().unwrap();
        let nine: String = (0..9).map(|j| format!("{}\n", j as f64 / 8.0)).collect();
        std::fs::write(dir.path().join("a.txt"), &nine).unwrap();
        std::fs::write(dir.path().join("short.txt"), "1\n2\n").unwrap();
        let text = MINIMAL.replacen("inlet = const:0.3", "inlet = file:a.txt", 1);
        let cfg = parse_config::<f64>(&text, dir.path()).unwrap();
        assert_eq!(cfg.model.initial.inlet[0][8], 1.0);
        assert!(serialize(&cfg.document).contains("inlet = file:a.txt"));

        let short = MINIMAL.replacen("inlet = const:0.3", "inlet = file:short.txt", 1);
        let err = parse_config::<f64>(&short, dir.path()).unwrap_err();
        assert!(err.has(ConfigErrorKind::LengthMismatch, "species.A", "inlet"));
        assert_eq!(err.0[0].line, 17);

        let gone = MINIMAL.replacen("wall_init = const:0\n", "wall_init = file:nope.txt\n", 1);
        let err = parse_config::<f64>(&gone, dir.path()).unwrap_err();
        assert!(err.has(ConfigErrorKind::FileNotFound, "species.B", "wall_init"));
    }

    #[test]
    fn kinetics_species_must_exist() {
        let text = MINIMAL.replace(
            "model = linear_consumption\nrate_constant = 2",
            "model = co_oxidation\nprefactor = 1\nactivation_energy = 0\nheat_release = 1\nfuel = A\noxidizer = B\ntemperature = none\nproducts = C\nbox.A = 0, 0.1",
        );
        let err = parse_document::<f64>(&text).unwrap_err();
        assert!(
            err.has(ConfigErrorKind::BadValue, "kinetics", "products"),
            "{err}"
        );
        assert_eq!(err.0.len(), 1);
    }

    #[test]
    fn numbers_print_shortest() {
        assert_eq!(format_number(0.02), "0.02");
        assert_eq!(format_number(1e-10), "1e-10");
        assert_eq!(format_number(500.0), "500");
        assert_eq!(format_number(-1.0), "-1");
    }
}
