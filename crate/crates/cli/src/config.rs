//! Run configuration: a sectioned key-value file, parsed strictly.
//!
//! ```ini
//! [material]
//! mu_r = 100
//! sigma = 1e6
//!
//! [object]
//! shape = sphere
//! alpha = 0.01
//!
//! [sweep]
//! omega_min = 10
//! omega_max = 1e9
//! points = 40
//! ```
//!
//! Unknown sections and keys are errors, as are repeated keys.

use std::collections::BTreeMap;
use std::path::Path;

use ini::Ini;
use mptensor::domain::{MaterialSpec, ObjectPlacement, Regime, EPS0, MU0};
use mptensor::fem::SolverParams;
use mptensor::mesh::UnitShape;
use mptensor::tensor::Vec3;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    /// Sphere series solutions only.
    Analytic,
    /// Edge-element solves on a generated mesh.
    Fem,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshSettings {
    pub truncation_radius: Option<f64>,
    pub resolution: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub csv: String,
    pub bundle: String,
    pub compare: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackgroundSpec {
    /// Standing wave with `H₀(z) = h0`, expanded about the object centre.
    Uniform { h0: Vec3 },
    PlaneWave { direction: Vec3, polarization: Vec3, amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareConfig {
    pub points: Vec<Vec3>,
    pub background: BackgroundSpec,
    /// Calibration constant `C` of the residual bound.
    pub calibration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub material: MaterialSpec,
    pub placement: ObjectPlacement,
    /// Ascending, without repeats.
    pub omegas: Vec<f64>,
    pub solver: SolverKind,
    /// `None` selects the regime per frequency.
    pub regime: Option<Regime>,
    pub mesh: MeshSettings,
    pub params: SolverParams,
    pub output: OutputConfig,
    pub compare: CompareConfig,
}

const SCHEMA: &[(&str, &[&str])] = &[
    ("material", &["eps_r", "eps_star", "mu_r", "mu_star", "sigma"]),
    ("object", &["shape", "alpha", "z"]),
    ("sweep", &["omega", "omega_min", "omega_max", "points", "spacing"]),
    ("solver", &["solver", "regime", "resolution", "truncation_radius", "tolerance", "max_iterations"]),
    ("output", &["csv", "bundle", "compare"]),
    ("compare", &["points", "background", "h0", "direction", "polarization", "amplitude", "calibration"]),
];

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

type Sections = BTreeMap<String, BTreeMap<String, String>>;

fn strict_sections(ini: &Ini) -> Result<Sections, CliError> {
    let mut out: Sections = BTreeMap::new();
    for (name, props) in ini.iter() {
        let Some(name) = name else {
            if let Some((k, _)) = props.iter().next() {
                return Err(bad(format!("key '{k}' appears before any section")));
            }
            continue;
        };
        let Some((_, keys)) = SCHEMA.iter().find(|(s, _)| *s == name) else {
            return Err(bad(format!("unknown section [{name}]")));
        };
        let section = out.entry(name.to_string()).or_default();
        for (k, v) in props.iter() {
            if !keys.contains(&k) {
                return Err(bad(format!("unknown key '{k}' in [{name}]")));
            }
            if section.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(bad(format!("key '{k}' repeated in [{name}]")));
            }
        }
    }
    Ok(out)
}

struct Section<'a> {
    name: &'a str,
    keys: Option<&'a BTreeMap<String, String>>,
}

impl<'a> Section<'a> {
    fn get(&self, key: &str) -> Option<&'a str> {
        self.keys.and_then(|m| m.get(key)).map(String::as_str)
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key).map(|v| parse_f64(v, self.name, key)).transpose()
    }

    fn required_f64(&self, key: &str) -> Result<f64, CliError> {
        self.f64(key)?.ok_or_else(|| bad(format!("[{}] needs '{key}'", self.name)))
    }

    fn vec3(&self, key: &str) -> Result<Option<Vec3>, CliError> {
        self.get(key).map(|v| parse_vec3(v, self.name, key)).transpose()
    }
}

fn parse_f64(v: &str, section: &str, key: &str) -> Result<f64, CliError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(bad(format!("[{section}] {key} = '{v}' is not a finite number"))),
    }
}

fn parse_vec3(v: &str, section: &str, key: &str) -> Result<Vec3, CliError> {
    let nums = v
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| parse_f64(t, section, key))
        .collect::<Result<Vec<_>, _>>()?;
    <[f64; 3]>::try_from(nums).map_err(|_| bad(format!("[{section}] {key} needs three numbers, got '{v}'")))
}

fn either(s: &Section, relative: &str, absolute: &str, unit: f64) -> Result<Option<f64>, CliError> {
    match (s.f64(relative)?, s.f64(absolute)?) {
        (Some(_), Some(_)) => Err(bad(format!("[{}] give '{relative}' or '{absolute}', not both", s.name))),
        (Some(r), None) => Ok(Some(r * unit)),
        (None, a) => Ok(a),
    }
}

fn parse_material(s: &Section) -> Result<MaterialSpec, CliError> {
    if s.keys.is_none() {
        return Err(bad("missing [material] section"));
    }
    let eps = either(s, "eps_r", "eps_star", EPS0)?.unwrap_or(EPS0);
    let mu = either(s, "mu_r", "mu_star", MU0)?.unwrap_or(MU0);
    let sigma = s.f64("sigma")?.unwrap_or(0.0);
    MaterialSpec::new(eps, mu, sigma).map_err(|e| bad(e.to_string()))
}

fn parse_object(s: &Section) -> Result<ObjectPlacement, CliError> {
    if s.keys.is_none() {
        return Err(bad("missing [object] section"));
    }
    let shape = UnitShape::parse(s.get("shape").unwrap_or("sphere")).map_err(|e| bad(e.to_string()))?;
    let alpha = s.required_f64("alpha")?;
    let z = s.vec3("z")?.unwrap_or([0.0; 3]);
    ObjectPlacement::new(alpha, z, shape).map_err(|e| bad(e.to_string()))
}

fn parse_sweep(s: &Section) -> Result<Vec<f64>, CliError> {
    if s.keys.is_none() {
        return Err(bad("missing [sweep] section"));
    }
    let ranged = ["omega_min", "omega_max", "points", "spacing"].iter().any(|k| s.get(k).is_some());
    let mut omegas = match (s.get("omega"), ranged) {
        (Some(_), true) => return Err(bad("[sweep] give either 'omega' or a range, not both")),
        (Some(list), false) => list
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| parse_f64(t, "sweep", "omega"))
            .collect::<Result<Vec<_>, _>>()?,
        (None, _) => {
            let lo = s.required_f64("omega_min")?;
            let hi = s.required_f64("omega_max")?;
            let n: usize = match s.get("points") {
                None => return Err(bad("[sweep] needs 'points'")),
                Some(v) => v.parse().map_err(|_| bad(format!("[sweep] points = '{v}' is not a count")))?,
            };
            let log = match s.get("spacing").unwrap_or("log") {
                "log" => true,
                "linear" => false,
                other => return Err(bad(format!("[sweep] spacing must be 'log' or 'linear', got '{other}'"))),
            };
            spaced(lo, hi, n, log)?
        }
    };
    if omegas.is_empty() {
        return Err(bad("[sweep] lists no frequencies"));
    }
    if let Some(w) = omegas.iter().find(|w| **w <= 0.0) {
        return Err(bad(format!("[sweep] frequencies must be positive, got {w}")));
    }
    omegas.sort_by(f64::total_cmp);
    if omegas.windows(2).any(|w| w[0] == w[1]) {
        return Err(bad("[sweep] lists a frequency twice"));
    }
    Ok(omegas)
}

/// `n` points from `lo` to `hi` inclusive.
pub fn spaced(lo: f64, hi: f64, n: usize, log: bool) -> Result<Vec<f64>, CliError> {
    if n == 0 {
        return Err(bad("[sweep] points must be at least 1"));
    }
    if !(lo > 0.0 && hi >= lo) {
        return Err(bad(format!("[sweep] needs 0 < omega_min ≤ omega_max, got {lo} and {hi}")));
    }
    if n == 1 {
        if lo != hi {
            return Err(bad("[sweep] a single point needs omega_min = omega_max"));
        }
        return Ok(vec![lo]);
    }
    let last = (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            let t = i as f64 / last;
            match (i, log) {
                (0, _) => lo,
                (i, _) if i == n - 1 => hi,
                (_, true) => 10f64.powf(lo.log10() + t * (hi.log10() - lo.log10())),
                (_, false) => lo + t * (hi - lo),
            }
        })
        .collect())
}

fn parse_solver(s: &Section) -> Result<(SolverKind, Option<Regime>, MeshSettings, SolverParams), CliError> {
    let kind = match s.get("solver").unwrap_or("analytic") {
        "analytic" => SolverKind::Analytic,
        "fem" => SolverKind::Fem,
        other => return Err(bad(format!("[solver] solver must be 'analytic' or 'fem', got '{other}'"))),
    };
    let regime = match s.get("regime").unwrap_or("auto") {
        "auto" => None,
        name => match Regime::parse(name) {
            Some(r @ (Regime::FullModel | Regime::QuasiStatic | Regime::EddyCurrent)) => Some(r),
            Some(r) => return Err(bad(format!("regime '{r}' has no tensors of its own; choose auto, full, quasi-static or eddy"))),
            None => return Err(bad(format!("[solver] unknown regime '{name}'"))),
        },
    };
    let mesh = MeshSettings { truncation_radius: s.f64("truncation_radius")?, resolution: s.f64("resolution")? };
    let mut params = SolverParams::default();
    if let Some(t) = s.f64("tolerance")? {
        params.tolerance = t;
    }
    if let Some(v) = s.get("max_iterations") {
        params.max_iterations = v.parse().map_err(|_| bad(format!("[solver] max_iterations = '{v}' is not a count")))?;
    }
    params.validate().map_err(|e| bad(e.to_string()))?;
    Ok((kind, regime, mesh, params))
}

fn parse_output(s: &Section) -> Result<OutputConfig, CliError> {
    let name = |key: &str, default: &str| -> Result<String, CliError> {
        let v = s.get(key).unwrap_or(default);
        if v.is_empty() || v.contains(['/', '\\']) {
            return Err(bad(format!("[output] {key} must be a plain file name, got '{v}'")));
        }
        Ok(v.to_string())
    };
    Ok(OutputConfig { csv: name("csv", "sweep.csv")?, bundle: name("bundle", "bundle")?, compare: name("compare", "compare")? })
}

fn parse_compare(s: &Section) -> Result<CompareConfig, CliError> {
    let points = match s.get("points") {
        None => Vec::new(),
        Some(v) => v
            .split(';')
            .filter(|p| !p.trim().is_empty())
            .map(|p| parse_vec3(p, "compare", "points"))
            .collect::<Result<_, _>>()?,
    };
    let background = match s.get("background").unwrap_or("uniform") {
        "uniform" => {
            for k in ["direction", "polarization", "amplitude"] {
                if s.get(k).is_some() {
                    return Err(bad(format!("[compare] '{k}' only applies to background = plane")));
                }
            }
            BackgroundSpec::Uniform { h0: s.vec3("h0")?.unwrap_or([0.0, 0.0, 1.0]) }
        }
        "plane" => {
            if s.get("h0").is_some() {
                return Err(bad("[compare] 'h0' only applies to background = uniform"));
            }
            BackgroundSpec::PlaneWave {
                direction: s.vec3("direction")?.unwrap_or([0.0, 0.0, 1.0]),
                polarization: s.vec3("polarization")?.unwrap_or([1.0, 0.0, 0.0]),
                amplitude: s.f64("amplitude")?.unwrap_or(1.0),
            }
        }
        other => return Err(bad(format!("[compare] background must be 'uniform' or 'plane', got '{other}'"))),
    };
    let calibration = s.f64("calibration")?.unwrap_or(mptensor::field::RESIDUAL_CALIBRATION);
    if calibration <= 0.0 {
        return Err(bad("[compare] calibration must be positive"));
    }
    Ok(CompareConfig { points, background, calibration })
}

impl RunConfig {
    pub fn from_str(text: &str) -> Result<Self, CliError> {
        let ini = Ini::load_from_str(text).map_err(|e| bad(format!("malformed config: {e}")))?;
        let sections = strict_sections(&ini)?;
        let section = |name: &'static str| Section { name, keys: sections.get(name) };

        let material = parse_material(&section("material"))?;
        let placement = parse_object(&section("object"))?;
        let omegas = parse_sweep(&section("sweep"))?;
        let (solver, regime, mesh, params) = parse_solver(&section("solver"))?;
        let output = parse_output(&section("output"))?;
        let compare = parse_compare(&section("compare"))?;

        if solver == SolverKind::Analytic && placement.shape != UnitShape::Sphere {
            return Err(bad(format!(
                "solver = analytic only covers spheres, got {}; use solver = fem",
                placement.shape.describe()
            )));
        }
        if let Some(r) = regime {
            r.admits(&material).map_err(|e| bad(e))?;
        }
        Ok(RunConfig { material, placement, omegas, solver, regime, mesh, params, output, compare })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_str(&text)
    }
}
