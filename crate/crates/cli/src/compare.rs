//! `H_Δ` at user points under every regime formula that applies.

use std::io::Write;

use mptensor::assembly::TensorBundle;
use mptensor::domain::{classify_regime, ObjectPlacement, Regime, RegimeThresholds};
use mptensor::field::{
    hdelta_alt, hdelta_eddy, hdelta_main, hdelta_quasistatic, hdelta_smallalpha, hdelta_smallk_dielectric,
    BackgroundField, FieldPrediction, MIN_DISTANCE_FACTOR, RESIDUAL_CALIBRATION,
};
use mptensor::tensor::{self, cnorm, complexify, csub, CVec3, Vec3};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::compute::{compute, polya_szego_pair, Frequency};
use crate::config::{BackgroundSpec, RunConfig};
use crate::sweep::num;
use crate::CliError;

type Expansion =
    fn(&Vec3, &ObjectPlacement, &TensorBundle, &BackgroundField) -> mptensor::Result<FieldPrediction>;

/// Largest `|ν| μ_r` for which the small-body formula ignores induction.
pub const SMALL_INDUCTION: f64 = 0.1;

pub const FORMULAS: [&str; 6] = ["main", "alt", "eddy", "quasi-static", "small-k-dielectric", "small-alpha"];

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok(CVec3),
    Skipped(String),
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub formula: &'static str,
    pub status: Status,
    pub residual_bound: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PointReport {
    pub omega: f64,
    pub x: Vec3,
    pub entries: Vec<Entry>,
}

impl PointReport {
    /// `|a − b| / max(|a|, |b|)` for every pair of evaluated formulas.
    pub fn pairs(&self) -> Vec<(&'static str, &'static str, f64)> {
        let ok: Vec<_> = self
            .entries
            .iter()
            .filter_map(|e| match &e.status {
                Status::Ok(h) => Some((e.formula, *h)),
                _ => None,
            })
            .collect();
        let mut out = Vec::new();
        for (i, (fa, a)) in ok.iter().enumerate() {
            for (fb, b) in &ok[i + 1..] {
                let scale = cnorm(a).max(cnorm(b));
                let d = if scale == 0.0 { 0.0 } else { cnorm(&csub(a, b)) / scale };
                out.push((*fa, *fb, d));
            }
        }
        out
    }

    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| matches!(e.status, Status::Failed(_))).count()
    }
}

fn background(spec: &BackgroundSpec, k: f64, origin: Vec3) -> mptensor::Result<BackgroundField> {
    match spec {
        BackgroundSpec::Uniform { h0 } => BackgroundField::uniform(complexify(h0), k, origin),
        BackgroundSpec::PlaneWave { direction, polarization, amplitude } => BackgroundField::plane_wave(
            *direction,
            complexify(polarization),
            Complex64::new(*amplitude, 0.0),
            k,
        ),
    }
}

fn status(r: mptensor::Result<CVec3>) -> Status {
    match r {
        Ok(h) => Status::Ok(h),
        Err(e) => Status::Failed(e.to_string()),
    }
}

/// Reports for every point at one frequency.
pub fn compare_at(cfg: &RunConfig, omega: f64) -> Vec<PointReport> {
    let pl = &cfg.placement;
    let thresholds = RegimeThresholds::default();
    let setup = Frequency::new(cfg, omega).and_then(|f| {
        let bg = background(&cfg.compare.background, f.k(), pl.z)?;
        Ok((f, bg))
    });
    let (f, bg) = match setup {
        Ok(s) => s,
        Err(e) => {
            let reason = e.to_string();
            return cfg
                .compare
                .points
                .iter()
                .map(|x| PointReport {
                    omega,
                    x: *x,
                    entries: FORMULAS
                        .iter()
                        .map(|formula| Entry { formula, status: Status::Failed(reason.clone()), residual_bound: None })
                        .collect(),
                })
                .collect();
        }
    };
    let cs = f.contrasts;
    let size = pl.alpha / f.exc.wavelength();
    let too_large = (size > thresholds.size_to_wavelength)
        .then(|| format!("α/λ = {size:.3e} exceeds {:e}", thresholds.size_to_wavelength));

    let main = compute(cfg, omega, Regime::FullModel).map_err(|e| e.to_string());
    let eddy_pre = cfg.material.sigma_star > 0.0
        && classify_regime(&cfg.material, &f.exc, pl, &thresholds) == Regime::EddyCurrent;
    let eddy = if eddy_pre {
        Some(compute(cfg, omega, Regime::EddyCurrent).map_err(|e| e.to_string()))
    } else {
        None
    };
    let eddy_reason = if cfg.material.sigma_star <= 0.0 {
        "requires a conducting object".to_string()
    } else if let Some(r) = &too_large {
        r.clone()
    } else {
        let ratio = cfg.material.eps_star * omega / cfg.material.sigma_star;
        format!("ε*ω/σ* = {ratio:.3e} exceeds {:e}", thresholds.displacement_to_conduction)
    };
    let induction = cs.nu.norm() * cs.mu_r;
    let smallk_reason = if let Err(r) = Regime::SmallKDielectric.admits(&cfg.material) {
        Some(r)
    } else {
        too_large.clone()
    };
    let smallalpha_reason = too_large.clone().or_else(|| {
        (induction > SMALL_INDUCTION).then(|| format!("|ν|μ_r = {induction:.3e} exceeds {SMALL_INDUCTION}"))
    });
    let needs_ps = smallk_reason.is_none() || smallalpha_reason.is_none();
    let ps = if needs_ps { Some(polya_szego_pair(cfg, &cs).map_err(|e| e.to_string())) } else { None };
    let scale_bound = cfg.compare.calibration / RESIDUAL_CALIBRATION;

    cfg.compare
        .points
        .iter()
        .map(|x| {
            let r = tensor::norm(&tensor::sub(x, &pl.z));
            if r < MIN_DISTANCE_FACTOR * pl.alpha {
                let reason = format!(
                    "|x − z| = {r:.3e} is inside {MIN_DISTANCE_FACTOR}α = {:.3e}; no expansion is valid there",
                    MIN_DISTANCE_FACTOR * pl.alpha
                );
                let entries = FORMULAS
                    .iter()
                    .map(|formula| Entry { formula, status: Status::Skipped(reason.clone()), residual_bound: None })
                    .collect();
                return PointReport { omega, x: *x, entries };
            }
            let mut entries = Vec::with_capacity(FORMULAS.len());
            let h0 = bg.h(&pl.z).map_err(|e| e.to_string());
            let with_h0 = |f: &dyn Fn(&CVec3) -> mptensor::Result<CVec3>| match &h0 {
                Ok(h0) => status(f(h0)),
                Err(e) => Status::Failed(e.clone()),
            };
            match &main {
                Ok(c) => {
                    let forms: [(&'static str, Expansion); 2] = [("main", hdelta_main), ("alt", hdelta_alt)];
                    for (formula, eval) in forms {
                        let (status, bound) = match eval(x, pl, &c.bundle, &bg) {
                            Ok(p) => (Status::Ok(p.h_delta), Some(p.residual_bound * scale_bound)),
                            Err(e) => (Status::Failed(e.to_string()), None),
                        };
                        entries.push(Entry { formula, status, residual_bound: bound });
                    }
                }
                Err(e) => {
                    for formula in ["main", "alt"] {
                        entries.push(Entry { formula, status: Status::Failed(e.clone()), residual_bound: None });
                    }
                }
            }
            let eddy_status = match &eddy {
                None => Status::Skipped(eddy_reason.clone()),
                Some(Err(e)) => Status::Failed(e.clone()),
                Some(Ok(c)) => with_h0(&|h0| hdelta_eddy(x, pl, &c.bundle.m, h0)),
            };
            entries.push(Entry { formula: "eddy", status: eddy_status, residual_bound: None });
            let qs_status = match (&too_large, &main) {
                (Some(r), _) => Status::Skipped(r.clone()),
                (None, Err(e)) => Status::Failed(e.clone()),
                (None, Ok(c)) => with_h0(&|h0| hdelta_quasistatic(x, pl, &c.bundle.m, h0)),
            };
            entries.push(Entry { formula: "quasi-static", status: qs_status, residual_bound: None });
            for (formula, reason) in [("small-k-dielectric", &smallk_reason), ("small-alpha", &smallalpha_reason)] {
                let s = match (reason, &ps) {
                    (Some(r), _) => Status::Skipped(r.clone()),
                    (None, Some(Err(e))) => Status::Failed(e.clone()),
                    (None, Some(Ok((t_mu, t_eps)))) => status(if formula == "small-alpha" {
                        hdelta_smallalpha(x, pl, t_mu, t_eps, &bg)
                    } else {
                        hdelta_smallk_dielectric(x, pl, t_mu, t_eps, &cs, &bg)
                    }),
                    (None, None) => unreachable!("Pólya-Szegö tensors are computed whenever a formula needs them"),
                };
                entries.push(Entry { formula, status: s, residual_bound: None });
            }
            PointReport { omega, x: *x, entries }
        })
        .collect()
}

pub fn compare_all(cfg: &RunConfig) -> Vec<PointReport> {
    let per_omega: Vec<Vec<PointReport>> = cfg.omegas.par_iter().map(|&w| compare_at(cfg, w)).collect();
    per_omega.into_iter().flatten().collect()
}

pub fn entries_header() -> Vec<&'static str> {
    vec![
        "omega", "x", "y", "z", "formula", "status", "ReHx", "ImHx", "ReHy", "ImHy", "ReHz", "ImHz", "normH",
        "residual_bound", "reason",
    ]
}

pub fn write_entries<W: Write>(reports: &[PointReport], w: W) -> Result<(), CliError> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(entries_header())?;
    for rep in reports {
        for e in &rep.entries {
            let mut rec = vec![num(rep.omega), num(rep.x[0]), num(rep.x[1]), num(rep.x[2]), e.formula.to_string()];
            match &e.status {
                Status::Ok(h) => {
                    rec.push("ok".into());
                    for c in h {
                        rec.push(num(c.re));
                        rec.push(num(c.im));
                    }
                    rec.push(num(cnorm(h)));
                    rec.push(e.residual_bound.map(num).unwrap_or_default());
                    rec.push(String::new());
                }
                Status::Skipped(reason) | Status::Failed(reason) => {
                    rec.push(if matches!(e.status, Status::Skipped(_)) { "skipped" } else { "failed" }.into());
                    rec.resize(14, String::new());
                    rec.push(reason.clone());
                }
            }
            csv.write_record(&rec)?;
        }
    }
    csv.flush()?;
    Ok(())
}

pub fn write_pairs<W: Write>(reports: &[PointReport], w: W) -> Result<(), CliError> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["omega", "x", "y", "z", "formula_a", "formula_b", "rel_diff"])?;
    for rep in reports {
        for (a, b, d) in rep.pairs() {
            csv.write_record([
                num(rep.omega),
                num(rep.x[0]),
                num(rep.x[1]),
                num(rep.x[2]),
                a.to_string(),
                b.to_string(),
                num(d),
            ])?;
        }
    }
    csv.flush()?;
    Ok(())
}

/// Human-readable table for standard output.
pub fn summary(reports: &[PointReport]) -> String {
    let mut s = String::new();
    for rep in reports {
        s += &format!("ω = {:e}, x = ({:e}, {:e}, {:e})\n", rep.omega, rep.x[0], rep.x[1], rep.x[2]);
        let main = rep.entries.iter().find_map(|e| match (&e.status, e.formula) {
            (Status::Ok(h), "main") => Some(*h),
            _ => None,
        });
        for e in &rep.entries {
            match &e.status {
                Status::Ok(h) => {
                    let rel = main
                        .map(|m| format!("{:.3e}", cnorm(&csub(h, &m)) / cnorm(&m).max(f64::MIN_POSITIVE)))
                        .unwrap_or_else(|| "-".into());
                    let bound = e.residual_bound.map(|b| format!("  bound {b:.3e}")).unwrap_or_default();
                    s += &format!("  {:<20} |H| {:.6e}  vs main {rel}{bound}\n", e.formula, cnorm(h));
                }
                Status::Skipped(r) => s += &format!("  {:<20} skipped: {r}\n", e.formula),
                Status::Failed(r) => s += &format!("  {:<20} FAILED: {r}\n", e.formula),
            }
        }
    }
    s
}
