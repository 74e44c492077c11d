//! Tensors for one frequency, from the series solution or the edge-element
//! pipeline.

use std::sync::Arc;

use mptensor::assembly::{BFields, Provenance, TensorBundle};
use mptensor::domain::{
    classify_regime, derive_contrasts, ContrastSet, Excitation, Regime, RegimeThresholds,
};
use mptensor::fem::{solve_theta_eddy_all, solve_theta_full_all, solve_theta_static_all, solve_vartheta_all};
use mptensor::mesh::{generate_mesh_with, Mesh, MeshOptions, UnitShape};
use mptensor::oracle::{
    polya_szego_ellipsoid, polya_szego_sphere, sphere_mpt_eddy, sphere_mpt_full, SphereSeriesParams,
};
use mptensor::tensor::Rank2TensorC;
use num_complex::Complex64;

use crate::config::{RunConfig, SolverKind};

/// Tensors at one frequency, with the sphere series value of `ℳ` when the
/// object is a sphere.
#[derive(Debug, Clone)]
pub struct Computed {
    pub regime: Regime,
    pub bundle: TensorBundle,
    pub oracle: Option<Complex64>,
}

pub struct Frequency {
    pub exc: Excitation,
    pub contrasts: ContrastSet,
}

impl Frequency {
    pub fn new(cfg: &RunConfig, omega: f64) -> mptensor::Result<Self> {
        let exc = Excitation::new(omega)?;
        let contrasts = derive_contrasts(&cfg.material, &exc, &cfg.placement)?;
        Ok(Frequency { exc, contrasts })
    }

    pub fn k(&self) -> f64 {
        self.exc.wavenumber()
    }
}

/// The configured regime, or the one the thresholds select.
pub fn regime_for(cfg: &RunConfig, exc: &Excitation) -> Regime {
    cfg.regime
        .unwrap_or_else(|| classify_regime(&cfg.material, exc, &cfg.placement, &RegimeThresholds::default()))
}

fn zero_contrast(cs: &ContrastSet) -> bool {
    cs.mu_r == 1.0 && cs.eps_r == Complex64::new(1.0, 0.0)
}

/// Contrasts of the eddy-current problem: no displacement current.
pub fn eddy_contrasts(cs: &ContrastSet) -> ContrastSet {
    ContrastSet {
        eps_r: Complex64::new(1.0, 0.0),
        mu_r: cs.mu_r,
        nu: Complex64::new(0.0, cs.nu_i),
        nu_r: 0.0,
        nu_i: cs.nu_i,
        k_alpha: 0.0,
    }
}

pub fn mesh_for(cfg: &RunConfig, cs: &ContrastSet) -> mptensor::Result<Arc<Mesh>> {
    let mut opts = MeshOptions::desk_scale(cs.skin_depth());
    if let Some(r) = cfg.mesh.truncation_radius {
        opts.truncation_radius = r;
    }
    if let Some(h) = cfg.mesh.resolution {
        opts.resolution = h;
    }
    let mesh = generate_mesh_with(cfg.placement.shape.clone(), &opts)?;
    log::info!("mesh: {} cells, {} edges", mesh.cells.len(), mesh.edges.len());
    Ok(Arc::new(mesh))
}

/// Tensors under `regime` at one frequency.
pub fn compute(cfg: &RunConfig, omega: f64, regime: Regime) -> mptensor::Result<Computed> {
    let f = Frequency::new(cfg, omega)?;
    let (cs, k, alpha) = (f.contrasts, f.k(), cfg.placement.alpha);
    let sphere = cfg.placement.shape == UnitShape::Sphere;
    let eddy = regime == Regime::EddyCurrent;
    if eddy {
        regime.admits(&cfg.material).map_err(mptensor::Error::Usage)?;
    }
    let series = if eddy {
        SphereSeriesParams::eddy(cs.mu_r, cs.nu_i)?
    } else {
        SphereSeriesParams::full(cs.mu_r, cs.eps_r, cs.k_alpha)?
    };
    let oracle = if !sphere {
        None
    } else if eddy {
        Some(sphere_mpt_eddy(cs.mu_r, cs.nu_i, alpha)?)
    } else {
        Some(sphere_mpt_full(&series, alpha)?)
    };

    let bundle = if zero_contrast(&cs) {
        TensorBundle::zeros(Provenance::oracle("zero-contrast", Some(cs), alpha, k))
    } else {
        match cfg.solver {
            SolverKind::Analytic => TensorBundle::sphere_oracle(&series, alpha, k)?,
            SolverKind::Fem if eddy => {
                let mesh = mesh_for(cfg, &cs)?;
                let theta = solve_theta_eddy_all(cs.nu_i, cs.mu_r, &mesh, &cfg.params)?;
                TensorBundle::assemble(&theta, None, &eddy_contrasts(&cs), k, alpha)?
            }
            SolverKind::Fem => {
                let mesh = mesh_for(cfg, &cs)?;
                let theta = solve_theta_full_all(&cs, &mesh, &cfg.params)?;
                let vartheta = solve_vartheta_all(cs.eps_r, &mesh, &cfg.params)?;
                TensorBundle::assemble(&theta, Some(BFields::Vartheta(&vartheta)), &cs, k, alpha)?
            }
        }
    };
    Ok(Computed { regime, bundle, oracle })
}

/// Pólya-Szegö tensors `𝒯[αB, μ_r]` and `𝒯[αB, ε_r]`: closed forms for
/// spheres and ellipsoids, static solves otherwise.
pub fn polya_szego_pair(cfg: &RunConfig, cs: &ContrastSet) -> mptensor::Result<(Rank2TensorC, Rank2TensorC)> {
    let alpha = cfg.placement.alpha;
    let mu = Complex64::new(cs.mu_r, 0.0);
    match cfg.placement.shape {
        UnitShape::Sphere => Ok((polya_szego_sphere(mu, alpha)?, polya_szego_sphere(cs.eps_r, alpha)?)),
        UnitShape::Ellipsoid { a, b, c } => Ok((
            polya_szego_ellipsoid([a, b, c], mu, alpha)?,
            polya_szego_ellipsoid([a, b, c], cs.eps_r, alpha)?,
        )),
        UnitShape::Cube { .. } => {
            if cfg.solver != SolverKind::Fem {
                return Err(mptensor::Error::Usage("no closed form for a cube; set solver = fem".into()));
            }
            let mesh = mesh_for(cfg, cs)?;
            let stat = solve_theta_static_all(cs.mu_r, &mesh, &cfg.params)?;
            let static_cs = ContrastSet {
                eps_r: Complex64::new(1.0, 0.0),
                mu_r: cs.mu_r,
                nu: Complex64::new(0.0, 0.0),
                nu_r: 0.0,
                nu_i: 0.0,
                k_alpha: 0.0,
            };
            let t_mu = TensorBundle::assemble(&stat, None, &static_cs, 0.0, alpha)?.m;
            let vartheta = solve_vartheta_all(cs.eps_r, &mesh, &cfg.params)?;
            let t_eps = mptensor::assembly::assemble_b(BFields::Vartheta(&vartheta), cs.eps_r, alpha)?;
            Ok((t_mu, t_eps))
        }
    }
}
