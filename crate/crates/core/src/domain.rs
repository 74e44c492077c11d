//! Physical constants, material data, excitation, and the derived complex
//! contrasts that parameterise every transmission problem.
//!
//! Everything here is stored in unscaled SI units. The time convention is
//! `e^{-iωt}`, so a conducting object has a relative permittivity with a
//! positive imaginary part.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mesh::UnitShape;

/// Free-space permittivity (F/m), fixed at four significant digits.
pub const EPS0: f64 = 8.854e-12;
/// Free-space permeability (H/m).
pub const MU0: f64 = 4.0 * PI * 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub eps0: f64,
    pub mu0: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { eps0: EPS0, mu0: MU0 }
    }
}

/// Homogeneous material of the object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialSpec {
    /// Permittivity (F/m).
    pub eps_star: f64,
    /// Permeability (H/m).
    pub mu_star: f64,
    /// Conductivity (S/m).
    pub sigma_star: f64,
}

impl MaterialSpec {
    pub fn new(eps_star: f64, mu_star: f64, sigma_star: f64) -> Result<Self> {
        let m = Self { eps_star, mu_star, sigma_star };
        m.validate()?;
        Ok(m)
    }

    /// Material with `ε* = ε₀`, `μ* = μ_r μ₀` and conductivity `σ*`.
    pub fn conductor(mu_r: f64, sigma_star: f64) -> Result<Self> {
        Self::new(EPS0, mu_r * MU0, sigma_star)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_star > 0.0 && self.eps_star.is_finite()) {
            return Err(Error::domain(format!("permittivity must be positive, got {}", self.eps_star)));
        }
        if !(self.mu_star > 0.0 && self.mu_star.is_finite()) {
            return Err(Error::domain(format!("permeability must be positive, got {}", self.mu_star)));
        }
        if !(self.sigma_star >= 0.0 && self.sigma_star.is_finite()) {
            return Err(Error::domain(format!(
                "conductivity must be non-negative, got {}",
                self.sigma_star
            )));
        }
        Ok(())
    }

    pub fn mu_r(&self) -> f64 {
        self.mu_star / MU0
    }
}

/// Time-harmonic excitation at angular frequency `omega` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Excitation {
    pub omega: f64,
}

impl Excitation {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::domain(format!("angular frequency must be positive, got {omega}")));
        }
        Ok(Self { omega })
    }

    /// Free-space wavenumber `k = ω √(ε₀ μ₀)` in 1/m.
    pub fn wavenumber(&self) -> f64 {
        self.omega * (EPS0 * MU0).sqrt()
    }

    /// Free-space wavelength `λ₀ = 2π / k` in m.
    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.wavenumber()
    }
}

/// Object `B_α = α B + z` built from a unit shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectPlacement {
    pub alpha: f64,
    pub z: [f64; 3],
    pub shape: UnitShape,
}

impl ObjectPlacement {
    pub fn new(alpha: f64, z: [f64; 3], shape: UnitShape) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::domain(format!("object size must be positive, got {alpha}")));
        }
        Ok(Self { alpha, z, shape })
    }

    pub fn sphere(alpha: f64) -> Result<Self> {
        Self::new(alpha, [0.0; 3], UnitShape::Sphere)
    }
}

/// Dimensionless contrasts for one (material, frequency, size) triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastSet {
    pub eps_r: Complex64,
    pub mu_r: f64,
    pub nu: Complex64,
    pub nu_r: f64,
    pub nu_i: f64,
    pub k_alpha: f64,
}

impl ContrastSet {
    /// `k²α² ε_r`, the coefficient of the interior mass term.
    pub fn interior_mass(&self) -> Complex64 {
        self.eps_r * (self.k_alpha * self.k_alpha)
    }

    /// Skin depth in units of α, `√(2/(ν_i μ_r))`; `None` without conduction.
    pub fn skin_depth(&self) -> Option<f64> {
        if self.nu_i > 0.0 {
            Some((2.0 / (self.nu_i * self.mu_r)).sqrt())
        } else {
            None
        }
    }

    /// `ε_r / (ε_r − 1)`, or `None` when the contrast vanishes.
    pub fn eps_ratio(&self) -> Option<Complex64> {
        let d = self.eps_r - 1.0;
        if d.norm() == 0.0 {
            None
        } else {
            Some(self.eps_r / d)
        }
    }
}

/// Computes `ε_r`, `μ_r`, `ν` and `kα` for a placed object.
pub fn derive_contrasts(
    mat: &MaterialSpec,
    exc: &Excitation,
    placement: &ObjectPlacement,
) -> Result<ContrastSet> {
    mat.validate()?;
    let exc = Excitation::new(exc.omega)?;
    let placement = ObjectPlacement::new(placement.alpha, placement.z, placement.shape.clone())?;
    let omega = exc.omega;
    let alpha = placement.alpha;
    let k = exc.wavenumber();

    let eps_r = Complex64::new(mat.eps_star, mat.sigma_star / omega) / EPS0;
    let mu_r = mat.mu_star / MU0;
    let nu = (eps_r - 1.0) * (alpha * alpha * k * k);
    let nu_r = (mat.eps_star - EPS0) * MU0 * omega * omega * alpha * alpha;
    let nu_i = mat.sigma_star * MU0 * omega * alpha * alpha;

    Ok(ContrastSet { eps_r, mu_r, nu, nu_r, nu_i, k_alpha: k * alpha })
}

/// Which simplified form of the field expansion applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    FullModel,
    QuasiStatic,
    EddyCurrent,
    SmallKDielectric,
    SmallAlpha,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::FullModel => "full",
            Regime::QuasiStatic => "quasi-static",
            Regime::EddyCurrent => "eddy",
            Regime::SmallKDielectric => "small-k-dielectric",
            Regime::SmallAlpha => "small-alpha",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.trim() {
            "full" => Regime::FullModel,
            "quasi-static" | "quasistatic" => Regime::QuasiStatic,
            "eddy" => Regime::EddyCurrent,
            "small-k-dielectric" => Regime::SmallKDielectric,
            "small-alpha" => Regime::SmallAlpha,
            _ => return None,
        })
    }

    /// Checks the material preconditions a regime formula relies on.
    pub fn admits(&self, mat: &MaterialSpec) -> std::result::Result<(), String> {
        match self {
            Regime::EddyCurrent if mat.sigma_star <= 0.0 => {
                Err("eddy-current regime requires a conducting object".into())
            }
            Regime::SmallKDielectric if mat.sigma_star != 0.0 => {
                Err("small-k dielectric regime requires zero conductivity".into())
            }
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Thresholds standing in for the topology-dependent constants of the
/// eddy-current validity conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    /// Largest admissible `α / λ₀`.
    pub size_to_wavelength: f64,
    /// Largest admissible `ε* ω / σ*`.
    pub displacement_to_conduction: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self { size_to_wavelength: 1e-2, displacement_to_conduction: 1e-3 }
    }
}

pub fn classify_regime(
    mat: &MaterialSpec,
    exc: &Excitation,
    placement: &ObjectPlacement,
    thresholds: &RegimeThresholds,
) -> Regime {
    let size_ratio = placement.alpha / exc.wavelength();
    if size_ratio > thresholds.size_to_wavelength {
        return Regime::FullModel;
    }
    let conducting = mat.sigma_star > 0.0
        && mat.eps_star * exc.omega / mat.sigma_star <= thresholds.displacement_to_conduction;
    if conducting {
        Regime::EddyCurrent
    } else {
        Regime::QuasiStatic
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig1(omega: f64) -> (MaterialSpec, Excitation, ObjectPlacement) {
        (
            MaterialSpec::conductor(100.0, 1e6).unwrap(),
            Excitation::new(omega).unwrap(),
            ObjectPlacement::sphere(0.01).unwrap(),
        )
    }

    #[test]
    fn free_space_object_has_no_contrast() {
        let mat = MaterialSpec::new(EPS0, MU0, 0.0).unwrap();
        let cs = derive_contrasts(&mat, &Excitation::new(1e6).unwrap(), &ObjectPlacement::sphere(0.1).unwrap())
            .unwrap();
        assert_eq!(cs.eps_r, Complex64::new(1.0, 0.0));
        assert_eq!(cs.mu_r, 1.0);
        assert_eq!(cs.nu, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn induction_number_by_hand() {
        let (mat, exc, pl) = fig1(1e5);
        let cs = derive_contrasts(&mat, &exc, &pl).unwrap();
        // 1e6 * 4π×1e-7 * 1e5 * 1e-4 = 4π
        assert!((cs.nu_i - 4.0 * PI).abs() < 1e-12 * 4.0 * PI);
        assert!((cs.nu_i - 12.566).abs() < 1e-3);
        assert!((cs.mu_r - 100.0).abs() < 1e-12);
    }

    #[test]
    fn conductor_permittivity_is_dominated_by_conduction() {
        for e in 1..=9 {
            let (mat, exc, pl) = fig1(10f64.powi(e));
            let cs = derive_contrasts(&mat, &exc, &pl).unwrap();
            assert!(cs.eps_r.im > 0.0);
            assert!(cs.eps_r.im > 1e2 * cs.eps_r.re, "omega=1e{e}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Excitation::new(0.0).is_err());
        assert!(Excitation::new(-1.0).is_err());
        assert!(ObjectPlacement::sphere(0.0).is_err());
        assert!(MaterialSpec::new(EPS0, MU0, -1.0).is_err());
        let bad = Excitation { omega: -3.0 };
        let mat = MaterialSpec::conductor(1.0, 1.0).unwrap();
        assert!(derive_contrasts(&mat, &bad, &ObjectPlacement::sphere(1.0).unwrap()).is_err());
    }

    #[test]
    fn fig1_midband_is_eddy() {
        let (mat, exc, pl) = fig1(1e5);
        let size_ratio = pl.alpha / exc.wavelength();
        let disp = mat.eps_star * exc.omega / mat.sigma_star;
        assert!((size_ratio / 5.31e-7 - 1.0).abs() < 0.05, "{size_ratio}");
        assert!((disp / 8.854e-13 - 1.0).abs() < 1e-9, "{disp}");
        assert_eq!(classify_regime(&mat, &exc, &pl, &RegimeThresholds::default()), Regime::EddyCurrent);
    }

    #[test]
    fn dielectric_small_object_is_quasi_static() {
        let mat = MaterialSpec::new(4.0 * EPS0, MU0, 0.0).unwrap();
        let pl = ObjectPlacement::sphere(0.01).unwrap();
        let r = classify_regime(&mat, &Excitation::new(1e6).unwrap(), &pl, &RegimeThresholds::default());
        assert_eq!(r, Regime::QuasiStatic);
    }

    #[test]
    fn wavelength_sized_object_needs_full_model() {
        let exc = Excitation::new(1e9).unwrap();
        let pl = ObjectPlacement::sphere(exc.wavelength()).unwrap();
        let mat = MaterialSpec::conductor(1.0, 1e6).unwrap();
        assert_eq!(classify_regime(&mat, &exc, &pl, &RegimeThresholds::default()), Regime::FullModel);
    }

    proptest! {
        #[test]
        fn nu_complex_matches_split_formulas(
            eps_rel in 1.0f64..50.0,
            mu_rel in 0.5f64..500.0,
            log_sigma in -3.0f64..8.0,
            log_omega in 1.0f64..10.0,
            log_alpha in -4.0f64..0.0,
        ) {
            let mat = MaterialSpec::new(eps_rel * EPS0, mu_rel * MU0, 10f64.powf(log_sigma)).unwrap();
            let exc = Excitation::new(10f64.powf(log_omega)).unwrap();
            let pl = ObjectPlacement::sphere(10f64.powf(log_alpha)).unwrap();
            let cs = derive_contrasts(&mat, &exc, &pl).unwrap();
            let split = Complex64::new(cs.nu_r, cs.nu_i);
            prop_assert!((cs.nu - split).norm() <= 1e-12 * split.norm().max(f64::MIN_POSITIVE));
        }

        #[test]
        fn im_eps_r_grows_with_conductivity(s1 in 0.0f64..1e7, ds in 1e-3f64..1e7, log_omega in 1.0f64..9.0) {
            let exc = Excitation::new(10f64.powf(log_omega)).unwrap();
            let pl = ObjectPlacement::sphere(0.01).unwrap();
            let a = derive_contrasts(&MaterialSpec::conductor(1.0, s1).unwrap(), &exc, &pl).unwrap();
            let b = derive_contrasts(&MaterialSpec::conductor(1.0, s1 + ds).unwrap(), &exc, &pl).unwrap();
            prop_assert!(b.eps_r.im > a.eps_r.im);
        }

        #[test]
        fn classification_invariant_under_product_preserving_rescale(
            log_omega in 1.0f64..9.0, log_c in -2.0f64..2.0, log_sigma in 3.0f64..8.0
        ) {
            // ω → ω/c, α → αc, σ* → σ*/c keeps α/λ₀ and ε*ω/σ* fixed.
            let c = 10f64.powf(log_c);
            let omega = 10f64.powf(log_omega);
            let sigma = 10f64.powf(log_sigma);
            let t = RegimeThresholds::default();
            let a = classify_regime(
                &MaterialSpec::conductor(10.0, sigma).unwrap(),
                &Excitation::new(omega).unwrap(),
                &ObjectPlacement::sphere(1e-3).unwrap(),
                &t,
            );
            let b = classify_regime(
                &MaterialSpec::conductor(10.0, sigma / c).unwrap(),
                &Excitation::new(omega / c).unwrap(),
                &ObjectPlacement::sphere(1e-3 * c).unwrap(),
                &t,
            );
            prop_assert_eq!(a, b);
        }
    }
}
