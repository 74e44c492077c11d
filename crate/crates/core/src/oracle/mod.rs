//! Closed-form and series reference solutions for spheres and ellipsoids.
//!
//! The sphere results come from matching an interior spherical-Bessel field
//! to a *static* exterior multipole on the unit sphere, degree by degree.
//! For a background potential of degree `n` (uniform field: `n = 1`,
//! linear gradient: `n = 2`) the exterior response coefficient is
//!
//! ```text
//! b_n = (n − q_n) / (q_n + n + 1),   q_n = μ_r n (n+1) / τ_n,
//! τ_n = (n+1) − κ j_{n+1}(κ) / j_n(κ),
//! ```
//!
//! and the dipole coefficient of the magnetic polarizability tensor is
//! `m = −4π b_1 α³`. At `κ → 0` this is `4π(μ_r−1)/(μ_r+2) α³`, and for
//! `|κ| → ∞` in the upper half plane it tends to the perfect-conductor value
//! `−2π α³`.

pub mod bessel;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{ccross, cnorm, cscale, CVec3, Rank2TensorC, Vec3};

use bessel::{sph_j_reduced, ScaledBessel};

/// Initial continued-fraction depth; doubled until results settle.
pub const DEFAULT_ORDER: usize = 30;

/// Give up doubling past this depth.
pub const MAX_ORDER: usize = 1 << 24;

/// Relative change between consecutive depths accepted as converged.
const SERIES_TOL: f64 = 1e-13;

/// Parameters of the sphere series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSeriesParams {
    pub mu_r: f64,
    pub eps_r: Complex64,
    pub k_alpha: f64,
    /// Interior wavenumber in units of `1/α`, with `Im κ ≥ 0`.
    pub kappa: Complex64,
    /// Starting truncation depth of the Bessel continued fractions.
    pub order: usize,
}

impl SphereSeriesParams {
    /// Full quasi-static model: `κ = kα √(ε_r μ_r)`.
    pub fn full(mu_r: f64, eps_r: Complex64, k_alpha: f64) -> Result<Self> {
        if !(k_alpha >= 0.0 && k_alpha.is_finite()) {
            return Err(Error::domain(format!("kα must be non-negative, got {k_alpha}")));
        }
        let kappa = principal_upper(eps_r * mu_r) * k_alpha;
        Self::new(mu_r, eps_r, k_alpha, kappa, DEFAULT_ORDER)
    }

    /// Eddy-current model: `κ = √(i ν_i μ_r)`.
    ///
    /// Displacement currents are dropped, so the parameters record `ε_r = 1`
    /// and `kα = 0`; only `κ` carries the induction.
    pub fn eddy(mu_r: f64, nu_i: f64) -> Result<Self> {
        if !(nu_i >= 0.0 && nu_i.is_finite()) {
            return Err(Error::domain(format!("ν_i must be non-negative, got {nu_i}")));
        }
        let kappa = principal_upper(Complex64::new(0.0, nu_i * mu_r));
        Self::new(mu_r, Complex64::new(1.0, 0.0), 0.0, kappa, DEFAULT_ORDER)
    }

    pub fn new(mu_r: f64, eps_r: Complex64, k_alpha: f64, kappa: Complex64, order: usize) -> Result<Self> {
        let p = Self { mu_r, eps_r, k_alpha, kappa, order };
        p.validate()?;
        Ok(p)
    }

    pub fn with_order(mut self, order: usize) -> Result<Self> {
        self.order = order;
        self.validate()?;
        Ok(self)
    }

    /// `ν = k²α²(ε_r − 1)`; for the eddy-current parameters (`kα = 0`) it is
    /// recovered from `κ² = ν μ_r`.
    pub fn nu(&self) -> Complex64 {
        if self.k_alpha > 0.0 {
            (self.eps_r - 1.0) * (self.k_alpha * self.k_alpha)
        } else {
            self.kappa * self.kappa / self.mu_r
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu_r > 0.0 && self.mu_r.is_finite()) {
            return Err(Error::domain(format!("μ_r must be positive, got {}", self.mu_r)));
        }
        if !self.eps_r.is_finite() || !self.kappa.is_finite() {
            return Err(Error::domain("sphere series parameters must be finite"));
        }
        if self.kappa.im < 0.0 {
            return Err(Error::domain(format!("κ = {} must have a non-negative imaginary part", self.kappa)));
        }
        if self.order < 1 {
            return Err(Error::domain("series truncation order must be at least 1"));
        }
        Ok(())
    }
}

/// Square root on the branch with `Im ≥ 0`.
fn principal_upper(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.im < 0.0 {
        -s
    } else {
        s
    }
}

/// `j_m(κ)/κ^m` for `m ≤ n_max`, with the depth doubled from `order` until
/// the highest entry settles. Returns the values and the depth used.
pub(crate) fn reduced_converged(n_max: usize, z: Complex64, order: usize) -> Result<(ScaledBessel, usize)> {
    let mut depth = order.max(n_max + 1);
    let mut prev = sph_j_reduced(n_max, z, depth)?;
    loop {
        if z.norm() <= bessel::SERIES_CROSSOVER {
            return Ok((prev, depth));
        }
        let next_depth = depth * 2;
        if next_depth > MAX_ORDER {
            return Err(Error::Truncation(format!(
                "Bessel continued fraction at κ = {z} not converged by depth {depth}; |κ| is too large"
            )));
        }
        let next = sph_j_reduced(n_max, z, next_depth)?;
        let change = prev
            .values
            .iter()
            .zip(&next.values)
            .map(|(a, b)| (a - b).norm() / b.norm().max(1e-300))
            .fold(0.0, f64::max);
        if change < SERIES_TOL {
            return Ok((next, next_depth));
        }
        prev = next;
        depth = next_depth;
    }
}

/// Degree-`n` matching data at the unit sphere.
#[derive(Debug, Clone, Copy)]
struct Matching {
    /// Exterior response coefficient `b_n`.
    b: Complex64,
    /// Interior amplitude divided by `j_n(κ)/κⁿ`.
    p_hat: Complex64,
}

fn matching(p: &SphereSeriesParams, n: usize, at_kappa: &ScaledBessel) -> Matching {
    let k2 = p.kappa * p.kappa;
    let ratio = at_kappa.values[n + 1] / at_kappa.values[n];
    let tau = (n as f64 + 1.0) - k2 * ratio;
    let nn = n as f64;
    let q = p.mu_r * nn * (nn + 1.0) / tau;
    let b = (nn - q) / (q + nn + 1.0);
    let p_hat = (2.0 * nn + 1.0) / ((q + nn + 1.0) * tau);
    Matching { b, p_hat }
}

/// Dipole coefficient `m` with `ℳ = m 𝕀` for a sphere of radius `alpha`.
pub fn sphere_mpt_full(p: &SphereSeriesParams, alpha: f64) -> Result<Complex64> {
    p.validate()?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("α must be positive, got {alpha}")));
    }
    let (at_kappa, _) = reduced_converged(2, p.kappa, p.order)?;
    let b = matching(p, 1, &at_kappa).b;
    let m = -4.0 * PI * b * alpha.powi(3);
    if !m.is_finite() {
        return Err(Error::Truncation(format!("sphere series produced a non-finite value at κ = {}", p.kappa)));
    }
    Ok(m)
}

/// Diagonal coefficient of `Č` for the sphere,
/// `Č = −(ν α³ / 2) μ_r P̂₁ (8π/3) F₂(κ)/F₁(κ) 𝕀`, from the interior field
/// `θ₁ + e₁×ξ = 2 μ_r P̂₁ F₁(κr)/F₁(κ) e₁×ξ`.
pub fn sphere_c_check(p: &SphereSeriesParams, alpha: f64) -> Result<Complex64> {
    p.validate()?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("α must be positive, got {alpha}")));
    }
    let (at_kappa, _) = reduced_converged(2, p.kappa, p.order)?;
    let mode = matching(p, 1, &at_kappa);
    let ratio = at_kappa.values[2] / at_kappa.values[1];
    let c = -p.nu() * alpha.powi(3) / 2.0 * p.mu_r * mode.p_hat * (8.0 * PI / 3.0) * ratio;
    if !c.is_finite() {
        return Err(Error::Truncation(format!("sphere series produced a non-finite value at κ = {}", p.kappa)));
    }
    Ok(c)
}

/// Eddy-current version of [`sphere_mpt_full`], `κ = √(i ν_i μ_r)`.
pub fn sphere_mpt_eddy(mu_r: f64, nu_i: f64, alpha: f64) -> Result<Complex64> {
    sphere_mpt_full(&SphereSeriesParams::eddy(mu_r, nu_i)?, alpha)
}

/// `α³ 4π (c−1)/(c+2) 𝕀`.
pub fn polya_szego_sphere(contrast: Complex64, alpha: f64) -> Result<Rank2TensorC> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("α must be positive, got {alpha}")));
    }
    if !contrast.is_finite() {
        return Err(Error::domain("contrast must be finite"));
    }
    let den = contrast + 2.0;
    if den.norm() <= 1e-12 * contrast.norm().max(1.0) {
        return Err(Error::Singularity(format!("contrast {contrast} sits on the sphere's plasmonic pole c = −2")));
    }
    Ok(Rank2TensorC::scalar((contrast - 1.0) / den * (4.0 * PI * alpha.powi(3))))
}

/// Depolarization factors `L_j = (abc/2) ∫₀^∞ ds / ((s + a_j²) √((s+a²)(s+b²)(s+c²)))`.
pub fn depolarization_factors(semi_axes: [f64; 3]) -> Result<[f64; 3]> {
    if semi_axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(Error::domain(format!("semi-axes must be positive, got {semi_axes:?}")));
    }
    // normalise so the largest axis is 1; L_j are scale invariant
    let amax = semi_axes.iter().cloned().fold(0.0, f64::max);
    let [a, b, c] = semi_axes.map(|x| x / amax);
    let mut out = [0.0; 3];
    for (j, aj) in [a, b, c].into_iter().enumerate() {
        // s = t/(1−t) maps [0, 1) onto [0, ∞)
        let integrand = |t: f64| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = t / (1.0 - t);
            let ds = 1.0 / ((1.0 - t) * (1.0 - t));
            let root = ((s + a * a) * (s + b * b) * (s + c * c)).sqrt();
            ds / ((s + aj * aj) * root)
        };
        let q = quadrature::integrate(integrand, 0.0, 1.0, 1e-14);
        if !q.integral.is_finite() || q.error_estimate > 1e-10 * q.integral.abs().max(1.0) {
            return Err(Error::Quadrature(format!(
                "depolarization integral for axis {j} failed (estimate {:.3e}, error {:.3e})",
                q.integral, q.error_estimate
            )));
        }
        out[j] = 0.5 * a * b * c * q.integral;
    }
    Ok(out)
}

/// Diagonal `α³ |B| (c−1)/(1 + (c−1) L_j)` for the ellipsoid with the given
/// semi-axes aligned with the coordinate axes.
pub fn polya_szego_ellipsoid(semi_axes: [f64; 3], contrast: Complex64, alpha: f64) -> Result<Rank2TensorC> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("α must be positive, got {alpha}")));
    }
    if !contrast.is_finite() {
        return Err(Error::domain("contrast must be finite"));
    }
    let l = depolarization_factors(semi_axes)?;
    let volume = 4.0 * PI / 3.0 * semi_axes.iter().product::<f64>();
    let mut d = [Complex64::new(0.0, 0.0); 3];
    for j in 0..3 {
        let den = 1.0 + (contrast - 1.0) * l[j];
        if den.norm() <= 1e-12 * contrast.norm().max(1.0) {
            return Err(Error::Singularity(format!("contrast {contrast} is singular for axis {j} (L = {})", l[j])));
        }
        d[j] = (contrast - 1.0) / den * (volume * alpha.powi(3));
    }
    Ok(Rank2TensorC::diagonal(d))
}

/// Background field restricted to the unit ball, in scaled coordinates:
/// `H₀(ξ) = h0 + grad ξ`. `grad` must be symmetric and trace-free so that
/// the field is curl- and divergence-free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialBackground {
    pub h0: CVec3,
    pub grad: Rank2TensorC,
}

impl PolynomialBackground {
    pub fn uniform(h0: CVec3) -> Self {
        Self { h0, grad: Rank2TensorC::zeros() }
    }

    pub fn validate(&self) -> Result<()> {
        let scale = self.grad.norm().max(cnorm(&self.h0)).max(1e-300);
        if self.grad.symmetry_defect() * self.grad.norm() > 1e-10 * scale {
            return Err(Error::domain("background gradient must be symmetric (curl-free)"));
        }
        if self.grad.trace().norm() > 1e-10 * scale {
            return Err(Error::domain("background gradient must be trace-free (divergence-free)"));
        }
        if !self.h0.iter().all(|v| v.is_finite()) || !self.grad.is_finite() {
            return Err(Error::domain("background field must be finite"));
        }
        Ok(())
    }

    pub fn value(&self, xi: &Vec3) -> CVec3 {
        let g = self.grad.apply_real(xi);
        [self.h0[0] + g[0], self.h0[1] + g[1], self.h0[2] + g[2]]
    }
}

/// Interior fields of the sphere for a [`PolynomialBackground`].
///
/// Each degree `n ∈ {1, 2}` with harmonic potential `S_n` contributes
///
/// ```text
/// H = P̂_n [((n+1) F_n(κr) − κ²r² F_{n+1}(κr)) ∇S_n + n κ² F_{n+1}(κr) S_n ξ] / F_n(κ)
/// E / (kα) = −i μ_r P̂_n F_n(κr)/F_n(κ) ξ × ∇S_n
/// ```
///
/// with `F_m(x) = j_m(x)/x^m`. The field is scaled so that `H₀` has the
/// units of the background, and `E` is reported divided by `kα` so that the
/// eddy-current limit `kα → 0` stays finite.
#[derive(Debug, Clone)]
pub struct SphereInteriorFields {
    params: SphereSeriesParams,
    background: PolynomialBackground,
    modes: [Matching; 2],
    at_kappa: ScaledBessel,
    depth: usize,
    tail: f64,
}

/// Builds the interior evaluator.
pub fn sphere_interior_fields(p: &SphereSeriesParams, background: &PolynomialBackground) -> Result<SphereInteriorFields> {
    p.validate()?;
    background.validate()?;
    let (at_kappa, depth) = reduced_converged(3, p.kappa, p.order)?;
    let modes = [matching(p, 1, &at_kappa), matching(p, 2, &at_kappa)];
    if modes.iter().any(|m| !m.b.is_finite() || !m.p_hat.is_finite()) {
        return Err(Error::Truncation(format!("interior series is not finite at κ = {}", p.kappa)));
    }
    // the background has degree ≤ 2, so the multipole sum is exact; the only
    // truncation is the continued-fraction depth, estimated by halving it
    let tail = if p.kappa.norm() > bessel::SERIES_CROSSOVER {
        let coarse = sph_j_reduced(3, p.kappa, depth / 2)?;
        coarse
            .values
            .iter()
            .zip(&at_kappa.values)
            .map(|(a, b)| (a - b).norm() / b.norm().max(1e-300))
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    Ok(SphereInteriorFields { params: *p, background: *background, modes, at_kappa, depth, tail })
}

impl SphereInteriorFields {
    pub fn params(&self) -> &SphereSeriesParams {
        &self.params
    }

    pub fn background(&self) -> &PolynomialBackground {
        &self.background
    }

    /// Relative truncation estimate of the series behind the evaluator.
    pub fn tail_estimate(&self) -> f64 {
        self.tail
    }

    /// Exterior response coefficient `b_n` for degree `n ∈ {1, 2}`.
    pub fn response(&self, n: usize) -> Result<Complex64> {
        match n {
            1 | 2 => Ok(self.modes[n - 1].b),
            _ => Err(Error::domain(format!("only degrees 1 and 2 are present, asked for {n}"))),
        }
    }

    /// `F_m(κr) / F_n(κ)` for `m = n, n+1` and `n = 1, 2` (indexed `[n−1][m−n]`).
    fn radial(&self, r: f64) -> Result<[[Complex64; 2]; 2]> {
        let x = self.params.kappa * r;
        let at_r = sph_j_reduced(3, x, self.depth)?;
        let shift = (at_r.scale - self.at_kappa.scale).exp();
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for n in 1..=2 {
            for d in 0..2 {
                out[n - 1][d] = at_r.values[n + d] / self.at_kappa.values[n] * shift;
            }
        }
        Ok(out)
    }

    fn check_inside(&self, xi: &Vec3) -> Result<f64> {
        let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        if !(r <= 1.0 + 1e-12) {
            return Err(Error::domain(format!("point at radius {r} lies outside the unit sphere")));
        }
        Ok(r)
    }

    /// `(S_n, ∇S_n)` for the two degrees.
    fn potentials(&self, xi: &Vec3) -> [(Complex64, CVec3); 2] {
        let bg = &self.background;
        let s1 = bg.h0[0] * xi[0] + bg.h0[1] * xi[1] + bg.h0[2] * xi[2];
        let g = bg.grad.apply_real(xi);
        let s2 = (g[0] * xi[0] + g[1] * xi[1] + g[2] * xi[2]) * 0.5;
        [(s1, bg.h0), (s2, g)]
    }

    /// Magnetic field at `ξ` with `|ξ| ≤ 1`.
    pub fn h(&self, xi: &Vec3) -> Result<CVec3> {
        let r = self.check_inside(xi)?;
        let f = self.radial(r)?;
        let k2 = self.params.kappa * self.params.kappa;
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (idx, (s, grad_s)) in self.potentials(xi).into_iter().enumerate() {
            let n = (idx + 1) as f64;
            let p_hat = self.modes[idx].p_hat;
            let a = ((n + 1.0) * f[idx][0] - k2 * r * r * f[idx][1]) * p_hat;
            let b = n * k2 * f[idx][1] * s * p_hat;
            for c in 0..3 {
                out[c] += a * grad_s[c] + b * xi[c];
            }
        }
        Ok(out)
    }

    /// `E / (kα)` at `ξ` with `|ξ| ≤ 1`.
    pub fn e_over_k_alpha(&self, xi: &Vec3) -> Result<CVec3> {
        let r = self.check_inside(xi)?;
        let f = self.radial(r)?;
        let i = Complex64::new(0.0, 1.0);
        let xi_c = [xi[0], xi[1], xi[2]].map(|v| Complex64::new(v, 0.0));
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (idx, (_, grad_s)) in self.potentials(xi).into_iter().enumerate() {
            let coef = -i * self.params.mu_r * self.modes[idx].p_hat * f[idx][0];
            let t = cscale(&ccross(&xi_c, &grad_s), coef);
            for c in 0..3 {
                out[c] += t[c];
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::rccross;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn static_limits() {
        assert!(sphere_mpt_eddy(1.0, 0.0, 1.0).unwrap().norm() < 1e-15);
        assert!(rel(sphere_mpt_eddy(2.0, 0.0, 1.0).unwrap(), c(PI, 0.0)) < 1e-14);
        let m = sphere_mpt_eddy(100.0, 0.0, 1.0).unwrap();
        assert!(rel(m, c(4.0 * PI * 99.0 / 102.0, 0.0)) < 1e-14);
    }

    #[test]
    fn matches_high_precision_reference_values() {
        // closed-form j₀, j₁ in 50-digit arithmetic, m/α³ = 4π(ρ−1)/(ρ+2)
        // with ρ = 2μ_r j₁(κ)/(κ j₀(κ) − j₁(κ))
        let cases = [
            (100.0, 0.1, c(12.10580831, 0.321965392)),
            (100.0, 10.0, c(8.622361325, 2.720554097)),
            (100.0, 1000.0, c(-2.340698541, 2.724145168)),
            (1.0, 10.0, c(-1.999167, 2.213045)),
            (1.0, 100.0, c(-4.950322, 1.144371)),
            (2.0, 10.0, c(-0.83707, 3.025956)),
            (100.0, 1.0, c(11.23549, 1.142885)),
        ];
        for (mu, nu, expect) in cases {
            let m = sphere_mpt_eddy(mu, nu, 1.0).unwrap();
            assert!(rel(m, expect) < 1e-6, "μ_r = {mu}, ν_i = {nu}: {m}");
        }
    }

    #[test]
    fn small_kappa_reduces_to_polya_szego() {
        // κ = 1e-4: ν_i μ_r = 1e-8
        let m = sphere_mpt_eddy(2.0, 1e-8 / 2.0, 1.0).unwrap();
        assert!(rel(m, c(PI, 0.0)) < 1e-6);
    }

    #[test]
    fn perfect_conductor_limit() {
        let mut prev = f64::INFINITY;
        for nu in [1e6, 1e8, 1e10] {
            let m = sphere_mpt_eddy(1.0, nu, 1.0).unwrap();
            let err = rel(m, c(-2.0 * PI, 0.0));
            assert!(err < prev);
            prev = err;
        }
        // |κ| = 1e5: the skin-depth correction is O(1/|κ|)
        assert!(prev < 1e-4);
    }

    #[test]
    fn depth_doubling_is_stable() {
        for nu in [1.0, 40.0, 1000.0] {
            let p = SphereSeriesParams::eddy(100.0, nu).unwrap();
            let a = sphere_mpt_full(&p, 1.0).unwrap();
            let b = sphere_mpt_full(&p.with_order(2 * p.order).unwrap(), 1.0).unwrap();
            assert!(rel(a, b) < 1e-10);
        }
    }

    #[test]
    fn polya_szego_sphere_values() {
        assert!(polya_szego_sphere(c(1.0, 0.0), 1.0).unwrap().norm() == 0.0);
        let t = polya_szego_sphere(c(2.0, 0.0), 1.0).unwrap();
        assert!((t.0[1][1] - PI).norm() < 1e-15 && t.0[0][1].norm() == 0.0);
        let big = polya_szego_sphere(c(1e6, 0.0), 1.0).unwrap();
        assert!((big.0[2][2] - 4.0 * PI).norm() < 1e-4);
        assert!(matches!(polya_szego_sphere(c(-2.0, 0.0), 1.0), Err(Error::Singularity(_))));
        let a = polya_szego_sphere(c(3.0, 1.0), 0.5).unwrap();
        let b = polya_szego_sphere(c(3.0, 1.0), 1.0).unwrap();
        assert!((b.0[0][0] / a.0[0][0] - 8.0).norm() < 1e-12);
    }

    #[test]
    fn depolarization_factors_behave() {
        let l = depolarization_factors([1.0, 1.0, 1.0]).unwrap();
        for v in l {
            assert!((v - 1.0 / 3.0).abs() < 1e-10);
        }
        let l = depolarization_factors([2.0, 1.0, 1.0]).unwrap();
        assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(l[0] < 1.0 / 3.0 && l[1] > 1.0 / 3.0 && (l[1] - l[2]).abs() < 1e-12);
        // prolate spheroid closed form, e² = 1 − 1/4
        let e: f64 = (0.75f64).sqrt();
        let exact = (1.0 - e * e) / (e * e) * (((1.0 + e) / (1.0 - e)).ln() / (2.0 * e) - 1.0);
        assert!((l[0] - exact).abs() < 1e-10);
        assert!(depolarization_factors([1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn ellipsoid_matches_sphere() {
        let a = polya_szego_ellipsoid([1.0, 1.0, 1.0], c(2.0, 0.0), 1.0).unwrap();
        let b = polya_szego_sphere(c(2.0, 0.0), 1.0).unwrap();
        assert!((a - b).norm() < 1e-8);
    }

    #[test]
    fn interior_field_with_no_contrast_is_the_background() {
        let bg = PolynomialBackground {
            h0: [c(1.0, 0.0), c(0.0, 2.0), c(0.5, 0.0)],
            grad: Rank2TensorC::from_real([[0.3, 0.1, 0.0], [0.1, -0.5, 0.2], [0.0, 0.2, 0.2]]),
        };
        let f = sphere_interior_fields(&SphereSeriesParams::eddy(1.0, 0.0).unwrap(), &bg).unwrap();
        for xi in [[0.0, 0.0, 0.0], [0.3, -0.2, 0.5], [0.0, 0.0, 1.0]] {
            let h = f.h(&xi).unwrap();
            let h0 = bg.value(&xi);
            assert!(cnorm(&crate::tensor::csub(&h, &h0)) < 1e-14);
        }
        assert!(f.h(&[0.9, 0.9, 0.0]).is_err());
    }

    #[test]
    fn static_interior_field_is_uniform() {
        let mu = 7.0;
        let bg = PolynomialBackground::uniform([c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let f = sphere_interior_fields(&SphereSeriesParams::eddy(mu, 0.0).unwrap(), &bg).unwrap();
        for xi in [[0.0, 0.0, 0.0], [0.5, 0.1, -0.3], [0.0, 0.6, 0.8]] {
            let h = f.h(&xi).unwrap();
            assert!((h[2] - 3.0 / (mu + 2.0)).norm() < 1e-14);
            assert!(h[0].norm() + h[1].norm() < 1e-14);
        }
        // the response matches the dipole coefficient
        let m = sphere_mpt_eddy(mu, 0.0, 1.0).unwrap();
        assert!((f.response(1).unwrap() * (-4.0 * PI) - m).norm() < 1e-13);
    }

    #[test]
    fn skin_effect_decays_inward() {
        let bg = PolynomialBackground::uniform([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let f = sphere_interior_fields(&SphereSeriesParams::eddy(1.0, 2000.0).unwrap(), &bg).unwrap();
        let mut prev = 0.0;
        for k in 0..=50 {
            let r = k as f64 / 50.0;
            let v = cnorm(&f.h(&[0.0, r, 0.0]).unwrap());
            assert!(v > prev, "not increasing at r = {r}");
            prev = v;
        }
        assert!(cnorm(&f.h(&[0.0, 0.5, 0.0]).unwrap()) < 1e-5 * prev);
    }

    /// Central-difference curl of a field.
    fn fd_curl(f: &dyn Fn(&Vec3) -> CVec3, x: &Vec3, h: f64) -> CVec3 {
        let d = |i: usize, j: usize| {
            let mut p = *x;
            let mut m = *x;
            p[j] += h;
            m[j] -= h;
            (f(&p)[i] - f(&m)[i]) / (2.0 * h)
        };
        [d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)]
    }

    #[test]
    fn interior_fields_satisfy_the_eddy_equations() {
        let mu = 5.0;
        let nu = 3.0;
        let bg = PolynomialBackground {
            h0: [c(0.2, 0.0), c(1.0, 0.0), c(0.0, -0.4)],
            grad: Rank2TensorC::from_real([[1.0, 0.3, 0.0], [0.3, 0.0, -0.2], [0.0, -0.2, -1.0]]),
        };
        let f = sphere_interior_fields(&SphereSeriesParams::eddy(mu, nu).unwrap(), &bg).unwrap();
        let h = |x: &Vec3| f.h(x).unwrap();
        let e = |x: &Vec3| f.e_over_k_alpha(x).unwrap();
        let i = c(0.0, 1.0);
        for x in [[0.1, 0.2, -0.3], [0.4, -0.1, 0.2], [0.0, 0.5, 0.5]] {
            // ∇×E/(kα) = i μ_r H  and  ∇×H = −i ν E/(kα) with ν = i ν_i
            let ce = fd_curl(&e, &x, 1e-5);
            let hx = h(&x);
            let ch = fd_curl(&h, &x, 1e-5);
            let ex = e(&x);
            for k in 0..3 {
                assert!((ce[k] - i * mu * hx[k]).norm() < 1e-7, "Faraday component {k}");
                assert!((ch[k] - nu * ex[k]).norm() < 1e-7, "Ampère component {k}");
            }
        }
        // continuity of tangential H and normal μH at the boundary against
        // the static exterior field of the same response coefficients
        let x = [0.6, 0.0, 0.8];
        let b1 = f.response(1).unwrap();
        let b2 = f.response(2).unwrap();
        let ext = |p: &Vec3| -> CVec3 {
            // H = ∇(S₁(1 + b₁ r⁻³) + S₂(1 + b₂ r⁻⁵))
            let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            let r = r2.sqrt();
            let g = bg.grad.apply_real(p);
            let s1 = bg.h0[0] * p[0] + bg.h0[1] * p[1] + bg.h0[2] * p[2];
            let s2 = (g[0] * p[0] + g[1] * p[1] + g[2] * p[2]) * 0.5;
            let f1 = 1.0 + b1 / r.powi(3);
            let f2 = 1.0 + b2 / r.powi(5);
            let d1 = -3.0 * b1 / r.powi(5);
            let d2 = -5.0 * b2 / r.powi(7);
            std::array::from_fn(|k| bg.h0[k] * f1 + s1 * d1 * p[k] + g[k] * f2 + s2 * d2 * p[k])
        };
        let hi = h(&x);
        let he = ext(&x);
        let n = x;
        let ti = rccross(&n, &hi);
        let te = rccross(&n, &he);
        for k in 0..3 {
            assert!((ti[k] - te[k]).norm() < 1e-12);
        }
        let ni: Complex64 = (0..3).map(|k| hi[k] * n[k]).sum::<Complex64>() * mu;
        let ne: Complex64 = (0..3).map(|k| he[k] * n[k]).sum();
        assert!((ni - ne).norm() < 1e-12);
    }
}
