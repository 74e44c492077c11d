//! The perturbed magnetic field `H_Δ(x) = (H_α − H₀)(x)` away from the object.
//!
//! All expansions share one kernel: with `r = |x − z|`, `r̂ = (x − z)/r`,
//! `a = ℳH₀(z)` and `v = 𝒜H₀(z) + ℬE₀(z)`,
//!
//! ```text
//! H_Δ ≈ e^{ikr}/4π { (1/r³ − ik/r²)(3r̂(r̂·a) − a) − (k²/r) r̂×(r̂×a)
//!                    + (ik/r² + k²/r) r̂×v }
//! ```
//!
//! [`hdelta_main`] evaluates the same thing term by term from `𝒜, ℬ, 𝒞, 𝒩`
//! (so it keeps the non-skew part of `𝒞`), the other entry points use the
//! grouped form with whatever tensors the regime supplies.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::assembly::TensorBundle;
use crate::domain::{ContrastSet, ObjectPlacement};
use crate::error::{Error, Result};
use crate::greens::{greens_eval, MIN_SEPARATION};
use crate::mesh::UnitShape;
use crate::oracle::{bessel::sph_j_reduced, reduced_converged, PolynomialBackground, SphereInteriorFields, DEFAULT_ORDER};
use crate::tensor::{self, cadd, cnorm, cscale, levi_civita, rccross, CVec3, Rank2TensorC, Vec3};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Expansions are only claimed for `|x − z| ≥ MIN_DISTANCE_FACTOR · α`.
pub const MIN_DISTANCE_FACTOR: f64 = 3.0;

/// Default calibration constant `C` of the residual bound.
pub const RESIDUAL_CALIBRATION: f64 = 1.0;

/// How the background field varies in space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackgroundKind {
    /// Regular standing wave whose magnetic field is `h0 + grad·(x − origin)`
    /// to leading order at the origin; exact for any `k`.
    StandingWave { h0: CVec3, grad: Rank2TensorC },
    /// `E = amplitude · polarization · e^{ik d·x}`, `H = d × E`.
    PlaneWave { direction: Vec3, polarization: CVec3, amplitude: Complex64 },
}

/// Source-free background fields `(E₀, H₀)` solving `∇×E₀ = ikH₀`,
/// `∇×H₀ = −ikE₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundField {
    pub kind: BackgroundKind,
    /// Free-space wavenumber (1/m).
    pub k: f64,
    /// Expansion point of a standing wave (ignored for plane waves).
    pub origin: Vec3,
}

/// Values and Jacobians (`d[j][c] = ∂_c F_j`) at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub e: CVec3,
    pub h: CVec3,
    pub de: Rank2TensorC,
    pub dh: Rank2TensorC,
}

/// Sup-norms of the background over the object: `‖H₀‖_{W²,∞}` and
/// `‖E₀‖_{W¹,∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundNorms {
    pub h0_w2inf: f64,
    pub e0_w1inf: f64,
}

fn check_k(k: f64) -> Result<()> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::domain(format!("wavenumber must be finite and non-negative, got {k}")));
    }
    Ok(())
}

impl BackgroundField {
    /// Uniform `H₀ = h0` at the origin (the `n = 1` standing wave).
    pub fn uniform(h0: CVec3, k: f64, origin: Vec3) -> Result<Self> {
        Self::gradient(h0, Rank2TensorC::zeros(), k, origin)
    }

    /// `H₀ ≈ h0 + grad·(x − origin)` with `grad` symmetric and trace-free.
    pub fn gradient(h0: CVec3, grad: Rank2TensorC, k: f64, origin: Vec3) -> Result<Self> {
        check_k(k)?;
        PolynomialBackground { h0, grad }.validate()?;
        Ok(Self { kind: BackgroundKind::StandingWave { h0, grad }, k, origin })
    }

    pub fn plane_wave(direction: Vec3, polarization: CVec3, amplitude: Complex64, k: f64) -> Result<Self> {
        check_k(k)?;
        let n = tensor::norm(&direction);
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("propagation direction must be a unit vector, |d| = {n}")));
        }
        if tensor::rcdot(&direction, &polarization).norm() > 1e-12 * cnorm(&polarization).max(1e-300) {
            return Err(Error::domain("plane-wave polarization must be orthogonal to the direction"));
        }
        Ok(Self {
            kind: BackgroundKind::PlaneWave { direction, polarization, amplitude },
            k,
            origin: [0.0; 3],
        })
    }

    pub fn h(&self, x: &Vec3) -> Result<CVec3> {
        Ok(self.sample(x)?.h)
    }

    pub fn e(&self, x: &Vec3) -> Result<CVec3> {
        Ok(self.sample(x)?.e)
    }

    pub fn sample(&self, x: &Vec3) -> Result<FieldSample> {
        match self.kind {
            BackgroundKind::PlaneWave { direction, polarization, amplitude } => {
                let phase = Complex64::new(0.0, self.k * tensor::dot(&direction, x)).exp() * amplitude;
                let e = cscale(&polarization, phase);
                let h = rccross(&direction, &e);
                let ik = Complex64::new(0.0, self.k);
                let de = Rank2TensorC::from_fn(|j, c| e[j] * ik * direction[c]);
                let dh = Rank2TensorC::from_fn(|j, c| h[j] * ik * direction[c]);
                Ok(FieldSample { e, h, de, dh })
            }
            BackgroundKind::StandingWave { h0, grad } => {
                let rho = tensor::sub(x, &self.origin);
                let mut out = FieldSample {
                    e: tensor::czero(),
                    h: tensor::czero(),
                    de: Rank2TensorC::zeros(),
                    dh: Rank2TensorC::zeros(),
                };
                let s1 = Harmonic::degree1(h0);
                let s2 = Harmonic::degree2(grad);
                for (n, s) in [(1, &s1), (2, &s2)] {
                    let part = standing_wave(n, s, self.k, &rho)?;
                    out.e = cadd(&out.e, &part.e);
                    out.h = cadd(&out.h, &part.h);
                    out.de = out.de + part.de;
                    out.dh = out.dh + part.dh;
                }
                Ok(out)
            }
        }
    }

    /// The static polynomial this background reduces to over the object, in
    /// scaled coordinates `ξ = (x − z)/α`. Only standing waves expanded
    /// about `z` qualify; the match is exact for `k = 0` and holds to
    /// `O((kα)²)` otherwise.
    pub fn polynomial_background(&self, placement: &ObjectPlacement) -> Result<PolynomialBackground> {
        match self.kind {
            BackgroundKind::StandingWave { h0, grad } => {
                if tensor::norm(&tensor::sub(&self.origin, &placement.z)) > 1e-12 * placement.alpha {
                    return Err(Error::usage("the standing wave must be expanded about the object centre"));
                }
                Ok(PolynomialBackground { h0, grad: grad * placement.alpha })
            }
            BackgroundKind::PlaneWave { .. } => {
                Err(Error::usage("interior series fields need a standing-wave background"))
            }
        }
    }

    /// `‖H₀‖_{W²,∞}` and `‖E₀‖_{W¹,∞}` over the ball of radius `α` about `z`.
    ///
    /// Plane waves are done in closed form. Standing waves are sampled at the
    /// centre, the axis and diagonal points on the sphere of radius `α`, and
    /// the same at `α/2`; second derivatives come from central differences
    /// of the exact Jacobian.
    pub fn norms_on_ball(&self, z: &Vec3, alpha: f64) -> Result<BackgroundNorms> {
        if let BackgroundKind::PlaneWave { polarization, amplitude, .. } = self.kind {
            let e = cnorm(&polarization) * amplitude.norm();
            let k = self.k;
            return Ok(BackgroundNorms { h0_w2inf: e * (1.0 + k + k * k), e0_w1inf: e * (1.0 + k) });
        }
        let mut dirs: Vec<Vec3> = vec![[0.0; 3]];
        for a in 0..3 {
            for s in [-1.0, 1.0] {
                let mut d = [0.0; 3];
                d[a] = s;
                dirs.push(d);
            }
        }
        let c = 1.0 / 3f64.sqrt();
        for sx in [-c, c] {
            for sy in [-c, c] {
                for sz in [-c, c] {
                    dirs.push([sx, sy, sz]);
                }
            }
        }
        let step = 1e-4 * alpha;
        let (mut h0, mut h1, mut h2, mut e0, mut e1) = (0f64, 0f64, 0f64, 0f64, 0f64);
        for radius in [alpha, alpha / 2.0] {
            for d in &dirs {
                let x = tensor::add(z, &tensor::scale(d, radius));
                let s = self.sample(&x)?;
                h0 = h0.max(cnorm(&s.h));
                h1 = h1.max(s.dh.norm());
                e0 = e0.max(cnorm(&s.e));
                e1 = e1.max(s.de.norm());
                let mut second = 0.0;
                for a in 0..3 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[a] += step;
                    xm[a] -= step;
                    let diff = (self.sample(&xp)?.dh - self.sample(&xm)?.dh) * (0.5 / step);
                    second += diff.norm().powi(2);
                }
                h2 = h2.max(second.sqrt());
            }
        }
        Ok(BackgroundNorms { h0_w2inf: h0 + h1 + h2, e0_w1inf: e0 + e1 })
    }
}

/// A homogeneous harmonic polynomial of degree 1 or 2: `h·ρ` or `½ρ·Gρ`.
struct Harmonic {
    h: CVec3,
    g: Rank2TensorC,
    degree2: bool,
}

impl Harmonic {
    fn degree1(h: CVec3) -> Self {
        Self { h, g: Rank2TensorC::zeros(), degree2: false }
    }

    fn degree2(g: Rank2TensorC) -> Self {
        Self { h: tensor::czero(), g, degree2: true }
    }

    fn value(&self, rho: &Vec3) -> Complex64 {
        if self.degree2 {
            tensor::rcdot(rho, &self.g.apply_real(rho)) * 0.5
        } else {
            tensor::rcdot(rho, &self.h)
        }
    }

    fn gradient(&self, rho: &Vec3) -> CVec3 {
        if self.degree2 {
            self.g.apply_real(rho)
        } else {
            self.h
        }
    }

    fn hessian(&self) -> Rank2TensorC {
        self.g
    }
}

/// Regular standing wave of degree `n` built on the harmonic `S`:
///
/// ```text
/// H = c_n [((n+1) F_n(kρ) − (kρ)² F_{n+1}(kρ)) ∇S + n k² F_{n+1}(kρ) S ρ]
/// E = −ik c_n F_n(kρ) ρ × ∇S,       c_n = (2n+1)!!/(n+1)
/// ```
///
/// normalised so that `H → ∇S` as `k → 0`. Derivatives use
/// `d/dx F_m(x) = −x F_{m+1}(x)`.
fn standing_wave(n: usize, s: &Harmonic, k: f64, rho: &Vec3) -> Result<FieldSample> {
    let c_n = if n == 1 { 1.5 } else { 5.0 };
    let r2 = tensor::dot(rho, rho);
    let arg = Complex64::new(k * r2.sqrt(), 0.0);
    let f = if arg.re <= crate::oracle::bessel::SERIES_CROSSOVER {
        sph_j_reduced(n + 2, arg, DEFAULT_ORDER)?
    } else {
        reduced_converged(n + 2, arg, DEFAULT_ORDER.max(2 * arg.re as usize))?.0
    };
    let unscale = f.scale.exp();
    let fv: Vec<f64> = f.values.iter().map(|v| v.re * unscale).collect();
    let (f0, f1, f2) = (fv[n], fv[n + 1], fv[n + 2]);
    let nf = n as f64;
    let k2 = k * k;
    let a = (nf + 1.0) * f0 - k2 * r2 * f1;
    let b = nf * k2 * f1;
    // ∂_c a = ρ_c k² (−(n+3) F_{n+1} + k²ρ² F_{n+2}),  ∂_c b = −n k⁴ F_{n+2} ρ_c
    let da = k2 * (-(nf + 3.0) * f1 + k2 * r2 * f2);
    let db = -nf * k2 * k2 * f2;

    let sv = s.value(rho);
    let gs = s.gradient(rho);
    let hs = s.hessian();
    let h: CVec3 = std::array::from_fn(|j| (gs[j] * a + sv * b * rho[j]) * c_n);
    let dh = Rank2TensorC::from_fn(|j, c| {
        let delta = if j == c { 1.0 } else { 0.0 };
        (gs[j] * (da * rho[c]) + hs.0[j][c] * a + sv * (db * rho[c] * rho[j]) + gs[c] * (b * rho[j]) + sv * (b * delta))
            * c_n
    });

    let pre = Complex64::new(0.0, -k * c_n);
    let cr = rccross(rho, &gs);
    let e = cscale(&cr, pre * f0);
    // ∂_c F_n(kρ) = −k² F_{n+1} ρ_c
    let de = Rank2TensorC::from_fn(|j, c| {
        let mut dcross = Complex64::new(0.0, 0.0);
        for p in 0..3 {
            for q in 0..3 {
                let eps = levi_civita(j, p, q);
                if eps != 0.0 {
                    let dp = if p == c { gs[q] } else { Complex64::new(0.0, 0.0) };
                    dcross += (dp + hs.0[q][c] * rho[p]) * eps;
                }
            }
        }
        pre * (cr[j] * (-k2 * f1 * rho[c]) + dcross * f0)
    });
    Ok(FieldSample { e, h, de, dh })
}

/// `H_Δ` split by the tensor that produced each part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldTerms {
    pub a: CVec3,
    pub b: CVec3,
    pub c: CVec3,
    /// The `𝒩` contribution, or the `ℳ` contribution for grouped forms
    /// (whose `c` part is then zero).
    pub n: CVec3,
}

impl FieldTerms {
    pub fn sum(&self) -> CVec3 {
        cadd(&cadd(&self.a, &self.b), &cadd(&self.c, &self.n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPrediction {
    pub h_delta: CVec3,
    pub terms: FieldTerms,
    /// Theorem bound on the neglected remainder, with `C = RESIDUAL_CALIBRATION`.
    pub residual_bound: f64,
}

fn check_distance(x: &Vec3, placement: &ObjectPlacement) -> Result<f64> {
    let r = tensor::norm(&tensor::sub(x, &placement.z));
    if r < MIN_DISTANCE_FACTOR * placement.alpha {
        return Err(Error::Validity(format!(
            "|x − z| = {r:e} is closer than {MIN_DISTANCE_FACTOR}α = {:e}; the expansion does not apply",
            MIN_DISTANCE_FACTOR * placement.alpha
        )));
    }
    Ok(r)
}

fn check_bundle(bundle: &TensorBundle, placement: &ObjectPlacement, bg: &BackgroundField) -> Result<()> {
    let p = &bundle.provenance;
    if (p.alpha - placement.alpha).abs() > 1e-12 * placement.alpha {
        return Err(Error::usage(format!("tensors were built for α = {}, placement has {}", p.alpha, placement.alpha)));
    }
    if (p.k - bg.k).abs() > 1e-9 * p.k.max(bg.k) {
        return Err(Error::usage(format!("tensors were built for k = {}, background has {}", p.k, bg.k)));
    }
    Ok(())
}

fn prediction_bound(bundle: &TensorBundle, placement: &ObjectPlacement, bg: &BackgroundField) -> Result<f64> {
    let norms = bg.norms_on_ball(&placement.z, placement.alpha)?;
    let eps_r = bundle.provenance.contrasts.map(|c| c.eps_r).unwrap_or(Complex64::new(1.0, 0.0));
    residual_bound_eps(placement.alpha, eps_r, bg.k, &norms, RESIDUAL_CALIBRATION)
}

/// Term-by-term evaluation from `𝒜, ℬ, 𝒞, 𝒩`.
pub fn hdelta_main(x: &Vec3, placement: &ObjectPlacement, bundle: &TensorBundle, bg: &BackgroundField) -> Result<FieldPrediction> {
    check_distance(x, placement)?;
    check_bundle(bundle, placement, bg)?;
    let z = &placement.z;
    let k = bg.k;
    let h0 = bg.h(z)?;
    let e0 = bg.e(z)?;
    let g = greens_eval(x, z, k)?;
    let ik = Complex64::new(0.0, k);

    let grad_cross = |v: CVec3| -> CVec3 { cscale(&tensor::ccross(&g.grad, &v), -ik) };
    let a = grad_cross(bundle.a.apply(&h0));
    let b = grad_cross(bundle.b.apply(&e0));
    let mut c = tensor::czero();
    for (j, cj) in c.iter_mut().enumerate() {
        for l in 0..3 {
            for s in 0..3 {
                let eps = levi_civita(j, l, s);
                if eps == 0.0 {
                    continue;
                }
                for m in 0..3 {
                    for i in 0..3 {
                        *cj += g.hess.0[l][m] * bundle.c.0[m][s][i] * h0[i] * eps;
                    }
                }
            }
        }
    }
    let n = g.dyadic(k).apply(&bundle.n.apply(&h0));
    let terms = FieldTerms { a, b, c, n };
    Ok(FieldPrediction { h_delta: terms.sum(), terms, residual_bound: prediction_bound(bundle, placement, bg)? })
}

/// The grouped three-shell kernel; returns the `ℳ` part and the `r̂×v` part.
fn shells(x: &Vec3, z: &Vec3, k: f64, a: &CVec3, va: &CVec3, vb: &CVec3) -> Result<(CVec3, CVec3, CVec3)> {
    let d = tensor::sub(x, z);
    let r = tensor::norm(&d);
    if !(r >= MIN_SEPARATION) {
        return Err(Error::Singularity(format!("|x − z| = {r:e} is below {MIN_SEPARATION:e}")));
    }
    let rh = tensor::scale(&d, 1.0 / r);
    let ik = Complex64::new(0.0, k);
    let phase = ik.scale(r).exp() / (4.0 * PI);
    let ra = tensor::rcdot(&rh, a);
    let dip: CVec3 = std::array::from_fn(|j| ra * (3.0 * rh[j]) - a[j]);
    let rra = rccross(&rh, &rccross(&rh, a));
    let near = phase * (1.0 / (r * r * r) - ik / (r * r));
    let far = phase * (k * k / r);
    let m_part: CVec3 = std::array::from_fn(|j| near * dip[j] - far * rra[j]);
    let cross_pre = phase * (ik / (r * r) + k * k / r);
    Ok((m_part, cscale(&rccross(&rh, va), cross_pre), cscale(&rccross(&rh, vb), cross_pre)))
}

/// Grouped form with `ℳ = 𝒩 − Č`; the non-skew part of `𝒞` is dropped.
/// The `ℳ` contribution is reported in `terms.n` and `terms.c` is zero.
pub fn hdelta_alt(x: &Vec3, placement: &ObjectPlacement, bundle: &TensorBundle, bg: &BackgroundField) -> Result<FieldPrediction> {
    check_distance(x, placement)?;
    check_bundle(bundle, placement, bg)?;
    let z = &placement.z;
    let h0 = bg.h(z)?;
    let e0 = bg.e(z)?;
    let (n, a, b) = shells(x, z, bg.k, &bundle.m.apply(&h0), &bundle.a.apply(&h0), &bundle.b.apply(&e0))?;
    let terms = FieldTerms { a, b, c: tensor::czero(), n };
    Ok(FieldPrediction { h_delta: terms.sum(), terms, residual_bound: prediction_bound(bundle, placement, bg)? })
}

/// Near-field dipole `(3r̂(r̂·ℳH₀) − ℳH₀)/(4πr³)`.
pub fn hdelta_quasistatic(x: &Vec3, placement: &ObjectPlacement, m: &Rank2TensorC, h0_at_z: &CVec3) -> Result<CVec3> {
    let zero = tensor::czero();
    Ok(shells(x, &placement.z, 0.0, &m.apply(h0_at_z), &zero, &zero)?.0)
}

/// Eddy-current limit; the same kernel as [`hdelta_quasistatic`], fed with
/// the eddy-current `ℳ`.
pub fn hdelta_eddy(x: &Vec3, placement: &ObjectPlacement, m: &Rank2TensorC, h0_at_z: &CVec3) -> Result<CVec3> {
    hdelta_quasistatic(x, placement, m, h0_at_z)
}

/// Low-frequency scattering by a non-conducting body: the three-shell form
/// with `𝒯[αB, μ_r]` on `H₀` and `𝒯[αB, ε_r]` on `E₀`.
pub fn hdelta_smallk_dielectric(
    x: &Vec3,
    placement: &ObjectPlacement,
    t_mu: &Rank2TensorC,
    t_eps: &Rank2TensorC,
    cs: &ContrastSet,
    bg: &BackgroundField,
) -> Result<CVec3> {
    if cs.nu_i != 0.0 || cs.eps_r.im != 0.0 {
        return Err(Error::usage("the small-k dielectric expansion needs a non-conducting object; use hdelta_smallalpha"));
    }
    hdelta_smallalpha(x, placement, t_mu, t_eps, bg)
}

/// Small-body scattering; the kernel of [`hdelta_smallk_dielectric`] with
/// any conductivity folded into a complex `ε_r` inside `t_eps`.
pub fn hdelta_smallalpha(
    x: &Vec3,
    placement: &ObjectPlacement,
    t_mu: &Rank2TensorC,
    t_eps: &Rank2TensorC,
    bg: &BackgroundField,
) -> Result<CVec3> {
    let z = &placement.z;
    let h0 = bg.h(z)?;
    let e0 = bg.e(z)?;
    let (m, _, b) = shells(x, z, bg.k, &t_mu.apply(&h0), &tensor::czero(), &t_eps.apply(&e0))?;
    Ok(cadd(&m, &b))
}

/// `C(α⁴‖H₀‖_{W²,∞} + α⁴k(|ε_r−1| + αk²|1−1/ε_r|)‖E₀‖_{W¹,∞})`.
pub fn residual_bound(placement: &ObjectPlacement, cs: &ContrastSet, k: f64, norms: &BackgroundNorms, c: f64) -> Result<f64> {
    residual_bound_eps(placement.alpha, cs.eps_r, k, norms, c)
}

fn residual_bound_eps(alpha: f64, eps_r: Complex64, k: f64, norms: &BackgroundNorms, c: f64) -> Result<f64> {
    if !(c > 0.0) || !(norms.h0_w2inf >= 0.0) || !(norms.e0_w1inf >= 0.0) {
        return Err(Error::domain("residual bound needs C > 0 and non-negative norms"));
    }
    let a4 = alpha.powi(4);
    let e_term = if norms.e0_w1inf == 0.0 {
        0.0
    } else {
        a4 * k * ((eps_r - 1.0).norm() + alpha * k * k * (1.0 - 1.0 / eps_r).norm()) * norms.e0_w1inf
    };
    Ok(c * (a4 * norms.h0_w2inf + e_term))
}

/// Fields inside the unit ball in scaled coordinates; `E` divided by `kα`.
pub trait InteriorFieldEvaluator: Sync {
    fn h(&self, xi: &Vec3) -> Result<CVec3>;
    fn e_over_k_alpha(&self, xi: &Vec3) -> Result<CVec3>;
}

impl InteriorFieldEvaluator for SphereInteriorFields {
    fn h(&self, xi: &Vec3) -> Result<CVec3> {
        SphereInteriorFields::h(self, xi)
    }

    fn e_over_k_alpha(&self, xi: &Vec3) -> Result<CVec3> {
        SphereInteriorFields::e_over_k_alpha(self, xi)
    }
}

/// Product rule over the unit ball: Gauss-Legendre on radial panels whose
/// widths shrink geometrically toward the surface (where skin-effect
/// layers sit), Gauss-Legendre in `cos θ` and the trapezoidal rule in `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeQuadrature {
    pub radial_panels: usize,
    pub radial_order: usize,
    /// Width ratio of neighbouring panels, outer over inner, in `(0, 1]`.
    pub grading: f64,
    pub polar: usize,
    pub azimuthal: usize,
    /// Accepted relative gap between this rule and the one with every
    /// count halved.
    pub tolerance: f64,
}

impl Default for VolumeQuadrature {
    fn default() -> Self {
        Self { radial_panels: 8, radial_order: 8, grading: 0.6, polar: 12, azimuthal: 24, tolerance: 1e-2 }
    }
}

impl VolumeQuadrature {
    pub fn validate(&self) -> Result<()> {
        if self.radial_panels == 0 || self.radial_order == 0 || self.polar == 0 || self.azimuthal < 3 {
            return Err(Error::domain("quadrature needs at least one panel, one node and three azimuthal points"));
        }
        if !(self.grading > 0.0 && self.grading <= 1.0) || !(self.tolerance > 0.0) {
            return Err(Error::domain("quadrature grading must lie in (0, 1] and the tolerance be positive"));
        }
        Ok(())
    }

    /// Every count doubled.
    pub fn refined(&self) -> Self {
        Self {
            radial_panels: self.radial_panels * 2,
            radial_order: self.radial_order * 2,
            grading: self.grading.sqrt(),
            polar: self.polar * 2,
            azimuthal: self.azimuthal * 2,
            tolerance: self.tolerance,
        }
    }

    fn halved(&self) -> Self {
        Self {
            radial_panels: (self.radial_panels / 2).max(1),
            radial_order: (self.radial_order / 2).max(1),
            grading: self.grading * self.grading,
            polar: (self.polar / 2).max(1),
            azimuthal: (self.azimuthal / 2).max(3),
            tolerance: self.tolerance,
        }
    }

    /// Nodes and weights (`ξ`, `w`) of the rule; the weights sum to `4π/3`.
    pub fn nodes(&self) -> Result<Vec<(Vec3, f64)>> {
        self.validate()?;
        let gl = |n: usize| GaussLegendre::new(NonZeroUsize::new(n).expect("validated non-zero"));
        let radial = gl(self.radial_order);
        let polar = gl(self.polar);
        // panel edges: widths w, wq, wq², … summing to one
        let q = self.grading;
        let widths: Vec<f64> = (0..self.radial_panels).map(|i| q.powi(i as i32)).collect();
        let total: f64 = widths.iter().sum();
        let mut edges = vec![0.0];
        for w in &widths {
            edges.push(edges.last().unwrap() + w / total);
        }
        *edges.last_mut().unwrap() = 1.0;

        let mut out = Vec::with_capacity(self.radial_panels * self.radial_order * self.polar * self.azimuthal);
        let dphi = 2.0 * PI / self.azimuthal as f64;
        for p in 0..self.radial_panels {
            let (lo, hi) = (edges[p], edges[p + 1]);
            for &(t, wr) in radial.as_node_weight_pairs() {
                let r = 0.5 * ((hi - lo) * t + hi + lo);
                let wr = wr * 0.5 * (hi - lo) * r * r;
                for &(ct, wt) in polar.as_node_weight_pairs() {
                    let st = (1.0 - ct * ct).max(0.0).sqrt();
                    for a in 0..self.azimuthal {
                        let phi = dphi * a as f64;
                        out.push(([r * st * phi.cos(), r * st * phi.sin(), r * ct], wr * wt * dphi));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// `H_Δ` from the volume representation plus the gap to the halved rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeIntegral {
    pub h_delta: CVec3,
    pub error_estimate: f64,
}

/// Interior fields tabulated at the nodes of a rule, reusable for many
/// observation points.
#[derive(Debug, Clone)]
pub struct VolumeIntegrator {
    fine: Vec<Node>,
    coarse: Vec<Node>,
    tolerance: f64,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    xi: Vec3,
    w: f64,
    h: CVec3,
    e_hat: CVec3,
}

fn tabulate(interior: &dyn InteriorFieldEvaluator, rule: &VolumeQuadrature) -> Result<Vec<Node>> {
    use rayon::prelude::*;
    rule.nodes()?
        .into_par_iter()
        .map(|(xi, w)| Ok(Node { xi, w, h: interior.h(&xi)?, e_hat: interior.e_over_k_alpha(&xi)? }))
        .collect()
}

impl VolumeIntegrator {
    pub fn new(interior: &dyn InteriorFieldEvaluator, rule: &VolumeQuadrature) -> Result<Self> {
        rule.validate()?;
        Ok(Self { fine: tabulate(interior, rule)?, coarse: tabulate(interior, &rule.halved())?, tolerance: rule.tolerance })
    }

    /// `H_Δ(x) = −ik(ε_r−1)∫∇_xG×E + k²(μ_r−1)∫G H + (μ_r−1)∫D²G H` over
    /// `B_α`, with `ik(ε_r−1)E = i(ν/α)(E/kα)` so the eddy-current limit
    /// is finite.
    pub fn evaluate(&self, x: &Vec3, placement: &ObjectPlacement, cs: &ContrastSet, k: f64) -> Result<VolumeIntegral> {
        if placement.shape != UnitShape::Sphere {
            return Err(Error::usage("the volume rule covers the unit ball; the object must be a sphere"));
        }
        let r = tensor::norm(&tensor::sub(x, &placement.z));
        if r <= placement.alpha * (1.0 + 1e-9) {
            return Err(Error::Validity(format!("x must lie outside the object, |x − z| = {r:e}")));
        }
        let fine = self.sum(&self.fine, x, placement, cs, k)?;
        let coarse = self.sum(&self.coarse, x, placement, cs, k)?;
        let error_estimate = cnorm(&tensor::csub(&fine, &coarse));
        if error_estimate > self.tolerance * cnorm(&fine) {
            return Err(Error::Quadrature(format!(
                "volume integral not converged: halved rule differs by {error_estimate:.3e} (|H_Δ| = {:.3e})",
                cnorm(&fine)
            )));
        }
        Ok(VolumeIntegral { h_delta: fine, error_estimate })
    }

    fn sum(&self, nodes: &[Node], x: &Vec3, placement: &ObjectPlacement, cs: &ContrastSet, k: f64) -> Result<CVec3> {
        let alpha = placement.alpha;
        let a3 = alpha.powi(3);
        let e_pre = -I * cs.nu / alpha;
        let mu1 = cs.mu_r - 1.0;
        let mut acc = tensor::czero();
        for nd in nodes {
            let y = tensor::add(&placement.z, &tensor::scale(&nd.xi, alpha));
            let g = greens_eval(x, &y, k)?;
            let t1 = cscale(&tensor::ccross(&g.grad, &nd.e_hat), e_pre);
            let t2 = cscale(&nd.h, g.value * (k * k * mu1));
            let t3 = cscale(&g.hess.apply(&nd.h), Complex64::new(mu1, 0.0));
            let v = cadd(&t1, &cadd(&t2, &t3));
            acc = cadd(&acc, &cscale(&v, Complex64::new(nd.w * a3, 0.0)));
        }
        Ok(acc)
    }
}

/// One-shot [`VolumeIntegrator`].
pub fn hdelta_volume_integral(
    x: &Vec3,
    placement: &ObjectPlacement,
    interior: &dyn InteriorFieldEvaluator,
    cs: &ContrastSet,
    k: f64,
    quadrature: &VolumeQuadrature,
) -> Result<VolumeIntegral> {
    VolumeIntegrator::new(interior, quadrature)?.evaluate(x, placement, cs, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real3(v: [f64; 3]) -> CVec3 {
        tensor::complexify(&v)
    }

    fn grad_example() -> Rank2TensorC {
        Rank2TensorC::from_real([[1.0, 0.3, -0.2], [0.3, -0.4, 0.5], [-0.2, 0.5, -0.6]])
    }

    fn curl(d: &Rank2TensorC) -> CVec3 {
        [d.0[2][1] - d.0[1][2], d.0[0][2] - d.0[2][0], d.0[1][0] - d.0[0][1]]
    }

    #[test]
    fn backgrounds_solve_maxwell() {
        let k = 1.7;
        let backgrounds = [
            BackgroundField::gradient(real3([0.2, -1.0, 0.4]), grad_example() * c(0.5, 0.2), k, [0.1, 0.0, -0.3]).unwrap(),
            BackgroundField::plane_wave([0.0, 0.6, 0.8], real3([1.0, 0.0, 0.0]), c(0.3, 1.1), k).unwrap(),
        ];
        for bg in backgrounds {
            for x in [[0.3, -0.2, 0.5], [2.0, 1.0, -3.0], [0.1, 0.0, -0.3], [9.0, 4.0, 1.0]] {
                let s = bg.sample(&x).unwrap();
                let ik = c(0.0, k);
                let r1 = cnorm(&tensor::csub(&curl(&s.de), &cscale(&s.h, ik)));
                let r2 = cnorm(&tensor::csub(&curl(&s.dh), &cscale(&s.e, -ik)));
                let div_h = s.dh.trace().norm();
                let div_e = s.de.trace().norm();
                let scale = cnorm(&s.h) + s.dh.norm();
                assert!(r1 < 1e-10 * scale && r2 < 1e-10 * scale, "{x:?}: {r1} {r2}");
                assert!(div_h < 1e-10 * scale && div_e < 1e-10 * scale);
                // Jacobians against central differences
                let step = 1e-6;
                for a in 0..3 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[a] += step;
                    xm[a] -= step;
                    let (p, m) = (bg.sample(&xp).unwrap(), bg.sample(&xm).unwrap());
                    for j in 0..3 {
                        let fd_h = (p.h[j] - m.h[j]) / (2.0 * step);
                        let fd_e = (p.e[j] - m.e[j]) / (2.0 * step);
                        assert!((fd_h - s.dh.0[j][a]).norm() < 1e-7 * scale);
                        assert!((fd_e - s.de.0[j][a]).norm() < 1e-7 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn standing_wave_matches_its_polynomial_at_the_origin() {
        let g = grad_example();
        let h0 = real3([1.0, 2.0, -0.5]);
        let bg = BackgroundField::gradient(h0, g, 0.0, [1.0, 1.0, 1.0]).unwrap();
        let s = bg.sample(&[1.5, 0.7, 1.2]).unwrap();
        let expect = cadd(&h0, &g.apply_real(&[0.5, -0.3, 0.2]));
        assert!(cnorm(&tensor::csub(&s.h, &expect)) < 1e-14);
        assert_eq!(cnorm(&s.e), 0.0);
        let wave = BackgroundField::uniform(h0, 2.0, [1.0, 1.0, 1.0]).unwrap();
        let at = wave.sample(&[1.0, 1.0, 1.0]).unwrap();
        assert!(cnorm(&tensor::csub(&at.h, &h0)) < 1e-15);
        assert!(cnorm(&at.e) < 1e-15);
    }

    #[test]
    fn dipole_examples() {
        let pl = ObjectPlacement::sphere(0.01).unwrap();
        let m = Rank2TensorC::scalar(c(2.0, 0.5));
        let h0 = real3([0.0, 0.0, 1.0]);
        let r = 0.2;
        let base = 1.0 / (4.0 * PI * r * r * r);
        let axial = hdelta_quasistatic(&[0.0, 0.0, r], &pl, &m, &h0).unwrap();
        assert!((axial[2] - c(2.0, 0.5) * (2.0 * base)).norm() < 1e-12 * base);
        let equatorial = hdelta_eddy(&[r, 0.0, 0.0], &pl, &m, &h0).unwrap();
        assert!((equatorial[2] + c(2.0, 0.5) * base).norm() < 1e-12 * base);
        let far = hdelta_quasistatic(&[0.0, 0.0, 2.0 * r], &pl, &m, &h0).unwrap();
        assert!((far[2] * 8.0 - axial[2]).norm() < 1e-14 * axial[2].norm());
        assert!(matches!(hdelta_quasistatic(&[0.0; 3], &pl, &m, &h0), Err(Error::Singularity(_))));
    }

    #[test]
    fn residual_bound_examples() {
        let pl = ObjectPlacement::sphere(0.01).unwrap();
        let cs = ContrastSet { eps_r: c(1.0, 1e12), mu_r: 100.0, nu: c(0.0, 1.0), nu_r: 0.0, nu_i: 1.0, k_alpha: 1e-6 };
        let unit = BackgroundNorms { h0_w2inf: 1.0, e0_w1inf: 0.0 };
        let b = residual_bound(&pl, &cs, 1e-4, &unit, 1.0).unwrap();
        assert!((b - 1e-8).abs() < 1e-20);
        let half = ObjectPlacement::sphere(0.005).unwrap();
        let b2 = residual_bound(&half, &cs, 1e-4, &unit, 1.0).unwrap();
        assert!((b / b2 - 16.0).abs() < 1e-12);
        assert!(residual_bound(&pl, &cs, 1.0, &unit, 0.0).is_err());
    }

    #[test]
    fn quadrature_weights_sum_to_the_ball_volume() {
        let q = VolumeQuadrature::default();
        let nodes = q.nodes().unwrap();
        let v: f64 = nodes.iter().map(|(_, w)| w).sum();
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-12);
        // ∫ ξ₃² over the ball = 4π/15
        let m2: f64 = nodes.iter().map(|(x, w)| w * x[2] * x[2]).sum();
        assert!((m2 - 4.0 * PI / 15.0).abs() < 1e-12);
        assert!(nodes.iter().all(|(x, _)| tensor::norm(x) < 1.0));
        assert!(VolumeQuadrature { azimuthal: 2, ..q }.nodes().is_err());
    }

    #[test]
    fn too_close_is_a_validity_error() {
        let pl = ObjectPlacement::sphere(0.1).unwrap();
        let bg = BackgroundField::uniform(real3([0.0, 0.0, 1.0]), 0.0, [0.0; 3]).unwrap();
        let bundle = TensorBundle::zeros(crate::assembly::Provenance::oracle("zero", None, 0.1, 0.0));
        assert!(matches!(hdelta_main(&[0.2, 0.0, 0.0], &pl, &bundle, &bg), Err(Error::Validity(_))));
        let p = hdelta_main(&[0.5, 0.0, 0.0], &pl, &bundle, &bg).unwrap();
        assert_eq!(p.h_delta, tensor::czero());
    }
}
