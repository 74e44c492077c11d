//! Polarizability tensors from solved fields.
//!
//! Storage order is row-major: rank-2 tensors are indexed `(r, i)` and the
//! rank-3 tensor `𝒞` is indexed `(m, s, i)`. The moments themselves come from
//! [`field_integrals`]; this module only applies the prefactors and the
//! Levi-Civita bookkeeping.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;

use crate::domain::ContrastSet;
use crate::error::{Error, Result};
use crate::fem::{field_integrals, vartheta_energy_moment, DiscreteScalarField, DiscreteVectorField, IntegralKind, VectorProblem};
use crate::mesh::Region;
use crate::oracle::{polya_szego_sphere, sphere_c_check, sphere_mpt_full, SphereSeriesParams};
use crate::tensor::{levi_civita, Rank2TensorC, Rank3TensorC};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Where a bundle came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    /// `fem:<problem>` or `oracle:<name>`.
    pub source: String,
    pub contrasts: Option<ContrastSet>,
    pub alpha: f64,
    /// Free-space wavenumber (1/m).
    pub k: f64,
    pub mesh_cells: usize,
    pub mesh_edges: usize,
    pub solver: String,
    pub iterations: usize,
    pub residual: f64,
}

impl Provenance {
    pub fn oracle(name: &str, contrasts: Option<ContrastSet>, alpha: f64, k: f64) -> Self {
        Provenance {
            source: format!("oracle:{name}"),
            contrasts,
            alpha,
            k,
            mesh_cells: 0,
            mesh_edges: 0,
            solver: "series".into(),
            iterations: 0,
            residual: 0.0,
        }
    }

    fn from_fields(theta: &[DiscreteVectorField; 3], contrasts: Option<ContrastSet>, alpha: f64, k: f64) -> Self {
        let mesh = &theta[0].mesh;
        Provenance {
            source: format!("fem:{}", theta[0].problem.name()),
            contrasts,
            alpha,
            k,
            mesh_cells: mesh.cells.len(),
            mesh_edges: mesh.edges.len(),
            solver: theta[0].report.method.to_string(),
            iterations: theta.iter().map(|f| f.report.iterations).max().unwrap_or(0),
            residual: theta.iter().map(|f| f.report.residual).fold(0.0, f64::max),
        }
    }
}

/// All tensors of the field expansion for one object and frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorBundle {
    pub a: Rank2TensorC,
    pub b: Rank2TensorC,
    pub c: Rank3TensorC,
    pub c_check: Rank2TensorC,
    pub n: Rank2TensorC,
    pub m: Rank2TensorC,
    /// `‖R‖` of the non-skew remainder of `𝒞`.
    pub r_msi_norm: f64,
    pub provenance: Provenance,
}

/// Fields feeding `ℬ`: the scalar potentials `ϑᵢ` or the eddy-current `φᵢ`.
#[derive(Debug, Clone, Copy)]
pub enum BFields<'a> {
    Vartheta(&'a [DiscreteScalarField; 3]),
    Phi(&'a [DiscreteVectorField; 3]),
}

fn check_triple(fields: &[DiscreteVectorField; 3]) -> Result<()> {
    for (i, f) in fields.iter().enumerate() {
        if f.index != i {
            return Err(Error::usage(format!("field {i} solves for axis {}, expected {i}", f.index)));
        }
        if !Arc::ptr_eq(&f.mesh, &fields[0].mesh) {
            return Err(Error::usage("the three fields live on different meshes"));
        }
        if f.problem != fields[0].problem || f.mu_r != fields[0].mu_r || f.nu != fields[0].nu {
            return Err(Error::usage("the three fields solve different problems"));
        }
    }
    Ok(())
}

fn check_theta(fields: &[DiscreteVectorField; 3]) -> Result<()> {
    check_triple(fields)?;
    if fields[0].problem == VectorProblem::PhiEddy {
        return Err(Error::usage("θ tensors need θ fields, got φ fields"));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("α must be positive, got {alpha}")));
    }
    Ok(())
}

/// `𝒜_ri = (ikα⁴(ε_r−1)/2) e_r·∫_B(eᵢ×ξ + θᵢ)`.
pub fn assemble_a(theta: &[DiscreteVectorField; 3], cs: &ContrastSet, k: f64, alpha: f64) -> Result<Rank2TensorC> {
    check_theta(theta)?;
    check_alpha(alpha)?;
    let pre = Complex64::new(0.0, k * alpha.powi(4) / 2.0) * (cs.eps_r - 1.0);
    if pre == ZERO {
        return Ok(Rank2TensorC::zeros());
    }
    let mut out = Rank2TensorC::zeros();
    for (i, f) in theta.iter().enumerate() {
        let mom = field_integrals(f, IntegralKind::Moment)?;
        for r in 0..3 {
            out.0[r][i] = pre * mom[r];
        }
    }
    Ok(out)
}

/// `ℬ_ri = α³((ε_r−1)|B|δ_ri + (ε_r−1)² ∫_B ∂_r ϑᵢ)` from `ϑ`, or
/// `α³(ε_r−1) e_r·∫_B(eᵢ + φᵢ)` from eddy-current `φ` fields.
pub fn assemble_b(fields: BFields<'_>, eps_r: Complex64, alpha: f64) -> Result<Rank2TensorC> {
    check_alpha(alpha)?;
    let d = eps_r - 1.0;
    let a3 = alpha.powi(3);
    match fields {
        BFields::Vartheta(v) => {
            for (i, f) in v.iter().enumerate() {
                if f.index != i || !Arc::ptr_eq(&f.mesh, &v[0].mesh) {
                    return Err(Error::usage("ϑ fields must be axes 0, 1, 2 on one mesh"));
                }
                if f.eps_r != eps_r {
                    return Err(Error::usage(format!("ϑ fields were solved for ε_r = {}, not {eps_r}", f.eps_r)));
                }
            }
            if d == ZERO {
                return Ok(Rank2TensorC::zeros());
            }
            let vol = v[0].mesh.interior_volume();
            let mut out = Rank2TensorC::zeros();
            for r in 0..3 {
                for i in r..3 {
                    let g = vartheta_energy_moment(&v[r], &v[i])?;
                    let delta = if r == i { vol } else { 0.0 };
                    let val = (d * delta + d * d * g) * a3;
                    out.0[r][i] = val;
                    out.0[i][r] = val;
                }
            }
            Ok(out)
        }
        BFields::Phi(p) => {
            check_triple(p)?;
            if p[0].problem != VectorProblem::PhiEddy {
                return Err(Error::usage("ℬ from vector fields needs the φ problem"));
            }
            if d == ZERO {
                return Ok(Rank2TensorC::zeros());
            }
            let mut out = Rank2TensorC::zeros();
            for (i, f) in p.iter().enumerate() {
                let mom = field_integrals(f, IntegralKind::Moment)?;
                for r in 0..3 {
                    out.0[r][i] = d * a3 * mom[r];
                }
            }
            Ok(out)
        }
    }
}

/// `𝒞_msi = −(k²α⁵(ε_r−1)/2) e_s·∫_B ξ_m(eᵢ×ξ + θᵢ)`.
///
/// The prefactor is written `−ν α³ / 2` with the `ν` the fields were solved
/// with, which keeps the eddy-current limit (`k → 0`, `ε_r → ∞`) finite.
pub fn assemble_c(theta: &[DiscreteVectorField; 3], alpha: f64) -> Result<Rank3TensorC> {
    check_theta(theta)?;
    check_alpha(alpha)?;
    let nu = theta[0].nu;
    let mut out = Rank3TensorC::zeros();
    if nu == ZERO {
        return Ok(out);
    }
    let pre = -nu * alpha.powi(3) / 2.0;
    for (i, f) in theta.iter().enumerate() {
        for m in 0..3 {
            let mom = field_integrals(f, IntegralKind::CrossMoment(m))?;
            for s in 0..3 {
                out.0[m][s][i] = pre * mom[s];
            }
        }
    }
    Ok(out)
}

/// Splits `𝒞_msi = ε_msr Č_ri + R_msi` with `Č_ri = ½ ε_rms 𝒞_msi`.
pub fn skew_decompose_c(c: &Rank3TensorC) -> (Rank2TensorC, Rank3TensorC) {
    let check = Rank2TensorC::from_fn(|r, i| {
        let mut acc = ZERO;
        for m in 0..3 {
            for s in 0..3 {
                let e = levi_civita(r, m, s);
                if e != 0.0 {
                    acc += c.0[m][s][i] * e;
                }
            }
        }
        acc * 0.5
    });
    let rest = *c - Rank3TensorC::from_skew(&check);
    (check, rest)
}

/// `Č_ri = −(ν α³/4) e_r·∫_B ξ × (θᵢ + eᵢ×ξ)` evaluated directly; equal to
/// the projection of [`assemble_c`] up to rounding, kept as a diagnostic.
pub fn assemble_c_check_direct(theta: &[DiscreteVectorField; 3], alpha: f64) -> Result<Rank2TensorC> {
    check_theta(theta)?;
    check_alpha(alpha)?;
    let nu = theta[0].nu;
    let mut out = Rank2TensorC::zeros();
    for (i, f) in theta.iter().enumerate() {
        let ei = crate::tensor::unit(i);
        let v = f.integrate_interior(2, |x, th, _| {
            let o = crate::tensor::cross(&ei, x);
            let a = [th[0] + o[0], th[1] + o[1], th[2] + o[2]];
            crate::tensor::rccross(x, &a)
        });
        for r in 0..3 {
            out.0[r][i] = -nu * alpha.powi(3) / 4.0 * v[r];
        }
    }
    Ok(out)
}

/// `𝒩_ri = α³(1 − 1/μ_r) e_r·∫_B(eᵢ + ½∇×θᵢ)`.
pub fn assemble_n(theta: &[DiscreteVectorField; 3], mu_r: f64, alpha: f64) -> Result<Rank2TensorC> {
    check_theta(theta)?;
    check_alpha(alpha)?;
    if theta[0].mu_r != mu_r {
        return Err(Error::usage(format!("fields were solved for μ_r = {}, not {mu_r}", theta[0].mu_r)));
    }
    let pre = alpha.powi(3) * (1.0 - 1.0 / mu_r);
    let mut out = Rank2TensorC::zeros();
    if pre == 0.0 {
        return Ok(out);
    }
    for (i, f) in theta.iter().enumerate() {
        let mom = field_integrals(f, IntegralKind::CurlMoment)?;
        for r in 0..3 {
            out.0[r][i] = mom[r] * pre;
        }
    }
    Ok(out)
}

/// `ℳ = 𝒩 − Č`.
pub fn assemble_m(n: &Rank2TensorC, c_check: &Rank2TensorC) -> Rank2TensorC {
    *n - *c_check
}

/// `ℳ` through the manifestly symmetric bilinear form, with an estimate
/// of the exterior integral cut off at the truncation boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricForm {
    pub m: Rank2TensorC,
    pub tail_estimate: f64,
}

/// Symmetric-form `ℳ`.
///
/// Inside `B` the term `∇×μ_r⁻¹∇×θᵢ` is replaced by its value from the
/// interior equation, `k²α²ε_r θᵢ + ν eᵢ×ξ` (lowest-order fields have a
/// piecewise-constant curl, so the second curl is not available
/// elementwise). For eddy-current fields `ε_r/(ε_r−1) → 1`,
/// `k²α²ε_r → ν` and `k²α² → 0`.
pub fn assemble_m_symmetric(theta: &[DiscreteVectorField; 3], cs: &ContrastSet, alpha: f64) -> Result<SymmetricForm> {
    check_theta(theta)?;
    check_alpha(alpha)?;
    let f0 = &theta[0];
    let nu = f0.nu;
    if nu == ZERO {
        return Err(Error::domain("ν = 0: the symmetric form is singular; use 𝒩 from the static fields"));
    }
    let (ratio, m_in, m_out) = match f0.problem {
        VectorProblem::Eddy => (Complex64::new(1.0, 0.0), nu, 0.0),
        VectorProblem::Full | VectorProblem::LowFrequency => {
            let d = cs.eps_r - 1.0;
            if d.norm() == 0.0 {
                return Err(Error::domain("ε_r = 1: the symmetric form is singular; use the direct assembly"));
            }
            let ka2 = f0.k_alpha * f0.k_alpha;
            (cs.eps_r / d, cs.eps_r * ka2, ka2)
        }
        VectorProblem::Static | VectorProblem::PhiEddy => {
            return Err(Error::usage("the symmetric form needs θ fields with ν ≠ 0"))
        }
    };
    let mesh = &f0.mesh;
    let mu_r = f0.mu_r;
    let jump = 1.0 - 1.0 / mu_r;
    let vol = mesh.interior_volume();

    // pairwise integrals, accumulated per cell
    let mut curl_all = [[ZERO; 3]; 3]; // ∫ μ̃⁻¹ ∇×θᵢ·∇×θ_r over the whole mesh
    let mut th_in = [[ZERO; 3]; 3]; // ∫_B θᵢ·θ_r
    let mut th_out = [[ZERO; 3]; 3]; // ∫_{Bᶜ} θᵢ·θ_r
    let mut src_in = [[ZERO; 3]; 3]; // ∫_B (m_in θᵢ + ν eᵢ×ξ)·(m_in θ_r + ν e_r×ξ)
    let mut curl_e = [[ZERO; 3]; 3]; // ∫_B e_r·∇×θᵢ
    for c in 0..mesh.cells.len() {
        let interior = mesh.regions[c] == Region::Interior;
        let t = f0.tet(c);
        let coeffs: [_; 3] = std::array::from_fn(|i| theta[i].cell_coeffs(c));
        let curls: [_; 3] = std::array::from_fn(|i| t.eval_curl(&coeffs[i]));
        let vol_c = mesh.cell_volume(c);
        let nu_inv = if interior { 1.0 / mu_r } else { 1.0 };
        for i in 0..3 {
            for r in 0..3 {
                curl_all[i][r] += crate::tensor::cdot(&curls[i], &curls[r]) * (nu_inv * vol_c);
                if interior {
                    curl_e[r][i] += curls[i][r] * vol_c;
                }
            }
        }
        for (l, w) in t.quadrature(2) {
            let x = t.point(&l);
            let vals: [_; 3] = std::array::from_fn(|i| t.eval_field(&coeffs[i], &l));
            let src: [[Complex64; 3]; 3] = std::array::from_fn(|i| {
                let o = crate::tensor::cross(&crate::tensor::unit(i), &x);
                std::array::from_fn(|j| m_in * vals[i][j] + nu * o[j])
            });
            for i in 0..3 {
                for r in 0..3 {
                    let tt = crate::tensor::cdot(&vals[i], &vals[r]) * w;
                    if interior {
                        th_in[i][r] += tt;
                        src_in[i][r] += crate::tensor::cdot(&src[i], &src[r]) * w;
                    } else {
                        th_out[i][r] += tt;
                    }
                }
            }
        }
    }

    let m = Rank2TensorC::from_fn(|r, i| {
        let delta = if r == i { 1.0 } else { 0.0 };
        let v = src_in[i][r] / (4.0 * nu) + curl_all[i][r] / 4.0 + jump * vol * delta
            - (m_in * th_in[i][r] + m_out * th_out[i][r]) / 4.0
            - ratio / 2.0 * (curl_all[i][r] - m_out * th_out[i][r] - jump * (curl_e[r][i] + curl_e[i][r]))
            + ratio / 4.0 * m_in * th_in[i][r];
        v * alpha.powi(3)
    });
    // enforce exact symmetry of the discrete sums (they already agree to rounding)
    let m = Rank2TensorC::from_fn(|r, i| (m.0[r][i] + m.0[i][r]) * 0.5);

    // the exterior θ·θ integrand decays like |ξ|⁻² at best; one more shell
    // of the truncated domain bounds what is missing
    let tail_estimate = if m_out == 0.0 {
        0.0
    } else {
        let outer_radius = mesh.vertices.iter().map(|v| crate::tensor::norm(v)).fold(0.0, f64::max);
        let edge = th_out.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        let shell = (ratio.norm() + 1.0) * m_out * edge / outer_radius.max(1.0);
        shell * alpha.powi(3) / 4.0
    };
    Ok(SymmetricForm { m, tail_estimate })
}

impl TensorBundle {
    /// Assembles everything from three `θ` fields and the matching `ℬ` fields.
    pub fn assemble(
        theta: &[DiscreteVectorField; 3],
        b_fields: Option<BFields<'_>>,
        cs: &ContrastSet,
        k: f64,
        alpha: f64,
    ) -> Result<Self> {
        check_theta(theta)?;
        let a = assemble_a(theta, cs, k, alpha)?;
        let b = match b_fields {
            Some(f) => assemble_b(f, cs.eps_r, alpha)?,
            None => Rank2TensorC::zeros(),
        };
        let c = assemble_c(theta, alpha)?;
        let (c_check, rest) = skew_decompose_c(&c);
        let n = assemble_n(theta, theta[0].mu_r, alpha)?;
        let m = assemble_m(&n, &c_check);
        let bundle = TensorBundle {
            a,
            b,
            c,
            c_check,
            n,
            m,
            r_msi_norm: rest.norm(),
            provenance: Provenance::from_fields(theta, Some(*cs), alpha, k),
        };
        bundle.validate()?;
        Ok(bundle)
    }

    /// Exact tensors of the sphere from the series solution: `𝒜 = 0` and
    /// `R = 0` by symmetry, `ℬ` the Pólya-Szegö tensor for `ε_r` (zero
    /// for eddy-current parameters), `ℳ = m𝕀`, `Č = č𝕀`.
    pub fn sphere_oracle(p: &SphereSeriesParams, alpha: f64, k: f64) -> Result<Self> {
        let m = sphere_mpt_full(p, alpha)?;
        let cc = sphere_c_check(p, alpha)?;
        let eddy = p.k_alpha == 0.0;
        let b = if eddy { Rank2TensorC::zeros() } else { polya_szego_sphere(p.eps_r, alpha)? };
        let c_check = Rank2TensorC::scalar(cc);
        let n = Rank2TensorC::scalar(m + cc);
        let nu = p.nu();
        let contrasts = ContrastSet { eps_r: p.eps_r, mu_r: p.mu_r, nu, nu_r: nu.re, nu_i: nu.im, k_alpha: p.k_alpha };
        let name = if eddy { "sphere-eddy" } else { "sphere-full" };
        let bundle = TensorBundle {
            a: Rank2TensorC::zeros(),
            b,
            c: Rank3TensorC::from_skew(&c_check),
            c_check,
            n,
            // formed as 𝒩 − Č so the bundle identity holds bit for bit
            m: assemble_m(&n, &c_check),
            r_msi_norm: 0.0,
            provenance: Provenance::oracle(name, Some(contrasts), alpha, k),
        };
        bundle.validate()?;
        Ok(bundle)
    }

    /// All-zero bundle.
    pub fn zeros(provenance: Provenance) -> Self {
        TensorBundle {
            a: Rank2TensorC::zeros(),
            b: Rank2TensorC::zeros(),
            c: Rank3TensorC::zeros(),
            c_check: Rank2TensorC::zeros(),
            n: Rank2TensorC::zeros(),
            m: Rank2TensorC::zeros(),
            r_msi_norm: 0.0,
            provenance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [&self.a, &self.b, &self.c_check, &self.n, &self.m].iter().all(|t| t.is_finite())
            && self.c.is_finite()
            && self.r_msi_norm.is_finite();
        if !finite {
            return Err(Error::domain("tensor bundle has non-finite entries"));
        }
        if assemble_m(&self.n, &self.c_check) != self.m {
            return Err(Error::domain("tensor bundle violates ℳ = 𝒩 − Č"));
        }
        Ok(())
    }

    /// Plain-text block with 17 significant digits per real number.
    pub fn to_text(&self) -> String {
        let p = &self.provenance;
        let f = |x: f64| format!("{x:.16e}");
        let mut s = String::new();
        s.push_str("# mptensor tensor bundle v1\n");
        let _ = writeln!(s, "source {}", p.source);
        let _ = writeln!(s, "alpha {}", f(p.alpha));
        let _ = writeln!(s, "k {}", f(p.k));
        match &p.contrasts {
            Some(cs) => {
                let _ = writeln!(s, "eps_r {} {}", f(cs.eps_r.re), f(cs.eps_r.im));
                let _ = writeln!(s, "mu_r {}", f(cs.mu_r));
                let _ = writeln!(s, "nu {} {}", f(cs.nu.re), f(cs.nu.im));
                let _ = writeln!(s, "nu_r {}", f(cs.nu_r));
                let _ = writeln!(s, "nu_i {}", f(cs.nu_i));
                let _ = writeln!(s, "k_alpha {}", f(cs.k_alpha));
            }
            None => s.push_str("contrasts none\n"),
        }
        let _ = writeln!(s, "mesh_cells {}", p.mesh_cells);
        let _ = writeln!(s, "mesh_edges {}", p.mesh_edges);
        let _ = writeln!(s, "solver {}", p.solver);
        let _ = writeln!(s, "iterations {}", p.iterations);
        let _ = writeln!(s, "residual {}", f(p.residual));
        let _ = writeln!(s, "r_msi_norm {}", f(self.r_msi_norm));
        for (name, t) in [("A", &self.a), ("B", &self.b), ("C_check", &self.c_check), ("N", &self.n), ("M", &self.m)] {
            let _ = writeln!(s, "tensor {name}");
            for row in &t.0 {
                let cells: Vec<String> = row.iter().map(|z| format!("{} {}", f(z.re), f(z.im))).collect();
                let _ = writeln!(s, "{}", cells.join(" "));
            }
        }
        s.push_str("tensor C\n");
        for m in 0..3 {
            for si in 0..3 {
                let cells: Vec<String> = (0..3).map(|i| {
                    let z = self.c.0[m][si][i];
                    format!("{} {}", f(z.re), f(z.im))
                }).collect();
                let _ = writeln!(s, "{}", cells.join(" "));
            }
        }
        s
    }

    /// Inverse of [`TensorBundle::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let mut pos = 0;
        let mut next = |key: &str| -> Result<(usize, Vec<&str>)> {
            let (n, l) = *lines.get(pos).ok_or(Error::Parse { line: 0, msg: format!("missing '{key}'") })?;
            pos += 1;
            let mut it = l.split_whitespace();
            if it.next() != Some(key) {
                return Err(Error::Parse { line: n, msg: format!("expected '{key}'") });
            }
            Ok((n, it.collect()))
        };
        fn num(line: usize, s: Option<&&str>) -> Result<f64> {
            s.ok_or(Error::Parse { line, msg: "missing number".into() })?
                .parse()
                .map_err(|e| Error::Parse { line, msg: format!("bad number: {e}") })
        }
        let (_, source) = next("source")?;
        let source = source.join(" ");
        let (l, v) = next("alpha")?;
        let alpha = num(l, v.first())?;
        let (l, v) = next("k")?;
        let k = num(l, v.first())?;
        // contrasts are optional
        let contrasts = {
            let peek = lines.get(pos).map(|(_, l)| *l).unwrap_or("");
            if peek.starts_with("contrasts") {
                pos += 1;
                None
            } else {
                let mut next = |key: &str| -> Result<(usize, Vec<&str>)> {
                    let (n, l) = *lines.get(pos).ok_or(Error::Parse { line: 0, msg: format!("missing '{key}'") })?;
                    pos += 1;
                    let mut it = l.split_whitespace();
                    if it.next() != Some(key) {
                        return Err(Error::Parse { line: n, msg: format!("expected '{key}'") });
                    }
                    Ok((n, it.collect()))
                };
                let (l, v) = next("eps_r")?;
                let eps_r = Complex64::new(num(l, v.first())?, num(l, v.get(1))?);
                let (l, v) = next("mu_r")?;
                let mu_r = num(l, v.first())?;
                let (l, v) = next("nu")?;
                let nu = Complex64::new(num(l, v.first())?, num(l, v.get(1))?);
                let (l, v) = next("nu_r")?;
                let nu_r = num(l, v.first())?;
                let (l, v) = next("nu_i")?;
                let nu_i = num(l, v.first())?;
                let (l, v) = next("k_alpha")?;
                let k_alpha = num(l, v.first())?;
                Some(ContrastSet { eps_r, mu_r, nu, nu_r, nu_i, k_alpha })
            }
        };
        let mut next = |key: &str| -> Result<(usize, Vec<&str>)> {
            let (n, l) = *lines.get(pos).ok_or(Error::Parse { line: 0, msg: format!("missing '{key}'") })?;
            pos += 1;
            let mut it = l.split_whitespace();
            if key.is_empty() {
                return Ok((n, l.split_whitespace().collect()));
            }
            if it.next() != Some(key) {
                return Err(Error::Parse { line: n, msg: format!("expected '{key}'") });
            }
            Ok((n, it.collect()))
        };
        let int = |line: usize, s: Option<&&str>| -> Result<usize> {
            s.ok_or(Error::Parse { line, msg: "missing integer".into() })?
                .parse()
                .map_err(|e| Error::Parse { line, msg: format!("bad integer: {e}") })
        };
        let (l, v) = next("mesh_cells")?;
        let mesh_cells = int(l, v.first())?;
        let (l, v) = next("mesh_edges")?;
        let mesh_edges = int(l, v.first())?;
        let (_, v) = next("solver")?;
        let solver = v.join(" ");
        let (l, v) = next("iterations")?;
        let iterations = int(l, v.first())?;
        let (l, v) = next("residual")?;
        let residual = num(l, v.first())?;
        let (l, v) = next("r_msi_norm")?;
        let r_msi_norm = num(l, v.first())?;
        let mut rank2 = |name: &str| -> Result<Rank2TensorC> {
            let (l, v) = next("tensor")?;
            if v.first() != Some(&name) {
                return Err(Error::Parse { line: l, msg: format!("expected tensor {name}") });
            }
            let mut t = Rank2TensorC::zeros();
            for r in 0..3 {
                let (l, v) = next("")?;
                if v.len() != 6 {
                    return Err(Error::Parse { line: l, msg: "expected 6 numbers".into() });
                }
                for i in 0..3 {
                    t.0[r][i] = Complex64::new(num(l, v.get(2 * i))?, num(l, v.get(2 * i + 1))?);
                }
            }
            Ok(t)
        };
        let a = rank2("A")?;
        let b = rank2("B")?;
        let c_check = rank2("C_check")?;
        let n = rank2("N")?;
        let m = rank2("M")?;
        let (l, v) = next("tensor")?;
        if v.first() != Some(&"C") {
            return Err(Error::Parse { line: l, msg: "expected tensor C".into() });
        }
        let mut c = Rank3TensorC::zeros();
        for mm in 0..3 {
            for s in 0..3 {
                let (l, v) = next("")?;
                if v.len() != 6 {
                    return Err(Error::Parse { line: l, msg: "expected 6 numbers".into() });
                }
                for i in 0..3 {
                    c.0[mm][s][i] = Complex64::new(num(l, v.get(2 * i))?, num(l, v.get(2 * i + 1))?);
                }
            }
        }
        let bundle = TensorBundle {
            a,
            b,
            c,
            c_check,
            n,
            m,
            r_msi_norm,
            provenance: Provenance { source, contrasts, alpha, k, mesh_cells, mesh_edges, solver, iterations, residual },
        };
        bundle.validate()?;
        Ok(bundle)
    }
}

/// `4π α³` — the magnitude of a sphere's `ℳ` in the perfect-conductor and
/// infinite-permeability limits, used to normalise diagnostics.
pub fn sphere_scale(alpha: f64) -> f64 {
    4.0 * PI * alpha.powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn skew_decompose_recovers_planted_tensor() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let planted = Rank2TensorC::from_fn(|_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let (got, rest) = skew_decompose_c(&Rank3TensorC::from_skew(&planted));
            assert!((got - planted).max_abs() <= 1e-14);
            assert!(rest.norm() <= 1e-14);
        }
        let (z, r) = skew_decompose_c(&Rank3TensorC::zeros());
        assert_eq!(z, Rank2TensorC::zeros());
        assert_eq!(r.norm(), 0.0);
    }

    #[test]
    fn remainder_is_orthogonal_to_the_skew_part() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = Rank3TensorC::from_fn(|_, _, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let (_, rest) = skew_decompose_c(&t);
        let (again, _) = skew_decompose_c(&rest);
        assert!(again.max_abs() < 1e-15);
    }

    #[test]
    fn oracle_bundle_is_consistent() {
        let p = SphereSeriesParams::eddy(100.0, 10.0).unwrap();
        let b = TensorBundle::sphere_oracle(&p, 0.01, 1e-4).unwrap();
        assert!(b.m.symmetry_defect() <= 1e-8);
        assert_eq!(b.a, Rank2TensorC::zeros());
        let (cc, rest) = skew_decompose_c(&b.c);
        assert!((cc - b.c_check).max_abs() <= 1e-14 * b.c_check.max_abs());
        assert!(rest.norm() <= 1e-14 * b.c.norm());
        // static limit: Č → 0 and 𝒩 → ℳ
        let p0 = SphereSeriesParams::eddy(100.0, 0.0).unwrap();
        let b0 = TensorBundle::sphere_oracle(&p0, 1.0, 0.0).unwrap();
        assert_eq!(b0.c_check, Rank2TensorC::zeros());
        assert!((b0.n.0[0][0] - 4.0 * PI * 99.0 / 102.0).norm() < 1e-12);
    }

    #[test]
    fn text_round_trip_is_exact() {
        let p = SphereSeriesParams::full(3.0, c(4.0, 2.5), 0.2).unwrap();
        let mut b = TensorBundle::sphere_oracle(&p, 0.01, 20.0).unwrap();
        b.provenance.contrasts =
            Some(ContrastSet { eps_r: c(4.0, 2.5), mu_r: 3.0, nu: c(0.12, 0.1), nu_r: 0.12, nu_i: 0.1, k_alpha: 0.2 });
        b.a = Rank2TensorC::from_fn(|r, i| c(r as f64 * 1e-7 + 1.0 / 3.0, i as f64 - 0.1));
        let text = b.to_text();
        let back = TensorBundle::from_text(&text).unwrap();
        assert_eq!(back, b);
        let z = TensorBundle::zeros(Provenance::oracle("zero", None, 1.0, 0.0));
        assert_eq!(TensorBundle::from_text(&z.to_text()).unwrap(), z);
        assert!(TensorBundle::from_text("source x\nalpha nope\n").is_err());
    }
}
