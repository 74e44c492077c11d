//! Finite-element solution of the unit-domain transmission problems.
//!
//! The vector problems use lowest-order edge elements on the truncated mesh;
//! the scalar problem for `ϑᵢ` uses continuous piecewise-linear elements.
//! All bilinear forms are complex symmetric (no conjugation), so the
//! discrete systems are complex symmetric as well.
//!
//! Outer-boundary treatment: for `kα ≥ 10⁻⁶` the first-order absorbing
//! condition `n×(∇×θ) = −ikα θ_T` is imposed weakly; below that threshold,
//! and for the eddy-current and magnetostatic problems, `θ_T = 0` is imposed
//! strongly and the gradient kernel of the exterior curl-curl operator is
//! lifted by a small real mass shift.

pub mod element;
mod linear;
mod sparse;

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

pub use linear::LinearSolveReport;
pub use sparse::CsrMatrix;

use crate::domain::ContrastSet;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Region};
use crate::tensor::{self, CVec3, Vec3};
use element::{face_midpoints, Tet, CELL_DOFS};

/// Below this `kα` the full problem is solved with the low-frequency
/// (non-radiating) operator.
pub const BRANCH_K_ALPHA: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearMethod {
    /// Block-preconditioned GMRES for the eddy-current and magnetostatic
    /// operators; otherwise COCG first, sparse LU if it does not converge.
    Auto,
    Iterative,
    Direct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    /// Relative residual target, in (0, 10⁻³].
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Mass shift for static and eddy kernels, relative to the ratio of the
    /// stiffness and mass diagonals.
    pub regularization: f64,
    /// Polynomial degree integrated exactly by the cell rule (≥ 2).
    pub quadrature_order: usize,
    pub method: LinearMethod,
    /// SSOR relaxation factor in (0, 2).
    pub ssor_omega: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            tolerance: 1e-10,
            max_iterations: 3000,
            regularization: 1e-8,
            quadrature_order: 2,
            method: LinearMethod::Auto,
            ssor_omega: 1.0,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-3) {
            return Err(Error::domain(format!("solver tolerance must lie in (0, 1e-3], got {}", self.tolerance)));
        }
        if self.quadrature_order < 2 {
            return Err(Error::domain("quadrature order must be at least 2"));
        }
        if !(self.regularization >= 0.0) {
            return Err(Error::domain("regularization must be non-negative"));
        }
        if !(self.ssor_omega > 0.0 && self.ssor_omega < 2.0) {
            return Err(Error::domain("SSOR relaxation must lie in (0, 2)"));
        }
        if self.max_iterations == 0 && self.method == LinearMethod::Iterative {
            return Err(Error::domain("iterative solves need max_iterations > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorProblem {
    /// `θᵢ` with the full interior mass term and an absorbing outer boundary.
    Full,
    /// `θᵢ` of the full model below [`BRANCH_K_ALPHA`]: interior mass `ν`,
    /// static exterior.
    LowFrequency,
    /// `θᵢ` in the eddy-current regime.
    Eddy,
    /// Magnetostatic `θᵢ`.
    Static,
    /// `φᵢ` in the eddy-current regime (source `iν_i eᵢ`, no interface datum).
    PhiEddy,
}

impl VectorProblem {
    pub fn name(&self) -> &'static str {
        match self {
            VectorProblem::Full => "theta_full",
            VectorProblem::LowFrequency => "theta_low_frequency",
            VectorProblem::Eddy => "theta_eddy",
            VectorProblem::Static => "theta_static",
            VectorProblem::PhiEddy => "phi_eddy",
        }
    }
}

/// Solved edge-element field with its provenance.
#[derive(Debug, Clone)]
pub struct DiscreteVectorField {
    pub mesh: Arc<Mesh>,
    /// Two coefficients per global edge: the Whitney coefficients of all
    /// edges, then the edge-bubble gradient coefficients (zero on
    /// constrained edges).
    pub coeffs: Vec<Complex64>,
    /// Axis index 0..3.
    pub index: usize,
    pub problem: VectorProblem,
    pub mu_r: f64,
    /// Interior source coefficient `ν` (`iν_i` in the eddy problems).
    pub nu: Complex64,
    pub k_alpha: f64,
    pub report: LinearSolveReport,
    /// Largest `|∫θ·∇λ_v|` over vertices off Γ and off the truncation
    /// sphere, relative to the largest `∫|θ||∇λ_v|`.
    pub weak_divergence: f64,
}

/// Which moment of a vector field to integrate over B.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralKind {
    /// `∫_B (offset + field)` where the offset is `eᵢ×ξ` for `θ` and `eᵢ` for `φ`.
    Moment,
    /// `∫_B (eᵢ + ½∇×θᵢ)`.
    CurlMoment,
    /// `∫_B ξ_m (eᵢ×ξ + θᵢ)` for the given `m` in 0..3.
    CrossMoment(usize),
}

impl IntegralKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "moment" => Ok(IntegralKind::Moment),
            "curl_moment" => Ok(IntegralKind::CurlMoment),
            "cross_moment_1" => Ok(IntegralKind::CrossMoment(0)),
            "cross_moment_2" => Ok(IntegralKind::CrossMoment(1)),
            "cross_moment_3" => Ok(IntegralKind::CrossMoment(2)),
            _ => Err(Error::usage(format!("unknown integral kind '{s}'"))),
        }
    }
}

impl DiscreteVectorField {
    pub fn cell_coeffs(&self, c: usize) -> [Complex64; CELL_DOFS] {
        cell_dofs(&self.mesh, c).map(|d| self.coeffs[d])
    }

    pub fn tet(&self, c: usize) -> Tet {
        Tet::new(self.mesh.cell_vertices(c))
    }

    /// The known part added to the field inside the moments.
    pub fn offset(&self, x: &Vec3) -> Vec3 {
        let e = tensor::unit(self.index);
        match self.problem {
            VectorProblem::PhiEddy => e,
            _ => tensor::cross(&e, x),
        }
    }

    /// Field value at point `x` inside cell `c`.
    pub fn value_at(&self, c: usize, x: &Vec3) -> CVec3 {
        let t = self.tet(c);
        t.eval_field(&self.cell_coeffs(c), &t.barycentric(x))
    }

    pub fn curl_in_cell(&self, c: usize) -> CVec3 {
        self.tet(c).eval_curl(&self.cell_coeffs(c))
    }

    /// Quadrature over interior cells of `f(x, θ(x), ∇×θ)`.
    pub fn integrate_interior(&self, order: usize, f: impl Fn(&Vec3, &CVec3, &CVec3) -> CVec3) -> CVec3 {
        let mut acc = tensor::czero();
        for c in 0..self.mesh.cells.len() {
            if self.mesh.regions[c] != Region::Interior {
                continue;
            }
            let t = self.tet(c);
            let coeffs = self.cell_coeffs(c);
            let curl = t.eval_curl(&coeffs);
            for (l, w) in t.quadrature(order) {
                let x = t.point(&l);
                let v = t.eval_field(&coeffs, &l);
                let g = f(&x, &v, &curl);
                for j in 0..3 {
                    acc[j] += g[j] * w;
                }
            }
        }
        acc
    }

    /// Largest jump of the tangential trace across Γ, sampled at face
    /// centroids, relative to the largest sampled tangential value.
    pub fn tangential_jump(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for f in &self.mesh.interface_faces {
            let x = {
                let v = f.verts.map(|i| self.mesh.vertices[i]);
                [0, 1, 2].map(|j| (v[0][j] + v[1][j] + v[2][j]) / 3.0)
            };
            let tangential = |c: usize| {
                let v = self.value_at(c, &x);
                let vn = tensor::rcdot(&f.normal, &v);
                [0, 1, 2].map(|j| v[j] - vn * f.normal[j])
            };
            let a = tangential(f.inner);
            let b = tangential(f.outer.expect("interface face has two cells"));
            worst = worst.max(tensor::cnorm(&tensor::csub(&a, &b)));
            scale = scale.max(tensor::cnorm(&a));
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }
}

/// Quadrature evaluation of one of the moments used by the tensor formulas,
/// over interior cells only.
pub fn field_integrals(field: &DiscreteVectorField, kind: IntegralKind) -> Result<CVec3> {
    let order = 2;
    let ei = tensor::unit(field.index);
    Ok(match kind {
        IntegralKind::Moment => field.integrate_interior(order, |x, v, _| {
            let o = field.offset(x);
            [0, 1, 2].map(|j| v[j] + o[j])
        }),
        IntegralKind::CurlMoment => field.integrate_interior(order, |_, _, curl| {
            [0, 1, 2].map(|j| curl[j] * 0.5 + ei[j])
        }),
        IntegralKind::CrossMoment(m) => {
            if m >= 3 {
                return Err(Error::usage(format!("cross moment index {m} out of range")));
            }
            field.integrate_interior(order, |x, v, _| {
                let o = tensor::cross(&ei, x);
                [0, 1, 2].map(|j| (v[j] + o[j]) * x[m])
            })
        }
    })
}

/// Solved nodal field `ϑᵢ`.
#[derive(Debug, Clone)]
pub struct DiscreteScalarField {
    pub mesh: Arc<Mesh>,
    pub coeffs: Vec<Complex64>,
    pub index: usize,
    pub eps_r: Complex64,
    pub report: LinearSolveReport,
}

impl DiscreteScalarField {
    pub fn gradient_in_cell(&self, c: usize) -> CVec3 {
        let t = Tet::new(self.mesh.cell_vertices(c));
        let v = self.mesh.cells[c];
        let mut g = tensor::czero();
        for a in 0..4 {
            for j in 0..3 {
                g[j] += self.coeffs[v[a]] * t.grads[a][j];
            }
        }
        g
    }

    /// `∫_B ∇ϑᵢ`.
    pub fn interior_gradient_integral(&self) -> CVec3 {
        let mut acc = tensor::czero();
        for c in 0..self.mesh.cells.len() {
            if self.mesh.regions[c] == Region::Interior {
                let g = self.gradient_in_cell(c);
                let vol = self.mesh.cell_volume(c);
                for j in 0..3 {
                    acc[j] += g[j] * vol;
                }
            }
        }
        acc
    }

    pub fn value_at(&self, c: usize, x: &Vec3) -> Complex64 {
        let t = Tet::new(self.mesh.cell_vertices(c));
        let l = t.barycentric(x);
        let v = self.mesh.cells[c];
        (0..4).map(|a| self.coeffs[v[a]] * l[a]).sum()
    }
}

/// `∫_B ∂_r ϑᵢ` through the symmetric energy form `−ϑᵢᵀ K ϑ_r`, where `K` is
/// the discrete operator of the scalar problem; exactly symmetric in `(r, i)`.
pub fn vartheta_energy_moment(a: &DiscreteScalarField, b: &DiscreteScalarField) -> Result<Complex64> {
    if !Arc::ptr_eq(&a.mesh, &b.mesh) || a.eps_r != b.eps_r {
        return Err(Error::usage("scalar fields must share mesh and permittivity"));
    }
    let mesh = &a.mesh;
    let mut acc = ZERO;
    for c in 0..mesh.cells.len() {
        let eps = if mesh.regions[c] == Region::Interior { a.eps_r } else { Complex64::new(1.0, 0.0) };
        let ga = a.gradient_in_cell(c);
        let gb = b.gradient_in_cell(c);
        acc += eps * tensor::cdot(&ga, &gb) * mesh.cell_volume(c);
    }
    Ok(-acc)
}

// ---------------------------------------------------------------------------
// vector problems

#[derive(Debug, Clone, Copy)]
struct VectorOperator {
    problem: VectorProblem,
    mu_r: f64,
    interior_mass: Complex64,
    exterior_mass: Complex64,
    /// `kα` of the absorbing condition, `None` for a strong `θ_T = 0`.
    absorbing: Option<f64>,
    shifted: bool,
    /// `ν` multiplying the interior source.
    nu: Complex64,
    k_alpha: f64,
}

impl VectorOperator {
    fn full(cs: &ContrastSet) -> Self {
        let k2a2 = cs.k_alpha * cs.k_alpha;
        if cs.k_alpha < BRANCH_K_ALPHA {
            return VectorOperator {
                problem: VectorProblem::LowFrequency,
                mu_r: cs.mu_r,
                interior_mass: -cs.nu,
                exterior_mass: ZERO,
                absorbing: None,
                shifted: true,
                nu: cs.nu,
                k_alpha: cs.k_alpha,
            };
        }
        VectorOperator {
            problem: VectorProblem::Full,
            mu_r: cs.mu_r,
            interior_mass: -cs.eps_r * k2a2,
            exterior_mass: Complex64::new(-k2a2, 0.0),
            absorbing: Some(cs.k_alpha),
            shifted: false,
            nu: cs.nu,
            k_alpha: cs.k_alpha,
        }
    }

    fn eddy(problem: VectorProblem, nu_i: f64, mu_r: f64) -> Self {
        let nu = Complex64::new(0.0, nu_i);
        VectorOperator {
            problem,
            mu_r,
            interior_mass: -nu,
            exterior_mass: ZERO,
            absorbing: None,
            shifted: true,
            nu,
            k_alpha: 0.0,
        }
    }
}

struct VectorSystem {
    matrix: CsrMatrix,
    /// Global slot (see `cell_dofs`) -> unknown index, `-1` when constrained.
    dof: Vec<isize>,
}

fn assemble_vector(mesh: &Mesh, op: &VectorOperator, params: &SolverParams) -> VectorSystem {
    let essential = op.absorbing.is_none();
    let on_boundary = mesh.boundary_edges();
    let ne = mesh.edges.len();
    // Bubble gradients are only needed where the field can vary on a scale
    // below the mesh size (skin layers inside B); elsewhere the Whitney part
    // suffices. The basis is hierarchical, so dropping them stays conforming.
    let mut enriched = vec![false; ne];
    for (c, ce) in mesh.cell_edges.iter().enumerate() {
        if mesh.regions[c] == Region::Interior {
            for &e in ce {
                enriched[e] = true;
            }
        }
    }
    let mut dof = vec![-1isize; 2 * ne];
    let mut n = 0usize;
    for d in 0..2 * ne {
        let e = d % ne;
        if !(essential && on_boundary[e]) && (d < ne || enriched[e]) {
            dof[d] = n as isize;
            n += 1;
        }
    }
    let groups: Vec<[isize; CELL_DOFS]> = (0..mesh.cells.len()).map(|c| cell_dofs(mesh, c).map(|d| dof[d])).collect();
    let mut a = CsrMatrix::from_groups(n, groups.iter().map(|g| &g[..]));

    let mut trace_s = 0.0;
    let mut trace_m = 0.0;
    let mut masses = Vec::with_capacity(if op.shifted { mesh.cells.len() } else { 0 });
    for (c, g) in groups.iter().enumerate() {
        let t = Tet::new(mesh.cell_vertices(c));
        let s = t.curl_curl();
        let m = t.mass();
        let (nu_inv, mass) = match mesh.regions[c] {
            Region::Interior => (1.0 / op.mu_r, op.interior_mass),
            Region::Exterior => (1.0, op.exterior_mass),
        };
        for i in 0..CELL_DOFS {
            trace_s += nu_inv * s[i][i];
            trace_m += m[i][i];
            if g[i] < 0 {
                continue;
            }
            for j in 0..CELL_DOFS {
                if g[j] < 0 {
                    continue;
                }
                a.add(g[i] as usize, g[j] as usize, mass * m[i][j] + nu_inv * s[i][j]);
            }
        }
        if op.shifted {
            masses.push(m);
        }
    }
    if op.shifted && params.regularization > 0.0 {
        let shift = params.regularization * trace_s / trace_m;
        for (g, m) in groups.iter().zip(&masses) {
            for i in 0..CELL_DOFS {
                for j in 0..CELL_DOFS {
                    if g[i] >= 0 && g[j] >= 0 {
                        a.add(g[i] as usize, g[j] as usize, Complex64::new(shift * m[i][j], 0.0));
                    }
                }
            }
        }
    }
    if let Some(ka) = op.absorbing {
        let coef = Complex64::new(0.0, -ka);
        for f in &mesh.outer_faces {
            let c = f.inner;
            let t = Tet::new(mesh.cell_vertices(c));
            let opp = (0..4).find(|&j| !f.verts.contains(&mesh.cells[c][j])).unwrap();
            let mut bm = [[0.0; CELL_DOFS]; CELL_DOFS];
            for l in face_midpoints(opp) {
                let w = t.basis(&l).map(|w| {
                    let wn = tensor::dot(&w, &f.normal);
                    tensor::sub(&w, &tensor::scale(&f.normal, wn))
                });
                for i in 0..CELL_DOFS {
                    for j in 0..CELL_DOFS {
                        bm[i][j] += f.area / 3.0 * tensor::dot(&w[i], &w[j]);
                    }
                }
            }
            let g = groups[c];
            for i in 0..CELL_DOFS {
                for j in 0..CELL_DOFS {
                    if g[i] >= 0 && g[j] >= 0 && bm[i][j] != 0.0 {
                        a.add(g[i] as usize, g[j] as usize, coef * bm[i][j]);
                    }
                }
            }
        }
    }
    VectorSystem { matrix: a, dof }
}

fn vector_rhs(mesh: &Mesh, op: &VectorOperator, dof: &[isize], n: usize, i: usize, order: usize) -> Vec<Complex64> {
    let mut b = vec![ZERO; n];
    let ei = tensor::unit(i);
    let phi = op.problem == VectorProblem::PhiEddy;
    if op.nu != ZERO {
        for c in 0..mesh.cells.len() {
            if mesh.regions[c] != Region::Interior {
                continue;
            }
            let t = Tet::new(mesh.cell_vertices(c));
            let mut local = [0.0; CELL_DOFS];
            for (l, w) in t.quadrature(order) {
                let x = t.point(&l);
                let src = if phi { ei } else { tensor::cross(&ei, &x) };
                let basis = t.basis(&l);
                for k in 0..CELL_DOFS {
                    local[k] += w * tensor::dot(&src, &basis[k]);
                }
            }
            for (k, d) in cell_dofs(mesh, c).iter().enumerate() {
                if dof[*d] >= 0 {
                    b[dof[*d] as usize] += op.nu * local[k];
                }
            }
        }
    }
    let jump = -2.0 * (1.0 - 1.0 / op.mu_r);
    if !phi && jump != 0.0 {
        for f in &mesh.interface_faces {
            let c = f.inner;
            let t = Tet::new(mesh.cell_vertices(c));
            let opp = (0..4).find(|&j| !f.verts.contains(&mesh.cells[c][j])).unwrap();
            let nxe = tensor::cross(&f.normal, &ei);
            let mut local = [0.0; CELL_DOFS];
            for l in face_midpoints(opp) {
                let basis = t.basis(&l);
                for k in 0..CELL_DOFS {
                    local[k] += f.area / 3.0 * tensor::dot(&nxe, &basis[k]);
                }
            }
            for (k, d) in cell_dofs(mesh, c).iter().enumerate() {
                if dof[*d] >= 0 {
                    b[dof[*d] as usize] += Complex64::new(jump * local[k], 0.0);
                }
            }
        }
    }
    b
}

/// Global unknown slots of cell `c`: Whitney slots are the edge numbers,
/// bubble-gradient slots follow after all edges.
fn cell_dofs(mesh: &Mesh, c: usize) -> [usize; CELL_DOFS] {
    let ce = mesh.cell_edges[c];
    let ne = mesh.edges.len();
    std::array::from_fn(|k| if k < 6 { ce[k] } else { ne + ce[k - 6] })
}

fn weak_divergence(mesh: &Mesh, coeffs: &[Complex64]) -> f64 {
    let mut skip = mesh.boundary_vertices();
    for f in &mesh.interface_faces {
        for v in f.verts {
            skip[v] = true;
        }
    }
    let mut d = vec![ZERO; mesh.vertices.len()];
    let mut s = vec![0.0; mesh.vertices.len()];
    for c in 0..mesh.cells.len() {
        let t = Tet::new(mesh.cell_vertices(c));
        let coef = cell_dofs(mesh, c).map(|d| coeffs[d]);
        for (l, w) in t.quadrature(2) {
            let v = t.eval_field(&coef, &l);
            let vn = tensor::cnorm(&v);
            for a in 0..4 {
                let gv = mesh.cells[c][a];
                d[gv] += tensor::rcdot(&t.grads[a], &v) * w;
                s[gv] += vn * tensor::norm(&t.grads[a]) * w;
            }
        }
    }
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for v in 0..d.len() {
        if !skip[v] {
            num = num.max(d[v].norm());
            den = den.max(s[v]);
        }
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn solve_vector(
    mesh: &Arc<Mesh>,
    op: VectorOperator,
    indices: &[usize],
    params: &SolverParams,
) -> Result<Vec<DiscreteVectorField>> {
    params.validate()?;
    if let Some(&i) = indices.iter().find(|&&i| i >= 3) {
        return Err(Error::domain(format!("axis index {i} out of range 0..3")));
    }
    let sys = assemble_vector(mesh, &op, params);
    let n = sys.matrix.n;
    let rhs: Vec<Vec<Complex64>> =
        indices.iter().map(|&i| vector_rhs(mesh, &op, &sys.dof, n, i, params.quadrature_order)).collect();
    let definite = matches!(op.problem, VectorProblem::Eddy | VectorProblem::Static | VectorProblem::PhiEddy);
    let solved = if definite && params.method == LinearMethod::Auto {
        match linear::solve_split(&sys.matrix, &rhs, params) {
            Ok(v) => v,
            Err(e) => {
                log::warn!("block-preconditioned solve failed ({e}); falling back");
                linear::solve_many(&sys.matrix, &rhs, params)?
            }
        }
    } else {
        linear::solve_many(&sys.matrix, &rhs, params)?
    };
    let fields: Vec<DiscreteVectorField> = solved
        .into_par_iter()
        .zip(indices.par_iter())
        .map(|((x, report), &i)| {
            let mut coeffs = vec![ZERO; 2 * mesh.edges.len()];
            for (e, d) in sys.dof.iter().enumerate() {
                if *d >= 0 {
                    coeffs[e] = x[*d as usize];
                }
            }
            let weak_divergence = weak_divergence(mesh, &coeffs);
            log::info!(
                "solve problem={} index={} method={} iterations={} residual={:.3e} condition_estimate={:.3e} unknowns={} seconds={:.3} weak_divergence={:.3e}",
                op.problem.name(),
                i,
                report.method,
                report.iterations,
                report.residual,
                report.condition_estimate,
                report.unknowns,
                report.seconds,
                weak_divergence
            );
            DiscreteVectorField {
                mesh: Arc::clone(mesh),
                coeffs,
                index: i,
                problem: op.problem,
                mu_r: op.mu_r,
                nu: op.nu,
                k_alpha: op.k_alpha,
                report,
                weak_divergence,
            }
        })
        .collect();
    Ok(fields)
}

fn three(v: Vec<DiscreteVectorField>) -> [DiscreteVectorField; 3] {
    v.try_into().expect("three axis solves")
}

fn check_mu(mu_r: f64) -> Result<()> {
    if !(mu_r > 0.0 && mu_r.is_finite()) {
        return Err(Error::domain(format!("relative permeability must be positive, got {mu_r}")));
    }
    Ok(())
}

/// `θᵢ` for the full model; below [`BRANCH_K_ALPHA`] the low-frequency
/// operator is used.
pub fn solve_theta_full(i: usize, cs: &ContrastSet, mesh: &Arc<Mesh>, params: &SolverParams) -> Result<DiscreteVectorField> {
    Ok(solve_vector(mesh, full_operator(cs)?, &[i], params)?.remove(0))
}

/// All three `θᵢ` of the full model, sharing one assembled operator.
pub fn solve_theta_full_all(cs: &ContrastSet, mesh: &Arc<Mesh>, params: &SolverParams) -> Result<[DiscreteVectorField; 3]> {
    Ok(three(solve_vector(mesh, full_operator(cs)?, &[0, 1, 2], params)?))
}

fn full_operator(cs: &ContrastSet) -> Result<VectorOperator> {
    check_mu(cs.mu_r)?;
    if !(cs.k_alpha >= 0.0) {
        return Err(Error::domain(format!("kα must be non-negative, got {}", cs.k_alpha)));
    }
    if !cs.eps_r.is_finite() {
        return Err(Error::domain("relative permittivity is not finite"));
    }
    Ok(VectorOperator::full(cs))
}

fn eddy_operator(problem: VectorProblem, nu_i: f64, mu_r: f64) -> Result<VectorOperator> {
    check_mu(mu_r)?;
    if !(nu_i >= 0.0 && nu_i.is_finite()) {
        return Err(Error::domain(format!("ν_i must be non-negative, got {nu_i}")));
    }
    Ok(VectorOperator::eddy(problem, nu_i, mu_r))
}

pub fn solve_theta_eddy(i: usize, nu_i: f64, mu_r: f64, mesh: &Arc<Mesh>, params: &SolverParams) -> Result<DiscreteVectorField> {
    let op = eddy_operator(VectorProblem::Eddy, nu_i, mu_r)?;
    Ok(solve_vector(mesh, op, &[i], params)?.remove(0))
}

pub fn solve_theta_eddy_all(nu_i: f64, mu_r: f64, mesh: &Arc<Mesh>, params: &SolverParams) -> Result<[DiscreteVectorField; 3]> {
    let op = eddy_operator(VectorProblem::Eddy, nu_i, mu_r)?;
    Ok(three(solve_vector(mesh, op, &[0, 1, 2], params)?))
}

pub fn solve_theta_static(i: usize, mu_r: f64, mesh: &Arc<Mesh>, params: &SolverParams) -> Result<DiscreteVectorField> {
    let op = eddy_operator(VectorProblem::Static, 0.0, mu_r)?;
    Ok(solve_vector(mesh, op, &[i], params)?.remove(0))
}

pub fn solve_theta_static_all(mu_r: f64, mesh: &Arc<Mesh>, params: &SolverParams) -> Result<[DiscreteVectorField; 3]> {
    let op = eddy_operator(VectorProblem::Static, 0.0, mu_r)?;
    Ok(three(solve_vector(mesh, op, &[0, 1, 2], params)?))
}

/// `φᵢ` of the eddy-current regime; `∫_B(eᵢ + φᵢ)` vanishes for the exact
/// solution, which is what makes `ℬ` vanish there.
pub fn solve_phi_eddy_all(nu_i: f64, mu_r: f64, mesh: &Arc<Mesh>, params: &SolverParams) -> Result<[DiscreteVectorField; 3]> {
    if !(nu_i > 0.0) {
        return Err(Error::domain("the eddy φ problem needs ν_i > 0"));
    }
    let op = eddy_operator(VectorProblem::PhiEddy, nu_i, mu_r)?;
    Ok(three(solve_vector(mesh, op, &[0, 1, 2], params)?))
}

// ---------------------------------------------------------------------------
// scalar problem

fn solve_scalar(eps_r: Complex64, mesh: &Arc<Mesh>, indices: &[usize], params: &SolverParams) -> Result<Vec<DiscreteScalarField>> {
    params.validate()?;
    if !eps_r.is_finite() || eps_r.norm() == 0.0 {
        return Err(Error::domain(format!("invalid relative permittivity {eps_r}")));
    }
    if let Some(&i) = indices.iter().find(|&&i| i >= 3) {
        return Err(Error::domain(format!("axis index {i} out of range 0..3")));
    }
    let fixed = mesh.boundary_vertices();
    let mut dof = vec![-1isize; mesh.vertices.len()];
    let mut n = 0;
    for v in 0..mesh.vertices.len() {
        if !fixed[v] {
            dof[v] = n as isize;
            n += 1;
        }
    }
    let groups: Vec<[isize; 4]> = mesh.cells.iter().map(|c| c.map(|v| dof[v])).collect();
    let mut a = CsrMatrix::from_groups(n, groups.iter().map(|g| &g[..]));
    for (c, g) in groups.iter().enumerate() {
        let t = Tet::new(mesh.cell_vertices(c));
        let k = t.nodal_stiffness();
        let eps = if mesh.regions[c] == Region::Interior { eps_r } else { Complex64::new(1.0, 0.0) };
        for p in 0..4 {
            for q in 0..4 {
                if g[p] >= 0 && g[q] >= 0 {
                    a.add(g[p] as usize, g[q] as usize, eps * k[p][q]);
                }
            }
        }
    }
    let rhs: Vec<Vec<Complex64>> = indices
        .iter()
        .map(|&i| {
            let mut b = vec![ZERO; n];
            for f in &mesh.interface_faces {
                let val = -f.normal[i] * f.area / 3.0;
                for v in f.verts {
                    if dof[v] >= 0 {
                        b[dof[v] as usize] += val;
                    }
                }
            }
            b
        })
        .collect();
    let solved = linear::solve_many(&a, &rhs, params).map_err(|e| match e {
        Error::Solver { .. } | Error::IllConditioned(_) if eps_r.im == 0.0 && eps_r.re < 0.0 => {
            Error::IllConditioned(format!("scalar problem near a plasmonic permittivity {eps_r}: {e}"))
        }
        other => other,
    })?;
    Ok(solved
        .into_iter()
        .zip(indices)
        .map(|((x, report), &i)| {
            log::info!(
                "solve problem=vartheta index={} method={} iterations={} residual={:.3e} condition_estimate={:.3e} unknowns={} seconds={:.3}",
                i,
                report.method,
                report.iterations,
                report.residual,
                report.condition_estimate,
                report.unknowns,
                report.seconds
            );
            let mut coeffs = vec![ZERO; mesh.vertices.len()];
            for (v, d) in dof.iter().enumerate() {
                if *d >= 0 {
                    coeffs[v] = x[*d as usize];
                }
            }
            DiscreteScalarField { mesh: Arc::clone(mesh), coeffs, index: i, eps_r, report }
        })
        .collect())
}

pub fn solve_vartheta(i: usize, eps_r: Complex64, mesh: &Arc<Mesh>, params: &SolverParams) -> Result<DiscreteScalarField> {
    Ok(solve_scalar(eps_r, mesh, &[i], params)?.remove(0))
}

pub fn solve_vartheta_all(eps_r: Complex64, mesh: &Arc<Mesh>, params: &SolverParams) -> Result<[DiscreteScalarField; 3]> {
    Ok(solve_scalar(eps_r, mesh, &[0, 1, 2], params)?.try_into().expect("three axis solves"))
}

