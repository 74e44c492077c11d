//! Per-tetrahedron geometry, lowest-order edge and nodal shape functions,
//! and quadrature rules.

use num_complex::Complex64;

use crate::mesh::LOCAL_EDGES;
use crate::tensor::{self, CVec3, Vec3};

/// Unknowns per cell: two per edge.
pub const CELL_DOFS: usize = 12;

/// Affine tetrahedron with barycentric gradients.
#[derive(Debug, Clone, Copy)]
pub struct Tet {
    pub p: [Vec3; 4],
    pub grads: [Vec3; 4],
    pub volume: f64,
}

impl Tet {
    pub fn new(p: [Vec3; 4]) -> Tet {
        let e1 = tensor::sub(&p[1], &p[0]);
        let e2 = tensor::sub(&p[2], &p[0]);
        let e3 = tensor::sub(&p[3], &p[0]);
        let det = tensor::dot(&e1, &tensor::cross(&e2, &e3));
        // rows of the inverse Jacobian
        let g1 = tensor::scale(&tensor::cross(&e2, &e3), 1.0 / det);
        let g2 = tensor::scale(&tensor::cross(&e3, &e1), 1.0 / det);
        let g3 = tensor::scale(&tensor::cross(&e1, &e2), 1.0 / det);
        let g0 = tensor::scale(&tensor::add(&tensor::add(&g1, &g2), &g3), -1.0);
        Tet { p, grads: [g0, g1, g2, g3], volume: det.abs() / 6.0 }
    }

    pub fn point(&self, lambda: &[f64; 4]) -> Vec3 {
        let mut x = [0.0; 3];
        for (l, p) in lambda.iter().zip(&self.p) {
            for j in 0..3 {
                x[j] += l * p[j];
            }
        }
        x
    }

    pub fn barycentric(&self, x: &Vec3) -> [f64; 4] {
        let d = tensor::sub(x, &self.p[0]);
        let l1 = tensor::dot(&self.grads[1], &d);
        let l2 = tensor::dot(&self.grads[2], &d);
        let l3 = tensor::dot(&self.grads[3], &d);
        [1.0 - l1 - l2 - l3, l1, l2, l3]
    }

    /// Edge shape functions `λ_a∇λ_b − λ_b∇λ_a` at a barycentric point.
    pub fn edge_basis(&self, lambda: &[f64; 4]) -> [Vec3; 6] {
        let mut w = [[0.0; 3]; 6];
        for (l, [a, b]) in LOCAL_EDGES.iter().enumerate() {
            for j in 0..3 {
                w[l][j] = lambda[*a] * self.grads[*b][j] - lambda[*b] * self.grads[*a][j];
            }
        }
        w
    }

    /// Constant curls `2∇λ_a × ∇λ_b` of the edge shape functions.
    pub fn edge_curls(&self) -> [Vec3; 6] {
        let mut c = [[0.0; 3]; 6];
        for (l, [a, b]) in LOCAL_EDGES.iter().enumerate() {
            c[l] = tensor::scale(&tensor::cross(&self.grads[*a], &self.grads[*b]), 2.0);
        }
        c
    }

    /// `∫ w_i · w_j`, exact via `∫λ_aλ_b = V(1 + δ_ab)/20`.
    pub fn edge_mass(&self) -> [[f64; 6]; 6] {
        let ll = |a: usize, b: usize| self.volume * if a == b { 0.1 } else { 0.05 };
        let gg = |a: usize, b: usize| tensor::dot(&self.grads[a], &self.grads[b]);
        let mut m = [[0.0; 6]; 6];
        for (i, [a, b]) in LOCAL_EDGES.iter().enumerate() {
            for (j, [c, d]) in LOCAL_EDGES.iter().enumerate() {
                m[i][j] = gg(*b, *d) * ll(*a, *c) - gg(*b, *c) * ll(*a, *d) - gg(*a, *d) * ll(*b, *c)
                    + gg(*a, *c) * ll(*b, *d);
            }
        }
        m
    }

    /// Full linear basis: the six Whitney functions followed by the six
    /// edge-bubble gradients `∇(λ_aλ_b) = λ_a∇λ_b + λ_b∇λ_a`.
    pub fn basis(&self, lambda: &[f64; 4]) -> [Vec3; CELL_DOFS] {
        let w = self.edge_basis(lambda);
        let mut out = [[0.0; 3]; CELL_DOFS];
        out[..6].copy_from_slice(&w);
        for (l, [a, b]) in LOCAL_EDGES.iter().enumerate() {
            for j in 0..3 {
                out[6 + l][j] = lambda[*a] * self.grads[*b][j] + lambda[*b] * self.grads[*a][j];
            }
        }
        out
    }

    /// Constant curls of [`Tet::basis`]; the gradient half is curl-free.
    pub fn curls(&self) -> [Vec3; CELL_DOFS] {
        let mut c = [[0.0; 3]; CELL_DOFS];
        c[..6].copy_from_slice(&self.edge_curls());
        c
    }

    /// `∫ curl w_i · curl w_j` over the full basis.
    pub fn curl_curl(&self) -> [[f64; CELL_DOFS]; CELL_DOFS] {
        let c = self.curls();
        let mut s = [[0.0; CELL_DOFS]; CELL_DOFS];
        for i in 0..6 {
            for j in 0..6 {
                s[i][j] = self.volume * tensor::dot(&c[i], &c[j]);
            }
        }
        s
    }

    /// `∫ w_i · w_j` over the full basis, exact. Every basis function is a
    /// signed pair of `λ_p∇λ_q` terms.
    pub fn mass(&self) -> [[f64; CELL_DOFS]; CELL_DOFS] {
        let ll = |a: usize, b: usize| self.volume * if a == b { 0.1 } else { 0.05 };
        let gg = |a: usize, b: usize| tensor::dot(&self.grads[a], &self.grads[b]);
        let terms = |k: usize| {
            let [a, b] = LOCAL_EDGES[k % 6];
            let sign = if k < 6 { -1.0 } else { 1.0 };
            [(a, b, 1.0), (b, a, sign)]
        };
        let mut m = [[0.0; CELL_DOFS]; CELL_DOFS];
        for i in 0..CELL_DOFS {
            for j in 0..CELL_DOFS {
                let mut v = 0.0;
                for (p, q, s) in terms(i) {
                    for (r, t, u) in terms(j) {
                        v += s * u * ll(p, r) * gg(q, t);
                    }
                }
                m[i][j] = v;
            }
        }
        m
    }

    pub fn eval_field(&self, coeffs: &[Complex64; CELL_DOFS], lambda: &[f64; 4]) -> CVec3 {
        let w = self.basis(lambda);
        let mut v = tensor::czero();
        for l in 0..CELL_DOFS {
            for j in 0..3 {
                v[j] += coeffs[l] * w[l][j];
            }
        }
        v
    }

    pub fn eval_curl(&self, coeffs: &[Complex64; CELL_DOFS]) -> CVec3 {
        let c = self.edge_curls();
        let mut v = tensor::czero();
        for l in 0..6 {
            for j in 0..3 {
                v[j] += coeffs[l] * c[l][j];
            }
        }
        v
    }

    /// `∫ ∇λ_a · ∇λ_b`.
    pub fn nodal_stiffness(&self) -> [[f64; 4]; 4] {
        let mut k = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                k[a][b] = self.volume * tensor::dot(&self.grads[a], &self.grads[b]);
            }
        }
        k
    }

    /// Quadrature points (barycentric) and absolute weights.
    pub fn quadrature(&self, order: usize) -> Vec<([f64; 4], f64)> {
        tet_rule(order).into_iter().map(|(l, w)| (l, w * self.volume)).collect()
    }
}

/// Symmetric tetrahedron rules (weights sum to one).
pub fn tet_rule(order: usize) -> Vec<([f64; 4], f64)> {
    match order {
        0 | 1 => vec![([0.25; 4], 1.0)],
        2 => {
            let a = 0.585_410_196_624_968_5;
            let b = 0.138_196_601_125_010_5;
            (0..4)
                .map(|k| {
                    let mut l = [b; 4];
                    l[k] = a;
                    (l, 0.25)
                })
                .collect()
        }
        _ => {
            // degree 3
            let mut v = vec![([0.25; 4], -0.8)];
            for k in 0..4 {
                let mut l = [1.0 / 6.0; 4];
                l[k] = 0.5;
                v.push((l, 0.45));
            }
            v
        }
    }
}

/// Edge-midpoint rule on a triangle, exact for quadratics. Returns
/// barycentric coordinates of the cell with `opposite` set to zero.
pub fn face_midpoints(opposite: usize) -> [[f64; 4]; 3] {
    let on: Vec<usize> = (0..4).filter(|&j| j != opposite).collect();
    let mut out = [[0.0; 4]; 3];
    for (q, (a, b)) in [(on[0], on[1]), (on[0], on[2]), (on[1], on[2])].iter().enumerate() {
        out[q][*a] = 0.5;
        out[q][*b] = 0.5;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Tet {
        Tet::new([[0.1, 0.0, 0.0], [1.0, 0.2, 0.0], [0.0, 1.1, 0.3], [0.2, 0.1, 0.9]])
    }

    #[test]
    fn barycentric_round_trip() {
        let t = sample();
        let l = [0.1, 0.2, 0.3, 0.4];
        let back = t.barycentric(&t.point(&l));
        for j in 0..4 {
            assert!((back[j] - l[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn edge_basis_has_unit_tangential_moment() {
        // ∫_edge w_l · t ds = 1 on its own edge and 0 on the others
        let t = sample();
        for (l, [a, b]) in LOCAL_EDGES.iter().enumerate() {
            for (m, [c, d]) in LOCAL_EDGES.iter().enumerate() {
                let tangent = tensor::sub(&t.p[*d], &t.p[*c]);
                let mut lam = [0.0; 4];
                lam[*c] = 0.5;
                lam[*d] = 0.5;
                // integrand is constant along the edge
                let w = t.edge_basis(&lam)[l];
                let moment = tensor::dot(&w, &tangent);
                let expect = if l == m { 1.0 } else { 0.0 };
                assert!((moment - expect).abs() < 1e-13, "{a}{b} on {c}{d}");
            }
        }
    }

    #[test]
    fn mass_matrix_matches_quadrature() {
        let t = sample();
        let m = t.edge_mass();
        let mut q = [[0.0; 6]; 6];
        for (l, w) in t.quadrature(2) {
            let b = t.edge_basis(&l);
            for i in 0..6 {
                for j in 0..6 {
                    q[i][j] += w * tensor::dot(&b[i], &b[j]);
                }
            }
        }
        for i in 0..6 {
            for j in 0..6 {
                assert!((m[i][j] - q[i][j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn full_mass_matches_quadrature() {
        let t = sample();
        let m = t.mass();
        for (i, row) in m.iter().enumerate() {
            for (j, mij) in row.iter().enumerate() {
                let q: f64 = t
                    .quadrature(2)
                    .iter()
                    .map(|(l, w)| {
                        let b = t.basis(l);
                        w * tensor::dot(&b[i], &b[j])
                    })
                    .sum();
                assert!((mij - q).abs() < 1e-13, "{i} {j}");
            }
        }
    }

    #[test]
    fn full_basis_spans_linear_fields() {
        // x ↦ (y, 0, 0) has a non-skew gradient, so it needs the bubble half;
        // interpolate through tangential moments at edge endpoints.
        let t = sample();
        let f = |x: &Vec3| [x[1], 0.0, 0.0];
        let mut coeffs = [Complex64::new(0.0, 0.0); CELL_DOFS];
        for (l, [a, b]) in LOCAL_EDGES.iter().enumerate() {
            let tang = tensor::sub(&t.p[*b], &t.p[*a]);
            let fa = tensor::dot(&f(&t.p[*a]), &tang);
            let fb = tensor::dot(&f(&t.p[*b]), &tang);
            // along the edge the Whitney part is constant and the bubble
            // gradient is linear with end values ±1 in tangential moment
            coeffs[l] = Complex64::new(0.5 * (fa + fb), 0.0);
            coeffs[6 + l] = Complex64::new(0.5 * (fa - fb), 0.0);
        }
        let lam = [0.1, 0.2, 0.3, 0.4];
        let x = t.point(&lam);
        let v = t.eval_field(&coeffs, &lam);
        let want = f(&x);
        for j in 0..3 {
            assert!((v[j].re - want[j]).abs() < 1e-12, "{v:?} vs {want:?}");
        }
    }

    #[test]
    fn rules_integrate_quadratics() {
        let t = sample();
        for order in [2, 3] {
            let vol: f64 = t.quadrature(order).iter().map(|(_, w)| w).sum();
            assert!((vol - t.volume).abs() < 1e-14);
            // ∫λ₀λ₁ = V/20, ∫λ₀² = V/10
            let i01: f64 = t.quadrature(order).iter().map(|(l, w)| w * l[0] * l[1]).sum();
            let i00: f64 = t.quadrature(order).iter().map(|(l, w)| w * l[0] * l[0]).sum();
            assert!((i01 - t.volume / 20.0).abs() < 1e-14);
            assert!((i00 - t.volume / 10.0).abs() < 1e-14);
        }
    }
}
