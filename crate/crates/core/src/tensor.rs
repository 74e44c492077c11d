//! Complex rank-2 and rank-3 tensors in a fixed Cartesian frame.
//!
//! Storage is row-major: a rank-2 tensor is indexed `(r, i)` and a rank-3
//! tensor `(m, s, i)`. All Levi-Civita contractions used by the field
//! expansions live here so that index conventions are defined once.

use num_complex::Complex64;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

pub type Vec3 = [f64; 3];
pub type CVec3 = [Complex64; 3];

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `ε_{ijk}` for indices in `0..3`.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

pub fn unit(i: usize) -> Vec3 {
    let mut e = [0.0; 3];
    e[i] = 1.0;
    e
}

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn cdot(a: &CVec3, b: &CVec3) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Unconjugated dot product of a real and a complex vector.
pub fn rcdot(a: &Vec3, b: &CVec3) -> Complex64 {
    b[0] * a[0] + b[1] * a[1] + b[2] * a[2]
}

pub fn ccross(a: &CVec3, b: &CVec3) -> CVec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn rccross(a: &Vec3, b: &CVec3) -> CVec3 {
    [b[2] * a[1] - b[1] * a[2], b[0] * a[2] - b[2] * a[0], b[1] * a[0] - b[0] * a[1]]
}

pub fn cadd(a: &CVec3, b: &CVec3) -> CVec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn csub(a: &CVec3, b: &CVec3) -> CVec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn cscale(a: &CVec3, s: Complex64) -> CVec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn cnorm(a: &CVec3) -> f64 {
    (a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()).sqrt()
}

pub fn complexify(a: &Vec3) -> CVec3 {
    [a[0].into(), a[1].into(), a[2].into()]
}

pub fn czero() -> CVec3 {
    [ZERO; 3]
}

/// Complex 3×3 tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rank2TensorC(pub [[Complex64; 3]; 3]);

impl Default for Rank2TensorC {
    fn default() -> Self {
        Self::zeros()
    }
}

impl Rank2TensorC {
    pub fn zeros() -> Self {
        Self([[ZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        Self::scalar(Complex64::new(1.0, 0.0))
    }

    /// `s 𝕀`.
    pub fn scalar(s: Complex64) -> Self {
        let mut t = Self::zeros();
        for k in 0..3 {
            t.0[k][k] = s;
        }
        t
    }

    pub fn diagonal(d: [Complex64; 3]) -> Self {
        let mut t = Self::zeros();
        for k in 0..3 {
            t.0[k][k] = d[k];
        }
        t
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut t = Self::zeros();
        for r in 0..3 {
            for i in 0..3 {
                t.0[r][i] = f(r, i);
            }
        }
        t
    }

    pub fn from_real(m: [[f64; 3]; 3]) -> Self {
        Self::from_fn(|r, i| m[r][i].into())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|r, i| self.0[i][r])
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn diag(&self) -> [Complex64; 3] {
        [self.0[0][0], self.0[1][1], self.0[2][2]]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn apply(&self, v: &CVec3) -> CVec3 {
        let mut out = czero();
        for r in 0..3 {
            out[r] = self.0[r][0] * v[0] + self.0[r][1] * v[1] + self.0[r][2] * v[2];
        }
        out
    }

    pub fn apply_real(&self, v: &Vec3) -> CVec3 {
        self.apply(&complexify(v))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self::from_fn(|r, i| (0..3).map(|k| self.0[r][k] * other.0[k][i]).sum())
    }

    /// `‖T − Tᵀ‖ / ‖T‖`, zero for the zero tensor.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.norm();
        if n == 0.0 {
            return 0.0;
        }
        (*self - self.transpose()).norm() / n
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.symmetry_defect() <= tol
    }

    /// Relative distance to the nearest multiple of the identity,
    /// `‖T − (tr T / 3) 𝕀‖ / ‖T‖`.
    pub fn isotropy_defect(&self) -> f64 {
        let n = self.norm();
        if n == 0.0 {
            return 0.0;
        }
        (*self - Self::scalar(self.trace() / 3.0)).norm() / n
    }

    pub fn is_isotropic(&self, tol: f64) -> bool {
        self.isotropy_defect() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `Q T Qᵀ` for a real rotation `Q`.
    pub fn rotate(&self, q: &[[f64; 3]; 3]) -> Self {
        let q = Self::from_real(*q);
        q.matmul(self).matmul(&q.transpose())
    }
}

impl Index<(usize, usize)> for Rank2TensorC {
    type Output = Complex64;
    fn index(&self, (r, i): (usize, usize)) -> &Complex64 {
        &self.0[r][i]
    }
}

impl IndexMut<(usize, usize)> for Rank2TensorC {
    fn index_mut(&mut self, (r, i): (usize, usize)) -> &mut Complex64 {
        &mut self.0[r][i]
    }
}

impl Add for Rank2TensorC {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::from_fn(|r, i| self.0[r][i] + o.0[r][i])
    }
}

impl Sub for Rank2TensorC {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::from_fn(|r, i| self.0[r][i] - o.0[r][i])
    }
}

impl Neg for Rank2TensorC {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_fn(|r, i| -self.0[r][i])
    }
}

impl Mul<Complex64> for Rank2TensorC {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        Self::from_fn(|r, i| self.0[r][i] * s)
    }
}

impl Mul<f64> for Rank2TensorC {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::from_fn(|r, i| self.0[r][i] * s)
    }
}

/// Complex 3×3×3 tensor indexed `(m, s, i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rank3TensorC(pub [[[Complex64; 3]; 3]; 3]);

impl Default for Rank3TensorC {
    fn default() -> Self {
        Self::zeros()
    }
}

impl Rank3TensorC {
    pub fn zeros() -> Self {
        Self([[[ZERO; 3]; 3]; 3])
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize) -> Complex64) -> Self {
        let mut t = Self::zeros();
        for m in 0..3 {
            for s in 0..3 {
                for i in 0..3 {
                    t.0[m][s][i] = f(m, s, i);
                }
            }
        }
        t
    }

    /// `ε_{msr} C_{ri}`, the rank-3 tensor carried by a rank-2 one.
    pub fn from_skew(c: &Rank2TensorC) -> Self {
        Self::from_fn(|m, s, i| (0..3).map(|r| c.0[r][i] * levi_civita(m, s, r)).sum())
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize, usize)> for Rank3TensorC {
    type Output = Complex64;
    fn index(&self, (m, s, i): (usize, usize, usize)) -> &Complex64 {
        &self.0[m][s][i]
    }
}

impl IndexMut<(usize, usize, usize)> for Rank3TensorC {
    fn index_mut(&mut self, (m, s, i): (usize, usize, usize)) -> &mut Complex64 {
        &mut self.0[m][s][i]
    }
}

impl Sub for Rank3TensorC {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::from_fn(|m, s, i| self.0[m][s][i] - o.0[m][s][i])
    }
}
