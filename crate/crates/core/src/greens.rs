//! Free-space Helmholtz Green's function `G_k(x, z) = e^{ik|x−z|} / (4π|x−z|)`
//! together with its gradient and Hessian in `x`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tensor::{self, CVec3, Rank2TensorC, Vec3};

/// Separations below this are treated as coincident points.
pub const MIN_SEPARATION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreensDerivatives {
    pub value: Complex64,
    pub grad: CVec3,
    pub hess: Rank2TensorC,
}

impl GreensDerivatives {
    /// `D²G + k² G 𝕀`, the kernel that multiplies `𝒩` and `ℳ`.
    pub fn dyadic(&self, k: f64) -> Rank2TensorC {
        self.hess + Rank2TensorC::scalar(self.value * (k * k))
    }
}

/// Value, gradient and Hessian of `G_k` with respect to `x`.
pub fn greens_eval(x: &Vec3, z: &Vec3, k: f64) -> Result<GreensDerivatives> {
    let d = tensor::sub(x, z);
    let r = tensor::norm(&d);
    if !(r >= MIN_SEPARATION) {
        return Err(Error::Singularity(format!("|x - z| = {r:e} is below {MIN_SEPARATION:e}")));
    }
    let rh = tensor::scale(&d, 1.0 / r);
    let four_pi = 4.0 * PI;

    let (value, radial, near, far) = if k == 0.0 {
        // Laplace kernel, kept apart from the oscillatory form.
        let g = Complex64::new(1.0 / (four_pi * r), 0.0);
        let radial = Complex64::new(-1.0 / (four_pi * r * r), 0.0);
        let near = Complex64::new(1.0 / (four_pi * r * r * r), 0.0);
        (g, radial, near, Complex64::new(0.0, 0.0))
    } else {
        let phase = Complex64::new(0.0, k * r).exp() / four_pi;
        let ik = Complex64::new(0.0, k);
        let g = phase / r;
        let radial = phase / r * (ik - 1.0 / r);
        // coefficient of (3 r̂⊗r̂ − 𝕀) and of r̂⊗r̂
        let near = phase * (1.0 / (r * r * r) - ik / (r * r));
        let far = -phase * (k * k / r);
        (g, radial, near, far)
    };

    let grad = [radial * rh[0], radial * rh[1], radial * rh[2]];
    let mut hess = Rank2TensorC::zeros();
    for a in 0..3 {
        for b in a..3 {
            let rr = rh[a] * rh[b];
            let delta = if a == b { 1.0 } else { 0.0 };
            let h = near * (3.0 * rr - delta) + far * rr;
            hess.0[a][b] = h;
            hess.0[b][a] = h;
        }
    }
    Ok(GreensDerivatives { value, grad, hess })
}

/// Largest relative deviation between the analytic derivatives and central
/// differences with step `h`: the gradient is differenced from the value and
/// the Hessian from the gradient.
pub fn greens_check_fd(x: &Vec3, z: &Vec3, k: f64, h: f64) -> Result<f64> {
    let r = tensor::norm(&tensor::sub(x, z));
    if !(h > 0.0) || h >= r / 10.0 {
        return Err(Error::domain(format!("finite-difference step {h} must lie in (0, r/10) with r = {r}")));
    }
    let exact = greens_eval(x, z, k)?;
    let shifted = |j: usize, s: f64| {
        let mut p = *x;
        p[j] += s;
        greens_eval(&p, z, k)
    };

    let grad_scale = tensor::cnorm(&exact.grad);
    let hess_scale = exact.hess.norm();
    let mut worst: f64 = 0.0;
    for j in 0..3 {
        let plus = shifted(j, h)?;
        let minus = shifted(j, -h)?;
        let dg = (plus.value - minus.value) / (2.0 * h);
        worst = worst.max((dg - exact.grad[j]).norm() / grad_scale);
        for l in 0..3 {
            let dh = (plus.grad[l] - minus.grad[l]) / (2.0 * h);
            worst = worst.max((dh - exact.hess.0[j][l]).norm() / hess_scale);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn laplace_kernel_at_unit_distance() {
        let g = greens_eval(&[1.0, 0.0, 0.0], &[0.0; 3], 0.0).unwrap();
        let c = 1.0 / (4.0 * PI);
        assert!((g.value.re - 0.0795775).abs() < 1e-7);
        assert!((g.value.re - c).abs() < 1e-16);
        assert!((g.grad[0].re + c).abs() < 1e-16);
        assert_eq!(g.grad[1], Complex64::new(0.0, 0.0));
        // (1/4π)(3 e₁⊗e₁ − 𝕀)
        let expect = [[2.0 * c, 0.0, 0.0], [0.0, -c, 0.0], [0.0, 0.0, -c]];
        for a in 0..3 {
            for b in 0..3 {
                assert!((g.hess.0[a][b] - expect[a][b]).norm() < 1e-16);
            }
        }
    }

    #[test]
    fn coincident_points_are_rejected() {
        let err = greens_eval(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 1.0).unwrap_err();
        assert!(matches!(err, Error::Singularity(_)));
        assert!(greens_eval(&[0.0, 0.0, 1e-13], &[0.0; 3], 0.0).is_err());
    }

    #[test]
    fn finite_difference_agreement() {
        let z = [0.1, -0.2, 0.3];
        let x2 = [0.1 + 2.0 / 3f64.sqrt(), -0.2 + 2.0 / 3f64.sqrt(), 0.3 + 2.0 / 3f64.sqrt()];
        assert!(greens_check_fd(&x2, &z, 1.0, 1e-5).unwrap() <= 1e-6);
        let x1 = [0.1, 0.8, 0.3];
        assert!(greens_check_fd(&x1, &z, 0.0, 1e-5).unwrap() <= 1e-6);
    }

    #[test]
    fn step_as_large_as_separation_is_invalid() {
        assert!(greens_check_fd(&[1.0, 0.0, 0.0], &[0.0; 3], 1.0, 1.0).is_err());
        assert!(greens_check_fd(&[1.0, 0.0, 0.0], &[0.0; 3], 1.0, 0.1).is_err());
    }

    #[test]
    fn small_wavenumber_is_continuous_with_laplace_branch() {
        let x = [0.3, 0.7, -1.1];
        let z = [0.0, 0.1, 0.2];
        let a = greens_eval(&x, &z, 0.0).unwrap();
        let b = greens_eval(&x, &z, 1e-12).unwrap();
        assert!((a.value - b.value).norm() <= 1e-9 * a.value.norm());
        assert!(tensor::cnorm(&tensor::csub(&a.grad, &b.grad)) <= 1e-9 * tensor::cnorm(&a.grad));
        assert!((a.hess - b.hess).norm() <= 1e-9 * a.hess.norm());
    }

    #[test]
    fn hessian_is_exactly_symmetric() {
        let g = greens_eval(&[0.31, -0.77, 1.9], &[0.0; 3], 3.7).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(g.hess.0[a][b], g.hess.0[b][a]);
            }
        }
    }

    fn arb_point() -> impl Strategy<Value = Vec3> {
        prop::array::uniform3(-5.0f64..5.0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn helmholtz_identity(x in arb_point(), z in arb_point(), k in 0.0f64..20.0) {
            let r = tensor::norm(&tensor::sub(&x, &z));
            prop_assume!(r > 1e-3);
            let g = greens_eval(&x, &z, k).unwrap();
            let residual = g.hess.trace() + g.value * (k * k);
            // The Hessian entries scale like 1/r³; the identity is a cancellation
            // among them.
            let scale = g.hess.norm().max((g.value * k * k).norm());
            prop_assert!(residual.norm() <= 1e-10 * scale);
        }
    }
}
