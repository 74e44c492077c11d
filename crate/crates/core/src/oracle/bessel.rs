//! Spherical Bessel functions of complex argument.
//!
//! Values are returned together with a logarithmic scale `s` (true value =
//! stored value · `e^s`) so that arguments with a large imaginary part — the
//! deep skin-effect regime — neither overflow nor lose the ratios that matter.
//! Small arguments use the power series; large ones use `j_0` in closed form
//! and a continued fraction for the ratios `j_n / j_{n−1}`, evaluated by
//! backward recurrence from a finite depth.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Below this `|z|` the power series is used, above it continued fractions.
pub const SERIES_CROSSOVER: f64 = 10.0;

/// Values `v_m` with `j_m(z) / z^m = v_m · e^scale`, for `m = 0..=n`.
#[derive(Debug, Clone)]
pub struct ScaledBessel {
    pub values: Vec<Complex64>,
    pub scale: f64,
}

/// `j_m(z) / z^m` for `m = 0..=n`; these are entire functions of `z`, finite
/// at the origin. `depth` is where the continued fraction is cut (only used
/// for `|z| > SERIES_CROSSOVER`; it must exceed `|z|` noticeably to converge).
pub fn sph_j_reduced(n: usize, z: Complex64, depth: usize) -> Result<ScaledBessel> {
    if !z.is_finite() {
        return Err(Error::domain(format!("spherical Bessel argument {z} is not finite")));
    }
    if z.norm() <= SERIES_CROSSOVER {
        let values = (0..=n).map(|m| reduced_series(m, z)).collect::<Result<Vec<_>>>()?;
        return Ok(ScaledBessel { values, scale: 0.0 });
    }
    let j = sph_j_scaled_large(n, z, depth)?;
    let mut power = Complex64::new(1.0, 0.0);
    let values = j
        .into_iter()
        .map(|v| {
            let out = v / power;
            power *= z;
            out
        })
        .collect();
    Ok(ScaledBessel { values, scale: z.im.abs() })
}

/// `[j_0(z), …, j_n(z)] · e^{−|Im z|}` for any `z`.
pub fn sph_j_scaled(n: usize, z: Complex64, depth: usize) -> Result<Vec<Complex64>> {
    if z.norm() <= SERIES_CROSSOVER {
        let r = sph_j_reduced(n, z, depth)?;
        let damp = (-z.im.abs()).exp();
        let mut power = Complex64::new(damp, 0.0);
        Ok(r
            .values
            .into_iter()
            .map(|v| {
                let out = v * power;
                power *= z;
                out
            })
            .collect())
    } else {
        sph_j_scaled_large(n, z, depth)
    }
}

fn sph_j_scaled_large(n: usize, z: Complex64, depth: usize) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(j0_scaled(z));
    if n > 0 {
        let ratios = ratios_backward(n, z, depth)?;
        for k in 1..=n {
            let prev = out[k - 1];
            out.push(prev * ratios[k]);
        }
    }
    Ok(out)
}

/// `j_0(z) e^{−|Im z|}` from the exponential form of `sin z / z`.
fn j0_scaled(z: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    // sin z · e^{−|Im z|} = (e^{iz} − e^{−iz}) e^{−|Im z|} / 2i
    let (a, b) = if z.im >= 0.0 {
        ((i * z.re).exp() * (-2.0 * z.im).exp(), (-i * z.re).exp())
    } else {
        ((i * z.re).exp(), (-i * z.re).exp() * (2.0 * z.im).exp())
    };
    (a - b) / (2.0 * i) / z
}

/// `j_m(z) / z^m = 1/(2m+1)!! · Σ_k (−z²/2)^k / (k! (2m+3)(2m+5)…(2m+2k+1))`.
fn reduced_series(m: usize, z: Complex64) -> Result<Complex64> {
    let mut lead = 1.0;
    for k in 1..=m {
        lead /= 2.0 * k as f64 + 1.0;
    }
    let w = -z * z / 2.0;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..400 {
        term *= w / (k as f64 * (2.0 * (m + k) as f64 + 1.0));
        sum += term;
        if term.norm() <= 1e-17 * sum.norm().max(1e-300) {
            return Ok(sum * lead);
        }
    }
    Err(Error::Truncation(format!("power series for j_{m}({z}) did not converge")))
}

/// Ratios `r_k = j_k / j_{k−1}` for `k = 1..=n` (index 0 unused), from the
/// continued fraction `r_k = z / (2k+1 − z r_{k+1})` started with
/// `r_{depth+1} = 0`.
fn ratios_backward(n: usize, z: Complex64, depth: usize) -> Result<Vec<Complex64>> {
    if depth <= n {
        return Err(Error::Truncation(format!(
            "continued-fraction depth {depth} must exceed the highest order {n}"
        )));
    }
    let mut ratios = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut r = Complex64::new(0.0, 0.0);
    for k in (1..=depth).rev() {
        let den = 2.0 * k as f64 + 1.0 - z * r;
        if den.norm() == 0.0 {
            return Err(Error::Truncation(format!("continued fraction for j at z = {z} hit a zero denominator")));
        }
        r = z / den;
        if k <= n {
            ratios[k] = r;
        }
    }
    if ratios.iter().skip(1).any(|v| !v.is_finite()) {
        return Err(Error::Truncation(format!("continued fraction for j at z = {z} overflowed")));
    }
    Ok(ratios)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEPTH: usize = 400;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn closed_j1(z: Complex64) -> Complex64 {
        z.sin() / (z * z) - z.cos() / z
    }

    #[test]
    fn series_matches_closed_forms() {
        for z in [c(0.3, 0.0), c(2.0, 1.5), c(-4.0, 3.0), c(7.0, 7.0)] {
            let j = sph_j_scaled(2, z, DEPTH).unwrap();
            let s = z.im.abs().exp();
            assert!((j[0] * s - z.sin() / z).norm() < 1e-12 * (z.sin() / z).norm().max(1.0));
            assert!((j[1] * s - closed_j1(z)).norm() < 1e-11 * closed_j1(z).norm().max(1.0));
        }
    }

    #[test]
    fn both_branches_agree_at_the_crossover() {
        for z in [c(9.99, 0.0), c(7.0, 7.06), c(0.5, 9.98)] {
            let big = z * (10.01 / z.norm());
            let a = sph_j_scaled(5, z, DEPTH).unwrap();
            let b = sph_j_scaled(5, big, DEPTH).unwrap();
            for k in 0..=5 {
                assert!((a[k] - b[k]).norm() < 0.05 * a[k].norm().max(1e-3), "order {k}");
            }
            let s = sph_j_scaled(1, big, DEPTH).unwrap();
            let direct = closed_j1(big) * (-big.im.abs()).exp();
            assert!((s[1] - direct).norm() < 1e-12 * direct.norm());
        }
    }

    #[test]
    fn reduced_values_are_finite_at_the_origin() {
        let r = sph_j_reduced(3, c(0.0, 0.0), DEPTH).unwrap();
        let expect = [1.0, 1.0 / 3.0, 1.0 / 15.0, 1.0 / 105.0];
        for (v, e) in r.values.iter().zip(expect) {
            assert!((v - e).norm() < 1e-15);
        }
    }

    #[test]
    fn shallow_continued_fraction_is_inaccurate_then_converges() {
        let z = c(300.0, 300.0);
        let exact = sph_j_scaled(2, z, 4000).unwrap();
        let shallow = sph_j_scaled(2, z, 30).unwrap();
        let deeper = sph_j_scaled(2, z, 2000).unwrap();
        assert!((shallow[2] - exact[2]).norm() > 1e-6 * exact[2].norm());
        assert!((deeper[2] - exact[2]).norm() < 1e-13 * exact[2].norm());
        assert!(sph_j_scaled(2, z, 2).is_err());
    }

    #[test]
    fn huge_imaginary_arguments_stay_finite() {
        let z = c(1e4, 1e4);
        let j = sph_j_scaled(3, z, 100_000).unwrap();
        assert!(j.iter().all(|v| v.is_finite() && v.norm() > 0.0));
        // cot z → −i deep in the upper half plane, so j_1/j_0 → 1/z + i
        let r = j[1] / j[0];
        assert!((r - (1.0 / z + c(0.0, 1.0))).norm() < 1e-8);
    }
}
