use num_complex::Complex64;

/// Compressed sparse row matrix with a fixed pattern; complex symmetric in
/// every use here (no conjugation anywhere).
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<Complex64>,
    diag: Vec<usize>,
}

impl CsrMatrix {
    /// Pattern in which every pair of indices within a group couples.
    /// Negative entries (constrained unknowns) are skipped.
    pub fn from_groups<'a>(n: usize, groups: impl Iterator<Item = &'a [isize]>) -> CsrMatrix {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for g in groups {
            for &i in g {
                if i < 0 {
                    continue;
                }
                for &j in g {
                    if j >= 0 {
                        rows[i as usize].push(j as usize);
                    }
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        for (i, r) in rows.iter_mut().enumerate() {
            if r.is_empty() {
                r.push(i);
            }
            r.sort_unstable();
            r.dedup();
            cols.extend_from_slice(r);
            row_ptr.push(cols.len());
        }
        let mut diag = vec![0; n];
        for i in 0..n {
            let s = &cols[row_ptr[i]..row_ptr[i + 1]];
            diag[i] = row_ptr[i] + s.binary_search(&i).expect("diagonal in pattern");
        }
        let nnz = cols.len();
        CsrMatrix { n, row_ptr, cols, vals: vec![Complex64::new(0.0, 0.0); nnz], diag }
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        let s = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        let k = s.binary_search(&j).expect("entry in pattern");
        self.vals[self.row_ptr[i] + k] += v;
    }

    pub fn diagonal(&self, i: usize) -> Complex64 {
        self.vals[self.diag[i]]
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for i in 0..self.n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }

    /// Largest `|a_ij − a_ji|` relative to the largest entry.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                let s = &self.cols[self.row_ptr[j]..self.row_ptr[j + 1]];
                let kt = self.row_ptr[j] + s.binary_search(&i).expect("symmetric pattern");
                worst = worst.max((self.vals[k] - self.vals[kt]).norm());
                scale = scale.max(self.vals[k].norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Forward sweep `(D/ω + L) y = r`.
    pub(crate) fn lower_solve(&self, omega: f64, r: &[Complex64], y: &mut [Complex64]) {
        for i in 0..self.n {
            let mut s = r[i];
            for k in self.row_ptr[i]..self.diag[i] {
                s -= self.vals[k] * y[self.cols[k]];
            }
            y[i] = s * omega / self.vals[self.diag[i]];
        }
    }

    /// Backward sweep `(D/ω + U) z = w`.
    pub(crate) fn upper_solve(&self, omega: f64, w: &[Complex64], z: &mut [Complex64]) {
        for i in (0..self.n).rev() {
            let mut s = w[i];
            for k in self.diag[i] + 1..self.row_ptr[i + 1] {
                s -= self.vals[k] * z[self.cols[k]];
            }
            z[i] = s * omega / self.vals[self.diag[i]];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_build_symmetric_pattern() {
        let g1: [isize; 3] = [0, 1, 2];
        let g2: [isize; 3] = [2, -1, 3];
        let m = CsrMatrix::from_groups(4, [&g1[..], &g2[..]].into_iter());
        assert_eq!(m.nnz(), 9 + 4 - 1);
        let mut m = m;
        m.add(0, 2, Complex64::new(1.0, 2.0));
        m.add(2, 0, Complex64::new(1.0, 2.0));
        assert_eq!(m.symmetry_defect(), 0.0);
        let x = vec![Complex64::new(1.0, 0.0); 4];
        let mut y = vec![Complex64::new(0.0, 0.0); 4];
        m.matvec(&x, &mut y);
        assert_eq!(y[0], Complex64::new(1.0, 2.0));
        assert_eq!(y[3], Complex64::new(0.0, 0.0));
    }
}
