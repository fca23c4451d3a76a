//! Small dense linear-algebra helpers on top of nalgebra.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// True when every entry has a vanishing imaginary part.
pub fn is_real(m: &CMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

pub fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = if is_real(m) {
        real_part(m).symmetric_eigenvalues().iter().copied().collect()
    } else {
        m.clone().symmetric_eigenvalues().iter().copied().collect()
    };
    ev.sort_by(f64::total_cmp);
    ev
}

/// Ascending eigenvalues of a real symmetric matrix.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Descending singular values.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let sv: DVector<f64> = if is_real(m) {
        real_part(m).singular_values()
    } else {
        m.singular_values()
    };
    let mut sv: Vec<f64> = sv.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values at or below `rel_tol` times the largest one,
/// plus the rank deficit of a non-square matrix.
pub fn nullity(m: &CMatrix, rel_tol: f64) -> usize {
    let n = m.ncols();
    if n == 0 {
        return 0;
    }
    let sv = singular_values(m);
    let scale = sv.first().copied().unwrap_or(0.0);
    if scale == 0.0 {
        return n;
    }
    let rank = sv.iter().filter(|&&s| s > rel_tol * scale).count();
    n - rank
}

/// Number of singular values at or below `tol`, plus the rank deficit of a
/// non-square matrix.
pub fn nullity_abs(m: &CMatrix, tol: f64) -> usize {
    let n = m.ncols();
    n - singular_values(m).iter().filter(|&&s| s > tol).count()
}

pub fn rank(m: &CMatrix, rel_tol: f64) -> usize {
    m.ncols() - nullity(m, rel_tol)
}

/// Spectral norm.
pub fn operator_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Orthonormal bases `(range, kernel)` of a Hermitian projection, split at
/// eigenvalue 1/2.
pub fn projection_bases(q: &CMatrix) -> (CMatrix, CMatrix) {
    let d = q.nrows();
    if d == 0 {
        return (CMatrix::zeros(0, 0), CMatrix::zeros(0, 0));
    }
    let eig = q.clone().symmetric_eigen();
    let range: Vec<usize> = (0..d).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let kernel: Vec<usize> = (0..d).filter(|&i| eig.eigenvalues[i] <= 0.5).collect();
    let pick = |idx: &[usize]| {
        let mut m = CMatrix::zeros(d, idx.len());
        for (c, &i) in idx.iter().enumerate() {
            m.set_column(c, &eig.eigenvectors.column(i));
        }
        m
    };
    (pick(&range), pick(&kernel))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullity_of_rank_one() {
        let m = CMatrix::from_fn(3, 3, |_, _| ONE);
        assert_eq!(nullity(&m, 1e-10), 2);
        assert_eq!(rank(&m, 1e-10), 1);
    }

    #[test]
    fn complex_hermitian_spectrum() {
        let i = Complex64::new(0.0, 1.0);
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]);
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn projection_split() {
        let q = CMatrix::from_fn(4, 4, |_, _| real(0.25));
        let (r, k) = projection_bases(&q);
        assert_eq!((r.ncols(), k.ncols()), (1, 3));
        let rr = r.adjoint() * &r;
        assert!((rr[(0, 0)].re - 1.0).abs() < 1e-14);
    }
}
