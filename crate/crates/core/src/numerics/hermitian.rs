//! Dense Hermitian helpers for the d-level extension.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 64;

/// Largest entry of `|H − H†|` relative to `max(1, max|H_ij|)`.
pub fn hermiticity_error(h: &DMatrix<C64>) -> f64 {
    let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let n = h.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

pub fn check_hermitian(h: &DMatrix<C64>, tol: f64, what: &str) -> Result<()> {
    if !h.is_square() {
        return Err(Error::contract(format!("{what} is {}x{}, not square", h.nrows(), h.ncols())));
    }
    if h.nrows() > MAX_DIM {
        return Err(Error::contract(format!(
            "{what} has dimension {} above the supported {MAX_DIM}",
            h.nrows()
        )));
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::contract(format!("{what} has non-finite entries")));
    }
    let err = hermiticity_error(h);
    if err > tol {
        return Err(Error::contract(format!("{what} is not Hermitian (|H - H†| = {err:.3e})")));
    }
    Ok(())
}

/// Eigenvalues in ascending order with matching eigenvector columns.
pub fn eigh(h: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = h.nrows();
    // Average with the adjoint so round-off asymmetry never reaches the solver.
    let sym = (h + h.adjoint()).map(|z| z * 0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

/// `exp(−i H dt)` by eigendecomposition.
pub fn herm_exp(h: &DMatrix<C64>, dt: f64) -> Result<DMatrix<C64>> {
    check_hermitian(h, 1e-12, "generator")?;
    let (values, vectors) = eigh(h);
    let mut scaled = vectors.clone();
    for (k, e) in values.iter().enumerate() {
        let phase = C64::from_polar(1.0, -e * dt);
        for z in scaled.column_mut(k).iter_mut() {
            *z *= phase;
        }
    }
    Ok(scaled * vectors.adjoint())
}

/// Largest entry of `|U†U − I|`.
pub fn unitarity_error(u: &DMatrix<C64>) -> f64 {
    let p = u.adjoint() * u;
    let n = u.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - C64::new(id, 0.0)).norm());
        }
    }
    worst
}
