//! Dense linear algebra helpers shared by the model types.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::{Scalar, C64};

pub fn to_complex<T: Scalar>(m: &DMatrix<T>) -> DMatrix<C64> {
    m.map(|v| C64::new(v.real(), v.imaginary()))
}

pub fn singular_values<T: Scalar>(m: &DMatrix<T>) -> DVector<f64> {
    if m.is_empty() {
        return DVector::zeros(0);
    }
    m.clone().svd(false, false).singular_values
}

/// Number of singular values above `rel_tol` times the largest one.
pub fn numerical_rank<T: Scalar>(m: &DMatrix<T>, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Ratio of the largest to the smallest singular value of a square matrix.
pub fn condition_number<T: Scalar>(m: &DMatrix<T>) -> f64 {
    let sv = singular_values(m);
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse through the singular value decomposition, refusing when the
/// condition number exceeds `cap`. Returns the inverse and the condition
/// number.
pub fn checked_inverse<T: Scalar>(m: &DMatrix<T>, what: &str, cap: f64) -> Result<(DMatrix<T>, f64)> {
    if !m.is_square() {
        return Err(Error::input(format!("{what} must be square")));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok((m.clone(), 1.0));
    }
    let svd = m.clone().svd(true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    let cond = if min == 0.0 { f64::INFINITY } else { max / min };
    if cond.is_nan() || cond > cap {
        return Err(Error::Conditioning { what: what.to_string(), cond, cap });
    }
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let mut sigma_inv_ut = u.adjoint();
    for (i, mut row) in sigma_inv_ut.row_iter_mut().enumerate() {
        row.scale_mut(1.0 / svd.singular_values[i]);
    }
    Ok((v_t.adjoint() * sigma_inv_ut, cond))
}

/// Eigenvalues through a complex Schur decomposition.
pub fn eigenvalues<T: Scalar>(m: &DMatrix<T>) -> Vec<C64> {
    let c = to_complex(m);
    if c.is_empty() {
        return Vec::new();
    }
    let (_, t) = c.schur().unpack();
    t.diagonal().iter().copied().collect()
}

/// Eigenvalues of magnitude above `zero_tol`, sorted by decreasing modulus.
pub fn nonzero_spectrum<T: Scalar>(m: &DMatrix<T>, zero_tol: f64) -> Vec<C64> {
    let mut ev: Vec<C64> = eigenvalues(m).into_iter().filter(|z| z.norm() > zero_tol).collect();
    ev.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

/// Largest distance between two spectra under a greedy nearest matching.
/// Returns `None` when the multisets have different sizes.
pub fn spectral_distance(a: &[C64], b: &[C64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut remaining: Vec<C64> = b.to_vec();
    let mut worst: f64 = 0.0;
    for z in a {
        let (idx, dist) = remaining
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (z - w).norm()))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(std::cmp::Ordering::Equal))?;
        worst = worst.max(dist);
        remaining.swap_remove(idx);
    }
    Some(worst)
}

pub fn max_abs_diff<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).map(|(x, y)| (*x - *y).modulus()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &DMatrix<C64>, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

pub fn is_unitary(u: &DMatrix<C64>, tol: f64) -> bool {
    u.is_square() && max_abs_diff(&(u.adjoint() * u), &DMatrix::identity(u.nrows(), u.ncols())) <= tol
}

pub fn trace(m: &DMatrix<C64>) -> C64 {
    m.diagonal().iter().sum()
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of `R`'s diagonal divided out.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let z = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) / 2f64.sqrt()
    });
    let (q, r) = z.qr().unpack();
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Random full-rank density matrix `G G^dagger / tr(G G^dagger)`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    let rho = &g * g.adjoint();
    let tr = trace(&rho);
    rho / tr
}

/// Orthonormal completion of the columns of an isometry (`n x k`, `k <= n`)
/// to an `n x n` unitary; the first `k` columns are kept unchanged.
pub fn complete_isometry(v: &DMatrix<C64>, tol: f64) -> Result<DMatrix<C64>> {
    let (n, k) = v.shape();
    if k > n {
        return Err(Error::input("isometry has more columns than rows"));
    }
    let gram = v.adjoint() * v;
    if max_abs_diff(&gram, &DMatrix::identity(k, k)) > tol {
        return Err(Error::NumericalIntegrity(
            "columns to be completed are not orthonormal".into(),
        ));
    }
    let mut cols: Vec<DVector<C64>> = v.column_iter().map(|c| c.into_owned()).collect();
    for e in 0..n {
        if cols.len() == n {
            break;
        }
        let mut cand = DVector::<C64>::zeros(n);
        cand[e] = C64::new(1.0, 0.0);
        // Two Gram-Schmidt passes.
        for _ in 0..2 {
            for c in &cols {
                let overlap = c.dotc(&cand);
                cand -= c * overlap;
            }
        }
        let norm = cand.norm();
        if norm > 1e-6 {
            cols.push(cand / C64::new(norm, 0.0));
        }
    }
    Ok(DMatrix::from_columns(&cols))
}
