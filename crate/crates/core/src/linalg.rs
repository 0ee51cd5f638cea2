//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default ratio `σ_min/σ_max` below which a matrix counts as rank deficient.
pub const RANK_RATIO: f64 = 1e-8;

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `ratio·σ_max`.
pub fn numerical_rank(m: &CMatrix, ratio: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&max) if max > 0.0 => s.iter().filter(|&&v| v > ratio * max).count(),
        _ => 0,
    }
}

/// Thin singular value decomposition `m = U·diag(σ)·V*`, `σ` descending.
/// Columns of `U` belonging to zero singular values are zero.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

/// One-sided Jacobi SVD. nalgebra's complex SVD returns inaccurate singular
/// vectors on some rank-deficient inputs; its singular values are reliable.
pub fn jacobi_svd(m: &CMatrix) -> Svd {
    let (rows, n) = m.shape();
    let mut a = m.clone();
    let mut v = CMatrix::identity(n, n);
    let eps = f64::EPSILON;
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g <= eps * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                for mat in [&mut a, &mut v] {
                    for i in 0..mat.nrows() {
                        let x = mat[(i, p)];
                        let y = mat[(i, q)] * phase.conj();
                        mat[(i, p)] = x * c - y * sn;
                        mat[(i, q)] = x * sn + y * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let smax = norms.iter().copied().fold(0.0, f64::max);
    let mut u = CMatrix::zeros(rows, n);
    let mut vs = CMatrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        if s > eps * smax * (n.max(rows) as f64) {
            u.set_column(k, &(a.column(j) / Complex64::new(s, 0.0)));
        }
        vs.set_column(k, &v.column(j));
    }
    Svd { u, sigma, v: vs }
}

/// Unit vector `v` minimizing `‖m·v‖`, with the ratio `σ_min/σ_max`.
pub fn null_vector(m: &CMatrix) -> (CVector, f64) {
    let n = m.ncols();
    let rows = m.nrows().max(n);
    let mut sq = CMatrix::zeros(rows, n);
    sq.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = jacobi_svd(&sq);
    let smax = svd.sigma[0];
    let smin = svd.sigma[n - 1];
    (svd.v.column(n - 1).into_owned(), if smax > 0.0 { smin / smax } else { 0.0 })
}

/// Gram–Schmidt with one reorthogonalization pass. Vectors whose residual
/// falls below `tol` times their norm are skipped; columns are taken in the
/// order given.
pub fn orthonormal_basis(vectors: &[CVector], tol: f64) -> Vec<CVector> {
    let mut basis: Vec<CVector> = Vec::new();
    for v in vectors {
        let norm = v.norm();
        if norm == 0.0 {
            continue;
        }
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&r);
                r.axpy(-c, q, Complex64::new(1.0, 0.0));
            }
        }
        let rn = r.norm();
        if rn > tol * norm {
            basis.push(r / Complex64::new(rn, 0.0));
        }
    }
    basis
}

/// `min over |s| = 1 of ‖a − s·b‖_F`.
pub fn projective_residual(a: &CMatrix, b: &CMatrix) -> f64 {
    let inner: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let s = if inner.norm() > 0.0 { inner / inner.norm() } else { Complex64::new(1.0, 0.0) };
    (a - b * s).norm()
}

/// Fitted unimodular scalar `s` with `a ≈ s·b`.
pub fn fitted_phase(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let inner: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    if inner.norm() > 0.0 {
        inner / inner.norm()
    } else {
        Complex64::new(1.0, 0.0)
    }
}

/// Whether `m` is a scalar multiple of the identity, within `tol` relative.
pub fn scalar_of_identity(m: &CMatrix, tol: f64) -> Option<Complex64> {
    let n = m.nrows();
    let s = m[(0, 0)];
    let scale = m.norm() / (n as f64).sqrt();
    if scale == 0.0 {
        return None;
    }
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j { s } else { Complex64::new(0.0, 0.0) };
            if (m[(i, j)] - expected).norm() > tol * scale {
                return None;
            }
        }
    }
    Some(s)
}

pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - CMatrix::identity(n, n)).norm()
}

/// Adjugate via cofactors: `adj(Z)[j][i] = (−1)^{i+j} det(Z without row i, column j)`.
pub fn adjugate(z: &CMatrix) -> CMatrix {
    let n = z.nrows();
    if n == 1 {
        return CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    }
    CMatrix::from_fn(n, n, |j, i| {
        let minor = z.clone().remove_row(i).remove_column(j);
        let d = minor.determinant();
        if (i + j) % 2 == 0 {
            d
        } else {
            -d
        }
    })
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}
