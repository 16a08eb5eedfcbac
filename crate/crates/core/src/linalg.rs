//! Jacobi-rotation kernels: a one-sided (Hestenes) thin SVD and a cyclic
//! eigensolver for small symmetric matrices.
//!
//! Both routines work on dense [`nalgebra`] storage and are written for the
//! small `p` typical of regression predictors.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Off-diagonal threshold for the one-sided SVD, relative to the column norms.
pub const SVD_TOLERANCE: f64 = 1e-14;
/// Off-diagonal threshold for the symmetric eigensolver.
pub const EIGEN_TOLERANCE: f64 = 1e-12;
const MAX_SVD_SWEEPS: usize = 100;
const MAX_EIGEN_SWEEPS: usize = 100;

/// Thin SVD `X = U · diag(s) · V'` with singular values in descending order.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    /// `n × p`, orthonormal columns (columns for zero singular values are zero).
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    /// `p × p` orthogonal.
    pub v: DMatrix<f64>,
}

/// One-sided Jacobi SVD of an `n × p` matrix with `n ≥ p`.
///
/// Columns of `V` are sign-normalised so that each column's largest-magnitude
/// entry is positive; the matching columns of `U` are flipped with them.
pub fn thin_svd(x: &DMatrix<f64>) -> Result<ThinSvd> {
    let (n, p) = x.shape();
    if n < p {
        return Err(Error::FatData { n, p });
    }
    let mut a = x.clone();
    let mut v = DMatrix::<f64>::identity(p, p);

    let mut converged = p < 2;
    for _ in 0..MAX_SVD_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for i in 0..p - 1 {
            for j in i + 1..p {
                let alpha = a.column(i).norm_squared();
                let beta = a.column(j).norm_squared();
                let gamma = a.column(i).dot(&a.column(j));
                if gamma == 0.0 || gamma.abs() <= SVD_TOLERANCE * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut a, i, j, c, s);
                rotate_columns(&mut v, i, j, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: MAX_SVD_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..p).collect();
    let norms: Vec<f64> = (0..p).map(|j| a.column(j).norm()).collect();
    order.sort_by(|&l, &r| norms[r].total_cmp(&norms[l]));

    let mut u = DMatrix::<f64>::zeros(n, p);
    let mut vs = DMatrix::<f64>::zeros(p, p);
    let mut s = DVector::<f64>::zeros(p);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        s[dst] = sigma;
        let mut vcol = v.column(src).clone_owned();
        let mut ucol = if sigma > 0.0 {
            a.column(src) / sigma
        } else {
            DVector::zeros(n)
        };
        if largest_magnitude(vcol.as_slice()) < 0.0 {
            vcol.neg_mut();
            ucol.neg_mut();
        }
        vs.set_column(dst, &vcol);
        u.set_column(dst, &ucol);
    }
    Ok(ThinSvd {
        u,
        singular_values: s,
        v: vs,
    })
}

fn rotate_columns(m: &mut DMatrix<f64>, i: usize, j: usize, c: f64, s: f64) {
    for r in 0..m.nrows() {
        let mi = m[(r, i)];
        let mj = m[(r, j)];
        m[(r, i)] = c * mi - s * mj;
        m[(r, j)] = s * mi + c * mj;
    }
}

/// The entry of largest magnitude (first one on ties), with its sign.
pub fn largest_magnitude(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(
        0.0_f64,
        |best, x| if x.abs() > best.abs() { x } else { best },
    )
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Descending.
    pub values: DVector<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: DMatrix<f64>,
}

/// Cyclic Jacobi eigensolver for a symmetric matrix (only the upper triangle
/// is trusted; the input is symmetrised first).
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let p = m.nrows();
    if m.ncols() != p {
        return Err(Error::Dimension {
            expected: p,
            got: m.ncols(),
        });
    }
    let mut a = (m + m.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(p, p);
    let scale = a.norm().max(f64::MIN_POSITIVE);

    let mut converged = false;
    for _ in 0..MAX_EIGEN_SWEEPS {
        let off: f64 = (0..p)
            .flat_map(|i| (0..p).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= EIGEN_TOLERANCE * scale {
            converged = true;
            break;
        }
        for i in 0..p.saturating_sub(1) {
            for j in i + 1..p {
                let apq = a[(i, j)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(j, j)] - a[(i, i)]) / (2.0 * apq);
                let t = if theta.is_finite() {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                } else {
                    0.0
                };
                if t == 0.0 {
                    a[(i, j)] = 0.0;
                    a[(j, i)] = 0.0;
                    continue;
                }
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- J' A J with J the plane rotation in (i, j)
                rotate_columns(&mut a, i, j, c, s);
                for col in 0..p {
                    let ai = a[(i, col)];
                    let aj = a[(j, col)];
                    a[(i, col)] = c * ai - s * aj;
                    a[(j, col)] = s * ai + c * aj;
                }
                a[(i, j)] = 0.0;
                a[(j, i)] = 0.0;
                rotate_columns(&mut v, i, j, c, s);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: MAX_EIGEN_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&l, &r| a[(r, r)].total_cmp(&a[(l, l)]));
    let values = DVector::from_iterator(p, order.iter().map(|&k| a[(k, k)]));
    let mut vectors = DMatrix::<f64>::zeros(p, p);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    Ok(SymmetricEigen { values, vectors })
}
