use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::ArmEmbedding;

const SPAN_CUTOFF: f64 = 1e-10;
const MAX_ITERS: usize = 500;

/// Orthonormal basis (as columns) of the span of the rows.
fn span_basis(rows: &[Vec<f64>], dim: usize) -> DMatrix<f64> {
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    for r in rows {
        let z = DVector::from_column_slice(r);
        gram += &z * z.transpose();
    }
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..dim)
        .filter(|&i| eig.eigenvalues[i] > SPAN_CUTOFF * top.max(1.0))
        .collect();
    DMatrix::from_fn(dim, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])])
}

/// Approximate G-optimal design by Frank-Wolfe on `log det`, stopped once
/// every leverage is at most twice the span dimension. Falls back to the
/// uniform distribution when the rows span nothing.
pub fn g_optimal_design(embedding: &ArmEmbedding) -> Vec<f64> {
    let m = embedding.len();
    let uniform = vec![1.0 / m as f64; m];
    let basis = span_basis(embedding.rows(), embedding.dim());
    let d = basis.ncols();
    if d == 0 {
        return uniform;
    }
    let ys: Vec<DVector<f64>> = embedding
        .rows()
        .iter()
        .map(|r| basis.transpose() * DVector::from_column_slice(r))
        .collect();
    let mut w = uniform.clone();
    for _ in 0..MAX_ITERS {
        let mut v = DMatrix::<f64>::zeros(d, d);
        for (y, wi) in ys.iter().zip(&w) {
            if *wi > 0.0 {
                v += *wi * (y * y.transpose());
            }
        }
        let Some(vinv) = v.try_inverse() else {
            return uniform;
        };
        let (best, g) = ys.iter().map(|y| (y.transpose() * &vinv * y)[(0, 0)]).enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, g)| if g > acc.1 { (i, g) } else { acc },
        );
        if !g.is_finite() {
            return uniform;
        }
        if g <= 2.0 * d as f64 {
            break;
        }
        let step = (g / d as f64 - 1.0) / (g - 1.0);
        for wi in w.iter_mut() {
            *wi *= 1.0 - step;
        }
        w[best] += step;
    }
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

/// `max_m z_m^T V^+ z_m` with `V = sum_m w_m z_m z_m^T`, computed in the
/// ambient dimension through a pseudo-inverse.
pub fn max_leverage(embedding: &ArmEmbedding, design: &[f64]) -> f64 {
    let k = embedding.dim();
    let mut v = DMatrix::<f64>::zeros(k, k);
    for (r, w) in embedding.rows().iter().zip(design) {
        let z = DVector::from_column_slice(r);
        v += *w * (&z * z.transpose());
    }
    let Ok(pinv) = v.pseudo_inverse(1e-12) else {
        return f64::INFINITY;
    };
    embedding
        .rows()
        .iter()
        .map(|r| {
            let z = DVector::from_column_slice(r);
            (z.transpose() * &pinv * &z)[(0, 0)]
        })
        .fold(0.0, f64::max)
}
