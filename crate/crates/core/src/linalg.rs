//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted
/// ascending and eigenvector columns permuted to match.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let se = nalgebra::linalg::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Same for a real symmetric matrix.
pub fn eigh_real(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let se = nalgebra::linalg::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = DMatrix::<f64>::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// ||U^dag U - I||, the unitarity defect.
pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.ncols();
    (u.adjoint() * u - CMat::identity(n, n)).norm()
}

/// ||AB - BA||
pub fn commutator_norm(a: &CMat, b: &CMat) -> f64 {
    (a * b - b * a).norm()
}

/// Hermitian eigendecomposition with degeneracy-aware cleanup: eigenvalues
/// are clustered on the `grid`, and every cluster span of size two or more
/// is repaired by one step of shifted inverse iteration. The underlying QL
/// solver can leave interior degenerate clusters with span defects around
/// 1e-4, far above what exactly-degenerate sector structure tolerates.
pub fn eigh_clustered(m: &CMat, grid: f64) -> (Vec<f64>, CMat, Vec<Vec<usize>>) {
    let (vals, mut vecs) = eigh(m);
    let clusters = cluster_eigenvalues(&vals, grid);
    let n = m.nrows();
    for cluster in &clusters {
        if cluster.len() < 2 {
            continue;
        }
        let mean = cluster.iter().map(|&i| vals[i]).sum::<f64>() / cluster.len() as f64;
        // jitter keeps the shifted matrix invertible; the contraction toward
        // the true invariant subspace is gap / jitter per step
        let shifted = m - CMat::identity(n, n) * C64::new(mean + 1e-11, 0.0);
        let lu = shifted.lu();
        let mut block = CMat::zeros(n, cluster.len());
        for (c, &i) in cluster.iter().enumerate() {
            block.set_column(c, &vecs.column(i));
        }
        if let Some(solved) = lu.solve(&block) {
            let cols: Vec<CVec> = (0..cluster.len())
                .map(|c| {
                    let v = solved.column(c).clone_owned();
                    let norm = v.norm();
                    v / C64::new(norm.max(1e-300), 0.0)
                })
                .collect();
            let ortho = orthonormalize(&cols, 1e-9);
            if ortho.len() == cluster.len() {
                for (c, &i) in cluster.iter().enumerate() {
                    vecs.set_column(i, &ortho[c]);
                }
            }
        }
    }
    (vals, vecs, clusters)
}

/// Group eigenvalue indices into clusters separated by gaps larger than
/// `grid`. Input values must be sorted ascending.
pub fn cluster_eigenvalues(vals: &[f64], grid: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..vals.len() {
        match clusters.last_mut() {
            Some(c) if vals[i] - vals[*c.last().unwrap()] <= grid => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    clusters
}

/// Orthonormal basis of the span of `vecs` (modified Gram-Schmidt, two
/// passes), dropping directions with residual below `tol`.
pub fn orthonormalize(vecs: &[CVec], tol: f64) -> Vec<CVec> {
    let mut basis: Vec<CVec> = Vec::new();
    for v in vecs {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&w);
                w -= b * c;
            }
        }
        let norm = w.norm();
        if norm > tol {
            basis.push(w / C64::new(norm, 0.0));
        }
    }
    basis
}

/// Residual of `v` after projection onto the orthonormal columns of `basis`.
pub fn projection_residual(v: &CVec, basis: &[CVec]) -> f64 {
    let mut w = v.clone();
    for b in basis {
        let c = b.dotc(&w);
        w -= b * c;
    }
    w.norm()
}

/// Rephase a vector so its first component above `tol` is real positive.
pub fn fix_vector_phase(v: &mut CVec, tol: f64) {
    for i in 0..v.len() {
        let a = v[i];
        if a.norm() > tol {
            let phase = a / C64::new(a.norm(), 0.0);
            let correction = phase.conj();
            for x in v.iter_mut() {
                *x *= correction;
            }
            return;
        }
    }
}

/// Hermitian generator `H = -i log U` of a unitary, eigenphases in
/// `(-pi, pi]`. A unitary is normal, so its real and imaginary Hermitian
/// parts commute and a joint eigenbasis diagonalizes it.
pub fn unitary_log(u: &CMat) -> CMat {
    let n = u.nrows();
    let half = C64::new(0.5, 0.0);
    let c = (u + u.adjoint()) * half;
    let s = (u - u.adjoint()) * C64::new(0.0, -0.5);
    // within each eigenspace of the real part, diagonalize the imaginary part
    let (c_vals, c_vecs, clusters) = eigh_clustered(&c, 1e-10);
    let mut phases = vec![0.0; n];
    let mut vecs = CMat::zeros(n, n);
    for cluster in clusters {
        let k = cluster.len();
        let mut block = CMat::zeros(n, k);
        for (col, &i) in cluster.iter().enumerate() {
            block.set_column(col, &c_vecs.column(i));
        }
        let s_small = block.adjoint() * &s * &block;
        let (s_vals, s_vecs) = eigh(&s_small);
        let rotated = block * s_vecs;
        for (col, &i) in cluster.iter().enumerate() {
            vecs.set_column(i, &rotated.column(col));
            phases[i] = s_vals[col].atan2(c_vals[i]);
        }
    }
    let diag = CMat::from_diagonal(&CVec::from_iterator(
        n,
        phases.iter().map(|&t| C64::new(t, 0.0)),
    ));
    &vecs * diag * vecs.adjoint()
}

/// Matrix power by repeated squaring.
pub fn matrix_power(m: &CMat, mut p: u64) -> CMat {
    let n = m.nrows();
    let mut result = CMat::identity(n, n);
    let mut base = m.clone();
    while p > 0 {
        if p & 1 == 1 {
            result = &result * &base;
        }
        base = &base * &base;
        p >>= 1;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_recovers_hermitian_matrix() {
        let mut m = CMat::zeros(3, 3);
        m[(0, 0)] = C64::new(2.0, 0.0);
        m[(1, 1)] = C64::new(-1.0, 0.0);
        m[(0, 1)] = C64::new(0.5, 0.3);
        m[(1, 0)] = C64::new(0.5, -0.3);
        m[(2, 2)] = C64::new(0.25, 0.0);
        let (vals, vecs) = eigh(&m);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let lam = CMat::from_diagonal(&CVec::from_iterator(
            3,
            vals.iter().map(|&v| C64::new(v, 0.0)),
        ));
        let rebuilt = &vecs * lam * vecs.adjoint();
        assert!((rebuilt - m).norm() < 1e-12);
    }

    #[test]
    fn clustering_splits_on_gaps() {
        let vals = [0.0, 1e-10, 1.0, 1.0 + 1e-10, 2.0];
        let clusters = cluster_eigenvalues(&vals, 1e-8);
        assert_eq!(clusters.len(), 3);
        assert_eq!(clusters[0], vec![0, 1]);
        assert_eq!(clusters[2], vec![4]);
    }

    #[test]
    fn matrix_power_matches_repeated_product() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = C64::new(0.0, 1.0);
        m[(1, 0)] = C64::new(1.0, 0.0);
        let mut direct = CMat::identity(2, 2);
        for _ in 0..7 {
            direct = &direct * &m;
        }
        assert!((matrix_power(&m, 7) - direct).norm() < 1e-13);
    }
}
