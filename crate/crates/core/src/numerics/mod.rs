//! Complex Hermitian linear algebra kernel.

mod eig;
mod jacobi;
mod matrix;

pub use eig::{
    hermitian_eig, max_eigpair, min_eigenvalue, psd_project, psd_project_with_eig,
    rank_one_residual, EigenDecomposition, PSD_TOL,
};
pub use jacobi::jacobi_eig;
pub use matrix::{HermitianMatrix, HERMITIAN_TOL};

#[cfg(test)]
pub(crate) mod test_support {
    use super::HermitianMatrix;
    use crate::scalar::{cx, dot_h, Cx};
    use rand::Rng;
    use rand_distr::StandardNormal;

    pub fn random_cvec(rng: &mut impl Rng, n: usize) -> Vec<Cx<f64>> {
        (0..n)
            .map(|_| cx(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect()
    }

    pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> HermitianMatrix<f64> {
        let g: Vec<Cx<f64>> = random_cvec(rng, n * n);
        HermitianMatrix::from_fn(n, |i, j| (g[i * n + j] + g[j * n + i].conj()) * 0.5).unwrap()
    }

    pub fn random_psd(rng: &mut impl Rng, n: usize, rank: usize) -> HermitianMatrix<f64> {
        let mut m = HermitianMatrix::zeros(n);
        for _ in 0..rank {
            m.add_outer(1.0, &random_cvec(rng, n));
        }
        m
    }

    /// Haar-ish unitary via Gram-Schmidt on a Gaussian matrix; row-major.
    pub fn random_unitary(rng: &mut impl Rng, n: usize) -> Vec<Cx<f64>> {
        let mut cols: Vec<Vec<Cx<f64>>> = Vec::new();
        while cols.len() < n {
            let mut v = random_cvec(rng, n);
            for c in &cols {
                let p = dot_h(c, &v);
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= y * p;
                }
            }
            let nv = crate::scalar::norm_sqr(&v).sqrt();
            v.iter_mut().for_each(|x| *x /= nv);
            cols.push(v);
        }
        let mut u = vec![cx(0.0, 0.0); n * n];
        for (c, col) in cols.iter().enumerate() {
            for (r, x) in col.iter().enumerate() {
                u[r * n + c] = *x;
            }
        }
        u
    }
}
