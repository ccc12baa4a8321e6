//! Cyclic complex Jacobi eigensolver.
//!
//! Slower than the tridiagonal path but built from independent machinery, so
//! the two routes cross-check each other.

use crate::numerics::{EigenDecomposition, HermitianMatrix};
use crate::scalar::{cone, czero, Cx, Real};

const MAX_SWEEPS: usize = 100;

pub fn jacobi_eig<T: Real>(a: &HermitianMatrix<T>) -> EigenDecomposition<T> {
    let n = a.dim();
    let mut m: Vec<Cx<T>> = a.as_slice().to_vec();
    // columns of V are eigenvectors, row-major storage
    let mut v = vec![czero::<T>(); n * n];
    for i in 0..n {
        v[i * n + i] = cone();
    }
    let scale = a.frobenius_norm_sqr().max(T::min_positive_value());

    for _ in 0..MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].norm_sqr())
            .sum();
        if off <= T::epsilon() * T::epsilon() * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                let r = apq.norm();
                if r == T::zero() {
                    continue;
                }
                let e = apq / r;
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                let theta = (aqq - app) / (T::lit(2.0) * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // G = diag(1, conj(e)) * [[c, s], [-s, c]]
                let gpp = Cx::new(c, T::zero());
                let gpq = Cx::new(s, T::zero());
                let gqp = e.conj() * (-s);
                let gqq = e.conj() * c;

                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = mkp * gpp + mkq * gqp;
                    m[k * n + q] = mkp * gpq + mkq * gqq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = gpp.conj() * mpk + gqp.conj() * mqk;
                    m[q * n + k] = gpq.conj() * mpk + gqq.conj() * mqk;
                }
                m[p * n + q] = czero();
                m[q * n + p] = czero();
                m[p * n + p].im = T::zero();
                m[q * n + q].im = T::zero();

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * gpp + vkq * gqp;
                    v[k * n + q] = vkp * gpq + vkq * gqq;
                }
            }
        }
    }

    let vals = (0..n).map(|i| m[i * n + i].re).collect();
    let mut cols = Vec::with_capacity(n * n);
    for c in 0..n {
        for r in 0..n {
            cols.push(v[r * n + c]);
        }
    }
    EigenDecomposition::from_parts(n, vals, cols)
}
