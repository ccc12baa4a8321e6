//! Hermitian eigendecomposition and the spectral helpers built on it.
//!
//! The production path reduces the matrix to a real symmetric tridiagonal form
//! with complex Householder reflections, rescales the off-diagonal phases away,
//! and finishes with the implicit QL iteration (EISPACK `tql2`).

use crate::error::{Error, Result};
use crate::numerics::HermitianMatrix;
use crate::scalar::{cone, czero, Cx, Real};

/// Tolerance below which a negative eigenvalue still counts as PSD.
pub const PSD_TOL: f64 = 1e-9;

/// Eigenvalues sorted descending with their orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenDecomposition<T: Real> {
    dim: usize,
    eigenvalues: Vec<T>,
    // column k occupies vectors[k*dim..(k+1)*dim]
    vectors: Vec<Cx<T>>,
}

impl<T: Real> EigenDecomposition<T> {
    pub(crate) fn from_parts(dim: usize, eigenvalues: Vec<T>, vectors: Vec<Cx<T>>) -> Self {
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| {
            eigenvalues[b]
                .partial_cmp(&eigenvalues[a])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut vals = Vec::with_capacity(dim);
        let mut vecs = Vec::with_capacity(dim * dim);
        for &k in &order {
            vals.push(eigenvalues[k]);
            vecs.extend_from_slice(&vectors[k * dim..(k + 1) * dim]);
        }
        Self {
            dim,
            eigenvalues: vals,
            vectors: vecs,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Eigenvalues, largest first.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Unit eigenvector paired with `eigenvalues()[k]`.
    pub fn vector(&self, k: usize) -> &[Cx<T>] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }

    /// `U * diag(f(lambda)) * U^H`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> HermitianMatrix<T> {
        let mut out = HermitianMatrix::zeros(self.dim);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = f(lam);
            if w != T::zero() {
                out.add_outer(w, self.vector(k));
            }
        }
        out
    }

    pub fn reconstruct(&self) -> HermitianMatrix<T> {
        self.reconstruct_with(|l| l)
    }

    /// Max-entry deviation of the eigenvector Gram matrix from identity.
    pub fn orthonormality_error(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for a in 0..n {
            for b in a..n {
                let g = crate::scalar::dot_h(self.vector(a), self.vector(b));
                let target = if a == b { cone() } else { czero() };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn hermitian_eig<T: Real>(a: &HermitianMatrix<T>) -> EigenDecomposition<T> {
    let n = a.dim();
    if n == 1 {
        return EigenDecomposition::from_parts(1, vec![a.get(0, 0).re], vec![cone()]);
    }
    let (diag, off, q) = tridiagonalize(a);

    // Diagonal unitary D making the subdiagonal real and nonnegative.
    let mut phases = vec![cone::<T>(); n];
    let mut sub = vec![T::zero(); n];
    for i in 0..n - 1 {
        let r = off[i].norm();
        sub[i] = r;
        phases[i + 1] = if r > T::zero() {
            phases[i] * (off[i] / r)
        } else {
            phases[i]
        };
    }

    let mut d = diag;
    let mut vt = vec![T::zero(); n * n];
    for i in 0..n {
        vt[i * n + i] = T::one();
    }
    tql2(&mut d, &mut sub, &mut vt, n);

    // Eigenvectors of A: (Q * D) * V, V stored transposed in `vt`.
    let mut qd = q;
    for r in 0..n {
        for j in 0..n {
            qd[r * n + j] = qd[r * n + j] * phases[j];
        }
    }
    let mut vectors = vec![czero(); n * n];
    for c in 0..n {
        let vcol = &vt[c * n..(c + 1) * n];
        for r in 0..n {
            let row = &qd[r * n..(r + 1) * n];
            let mut acc = czero::<T>();
            for j in 0..n {
                acc += row[j] * vcol[j];
            }
            vectors[c * n + r] = acc;
        }
    }
    EigenDecomposition::from_parts(n, d, vectors)
}

/// Reduces `a` to Hermitian tridiagonal form `Q^H A Q`.
///
/// Returns (real diagonal, complex subdiagonal, Q row-major).
fn tridiagonalize<T: Real>(a: &HermitianMatrix<T>) -> (Vec<T>, Vec<Cx<T>>, Vec<Cx<T>>) {
    let n = a.dim();
    let mut m: Vec<Cx<T>> = a.as_slice().to_vec();
    let mut q = vec![czero::<T>(); n * n];
    for i in 0..n {
        q[i * n + i] = cone();
    }
    let mut v = vec![czero::<T>(); n];
    let mut p = vec![czero::<T>(); n];
    let two = T::lit(2.0);

    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let xnorm = (lo..n).map(|i| m[i * n + k].norm_sqr()).sum::<T>().sqrt();
        let below: T = (lo + 1..n).map(|i| m[i * n + k].norm_sqr()).sum();
        if xnorm == T::zero() || below == T::zero() {
            continue;
        }
        let x0 = m[lo * n + k];
        let x0n = x0.norm();
        let phase = if x0n > T::zero() { x0 / x0n } else { cone() };
        let alpha = -phase * xnorm;

        for i in lo..n {
            v[i] = m[i * n + k];
        }
        v[lo] -= alpha;
        let vnorm2: T = (lo..n).map(|i| v[i].norm_sqr()).sum();
        let tau = two / vnorm2;

        // p = tau * A_sub v
        for i in lo..n {
            let row = &m[i * n..(i + 1) * n];
            let mut acc = czero::<T>();
            for j in lo..n {
                acc += row[j] * v[j];
            }
            p[i] = acc * tau;
        }
        let mut vp = czero::<T>();
        for i in lo..n {
            vp += v[i].conj() * p[i];
        }
        let kk = vp.re * tau / two;
        for i in lo..n {
            p[i] -= v[i] * kk; // p now holds w
        }
        for i in lo..n {
            let vi = v[i];
            let wi = p[i];
            for j in lo..n {
                let upd = vi * p[j].conj() + wi * v[j].conj();
                m[i * n + j] -= upd;
            }
        }
        m[lo * n + k] = alpha;
        m[k * n + lo] = alpha.conj();
        for i in (lo + 1)..n {
            m[i * n + k] = czero();
            m[k * n + i] = czero();
        }

        // Q <- Q H
        for r in 0..n {
            let row = &mut q[r * n..(r + 1) * n];
            let mut s = czero::<T>();
            for j in lo..n {
                s += row[j] * v[j];
            }
            s = s * tau;
            for j in lo..n {
                row[j] -= s * v[j].conj();
            }
        }
    }

    let diag = (0..n).map(|i| m[i * n + i].re).collect();
    let off = (0..n - 1).map(|i| m[(i + 1) * n + i]).collect();
    (diag, off, q)
}

/// Implicit QL on a symmetric tridiagonal matrix (EISPACK tql2).
///
/// `e[i]` is the subdiagonal entry `(i+1, i)`; `e[n-1]` is scratch. `vt` holds
/// the accumulated eigenvectors transposed (row `i` is eigenvector `i`).
fn tql2<T: Real>(d: &mut [T], e: &mut [T], vt: &mut [T], n: usize) {
    let two = T::lit(2.0);
    let eps = T::epsilon();
    e[n - 1] = T::zero();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    break;
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (head, tail) = vt.split_at_mut((i + 1) * n);
                    let vi = &mut head[i * n..];
                    let vi1 = &mut tail[..n];
                    for k in 0..n {
                        let hk = vi1[k];
                        vi1[k] = s * vi[k] + c * hk;
                        vi[k] = c * vi[k] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
}

/// Largest eigenvalue and a unit eigenvector for it.
pub fn max_eigpair<T: Real>(a: &HermitianMatrix<T>) -> (T, Vec<Cx<T>>) {
    let eig = hermitian_eig(a);
    (eig.eigenvalues()[0], eig.vector(0).to_vec())
}

/// Frobenius-nearest PSD matrix: negative eigenvalues clamped to zero.
pub fn psd_project<T: Real>(a: &HermitianMatrix<T>) -> HermitianMatrix<T> {
    psd_project_with_eig(a).0
}

/// PSD projection that also hands back the decomposition it used.
pub fn psd_project_with_eig<T: Real>(
    a: &HermitianMatrix<T>,
) -> (HermitianMatrix<T>, EigenDecomposition<T>) {
    let eig = hermitian_eig(a);
    let proj = eig.reconstruct_with(|l| l.max(T::zero()));
    (proj, eig)
}

/// Smallest eigenvalue.
pub fn min_eigenvalue<T: Real>(a: &HermitianMatrix<T>) -> T {
    *hermitian_eig(a)
        .eigenvalues()
        .last()
        .expect("dimension at least one")
}

/// `Tr(Q) - lambda_max(Q)`: zero exactly when the PSD matrix `Q` has rank at most one.
///
/// Rejects matrices whose smallest eigenvalue is below `-1e-9` (relative to
/// `max(1, ||Q||_F)`).
pub fn rank_one_residual<T: Real>(q: &HermitianMatrix<T>) -> Result<T> {
    let eig = hermitian_eig(q);
    let vals = eig.eigenvalues();
    let min = *vals.last().expect("dimension at least one");
    let scale = q.frobenius_norm().max(T::one());
    if min < -T::lit(PSD_TOL) * scale {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min.as_f64(),
        });
    }
    Ok(vals[1..].iter().copied().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::jacobi_eig;
    use crate::numerics::test_support::{random_hermitian, random_psd, random_unitary};
    use crate::scalar::{cx, dot_h};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel_recon_error(a: &HermitianMatrix<f64>, eig: &EigenDecomposition<f64>) -> f64 {
        (&eig.reconstruct() - a).frobenius_norm() / a.frobenius_norm().max(1e-300)
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let eig = hermitian_eig(&HermitianMatrix::<f64>::identity(3));
        for &l in eig.eigenvalues() {
            assert!((l - 1.0).abs() < 1e-14);
        }
        assert!(eig.orthonormality_error() < 1e-12);
    }

    #[test]
    fn diagonal_input_returns_standard_basis() {
        let eig = hermitian_eig(&HermitianMatrix::<f64>::from_diagonal(&[5.0, -2.0]));
        assert_eq!(eig.eigenvalues(), &[5.0, -2.0]);
        assert!((eig.vector(0)[0].norm() - 1.0).abs() < 1e-14);
        assert!((eig.vector(1)[1].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &n in &[2usize, 3, 6, 16, 40] {
            let a = random_hermitian(&mut rng, n);
            let eig = hermitian_eig(&a);
            assert!(rel_recon_error(&a, &eig) < 1e-9, "n = {n}");
            assert!(eig.orthonormality_error() < 1e-9, "n = {n}");
            assert!(eig.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn agrees_with_jacobi_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 1..=12 {
            let a = random_hermitian(&mut rng, n);
            let ql = hermitian_eig(&a);
            let jac = jacobi_eig(&a);
            for (x, y) in ql.eigenvalues().iter().zip(jac.eigenvalues()) {
                assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()), "n = {n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn closed_form_characteristic_roots_small_dims() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        // 2x2: roots of l^2 - tr l + det
        for _ in 0..20 {
            let a = random_hermitian(&mut rng, 2);
            let (p, r, z) = (a.get(0, 0).re, a.get(1, 1).re, a.get(0, 1));
            let tr = p + r;
            let disc = ((p - r) * (p - r) + 4.0 * z.norm_sqr()).sqrt();
            let expected = [(tr + disc) / 2.0, (tr - disc) / 2.0];
            let eig = hermitian_eig(&a);
            for (x, y) in eig.eigenvalues().iter().zip(expected) {
                assert!((x - y).abs() < 1e-8);
            }
        }
        // 3x3: trigonometric solution of the depressed cubic.
        for _ in 0..20 {
            let a = random_hermitian(&mut rng, 3);
            let expected = cubic_roots_hermitian3(&a);
            let eig = hermitian_eig(&a);
            for (x, y) in eig.eigenvalues().iter().zip(expected) {
                assert!((x - y).abs() < 1e-8, "{x} vs {y}");
            }
        }
    }

    fn cubic_roots_hermitian3(a: &HermitianMatrix<f64>) -> [f64; 3] {
        let q = a.trace() / 3.0;
        let off = a.get(0, 1).norm_sqr() + a.get(0, 2).norm_sqr() + a.get(1, 2).norm_sqr();
        let p2 = (0..3).map(|i| (a.get(i, i).re - q).powi(2)).sum::<f64>() + 2.0 * off;
        let p = (p2 / 6.0).sqrt();
        // B = (A - qI)/p, r = det(B)/2
        let b = |i: usize, j: usize| {
            let mut z = a.get(i, j);
            if i == j {
                z.re -= q;
            }
            z / p
        };
        let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
            - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
            + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
        let r = (det.re / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let l1 = q + 2.0 * p * phi.cos();
        let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let l2 = 3.0 * q - l1 - l3;
        [l1, l2, l3]
    }

    #[test]
    fn max_eigpair_on_diagonal_and_rank_one() {
        let (l, u) = max_eigpair(&HermitianMatrix::<f64>::from_diagonal(&[1.0, 3.0, 2.0]));
        assert!((l - 3.0).abs() < 1e-14);
        assert!((u[1].norm() - 1.0).abs() < 1e-14);

        let q: Vec<Cx<f64>> = vec![cx(0.6, 0.0), cx(0.0, 0.48), cx(-0.64, 0.0)];
        let (l, u) = max_eigpair(&HermitianMatrix::outer(&q));
        assert!((l - 1.0).abs() < 1e-12);
        assert!((dot_h(&u, &q).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn max_eigpair_matches_full_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let a = random_hermitian(&mut rng, 5);
        let (l, u) = max_eigpair(&a);
        let eig = jacobi_eig(&a);
        assert!((l - eig.eigenvalues()[0]).abs() < 1e-9);
        let au = a.mul_vec(&u);
        for (x, y) in au.iter().zip(&u) {
            assert!((x - y * l).norm() < 1e-9);
        }
    }

    #[test]
    fn psd_projection_examples() {
        let p = psd_project(&HermitianMatrix::<f64>::from_diagonal(&[3.0, -1.0]));
        assert!(p.max_abs_diff(&HermitianMatrix::from_diagonal(&[3.0, 0.0])) < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let q = random_psd(&mut rng, 5, 3);
        assert!(psd_project(&q).max_abs_diff(&q) < 1e-9);
    }

    #[test]
    fn psd_projection_beats_random_psd_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let a = random_hermitian(&mut rng, 4);
        let p = psd_project(&a);
        let best = (&p - &a).frobenius_norm();
        assert!(min_eigenvalue(&p) >= -1e-9);
        for _ in 0..1000 {
            let rank = 1 + (rand::Rng::random::<u32>(&mut rng) % 4) as usize;
            let z = random_psd(&mut rng, 4, rank);
            assert!(best <= (&z - &a).frobenius_norm() + 1e-12);
        }
        // trace identity: Tr(P) = Tr(A) - sum of negative eigenvalues
        let neg: f64 = hermitian_eig(&a)
            .eigenvalues()
            .iter()
            .filter(|l| **l < 0.0)
            .sum();
        assert!((p.trace() - (a.trace() - neg)).abs() < 1e-9);
    }

    #[test]
    fn rank_one_residual_examples() {
        let q: Vec<Cx<f64>> = vec![cx(1.0, -1.0), cx(0.5, 2.0), cx(0.0, 0.3)];
        assert!(rank_one_residual(&HermitianMatrix::outer(&q)).unwrap().abs() < 1e-9);
        assert!((rank_one_residual(&HermitianMatrix::<f64>::identity(4)).unwrap() - 3.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let q = random_psd(&mut rng, 5, 5);
        let jac = jacobi_eig(&q);
        let expected: f64 = jac.eigenvalues()[1..].iter().sum();
        assert!((rank_one_residual(&q).unwrap() - expected).abs() < 1e-9);

        let indefinite = HermitianMatrix::<f64>::from_diagonal(&[1.0, -0.5]);
        assert!(matches!(
            rank_one_residual(&indefinite),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn rank_one_residual_is_unitarily_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..10 {
            let q = random_psd(&mut rng, 6, 3);
            let u = random_unitary(&mut rng, 6);
            let n = 6;
            // U^H Q U
            let rotated = HermitianMatrix::from_fn(n, |i, j| {
                let mut acc = cx(0.0, 0.0);
                for a in 0..n {
                    for b in 0..n {
                        acc += u[a * n + i].conj() * q.get(a, b) * u[b * n + j];
                    }
                }
                acc
            })
            .unwrap();
            let r0 = rank_one_residual(&q).unwrap();
            let r1 = rank_one_residual(&rotated).unwrap();
            assert!((r0 - r1).abs() < 1e-9);
        }
    }

    #[test]
    fn single_precision_instantiation() {
        let a = HermitianMatrix::<f32>::from_fn(3, |i, j| {
            if i == j {
                cx(i as f32 + 1.0, 0.0)
            } else if i < j {
                cx(0.25, 0.1)
            } else {
                cx(0.25, -0.1)
            }
        })
        .unwrap();
        let eig = hermitian_eig(&a);
        let err = (&eig.reconstruct() - &a).frobenius_norm() / a.frobenius_norm();
        assert!(err < 1e-5);
    }
}
