use crate::numerics::HermitianMatrix;
use crate::scalar::Real;

use super::{ElementRule, QsdpProblem, TraceConstraint, Variable};

/// One side of a constraint row.
#[derive(Clone, Debug)]
pub(crate) enum Operand<T: Real> {
    Zero,
    Dense(HermitianMatrix<T>),
    /// `coef * E_mm`.
    Diag { index: usize, coef: T },
}

impl<T: Real> Operand<T> {
    pub(crate) fn apply(&self, x: &HermitianMatrix<T>) -> T {
        match self {
            Operand::Zero => T::zero(),
            Operand::Dense(a) => a.inner(x),
            Operand::Diag { index, coef } => *coef * x.get(*index, *index).re,
        }
    }

    pub(crate) fn add_scaled_to(&self, y: T, acc: &mut HermitianMatrix<T>) {
        match self {
            Operand::Zero => {}
            Operand::Dense(a) => acc.axpy(y, a),
            Operand::Diag { index, coef } => acc.add_to_diagonal(*index, y * *coef),
        }
    }

    fn inner(&self, other: &Self) -> T {
        use Operand::*;
        match (self, other) {
            (Zero, _) | (_, Zero) => T::zero(),
            (Dense(a), Dense(b)) => a.inner(b),
            (Dense(a), Diag { index, coef }) | (Diag { index, coef }, Dense(a)) => {
                *coef * a.get(*index, *index).re
            }
            (Diag { index: i, coef: a }, Diag { index: j, coef: b }) => {
                if i == j {
                    *a * *b
                } else {
                    T::zero()
                }
            }
        }
    }

    fn scaled(&self, s: T) -> Self {
        match self {
            Operand::Zero => Operand::Zero,
            Operand::Dense(a) => Operand::Dense(a.scaled(s)),
            Operand::Diag { index, coef } => Operand::Diag {
                index: *index,
                coef: *coef * s,
            },
        }
    }
}

/// `apply_t(Q_t) + apply_r(Q_r) (>= or =) bound`.
#[derive(Clone, Debug)]
pub(crate) struct Row<T: Real> {
    pub t: Operand<T>,
    pub r: Operand<T>,
    pub bound: T,
    pub ineq: bool,
    /// Diagonal-rule rows report violations in absolute terms.
    pub diagonal: bool,
}

impl<T: Real> Row<T> {
    pub(crate) fn apply(&self, x_t: &HermitianMatrix<T>, x_r: &HermitianMatrix<T>) -> T {
        self.t.apply(x_t) + self.r.apply(x_r)
    }

    pub(crate) fn inner(&self, other: &Self) -> T {
        self.t.inner(&other.t) + self.r.inner(&other.r)
    }

    pub(crate) fn norm(&self) -> T {
        self.inner(self).sqrt()
    }

    pub(crate) fn scaled(&self, s: T) -> Self {
        Self {
            t: self.t.scaled(s),
            r: self.r.scaled(s),
            bound: self.bound * s,
            ineq: self.ineq,
            diagonal: self.diagonal,
        }
    }
}

fn trace_row<T: Real>(c: &TraceConstraint<T>, ineq: bool) -> Row<T> {
    let dense = Operand::Dense(c.matrix.clone());
    let (t, r) = match c.target {
        Variable::Transmit => (dense, Operand::Zero),
        Variable::Reflect => (Operand::Zero, dense),
    };
    Row {
        t,
        r,
        bound: c.bound,
        ineq,
        diagonal: false,
    }
}

/// Rows in multiplier order: inequalities, equalities, diagonal rules.
pub(crate) fn build_rows<T: Real>(prob: &QsdpProblem<T>) -> Vec<Row<T>> {
    let mut rows: Vec<Row<T>> = prob.ineq_constraints.iter().map(|c| trace_row(c, true)).collect();
    rows.extend(prob.eq_constraints.iter().map(|c| trace_row(c, false)));
    let one = T::one();
    let diag = |index| Operand::Diag { index, coef: one };
    for m in 0..prob.dim {
        let eq = |t, r, bound| Row {
            t,
            r,
            bound,
            ineq: false,
            diagonal: true,
        };
        match prob.diagonal.rule(m) {
            None => {}
            Some(ElementRule::Coupled) => rows.push(eq(diag(m), diag(m), one)),
            Some(ElementRule::TransmitOnly) => rows.push(eq(diag(m), Operand::Zero, one)),
            Some(ElementRule::ReflectOnly) => rows.push(eq(Operand::Zero, diag(m), one)),
        }
    }
    rows
}

/// In-place Cholesky factor (lower, row-major) of a symmetric positive definite matrix.
pub(crate) fn cholesky<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > T::zero()) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

pub(crate) fn cholesky_solve<T: Real>(l: &[T], n: usize, b: &mut [T]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_system() {
        let a = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let l = cholesky(&a, 3).unwrap();
        let x = [1.0, -2.0, 0.5];
        let mut b: Vec<f64> = (0..3).map(|i| (0..3).map(|j| a[i * 3 + j] * x[j]).sum()).collect();
        cholesky_solve(&l, 3, &mut b);
        for (u, v) in b.iter().zip(x) {
            assert!((u - v).abs() < 1e-14);
        }
        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
    }
}
