//! Lowest eigenpair of a large symmetric operator by a block-one LOBPCG
//! iteration, plus a dense reference solver for small problems.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par;

/// A symmetric linear operator applied matrix-free.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// An upper bound on the spectral radius; residuals are measured relative to it.
    fn norm_bound(&self) -> f64;

    /// Dense matrix, built column by column.
    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut a = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            a.column_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        a
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LobpcgOptions {
    /// Stop when ‖Ax − λx‖ ≤ tol · norm_bound · ‖x‖.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LobpcgOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 1000 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenPair {
    pub value: f64,
    /// Unit Euclidean norm.
    #[serde(skip)]
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual.
    pub residual: f64,
    pub history: Vec<f64>,
}

/// Smallest eigenpair. `precond` maps a residual to a search direction and
/// `project` restricts iterates to an invariant subspace (both optional).
pub fn lobpcg(
    op: &dyn SymmetricOperator,
    precond: Option<&(dyn Fn(&[f64], &mut [f64]) + Sync)>,
    project: Option<&(dyn Fn(&mut [f64]) + Sync)>,
    x0: Vec<f64>,
    opts: LobpcgOptions,
) -> Result<EigenPair> {
    let n = op.dim();
    if x0.len() != n {
        return Err(Error::Dimension(format!("start vector has length {}, operator {}", x0.len(), n)));
    }
    let scale = op.norm_bound().max(f64::MIN_POSITIVE);
    let mut x = x0;
    if let Some(pr) = project {
        pr(&mut x);
    }
    let nx = par::norm(&x);
    if !(nx > 0.0) {
        return Err(Error::Invalid("start vector vanishes in the target subspace".into()));
    }
    par::scale(1.0 / nx, &mut x);

    let mut ax = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut aw = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut p: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut history = Vec::new();

    for it in 0..=opts.max_iter {
        op.apply(&x, &mut ax);
        let lambda = par::dot(&x, &ax);
        r.copy_from_slice(&ax);
        par::axpy(-lambda, &x, &mut r);
        let res = par::norm(&r) / scale;
        history.push(res);
        if res <= opts.tol {
            return Ok(EigenPair { value: lambda, vector: x, iterations: it, residual: res, history });
        }
        if it == opts.max_iter {
            break;
        }

        match precond {
            Some(t) => t(&r, &mut w),
            None => w.copy_from_slice(&r),
        }
        if let Some(pr) = project {
            pr(&mut w);
        }
        for _ in 0..2 {
            let c = par::dot(&x, &w);
            par::axpy(-c, &x, &mut w);
        }
        let nw = par::norm(&w);
        if !(nw > 0.0) || !nw.is_finite() {
            break;
        }
        par::scale(1.0 / nw, &mut w);
        op.apply(&w, &mut aw);

        let mut keep_p = false;
        if let Some((pv, apv)) = p.as_mut() {
            let before = par::norm(pv);
            for (b, ab) in [(&x, &ax), (&w, &aw)] {
                let c = par::dot(b, pv);
                par::axpy(-c, b, pv);
                par::axpy(-c, ab, apv);
            }
            let np = par::norm(pv);
            if np > 1e-10 * before && np.is_finite() {
                par::scale(1.0 / np, pv);
                par::scale(1.0 / np, apv);
                keep_p = true;
            }
        }
        if !keep_p {
            p = None;
        }

        let k = if p.is_some() { 3 } else { 2 };
        let mut s = DMatrix::<f64>::zeros(k, k);
        {
            let basis: Vec<(&[f64], &[f64])> = match &p {
                Some((pv, apv)) => vec![(&x, &ax), (&w, &aw), (pv, apv)],
                None => vec![(&x, &ax), (&w, &aw)],
            };
            for i in 0..k {
                for j in i..k {
                    let v = 0.5 * (par::dot(basis[i].0, basis[j].1) + par::dot(basis[j].0, basis[i].1));
                    s[(i, j)] = v;
                    s[(j, i)] = v;
                }
            }
        }
        let eig = SymmetricEigen::new(s);
        let imin = (0..k).min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).unwrap();
        let c: Vec<f64> = (0..k).map(|i| eig.eigenvectors[(i, imin)]).collect();

        // new direction p = c1 w + c2 p, new x = c0 x + p
        let mut pn = vec![0.0; n];
        let mut apn = vec![0.0; n];
        par::axpy(c[1], &w, &mut pn);
        par::axpy(c[1], &aw, &mut apn);
        if let Some((pv, apv)) = &p {
            par::axpy(c[2], pv, &mut pn);
            par::axpy(c[2], apv, &mut apn);
        }
        par::scale(c[0], &mut x);
        par::axpy(1.0, &pn, &mut x);
        if let Some(pr) = project {
            pr(&mut x);
        }
        let nx = par::norm(&x);
        par::scale(1.0 / nx, &mut x);
        p = Some((pn, apn));
    }
    let last = history.last().copied().unwrap_or(f64::NAN);
    Err(Error::NoConvergence { iterations: history.len().saturating_sub(1), last_residual: last, history })
}

/// Lowest eigenpair of a dense symmetric matrix (reference solver).
pub fn dense_lowest(a: DMatrix<f64>) -> (f64, Vec<f64>) {
    let eig = SymmetricEigen::new(a);
    let imin = (0..eig.eigenvalues.len())
        .min_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]))
        .unwrap();
    (eig.eigenvalues[imin], eig.eigenvectors.column(imin).iter().copied().collect())
}

/// A dense symmetric matrix as an operator.
pub struct DenseOperator(pub DMatrix<f64>);

impl SymmetricOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.0.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.0.nrows();
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (0..n).map(|j| self.0[(i, j)] * x[j]).sum();
        }
    }
    fn norm_bound(&self) -> f64 {
        (0..self.0.nrows()).map(|i| self.0.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        &b + b.transpose()
    }

    #[test]
    fn finds_lowest_eigenvalue_of_random_matrix() {
        let a = random_symmetric(40, 1);
        let (want, _) = dense_lowest(a.clone());
        let op = DenseOperator(a);
        let x0 = vec![1.0; 40];
        let got = lobpcg(&op, None, None, x0, LobpcgOptions { tol: 1e-13, max_iter: 2000 }).unwrap();
        assert!((got.value - want).abs() < 1e-10, "{} vs {want}", got.value);
    }

    #[test]
    fn reports_non_convergence_with_history() {
        let op = DenseOperator(random_symmetric(30, 2));
        let err = lobpcg(&op, None, None, vec![1.0; 30], LobpcgOptions { tol: 1e-15, max_iter: 2 }).unwrap_err();
        match err {
            Error::NoConvergence { iterations, history, .. } => {
                assert_eq!(iterations, 2);
                assert_eq!(history.len(), 3);
            }
            e => panic!("unexpected {e}"),
        }
    }
}
