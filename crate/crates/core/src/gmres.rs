//! Restart-free GMRES with modified Gram-Schmidt and Givens rotations.

use crate::error::{Error, Result};

/// A square real linear operator.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[f64]) -> Vec<f64>;

    /// Column-major dense matrix of the operator.
    fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            out.extend(self.apply(&e));
            e[j] = 0.0;
        }
        out
    }
}

/// Dense operator over a column-major matrix.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_col_major(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (j, col) in self.data.chunks(self.n).enumerate() {
            for (yi, a) in y.iter_mut().zip(col) {
                *yi += a * x[j];
            }
        }
        y
    }

    fn to_dense(&self) -> Vec<f64> {
        self.data.clone()
    }
}

#[derive(Debug, Clone)]
pub struct GmresResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual `‖b − Ax‖/‖b‖`.
    pub residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `Ax = b` from `x₀ = 0`, stopping when the relative residual drops
/// below `tol` or after `maxit` Arnoldi steps.
pub fn gmres(op: &dyn LinearOperator, b: &[f64], tol: f64, maxit: usize) -> Result<GmresResult> {
    let n = op.dim();
    assert_eq!(b.len(), n);
    let beta = norm(b);
    if beta == 0.0 {
        return Ok(GmresResult {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
        });
    }
    let maxit = maxit.min(n).max(1);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(maxit + 1);
    basis.push(b.iter().map(|v| v / beta).collect());
    // column k of the Hessenberg matrix, already rotated
    let mut h: Vec<Vec<f64>> = Vec::with_capacity(maxit);
    let mut cs: Vec<f64> = Vec::with_capacity(maxit);
    let mut sn: Vec<f64> = Vec::with_capacity(maxit);
    let mut g = vec![0.0; maxit + 1];
    g[0] = beta;
    let mut k = 0;
    let mut rel = 1.0;
    while k < maxit {
        let mut w = op.apply(&basis[k]);
        let mut col = vec![0.0; k + 2];
        for (i, v) in basis.iter().enumerate() {
            let hij = dot(&w, v);
            col[i] = hij;
            for (wj, vj) in w.iter_mut().zip(v) {
                *wj -= hij * vj;
            }
        }
        let hnext = norm(&w);
        col[k + 1] = hnext;
        for i in 0..k {
            let tmp = cs[i] * col[i] + sn[i] * col[i + 1];
            col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
            col[i] = tmp;
        }
        let r = col[k].hypot(col[k + 1]);
        let (c, s) = if r == 0.0 {
            (1.0, 0.0)
        } else {
            (col[k] / r, col[k + 1] / r)
        };
        col[k] = r;
        col[k + 1] = 0.0;
        cs.push(c);
        sn.push(s);
        g[k + 1] = -s * g[k];
        g[k] *= c;
        h.push(col);
        k += 1;
        rel = g[k].abs() / beta;
        if rel <= tol || hnext == 0.0 {
            break;
        }
        basis.push(w.iter().map(|v| v / hnext).collect());
    }

    // back substitution on the triangular system
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= h[j][i] * y[j];
        }
        if h[i][i] == 0.0 {
            return Err(Error::Singular("GMRES breakdown".into()));
        }
        y[i] = s / h[i][i];
    }
    let mut x = vec![0.0; n];
    for (yj, v) in y.iter().zip(&basis) {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi += yj * vi;
        }
    }
    let ax = op.apply(&x);
    let true_rel = norm(&b.iter().zip(&ax).map(|(p, q)| p - q).collect::<Vec<_>>()) / beta;
    if rel > tol && true_rel > tol {
        return Err(Error::NotConverged {
            iterations: k,
            residual: true_rel,
        });
    }
    Ok(GmresResult {
        x,
        iterations: k,
        residual: true_rel,
    })
}
