//! Solves `(I − N)μ = −Mγ` and recovers the piecewise constant `h`.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Discretization;
use crate::gmres::{gmres, LinearOperator};
use crate::nkernel::{DiagonalRule, DiscreteOperators, RHCoefficient, Storage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    /// Direct up to `DIRECT_LIMIT` unknowns, iterative above.
    #[default]
    Auto,
    Direct,
    Iterative,
}

pub const DIRECT_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub maxit: usize,
    pub mode: SolveMode,
    pub diagonal: DiagonalRule,
    pub storage: Storage,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-14,
            maxit: 100,
            mode: SolveMode::Auto,
            diagonal: DiagonalRule::default(),
            storage: Storage::default(),
        }
    }
}

impl SolverOptions {
    fn direct(&self, dim: usize) -> bool {
        match self.mode {
            SolveMode::Auto => dim <= DIRECT_LIMIT,
            SolveMode::Direct => true,
            SolveMode::Iterative => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BieSolution {
    pub mu: Vec<f64>,
    pub h: Vec<f64>,
    /// Arithmetic mean of `h` over each component.
    pub means: Vec<f64>,
    /// `max |h − mean|` per component.
    pub h_deviation: Vec<f64>,
    /// GMRES steps, 0 for a direct solve.
    pub iterations: usize,
    /// Relative residual of the `μ` equation.
    pub residual: f64,
}

/// `I − N` as a linear operator.
struct IminusN<'a>(&'a DiscreteOperators);

impl LinearOperator for IminusN<'_> {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let nx = self.0.apply_n(x);
        x.iter().zip(nx).map(|(a, b)| a - b).collect()
    }

    fn to_dense(&self) -> Vec<f64> {
        // row-major N read as column-major is Nᵀ, so transpose on the way
        let n = self.dim();
        let nm = self.0.assemble_n();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = if i == j { 1.0 } else { 0.0 } - nm[i * n + j];
            }
        }
        out
    }
}

/// Dense LU of a column-major square matrix.
struct DenseLu(PartialPivLu<f64>);

impl DenseLu {
    fn new(n: usize, col_major: &[f64]) -> Result<Self> {
        let mat = MatRef::from_column_major_slice(col_major, n, n).to_owned();
        let lu = mat.partial_piv_lu();
        let u = lu.U();
        if (0..n).any(|i| u[(i, i)] == 0.0 || !u[(i, i)].is_finite()) {
            return Err(Error::Singular("zero pivot in LU factorization".into()));
        }
        Ok(Self(lu))
    }

    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        let x = self.0.solve(&rhs);
        let out: Vec<f64> = (0..b.len()).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("non-finite solution".into()));
        }
        Ok(out)
    }
}

fn relative_residual(op: &dyn LinearOperator, x: &[f64], b: &[f64]) -> f64 {
    let ax = op.apply(x);
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum();
    let nb: f64 = b.iter().map(|v| v * v).sum();
    if nb == 0.0 {
        r.sqrt()
    } else {
        (r / nb).sqrt()
    }
}

/// Solves `op·x = rhs` directly or by GMRES according to `opts`.
/// Returns the solution, the iteration count and the relative residual.
pub fn linear_solve(
    op: &dyn LinearOperator,
    rhs: &[f64],
    opts: &SolverOptions,
) -> Result<(Vec<f64>, usize, f64)> {
    if opts.direct(op.dim()) {
        let lu = DenseLu::new(op.dim(), &op.to_dense())?;
        let x = lu.solve(rhs)?;
        let res = relative_residual(op, &x, rhs);
        Ok((x, 0, res))
    } else {
        let r = gmres(op, rhs, opts.tol, opts.maxit)?;
        Ok((r.x, r.iterations, r.residual))
    }
}

/// Integral-equation solver for a fixed boundary and coefficient; the
/// operators (and the LU factors in direct mode) are shared by every
/// right-hand side.
pub struct BieSolver {
    ops: DiscreteOperators,
    lu: Option<DenseLu>,
    opts: SolverOptions,
}

impl BieSolver {
    pub fn new(d: &Discretization, a: &RHCoefficient, opts: &SolverOptions) -> Result<Self> {
        let ops = DiscreteOperators::new(d, a, opts.diagonal, opts.storage)?;
        let lu = if opts.direct(ops.len()) {
            let op = IminusN(&ops);
            Some(DenseLu::new(ops.len(), &op.to_dense())?)
        } else {
            None
        };
        Ok(Self {
            ops,
            lu,
            opts: *opts,
        })
    }

    pub fn operators(&self) -> &DiscreteOperators {
        &self.ops
    }

    pub fn solve(&self, gamma: &[f64]) -> Result<BieSolution> {
        let ops = &self.ops;
        let d = ops.discretization();
        assert_eq!(gamma.len(), d.len());
        let op = IminusN(ops);
        let rhs: Vec<f64> = ops.apply_m(gamma).into_iter().map(|v| -v).collect();
        let (mu, iterations, residual) = match &self.lu {
            Some(lu) => {
                let mu = lu.solve(&rhs)?;
                let res = relative_residual(&op, &mu, &rhs);
                (mu, 0, res)
            }
            None => {
                let r = gmres(&op, &rhs, self.opts.tol, self.opts.maxit)?;
                (r.x, r.iterations, r.residual)
            }
        };
        let m_mu = ops.apply_m(&mu);
        let i_n_gamma = op.apply(gamma);
        let h: Vec<f64> = m_mu
            .iter()
            .zip(&i_n_gamma)
            .map(|(a, b)| 0.5 * (a - b))
            .collect();
        let mut means = Vec::with_capacity(d.num_components());
        let mut h_deviation = Vec::with_capacity(d.num_components());
        for j in 0..d.num_components() {
            let part = &h[d.range(j)];
            let mean = part.iter().sum::<f64>() / part.len() as f64;
            means.push(mean);
            h_deviation.push(part.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max));
        }
        Ok(BieSolution {
            mu,
            h,
            means,
            h_deviation,
            iterations,
            residual,
        })
    }
}

/// One-shot solve of the integral equation for a single `γ`.
pub fn solve_gnk(
    d: &Discretization,
    a: &RHCoefficient,
    gamma: &[f64],
    opts: &SolverOptions,
) -> Result<BieSolution> {
    BieSolver::new(d, a, opts)?.solve(gamma)
}
