//! The generalized Neumann kernel `N`, its conjugate `M`, and their Nyström
//! discretizations.
//!
//! `M` has a cotangent singularity on each component. It is split as
//! `M = (1/2π)cot((t − s)/2) + M₁`: the first term is applied spectrally per
//! component and `M₁` is continuous and applied with trapezoidal weights.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Discretization, Role};
use crate::spectral::Conjugator;

/// Piecewise constant angle `θ`, coefficient `A(t)` and `Ȧ/A` at the nodes.
#[derive(Debug, Clone)]
pub struct RHCoefficient {
    theta: Vec<f64>,
    a: Vec<C64>,
    log_derivative: Vec<C64>,
    alpha: Option<C64>,
}

impl RHCoefficient {
    /// `A = e^{−iθ}` with `θ = 0` on plates and `π/2` on walls.
    pub fn unbounded(d: &Discretization) -> Self {
        let theta = theta_from_roles(d);
        let a = theta.iter().map(|&th| C64::from_polar(1.0, -th)).collect();
        Self {
            log_derivative: vec![C64::new(0.0, 0.0); d.len()],
            theta,
            a,
            alpha: None,
        }
    }

    /// `A = e^{−iθ}(η − α)` for a field point `α`.
    pub fn bounded(d: &Discretization, alpha: C64) -> Result<Self> {
        let theta = theta_from_roles(d);
        let mut a = Vec::with_capacity(d.len());
        let mut log_derivative = Vec::with_capacity(d.len());
        for ((eta, deta), th) in d.eta().iter().zip(d.deta()).zip(&theta) {
            let r = eta - alpha;
            if r.norm() == 0.0 {
                return Err(Error::AuxiliaryPoint(format!(
                    "field point {alpha} lies on the boundary"
                )));
            }
            a.push(C64::from_polar(1.0, -th) * r);
            log_derivative.push(deta / r);
        }
        Ok(Self {
            theta,
            a,
            log_derivative,
            alpha: Some(alpha),
        })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn a(&self) -> &[C64] {
        &self.a
    }

    /// `Ȧ/A` at the nodes.
    pub fn log_derivative(&self) -> &[C64] {
        &self.log_derivative
    }

    /// The field point `α`, or `None` for the unbounded form.
    pub fn alpha(&self) -> Option<C64> {
        self.alpha
    }
}

fn theta_from_roles(d: &Discretization) -> Vec<f64> {
    d.component_of()
        .iter()
        .map(|&j| match d.role(j) {
            Role::Plate => 0.0,
            Role::Neumann => FRAC_PI_2,
        })
        .collect()
}

/// `(A(s)/A(t))·η'(t)/(η(t) − η(s))` for distinct nodes.
fn cauchy_factor(d: &Discretization, a: &RHCoefficient, s: usize, t: usize) -> Result<C64> {
    let diff = d.eta()[t] - d.eta()[s];
    if diff.norm() == 0.0 {
        return Err(Error::CoincidentNodes(
            d.component_of()[s] + 1,
            d.component_of()[t] + 1,
        ));
    }
    Ok(a.a()[s] / a.a()[t] * d.deta()[t] / diff)
}

/// Limit of `π·(N + iM₁)` at `s = t`: `η''/(2η') − Ȧ/A`.
fn taylor_limit(d: &Discretization, a: &RHCoefficient, t: usize) -> Result<C64> {
    let dz = d.deta()[t];
    if dz.norm() == 0.0 {
        return Err(Error::DegenerateDerivative(t));
    }
    Ok(d.d2eta()[t] / (2.0 * dz) - a.log_derivative()[t])
}

/// `N(s, t)` at nodes `s` (row) and `t` (column), diagonal by its limit.
pub fn kernel_n(d: &Discretization, a: &RHCoefficient, s: usize, t: usize) -> Result<f64> {
    let v = if s == t {
        taylor_limit(d, a, t)?
    } else {
        cauchy_factor(d, a, s, t)?
    };
    Ok(v.im / PI)
}

/// `M(s, t)` at distinct nodes.
pub fn kernel_m(d: &Discretization, a: &RHCoefficient, s: usize, t: usize) -> Result<f64> {
    if s == t {
        return Err(Error::Singular("M(s, s) is not defined".into()));
    }
    Ok(cauchy_factor(d, a, s, t)?.re / PI)
}

/// Continuous remainder `M₁(s, t)`, diagonal by its limit.
pub fn kernel_m1(d: &Discretization, a: &RHCoefficient, s: usize, t: usize) -> Result<f64> {
    if s == t {
        return Ok(taylor_limit(d, a, t)?.re / PI);
    }
    let mut v = kernel_m(d, a, s, t)?;
    if d.component_of()[s] == d.component_of()[t] {
        v -= cot_half(d.t()[t] - d.t()[s]) / (2.0 * PI);
    }
    Ok(v)
}

fn cot_half(x: f64) -> f64 {
    1.0 / (0.5 * x).tan()
}

/// How the diagonal of the discrete operators is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagonalRule {
    /// Singularity subtraction: the diagonal is chosen so that the discrete
    /// operator reproduces the Cauchy integral of the constant exactly.
    /// Stays accurate on graded meshes where `η'` vanishes at corners.
    #[default]
    Subtraction,
    /// Pointwise limit of the kernels. Needs `η' ≠ 0` at every node.
    TaylorLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Storage {
    /// Dense below `DENSE_LIMIT` unknowns, matrix-free above.
    #[default]
    Auto,
    Dense,
    MatrixFree,
}

/// Largest system stored densely under `Storage::Auto`. Two dense `f64`
/// matrices of this order take about 1 GiB.
pub const DENSE_LIMIT: usize = 8192;

#[derive(Debug, Clone)]
enum Entries {
    /// Row-major `N` and `M₁`, trapezoidal weights included.
    Dense {
        n: Vec<f64>,
        m1: Vec<f64>,
    },
    MatrixFree,
}

/// Nyström matrices of `N` and `M` on a fixed discretization.
#[derive(Debug, Clone)]
pub struct DiscreteOperators {
    d: Discretization,
    a: RHCoefficient,
    /// Weighted complex diagonal; real part is `M₁`, imaginary part `N`.
    diagonal: Vec<C64>,
    /// `(w/2π)cot(πk/n)` for `k = 1..n`, index 0 unused.
    cot: Vec<f64>,
    conj: Conjugator,
    entries: Entries,
}

impl DiscreteOperators {
    pub fn new(
        d: &Discretization,
        a: &RHCoefficient,
        rule: DiagonalRule,
        storage: Storage,
    ) -> Result<Self> {
        if !d.n().is_multiple_of(2) {
            return Err(Error::NodeCount(d.n()));
        }
        let len = d.len();
        let n = d.n();
        let w = d.weight();
        let cot = (0..n)
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    w / (2.0 * PI) * cot_half(2.0 * PI * k as f64 / n as f64)
                }
            })
            .collect();
        let diagonal = match rule {
            // the subtraction pass visits every pair and rejects coincident nodes itself
            DiagonalRule::TaylorLimit => {
                check_coincident(d)?;
                (0..len)
                    .map(|i| taylor_limit(d, a, i).map(|v| v * (w / PI)))
                    .collect::<Result<Vec<_>>>()?
            }
            DiagonalRule::Subtraction => subtraction_diagonal(d, a)?,
        };
        let mut ops = Self {
            d: d.clone(),
            a: a.clone(),
            diagonal,
            cot,
            conj: Conjugator::new(n),
            entries: Entries::MatrixFree,
        };
        let dense = match storage {
            Storage::Auto => len <= DENSE_LIMIT,
            Storage::Dense => true,
            Storage::MatrixFree => false,
        };
        if dense {
            let mut nm = vec![0.0; len * len];
            let mut m1 = vec![0.0; len * len];
            nm.par_chunks_mut(len)
                .zip(m1.par_chunks_mut(len))
                .enumerate()
                .for_each(|(i, (nrow, mrow))| {
                    for j in 0..len {
                        let (nv, mv) = ops.entry(i, j);
                        nrow[j] = nv;
                        mrow[j] = mv;
                    }
                });
            ops.entries = Entries::Dense { n: nm, m1 };
        }
        Ok(ops)
    }

    pub fn discretization(&self) -> &Discretization {
        &self.d
    }

    pub fn coefficient(&self) -> &RHCoefficient {
        &self.a
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.entries, Entries::Dense { .. })
    }

    /// Weighted `(N, M₁)` entry of row `i`, column `j`.
    fn entry(&self, i: usize, j: usize) -> (f64, f64) {
        if i == j {
            let v = self.diagonal[i];
            return (v.im, v.re);
        }
        let d = &self.d;
        let k = self.a.a()[i] / self.a.a()[j] * d.deta()[j] / (d.eta()[j] - d.eta()[i]);
        let v = k * (d.weight() / PI);
        let ci = d.component_of()[i];
        let mut m1 = v.re;
        if ci == d.component_of()[j] {
            let n = d.n();
            m1 -= self.cot[(j + n - i) % n];
        }
        (v.im, m1)
    }

    fn matvec(&self, x: &[f64], which: Which) -> Vec<f64> {
        let len = self.len();
        assert_eq!(x.len(), len);
        match &self.entries {
            Entries::Dense { n, m1 } => {
                let mat = match which {
                    Which::N => n,
                    Which::M1 => m1,
                };
                mat.par_chunks(len)
                    .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
                    .collect()
            }
            Entries::MatrixFree => (0..len)
                .into_par_iter()
                .map(|i| (0..len).map(|j| which.pick(self.entry(i, j)) * x[j]).sum())
                .collect(),
        }
    }

    /// `Nx`.
    pub fn apply_n(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x, Which::N)
    }

    /// `M₁x` without the cotangent part.
    pub fn apply_m1(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x, Which::M1)
    }

    /// `Mx`: spectral conjugation per component plus `M₁x`.
    pub fn apply_m(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.apply_m1(x);
        for j in 0..self.d.num_components() {
            let r = self.d.range(j);
            self.conj.apply_add(&x[r.clone()], &mut y[r]);
        }
        y
    }

    /// Row-major dense `N` with weights.
    pub fn assemble_n(&self) -> Vec<f64> {
        self.assemble(Which::N)
    }

    /// Row-major dense `M₁` with weights.
    pub fn assemble_m1(&self) -> Vec<f64> {
        self.assemble(Which::M1)
    }

    fn assemble(&self, which: Which) -> Vec<f64> {
        let len = self.len();
        if let Entries::Dense { n, m1 } = &self.entries {
            return match which {
                Which::N => n.clone(),
                Which::M1 => m1.clone(),
            };
        }
        let mut out = vec![0.0; len * len];
        out.par_chunks_mut(len).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = which.pick(self.entry(i, j));
            }
        });
        out
    }
}

#[derive(Clone, Copy)]
enum Which {
    N,
    M1,
}

impl Which {
    fn pick(self, (n, m1): (f64, f64)) -> f64 {
        match self {
            Which::N => n,
            Which::M1 => m1,
        }
    }
}

fn check_coincident(d: &Discretization) -> Result<()> {
    let eta = d.eta();
    for i in 0..eta.len() {
        for j in i + 1..eta.len() {
            if eta[i] == eta[j] {
                return Err(Error::CoincidentNodes(
                    d.component_of()[i] + 1,
                    d.component_of()[j] + 1,
                ));
            }
        }
    }
    Ok(())
}

/// Diagonal that makes the discrete Cauchy operator exact on constants.
///
/// With `K(s, t) = η'(t)/(η(t) − η(s))`, the principal value of `∮ K dt` over
/// the whole boundary is `iπ` when the field is bounded and `−iπ` otherwise.
/// Subtracting the off-diagonal trapezoidal sum leaves the diagonal weight
/// of `K`, and `Ȧ/A` accounts for the ratio `A(s)/A(t)`.
fn subtraction_diagonal(d: &Discretization, a: &RHCoefficient) -> Result<Vec<C64>> {
    let len = d.len();
    let w = d.weight();
    let pv = if d.has_outer_boundary() {
        C64::new(0.0, PI)
    } else {
        C64::new(0.0, -PI)
    };
    (0..len)
        .into_par_iter()
        .map(|i| {
            let zi = d.eta()[i];
            let mut s = C64::new(0.0, 0.0);
            for j in 0..len {
                if j != i {
                    let diff = d.eta()[j] - zi;
                    if diff.norm() == 0.0 {
                        return Err(Error::CoincidentNodes(
                            d.component_of()[i] + 1,
                            d.component_of()[j] + 1,
                        ));
                    }
                    s += d.deta()[j] / diff;
                }
            }
            Ok((pv - w * s - w * a.log_derivative()[i]) / PI)
        })
        .collect()
}
