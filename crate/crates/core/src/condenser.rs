//! Generalized condensers: classification, the right-hand sides `γₖ`, the
//! integral-equation solves and the linear system for the constants.
//!
//! Components are ordered plates first (`E₁..E_m`), then walls. An outer
//! boundary, if present, must be the last member of its group.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bie::{linear_solve, BieSolution, BieSolver, SolveMode, SolverOptions};
use crate::error::{Error, Result};
use crate::field::PotentialField;
use crate::geometry::{
    discretize, point_in_field, polylines_intersect, BoundaryComponent, Discretization, Location,
    Orientation, Role,
};
use crate::gmres::DenseMatrix;
use crate::nkernel::RHCoefficient;

/// Boundary components with optional auxiliary points.
#[derive(Debug, Clone)]
pub struct CondenserGeometry {
    components: Vec<BoundaryComponent>,
    aux_points: Vec<Option<C64>>,
    field_point: Option<C64>,
}

impl CondenserGeometry {
    pub fn new(components: Vec<BoundaryComponent>) -> Result<Self> {
        let m = components
            .iter()
            .take_while(|c| c.role() == Role::Plate)
            .count();
        if components[m..].iter().any(|c| c.role() == Role::Plate) {
            return Err(Error::Classification(
                "plates must precede Neumann walls".into(),
            ));
        }
        if m < 2 {
            return Err(Error::Config("m ≥ 2 required".into()));
        }
        Ok(Self {
            components,
            aux_points: vec![None; m],
            field_point: None,
        })
    }

    /// Sets `αₖ` for plate `k` (0-based).
    pub fn with_aux_point(mut self, k: usize, alpha: C64) -> Result<Self> {
        if k >= self.aux_points.len() {
            return Err(Error::AuxiliaryPoint(format!(
                "plate index {} out of range 1..={}",
                k + 1,
                self.aux_points.len()
            )));
        }
        self.aux_points[k] = Some(alpha);
        Ok(self)
    }

    /// Sets the field point `α` used when the field is bounded.
    pub fn with_field_point(mut self, alpha: C64) -> Self {
        self.field_point = Some(alpha);
        self
    }

    pub fn components(&self) -> &[BoundaryComponent] {
        &self.components
    }

    pub fn num_plates(&self) -> usize {
        self.aux_points.len()
    }

    pub fn num_walls(&self) -> usize {
        self.components.len() - self.num_plates()
    }

    pub fn aux_points(&self) -> &[Option<C64>] {
        &self.aux_points
    }

    pub fn field_point(&self) -> Option<C64> {
        self.field_point
    }

    /// Image of the geometry, auxiliary points included, under `z ↦ ρz + w`.
    pub fn transformed(&self, rho: C64, w: C64) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|c| c.transformed(rho, w))
                .collect(),
            aux_points: self
                .aux_points
                .iter()
                .map(|a| a.map(|z| rho * z + w))
                .collect(),
            field_point: self.field_point.map(|z| rho * z + w),
        }
    }
}

/// A geometry together with plate levels `δ`.
#[derive(Debug, Clone)]
pub struct CondenserProblem {
    geometry: CondenserGeometry,
    levels: Vec<f64>,
}

impl CondenserProblem {
    pub fn new(geometry: CondenserGeometry, levels: Vec<f64>) -> Result<Self> {
        validate_levels(&geometry, &levels)?;
        Ok(Self { geometry, levels })
    }

    pub fn geometry(&self) -> &CondenserGeometry {
        &self.geometry
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
}

fn validate_levels(geometry: &CondenserGeometry, levels: &[f64]) -> Result<()> {
    if levels.len() != geometry.num_plates() {
        return Err(Error::Config(format!(
            "{} levels given for {} plates",
            levels.len(),
            geometry.num_plates()
        )));
    }
    if levels.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("levels must be finite".into()));
    }
    if levels.iter().all(|&v| v == levels[0]) {
        return Err(Error::Config(
            "levels must contain at least two distinct values".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseInfo {
    pub g_bounded: bool,
    pub b_bounded: bool,
    pub m: usize,
    pub ell: usize,
    pub m_prime: usize,
    pub ell_prime: usize,
    /// Index (0-based) of the outer boundary component, if any.
    pub external: Option<usize>,
}

impl CaseInfo {
    /// `"I"` when `m′ = m`, `"II"` when `m′ = m − 1`.
    pub fn label(&self) -> &'static str {
        if self.m_prime == self.m {
            "I"
        } else {
            "II"
        }
    }
}

fn outline(c: &BoundaryComponent) -> Vec<C64> {
    c.polyline(512)
}

/// Boundedness classification and ordering checks.
pub fn classify(geometry: &CondenserGeometry) -> Result<CaseInfo> {
    let comps = geometry.components();
    let m = geometry.num_plates();
    let ell = geometry.num_walls();
    let outer: Vec<usize> = (0..comps.len())
        .filter(|&j| comps[j].orientation() == Orientation::Ccw)
        .collect();
    if outer.len() > 1 {
        return Err(Error::Classification(format!(
            "components {} and {} both run counter-clockwise; only the outer boundary may",
            outer[0] + 1,
            outer[1] + 1
        )));
    }
    let external = outer.first().copied();

    let outlines: Vec<Vec<C64>> = comps.iter().map(outline).collect();
    for i in 0..comps.len() {
        for j in i + 1..comps.len() {
            if polylines_intersect(&outlines[i], &outlines[j]) {
                return Err(Error::Classification(format!(
                    "components {} and {} intersect",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    for i in 0..comps.len() {
        let p = comps[i].eval(0.0).z;
        for (j, other) in comps.iter().enumerate() {
            if i == j {
                continue;
            }
            let inside = other.encloses(p);
            if Some(j) == external && !inside {
                return Err(Error::Classification(format!(
                    "component {} lies outside the outer boundary {}",
                    i + 1,
                    j + 1
                )));
            }
            if Some(j) != external && inside {
                return Err(Error::Classification(format!(
                    "component {} is nested inside component {}",
                    i + 1,
                    j + 1
                )));
            }
        }
    }

    let (g_bounded, b_bounded, m_prime, ell_prime) = match external {
        None => (false, false, m, ell),
        Some(e) if e < m => {
            if e != m - 1 {
                return Err(Error::Classification(format!(
                    "the outer plate must be the last plate E_{m}, found at position {}",
                    e + 1
                )));
            }
            (true, false, m - 1, ell)
        }
        Some(e) => {
            if e != m + ell - 1 {
                return Err(Error::Classification(format!(
                    "the outer wall must be the last component, found at position {}",
                    e + 1
                )));
            }
            (true, true, m, ell - 1)
        }
    };
    Ok(CaseInfo {
        g_bounded,
        b_bounded,
        m,
        ell,
        m_prime,
        ell_prime,
        external,
    })
}

/// `θ`/`A` for the case: unbounded form, or `e^{−iθ}(η − α)` when `G` is bounded.
pub fn build_coefficient(
    case: &CaseInfo,
    d: &Discretization,
    alpha: Option<C64>,
) -> Result<RHCoefficient> {
    if !case.g_bounded {
        return Ok(RHCoefficient::unbounded(d));
    }
    let alpha = alpha.ok_or_else(|| {
        Error::AuxiliaryPoint("a field point α is required when the field is bounded".into())
    })?;
    if !point_in_field(d, alpha)? {
        return Err(Error::AuxiliaryPoint(format!(
            "field point {alpha} is not in the field"
        )));
    }
    RHCoefficient::bounded(d, alpha)
}

/// `γₖ` at every node for the plate with auxiliary point `alpha_k`. The
/// argument on wall components is unwrapped along the nodes and must close
/// up after one period.
pub fn build_gamma(
    case: &CaseInfo,
    d: &Discretization,
    k: usize,
    alpha_k: C64,
    alpha: Option<C64>,
) -> Result<Vec<f64>> {
    let ratio = case.ell_prime + 1 == case.ell;
    let alpha = match (ratio, alpha) {
        (true, None) => {
            return Err(Error::AuxiliaryPoint(
                "a field point α is required when the host domain is bounded".into(),
            ))
        }
        (true, Some(a)) => Some(a),
        (false, _) => None,
    };
    let value = |z: C64| match alpha {
        Some(a) => (z - alpha_k) / (z - a),
        None => z - alpha_k,
    };
    let mut gamma = vec![0.0; d.len()];
    for j in 0..d.num_components() {
        let r = d.range(j);
        match d.role(j) {
            Role::Plate => {
                for i in r {
                    gamma[i] = value(d.eta()[i]).norm().ln();
                }
            }
            Role::Neumann => {
                let mut prev = value(d.eta()[r.start]).arg();
                let mut acc = prev;
                for i in r.clone() {
                    let cur = value(d.eta()[i]).arg();
                    let mut step = cur - prev;
                    step -= TAU * (step / TAU).round();
                    acc += step;
                    gamma[i] = acc;
                    prev = cur;
                }
                let first = value(d.eta()[r.start]).arg();
                let mut close = first - prev;
                close -= TAU * (close / TAU).round();
                let residual = (acc + close - gamma[r.start]).abs();
                let scale = gamma[r.clone()].iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if residual > 1e-8 * (1.0 + scale) {
                    return Err(Error::Periodicity {
                        k: k + 1,
                        component: j + 1,
                        residual,
                    });
                }
            }
        }
    }
    Ok(gamma)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsSolution {
    pub a: Vec<f64>,
    pub c: f64,
    pub nu: Vec<f64>,
}

impl ConstantsSolution {
    pub fn sum_a(&self) -> f64 {
        self.a.iter().sum()
    }
}

/// Solves for `(a, c, ν)` from the means `h_{j,k}` of the `m′` solutions.
pub fn solve_constants(
    case: &CaseInfo,
    solutions: &[BieSolution],
    levels: &[f64],
) -> Result<ConstantsSolution> {
    let (m, ell, mp) = (case.m, case.ell, case.m_prime);
    assert_eq!(solutions.len(), mp);
    assert_eq!(levels.len(), m);
    let comps = m + ell;
    let case_one = mp == m;
    let size = if case_one { comps + 1 } else { comps };
    // column-major: a₁..a_{m′}, c, ν₁..ν_ℓ
    let mut mat = vec![0.0; size * size];
    let mut rhs = vec![0.0; size];
    let mut set = |row: usize, col: usize, v: f64| mat[col * size + row] = v;
    for j in 0..comps {
        for (k, sol) in solutions.iter().enumerate() {
            set(j, k, sol.means[j]);
        }
        if j < m {
            set(j, mp, 1.0);
            rhs[j] = levels[j];
        } else {
            set(j, mp + 1 + (j - m), -1.0);
        }
    }
    if case_one {
        for k in 0..mp {
            set(comps, k, 1.0);
        }
    }
    let opts = SolverOptions {
        mode: SolveMode::Direct,
        ..Default::default()
    };
    let (x, _, _) = linear_solve(&DenseMatrix::from_col_major(size, mat), &rhs, &opts)?;
    let mut a = x[..mp].to_vec();
    if !case_one {
        a.push(-a.iter().sum::<f64>());
    }
    Ok(ConstantsSolution {
        a,
        c: x[mp],
        nu: x[mp + 1..].to_vec(),
    })
}

/// `2π Σ δₖ aₖ`.
pub fn capacity(constants: &ConstantsSolution, levels: &[f64]) -> f64 {
    TAU * constants
        .a
        .iter()
        .zip(levels)
        .map(|(a, d)| a * d)
        .sum::<f64>()
}

/// Field point for a bounded field: the in-field point of a coarse grid over
/// the outer boundary farthest from every node.
fn auto_field_point(geometry: &CondenserGeometry, d: &Discretization, outer: usize) -> Result<C64> {
    let (lo, hi) = geometry.components()[outer].bounding_box();
    let steps = 40;
    let mut best: Option<(f64, C64)> = None;
    for iy in 1..steps {
        for ix in 1..steps {
            let z = C64::new(
                lo.re + (hi.re - lo.re) * ix as f64 / steps as f64,
                lo.im + (hi.im - lo.im) * iy as f64 / steps as f64,
            );
            if d.locate(z) != Location::InField {
                continue;
            }
            let dist = d
                .eta()
                .iter()
                .map(|e| (e - z).norm())
                .fold(f64::INFINITY, f64::min);
            if best.is_none_or(|(b, _)| dist > b) {
                best = Some((dist, z));
            }
        }
    }
    best.map(|(_, z)| z).ok_or_else(|| {
        Error::AuxiliaryPoint("could not find a field point; please supply one".into())
    })
}

/// Everything that does not depend on the levels: classification, the
/// coefficient, the `γₖ` and the `m′` integral-equation solutions.
#[derive(Debug, Clone)]
pub struct Prepared {
    geometry: CondenserGeometry,
    case: CaseInfo,
    d: Discretization,
    alpha: Option<C64>,
    aux: Vec<C64>,
    coefficient: RHCoefficient,
    gammas: Vec<Vec<f64>>,
    solutions: Vec<BieSolution>,
}

pub fn prepare(geometry: &CondenserGeometry, n: usize, opts: &SolverOptions) -> Result<Prepared> {
    let d = discretize(geometry.components(), n)?;
    let case = classify(geometry)?;

    let alpha = if case.g_bounded {
        Some(match geometry.field_point() {
            Some(a) => a,
            None => auto_field_point(geometry, &d, case.external.expect("bounded field"))?,
        })
    } else {
        None
    };
    let coefficient = build_coefficient(&case, &d, alpha)?;

    let mut aux = Vec::with_capacity(case.m_prime);
    for k in 0..case.m_prime {
        let ak = geometry.aux_points()[k].unwrap_or_else(|| geometry.components()[k].centroid());
        match d.winding_number(k, ak) {
            Ok(-1) => aux.push(ak),
            _ => {
                return Err(Error::AuxiliaryPoint(format!(
                    "α_{} = {ak} is not inside plate {}",
                    k + 1,
                    k + 1
                )))
            }
        }
    }
    let gammas = (0..case.m_prime)
        .map(|k| build_gamma(&case, &d, k, aux[k], alpha))
        .collect::<Result<Vec<_>>>()?;

    let solver = BieSolver::new(&d, &coefficient, opts)?;
    let solutions = gammas
        .par_iter()
        .map(|g| solver.solve(g))
        .collect::<Result<Vec<_>>>()?;

    Ok(Prepared {
        geometry: geometry.clone(),
        case,
        d,
        alpha,
        aux,
        coefficient,
        gammas,
        solutions,
    })
}

impl Prepared {
    pub fn case(&self) -> &CaseInfo {
        &self.case
    }

    pub fn geometry(&self) -> &CondenserGeometry {
        &self.geometry
    }

    pub fn discretization(&self) -> &Discretization {
        &self.d
    }

    pub fn coefficient(&self) -> &RHCoefficient {
        &self.coefficient
    }

    /// The field point `α` in use (bounded field only).
    pub fn field_point(&self) -> Option<C64> {
        self.alpha
    }

    pub fn aux_points(&self) -> &[C64] {
        &self.aux
    }

    pub fn gammas(&self) -> &[Vec<f64>] {
        &self.gammas
    }

    pub fn solutions(&self) -> &[BieSolution] {
        &self.solutions
    }

    pub fn constants(&self, levels: &[f64]) -> Result<ConstantsSolution> {
        if levels.len() != self.case.m {
            return Err(Error::Config(format!(
                "{} levels given for {} plates",
                levels.len(),
                self.case.m
            )));
        }
        solve_constants(&self.case, &self.solutions, levels)
    }

    pub fn capacity(&self, levels: &[f64]) -> Result<f64> {
        Ok(capacity(&self.constants(levels)?, levels))
    }

    /// Boundary values of `f` from `A·f = Σₖ aₖ(γₖ + hₖ + iμₖ)`, with `hₖ`
    /// collapsed to its component means.
    pub fn boundary_values(&self, constants: &ConstantsSolution) -> Vec<C64> {
        let d = &self.d;
        (0..d.len())
            .map(|i| {
                let j = d.component_of()[i];
                let af: C64 = self
                    .solutions
                    .iter()
                    .zip(&self.gammas)
                    .zip(&constants.a)
                    .map(|((sol, g), a)| *a * C64::new(g[i] + sol.means[j], sol.mu[i]))
                    .sum();
                af / self.coefficient.a()[i]
            })
            .collect()
    }

    pub fn field(&self, levels: &[f64]) -> Result<PotentialField> {
        let constants = self.constants(levels)?;
        let values = self.boundary_values(&constants);
        Ok(PotentialField::new(
            self.d.clone(),
            self.case,
            self.alpha,
            self.aux.clone(),
            constants,
            values,
        ))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub capacity: f64,
    pub constants: ConstantsSolution,
    pub prepared: Prepared,
    pub field: PotentialField,
}

impl RunOutput {
    pub fn case(&self) -> &CaseInfo {
        self.prepared.case()
    }

    pub fn solutions(&self) -> &[BieSolution] {
        self.prepared.solutions()
    }

    pub fn boundary_values(&self) -> &[C64] {
        self.field.boundary_values()
    }
}

/// Full pipeline: classify, solve the `m′` integral equations, solve for the
/// constants and evaluate the capacity.
pub fn run(problem: &CondenserProblem, n: usize, opts: &SolverOptions) -> Result<RunOutput> {
    let prepared = prepare(problem.geometry(), n, opts)?;
    let field = prepared.field(problem.levels())?;
    let constants = field.constants().clone();
    Ok(RunOutput {
        capacity: capacity(&constants, problem.levels()),
        constants,
        prepared,
        field,
    })
}

/// Exact capacity of the two-circle condenser `|z| ≤ 1`, `|z − a| ≤ r` in
/// the plane: `2π/log(1/q)` with `q` the root in `(0, 1)` of
/// `(1 + q)²/q = (1 + a − r)(a + r − 1)/r`.
pub fn two_circle_capacity(a: f64, r: f64) -> f64 {
    let s = (1.0 + a - r) * (a + r - 1.0) / r;
    // q² + (2 − s)q + 1 = 0, take the smaller root
    let b = 2.0 - s;
    let q = (-b - (b * b - 4.0).sqrt()) / 2.0;
    2.0 * PI / (1.0 / q).ln()
}
