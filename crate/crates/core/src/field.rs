//! Interior evaluation of the potential, masked grids and harmonic measures.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::bie::SolverOptions;
use crate::condenser::{prepare, CaseInfo, CondenserGeometry, ConstantsSolution};
use crate::error::{Error, Result};
use crate::geometry::{Discretization, Location, Role};

/// Discrete Cauchy integral of boundary values `f` at interior points.
///
/// For a bounded field the quotient `Σ wf η'/(η − z) / Σ w η'/(η − z)` is
/// used. For an unbounded field with `f(∞) = 0` the same idea gives
/// `Σ wf η'/(η − z) / (2πi + Σ w η'/(η − z))`; the extra sum is a discrete
/// zero, so far from the boundary this equals the plain formula.
pub fn cauchy_eval(d: &Discretization, f: &[C64], zs: &[C64], bounded: bool) -> Vec<C64> {
    assert_eq!(f.len(), d.len());
    let w = d.weight();
    zs.par_iter()
        .map(|&z| {
            let mut num = C64::new(0.0, 0.0);
            let mut den = C64::new(0.0, 0.0);
            for ((eta, deta), fi) in d.eta().iter().zip(d.deta()).zip(f) {
                let k = deta / (eta - z);
                num += fi * k;
                den += k;
            }
            if !bounded {
                den += C64::new(0.0, TAU / w);
            }
            num / den
        })
        .collect()
}

/// Equilibrium potential of a solved condenser.
#[derive(Debug, Clone)]
pub struct PotentialField {
    d: Discretization,
    case: CaseInfo,
    alpha: Option<C64>,
    aux: Vec<C64>,
    constants: ConstantsSolution,
    values: Vec<C64>,
}

impl PotentialField {
    pub fn new(
        d: Discretization,
        case: CaseInfo,
        alpha: Option<C64>,
        aux: Vec<C64>,
        constants: ConstantsSolution,
        values: Vec<C64>,
    ) -> Self {
        Self {
            d,
            case,
            alpha,
            aux,
            constants,
            values,
        }
    }

    pub fn constants(&self) -> &ConstantsSolution {
        &self.constants
    }

    pub fn case(&self) -> &CaseInfo {
        &self.case
    }

    pub fn discretization(&self) -> &Discretization {
        &self.d
    }

    /// `f` at the boundary nodes.
    pub fn boundary_values(&self) -> &[C64] {
        &self.values
    }

    /// `f(z)` by the Cauchy formula; no location check.
    pub fn f(&self, zs: &[C64]) -> Vec<C64> {
        cauchy_eval(&self.d, &self.values, zs, self.case.g_bounded)
    }

    /// `u(z)` without checking that `z` lies in the field.
    pub fn potential(&self, zs: &[C64]) -> Vec<f64> {
        self.f(zs)
            .into_iter()
            .zip(zs)
            .map(|(f, &z)| {
                let g = match self.alpha {
                    Some(a) => (z - a) * f,
                    None => f,
                };
                let logs: f64 = self
                    .aux
                    .iter()
                    .zip(&self.constants.a)
                    .map(|(ak, a)| a * (z - ak).norm().ln())
                    .sum();
                self.constants.c + g.re - logs
            })
            .collect()
    }

    pub fn locate(&self, z: C64) -> Mask {
        match self.d.locate(z) {
            Location::InField => Mask::InField,
            Location::NearBoundary { .. } => Mask::NearBoundary,
            Location::Outside {
                component,
                role: Role::Plate,
            } => Mask::Plate(component + 1),
            Location::Outside {
                role: Role::Neumann,
                ..
            } => Mask::Wall,
        }
    }

    /// `u(z)` at points of the field; other points are an error.
    pub fn potential_at(&self, zs: &[C64]) -> Result<Vec<f64>> {
        for &z in zs {
            match self.locate(z) {
                Mask::InField => {}
                Mask::NearBoundary => {
                    let component = match self.d.locate(z) {
                        Location::NearBoundary { component } => component + 1,
                        _ => unreachable!(),
                    };
                    return Err(Error::NearBoundary {
                        component,
                        x: z.re,
                        y: z.im,
                    });
                }
                _ => return Err(Error::OutsideField { x: z.re, y: z.im }),
            }
        }
        Ok(self.potential(zs))
    }
}

/// Grid point classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mask {
    InField,
    /// Inside plate `k` (1-based).
    Plate(usize),
    Wall,
    NearBoundary,
}

impl Mask {
    pub fn label(&self) -> String {
        match self {
            Mask::InField => "in-field".into(),
            Mask::Plate(k) => format!("plate-{k}"),
            Mask::Wall => "wall".into(),
            Mask::NearBoundary => "near-boundary".into(),
        }
    }
}

/// Rectangular grid of potential values, row by row from `ymin` upward.
#[derive(Debug, Clone)]
pub struct FieldGrid {
    pub bounds: [f64; 4],
    pub nx: usize,
    pub ny: usize,
    pub points: Vec<C64>,
    pub values: Vec<Option<f64>>,
    pub mask: Vec<Mask>,
}

impl FieldGrid {
    /// `x,y,u,mask` rows; masked points leave `u` empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,u,mask\n");
        for ((p, v), m) in self.points.iter().zip(&self.values).zip(&self.mask) {
            let u = v.map(crate::format_sig).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{}",
                crate::format_sig(p.re),
                crate::format_sig(p.im),
                u,
                m.label()
            );
        }
        out
    }

    pub fn in_field(&self) -> impl Iterator<Item = (C64, f64)> + '_ {
        self.points
            .iter()
            .zip(&self.values)
            .filter_map(|(p, v)| v.map(|v| (*p, v)))
    }
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Grid points of `[xmin, xmax] × [ymin, ymax]`.
pub fn grid_points(bounds: [f64; 4], nx: usize, ny: usize) -> Result<Vec<C64>> {
    let [x0, x1, y0, y1] = bounds;
    if nx == 0 || ny == 0 || !(x0 <= x1 && y0 <= y1) || bounds.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!(
            "invalid grid bounds {bounds:?} with {nx}×{ny} points"
        )));
    }
    let xs = axis(x0, x1, nx);
    Ok(axis(y0, y1, ny)
        .into_iter()
        .flat_map(|y| xs.iter().map(move |&x| C64::new(x, y)))
        .collect())
}

/// Evaluates `u` on in-field grid points and masks the rest.
pub fn grid(field: &PotentialField, bounds: [f64; 4], nx: usize, ny: usize) -> Result<FieldGrid> {
    let points = grid_points(bounds, nx, ny)?;
    let mask: Vec<Mask> = points.par_iter().map(|&z| field.locate(z)).collect();
    let inside: Vec<C64> = points
        .iter()
        .zip(&mask)
        .filter(|(_, m)| **m == Mask::InField)
        .map(|(p, _)| *p)
        .collect();
    let mut u = field.potential(&inside).into_iter();
    let values = mask
        .iter()
        .map(|m| (*m == Mask::InField).then(|| u.next().expect("one value per point")))
        .collect();
    Ok(FieldGrid {
        bounds,
        nx,
        ny,
        points,
        values,
        mask,
    })
}

fn check_plates_only(geometry: &CondenserGeometry) -> Result<()> {
    if geometry.num_walls() > 0 {
        return Err(Error::Config(
            "harmonic measure needs a geometry without Neumann walls".into(),
        ));
    }
    Ok(())
}

fn indicator(m: usize, j: usize) -> Result<Vec<f64>> {
    if j == 0 || j > m {
        return Err(Error::Config(format!("component {j} out of range 1..={m}")));
    }
    Ok((1..=m).map(|k| if k == j { 1.0 } else { 0.0 }).collect())
}

/// Potential of the plate-only geometry with level 1 on plate `j`
/// (1-based) and 0 on the others, i.e. the harmonic measure of `Γⱼ`.
pub fn harmonic_measure_field(
    geometry: &CondenserGeometry,
    j: usize,
    n: usize,
    opts: &SolverOptions,
) -> Result<PotentialField> {
    check_plates_only(geometry)?;
    let levels = indicator(geometry.num_plates(), j)?;
    prepare(geometry, n, opts)?.field(&levels)
}

/// `ω(z)` of plate `j` (1-based) at points of the field.
pub fn harmonic_measure(
    geometry: &CondenserGeometry,
    j: usize,
    zs: &[C64],
    n: usize,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    harmonic_measure_field(geometry, j, n, opts)?.potential_at(zs)
}

/// Harmonic measures of every plate at `zs`, sharing one set of solves.
pub fn harmonic_measures(
    geometry: &CondenserGeometry,
    zs: &[C64],
    n: usize,
    opts: &SolverOptions,
) -> Result<Vec<Vec<f64>>> {
    check_plates_only(geometry)?;
    let prepared = prepare(geometry, n, opts)?;
    let m = geometry.num_plates();
    (1..=m)
        .map(|j| prepared.field(&indicator(m, j)?)?.potential_at(zs))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condenser::{run, CondenserProblem};
    use crate::geometry::{discretize, BoundaryComponent, Orientation};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn circle(center: C64, r: f64, o: Orientation) -> BoundaryComponent {
        BoundaryComponent::circle(center, r, o).unwrap()
    }

    fn annulus() -> CondenserGeometry {
        CondenserGeometry::new(vec![
            circle(c(0.0, 0.0), 0.5, Orientation::Cw),
            circle(c(0.0, 0.0), 1.0, Orientation::Ccw),
        ])
        .unwrap()
    }

    #[test]
    fn cauchy_reproduces_polynomials() {
        let d = discretize(&[circle(c(0.0, 0.0), 1.0, Orientation::Ccw)], 64).unwrap();
        let f: Vec<C64> = d.eta().iter().map(|z| z * z).collect();
        let z = c(0.3, 0.4);
        let v = cauchy_eval(&d, &f, &[z], true)[0];
        assert!((v - z * z).norm() < 1e-12);
        let five = vec![c(5.0, 0.0); 64];
        assert!((cauchy_eval(&d, &five, &[c(-0.2, 0.7)], true)[0] - 5.0).norm() < 1e-14);
    }

    #[test]
    fn cauchy_exterior() {
        let d = discretize(&[circle(c(0.0, 0.0), 1.0, Orientation::Cw)], 64).unwrap();
        let f: Vec<C64> = d.eta().iter().map(|z| 1.0 / z).collect();
        assert!((cauchy_eval(&d, &f, &[c(2.0, 0.0)], false)[0] - 0.5).norm() < 1e-12);
        let g: Vec<C64> = d.eta().iter().map(|z| 1.0 / (z * z * z)).collect();
        let z = c(-1.5, 1.1);
        assert!((cauchy_eval(&d, &g, &[z], false)[0] - 1.0 / (z * z * z)).norm() < 1e-10);
    }

    #[test]
    fn annulus_potential() {
        let problem = CondenserProblem::new(annulus(), vec![1.0, 0.0]).unwrap();
        let out = run(&problem, 64, &SolverOptions::default()).unwrap();
        let z = C64::from_polar(0.5f64.sqrt(), 0.3);
        let u = out.field.potential_at(&[z]).unwrap()[0];
        assert!((u - 0.5).abs() < 1e-10);
        assert!(matches!(
            out.field.potential_at(&[c(0.1, 0.0)]),
            Err(Error::OutsideField { .. })
        ));
    }

    #[test]
    fn annulus_grid_masks() {
        let problem = CondenserProblem::new(annulus(), vec![1.0, 0.0]).unwrap();
        let out = run(&problem, 256, &SolverOptions::default()).unwrap();
        let g = grid(&out.field, [-1.2, 1.2, -1.2, 1.2], 25, 25).unwrap();
        assert_eq!(g.points.len(), 625);
        assert_eq!(g.mask[12 * 25 + 12], Mask::Plate(1));
        assert_eq!(g.mask[0], Mask::Plate(2));
        assert!(g.in_field().all(|(_, u)| u > 0.0 && u < 1.0));
        assert!(g.in_field().count() > 100);
        let csv = g.to_csv();
        assert!(csv.starts_with("x,y,u,mask\n"));
        assert!(csv.lines().any(|l| l.ends_with(",,plate-1")));

        let inside = grid(&out.field, [-0.1, 0.1, -0.1, 0.1], 5, 5).unwrap();
        assert!(inside.values.iter().all(Option::is_none));
        let beyond = grid(&out.field, [2.0, 3.0, 2.0, 3.0], 4, 4).unwrap();
        assert!(beyond.values.iter().all(Option::is_none));

        let fine = grid(&out.field, [-1.0, 1.0, -1.0, 1.0], 101, 101).unwrap();
        assert!(fine.in_field().all(|(_, u)| u > 0.0 && u < 1.0));
    }

    #[test]
    fn equal_levels_give_a_constant_potential() {
        let two = CondenserGeometry::new(vec![
            circle(c(0.0, 0.0), 1.0, Orientation::Cw),
            circle(c(2.0, 0.0), 0.5, Orientation::Cw),
        ])
        .unwrap();
        let prepared = crate::condenser::prepare(&two, 64, &SolverOptions::default()).unwrap();
        let field = prepared.field(&[-1.25, -1.25]).unwrap();
        let zs = [c(1.2, 0.0), c(0.0, 3.0), c(-4.0, -1.0)];
        for u in field.potential_at(&zs).unwrap() {
            assert!((u + 1.25).abs() < 1e-12);
        }
    }

    #[test]
    fn annulus_harmonic_measures() {
        let z = C64::from_polar(0.5f64.sqrt(), 1.0);
        let w = harmonic_measures(&annulus(), &[z], 64, &SolverOptions::default()).unwrap();
        assert!((w[0][0] - 0.5).abs() < 1e-10);
        assert!((w[1][0] - 0.5).abs() < 1e-10);
        assert!(harmonic_measure(&annulus(), 3, &[z], 64, &SolverOptions::default()).is_err());
    }
}
