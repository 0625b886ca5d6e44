//! Boundary curves, their 2π-periodic parametrizations and the stacked
//! trapezoidal discretization used by every integral operator.
//!
//! Every component is a Jordan curve `η(t)`, `t ∈ [0, 2π]`, oriented so that
//! the field of the condenser lies on its left: holes run clockwise, the one
//! possible outer boundary runs counter-clockwise. Polygons are reparametrized
//! through a corner-grading substitution so that `η'` vanishes at every vertex,
//! which restores fast convergence of the trapezoidal rule at corners.

use std::f64::consts::{PI, TAU};
use std::ops::Range;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Ccw,
    Cw,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Ccw => 1.0,
            Orientation::Cw => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Orientation::Ccw => "ccw",
            Orientation::Cw => "cw",
        }
    }

    fn from_area(signed_area: f64) -> Self {
        if signed_area > 0.0 {
            Orientation::Ccw
        } else {
            Orientation::Cw
        }
    }
}

/// Dirichlet plate boundary or zero-flux wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Plate,
    Neumann,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Circle {
        center: C64,
        radius: f64,
    },
    Ellipse {
        center: C64,
        semi_axes: (f64, f64),
        rotation: f64,
    },
    /// Closed polygon; vertices listed in traversal order.
    Polygon {
        vertices: Vec<C64>,
        grading: u32,
    },
    /// `η(t) = Σ c_k e^{ikt}`.
    Trigonometric {
        coefficients: Vec<(i64, C64)>,
    },
}

impl Shape {
    pub fn kind(&self) -> &'static str {
        match self {
            Shape::Circle { .. } => "circle",
            Shape::Ellipse { .. } => "ellipse",
            Shape::Polygon { .. } => "polygon",
            Shape::Trigonometric { .. } => "trigonometric",
        }
    }
}

/// Value and first two parameter derivatives of a curve at one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub z: C64,
    pub dz: C64,
    pub d2z: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryComponent {
    shape: Shape,
    role: Role,
    orientation: Orientation,
}

pub const DEFAULT_GRADING: u32 = 3;

impl BoundaryComponent {
    pub fn circle(center: C64, radius: f64, orientation: Orientation) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidCurve(format!(
                "circle radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            shape: Shape::Circle { center, radius },
            role: Role::Plate,
            orientation,
        })
    }

    pub fn ellipse(
        center: C64,
        semi_axes: (f64, f64),
        rotation: f64,
        orientation: Orientation,
    ) -> Result<Self> {
        let (a, b) = semi_axes;
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidCurve(format!(
                "ellipse semi-axes must be positive, got ({a}, {b})"
            )));
        }
        Ok(Self {
            shape: Shape::Ellipse {
                center,
                semi_axes,
                rotation,
            },
            role: Role::Plate,
            orientation,
        })
    }

    /// Polygon through `vertices` (in traversal order) with the corner grading
    /// of order `grading`. The traversal direction must match `orientation`.
    pub fn polygon(vertices: Vec<C64>, orientation: Orientation, grading: u32) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidCurve(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if grading < 2 {
            return Err(Error::InvalidCurve(format!(
                "grading order must be at least 2, got {grading}"
            )));
        }
        let nv = vertices.len();
        for i in 0..nv {
            if (vertices[(i + 1) % nv] - vertices[i]).norm() == 0.0 {
                return Err(Error::InvalidCurve(format!("repeated vertex at index {i}")));
            }
        }
        if polyline_self_intersects(&vertices) {
            return Err(Error::InvalidCurve(
                "polygon vertex list is self-intersecting".into(),
            ));
        }
        let actual = Orientation::from_area(shoelace(&vertices));
        if actual != orientation {
            return Err(Error::Orientation {
                component: 0,
                declared: orientation.name(),
                actual: actual.name(),
            });
        }
        Ok(Self {
            shape: Shape::Polygon { vertices, grading },
            role: Role::Plate,
            orientation,
        })
    }

    /// Curve given by a finite Fourier series. The series must describe a
    /// simple curve without cusps running in the declared direction.
    pub fn trigonometric(coefficients: Vec<(i64, C64)>, orientation: Orientation) -> Result<Self> {
        let area: f64 = coefficients
            .iter()
            .map(|(k, c)| PI * (*k as f64) * c.norm_sqr())
            .sum();
        if area == 0.0 {
            return Err(Error::InvalidCurve(
                "trigonometric curve encloses no area".into(),
            ));
        }
        let curve = Self {
            shape: Shape::Trigonometric { coefficients },
            role: Role::Plate,
            orientation,
        };
        let samples: Vec<C64> = (0..512)
            .map(|i| curve.eval(TAU * i as f64 / 512.0).z)
            .collect();
        if polyline_self_intersects(&samples) {
            return Err(Error::InvalidCurve(
                "trigonometric curve is self-intersecting".into(),
            ));
        }
        if samples
            .iter()
            .enumerate()
            .any(|(i, _)| curve.eval(TAU * i as f64 / 512.0).dz.norm() == 0.0)
        {
            return Err(Error::InvalidCurve("trigonometric curve has a cusp".into()));
        }
        let actual = Orientation::from_area(area);
        if actual != orientation {
            return Err(Error::Orientation {
                component: 0,
                declared: orientation.name(),
                actual: actual.name(),
            });
        }
        Ok(curve)
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    /// Same curve marked as a zero-flux wall.
    pub fn wall(self) -> Self {
        self.with_role(Role::Neumann)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Image under the similarity `z ↦ ρz + w`, `ρ ≠ 0`. Orientation and
    /// role are preserved.
    pub fn transformed(&self, rho: C64, w: C64) -> Self {
        let shape = match &self.shape {
            Shape::Circle { center, radius } => Shape::Circle {
                center: rho * center + w,
                radius: rho.norm() * radius,
            },
            Shape::Ellipse {
                center,
                semi_axes: (a, b),
                rotation,
            } => Shape::Ellipse {
                center: rho * center + w,
                semi_axes: (rho.norm() * a, rho.norm() * b),
                rotation: rotation + rho.arg(),
            },
            Shape::Polygon { vertices, grading } => Shape::Polygon {
                vertices: vertices.iter().map(|v| rho * v + w).collect(),
                grading: *grading,
            },
            Shape::Trigonometric { coefficients } => {
                let mut coefficients: Vec<(i64, C64)> =
                    coefficients.iter().map(|&(k, c)| (k, rho * c)).collect();
                coefficients.push((0, w));
                Shape::Trigonometric { coefficients }
            }
        };
        Self {
            shape,
            role: self.role,
            orientation: self.orientation,
        }
    }

    /// Parameters of the corners, where the graded parametrization has `η' = 0`.
    pub fn corner_parameters(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Polygon { vertices, .. } => (0..vertices.len())
                .map(|k| TAU * k as f64 / vertices.len() as f64)
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn eval(&self, t: f64) -> CurvePoint {
        match &self.shape {
            Shape::Circle { center, radius } => {
                let s = self.orientation.sign();
                let e = C64::from_polar(*radius, s * t);
                CurvePoint {
                    z: center + e,
                    dz: C64::i() * s * e,
                    d2z: -e,
                }
            }
            Shape::Ellipse {
                center,
                semi_axes: (a, b),
                rotation,
            } => {
                let s = self.orientation.sign();
                let rot = C64::from_polar(1.0, *rotation);
                let (sin, cos) = (s * t).sin_cos();
                CurvePoint {
                    z: center + rot * C64::new(a * cos, b * sin),
                    dz: rot * s * C64::new(-a * sin, b * cos),
                    d2z: rot * C64::new(-a * cos, -b * sin),
                }
            }
            Shape::Polygon { vertices, grading } => {
                let nv = vertices.len();
                let t = t.rem_euclid(TAU);
                let edge = ((t * nv as f64 / TAU).floor() as usize).min(nv - 1);
                let tau = (t - TAU * edge as f64 / nv as f64) * nv as f64;
                let (w, dw, d2w) = grading_map(tau.clamp(0.0, TAU), *grading);
                let start = vertices[edge];
                let dir = vertices[(edge + 1) % nv] - start;
                let scale = nv as f64 / TAU;
                CurvePoint {
                    z: start + dir * (w / TAU),
                    dz: dir * (dw * scale),
                    d2z: dir * (d2w * scale * nv as f64),
                }
            }
            Shape::Trigonometric { coefficients } => {
                let mut p = CurvePoint {
                    z: C64::new(0.0, 0.0),
                    dz: C64::new(0.0, 0.0),
                    d2z: C64::new(0.0, 0.0),
                };
                for &(k, c) in coefficients {
                    let kf = k as f64;
                    let e = c * C64::from_polar(1.0, kf * t);
                    p.z += e;
                    p.dz += C64::i() * kf * e;
                    p.d2z -= kf * kf * e;
                }
                p
            }
        }
    }

    /// Vertex centroid for polygons, centre for conics, mean point otherwise.
    pub fn centroid(&self) -> C64 {
        match &self.shape {
            Shape::Circle { center, .. } | Shape::Ellipse { center, .. } => *center,
            Shape::Polygon { vertices, .. } => vertices.iter().sum::<C64>() / vertices.len() as f64,
            Shape::Trigonometric { coefficients } => coefficients
                .iter()
                .filter(|(k, _)| *k == 0)
                .map(|(_, c)| *c)
                .sum(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.shape {
            Shape::Circle { radius, .. } => 2.0 * radius,
            Shape::Ellipse {
                semi_axes: (a, b), ..
            } => 2.0 * a.max(*b),
            Shape::Polygon { vertices, .. } => max_pairwise_distance(vertices),
            Shape::Trigonometric { .. } => max_pairwise_distance(&self.polyline(256)),
        }
    }

    /// Open polyline approximating the curve (exact vertices for polygons).
    pub fn polyline(&self, samples: usize) -> Vec<C64> {
        match &self.shape {
            Shape::Polygon { vertices, .. } => vertices.clone(),
            _ => (0..samples)
                .map(|i| self.eval(TAU * i as f64 / samples as f64).z)
                .collect(),
        }
    }

    /// True when `w` lies in the bounded region enclosed by the curve.
    pub fn encloses(&self, w: C64) -> bool {
        match &self.shape {
            Shape::Circle { center, radius } => (w - center).norm() < *radius,
            Shape::Ellipse {
                center,
                semi_axes: (a, b),
                rotation,
            } => {
                let local = (w - center) * C64::from_polar(1.0, -rotation);
                (local.re / a).powi(2) + (local.im / b).powi(2) < 1.0
            }
            Shape::Polygon { vertices, .. } => crossing_number(vertices, w),
            Shape::Trigonometric { .. } => crossing_number(&self.polyline(2048), w),
        }
    }

    pub(crate) fn bounding_box(&self) -> (C64, C64) {
        let pts = self.polyline(256);
        let mut lo = pts[0];
        let mut hi = pts[0];
        for p in &pts {
            lo = C64::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = C64::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        // the polyline is inscribed in conics and trigonometric curves
        let pad = match self.shape {
            Shape::Polygon { .. } => 0.0,
            _ => 0.01 * self.diameter(),
        };
        (lo - C64::new(pad, pad), hi + C64::new(pad, pad))
    }
}

/// Corner-grading substitution on `[0, 2π]`: maps endpoints to endpoints,
/// `w(π) = π`, and the first `p − 1` derivatives vanish at both ends.
/// Returns `(w, w', w'')`.
pub fn grading_map(tau: f64, p: u32) -> (f64, f64, f64) {
    let pf = p as f64;
    let c = 1.0 / pf - 0.5;
    let v = |x: f64| c * ((PI - x) / PI).powi(3) + (x - PI) / (pf * PI) + 0.5;
    let dv = |x: f64| -3.0 * c * (PI - x).powi(2) / PI.powi(3) + 1.0 / (pf * PI);
    let d2v = |x: f64| 6.0 * c * (PI - x) / PI.powi(3);

    let pi = p as i32;
    let (x, y) = (tau, TAU - tau);
    let (vx, vy) = (v(x), v(y));
    let a = vx.powi(pi);
    let b = vy.powi(pi);
    let da = pf * vx.powi(pi - 1) * dv(x);
    let db = -pf * vy.powi(pi - 1) * dv(y);
    let d2a = pf * (pf - 1.0) * vx.powi(pi - 2) * dv(x).powi(2) + pf * vx.powi(pi - 1) * d2v(x);
    let d2b = pf * (pf - 1.0) * vy.powi(pi - 2) * dv(y).powi(2) + pf * vy.powi(pi - 1) * d2v(y);

    let s = a + b;
    let num = da * b - a * db;
    let dnum = d2a * b - a * d2b;
    let w = TAU * a / s;
    let dw = TAU * num / (s * s);
    let d2w = TAU * (dnum * s - 2.0 * num * (da + db)) / (s * s * s);
    (w, dw, d2w)
}

fn shoelace(pts: &[C64]) -> f64 {
    let n = pts.len();
    0.5 * (0..n)
        .map(|i| {
            let (p, q) = (pts[i], pts[(i + 1) % n]);
            p.re * q.im - q.re * p.im
        })
        .sum::<f64>()
}

fn max_pairwise_distance(pts: &[C64]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            d = d.max((p - q).norm());
        }
    }
    d
}

fn crossing_number(poly: &[C64], w: C64) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.im > w.im) != (b.im > w.im) {
            let x = a.re + (w.im - a.im) * (b.re - a.re) / (b.im - a.im);
            if w.re < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

pub(crate) fn segments_intersect(p1: C64, p2: C64, q1: C64, q2: C64) -> bool {
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: C64, b: C64, c: C64| {
        c.re >= a.re.min(b.re)
            && c.re <= a.re.max(b.re)
            && c.im >= a.im.min(b.im)
            && c.im <= a.im.max(b.im)
    };
    (d1 == 0.0 && on(q1, q2, p1))
        || (d2 == 0.0 && on(q1, q2, p2))
        || (d3 == 0.0 && on(p1, p2, q1))
        || (d4 == 0.0 && on(p1, p2, q2))
}

fn polyline_self_intersects(pts: &[C64]) -> bool {
    let n = pts.len();
    for i in 0..n {
        let (a1, a2) = (pts[i], pts[(i + 1) % n]);
        for j in i + 1..n {
            // adjacent edges share a vertex
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(a1, a2, pts[j], pts[(j + 1) % n]) {
                return true;
            }
        }
    }
    false
}

/// True when the closed polylines `a` and `b` cross or touch.
pub(crate) fn polylines_intersect(a: &[C64], b: &[C64]) -> bool {
    let (na, nb) = (a.len(), b.len());
    (0..na)
        .any(|i| (0..nb).any(|j| segments_intersect(a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb])))
}

/// Where a point sits relative to the field of the condenser.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    InField,
    /// Inside the complement region bounded by component `j` (0-based, global).
    Outside {
        component: usize,
        role: Role,
    },
    NearBoundary {
        component: usize,
    },
}

/// Stacked trapezoidal discretization of all boundary components, each with
/// `n` equidistant nodes `t_k = (k − 1)·2π/n`.
#[derive(Debug, Clone)]
pub struct Discretization {
    n: usize,
    t: Vec<f64>,
    eta: Vec<C64>,
    deta: Vec<C64>,
    d2eta: Vec<C64>,
    component_of: Vec<usize>,
    orientations: Vec<Orientation>,
    roles: Vec<Role>,
    diameters: Vec<f64>,
}

pub fn discretize(components: &[BoundaryComponent], n: usize) -> Result<Discretization> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::NodeCount(n));
    }
    if components.is_empty() {
        return Err(Error::InvalidCurve("no boundary components".into()));
    }
    let total = components.len() * n;
    let mut d = Discretization {
        n,
        t: Vec::with_capacity(total),
        eta: Vec::with_capacity(total),
        deta: Vec::with_capacity(total),
        d2eta: Vec::with_capacity(total),
        component_of: Vec::with_capacity(total),
        orientations: components.iter().map(|c| c.orientation()).collect(),
        roles: components.iter().map(|c| c.role()).collect(),
        diameters: components.iter().map(|c| c.diameter()).collect(),
    };
    for (j, comp) in components.iter().enumerate() {
        for k in 0..n {
            let t = k as f64 * TAU / n as f64;
            let p = comp.eval(t);
            d.t.push(t);
            d.eta.push(p.z);
            d.deta.push(p.dz);
            d.d2eta.push(p.d2z);
            d.component_of.push(j);
        }
    }
    Ok(d)
}

impl Discretization {
    /// Nodes per component.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total node count `(m + ℓ)·n`.
    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn num_components(&self) -> usize {
        self.orientations.len()
    }

    /// Trapezoidal weight `2π/n`.
    pub fn weight(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn range(&self, j: usize) -> Range<usize> {
        j * self.n..(j + 1) * self.n
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn eta(&self) -> &[C64] {
        &self.eta
    }

    pub fn deta(&self) -> &[C64] {
        &self.deta
    }

    pub fn d2eta(&self) -> &[C64] {
        &self.d2eta
    }

    pub fn component_of(&self) -> &[usize] {
        &self.component_of
    }

    pub fn orientation(&self, j: usize) -> Orientation {
        self.orientations[j]
    }

    pub fn role(&self, j: usize) -> Role {
        self.roles[j]
    }

    pub fn diameter(&self, j: usize) -> f64 {
        self.diameters[j]
    }

    /// True when some component runs counter-clockwise, i.e. the field is
    /// bounded by an outer curve.
    pub fn has_outer_boundary(&self) -> bool {
        self.orientations.contains(&Orientation::Ccw)
    }

    /// Distance below which a point counts as near component `j`.
    pub fn near_threshold(&self, j: usize) -> f64 {
        TAU * self.diameters[j] / self.n as f64
    }

    pub fn distance_to(&self, j: usize, w: C64) -> f64 {
        self.eta[self.range(j)]
            .iter()
            .map(|z| (z - w).norm())
            .fold(f64::INFINITY, f64::min)
    }

    fn max_spacing(&self, j: usize) -> f64 {
        let pts = &self.eta[self.range(j)];
        (0..pts.len())
            .map(|i| (pts[(i + 1) % pts.len()] - pts[i]).norm())
            .fold(0.0, f64::max)
    }

    fn winding_sum(&self, j: usize, w: C64) -> f64 {
        let s: C64 = self
            .range(j)
            .map(|i| self.deta[i] / (self.eta[i] - w))
            .sum();
        (s * self.weight() / (C64::i() * TAU)).re
    }

    /// Winding number of component `j` about `w` from the trapezoidal rule
    /// applied to `(1/2πi)∮ dη/(η − w)`.
    pub fn winding_number(&self, j: usize, w: C64) -> Result<i32> {
        let near = || Error::NearBoundary {
            component: j,
            x: w.re,
            y: w.im,
        };
        if self.distance_to(j, w) < self.max_spacing(j) {
            return Err(near());
        }
        let s = self.winding_sum(j, w);
        let r = s.round();
        if (s - r).abs() > 0.1 {
            return Err(near());
        }
        Ok(r as i32)
    }

    /// Classifies `w` using the convention that the field lies to the left
    /// of every component.
    pub fn locate(&self, w: C64) -> Location {
        for j in 0..self.num_components() {
            if self.distance_to(j, w) < self.near_threshold(j) {
                return Location::NearBoundary { component: j };
            }
        }
        for j in 0..self.num_components() {
            let wn = self.winding_sum(j, w).round() as i32;
            let expected = match self.orientations[j] {
                Orientation::Ccw => 1,
                Orientation::Cw => 0,
            };
            if wn != expected {
                return Location::Outside {
                    component: j,
                    role: self.roles[j],
                };
            }
        }
        Location::InField
    }
}

/// True iff `w` lies in the field; points in the near-boundary band are
/// reported as an error.
pub fn point_in_field(d: &Discretization, w: C64) -> Result<bool> {
    match d.locate(w) {
        Location::InField => Ok(true),
        Location::Outside { .. } => Ok(false),
        Location::NearBoundary { component } => Err(Error::NearBoundary {
            component,
            x: w.re,
            y: w.im,
        }),
    }
}
