//! JSON problem description used by the command-line tool.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "n": 256,
//!   "curves": [
//!     {"kind": "circle", "center": [0, 0], "radius": 1, "orientation": "cw"},
//!     {"kind": "circle", "center": [2, 0], "radius": 0.5, "orientation": "cw"}
//!   ],
//!   "levels": [0, 1]
//! }
//! ```

use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bie::{SolveMode, SolverOptions};
use crate::condenser::{CondenserGeometry, CondenserProblem};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryComponent, Orientation, Role, DEFAULT_GRADING};

pub const SCHEMA_VERSION: u32 = 1;

/// A complex number written as `[re, im]`.
pub type Point = [f64; 2];

fn complex(p: Point) -> C64 {
    C64::new(p[0], p[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CurveKind {
    Circle {
        center: Point,
        radius: f64,
    },
    Ellipse {
        center: Point,
        semi_axes: [f64; 2],
        #[serde(default)]
        rotation: f64,
    },
    Polygon {
        vertices: Vec<Point>,
        #[serde(default)]
        grading: Option<u32>,
    },
    /// Entries `[k, re, im]` of `η(t) = Σ c_k e^{ikt}`.
    Trigonometric {
        coefficients: Vec<[f64; 3]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveConfig {
    #[serde(flatten)]
    pub kind: CurveKind,
    pub orientation: Orientation,
    #[serde(default = "plate")]
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux_point: Option<Point>,
}

fn plate() -> Role {
    Role::Plate
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maxit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<SolveMode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// `[xmin, xmax, ymin, ymax]`.
    pub bounds: [f64; 4],
    pub nx: usize,
    pub ny: usize,
}

/// Reference value for golden checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub capacity: f64,
    pub rel_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    pub curves: Vec<CurveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_point: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        let plates = cfg.curves.iter().filter(|c| c.role == Role::Plate).count();
        if plates < 2 {
            return Err(Error::Config("m ≥ 2 required".into()));
        }
        if let Some(levels) = &cfg.levels {
            if levels.len() != plates {
                return Err(Error::Config(format!(
                    "{} levels given for {plates} plates",
                    levels.len()
                )));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn solver_options(&self) -> SolverOptions {
        let mut opts = SolverOptions::default();
        if let Some(tol) = self.solver.tol {
            opts.tol = tol;
        }
        if let Some(maxit) = self.solver.maxit {
            opts.maxit = maxit;
        }
        if let Some(mode) = self.solver.mode {
            opts.mode = mode;
        }
        opts
    }

    pub fn geometry(&self) -> Result<CondenserGeometry> {
        let mut components = Vec::with_capacity(self.curves.len());
        for (j, curve) in self.curves.iter().enumerate() {
            let comp = build_curve(curve).map_err(|e| match e {
                Error::Orientation {
                    declared, actual, ..
                } => Error::Orientation {
                    component: j + 1,
                    declared,
                    actual,
                },
                Error::InvalidCurve(msg) => Error::InvalidCurve(format!("curve {}: {msg}", j + 1)),
                other => other,
            })?;
            components.push(comp.with_role(curve.role));
        }
        let mut g = CondenserGeometry::new(components)?;
        for (k, curve) in self.curves.iter().enumerate() {
            if let Some(p) = curve.aux_point {
                if curve.role != Role::Plate {
                    return Err(Error::Config(format!(
                        "curve {}: aux_point is only meaningful on plates",
                        k + 1
                    )));
                }
                g = g.with_aux_point(k, complex(p))?;
            }
        }
        if let Some(p) = self.field_point {
            g = g.with_field_point(complex(p));
        }
        Ok(g)
    }

    pub fn problem(&self) -> Result<CondenserProblem> {
        let levels = self
            .levels
            .clone()
            .ok_or_else(|| Error::Config("levels are required".into()))?;
        CondenserProblem::new(self.geometry()?, levels)
    }

    pub fn points(&self) -> Vec<C64> {
        self.points.iter().map(|&p| complex(p)).collect()
    }
}

fn build_curve(curve: &CurveConfig) -> Result<BoundaryComponent> {
    let o = curve.orientation;
    match &curve.kind {
        CurveKind::Circle { center, radius } => {
            BoundaryComponent::circle(complex(*center), *radius, o)
        }
        CurveKind::Ellipse {
            center,
            semi_axes,
            rotation,
        } => {
            BoundaryComponent::ellipse(complex(*center), (semi_axes[0], semi_axes[1]), *rotation, o)
        }
        CurveKind::Polygon { vertices, grading } => BoundaryComponent::polygon(
            vertices.iter().map(|&p| complex(p)).collect(),
            o,
            grading.unwrap_or(DEFAULT_GRADING),
        ),
        CurveKind::Trigonometric { coefficients } => {
            let mut coeffs = Vec::with_capacity(coefficients.len());
            for &[k, re, im] in coefficients {
                if k.fract() != 0.0 {
                    return Err(Error::Config(format!("non-integer frequency {k}")));
                }
                coeffs.push((k as i64, C64::new(re, im)));
            }
            BoundaryComponent::trigonometric(coeffs, o)
        }
    }
}
