//! Physical parameters and the body-force model.
//!
//! The force (f1, f2) enters the reformulated problem only through three
//! quantities: the constant c1 in Δz = -c1, the boundary value c2 = f2(x, 0)
//! and the column integral c3 = ∫_{-d}^0 f2 dr. The potential F with
//! F_x = -f1, F_y = f2 is normalized by F(0, -d) = 0.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How c2 and c3 relate to the force model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// c2 and c3 follow from the force (c2 = c1, c3 = c1 d for the constant model).
    Physical,
    /// c2 and c3 are free nonnegative inputs; only the spectral problem uses them.
    Abstract,
}

/// Physical constants and derived force constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Channel half-depth.
    pub d: f64,
    /// Constant in Δz = -c1.
    pub c1: f64,
    pub rho: f64,
    /// Wave speed.
    pub c: f64,
    /// f2 on the undisturbed surface.
    pub c2: f64,
    /// ∫_{-d}^0 f2 dr, equal to the potential F on the undisturbed surface.
    pub c3: f64,
    /// Lower cutoff of the admissible ξ interval.
    pub epsilon0: f64,
    /// Upper end of the admissible ξ interval.
    pub xi_max: f64,
    /// Relative tolerance for structural checks.
    pub tol: f64,
    pub mode: Mode,
}

impl ModelParams {
    /// Constant vertical force of strength `c1` in a channel of half-depth `d`.
    pub fn physical(d: f64, c1: f64) -> Self {
        Self {
            d,
            c1,
            rho: 1.0,
            c: 1.0,
            c2: c1,
            c3: c1 * d,
            epsilon0: 0.05,
            xi_max: 3.0,
            tol: 1e-8,
            mode: Mode::Physical,
        }
    }

    /// Free (c2, c3) for exercising the spectral problem over its full range.
    pub fn abstract_constants(d: f64, c1: f64, c2: f64, c3: f64) -> Self {
        Self {
            c2,
            c3,
            mode: Mode::Abstract,
            ..Self::physical(d, c1)
        }
    }

    /// Reference configuration: c1 = 1, d = 0.1, ρ = 1, c = 1, constant force.
    pub fn reference() -> Self {
        Self::physical(0.1, 1.0)
    }

    pub fn with_density(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_wave_speed(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_xi_range(mut self, epsilon0: f64, xi_max: f64) -> Self {
        self.epsilon0 = epsilon0;
        self.xi_max = xi_max;
        self
    }

    pub fn with_constants(mut self, c2: f64, c3: f64) -> Self {
        self.c2 = c2;
        self.c3 = c3;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("d", self.d), ("c1", self.c1), ("rho", self.rho), ("c", self.c)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("c2", self.c2), ("c3", self.c3)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if !(self.epsilon0 > 0.0 && self.epsilon0 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon0 must lie in (0, 1), got {}",
                self.epsilon0
            )));
        }
        if !(self.xi_max > self.epsilon0) {
            return Err(Error::InvalidParameter(format!(
                "xi_max ({}) must exceed epsilon0 ({})",
                self.xi_max, self.epsilon0
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        if self.mode == Mode::Physical {
            let scale = self.c1.max(1.0);
            if (self.c2 - self.c1).abs() > self.tol * scale
                || (self.c3 - self.c1 * self.d).abs() > self.tol * scale
            {
                return Err(Error::InvalidParameter(format!(
                    "physical mode requires c2 = c1 and c3 = c1*d (got c2 = {}, c3 = {})",
                    self.c2, self.c3
                )));
            }
        }
        Ok(())
    }
}

/// One row of a tabulated force file (`x,y,f1,f2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceSample {
    pub x: f64,
    pub y: f64,
    pub f1: f64,
    pub f2: f64,
}

/// Description from which a [`BodyForceModel`] is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceDescription {
    /// `constant` (alias `constant_vertical`) or `tabulated`.
    pub kind: String,
    pub c1: f64,
    pub samples: Vec<ForceSample>,
}

impl ForceDescription {
    pub fn constant(c1: f64) -> Self {
        Self {
            kind: "constant".into(),
            c1,
            samples: Vec::new(),
        }
    }

    pub fn tabulated(samples: Vec<ForceSample>) -> Self {
        Self {
            kind: "tabulated".into(),
            c1: 0.0,
            samples,
        }
    }
}

/// Rectangular table of (f1, f2), bilinearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Row-major over x: index `ix * ys.len() + iy`.
    f1: Vec<f64>,
    f2: Vec<f64>,
}

impl ForceTable {
    fn from_samples(samples: &[ForceSample]) -> Result<Self> {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in samples {
            if !(s.x.is_finite() && s.y.is_finite() && s.f1.is_finite() && s.f2.is_finite()) {
                return Err(Error::ForceTable("non-finite entry".into()));
            }
            if !xs.contains(&s.x) {
                if xs.last().is_some_and(|&last| s.x < last) {
                    return Err(Error::ForceTable("x axis is not monotone".into()));
                }
                xs.push(s.x);
            }
        }
        // y must increase within each x block
        for s in samples.iter().take_while(|s| s.x == samples[0].x) {
            if ys.last().is_some_and(|&last| s.y <= last) {
                return Err(Error::ForceTable("y axis is not monotone".into()));
            }
            ys.push(s.y);
        }
        if xs.len() < 2 || ys.len() < 2 {
            return Err(Error::ForceTable("need at least two distinct x and y values".into()));
        }
        if samples.len() != xs.len() * ys.len() {
            return Err(Error::ForceTable(format!(
                "grid is not rectangular: {} samples for {} x {} axes",
                samples.len(),
                xs.len(),
                ys.len()
            )));
        }
        let ny = ys.len();
        let mut f1 = vec![0.0; samples.len()];
        let mut f2 = vec![0.0; samples.len()];
        for (k, s) in samples.iter().enumerate() {
            let (ix, iy) = (k / ny, k % ny);
            if s.x != xs[ix] || s.y != ys[iy] {
                return Err(Error::ForceTable(format!(
                    "grid is not rectangular at row {}: expected ({}, {}), found ({}, {})",
                    k + 1,
                    xs[ix],
                    ys[iy],
                    s.x,
                    s.y
                )));
            }
            f1[k] = s.f1;
            f2[k] = s.f2;
        }
        Ok(Self { xs, ys, f1, f2 })
    }

    fn locate(axis: &[f64], v: f64) -> (usize, f64) {
        let n = axis.len();
        if v <= axis[0] {
            return (0, 0.0);
        }
        if v >= axis[n - 1] {
            return (n - 2, 1.0);
        }
        let k = axis.partition_point(|&a| a <= v) - 1;
        let k = k.min(n - 2);
        (k, (v - axis[k]) / (axis[k + 1] - axis[k]))
    }

    fn interp(&self, field: &[f64], x: f64, y: f64) -> f64 {
        let ny = self.ys.len();
        let (ix, tx) = Self::locate(&self.xs, x);
        let (iy, ty) = Self::locate(&self.ys, y);
        let at = |i: usize, j: usize| field[i * ny + j];
        (1.0 - tx) * ((1.0 - ty) * at(ix, iy) + ty * at(ix, iy + 1))
            + tx * ((1.0 - ty) * at(ix + 1, iy) + ty * at(ix + 1, iy + 1))
    }

    /// Exact integral of the (piecewise linear in y) interpolant of f2 over [a, b].
    fn integrate_f2_y(&self, x: f64, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integrate_f2_y(x, b, a);
        }
        let mut knots = vec![a];
        knots.extend(self.ys.iter().copied().filter(|&y| y > a && y < b));
        knots.push(b);
        knots
            .windows(2)
            .map(|w| 0.5 * (w[1] - w[0]) * (self.interp(&self.f2, x, w[0]) + self.interp(&self.f2, x, w[1])))
            .sum()
    }

    fn integrate_f1_x(&self, y: f64, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integrate_f1_x(y, b, a);
        }
        let mut knots = vec![a];
        knots.extend(self.xs.iter().copied().filter(|&x| x > a && x < b));
        knots.push(b);
        knots
            .windows(2)
            .map(|w| 0.5 * (w[1] - w[0]) * (self.interp(&self.f1, w[0], y) + self.interp(&self.f1, w[1], y)))
            .sum()
    }

    pub fn x_axis(&self) -> &[f64] {
        &self.xs
    }

    pub fn y_axis(&self) -> &[f64] {
        &self.ys
    }
}

/// Body force (f1, f2) acting on the fluid, in the wave frame.
#[derive(Debug, Clone, PartialEq)]
pub enum BodyForceModel {
    /// f1 ≡ 0, f2 ≡ c1.
    ConstantVertical { c1: f64 },
    Tabulated(ForceTable),
}

impl BodyForceModel {
    pub fn f1(&self, x: f64, y: f64) -> f64 {
        match self {
            BodyForceModel::ConstantVertical { .. } => 0.0,
            BodyForceModel::Tabulated(t) => t.interp(&t.f1, x, y),
        }
    }

    pub fn f2(&self, x: f64, y: f64) -> f64 {
        match self {
            BodyForceModel::ConstantVertical { c1 } => *c1,
            BodyForceModel::Tabulated(t) => t.interp(&t.f2, x, y),
        }
    }

    /// Potential F with F_x = -f1, F_y = f2 and F(0, -d) = 0.
    pub fn potential(&self, x: f64, y: f64, d: f64) -> f64 {
        match self {
            BodyForceModel::ConstantVertical { c1 } => c1 * (y + d),
            BodyForceModel::Tabulated(t) => t.integrate_f2_y(x, -d, y) - t.integrate_f1_x(-d, 0.0, x),
        }
    }

    fn sample_axes(&self, d: f64) -> (Vec<f64>, Vec<f64>) {
        match self {
            BodyForceModel::ConstantVertical { .. } => {
                let xs = (0..=16).map(|k| -PI + 2.0 * PI * k as f64 / 16.0).collect();
                let ys = (0..=16).map(|k| -d + d * k as f64 / 16.0).collect();
                (xs, ys)
            }
            BodyForceModel::Tabulated(t) => {
                let xs = t.xs.iter().copied().filter(|x| (-PI..=PI).contains(x)).collect();
                let mut ys: Vec<f64> = t.ys.iter().copied().filter(|y| (-d..=0.0).contains(y)).collect();
                if ys.first() != Some(&-d) {
                    ys.insert(0, -d);
                }
                if ys.last() != Some(&0.0) {
                    ys.push(0.0);
                }
                (xs, ys)
            }
        }
    }
}

/// Builds a force model from its description.
pub fn build_body_force(desc: &ForceDescription) -> Result<BodyForceModel> {
    match desc.kind.as_str() {
        "constant" | "constant_vertical" | "constantvertical" => {
            if !(desc.c1.is_finite() && desc.c1 > 0.0) {
                return Err(Error::InvalidParameter(format!("c1 must be positive, got {}", desc.c1)));
            }
            Ok(BodyForceModel::ConstantVertical { c1: desc.c1 })
        }
        "tabulated" => Ok(BodyForceModel::Tabulated(ForceTable::from_samples(&desc.samples)?)),
        other => Err(Error::InvalidParameter(format!("unknown force kind '{other}'"))),
    }
}

/// One structural check on the force model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, max_residual: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.into(),
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
        });
    }
}

/// Central difference on a possibly non-uniform axis, one-sided at the ends.
fn axis_derivative(axis: &[f64], values: &[f64], k: usize) -> f64 {
    let n = axis.len();
    if k == 0 {
        (values[1] - values[0]) / (axis[1] - axis[0])
    } else if k == n - 1 {
        (values[n - 1] - values[n - 2]) / (axis[n - 1] - axis[n - 2])
    } else {
        (values[k + 1] - values[k - 1]) / (axis[k + 1] - axis[k - 1])
    }
}

/// Checks the structural assumptions on (f1, f2) over [-π, π] × [-d, 0].
///
/// Failures are reported, never raised.
pub fn validate_body_force(model: &BodyForceModel, params: &ModelParams) -> ValidationReport {
    let d = params.d;
    let scale = params.c1.max(f64::MIN_POSITIVE);
    let tol = params.tol;
    let mut report = ValidationReport { checks: Vec::new() };

    let (xs, ys) = model.sample_axes(d);
    let (nx, ny) = (xs.len(), ys.len());
    let f1: Vec<Vec<f64>> = xs.iter().map(|&x| ys.iter().map(|&y| model.f1(x, y)).collect()).collect();
    let f2: Vec<Vec<f64>> = xs.iter().map(|&x| ys.iter().map(|&y| model.f2(x, y)).collect()).collect();

    // ∂f1/∂y + ∂f2/∂x
    let mut irrot = 0.0f64;
    for ix in 0..nx {
        for iy in 0..ny {
            let df1_dy = axis_derivative(&ys, &f1[ix], iy);
            let col: Vec<f64> = (0..nx).map(|k| f2[k][iy]).collect();
            let df2_dx = axis_derivative(&xs, &col, ix);
            irrot = irrot.max((df1_dy + df2_dx).abs());
        }
    }
    report.push("irrotational", irrot, tol * scale / d);

    let boundary = (0..nx)
        .map(|ix| f1[ix][0].abs().max(f1[ix][ny - 1].abs()))
        .fold(0.0, f64::max);
    report.push("f1_boundary_vanishing", boundary, tol * scale);

    let trapz = |vals: &[f64], upto: usize| -> f64 {
        (0..upto).map(|k| 0.5 * (ys[k + 1] - ys[k]) * (vals[k] + vals[k + 1])).sum()
    };
    let integral = (0..nx).map(|ix| trapz(&f1[ix], ny - 1).abs()).fold(0.0, f64::max);
    report.push("f1_zero_vertical_integral", integral, tol * scale * d);

    // ∫_{-d}^y ∂f1/∂x dr - f2 should equal -c1
    let mut laplace = 0.0f64;
    for ix in 0..nx {
        let df1_dx: Vec<f64> = (0..ny)
            .map(|iy| {
                let row: Vec<f64> = (0..nx).map(|k| f1[k][iy]).collect();
                axis_derivative(&xs, &row, ix)
            })
            .collect();
        for iy in 0..ny {
            let value = trapz(&df1_dx, iy) - f2[ix][iy];
            laplace = laplace.max((value + params.c1).abs());
        }
    }
    report.push("laplacian_constant", laplace, tol * scale);

    let negative = f1
        .iter()
        .chain(f2.iter())
        .flatten()
        .fold(0.0f64, |acc, &v| acc.max(-v));
    report.push("nonnegative", negative, tol * scale);

    report
}

/// Computes c2 = f2(x, 0) and c3 = ∫_{-d}^0 f2(x, r) dr, rejecting x-dependence.
pub fn derive_constants(model: &BodyForceModel, params: &ModelParams) -> Result<(f64, f64)> {
    match model {
        BodyForceModel::ConstantVertical { c1 } => Ok((*c1, c1 * params.d)),
        BodyForceModel::Tabulated(t) => {
            let xs: Vec<f64> = t.xs.iter().copied().filter(|x| (-PI..=PI).contains(x)).collect();
            if xs.is_empty() {
                return Err(Error::ForceTable("table does not cover [-pi, pi]".into()));
            }
            let c2s: Vec<f64> = xs.iter().map(|&x| model.f2(x, 0.0)).collect();
            let c3s: Vec<f64> = xs.iter().map(|&x| t.integrate_f2_y(x, -params.d, 0.0)).collect();
            let spread = |v: &[f64]| {
                v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min)
            };
            let scale = params.c1.max(f64::MIN_POSITIVE);
            let tol = params.tol * scale;
            let s2 = spread(&c2s);
            if s2 > tol {
                return Err(Error::XDependentConstant {
                    which: "boundary",
                    spread: s2,
                    tol,
                });
            }
            let s3 = spread(&c3s);
            if s3 > tol * params.d {
                return Err(Error::XDependentConstant {
                    which: "integrated",
                    spread: s3,
                    tol: tol * params.d,
                });
            }
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            Ok((mean(&c2s), mean(&c3s)))
        }
    }
}
