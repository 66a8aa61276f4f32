//! Radial grids and sampled reduced radial functions `u(r) = r ψ(r)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, GL4_NODES, GL4_WEIGHTS};

/// Layout of a radial grid: uniform up to `2·scale`, geometric beyond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub scale: f64,
    pub r_max: f64,
    /// Uniform step as a fraction of `scale`.
    #[serde(default = "default_inner_step")]
    pub inner_step: f64,
    /// Relative increment `r_{i+1}/r_i - 1` in the geometric region.
    #[serde(default = "default_log_step")]
    pub log_step: f64,
    #[serde(default)]
    pub breakpoints: Vec<f64>,
}

fn default_inner_step() -> f64 {
    0.005
}

fn default_log_step() -> f64 {
    0.005
}

impl GridSpec {
    pub fn new(scale: f64, r_max: f64) -> Self {
        GridSpec {
            scale,
            r_max,
            inner_step: default_inner_step(),
            log_step: default_log_step(),
            breakpoints: Vec::new(),
        }
    }

    pub fn with_breakpoints(mut self, b: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(b);
        self
    }

    pub fn with_steps(mut self, inner_step: f64, log_step: f64) -> Self {
        self.inner_step = inner_step;
        self.log_step = log_step;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn new(spec: &GridSpec) -> Result<Self> {
        let GridSpec { scale, r_max, inner_step, log_step, .. } = *spec;
        for (name, v) in [("scale", scale), ("r_max", r_max), ("inner_step", inner_step), ("log_step", log_step)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("grid {name} must be positive, got {v}")));
            }
        }
        let h = inner_step * scale;
        let r_uniform = (2.0 * scale).min(r_max);
        let n_uniform = (r_uniform / h).ceil().max(1.0) as usize;
        let h = r_uniform / n_uniform as f64;
        let mut nodes: Vec<f64> = (1..=n_uniform).map(|i| h * i as f64).collect();
        let mut r = r_uniform;
        while r < r_max {
            r = (r * (1.0 + log_step)).max(r + h).min(r_max);
            nodes.push(r);
        }

        let mut breaks: Vec<f64> = spec
            .breakpoints
            .iter()
            .copied()
            .filter(|b| b.is_finite() && *b > 0.0 && *b < r)
            .collect();
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        for b in breaks {
            let i = nodes.partition_point(|&x| x < b);
            if i < nodes.len() && nodes[i] == b {
                continue;
            }
            // Snap the nearer neighbour onto the breakpoint when it is close,
            // otherwise insert a new node.
            let local = if i + 1 < nodes.len() { nodes[i + 1] - nodes[i] } else { h };
            if i < nodes.len() && nodes[i] - b < 0.3 * local && i + 1 < nodes.len() {
                nodes[i] = b;
            } else if i > 0 && b - nodes[i - 1] < 0.3 * local && i - 1 > 0 {
                nodes[i - 1] = b;
            } else {
                nodes.insert(i, b);
            }
        }
        RadialGrid::from_nodes(nodes)
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Domain("grid needs at least two nodes".into()));
        }
        if !(nodes[0] > 0.0) {
            return Err(Error::Domain(format!("first grid node must be positive, got {}", nodes[0])));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::Domain("grid nodes must be finite and strictly increasing".into()));
        }
        Ok(RadialGrid { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Index of the first node `≥ r`, clamped to the last node.
    pub fn index_at_or_above(&self, r: f64) -> usize {
        self.nodes.partition_point(|&x| x < r).min(self.nodes.len() - 1)
    }

    /// Keep nodes up to and including index `last`.
    pub fn truncated(&self, last: usize) -> RadialGrid {
        RadialGrid { nodes: self.nodes[..=last.min(self.nodes.len() - 1)].to_vec() }
    }
}

/// Closed-form continuation of a function beyond the last grid node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExteriorTail {
    /// Function is taken to vanish beyond the grid.
    None,
    Exponential { kappa: f64 },
    PowerLaw { exponent: f64 },
    /// `r^power · exp(-rate √r)`.
    StretchedExp { rate: f64, power: f64 },
    /// Bounded, non-decaying continuation.
    Constant,
}

impl ExteriorTail {
    fn ratio(&self, r_n: f64, r: f64) -> f64 {
        match *self {
            ExteriorTail::None => 0.0,
            ExteriorTail::Exponential { kappa } => (-kappa * (r - r_n)).exp(),
            ExteriorTail::PowerLaw { exponent } => (r / r_n).powf(-exponent),
            ExteriorTail::StretchedExp { rate, power } => {
                (r / r_n).powf(power) * (-rate * (r.sqrt() - r_n.sqrt())).exp()
            }
            ExteriorTail::Constant => 1.0,
        }
    }

    /// `∫_{r_n}^{r} (u/u_n)² dr`; infinite when the continuation is not square integrable.
    fn square_integral(&self, r_n: f64, r: f64) -> f64 {
        if r <= r_n {
            return 0.0;
        }
        match *self {
            ExteriorTail::None => 0.0,
            ExteriorTail::Exponential { kappa } => -(-2.0 * kappa * (r - r_n)).exp_m1() / (2.0 * kappa),
            ExteriorTail::PowerLaw { exponent } => {
                let e = 1.0 - 2.0 * exponent;
                if e.abs() < 1e-12 {
                    r_n * (r / r_n).ln()
                } else {
                    r_n * ((r / r_n).powf(e) - 1.0) / e
                }
            }
            ExteriorTail::StretchedExp { rate, .. } => {
                // ∫ exp(-2b(√s-√r_n)) ds, leading order in the power correction
                let b = rate;
                let antider = |s: f64| -(s.sqrt() / b + 0.5 / (b * b)) * (-2.0 * b * (s.sqrt() - r_n.sqrt())).exp();
                if r.is_infinite() {
                    -antider(r_n)
                } else {
                    antider(r) - antider(r_n)
                }
            }
            ExteriorTail::Constant => r - r_n,
        }
    }
}

/// Reduced radial function sampled on a grid, with slopes and an optional
/// record of `u''` one-sided limits at the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    grid: RadialGrid,
    values: Vec<f64>,
    slopes: Vec<f64>,
    curvature: Option<Vec<[f64; 2]>>,
    origin_power: f64,
    tail: ExteriorTail,
    normalized: bool,
}

impl RadialFunction {
    /// Build from samples. Missing slopes are estimated by finite differences.
    /// `origin_power` is `p` in `u ~ r^p` at the origin (`ℓ + 1` for bound states).
    pub fn new(grid: RadialGrid, values: Vec<f64>, slopes: Option<Vec<f64>>, origin_power: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("radial function has non-finite samples".into()));
        }
        let slopes = match slopes {
            Some(s) if s.len() == values.len() => s,
            Some(s) => {
                return Err(Error::Domain(format!("{} slopes for {} values", s.len(), values.len())));
            }
            None => finite_difference_slopes(grid.nodes(), &values),
        };
        Ok(RadialFunction {
            grid,
            values,
            slopes,
            curvature: None,
            origin_power,
            tail: ExteriorTail::None,
            normalized: false,
        })
    }

    pub(crate) fn from_parts(
        grid: RadialGrid,
        values: Vec<f64>,
        slopes: Vec<f64>,
        curvature: Option<Vec<[f64; 2]>>,
        origin_power: f64,
        tail: ExteriorTail,
    ) -> Self {
        RadialFunction { grid, values, slopes, curvature, origin_power, tail, normalized: false }
    }

    /// Sample a closed form and its derivative on a grid.
    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, origin_power: f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        let slopes = grid.nodes().iter().map(|&r| df(r)).collect();
        RadialFunction::new(grid, values, Some(slopes), origin_power)
    }

    pub fn with_tail(mut self, tail: ExteriorTail) -> Self {
        self.tail = tail;
        self.normalized = false;
        self
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn tail(&self) -> ExteriorTail {
        self.tail
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn origin_power(&self) -> f64 {
        self.origin_power
    }

    /// Interior sign changes on the grid.
    pub fn node_count(&self) -> usize {
        let mut count = 0;
        let mut last = 0.0_f64;
        for &v in &self.values {
            if v != 0.0 {
                if last != 0.0 && (v > 0.0) != (last > 0.0) {
                    count += 1;
                }
                last = v;
            }
        }
        count
    }

    pub fn value_at(&self, r: f64) -> f64 {
        self.value_and_slope(r).0
    }

    pub fn value_and_slope(&self, r: f64) -> (f64, f64) {
        let nodes = self.grid.nodes();
        if r <= 0.0 {
            return (0.0, 0.0);
        }
        if r < nodes[0] {
            return self.origin_model().eval(r);
        }
        let n = nodes.len();
        if r >= nodes[n - 1] {
            let rn = nodes[n - 1];
            if r == rn {
                return (self.values[n - 1], self.slopes[n - 1]);
            }
            let h = 1e-6 * (r - rn);
            let un = self.values[n - 1];
            let d = un * (self.tail.ratio(rn, r + h) - self.tail.ratio(rn, r - h)) / (2.0 * h);
            return (un * self.tail.ratio(rn, r), d);
        }
        let i = nodes.partition_point(|&x| x <= r) - 1;
        let (a, b) = (nodes[i], nodes[i + 1]);
        hermite(a, b, self.values[i], self.values[i + 1], self.slopes[i], self.slopes[i + 1], r)
    }

    fn origin_model(&self) -> OriginModel {
        OriginModel::fit(self.grid.nodes()[0], self.values[0], self.slopes[0], self.origin_power)
    }

    /// `∫_0^{upto} f(r, u, u') dr` over the sampled range, with `u` interpolated
    /// by cubic Hermite polynomials and `u'` by the Hermite interpolant of the
    /// slopes when curvatures are known.
    pub fn integrate_upto(&self, upto: f64, f: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let nodes = self.grid.nodes();
        if upto <= 0.0 {
            return 0.0;
        }
        let mut total = 0.0;
        let model = self.origin_model();
        let r1 = nodes[0].min(upto);
        let (gx, gw) = gauss_legendre(8);
        for (x, w) in gx.iter().zip(gw.iter()) {
            let r = 0.5 * r1 * (x + 1.0);
            let (u, du) = model.eval(r);
            total += 0.5 * r1 * w * f(r, u, du);
        }
        for i in 0..nodes.len() - 1 {
            let a = nodes[i];
            if a >= upto {
                break;
            }
            let b = nodes[i + 1].min(upto);
            let half = 0.5 * (b - a);
            for k in 0..4 {
                let r = a + half * (GL4_NODES[k] + 1.0);
                let (u, du_h) = hermite(a, nodes[i + 1], self.values[i], self.values[i + 1], self.slopes[i], self.slopes[i + 1], r);
                let du = match &self.curvature {
                    Some(c) => hermite(a, nodes[i + 1], self.slopes[i], self.slopes[i + 1], c[i][1], c[i + 1][0], r).0,
                    None => du_h,
                };
                total += half * GL4_WEIGHTS[k] * f(r, u, du);
            }
        }
        total
    }

    pub fn integrate(&self, f: impl Fn(f64, f64, f64) -> f64) -> f64 {
        self.integrate_upto(self.grid.r_max(), f)
    }

    /// `∫_0^∞ u² dr`, including the closed-form continuation.
    pub fn norm_squared(&self) -> f64 {
        let n = self.values.len();
        let un = self.values[n - 1];
        let tail = if un == 0.0 { 0.0 } else { un * un * self.tail.square_integral(self.grid.r_max(), f64::INFINITY) };
        self.integrate(|_, u, _| u * u) + tail
    }

    /// `∫_0^R u² dr`, including the continuation when `R` exceeds the grid.
    pub fn norm_squared_upto(&self, radius: f64) -> f64 {
        let rn = self.grid.r_max();
        let inner = self.integrate_upto(radius, |_, u, _| u * u);
        if radius > rn {
            let un = *self.values.last().unwrap();
            if un != 0.0 {
                return inner + un * un * self.tail.square_integral(rn, radius);
            }
        }
        inner
    }

    pub fn normalize(&self) -> Result<RadialFunction> {
        let n2 = self.norm_squared();
        if !n2.is_finite() {
            return Err(Error::Degenerate("function is not square integrable".into()));
        }
        if !(n2 > 0.0) {
            return Err(Error::Degenerate("function has zero norm".into()));
        }
        Ok(self.scaled(1.0 / n2.sqrt(), true))
    }

    pub fn scaled(&self, c: f64, normalized: bool) -> RadialFunction {
        RadialFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            slopes: self.slopes.iter().map(|v| v * c).collect(),
            curvature: self.curvature.as_ref().map(|cv| cv.iter().map(|[l, r]| [l * c, r * c]).collect()),
            origin_power: self.origin_power,
            tail: self.tail,
            normalized,
        }
    }
}

/// `u = r^p (α + β r²)` fitted to value and slope at the first node.
struct OriginModel {
    p: f64,
    alpha: f64,
    beta: f64,
}

impl OriginModel {
    fn fit(r1: f64, u1: f64, v1: f64, p: f64) -> Self {
        let s = r1.powf(p);
        let beta = (v1 * r1 - p * u1) / (2.0 * s * r1 * r1);
        let alpha = u1 / s - beta * r1 * r1;
        OriginModel { p, alpha, beta }
    }

    fn eval(&self, r: f64) -> (f64, f64) {
        let rp = r.powf(self.p);
        let u = rp * (self.alpha + self.beta * r * r);
        let du = rp / r * (self.p * self.alpha + (self.p + 2.0) * self.beta * r * r);
        (u, du)
    }
}

/// Cubic Hermite value and derivative at `r ∈ [a, b]`.
#[inline]
pub(crate) fn hermite(a: f64, b: f64, u0: f64, u1: f64, m0: f64, m1: f64, r: f64) -> (f64, f64) {
    let h = b - a;
    let t = (r - a) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * u0
        + (t3 - 2.0 * t2 + t) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * u1
        + (t3 - t2) * h * m1;
    let d = (6.0 * t2 - 6.0 * t) * (u0 - u1) / h + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (3.0 * t2 - 2.0 * t) * m1;
    (v, d)
}

/// Three-point derivative estimates on a nonuniform grid.
pub fn finite_difference_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let three = |i0: usize, at: usize| {
        let (x0, x1, x2) = (x[i0], x[i0 + 1], x[i0 + 2]);
        let (y0, y1, y2) = (y[i0], y[i0 + 1], y[i0 + 2]);
        let t = x[at];
        y0 * (2.0 * t - x1 - x2) / ((x0 - x1) * (x0 - x2))
            + y1 * (2.0 * t - x0 - x2) / ((x1 - x0) * (x1 - x2))
            + y2 * (2.0 * t - x0 - x1) / ((x2 - x0) * (x2 - x1))
    };
    if n < 3 {
        let d = (y[n - 1] - y[0]) / (x[n - 1] - x[0]);
        return vec![d; n];
    }
    (0..n)
        .map(|i| {
            if i == 0 {
                three(0, 0)
            } else if i == n - 1 {
                three(n - 3, n - 1)
            } else {
                three(i - 1, i)
            }
        })
        .collect()
}
