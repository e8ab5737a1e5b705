//! Activation functions and their Gaussian smoothings.

pub mod closed_form;
pub mod quadrature;
mod smoothing;

pub use smoothing::{
    hermite_coeffs, is_expressive, smooth, smooth_closed_form, smoothing_derivative,
    smoothing_derivative_quadrature, smoothing_derivatives_quadrature, smoothing_drift,
    ExpressivityReport, SmoothingProfile, Verdict, DEFAULT_ZERO_TOL, MAX_ORDER,
};

use std::path::Path;

use crate::error::{Error, Result};

/// `|σ(x)| ≤ C |x|^c + C`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolyBound {
    pub constant: f64,
    pub power: f64,
}

impl PolyBound {
    pub fn holds_at(&self, x: f64, value: f64) -> bool {
        value.abs() <= self.constant * x.abs().powf(self.power) + self.constant
    }
}

/// Piecewise-linear activation: interpolates `(xs, ys)` and continues with
/// the given slopes beyond the end breakpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
    left_slope: f64,
    right_slope: f64,
}

impl PiecewiseLinear {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, left_slope: f64, right_slope: f64) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::InvalidArgument(
                "piecewise-linear table needs matching, non-empty breakpoint and value lists"
                    .into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if xs.iter().chain(&ys).chain([&left_slope, &right_slope]).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite entry in table".into()));
        }
        Ok(PiecewiseLinear {
            xs,
            ys,
            left_slope,
            right_slope,
        })
    }

    /// Interpolant of `g` on `pieces + 1` equispaced points over `[lo, hi]`,
    /// continued with the end-segment slopes.
    pub fn interpolate(g: impl Fn(f64) -> f64, lo: f64, hi: f64, pieces: usize) -> Result<Self> {
        let xs: Vec<f64> = (0..=pieces)
            .map(|i| lo + (hi - lo) * i as f64 / pieces as f64)
            .collect();
        let ys: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
        let m = xs.len();
        let sl = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        let sr = (ys[m - 1] - ys[m - 2]) / (xs[m - 1] - xs[m - 2]);
        Self::new(xs, ys, sl, sr)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    pub fn eval(&self, x: f64) -> f64 {
        let m = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0] + self.left_slope * (x - self.xs[0]);
        }
        if x >= self.xs[m - 1] {
            return self.ys[m - 1] + self.right_slope * (x - self.xs[m - 1]);
        }
        let j = self.xs.partition_point(|&b| b <= x);
        let (x0, x1) = (self.xs[j - 1], self.xs[j]);
        let (y0, y1) = (self.ys[j - 1], self.ys[j]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Slope; at a breakpoint the slope of the segment on its left.
    pub fn slope(&self, x: f64) -> f64 {
        let m = self.xs.len();
        if x <= self.xs[0] {
            return self.left_slope;
        }
        if x > self.xs[m - 1] {
            return self.right_slope;
        }
        let j = self.xs.partition_point(|&b| b < x);
        (self.ys[j] - self.ys[j - 1]) / (self.xs[j] - self.xs[j - 1])
    }

    fn max_slope(&self) -> f64 {
        let inner = self
            .xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs());
        inner
            .chain([self.left_slope.abs(), self.right_slope.abs()])
            .fold(0.0, f64::max)
    }

    /// Reads `breakpoint,value` rows plus `left_slope,<v>` and `right_slope,<v>` rows.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::io(path, io),
                other => Error::parse(path.display().to_string(), format!("{other:?}")),
            })?;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        let (mut left, mut right) = (None, None);
        let bad = |msg: String| Error::parse(path.display().to_string(), msg);
        for rec in reader.records() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(bad(format!("short row {:?}", rec)));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}`")));
            match &rec[0] {
                "breakpoint" => continue,
                "left_slope" => left = Some(num(&rec[1])?),
                "right_slope" => right = Some(num(&rec[1])?),
                x => {
                    xs.push(num(x)?);
                    ys.push(num(&rec[1])?);
                }
            }
        }
        let left = left.ok_or_else(|| bad("missing `left_slope` row".into()))?;
        let right = right.ok_or_else(|| bad("missing `right_slope` row".into()))?;
        Self::new(xs, ys, left, right)
    }
}

/// Scalar activation `σ`.
#[derive(Clone, Debug, PartialEq)]
pub enum Activation {
    Relu,
    /// `sign(x)` with `sign(0) := +1`.
    Sign,
    Pwl(PiecewiseLinear),
}

impl Activation {
    /// `relu`, `sign`, `pwl:@path`, or inline `pwl:x=..;y=..;left=..;right=..`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        match t {
            "relu" => return Ok(Activation::Relu),
            "sign" => return Ok(Activation::Sign),
            _ => {}
        }
        let body = t
            .strip_prefix("pwl:")
            .ok_or_else(|| Error::parse(t, "expected `relu`, `sign` or `pwl:...`"))?;
        if let Some(path) = body.strip_prefix('@') {
            return PiecewiseLinear::from_csv(Path::new(path)).map(Activation::Pwl);
        }
        let mut xs = None;
        let mut ys = None;
        let (mut left, mut right) = (None, None);
        let list = |v: &str| -> Result<Vec<f64>> {
            v.split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| Error::parse(t, format!("bad number `{s}`"))))
                .collect()
        };
        for part in body.split(';').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::parse(t, format!("expected key=value, got `{part}`")))?;
            match k.trim() {
                "x" => xs = Some(list(v)?),
                "y" => ys = Some(list(v)?),
                "left" => left = Some(list(v)?[0]),
                "right" => right = Some(list(v)?[0]),
                other => return Err(Error::parse(t, format!("unknown key `{other}`"))),
            }
        }
        let missing = |k: &str| Error::parse(t, format!("missing `{k}=`"));
        PiecewiseLinear::new(
            xs.ok_or_else(|| missing("x"))?,
            ys.ok_or_else(|| missing("y"))?,
            left.ok_or_else(|| missing("left"))?,
            right.ok_or_else(|| missing("right"))?,
        )
        .map(Activation::Pwl)
    }

    pub fn name(&self) -> String {
        match self {
            Activation::Relu => "relu".into(),
            Activation::Sign => "sign".into(),
            Activation::Pwl(p) => format!("pwl[{}]", p.xs.len()),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::Sign => {
                if x >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Activation::Pwl(p) => p.eval(x),
        }
    }

    /// Almost-everywhere derivative; the ReLU subgradient at 0 is 0.
    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sign => 0.0,
            Activation::Pwl(p) => p.slope(x),
        }
    }

    /// Whether gradient training is meaningful (a.e. differentiable, nonzero slopes).
    pub fn trainable(&self) -> bool {
        !matches!(self, Activation::Sign)
    }

    /// Points where `σ` is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Activation::Relu | Activation::Sign => vec![0.0],
            Activation::Pwl(p) => p.xs.clone(),
        }
    }

    pub fn is_odd(&self) -> bool {
        matches!(self, Activation::Sign)
    }

    pub fn poly_bound(&self) -> PolyBound {
        match self {
            Activation::Relu => PolyBound {
                constant: 1.0,
                power: 1.0,
            },
            Activation::Sign => PolyBound {
                constant: 1.0,
                power: 0.0,
            },
            Activation::Pwl(p) => {
                let s = p.max_slope();
                let max_y = p.ys.iter().fold(0.0f64, |a, y| a.max(y.abs()));
                let max_x = p.xs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                PolyBound {
                    constant: (max_y + s * max_x).max(s).max(1e-300),
                    power: 1.0,
                }
            }
        }
    }
}
