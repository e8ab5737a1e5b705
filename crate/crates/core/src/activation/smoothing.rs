use super::closed_form::{self, factorial};
use super::quadrature::GaussianIntegrator;
use super::Activation;
use crate::error::{Error, Result};

/// Highest derivative order; Hermite weights grow like `k!` beyond this.
pub const MAX_ORDER: usize = 40;

/// Relative zero threshold for the expressivity check.
pub const DEFAULT_ZERO_TOL: f64 = 1e-7;

fn check_variance(v: f64) -> Result<()> {
    if !(v > 0.0 && v <= 4.0) {
        return Err(Error::InvalidArgument(format!(
            "smoothing variance must lie in (0, 4], got {v}"
        )));
    }
    Ok(())
}

fn check_order(k: usize) -> Result<()> {
    if k > MAX_ORDER {
        return Err(Error::OrderCap {
            order: k,
            cap: MAX_ORDER,
        });
    }
    Ok(())
}

/// Kinks of `z ↦ σ(t + √v z)`.
fn kinks(act: &Activation, v: f64, t: f64) -> Vec<f64> {
    let s = v.sqrt();
    act.breakpoints().iter().map(|b| (b - t) / s).collect()
}

/// `He_0(z), …, He_k(z)` (probabilists' Hermite polynomials).
pub(crate) fn hermite_values(z: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = z;
    }
    for m in 1..out.len().saturating_sub(1) {
        out[m + 1] = z * out[m] - m as f64 * out[m - 1];
    }
}

/// `Σ_v(t) = E[σ(t + √v Z)]` by quadrature.
pub fn smooth(act: &Activation, v: f64, t: f64) -> Result<f64> {
    check_variance(v)?;
    let s = v.sqrt();
    Ok(GaussianIntegrator::default().expect(&kinks(act, v, t), |z| act.eval(t + s * z)))
}

/// Closed-form `Σ_v(t)` where one exists (ReLU, sign).
pub fn smooth_closed_form(act: &Activation, v: f64, t: f64) -> Option<f64> {
    match act {
        Activation::Relu => Some(closed_form::relu_smooth(v, t)),
        Activation::Sign => Some(closed_form::sign_smooth(v, t)),
        Activation::Pwl(_) => None,
    }
}

/// `[Σ_v^(0)(0), …, Σ_v^(k_max)(0)]` by quadrature of
/// `v^{-m/2} E[σ(√v Z) He_m(Z)]`.
pub fn smoothing_derivatives_quadrature_with(
    integrator: &GaussianIntegrator,
    act: &Activation,
    v: f64,
    k_max: usize,
) -> Result<Vec<f64>> {
    check_variance(v)?;
    check_order(k_max)?;
    let s = v.sqrt();
    let raw = integrator.expect_vec(&kinks(act, v, 0.0), k_max + 1, |z, out| {
        hermite_values(z, out);
        let sv = act.eval(s * z);
        out.iter_mut().for_each(|h| *h *= sv);
    });
    Ok(raw
        .into_iter()
        .enumerate()
        .map(|(m, e)| e * v.powf(-(m as f64) / 2.0))
        .collect())
}

pub fn smoothing_derivatives_quadrature(act: &Activation, v: f64, k_max: usize) -> Result<Vec<f64>> {
    smoothing_derivatives_quadrature_with(&GaussianIntegrator::default(), act, v, k_max)
}

/// `Σ_v^(k)(0)` by quadrature, regardless of closed forms.
pub fn smoothing_derivative_quadrature(act: &Activation, v: f64, k: usize) -> Result<f64> {
    Ok(smoothing_derivatives_quadrature(act, v, k)?[k])
}

/// `Σ_v^(k)(0)`: closed form for ReLU and sign, quadrature otherwise.
pub fn smoothing_derivative(act: &Activation, v: f64, k: usize) -> Result<f64> {
    check_variance(v)?;
    check_order(k)?;
    match act {
        Activation::Relu => Ok(closed_form::relu_derivative(v, k)),
        Activation::Sign => Ok(closed_form::sign_derivative(v, k)),
        Activation::Pwl(_) => smoothing_derivative_quadrature(act, v, k),
    }
}

/// Hermite coefficients `d_m = Σ^(m)(0)/m!`, `m = 0..=k_max`, at unit variance.
pub fn hermite_coeffs(act: &Activation, k_max: usize) -> Result<Vec<f64>> {
    check_order(k_max)?;
    (0..=k_max)
        .map(|m| smoothing_derivative(act, 1.0, m).map(|d| d / factorial(m)))
        .collect()
}

/// `|Σ^(k)_{1−ε}(0) − Σ^(k)(0)|`, both by quadrature.
pub fn smoothing_drift(act: &Activation, k: usize, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "drift needs 0 < ε < 1/2, got {eps}"
        )));
    }
    let a = smoothing_derivative_quadrature(act, 1.0 - eps, k)?;
    let b = smoothing_derivative_quadrature(act, 1.0, k)?;
    Ok((a - b).abs())
}

/// Derivatives at zero and Hermite coefficients of one activation.
#[derive(Clone, Debug)]
pub struct SmoothingProfile {
    pub v: f64,
    pub derivatives: Vec<f64>,
    /// `d_m`, only meaningful for `v = 1`.
    pub hermite: Vec<f64>,
    /// `E[σ(Z)²]` at the profile's variance.
    pub second_moment: f64,
}

impl SmoothingProfile {
    pub fn compute(act: &Activation, v: f64, k_max: usize) -> Result<Self> {
        let derivatives = smoothing_derivatives_quadrature(act, v, k_max)?;
        let hermite = derivatives
            .iter()
            .enumerate()
            .map(|(m, d)| d / factorial(m))
            .collect();
        let s = v.sqrt();
        let second_moment = GaussianIntegrator::default()
            .expect(&kinks(act, v, 0.0), |z| act.eval(s * z).powi(2));
        Ok(SmoothingProfile {
            v,
            derivatives,
            hermite,
            second_moment,
        })
    }

    /// Partial sums `Σ_{m≤K} d_m² m!`, each bounded by `E[σ(Z)²]` (Bessel).
    pub fn bessel_partial_sums(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.hermite
            .iter()
            .enumerate()
            .map(|(m, d)| {
                acc += d * d * factorial(m);
                acc
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// No two consecutive vanishing derivatives among orders `0..=max_order`.
    Expressive,
    NotExpressive,
}

/// Finite-order expressivity check of `Σ^(m)(0)`, `m = 0..=max_order`.
#[derive(Clone, Debug)]
pub struct ExpressivityReport {
    pub activation: String,
    /// The verdict is certified only up to this order.
    pub max_order: usize,
    pub derivatives: Vec<f64>,
    /// `true` where `|Σ^(m)(0)| <= tol`.
    pub zero: Vec<bool>,
    pub tol: f64,
    pub verdict: Verdict,
    /// First `(m, m + 1)` with both derivatives zero.
    pub witness: Option<(usize, usize)>,
}

impl ExpressivityReport {
    pub fn is_expressive(&self) -> bool {
        self.verdict == Verdict::Expressive
    }

    pub fn verdict_label(&self) -> String {
        match self.verdict {
            Verdict::Expressive => format!("expressive-up-to-{}", self.max_order),
            Verdict::NotExpressive => format!("not-expressive-up-to-{}", self.max_order),
        }
    }
}

/// Flags `|Σ^(m)(0)| <= tol_rel · max_{m'≤K} |Σ^(m')(0)|` as zero and looks
/// for two consecutive zeros.
pub fn is_expressive(act: &Activation, max_order: usize, tol_rel: f64) -> Result<ExpressivityReport> {
    if max_order < 2 {
        return Err(Error::InvalidArgument(
            "expressivity check needs order >= 2".into(),
        ));
    }
    let derivatives = smoothing_derivatives_quadrature(act, 1.0, max_order)?;
    let scale = derivatives.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let tol = tol_rel * scale;
    let zero: Vec<bool> = derivatives.iter().map(|d| d.abs() <= tol).collect();
    let witness = (0..max_order).find(|&m| zero[m] && zero[m + 1]).map(|m| (m, m + 1));
    Ok(ExpressivityReport {
        activation: act.name(),
        max_order,
        derivatives,
        zero,
        tol,
        verdict: if witness.is_some() {
            Verdict::NotExpressive
        } else {
            Verdict::Expressive
        },
        witness,
    })
}
