use super::moment::{moment_formula, SignPattern};
use super::{InalEstimate, Method};
use crate::activation::{smoothing_derivative, Activation, DEFAULT_ZERO_TOL};
use crate::error::{Error, Result};

/// Dominant-term prediction for `INAL(M_k, σ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticPrediction {
    pub k: usize,
    /// Smallest order `>= k` with a nonzero smoothing derivative at 0.
    pub p: usize,
    /// `Σ^(P)(0) / P!`.
    pub a_p: f64,
    /// `n^{P/2} · |E[M_T G^P]|`.
    pub c_p: f64,
    /// `|a_P · C(P)|`, the coefficient of `n^{−P/2}` in the √INAL lower bound.
    pub leading_coefficient: f64,
}

impl AsymptoticPrediction {
    /// Lower envelope `(a_P C(P))² n^{−P}`.
    pub fn envelope(&self, n: usize) -> f64 {
        self.leading_coefficient.powi(2) * (n as f64).powi(-(self.p as i32))
    }

    pub fn estimate(&self, n: usize) -> InalEstimate {
        InalEstimate {
            value: self.envelope(n),
            std_error: 0.0,
            method: Method::Asymptotic,
            samples: 0,
            inner_samples: 0,
        }
    }
}

/// Finds `P ∈ {k, k+1}` from the unit-variance smoothing derivatives.
pub fn inal_monomial_asymptotic(k: usize, act: &Activation) -> Result<AsymptoticPrediction> {
    let derivs: Vec<f64> = (0..=k + 1)
        .map(|m| smoothing_derivative(act, 1.0, m))
        .collect::<Result<_>>()?;
    let scale = derivs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let tol = DEFAULT_ZERO_TOL * scale;
    let p = (k..=k + 1).find(|&m| derivs[m].abs() > tol).ok_or_else(|| Error::NotExpressive {
        order: k + 1,
        detail: format!("Σ^({k})(0) and Σ^({})(0) both vanish", k + 1),
    })?;
    let factorial: f64 = (1..=p).map(|i| i as f64).product();
    let a_p = derivs[p] / factorial;
    let c_p = moment_formula(k, p, k.max(1), &SignPattern::positive(k))?.constant.abs();
    Ok(AsymptoticPrediction {
        k,
        p,
        a_p,
        c_p,
        leading_coefficient: (a_p * c_p).abs(),
    })
}
