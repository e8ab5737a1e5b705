//! Closed forms for the Gaussian smoothing of ReLU and sign.
//!
//! `Σ(z) = zΦ(z) + φ(z)` for ReLU and `Σ(z) = 2Φ(z) − 1` for sign. The
//! `*_taylor` functions return the Taylor coefficients `Σ^(k)(0)/k!`, which
//! equal the Hermite coefficients `d_k`; the `*_derivative` functions return
//! the derivatives themselves at variance `v`.

use libm::{erf, erfc};

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn std_normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// `Σ^(k)(0)/k!` for ReLU at unit variance.
pub fn relu_taylor(k: usize) -> f64 {
    match k {
        1 => 0.5,
        k if k % 2 == 0 => {
            let half = k / 2;
            let sign = if (half + 1) % 2 == 0 { 1.0 } else { -1.0 };
            // the (k − 1) factor is −1 at k = 0, giving Σ(0) = φ(0)
            sign / ((2.0 * std::f64::consts::PI).sqrt()
                * 2f64.powi(half as i32)
                * (k as f64 - 1.0)
                * factorial(half))
        }
        _ => 0.0,
    }
}

/// `Σ^(k)(0)/k!` for sign at unit variance.
pub fn sign_taylor(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        return 0.0;
    }
    let half = (k - 1) / 2;
    let sign = if half.is_multiple_of(2) { 1.0 } else { -1.0 };
    2.0 / std::f64::consts::PI.sqrt() * sign
        / (2f64.powf(k as f64 / 2.0) * factorial(half) * k as f64)
}

/// `Σ_v^(k)(0)` for ReLU; uses `Σ_v(t) = √v Σ(t/√v)`.
pub fn relu_derivative(v: f64, k: usize) -> f64 {
    v.powf((1.0 - k as f64) / 2.0) * factorial(k) * relu_taylor(k)
}

/// `Σ_v^(k)(0)` for sign; uses `Σ_v(t) = Σ(t/√v)`.
pub fn sign_derivative(v: f64, k: usize) -> f64 {
    v.powf(-(k as f64) / 2.0) * factorial(k) * sign_taylor(k)
}

/// `Σ_v(t)` for ReLU.
pub fn relu_smooth(v: f64, t: f64) -> f64 {
    let s = v.sqrt();
    let u = t / s;
    s * (u * std_normal_cdf(u) + std_normal_pdf(u))
}

/// `Σ_v(t)` for sign.
pub fn sign_smooth(v: f64, t: f64) -> f64 {
    erf(t / (2.0 * v).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_values() {
        assert!((relu_smooth(1.0, 0.0) - INV_SQRT_2PI).abs() < 1e-16);
        assert_eq!(sign_smooth(1.0, 0.0), 0.0);
        // 3Φ(3) + φ(3), evaluated independently
        assert!((relu_smooth(1.0, 3.0) - 3.000_382_154_317_047_7).abs() < 1e-12);
        assert_eq!(relu_taylor(1), 0.5);
        assert!((relu_taylor(2) - 0.199_471_140_200_716_35).abs() < 1e-15);
        assert!((relu_taylor(0) - INV_SQRT_2PI).abs() < 1e-16);
        assert_eq!(relu_taylor(3), 0.0);
        assert_eq!(sign_taylor(2), 0.0);
        assert!((sign_taylor(1) - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
        // Σ'' = φ for ReLU; Σ''' = 2φ'' for sign
        assert!((relu_derivative(1.0, 2) - INV_SQRT_2PI).abs() < 1e-15);
        assert!((sign_derivative(1.0, 3) + 2.0 * INV_SQRT_2PI).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences_of_smoothing() {
        let h = 1e-3;
        for v in [0.5, 1.0, 2.0] {
            let d2 = (relu_smooth(v, h) - 2.0 * relu_smooth(v, 0.0) + relu_smooth(v, -h)) / (h * h);
            assert!((d2 - relu_derivative(v, 2)).abs() < 1e-6);
            let d1 = (sign_smooth(v, h) - sign_smooth(v, -h)) / (2.0 * h);
            assert!((d1 - sign_derivative(v, 1)).abs() < 1e-6);
        }
    }
}
