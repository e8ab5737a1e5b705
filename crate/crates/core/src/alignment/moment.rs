//! Exact moments `E[M_T(x) · G^ν]` with `G = Σ_{i∈T} w_i x_i + b`, for a fixed
//! sign pattern of `(w_T, b)` and magnitudes `|w_i|, |b|` half-normal with
//! variance `1/n`.

use crate::error::{Error, Result};

/// Largest supported power ν.
pub const MOMENT_CAP: usize = 20;

/// Signs of `w_i` for `i ∈ T` and of `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignPattern {
    pub tau: Vec<i8>,
    pub bias_sign: i8,
}

impl SignPattern {
    pub fn positive(k: usize) -> Self {
        SignPattern {
            tau: vec![1; k],
            bias_sign: 1,
        }
    }

    /// All `2^{k+1}` patterns; bit `k` of the index is the bias sign.
    pub fn all(k: usize) -> impl Iterator<Item = SignPattern> {
        (0u64..1 << (k + 1)).map(move |bits| SignPattern {
            tau: (0..k)
                .map(|i| if (bits >> i) & 1 == 1 { -1 } else { 1 })
                .collect(),
            bias_sign: if (bits >> k) & 1 == 1 { -1 } else { 1 },
        })
    }

    /// Exponent `C'` of the sign `(−1)^{C'}` at power ν.
    pub fn sign_exponent(&self, nu: usize) -> usize {
        let k = self.tau.len();
        let neg = self.tau.iter().filter(|&&t| t < 0).count();
        let bias = nu >= k && (nu - k) % 2 == 1 && self.bias_sign < 0;
        neg + bias as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentFormulaResult {
    pub k: usize,
    pub nu: usize,
    pub n: usize,
    pub value: f64,
    /// `value · n^{ν/2}`.
    pub constant: f64,
    pub sign_pattern: SignPattern,
}

/// `E|N(0,1)|^j`: `C_0 = 1`, `C_1 = √(2/π)`, `C_j = (j − 1) C_{j−2}`.
pub fn abs_gaussian_moment(j: usize) -> f64 {
    match j {
        0 => 1.0,
        1 => (2.0 / std::f64::consts::PI).sqrt(),
        _ => (j - 1) as f64 * abs_gaussian_moment(j - 2),
    }
}

fn factorial_u128(m: usize) -> u128 {
    (1..=m as u128).product()
}

/// Sums `multinomial(ν; α) Π C_{α_i}` over `α_1..α_k` odd, `α_{k+1} >= 0`.
fn composition_sum(k: usize, nu: usize) -> f64 {
    fn go(slot: usize, k: usize, left: usize, denom: u128, prod: f64, nu_fact: u128, acc: &mut f64) {
        if slot == k {
            let total = denom * factorial_u128(left);
            *acc += (nu_fact / total) as f64 * prod * abs_gaussian_moment(left);
            return;
        }
        let mut a = 1;
        while a + (k - slot - 1) <= left {
            go(
                slot + 1,
                k,
                left - a,
                denom * factorial_u128(a),
                prod * abs_gaussian_moment(a),
                nu_fact,
                acc,
            );
            a += 2;
        }
    }
    let mut acc = 0.0;
    go(0, k, nu, 1, 1.0, factorial_u128(nu), &mut acc);
    acc
}

/// Exact `E[M_T(x) G^ν]` for `|T| = k`; zero when `ν < k`.
pub fn moment_formula(k: usize, nu: usize, n: usize, pattern: &SignPattern) -> Result<MomentFormulaResult> {
    if nu > MOMENT_CAP {
        return Err(Error::OrderCap {
            order: nu,
            cap: MOMENT_CAP,
        });
    }
    if pattern.tau.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: pattern.tau.len(),
        });
    }
    if n < k || n == 0 {
        return Err(Error::InvalidArgument(format!("need 0 < k <= n, got k = {k}, n = {n}")));
    }
    let magnitude = if nu < k { 0.0 } else { composition_sum(k, nu) };
    let constant = if pattern.sign_exponent(nu) % 2 == 1 {
        -magnitude
    } else {
        magnitude
    };
    Ok(MomentFormulaResult {
        k,
        nu,
        n,
        value: constant * (n as f64).powf(-(nu as f64) / 2.0),
        constant,
        sign_pattern: pattern.clone(),
    })
}
