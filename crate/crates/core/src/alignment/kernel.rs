//! Deterministic INAL through the dual kernel of the initialization.
//!
//! With `w_i, b ~ N(0, 1/n)` the pre-activations at `x, x'` are jointly
//! Gaussian with variance `s² = (n + β)/n` and correlation
//! `ρ = (x·x' + β)/(n + β)` (`β = 1` with bias, `0` without), so
//! `INAL(f) = E_{x,x'}[f(x) f(x') κ(ρ)]` where κ is the arc-cosine kernel
//! of ReLU or the arcsine kernel of sign.

use super::{InalEstimate, Method};
use crate::activation::Activation;
use crate::boolfn::{sign_of, BooleanFunction, Kind};
use crate::error::{Error, Result};
use crate::stats::pairwise_sum;
use std::f64::consts::PI;

/// Largest `n` for the symmetric (majority) route, which is `O(n³)`.
const SYMMETRIC_CAP: usize = 512;

struct Kernel {
    relu: bool,
    n: usize,
    beta: f64,
}

impl Kernel {
    fn new(act: &Activation, n: usize, bias: bool) -> Result<Self> {
        let relu = match act {
            Activation::Relu => true,
            Activation::Sign => false,
            Activation::Pwl(_) => {
                return Err(Error::Unsupported(
                    "dual_kernel supports relu and sign only".into(),
                ))
            }
        };
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        Ok(Kernel {
            relu,
            n,
            beta: if bias { 1.0 } else { 0.0 },
        })
    }

    /// κ at Hamming distance `d`.
    fn at_distance(&self, d: usize) -> f64 {
        let n = self.n as f64;
        let rho = ((n - 2.0 * d as f64 + self.beta) / (n + self.beta)).clamp(-1.0, 1.0);
        if self.relu {
            let s2 = (n + self.beta) / n;
            s2 / (2.0 * PI) * ((1.0 - rho * rho).sqrt() + (PI - rho.acos()) * rho)
        } else {
            2.0 / PI * rho.asin()
        }
    }

    fn table(&self) -> Vec<f64> {
        (0..=self.n).map(|d| self.at_distance(d)).collect()
    }
}

/// `P(Bin(m, 1/2) = l)` for `l = 0..=m`, by ratio recurrence from the mode.
fn half_binomial_pmf(m: usize) -> Vec<f64> {
    let mut r = vec![0.0; m + 1];
    let mode = m / 2;
    r[mode] = 1.0;
    for l in mode..m {
        r[l + 1] = r[l] * (m - l) as f64 / (l + 1) as f64;
    }
    for l in (1..=mode).rev() {
        r[l - 1] = r[l] * l as f64 / (m - l + 1) as f64;
    }
    let total = pairwise_sum(&r);
    r.iter_mut().for_each(|v| *v /= total);
    r
}

fn binomial_row(k: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for _ in 0..k {
        let mut next = vec![1.0; row.len() + 1];
        for j in 1..row.len() {
            next[j] = row[j - 1] + row[j];
        }
        row = next;
    }
    row
}

/// `(value, error_bound)` of `INAL(M_k)` in dimension `n`.
fn monomial_value(kern: &Kernel, k: usize) -> (f64, f64) {
    let n = kern.n;
    let kappa = kern.table();
    let pmf = half_binomial_pmf(n - k);
    let binom = binomial_row(k);
    let scale = 0.5f64.powi(k as i32);
    let mut terms = Vec::with_capacity(n - k + 1);
    let mut magnitude = Vec::with_capacity(n - k + 1);
    for (l, p) in pmf.iter().enumerate() {
        let mut inner = 0.0;
        let mut abs = 0.0;
        for (j, c) in binom.iter().enumerate() {
            let t = c * kappa[l + j];
            inner += if j % 2 == 0 { t } else { -t };
            abs += t.abs();
        }
        terms.push(p * inner * scale);
        magnitude.push(p * abs * scale);
    }
    let bound = (n + k + 4) as f64 * 2.0 * f64::EPSILON * pairwise_sum(&magnitude);
    (pairwise_sum(&terms), bound)
}

fn estimate(value: f64, bound: f64) -> InalEstimate {
    InalEstimate {
        value,
        std_error: bound,
        method: Method::DualKernel,
        samples: 0,
        inner_samples: 0,
    }
}

/// `INAL(M_k, σ)` in dimension `n` by the dual kernel.
pub fn monomial_inal_kernel(k: usize, n: usize, act: &Activation, bias: bool) -> Result<InalEstimate> {
    if k > n {
        return Err(Error::InvalidArgument(format!("degree {k} exceeds n = {n}")));
    }
    let kern = Kernel::new(act, n, bias)?;
    let (v, b) = monomial_value(&kern, k);
    Ok(estimate(v, b))
}

/// Symmetric `f(x) = g(#{i : x_i = −1})`.
fn symmetric_value(kern: &Kernel, g: &[f64]) -> (f64, f64) {
    let n = kern.n;
    let kappa = kern.table();
    let pmfs: Vec<Vec<f64>> = (0..=n).map(half_binomial_pmf).collect();
    let mut terms = Vec::with_capacity(n + 1);
    let mut magnitude = Vec::with_capacity(n + 1);
    for c in 0..=n {
        // x' flips `a` of the c minus-coordinates and `b` of the others
        let (mut acc, mut abs) = (0.0, 0.0);
        for (a, pa) in pmfs[c].iter().enumerate() {
            for (b, pb) in pmfs[n - c].iter().enumerate() {
                let t = pa * pb * g[c - a + b] * kappa[a + b];
                acc += t;
                abs += t.abs();
            }
        }
        terms.push(pmfs[n][c] * g[c] * acc);
        magnitude.push(pmfs[n][c] * abs);
    }
    let bound = (3 * n + 8) as f64 * 2.0 * f64::EPSILON * pairwise_sum(&magnitude);
    (pairwise_sum(&terms), bound)
}

/// Exact INAL by the dual kernel, relu/sign only.
///
/// Monomials cost `O(nk)`, majority `O(n³)` (`n <= 512`); anything else goes
/// through its Fourier spectrum as `Σ_k W^k · INAL(M_k)`. `std_error` holds a
/// floating-point error bound.
pub fn inal_dual_kernel(f: &BooleanFunction, act: &Activation, bias: bool) -> Result<InalEstimate> {
    let n = f.n();
    let kern = Kernel::new(act, n, bias)?;
    match f.kind() {
        Kind::Monomial => {
            let k = f.monomial_support().map_or(0, |s| s.len());
            let (v, b) = monomial_value(&kern, k);
            Ok(estimate(v, b))
        }
        Kind::Majority if n <= SYMMETRIC_CAP => {
            let g: Vec<f64> = (0..=n)
                .map(|c| sign_of(n as f64 - 2.0 * c as f64) as f64)
                .collect();
            let (v, b) = symmetric_value(&kern, &g);
            Ok(estimate(v, b))
        }
        Kind::Permuted => inal_dual_kernel(f.base().expect("permuted has a base"), act, bias),
        _ => {
            let spec = f.spectrum().map_err(|e| {
                Error::Unsupported(format!("dual_kernel needs a spectrum or symmetric form: {e}"))
            })?;
            let (mut v, mut b) = (0.0, 0.0);
            for (k, w) in spec.degree_weights().iter().enumerate() {
                if *w == 0.0 {
                    continue;
                }
                let (vk, bk) = monomial_value(&kern, k);
                v += w * vk;
                b += w * bk + f64::EPSILON * (w * vk).abs();
            }
            Ok(estimate(v, b))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(k: usize, n: usize, act: &Activation) -> f64 {
        monomial_inal_kernel(k, n, act, true).unwrap().value
    }

    fn close(a: f64, b: f64, rel: f64) {
        assert!((a - b).abs() <= rel * b.abs(), "{a} vs {b}");
    }

    #[test]
    fn pmf_normalized_and_symmetric() {
        let p = half_binomial_pmf(9);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((p[0] - 1.0 / 512.0).abs() < 1e-18);
        assert!((p[3] - p[6]).abs() < 1e-17);
    }

    // Frozen from an independent evaluation of the same double sum, checked
    // against brute-force Monte Carlo at small n.
    #[test]
    fn monomial_values() {
        let (r, s) = (Activation::Relu, Activation::Sign);
        close(mono(1, 8, &r), 0.03360156883989551, 1e-12);
        close(mono(2, 8, &r), 0.002351568839895521, 1e-12);
        close(mono(3, 8, &r), 4.9153806080161816e-05, 1e-10);
        close(mono(2, 8, &s), 0.002132234803232367, 1e-12);
        close(mono(1, 16, &r), 0.016228427781149486, 1e-12);
        close(mono(2, 16, &r), 0.0006034277811495188, 1e-11);
        close(mono(3, 16, &r), 2.7143438047879593e-06, 1e-9);
        close(mono(2, 16, &s), 0.00017852845882370088, 1e-10);
        close(mono(1, 256, &r), 0.0009789862855122517, 1e-11);
        close(mono(2, 256, &r), 2.4237855122237827e-06, 1e-8);
        close(mono(3, 256, &r), 3.7275671468697565e-11, 1e-4);
        close(mono(2, 256, &s), 3.8172045699864305e-08, 1e-6);
        close(mono(1, 4, &s), 0.1553358409744188, 1e-12);
        close(mono(2, 4, &r), 0.00891220468906179, 1e-12);
        close(mono(3, 6, &r), 0.0001547479569939085, 1e-10);
        close(mono(0, 5, &s), 0.12312408429012775, 1e-12);
        close(mono(2, 6, &s), 0.006044142139259639, 1e-12);
        close(mono(1, 51, &r), 0.00496256161999168, 1e-12);
        close(mono(3, 51, &r), 2.4257906907583386e-08, 1e-7);
    }

    #[test]
    fn error_bound_covers_frozen_value() {
        let e = monomial_inal_kernel(3, 256, &Activation::Relu, true).unwrap();
        assert!((e.value - 3.7275671468697565e-11).abs() <= e.std_error + 1e-20);
        assert!(e.std_error < 1e-2 * e.value);
    }

    #[test]
    fn majority_routes_agree() {
        let maj3 = BooleanFunction::majority(3).unwrap();
        let sym = inal_dual_kernel(&maj3, &Activation::Relu, true).unwrap();
        close(sym.value, 0.07425018491298097, 1e-12);
        let via_table = BooleanFunction::from_table(maj3.truth_table().unwrap()).unwrap();
        let spec = inal_dual_kernel(&via_table, &Activation::Relu, true).unwrap();
        close(spec.value, sym.value, 1e-12);
        let decomposed = 0.75 * mono(1, 3, &Activation::Relu) + 0.25 * mono(3, 3, &Activation::Relu);
        close(decomposed, sym.value, 1e-12);
        let maj51 = BooleanFunction::majority(51).unwrap();
        close(
            inal_dual_kernel(&maj51, &Activation::Relu, true).unwrap().value,
            0.0031903910141240386,
            1e-10,
        );
    }

    #[test]
    fn permutation_and_unsupported() {
        let f = BooleanFunction::monomial(10, &[0, 1]).unwrap();
        let p = crate::boolfn::Permutation::new(vec![9, 3, 1, 0, 2, 4, 5, 6, 7, 8]).unwrap();
        let g = f.permute(&p).unwrap();
        assert_eq!(
            inal_dual_kernel(&f, &Activation::Sign, true).unwrap().value,
            inal_dual_kernel(&g, &Activation::Sign, true).unwrap().value
        );
        let pwl = Activation::parse("pwl:x=-1,0,1;y=0,0,1;left=0;right=1").unwrap();
        assert!(matches!(inal_dual_kernel(&f, &pwl, true), Err(Error::Unsupported(_))));
    }

    #[test]
    fn bias_free_odd_constant_is_zero() {
        // sign kernel without bias: E[f f' arcsin(ρ)] for constant f at odd n
        let c = BooleanFunction::constant(5, 1).unwrap();
        let e = inal_dual_kernel(&c, &Activation::Sign, false).unwrap();
        assert!(e.value.abs() <= e.std_error);
    }
}
