use super::{InalConfig, InalEstimate, Method, NeuronInit};
use crate::activation::Activation;
use crate::boolfn::BooleanFunction;
use crate::error::{Error, Result};
use crate::stats::mean_se;

/// Largest `n` for exact inner sums.
pub const EXACT_CAP: usize = 14;

/// `w·x + b` for every `x ∈ {±1}^n` in table order.
pub fn exact_preactivations(w: &[f64], b: f64) -> Vec<f64> {
    let n = w.len();
    let mut pre = vec![0.0; 1 << n];
    pre[0] = w.iter().sum::<f64>() + b;
    for t in 1..pre.len() {
        let i = t.trailing_zeros() as usize;
        pre[t] = pre[t & (t - 1)] - 2.0 * w[i];
    }
    pre
}

/// `⟨f, σ(w·x + b)⟩` summed over the whole cube.
pub fn exact_correlation(table: &[f64], act: &Activation, w: &[f64], b: f64) -> f64 {
    let pre = exact_preactivations(w, b);
    let s: f64 = table
        .iter()
        .zip(&pre)
        .map(|(f, &z)| f * act.eval(z))
        .sum();
    s / table.len() as f64
}

pub(crate) fn check_exact(n: usize) -> Result<()> {
    if n > EXACT_CAP {
        return Err(Error::ExactCap { n, cap: EXACT_CAP });
    }
    Ok(())
}

/// INAL with the inner correlation summed exactly over `{±1}^n`; each init
/// sample contributes the exact squared correlation.
pub fn inal_exact(f: &BooleanFunction, act: &Activation, cfg: &InalConfig) -> Result<InalEstimate> {
    let n = f.n();
    check_exact(n)?;
    let table: Vec<f64> = f.truth_table()?.iter().map(|&v| v as f64).collect();
    let init = NeuronInit {
        n,
        bias: cfg.bias,
        seed: cfg.seed,
    };
    let squares = cfg.workers.map(cfg.init_samples, |i| {
        let (w, b) = init.sample(i as u64);
        exact_correlation(&table, act, &w, b).powi(2)
    });
    let (value, std_error) = mean_se(&squares);
    Ok(InalEstimate {
        value,
        std_error,
        method: Method::ExactSmallN,
        samples: cfg.init_samples,
        inner_samples: 1 << n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::inal_dual_kernel;

    fn cfg(samples: usize, seed: u64) -> InalConfig {
        InalConfig {
            init_samples: samples,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn preactivations_match_direct() {
        let w = [0.3, -1.2, 0.7, 2.0];
        let pre = exact_preactivations(&w, 0.1);
        for (t, &p) in pre.iter().enumerate() {
            let direct: f64 = w
                .iter()
                .enumerate()
                .map(|(i, wi)| if (t >> i) & 1 == 1 { -wi } else { *wi })
                .sum::<f64>()
                + 0.1;
            assert!((p - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_n_constant_without_bias_is_zero() {
        let f = BooleanFunction::constant(5, 1).unwrap();
        let est = inal_exact(
            &f,
            &Activation::Sign,
            &InalConfig {
                bias: false,
                ..cfg(200, 3)
            },
        )
        .unwrap();
        assert_eq!(est.value, 0.0);
        let with_bias = inal_exact(&f, &Activation::Sign, &cfg(2000, 3)).unwrap();
        assert!(with_bias.value > 0.0);
    }

    #[test]
    fn singleton_monomials_agree() {
        let a = inal_exact(&BooleanFunction::monomial(6, &[0]).unwrap(), &Activation::Relu, &cfg(20_000, 1)).unwrap();
        let b = inal_exact(&BooleanFunction::monomial(6, &[2]).unwrap(), &Activation::Relu, &cfg(20_000, 2)).unwrap();
        assert!(a.agrees_with(&b, 3.0), "{a:?} {b:?}");
    }

    #[test]
    fn matches_dual_kernel() {
        for (f, act) in [
            (BooleanFunction::monomial(4, &[0]).unwrap(), Activation::Sign),
            (BooleanFunction::majority(5).unwrap(), Activation::Relu),
            (BooleanFunction::staircase(3, 6).unwrap(), Activation::Sign),
        ] {
            let e = inal_exact(&f, &act, &cfg(40_000, 9)).unwrap();
            let k = inal_dual_kernel(&f, &act, true).unwrap();
            assert!(e.agrees_with(&k, 3.0), "{e:?} vs {k:?}");
        }
    }

    #[test]
    fn cap() {
        let f = BooleanFunction::majority(15).unwrap();
        assert!(matches!(
            inal_exact(&f, &Activation::Relu, &cfg(1, 1)),
            Err(Error::ExactCap { n: 15, cap: 14 })
        ));
    }
}
