use super::{InalConfig, InalEstimate, Method, NeuronInit};
use crate::activation::Activation;
use crate::boolfn::BooleanFunction;
use crate::error::{Error, Result};
use crate::rng::{fill_signs, stream_rng, Stream};
use crate::stats::mean_se;

fn inner_mean(
    f: &BooleanFunction,
    act: &Activation,
    w: &[f64],
    b: f64,
    samples: usize,
    mut rng: impl rand::Rng,
) -> f64 {
    let mut x = vec![0i8; w.len()];
    let mut acc = 0.0;
    for _ in 0..samples {
        fill_signs(&mut rng, &mut x);
        let z: f64 = w
            .iter()
            .zip(&x)
            .map(|(wi, &xi)| if xi > 0 { *wi } else { -*wi })
            .sum::<f64>()
            + b;
        acc += f.eval_unchecked(&x) as f64 * act.eval(z);
    }
    acc / samples as f64
}

/// Paired Monte-Carlo INAL: per init, the product of two independent inner
/// means is an unbiased estimate of the squared correlation.
pub fn inal_mc_paired(f: &BooleanFunction, act: &Activation, cfg: &InalConfig) -> Result<InalEstimate> {
    if cfg.inner_samples < 2 {
        return Err(Error::InvalidArgument(
            "paired estimator needs inner_samples >= 2".into(),
        ));
    }
    let init = NeuronInit {
        n: f.n(),
        bias: cfg.bias,
        seed: cfg.seed,
    };
    let products = cfg.workers.map(cfg.init_samples, |i| {
        let (w, b) = init.sample(i as u64);
        let a = inner_mean(f, act, &w, b, cfg.inner_samples, stream_rng(cfg.seed, Stream::InnerA, i as u64));
        let c = inner_mean(f, act, &w, b, cfg.inner_samples, stream_rng(cfg.seed, Stream::InnerB, i as u64));
        a * c
    });
    let (value, std_error) = mean_se(&products);
    Ok(InalEstimate {
        value,
        std_error,
        method: Method::McPaired,
        samples: cfg.init_samples,
        inner_samples: cfg.inner_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::{inal_dual_kernel, inal_exact};
    use crate::stats::Workers;

    #[test]
    fn agrees_with_exact_on_small_parity() {
        let f = BooleanFunction::monomial(4, &[0]).unwrap();
        let cfg = InalConfig {
            init_samples: 20_000,
            inner_samples: 64,
            seed: 11,
            ..Default::default()
        };
        let mc = inal_mc_paired(&f, &Activation::Sign, &cfg).unwrap();
        let ex = inal_exact(&f, &Activation::Sign, &InalConfig { seed: 12, ..cfg }).unwrap();
        assert!(mc.agrees_with(&ex, 3.0), "{mc:?} {ex:?}");
    }

    #[test]
    fn not_biased_upward_for_zero_target_correlation() {
        // M_3 at n = 40 with sign has INAL ~ 1e-6; a naive (mean)^2 estimator
        // would sit near E[σ²]/m = 1/50.
        let f = BooleanFunction::monomial(40, &[0, 1, 2]).unwrap();
        let cfg = InalConfig {
            init_samples: 2_000,
            inner_samples: 50,
            seed: 2,
            ..Default::default()
        };
        let mc = inal_mc_paired(&f, &Activation::Sign, &cfg).unwrap();
        let k = inal_dual_kernel(&f, &Activation::Sign, true).unwrap();
        assert!(mc.agrees_with(&k, 3.0), "{mc:?} {k:?}");
        assert!(mc.value < 0.005);
        assert!(mc.value >= -3.0 * mc.std_error);
    }

    #[test]
    fn worker_count_invariant() {
        let f = BooleanFunction::majority(9).unwrap();
        let base = InalConfig {
            init_samples: 300,
            inner_samples: 40,
            seed: 5,
            ..Default::default()
        };
        let a = inal_mc_paired(&f, &Activation::Relu, &InalConfig { workers: Workers(1), ..base }).unwrap();
        let b = inal_mc_paired(&f, &Activation::Relu, &InalConfig { workers: Workers(4), ..base }).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn needs_two_inner_samples() {
        let f = BooleanFunction::majority(3).unwrap();
        let cfg = InalConfig {
            inner_samples: 1,
            ..Default::default()
        };
        assert!(inal_mc_paired(&f, &Activation::Relu, &cfg).is_err());
    }
}
