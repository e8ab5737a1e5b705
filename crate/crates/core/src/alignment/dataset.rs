use super::{InalEstimate, Method};
use crate::error::{Error, Result};
use crate::nnet::NetTemplate;
use crate::stats::{mean_se, pairwise_sum, Workers};

pub use crate::nnet::Dataset;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeuronInal {
    /// Position in layer-by-layer order over non-input neurons.
    pub neuron: usize,
    /// 1-based layer (the output neuron is in the last layer).
    pub layer: usize,
    pub index: usize,
    pub estimate: InalEstimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetInal {
    pub neurons: Vec<NeuronInal>,
    /// Index into `neurons` of the largest estimate.
    pub best: usize,
}

impl DatasetInal {
    pub fn max(&self) -> &NeuronInal {
        &self.neurons[self.best]
    }
}

/// `E_{Θ⁰}[(1/M Σ_m y_m · NN^{(v)}(x_m))²]` for every neuron `v`, by Monte
/// Carlo over `init_rounds` initializations of `template`.
pub fn empirical_inal_dataset(
    data: &Dataset,
    template: &NetTemplate,
    init_rounds: usize,
    seed: u64,
    workers: Workers,
) -> Result<DatasetInal> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("dataset is empty".into()));
    }
    if template.sizes.first() != Some(&data.n()) {
        return Err(Error::DimensionMismatch {
            expected: template.sizes.first().copied().unwrap_or(0),
            got: data.n(),
        });
    }
    if init_rounds == 0 {
        return Err(Error::InvalidArgument("need at least one init round".into()));
    }
    template.build(seed, 0)?;
    let m = data.len() as f64;
    let rounds: Vec<Vec<f64>> = workers.map_any(init_rounds, |r| {
        let net = template.build(seed, r as u32).expect("template validated");
        let values: Vec<Vec<f64>> = (0..data.len())
            .map(|i| net.neuron_values(data.row(i)).expect("dimension checked"))
            .collect();
        let count = values[0].len();
        (0..count)
            .map(|v| {
                let terms: Vec<f64> = values.iter().zip(data.labels()).map(|(a, y)| y * a[v]).collect();
                (pairwise_sum(&terms) / m).powi(2)
            })
            .collect()
    });
    let mut neurons = Vec::new();
    let mut v = 0;
    for (l, &width) in template.sizes.iter().enumerate().skip(1) {
        for j in 0..width {
            let squares: Vec<f64> = rounds.iter().map(|r| r[v]).collect();
            let (value, std_error) = mean_se(&squares);
            neurons.push(NeuronInal {
                neuron: v,
                layer: l,
                index: j,
                estimate: InalEstimate {
                    value,
                    std_error,
                    method: Method::ExactSmallN,
                    samples: init_rounds,
                    inner_samples: data.len(),
                },
            });
            v += 1;
        }
    }
    let best = neurons
        .iter()
        .enumerate()
        .fold(0, |b, (i, n)| if n.estimate.value > neurons[b].estimate.value { i } else { b });
    Ok(DatasetInal { neurons, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::Activation;
    use crate::alignment::{inal_exact, InalConfig};
    use crate::boolfn::BooleanFunction;
    use crate::nnet::InitSpec;

    fn template(sizes: &[usize], act: Activation) -> NetTemplate {
        NetTemplate {
            sizes: sizes.to_vec(),
            activation: act,
            init: InitSpec::NormalizedGaussian,
        }
    }

    #[test]
    fn zero_labels() {
        let d = Dataset::new(2, vec![1.0, -1.0, 0.5, 2.0], vec![0.0, 0.0]).unwrap();
        let r = empirical_inal_dataset(&d, &template(&[2, 3, 1], Activation::Relu), 20, 1, Workers(1)).unwrap();
        assert_eq!(r.neurons.len(), 4);
        assert!(r.neurons.iter().all(|n| n.estimate.value == 0.0));
    }

    #[test]
    fn single_neuron_matches_exact() {
        let f = BooleanFunction::majority(10).unwrap();
        let d = Dataset::truth_table(&f).unwrap();
        let r = empirical_inal_dataset(&d, &template(&[10, 1, 1], Activation::Relu), 3000, 4, Workers(0)).unwrap();
        let hidden = r.neurons[0].estimate;
        let exact = inal_exact(
            &f,
            &Activation::Relu,
            &InalConfig {
                init_samples: 3000,
                seed: 9,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(hidden.agrees_with(&exact, 3.0), "{hidden:?} {exact:?}");
    }

    #[test]
    fn duplicated_rows() {
        let f = BooleanFunction::staircase(3, 5).unwrap();
        let d = Dataset::truth_table(&f).unwrap();
        let mut feats = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..2 {
            for i in 0..d.len() {
                feats.extend_from_slice(d.row(i));
                labels.push(d.label(i));
            }
        }
        let dd = Dataset::new(5, feats, labels).unwrap();
        let t = template(&[5, 4, 1], Activation::Relu);
        let a = empirical_inal_dataset(&d, &t, 50, 2, Workers(1)).unwrap();
        let b = empirical_inal_dataset(&dd, &t, 50, 2, Workers(1)).unwrap();
        for (x, y) in a.neurons.iter().zip(&b.neurons) {
            assert!((x.estimate.value - y.estimate.value).abs() <= 1e-12 * x.estimate.value.max(1e-300));
        }
        assert_eq!(a.best, b.best);
        assert!(a.neurons.iter().all(|n| n.estimate.value <= a.max().estimate.value));
    }

    #[test]
    fn errors() {
        let t = template(&[3, 2, 1], Activation::Relu);
        let empty = Dataset::new(3, vec![], vec![]).unwrap();
        assert!(empirical_inal_dataset(&empty, &t, 5, 1, Workers(1)).is_err());
        let wrong = Dataset::new(2, vec![1.0, 1.0], vec![1.0]).unwrap();
        assert!(matches!(
            empirical_inal_dataset(&wrong, &t, 5, 1, Workers(1)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
