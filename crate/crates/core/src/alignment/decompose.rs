use std::collections::BTreeMap;

use super::{InalEstimate, Method};
use crate::boolfn::FourierSpectrum;
use crate::error::{Error, Result};

/// Degree weights below this are treated as absent.
const WEIGHT_FLOOR: f64 = 1e-12;

/// `Σ_k W^k · INAL(M_k, σ)` from per-degree monomial estimates.
pub fn inal_decompose(spec: &FourierSpectrum, per_degree: &BTreeMap<usize, InalEstimate>) -> Result<InalEstimate> {
    let mut value = 0.0;
    let mut var = 0.0;
    let mut samples = 0;
    let mut inner = 0;
    for (k, w) in spec.degree_weights().into_iter().enumerate() {
        if w <= WEIGHT_FLOOR {
            continue;
        }
        let est = per_degree.get(&k).ok_or(Error::MissingDegree(k))?;
        value += w * est.value;
        var += (w * est.std_error).powi(2);
        samples += est.samples;
        inner = inner.max(est.inner_samples);
    }
    Ok(InalEstimate {
        value,
        std_error: var.sqrt(),
        method: Method::Decomposition,
        samples,
        inner_samples: inner,
    })
}
