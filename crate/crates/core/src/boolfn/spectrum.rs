use super::{Permutation, DENSE_CAP};
use crate::error::{Error, Result};

/// Coefficient storage: dense (indexed by mask, `n <= 24`) or sparse sorted pairs.
#[derive(Clone, Debug, PartialEq)]
pub enum Coeffs {
    Dense(Vec<f64>),
    Sparse(Vec<(u64, f64)>),
}

/// Fourier coefficients `f̂(S)` keyed by subset bitmask.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpectrum {
    n: usize,
    coeffs: Coeffs,
}

/// Unnormalized in-place butterflies.
fn butterflies(buf: &mut [f64]) {
    let len = buf.len();
    let mut h = 1;
    while h < len {
        for block in buf.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        h *= 2;
    }
}

/// Fast Walsh–Hadamard transform: `f̂(S) = 2^{-n} Σ_x f(x) M_S(x)`.
pub fn wht(values: &[f64]) -> Result<FourierSpectrum> {
    let len = values.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    let n = len.trailing_zeros() as usize;
    if n > DENSE_CAP {
        return Err(Error::DenseCap { n, cap: DENSE_CAP });
    }
    let mut buf = values.to_vec();
    butterflies(&mut buf);
    let scale = 1.0 / len as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    Ok(FourierSpectrum {
        n,
        coeffs: Coeffs::Dense(buf),
    })
}

/// Inverse transform back to function values. Requires `n <= 24`.
pub fn inverse_wht(spec: &FourierSpectrum) -> Result<Vec<f64>> {
    if spec.n > DENSE_CAP {
        return Err(Error::DenseCap {
            n: spec.n,
            cap: DENSE_CAP,
        });
    }
    let mut buf = match &spec.coeffs {
        Coeffs::Dense(v) => v.clone(),
        Coeffs::Sparse(pairs) => {
            let mut v = vec![0.0; 1 << spec.n];
            for &(m, c) in pairs {
                v[m as usize] = c;
            }
            v
        }
    };
    butterflies(&mut buf);
    Ok(buf)
}

impl FourierSpectrum {
    pub fn sparse(n: usize, mut pairs: Vec<(u64, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        FourierSpectrum {
            n,
            coeffs: Coeffs::Sparse(pairs),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &Coeffs {
        &self.coeffs
    }

    pub fn get(&self, mask: u64) -> f64 {
        match &self.coeffs {
            Coeffs::Dense(v) => v.get(mask as usize).copied().unwrap_or(0.0),
            Coeffs::Sparse(p) => p
                .binary_search_by_key(&mask, |e| e.0)
                .map(|i| p[i].1)
                .unwrap_or(0.0),
        }
    }

    /// Nonzero coefficients in mask order.
    pub fn nonzero(&self) -> Vec<(u64, f64)> {
        match &self.coeffs {
            Coeffs::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0.0)
                .map(|(m, &c)| (m as u64, c))
                .collect(),
            Coeffs::Sparse(p) => p.iter().copied().filter(|e| e.1 != 0.0).collect(),
        }
    }

    /// `W^k`, the squared Fourier mass at degree `k`.
    pub fn degree_weight(&self, k: usize) -> f64 {
        self.degree_weights().get(k).copied().unwrap_or(0.0)
    }

    /// `W^{≤k}`.
    pub fn cumulative_weight(&self, k: usize) -> f64 {
        self.degree_weights().iter().take(k + 1).sum()
    }

    /// `W^{<k}`.
    pub fn weight_below(&self, k: usize) -> f64 {
        self.degree_weights().iter().take(k).sum()
    }

    /// `[W^0, …, W^n]`.
    pub fn degree_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.n + 1];
        for (m, c) in self.nonzero() {
            w[m.count_ones() as usize] += c * c;
        }
        w
    }

    pub fn total_weight(&self) -> f64 {
        self.nonzero().iter().map(|(_, c)| c * c).sum()
    }

    /// Spectrum of the N-extension: same coefficients, dimension `big_n`.
    pub fn embed(&self, big_n: usize) -> FourierSpectrum {
        FourierSpectrum::sparse(big_n.max(self.n), self.nonzero())
    }

    /// Coefficient at `T` moves to `π(T)`; this is the spectrum of `f∘π`.
    pub fn relabel(&self, perm: &Permutation) -> FourierSpectrum {
        let pairs = self
            .nonzero()
            .into_iter()
            .map(|(m, c)| (perm.image_mask(m), c))
            .collect();
        FourierSpectrum::sparse(self.n, pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::BooleanFunction;
    use crate::rng::{fill_signs, stream_rng, Stream};
    use proptest::prelude::*;

    /// Direct `2^{-n} Σ_x f(x) M_S(x)`, quadratic time.
    fn brute_coeff(table: &[i8], mask: u64) -> f64 {
        let s: i64 = table
            .iter()
            .enumerate()
            .map(|(t, &v)| {
                let par = ((t as u64) & mask).count_ones() % 2;
                if par == 0 {
                    v as i64
                } else {
                    -(v as i64)
                }
            })
            .sum();
        s as f64 / table.len() as f64
    }

    #[test]
    fn basis_element() {
        let f = BooleanFunction::monomial(2, &[0, 1]).unwrap();
        let t: Vec<f64> = f.truth_table().unwrap().iter().map(|&v| v as f64).collect();
        let s = wht(&t).unwrap();
        assert_eq!(s.get(0b11), 1.0);
        assert_eq!(s.nonzero().len(), 1);
    }

    #[test]
    fn majority_three_matches_brute_force() {
        let t = BooleanFunction::majority(3).unwrap().truth_table().unwrap();
        let s = BooleanFunction::majority(3).unwrap().spectrum().unwrap();
        for mask in 0..8u64 {
            assert_eq!(s.get(mask), brute_coeff(&t, mask));
        }
        // frozen from brute force over the 8 inputs
        assert_eq!(s.get(0b001), 0.5);
        assert_eq!(s.get(0b010), 0.5);
        assert_eq!(s.get(0b100), 0.5);
        assert_eq!(s.get(0b111), -0.5);
        assert_eq!(s.get(0), 0.0);
        assert_eq!(s.degree_weight(1), 0.75);
    }

    #[test]
    fn constant_function() {
        let s = BooleanFunction::constant(3, 1).unwrap().spectrum().unwrap();
        assert_eq!(s.get(0), 1.0);
        assert_eq!(s.total_weight(), 1.0);
    }

    #[test]
    fn monomial_degree_profile() {
        let s = BooleanFunction::monomial(5, &[0, 1, 2]).unwrap().spectrum().unwrap();
        assert_eq!(s.degree_weight(3), 1.0);
        for k in 0..3 {
            assert_eq!(s.degree_weight(k), 0.0);
        }
        assert_eq!(s.cumulative_weight(5), 1.0);
    }

    #[test]
    fn length_must_be_power_of_two() {
        assert!(matches!(wht(&[1.0, 1.0, -1.0]), Err(Error::NotPowerOfTwo(3))));
    }

    #[test]
    fn extension_preserves_weights() {
        let f = BooleanFunction::majority(3).unwrap();
        let h = f.extend(9).unwrap();
        let sh = h.spectrum().unwrap();
        assert_eq!(sh.n(), 9);
        assert_eq!(sh.degree_weight(1), 0.75);
        let dense = wht(
            &h.truth_table()
                .unwrap()
                .iter()
                .map(|&v| v as f64)
                .collect::<Vec<_>>(),
        )
        .unwrap();
        for mask in 0..512u64 {
            let expect = if mask < 8 { f.spectrum().unwrap().get(mask) } else { 0.0 };
            assert_eq!(dense.get(mask), expect);
            assert_eq!(sh.get(mask), expect);
        }
        let m12 = BooleanFunction::monomial(2, &[0, 1]).unwrap().extend(4).unwrap();
        assert_eq!(m12.spectrum().unwrap().nonzero(), vec![(0b11, 1.0)]);
    }

    #[test]
    fn staircase_structured_spectrum_matches_dense() {
        let f = BooleanFunction::staircase(5, 8).unwrap();
        let s = f.spectrum().unwrap();
        let d: Vec<f64> = f.truth_table().unwrap().iter().map(|&v| v as f64).collect();
        let dense = wht(&d).unwrap();
        for mask in 0..256u64 {
            assert_eq!(s.get(mask), dense.get(mask));
        }
    }

    fn random_table(n: usize, seed: u64) -> Vec<i8> {
        let mut t = vec![0i8; 1 << n];
        fill_signs(&mut stream_rng(seed, Stream::Corpus, n as u64), &mut t);
        t
    }

    #[test]
    fn parseval_on_random_tables() {
        for i in 0..100u64 {
            let n = (i % 15) as usize;
            let t = random_table(n, i);
            let s = BooleanFunction::from_table(t).unwrap().spectrum().unwrap();
            assert!((s.total_weight() - 1.0).abs() <= 1e-9);
            assert!((s.cumulative_weight(n) - 1.0).abs() <= 1e-9);
        }
    }

    proptest! {
        #[test]
        fn inverse_is_exact(n in 0usize..11, seed in any::<u64>()) {
            let t = random_table(n, seed);
            let v: Vec<f64> = t.iter().map(|&x| x as f64).collect();
            let back = inverse_wht(&wht(&v).unwrap()).unwrap();
            prop_assert_eq!(back, v);
        }

        #[test]
        fn permuted_spectrum_relabels(n in 1usize..11, seed in any::<u64>()) {
            let f = BooleanFunction::from_table(random_table(n, seed)).unwrap();
            let p = crate::boolfn::Permutation::random(n, &mut stream_rng(seed, Stream::Orbit, 0));
            let g = f.permute(&p).unwrap();
            let gt: Vec<f64> = g.truth_table().unwrap().iter().map(|&x| x as f64).collect();
            let dense = wht(&gt).unwrap();
            let sf = f.spectrum().unwrap();
            let inv = p.inverse();
            for mask in 0..(1u64 << n) {
                prop_assert_eq!(dense.get(mask), sf.get(inv.image_mask(mask)));
            }
            prop_assert_eq!(g.spectrum().unwrap().nonzero(), dense.nonzero());
            let mut a: Vec<u64> = sf.nonzero().iter().map(|e| e.1.abs().to_bits()).collect();
            let mut b: Vec<u64> = dense.nonzero().iter().map(|e| e.1.abs().to_bits()).collect();
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn extension_weights_unchanged(n in 1usize..9, extra in 1usize..5, seed in any::<u64>()) {
            let f = BooleanFunction::from_table(random_table(n, seed)).unwrap();
            let h = f.extend(n + extra).unwrap();
            let wf = f.spectrum().unwrap().degree_weights();
            let hd: Vec<f64> = h.truth_table().unwrap().iter().map(|&x| x as f64).collect();
            let wh = wht(&hd).unwrap().degree_weights();
            for k in 0..=n {
                prop_assert_eq!(wf[k], wh[k]);
            }
        }
    }
}
