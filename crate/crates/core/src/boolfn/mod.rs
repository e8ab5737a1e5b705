//! Boolean functions on the hypercube `{±1}^n`.
//!
//! Coordinates are 0-based internally; the text mini-language in [`parse`]
//! uses 1-based indices. Truth tables are indexed so that bit `i` of the
//! table index set means `x_i = -1`.

mod parse;
mod spectrum;

pub use parse::{parse_function, FunctionSpec};
pub use spectrum::{inverse_wht, wht, Coeffs, FourierSpectrum};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Largest dimension for which a dense truth table may be materialized.
pub const DENSE_CAP: usize = 24;

/// `sign(0) := +1`.
#[inline]
pub fn sign_of(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

/// A bijection of `0..len`. `map[m]` is the coordinate read into position `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &j in &map {
            if j >= map.len() {
                return Err(Error::InvalidPermutation(format!(
                    "index {j} out of range for length {}",
                    map.len()
                )));
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidPermutation(format!("index {j} repeated")));
            }
        }
        Ok(Permutation { map })
    }

    pub fn identity(len: usize) -> Self {
        Permutation {
            map: (0..len).collect(),
        }
    }

    /// Uniform draw by Fisher–Yates.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut map: Vec<usize> = (0..len).collect();
        map.shuffle(rng);
        Permutation { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { map: inv }
    }

    /// Image `{π(i) : i ∈ S}` of a subset mask. Requires `len <= 64`.
    pub fn image_mask(&self, mask: u64) -> u64 {
        let mut out = 0u64;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            out |= 1u64 << self.map[i];
            m &= m - 1;
        }
        out
    }
}

#[derive(Clone, Debug)]
enum Form {
    Table(Vec<i8>),
    /// Sorted coordinates of the monomial.
    Monomial(Vec<usize>),
    Majority,
    Staircase(usize),
    Extension(Box<BooleanFunction>),
    Permuted(Box<BooleanFunction>, Permutation),
}

/// A ±1-valued function on `{±1}^n`.
#[derive(Clone, Debug)]
pub struct BooleanFunction {
    n: usize,
    form: Form,
}

/// Structural description, used by estimators that exploit structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Table,
    Monomial,
    Majority,
    Staircase,
    Extension,
    Permuted,
}

impl BooleanFunction {
    pub fn from_table(table: Vec<i8>) -> Result<Self> {
        let len = table.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let n = len.trailing_zeros() as usize;
        if n > DENSE_CAP {
            return Err(Error::DenseCap { n, cap: DENSE_CAP });
        }
        if let Some((i, &v)) = table.iter().enumerate().find(|(_, &v)| v != 1 && v != -1) {
            return Err(Error::NotASign {
                index: i,
                value: v as f64,
            });
        }
        Ok(BooleanFunction {
            n,
            form: Form::Table(table),
        })
    }

    /// Monomial `M_S` with 0-based coordinates `subset`.
    pub fn monomial(n: usize, subset: &[usize]) -> Result<Self> {
        let mut s = subset.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.len() != subset.len() {
            return Err(Error::InvalidArgument("repeated index in monomial".into()));
        }
        if let Some(&bad) = s.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidArgument(format!(
                "monomial index {} outside 1..={n}",
                bad + 1
            )));
        }
        Ok(BooleanFunction {
            n,
            form: Form::Monomial(s),
        })
    }

    /// Monomial on the first `k` coordinates.
    pub fn monomial_prefix(n: usize, k: usize) -> Result<Self> {
        Self::monomial(n, &(0..k).collect::<Vec<_>>())
    }

    pub fn monomial_mask(n: usize, mask: u64) -> Result<Self> {
        let s: Vec<usize> = (0..64).filter(|i| (mask >> i) & 1 == 1).collect();
        Self::monomial(n, &s)
    }

    pub fn majority(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("majority needs n >= 1".into()));
        }
        Ok(BooleanFunction {
            n,
            form: Form::Majority,
        })
    }

    /// `sign(x_1 + x_1 x_2 + … + x_1⋯x_k)` on `n >= k` inputs.
    pub fn staircase(k: usize, n: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::InvalidArgument(format!(
                "staircase needs 1 <= k <= n (k = {k}, n = {n})"
            )));
        }
        Ok(BooleanFunction {
            n,
            form: Form::Staircase(k),
        })
    }

    pub fn constant(n: usize, value: i8) -> Result<Self> {
        if n > DENSE_CAP {
            return Err(Error::DenseCap { n, cap: DENSE_CAP });
        }
        Self::from_table(vec![if value >= 0 { 1 } else { -1 }; 1usize << n])
    }

    /// N-extension: evaluates `self` on the first `n` of `big_n` coordinates.
    pub fn extend(&self, big_n: usize) -> Result<Self> {
        if big_n <= self.n {
            return Err(Error::ExtensionSize {
                n: self.n,
                big_n,
            });
        }
        Ok(BooleanFunction {
            n: big_n,
            form: Form::Extension(Box::new(self.clone())),
        })
    }

    /// `(f∘π)(x) = f(x_{π(1)}, …, x_{π(n)})`.
    pub fn permute(&self, perm: &Permutation) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidPermutation(format!(
                "length {} for a function of {} inputs",
                perm.len(),
                self.n
            )));
        }
        Ok(BooleanFunction {
            n: self.n,
            form: Form::Permuted(Box::new(self.clone()), perm.clone()),
        })
    }

    /// Uniform member of the orbit `{f∘π}`.
    pub fn orbit_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        let perm = Permutation::random(self.n, rng);
        BooleanFunction {
            n: self.n,
            form: Form::Permuted(Box::new(self.clone()), perm),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> Kind {
        match self.form {
            Form::Table(_) => Kind::Table,
            Form::Monomial(_) => Kind::Monomial,
            Form::Majority => Kind::Majority,
            Form::Staircase(_) => Kind::Staircase,
            Form::Extension(_) => Kind::Extension,
            Form::Permuted(..) => Kind::Permuted,
        }
    }

    /// Coordinates of a monomial, if this is one.
    pub fn monomial_support(&self) -> Option<&[usize]> {
        match &self.form {
            Form::Monomial(s) => Some(s),
            _ => None,
        }
    }

    pub fn staircase_order(&self) -> Option<usize> {
        match self.form {
            Form::Staircase(k) => Some(k),
            _ => None,
        }
    }

    /// Base function of an extension or permutation.
    pub fn base(&self) -> Option<&BooleanFunction> {
        match &self.form {
            Form::Extension(b) | Form::Permuted(b, _) => Some(b),
            _ => None,
        }
    }

    pub fn permutation(&self) -> Option<&Permutation> {
        match &self.form {
            Form::Permuted(_, p) => Some(p),
            _ => None,
        }
    }

    pub fn eval(&self, x: &[i8]) -> Result<i8> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        if let Some((i, &v)) = x.iter().enumerate().find(|(_, &v)| v != 1 && v != -1) {
            return Err(Error::NotASign {
                index: i,
                value: v as f64,
            });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without validating `x`; callers guarantee `|x| = n`, entries ±1.
    pub fn eval_unchecked(&self, x: &[i8]) -> i8 {
        match &self.form {
            Form::Table(t) => {
                let mut idx = 0usize;
                for (i, &xi) in x.iter().enumerate() {
                    if xi < 0 {
                        idx |= 1 << i;
                    }
                }
                t[idx]
            }
            Form::Monomial(s) => s.iter().fold(1i8, |acc, &i| acc * x[i]),
            Form::Majority => {
                let s: i64 = x.iter().map(|&v| v as i64).sum();
                if s >= 0 {
                    1
                } else {
                    -1
                }
            }
            Form::Staircase(k) => {
                let mut prod = 1i64;
                let mut sum = 0i64;
                for &xi in &x[..*k] {
                    prod *= xi as i64;
                    sum += prod;
                }
                if sum >= 0 {
                    1
                } else {
                    -1
                }
            }
            Form::Extension(base) => base.eval_unchecked(&x[..base.n]),
            Form::Permuted(base, perm) => {
                let y: Vec<i8> = (0..self.n).map(|m| x[perm.apply(m)]).collect();
                base.eval_unchecked(&y)
            }
        }
    }

    /// Evaluation at table index `t` (bit `i` set means `x_i = -1`). Requires `n <= 64`.
    pub fn eval_index(&self, t: u64) -> i8 {
        match &self.form {
            Form::Table(tab) => tab[t as usize],
            Form::Monomial(s) => {
                let mask = s.iter().fold(0u64, |m, &i| m | (1 << i));
                if (t & mask).count_ones().is_multiple_of(2) {
                    1
                } else {
                    -1
                }
            }
            _ => {
                let x: Vec<i8> = (0..self.n)
                    .map(|i| if (t >> i) & 1 == 1 { -1 } else { 1 })
                    .collect();
                self.eval_unchecked(&x)
            }
        }
    }

    /// Dense truth table; requires `n <= 24`.
    pub fn truth_table(&self) -> Result<Vec<i8>> {
        if self.n > DENSE_CAP {
            return Err(Error::DenseCap {
                n: self.n,
                cap: DENSE_CAP,
            });
        }
        if let Form::Table(t) = &self.form {
            return Ok(t.clone());
        }
        Ok((0..1u64 << self.n).map(|t| self.eval_index(t)).collect())
    }

    /// Fourier spectrum. Dense forms go through the Walsh–Hadamard transform;
    /// monomials are exact and sparse; extensions and permutations reuse the
    /// base spectrum.
    pub fn spectrum(&self) -> Result<FourierSpectrum> {
        match &self.form {
            Form::Monomial(s) => {
                if self.n > 64 {
                    if let Some(&last) = s.last() {
                        if last >= 64 {
                            return Err(Error::Unsupported(
                                "monomial spectra need indices below 64".into(),
                            ));
                        }
                    }
                }
                let mask = s.iter().fold(0u64, |m, &i| m | (1 << i));
                Ok(FourierSpectrum::sparse(self.n, vec![(mask, 1.0)]))
            }
            Form::Staircase(k) if self.n > *k => {
                let native = BooleanFunction::staircase(*k, *k)?;
                Ok(native.spectrum()?.embed(self.n))
            }
            Form::Extension(base) => Ok(base.spectrum()?.embed(self.n)),
            Form::Permuted(base, perm) => {
                if self.n > 64 {
                    return Err(Error::Unsupported(
                        "permuted spectra need n <= 64".into(),
                    ));
                }
                Ok(base.spectrum()?.relabel(perm))
            }
            _ => {
                let table = self.truth_table()?;
                let values: Vec<f64> = table.iter().map(|&v| v as f64).collect();
                wht(&values)
            }
        }
    }
}
