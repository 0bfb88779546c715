//! Multilinear-extension tables over the boolean hypercube.
//!
//! Index `b` of a table with `num_vars = μ` encodes the point `(X_1, .., X_μ)`
//! with `X_1` in bit 0, so entries `2k` and `2k + 1` differ only in `X_1`.
//! Fixing a variable always pairs adjacent entries.

use thiserror::Error;

use crate::field::Fr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MleError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("cannot fix a variable of a 0-variable table")]
    EmptyTable,
    #[error("table length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("sparse offsets must be strictly increasing and below 2^num_vars")]
    BadOffsets,
}

/// Dense table of `2^num_vars` evaluations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mle {
    num_vars: usize,
    evals: Vec<Fr>,
}

impl Mle {
    pub fn new(evals: Vec<Fr>) -> Result<Self, MleError> {
        let n = evals.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(MleError::NotPowerOfTwo(n));
        }
        Ok(Self {
            num_vars: n.trailing_zeros() as usize,
            evals,
        })
    }

    pub fn zero(num_vars: usize) -> Self {
        Self {
            num_vars,
            evals: vec![Fr::ZERO; 1 << num_vars],
        }
    }

    pub fn from_u64s(vals: &[u64]) -> Result<Self, MleError> {
        Self::new(vals.iter().map(|&v| Fr::from(v)).collect())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn len(&self) -> usize {
        self.evals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.evals.is_empty()
    }

    pub fn evals(&self) -> &[Fr] {
        &self.evals
    }

    pub fn evals_mut(&mut self) -> &mut [Fr] {
        &mut self.evals
    }

    pub fn into_evals(self) -> Vec<Fr> {
        self.evals
    }

    /// Evaluates the multilinear extension at `point`, folding `X_1` first.
    pub fn evaluate(&self, point: &[Fr]) -> Result<Fr, MleError> {
        if point.len() != self.num_vars {
            return Err(MleError::DimensionMismatch {
                expected: self.num_vars,
                actual: point.len(),
            });
        }
        let mut cur = self.evals.clone();
        for r in point {
            let half = cur.len() / 2;
            for k in 0..half {
                cur[k] = fold_pair(cur[2 * k], cur[2 * k + 1], *r);
            }
            cur.truncate(half);
        }
        Ok(cur[0])
    }

    /// Fixes `X_1 = r`, halving the table.
    pub fn update(&self, r: Fr) -> Result<Mle, MleError> {
        if self.num_vars == 0 {
            return Err(MleError::EmptyTable);
        }
        let evals = self
            .evals
            .chunks_exact(2)
            .map(|p| fold_pair(p[0], p[1], r))
            .collect();
        Ok(Mle {
            num_vars: self.num_vars - 1,
            evals,
        })
    }

    /// In-place variant of [`Mle::update`]; returns the number of multiplications.
    pub fn update_in_place(&mut self, r: Fr) -> Result<u64, MleError> {
        if self.num_vars == 0 {
            return Err(MleError::EmptyTable);
        }
        let half = self.evals.len() / 2;
        for k in 0..half {
            self.evals[k] = fold_pair(self.evals[2 * k], self.evals[2 * k + 1], r);
        }
        self.evals.truncate(half);
        self.num_vars -= 1;
        Ok(half as u64)
    }

    pub fn nonzero_count(&self) -> usize {
        self.evals.iter().filter(|e| !e.is_zero()).count()
    }
}

/// `e0 * (1 - r) + e1 * r`, computed with a single multiplication.
#[inline]
pub fn fold_pair(e0: Fr, e1: Fr, r: Fr) -> Fr {
    e0 + r * (e1 - e0)
}

/// Samples of the line through `(0, e0)` and `(1, e1)` at `0..=degree`.
///
/// One subtraction for the slope, then one addition per extra point.
pub fn extend_pair(e0: Fr, e1: Fr, degree: usize) -> Vec<Fr> {
    let mut out = Vec::with_capacity(degree + 1);
    extend_pair_into(e0, e1, degree, &mut out);
    out
}

/// Same as [`extend_pair`] but writes into a reusable buffer.
#[inline]
pub fn extend_pair_into(e0: Fr, e1: Fr, degree: usize, out: &mut Vec<Fr>) {
    out.clear();
    out.push(e0);
    if degree == 0 {
        return;
    }
    out.push(e1);
    let step = e1 - e0;
    let mut v = e1;
    for _ in 2..=degree {
        v += step;
        out.push(v);
    }
}

/// Builds `eq(x, τ) = Π_i (x_i τ_i + (1 - x_i)(1 - τ_i))` over the hypercube.
///
/// Costs `2^μ - 1` multiplications.
pub fn build_eq_mle(challenges: &[Fr]) -> Mle {
    let mut evals = Vec::with_capacity(1 << challenges.len());
    evals.push(Fr::ONE);
    for tau in challenges {
        let len = evals.len();
        evals.resize(2 * len, Fr::ZERO);
        for j in 0..len {
            let hi = evals[j] * *tau;
            evals[j + len] = hi;
            evals[j] -= hi;
        }
    }
    Mle {
        num_vars: challenges.len(),
        evals,
    }
}

/// `eq(x, y)` evaluated directly for two points of equal length.
pub fn eq_eval(x: &[Fr], y: &[Fr]) -> Fr {
    debug_assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .map(|(a, b)| *a * *b + (Fr::ONE - *a) * (Fr::ONE - *b))
        .product()
}

/// Table stored as `(offset, value)` pairs; absent offsets are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMle {
    num_vars: usize,
    offsets: Vec<u32>,
    values: Vec<Fr>,
}

impl SparseMle {
    pub fn new(num_vars: usize, offsets: Vec<u32>, values: Vec<Fr>) -> Result<Self, MleError> {
        if offsets.len() != values.len() {
            return Err(MleError::DimensionMismatch {
                expected: offsets.len(),
                actual: values.len(),
            });
        }
        let bound = 1u64 << num_vars;
        let increasing = offsets.windows(2).all(|w| w[0] < w[1]);
        if !increasing || offsets.last().is_some_and(|&o| u64::from(o) >= bound) {
            return Err(MleError::BadOffsets);
        }
        Ok(Self {
            num_vars,
            offsets,
            values,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn offsets(&self) -> &[u32] {
        &self.offsets
    }

    pub fn values(&self) -> &[Fr] {
        &self.values
    }

    pub fn densify(&self) -> Mle {
        let mut out = Mle::zero(self.num_vars);
        for (&o, &v) in self.offsets.iter().zip(&self.values) {
            out.evals[o as usize] = v;
        }
        out
    }
}

/// Result of [`sparsify`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaybeSparse {
    Sparse(SparseMle),
    Dense(Mle),
}

/// Returns a sparse table when the nonzero fraction is at most `threshold`.
pub fn sparsify(m: &Mle, threshold: f64) -> MaybeSparse {
    let nnz = m.nonzero_count();
    // offsets are u32
    if m.num_vars > 32 || nnz as f64 > threshold * m.len() as f64 {
        return MaybeSparse::Dense(m.clone());
    }
    let (offsets, values) = m
        .evals
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(i, v)| (i as u32, *v))
        .unzip();
    MaybeSparse::Sparse(SparseMle {
        num_vars: m.num_vars,
        offsets,
        values,
    })
}
