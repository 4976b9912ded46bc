//! Finite sequences, 1-D convolution, and the Toeplitz-type matrices a
//! convolutional layer applies.
//!
//! A filter mask `w` supported on `{0, ..., s}` acting on dimension `d`
//! yields the `(d + s) x d` matrix `T` with `T[l][k] = w[l - k]`, zero
//! outside `0 <= l - k <= s`. Chains of such matrices compose the same way
//! sequences convolve: `T^(J) ... T^(1) = T^W` with `W = w^(J) * ... * w^(1)`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Real sequence supported on `{0, ..., support_hint}`.
///
/// Storage always holds exactly `support_hint + 1` coefficients, so the hint
/// is an upper bound on the true support; trailing entries may be zero. The
/// all-zero sequence is stored as a single zero with hint 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence<T>")]
pub struct FiniteSequence<T> {
    coeffs: Vec<T>,
    support_hint: usize,
}

/// Wire form; `TryFrom` enforces the length invariant on deserialization.
#[derive(Deserialize)]
struct RawSequence<T> {
    coeffs: Vec<T>,
    support_hint: usize,
}

impl<T> TryFrom<RawSequence<T>> for FiniteSequence<T> {
    type Error = Error;

    fn try_from(raw: RawSequence<T>) -> Result<Self> {
        if raw.coeffs.len() != raw.support_hint + 1 {
            return Err(Error::DimensionMismatch {
                expected: raw.support_hint + 1,
                got: raw.coeffs.len(),
            });
        }
        Ok(FiniteSequence { coeffs: raw.coeffs, support_hint: raw.support_hint })
    }
}

impl<T: Real> FiniteSequence<T> {
    /// Sequence with the given coefficients; the hint is the last index.
    /// An empty vector becomes the zero sequence.
    pub fn new(coeffs: Vec<T>) -> Self {
        if coeffs.is_empty() {
            return Self::zero();
        }
        let support_hint = coeffs.len() - 1;
        FiniteSequence { coeffs, support_hint }
    }

    pub fn zero() -> Self {
        FiniteSequence { coeffs: vec![T::zero()], support_hint: 0 }
    }

    /// The delta sequence `(1, 0, 0, ...)`, the convolution identity.
    pub fn delta() -> Self {
        FiniteSequence { coeffs: vec![T::one()], support_hint: 0 }
    }

    /// Sequence with a declared support bound. Coefficients shorter than the
    /// bound are zero-padded; an effective degree above the bound is an error.
    pub fn with_support(coeffs: Vec<T>, support_hint: usize) -> Result<Self> {
        let degree = coeffs
            .iter()
            .rposition(|c| *c != T::zero())
            .unwrap_or(0);
        if degree > support_hint {
            return Err(Error::MaskTooLong { degree, bound: support_hint });
        }
        let mut coeffs = coeffs;
        coeffs.resize(support_hint + 1, T::zero());
        Ok(FiniteSequence { coeffs, support_hint })
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn support_hint(&self) -> usize {
        self.support_hint
    }

    /// Coefficient at index `k`, zero outside the stored range.
    pub fn get(&self, k: usize) -> T {
        self.coeffs.get(k).copied().unwrap_or_else(T::zero)
    }

    /// Index of the last nonzero coefficient, or `None` for the zero
    /// sequence. This, not the hint, decides factorization depth.
    pub fn effective_degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| *c != T::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.effective_degree().is_none()
    }

    pub fn l1_norm(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, c| acc + c.abs())
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, c| acc.max(c.abs()))
    }

    /// Copy with trailing zeros dropped and the hint tightened to the
    /// effective degree.
    pub fn trimmed(&self) -> Self {
        match self.effective_degree() {
            None => Self::zero(),
            Some(d) => Self::new(self.coeffs[..=d].to_vec()),
        }
    }
}

/// Convolution `(a * b)_i = sum_k a_{i-k} b_k`. The result's hint is the sum
/// of the effective degrees; convolving with the zero sequence gives zero.
pub fn convolve<T: Real>(a: &FiniteSequence<T>, b: &FiniteSequence<T>) -> FiniteSequence<T> {
    let (da, db) = match (a.effective_degree(), b.effective_degree()) {
        (Some(da), Some(db)) => (da, db),
        _ => return FiniteSequence::zero(),
    };
    let mut out = vec![T::zero(); da + db + 1];
    for (i, &ai) in a.coeffs[..=da].iter().enumerate() {
        if ai == T::zero() {
            continue;
        }
        for (j, &bj) in b.coeffs[..=db].iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    FiniteSequence::new(out)
}

/// Dense convolutional matrix together with the mask that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvMatrix<T> {
    mask: FiniteSequence<T>,
    in_dim: usize,
    entries: Array2<T>,
}

impl<T: Real> ConvMatrix<T> {
    pub fn mask(&self) -> &FiniteSequence<T> {
        &self.mask
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.in_dim + self.mask.support_hint()
    }

    /// Row surplus over the input dimension; equals the declared support.
    pub fn gap(&self) -> usize {
        self.mask.support_hint()
    }

    pub fn entries(&self) -> &Array2<T> {
        &self.entries
    }

    /// Matrix-vector product; the input length must match `in_dim`.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.in_dim, "input length must match in_dim");
        let (rows, cols) = (self.out_dim(), self.in_dim);
        let mut out = vec![T::zero(); rows];
        for l in 0..rows {
            let mut acc = T::zero();
            for k in 0..cols {
                acc += self.entries[[l, k]] * v[k];
            }
            out[l] = acc;
        }
        out
    }
}

/// Convolutional matrix of a length-`s + 1` mask acting on `in_dim`, of
/// shape `(in_dim + s) x in_dim`. The mask's effective degree must not
/// exceed `s`.
pub fn toeplitz<T: Real>(
    mask: &FiniteSequence<T>,
    in_dim: usize,
    s: usize,
) -> Result<ConvMatrix<T>> {
    if in_dim == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    let mask = FiniteSequence::with_support(mask.coeffs().to_vec(), s)?;
    let mut entries = Array2::zeros((in_dim + s, in_dim));
    for l in 0..in_dim + s {
        let lo = l.saturating_sub(s);
        for k in lo..=l.min(in_dim - 1) {
            entries[[l, k]] = mask.get(l - k);
        }
    }
    Ok(ConvMatrix { mask, in_dim, entries })
}

/// Convolutional matrix of a long mask `w` mapping `in_dim` directly to
/// `out_dim`, the single-step equivalent of a full chain. Requires
/// `out_dim >= in_dim` and the mask to fit in the gap.
pub fn big_toeplitz<T: Real>(
    w: &FiniteSequence<T>,
    in_dim: usize,
    out_dim: usize,
) -> Result<ConvMatrix<T>> {
    if out_dim < in_dim {
        return Err(Error::DimensionMismatch { expected: in_dim, got: out_dim });
    }
    toeplitz(w, in_dim, out_dim - in_dim)
}

/// Product `T^(J) ... T^(1)` of the chain built from `masks` on widths
/// `d, d + s, ..., d + Js`. An empty chain gives the identity.
pub fn matrix_chain_product<T: Real>(
    masks: &[FiniteSequence<T>],
    d: usize,
    s: usize,
) -> Result<Array2<T>> {
    let mut acc = Array2::eye(d);
    for (j, mask) in masks.iter().enumerate() {
        let t = toeplitz(mask, d + j * s, s)?;
        acc = t.entries().dot(&acc);
    }
    Ok(acc)
}

/// Tolerance scale `max(1, max |x|)`; comparisons in this crate are relative
/// to the magnitude of the data involved.
pub fn scale_of<T: Real>(values: &[T]) -> T {
    values.iter().fold(T::one(), |acc, v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(coeffs: &[f64]) -> FiniteSequence<f64> {
        FiniteSequence::new(coeffs.to_vec())
    }

    #[test]
    fn convolve_matches_hand_expansion() {
        let c = convolve(&seq(&[1.0, 1.0]), &seq(&[1.0, 1.0]));
        assert_eq!(c.coeffs(), &[1.0, 2.0, 1.0]);
        let c = convolve(&seq(&[1.0, 2.0]), &seq(&[3.0, -1.0]));
        assert_eq!(c.coeffs(), &[3.0, 5.0, -2.0]);
    }

    #[test]
    fn convolve_with_delta_is_identity() {
        let a = seq(&[4.0, 0.0, -2.5, 1.0]);
        assert_eq!(convolve(&a, &FiniteSequence::delta()), a);
    }

    #[test]
    fn convolve_with_zero_is_zero() {
        let a = seq(&[4.0, -2.5]);
        let z = FiniteSequence::zero();
        assert!(convolve(&a, &z).is_zero());
        assert_eq!(convolve(&z, &a).support_hint(), 0);
    }

    #[test]
    fn convolve_adds_effective_degrees() {
        let a = seq(&[1.0, 2.0, 0.0]);
        let b = seq(&[0.5, 0.0, 3.0]);
        let c = convolve(&a, &b);
        assert_eq!(c.support_hint(), 3);
        assert_eq!(c.effective_degree(), Some(3));
    }

    #[test]
    fn effective_degree_ignores_trailing_zeros() {
        assert_eq!(seq(&[0.0, 1.0, 0.0, 0.0]).effective_degree(), Some(1));
        assert_eq!(seq(&[0.0, 0.0]).effective_degree(), None);
        assert!(FiniteSequence::<f64>::zero().is_zero());
    }

    #[test]
    fn with_support_pads_and_rejects() {
        let m = FiniteSequence::with_support(vec![1.0, 2.0], 3).unwrap();
        assert_eq!(m.coeffs(), &[1.0, 2.0, 0.0, 0.0]);
        let err = FiniteSequence::with_support(vec![1.0, 2.0, 3.0], 1).unwrap_err();
        assert_eq!(err, Error::MaskTooLong { degree: 2, bound: 1 });
    }

    #[test]
    fn toeplitz_lays_out_shifted_mask_columns() {
        let t = toeplitz(&seq(&[2.0, -1.0, 3.0]), 2, 2).unwrap();
        assert_eq!(t.out_dim(), 4);
        let expected = [[2.0, 0.0], [-1.0, 2.0], [3.0, -1.0], [0.0, 3.0]];
        for l in 0..4 {
            for k in 0..2 {
                assert_eq!(t.entries()[[l, k]], expected[l][k]);
            }
        }
    }

    #[test]
    fn toeplitz_apply_is_truncated_convolution() {
        let mask = seq(&[2.0, -1.0, 3.0]);
        let v = seq(&[4.0, 5.0]);
        let t = toeplitz(&mask, 2, 2).unwrap();
        assert_eq!(t.apply(v.coeffs()), convolve(&mask, &v).coeffs());
    }

    #[test]
    fn toeplitz_rejects_oversized_mask() {
        let err = toeplitz(&seq(&[1.0, 0.0, 0.0, 5.0]), 4, 2).unwrap_err();
        assert_eq!(err, Error::MaskTooLong { degree: 3, bound: 2 });
    }

    #[test]
    fn big_toeplitz_spans_the_full_gap() {
        let t = big_toeplitz(&seq(&[5.0, 6.0, 7.0, 8.0]), 2, 5).unwrap();
        let expected = [[5.0, 0.0], [6.0, 5.0], [7.0, 6.0], [8.0, 7.0], [0.0, 8.0]];
        for l in 0..5 {
            for k in 0..2 {
                assert_eq!(t.entries()[[l, k]], expected[l][k]);
            }
        }
    }

    #[test]
    fn chain_product_equals_big_toeplitz_of_convolution() {
        let m1 = seq(&[1.0, 0.0, 2.0]);
        let m2 = seq(&[3.0, 1.0, 0.0]);
        let chain = matrix_chain_product(&[m1.clone(), m2.clone()], 2, 2).unwrap();
        let w = convolve(&m2, &m1);
        let big = big_toeplitz(&w, 2, 6).unwrap();
        assert_eq!(chain, *big.entries());
    }

    #[test]
    fn empty_chain_is_identity() {
        let chain = matrix_chain_product::<f64>(&[], 3, 2).unwrap();
        assert_eq!(chain, Array2::<f64>::eye(3));
    }

    #[test]
    fn norms_and_scale() {
        let a = seq(&[3.0, -2.0, 5.0]);
        assert_eq!(a.l1_norm(), 10.0);
        assert_eq!(a.max_abs(), 5.0);
        assert_eq!(scale_of(&[0.25, -0.5]), 1.0);
        assert_eq!(scale_of(&[0.25, -4.0]), 4.0);
    }

    #[test]
    fn serde_roundtrip_and_length_check() {
        let a = seq(&[1.0, 0.0, -2.0]);
        let text = serde_json::to_string(&a).unwrap();
        let back: FiniteSequence<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(a, back);
        let bad = r#"{"coeffs":[1.0,2.0],"support_hint":3}"#;
        assert!(serde_json::from_str::<FiniteSequence<f64>>(bad).is_err());
    }
}
