//! Factorization of a finite sequence into short convolutional masks.
//!
//! The symbol of a sequence `W` supported on `{0, ..., M}` is the polynomial
//! `sum_k W_k z^k`. Convolution of sequences multiplies symbols, so writing
//! the symbol as a product of real factors of degree at most `s` factorizes
//! `W` into masks supported on `{0, ..., s}`. Complex roots are kept in
//! conjugate pairs and expanded as real quadratics, so only real arithmetic
//! ever reaches the masks. Greedy grouping fills every factor to degree at
//! least `s - 1` before opening the next, which caps the number of factors
//! at `ceil(M / (s - 1))`.

mod roots;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::{convolve, FiniteSequence};

/// Relative half-width of the band around the real axis within which a
/// computed root is declared real.
const REAL_AXIS_TOL: f64 = 1e-8;

/// Relative spacing under which classified roots are reported as one root
/// with multiplicity. After cluster refinement, copies of a multiple root
/// are exactly equal, so this only has to absorb residual jitter.
const CLUSTER_TOL: f64 = 1e-7;

/// Relative radius within which raw estimates are treated as one multiple
/// root. Simultaneous iterations reach a multiplicity-mu root only to about
/// `eps^(1/mu)`, so this sits above that floor for the multiplicities the
/// refinement handles well (up to 3); higher ones degrade gracefully.
const MULTIPLE_ROOT_RADIUS: f64 = 1e-5;

/// Dense real polynomial `sum_k coeffs[k] z^k` with trailing zeros trimmed;
/// the zero polynomial is stored as a single zero coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealPolynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Real> RealPolynomial<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        let end = coeffs.iter().rposition(|c| *c != T::zero());
        match end {
            None => RealPolynomial { coeffs: vec![T::zero()] },
            Some(d) => RealPolynomial { coeffs: coeffs[..=d].to_vec() },
        }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == T::zero()
    }

    pub fn leading(&self) -> T {
        *self.coeffs.last().expect("coeffs nonempty")
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + Complex::new(c, T::zero());
        }
        acc
    }

    pub fn eval_real(&self, x: T) -> T {
        let mut acc = T::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Sequence view; the hint is the polynomial degree.
    pub fn to_sequence(&self) -> FiniteSequence<T> {
        FiniteSequence::new(self.coeffs.clone())
    }
}

/// The symbol of a sequence: the polynomial with the same coefficients.
pub fn symbol_of<T: Real>(w: &FiniteSequence<T>) -> RealPolynomial<T> {
    RealPolynomial::new(w.coeffs().to_vec())
}

/// Roots of a real polynomial, split into real roots and conjugate pairs,
/// each with multiplicity. A pair `(x, y)` with `y > 0` stands for the
/// quadratic `z^2 - 2x z + (x^2 + y^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootMultiset<T> {
    pub real_roots: Vec<(T, usize)>,
    pub conjugate_pairs: Vec<(T, T, usize)>,
    pub leading: T,
}

impl<T: Real> RootMultiset<T> {
    /// Total root count including multiplicity; equals the polynomial degree.
    pub fn degree(&self) -> usize {
        let reals: usize = self.real_roots.iter().map(|(_, m)| m).sum();
        let pairs: usize = self.conjugate_pairs.iter().map(|(_, _, m)| m).sum();
        reals + 2 * pairs
    }

    /// Expands `leading * prod (z - x) * prod (z^2 - 2x z + x^2 + y^2)`
    /// back into a dense polynomial; the round-trip oracle for the solver.
    pub fn expand(&self) -> RealPolynomial<T> {
        let mut acc = FiniteSequence::new(vec![self.leading]);
        for &(x, m) in &self.real_roots {
            for _ in 0..m {
                acc = convolve(&acc, &FiniteSequence::new(vec![-x, T::one()]));
            }
        }
        for &(x, y, m) in &self.conjugate_pairs {
            let quad = FiniteSequence::new(vec![x * x + y * y, -(x + x), T::one()]);
            for _ in 0..m {
                acc = convolve(&acc, &quad);
            }
        }
        RealPolynomial::new(acc.coeffs().to_vec())
    }
}

/// Complete root set of `p`, classified and clustered.
///
/// Roots whose relative residual cannot be pushed below `tol` make the whole
/// call fail; a partial root set would silently corrupt the factorization.
pub fn find_roots<T: Real>(p: &RealPolynomial<T>, tol: T) -> Result<RootMultiset<T>> {
    if p.is_zero() {
        return Err(Error::ZeroSequence);
    }
    let leading = p.leading();
    if p.degree() == Some(0) {
        return Ok(RootMultiset { real_roots: vec![], conjugate_pairs: vec![], leading });
    }
    let set = roots::all_roots(p.coeffs(), tol)?;
    let refined = refine_clusters(p, set.roots);
    Ok(classify(refined, leading))
}

/// Repairs the accuracy the simultaneous iteration loses on multiple roots.
///
/// Estimates within the multiple-root radius of one another are collapsed to
/// one value of multiplicity mu, re-converged by Newton on the (mu-1)-th
/// derivative, where the root is simple again. Genuinely distinct roots
/// closer than the radius merge into one multiple root; that is the best
/// reconstruction available at machine precision anyway, and the derivative
/// root lies between them, so the merged value stays inside the cluster.
fn refine_clusters<T: Real>(p: &RealPolynomial<T>, mut raw: Vec<Complex<T>>) -> Vec<Complex<T>> {
    raw.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).expect("roots are finite"));
    let radius = T::of(MULTIPLE_ROOT_RADIUS);
    let close = |a: Complex<T>, b: Complex<T>| (a - b).norm() <= radius * (T::one() + b.norm());
    // Transitive closure over the closeness relation: a cluster's estimates
    // can straddle the real axis, so sorted-order chaining is not enough.
    let mut assigned = vec![false; raw.len()];
    let mut out = Vec::with_capacity(raw.len());
    for i in 0..raw.len() {
        if assigned[i] {
            continue;
        }
        assigned[i] = true;
        let mut members = vec![i];
        let mut cursor = 0;
        while cursor < members.len() {
            let anchor = raw[members[cursor]];
            for (j, z) in raw.iter().enumerate().skip(i + 1) {
                if !assigned[j] && close(anchor, *z) {
                    assigned[j] = true;
                    members.push(j);
                }
            }
            cursor += 1;
        }
        let multiplicity = members.len();
        if multiplicity == 1 {
            out.push(raw[i]);
            continue;
        }
        let count = T::from_usize(multiplicity).expect("small count");
        let sum = members
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &k| acc + raw[k]);
        let mean = sum / count;
        let refined = match nth_derivative(p.coeffs(), multiplicity - 1) {
            Some(d) => newton_from(&d, mean),
            None => mean,
        };
        out.extend(std::iter::repeat(refined).take(multiplicity));
    }
    out
}

/// Coefficients of the `order`-th derivative, or `None` once it is constant.
fn nth_derivative<T: Real>(coeffs: &[T], order: usize) -> Option<Vec<T>> {
    let mut c = coeffs.to_vec();
    for _ in 0..order {
        if c.len() <= 1 {
            return None;
        }
        c = c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &a)| T::from_usize(k).expect("small index") * a)
            .collect();
    }
    if c.len() <= 1 {
        None
    } else {
        Some(c)
    }
}

/// Newton iteration from `start`, keeping the best iterate by relative
/// residual and stopping as soon as a step stops improving it.
fn newton_from<T: Real>(coeffs: &[T], start: Complex<T>) -> Complex<T> {
    let residual = |z: Complex<T>| {
        let (value, _) = roots::eval_with_derivative(coeffs, z);
        let denom = roots::residual_denominator(coeffs, z.norm());
        if denom == T::zero() {
            value.norm()
        } else {
            value.norm() / denom
        }
    };
    let mut best = start;
    let mut best_residual = residual(start);
    let mut z = start;
    for _ in 0..30 {
        let (value, slope) = roots::eval_with_derivative(coeffs, z);
        if slope.norm() == T::zero() {
            break;
        }
        z -= value / slope;
        let r = residual(z);
        if r < best_residual {
            best_residual = r;
            best = z;
        } else {
            break;
        }
    }
    best
}

/// Splits raw complex roots into reals and conjugate pairs, symmetrizes each
/// pair, and merges clusters into multiplicities.
fn classify<T: Real>(raw: Vec<Complex<T>>, leading: T) -> RootMultiset<T> {
    let band = |z: &Complex<T>| T::of(REAL_AXIS_TOL) * (T::one() + z.norm());
    let mut reals: Vec<T> = Vec::new();
    let mut ups: Vec<Complex<T>> = Vec::new();
    let mut downs: Vec<Complex<T>> = Vec::new();
    for z in raw {
        if z.im.abs() <= band(&z) {
            reals.push(z.re);
        } else if z.im > T::zero() {
            ups.push(z);
        } else {
            downs.push(z.conj());
        }
    }

    // The solver treats conjugates independently, so re-pair by position and
    // average; any unmatched leftover is closest to the axis and goes real.
    let key = |z: &Complex<T>| (z.re, z.im);
    ups.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    downs.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    let paired = ups.len().min(downs.len());
    let half = T::of(0.5);
    let mut pairs: Vec<(T, T)> = (0..paired)
        .map(|i| ((ups[i].re + downs[i].re) * half, (ups[i].im + downs[i].im) * half))
        .collect();
    for z in ups.drain(paired..).chain(downs.drain(paired..)) {
        reals.push(z.re);
    }

    reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let tol = T::of(CLUSTER_TOL);
    let real_roots = cluster(
        &reals,
        |&a, &b| (b - a).abs() <= tol * (T::one() + b.abs()),
        |c| {
            let n = T::from_usize(c.len()).unwrap();
            c.iter().copied().fold(T::zero(), |a, x| a + x) / n
        },
    );
    let conjugate_pairs = cluster(
        &pairs,
        |&(ax, ay), &(bx, by)| {
            let span = T::one() + bx.abs() + by;
            (bx - ax).abs().max((by - ay).abs()) <= tol * span
        },
        |c| {
            let n = T::from_usize(c.len()).unwrap();
            let sx = c.iter().fold(T::zero(), |a, p| a + p.0);
            let sy = c.iter().fold(T::zero(), |a, p| a + p.1);
            (sx / n, sy / n)
        },
    );

    RootMultiset {
        real_roots,
        conjugate_pairs: conjugate_pairs.into_iter().map(|((x, y), m)| (x, y, m)).collect(),
        leading,
    }
}

/// Greedy clustering of lexicographically sorted items; a run of pairwise
/// close neighbors becomes (representative, multiplicity).
fn cluster<I: Clone, C, R, O>(items: &[I], close: C, repr: R) -> Vec<(O, usize)>
where
    C: Fn(&I, &I) -> bool,
    R: Fn(&[I]) -> O,
{
    let mut out = Vec::new();
    let mut start = 0;
    while start < items.len() {
        let mut end = start + 1;
        while end < items.len() && close(&items[end - 1], &items[end]) {
            end += 1;
        }
        out.push((repr(&items[start..end]), end - start));
        start = end;
    }
    out
}

/// One degree-1 or degree-2 building block of a factor.
#[derive(Debug, Clone, Copy)]
enum Unit<T> {
    Linear(T),
    Quadratic(T, T),
}

impl<T: Real> Unit<T> {
    fn degree(&self) -> usize {
        match self {
            Unit::Linear(_) => 1,
            Unit::Quadratic(_, _) => 2,
        }
    }

    fn repr(&self) -> Complex<T> {
        match *self {
            Unit::Linear(x) => Complex::new(x, T::zero()),
            Unit::Quadratic(x, y) => Complex::new(x, y),
        }
    }

    fn to_sequence(self) -> FiniteSequence<T> {
        match self {
            Unit::Linear(x) => FiniteSequence::new(vec![-x, T::one()]),
            Unit::Quadratic(x, y) => {
                FiniteSequence::new(vec![x * x + y * y, -(x + x), T::one()])
            }
        }
    }
}

/// Packs the roots into monic real factors of degree at most `s`, then
/// spreads the leading coefficient geometrically across them (sign on the
/// last), so the factors multiply back to the original polynomial.
///
/// Every factor before the last reaches degree at least `s - 1`: a factor is
/// only closed when at most one slot is left and no linear root remains.
/// Within a factor the next root is chosen to maximize its distance product
/// to the roots already placed, which keeps coefficient growth down.
pub fn group_factors<T: Real>(roots: &RootMultiset<T>, s: usize) -> Result<Vec<RealPolynomial<T>>> {
    if s < 2 {
        return Err(Error::FilterLengthTooSmall { s });
    }
    let mut remaining: Vec<Unit<T>> = Vec::new();
    for &(x, m) in &roots.real_roots {
        for _ in 0..m {
            remaining.push(Unit::Linear(x));
        }
    }
    for &(x, y, m) in &roots.conjugate_pairs {
        for _ in 0..m {
            remaining.push(Unit::Quadratic(x, y));
        }
    }

    if remaining.is_empty() {
        return Ok(vec![RealPolynomial::new(vec![roots.leading])]);
    }

    let mut groups: Vec<Vec<Unit<T>>> = Vec::new();
    while !remaining.is_empty() {
        let mut group: Vec<Unit<T>> = Vec::new();
        let mut budget = s;
        // Seed with the largest root so big magnitudes are spread out early.
        let seed = argmax(&remaining, |u| u.repr().norm()).expect("remaining nonempty");
        let unit = remaining.swap_remove(seed);
        budget -= unit.degree();
        group.push(unit);
        loop {
            let placed: Vec<Complex<T>> = group.iter().map(|u| u.repr()).collect();
            let pick = argmax(&remaining, |u| {
                if u.degree() > budget {
                    return T::neg_infinity();
                }
                placed.iter().fold(T::one(), |acc, p| acc * (u.repr() - *p).norm())
            });
            match pick {
                Some(i) if remaining[i].degree() <= budget => {
                    let unit = remaining.swap_remove(i);
                    budget -= unit.degree();
                    group.push(unit);
                }
                _ => break,
            }
            if budget == 0 {
                break;
            }
        }
        groups.push(group);
    }

    let count = groups.len();
    let spread = roots.leading.abs().powf(T::one() / T::from_usize(count).unwrap());
    let mut factors = Vec::with_capacity(count);
    for (g, group) in groups.iter().enumerate() {
        let mut acc = FiniteSequence::new(vec![T::one()]);
        for unit in group {
            acc = convolve(&acc, &unit.to_sequence());
        }
        let scalar = if g + 1 == count {
            // Exact remainder keeps the product of scalars at the leading
            // coefficient despite rounding in the geometric spread.
            roots.leading / spread.powi(count as i32 - 1)
        } else {
            spread
        };
        let scaled: Vec<T> = acc.coeffs().iter().map(|&c| c * scalar).collect();
        factors.push(RealPolynomial::new(scaled));
    }
    Ok(factors)
}

fn argmax<T: Real, I, F: Fn(&I) -> T>(items: &[I], score: F) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, item) in items.iter().enumerate() {
        let v = score(item);
        if best.map_or(true, |(_, bv)| v > bv) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Masks of support at most `s` whose convolution reproduces the input,
/// together with the realized reconstruction and its worst coefficient error
/// relative to `max(1, max |W_k|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationResult<T> {
    pub masks: Vec<FiniteSequence<T>>,
    #[serde(rename = "J")]
    pub depth: usize,
    pub reconstruction: FiniteSequence<T>,
    pub max_rel_error: T,
}

/// Factorizes `w` into masks supported on `{0, ..., s}`.
///
/// Sequences that already fit (effective degree at most `s`) pass through
/// unchanged as a single mask. Longer sequences go through the symbol's
/// roots; the mask count then satisfies `(J - 1)(s - 1) < M`.
pub fn factorize_mask<T: Real>(
    w: &FiniteSequence<T>,
    s: usize,
    tol: T,
) -> Result<FactorizationResult<T>> {
    if s < 2 {
        return Err(Error::FilterLengthTooSmall { s });
    }
    let degree = w.effective_degree().ok_or(Error::ZeroSequence)?;

    let masks = if degree <= s {
        vec![FiniteSequence::with_support(w.coeffs().to_vec(), s)?]
    } else {
        let symbol = symbol_of(&w.trimmed());
        let roots = find_roots(&symbol, tol)?;
        let factors = group_factors(&roots, s)?;
        factors
            .iter()
            .map(|f| FiniteSequence::with_support(f.coeffs().to_vec(), s))
            .collect::<Result<Vec<_>>>()?
    };

    let depth = masks.len();
    debug_assert!(depth == 1 || (depth - 1) * (s - 1) < degree, "factor count bound violated");

    let reconstruction = masks
        .iter()
        .fold(FiniteSequence::delta(), |acc, m| convolve(&acc, m));
    let scale = T::one().max(w.max_abs());
    let span = w.support_hint().max(reconstruction.support_hint());
    let mut max_rel_error = T::zero();
    for k in 0..=span {
        max_rel_error = max_rel_error.max((reconstruction.get(k) - w.get(k)).abs() / scale);
    }
    Ok(FactorizationResult { masks, depth, reconstruction, max_rel_error })
}

/// Extends a mask list to exactly `depth` masks by appending delta masks,
/// which leave the chain's product unchanged.
pub fn pad_with_deltas<T: Real>(masks: &[FiniteSequence<T>], depth: usize) -> Vec<FiniteSequence<T>> {
    assert!(masks.len() <= depth, "cannot pad {} masks down to {depth}", masks.len());
    let mut out = masks.to_vec();
    while out.len() < depth {
        out.push(FiniteSequence::delta());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(coeffs: &[f64]) -> RealPolynomial<f64> {
        RealPolynomial::new(coeffs.to_vec())
    }

    #[test]
    fn symbol_preserves_coefficients_and_trims() {
        let w = FiniteSequence::new(vec![1.0, -2.0, 0.0]);
        let p = symbol_of(&w);
        assert_eq!(p.coeffs(), &[1.0, -2.0]);
        assert_eq!(p.degree(), Some(1));
    }

    #[test]
    fn eval_matches_horner_by_hand() {
        let p = poly(&[1.0, -3.0, 2.0]);
        assert_eq!(p.eval_real(2.0), 3.0);
        let z = Complex::new(0.0, 1.0);
        let v = p.eval(z);
        assert!((v.re - (-1.0)).abs() < 1e-15);
        assert!((v.im - (-3.0)).abs() < 1e-15);
    }

    #[test]
    fn double_root_and_simple_root_recovered() {
        // (z - 2)^2 (z + 3) = 12 - 8z - z^2 + z^3
        let roots = find_roots(&poly(&[12.0, -8.0, -1.0, 1.0]), 1e-10).unwrap();
        assert!(roots.conjugate_pairs.is_empty());
        assert_eq!(roots.real_roots.len(), 2);
        let (x0, m0) = roots.real_roots[0];
        let (x1, m1) = roots.real_roots[1];
        assert!((x0 + 3.0).abs() < 1e-8 && m0 == 1);
        // Cluster refinement restores full accuracy on the double root.
        assert!((x1 - 2.0).abs() < 1e-9 && m1 == 2);
        assert_eq!(roots.degree(), 3);
    }

    #[test]
    fn conjugate_pair_stored_with_positive_imaginary_part() {
        let roots = find_roots(&poly(&[1.0, 0.0, 1.0]), 1e-12).unwrap();
        assert_eq!(roots.real_roots.len(), 0);
        assert_eq!(roots.conjugate_pairs.len(), 1);
        let (x, y, m) = roots.conjugate_pairs[0];
        assert!(x.abs() < 1e-12 && (y - 1.0).abs() < 1e-12 && m == 1);
    }

    #[test]
    fn repeated_conjugate_pair_refined_to_multiplicity_two() {
        // (z^2 - 2z + 2)^2 = 4 - 8z + 8z^2 - 4z^3 + z^4, roots 1 +- i twice.
        let roots = find_roots(&poly(&[4.0, -8.0, 8.0, -4.0, 1.0]), 1e-10).unwrap();
        assert!(roots.real_roots.is_empty());
        assert_eq!(roots.conjugate_pairs.len(), 1);
        let (x, y, m) = roots.conjugate_pairs[0];
        assert!(
            (x - 1.0).abs() < 1e-9 && (y - 1.0).abs() < 1e-9 && m == 2,
            "got ({x}, {y}, {m}), reals {:?}",
            roots.real_roots
        );
    }

    #[test]
    fn origin_roots_have_exact_multiplicity() {
        let roots = find_roots(&poly(&[0.0, 0.0, 1.0]), 1e-12).unwrap();
        assert_eq!(roots.real_roots, vec![(0.0, 2)]);
    }

    #[test]
    fn expand_reverses_find_roots() {
        let p = poly(&[12.0, -8.0, -1.0, 1.0]);
        let roots = find_roots(&p, 1e-12).unwrap();
        let back = roots.expand();
        for (a, b) in back.coeffs().iter().zip(p.coeffs()) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_polynomial_is_rejected() {
        assert_eq!(find_roots(&poly(&[0.0]), 1e-12).unwrap_err(), Error::ZeroSequence);
    }

    #[test]
    fn grouping_fills_factors_before_opening_new_ones() {
        let roots = RootMultiset {
            real_roots: vec![(1.0, 1), (-1.0, 1), (2.0, 1)],
            conjugate_pairs: vec![(0.0, 1.0, 1)],
            leading: 1.0,
        };
        let degrees = |s: usize| -> Vec<usize> {
            group_factors(&roots, s)
                .unwrap()
                .iter()
                .map(|f| f.degree().unwrap())
                .collect()
        };
        let d2 = degrees(2);
        assert_eq!(d2.iter().sum::<usize>(), 5);
        assert_eq!(d2.len(), 3);
        assert!(d2[..2].iter().all(|&d| d >= 1));
        let d3 = degrees(3);
        assert_eq!(d3.iter().sum::<usize>(), 5);
        assert_eq!(d3.len(), 2);
        assert!(d3[0] >= 2);
    }

    #[test]
    fn grouping_product_restores_polynomial() {
        let p = poly(&[12.0, -8.0, -1.0, 1.0]);
        let roots = find_roots(&p, 1e-12).unwrap();
        let factors = group_factors(&roots, 2).unwrap();
        let mut acc = FiniteSequence::delta();
        for f in &factors {
            acc = convolve(&acc, &f.to_sequence());
        }
        for (a, b) in acc.coeffs().iter().zip(p.coeffs()) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn degree_zero_multiset_gives_constant_factor() {
        let roots = RootMultiset::<f64> {
            real_roots: vec![],
            conjugate_pairs: vec![],
            leading: -4.0,
        };
        let factors = group_factors(&roots, 2).unwrap();
        assert_eq!(factors.len(), 1);
        assert_eq!(factors[0].coeffs(), &[-4.0]);
    }

    #[test]
    fn short_sequences_pass_through_unchanged() {
        let w = FiniteSequence::new(vec![0.5, 0.0, -1.5]);
        let f = factorize_mask(&w, 3, 1e-10).unwrap();
        assert_eq!(f.depth, 1);
        assert_eq!(f.masks[0].coeffs(), &[0.5, 0.0, -1.5, 0.0]);
        assert_eq!(f.max_rel_error, 0.0);
    }

    #[test]
    fn cubic_factorizes_into_two_masks() {
        // (1 + z)^3
        let w = FiniteSequence::new(vec![1.0, 3.0, 3.0, 1.0]);
        let f = factorize_mask(&w, 2, 1e-10).unwrap();
        assert_eq!(f.depth, 2);
        for m in &f.masks {
            assert_eq!(m.support_hint(), 2);
        }
        assert!(f.max_rel_error <= 1e-9, "error {}", f.max_rel_error);
    }

    #[test]
    fn zero_and_small_s_are_rejected() {
        let z = FiniteSequence::<f64>::zero();
        assert_eq!(factorize_mask(&z, 2, 1e-10).unwrap_err(), Error::ZeroSequence);
        let w = FiniteSequence::new(vec![1.0, 1.0]);
        assert_eq!(
            factorize_mask(&w, 1, 1e-10).unwrap_err(),
            Error::FilterLengthTooSmall { s: 1 }
        );
    }

    #[test]
    fn constant_sequence_is_a_single_mask() {
        let w = FiniteSequence::new(vec![7.0]);
        let f = factorize_mask(&w, 2, 1e-10).unwrap();
        assert_eq!(f.depth, 1);
        assert_eq!(f.masks[0].coeffs(), &[7.0, 0.0, 0.0]);
    }

    #[test]
    fn padding_appends_deltas() {
        let masks = vec![FiniteSequence::new(vec![1.0, 2.0])];
        let padded = pad_with_deltas(&masks, 3);
        assert_eq!(padded.len(), 3);
        assert_eq!(padded[1], FiniteSequence::delta());
        assert_eq!(padded[2], FiniteSequence::delta());
    }

    #[test]
    fn factorization_result_serializes_depth_as_capital_j() {
        let w = FiniteSequence::new(vec![1.0, 2.0, 1.0]);
        let f = factorize_mask(&w, 2, 1e-10).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        assert!(text.contains("\"J\":1"), "{text}");
        let back: FactorizationResult<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back.depth, 1);
    }
}
