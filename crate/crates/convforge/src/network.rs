//! Deep ReLU networks whose layers are convolutions with short masks, built
//! to reproduce a ramp-ridge expansion exactly.
//!
//! A ridge expansion
//! `F(x) = beta0 + alpha0 . x + (v/m) sum_k beta_k (alpha_k . x - t_k)_+`
//! is flattened into one long mask `W` holding every direction, `W` is
//! factorized into `J` masks of support `s`, and biases are chosen so that
//! ReLU never truncates until the last layer:
//!
//! * layers `j < J` output `h^(j) = T^(j) ... T^(1) x + B^(j) 1` with
//!   `B^(j) = |w^(j)|_1 ... |w^(1)|_1 B^(0)`, large enough to keep every
//!   component nonnegative;
//! * layer `J` cancels the offsets and leaves the ramps
//!   `(alpha_k . x - t_k)_+` at components `(k+1)d`, the linear channel at
//!   component `d`, and a constant channel at component `d + Js`;
//! * output coefficients then assemble `F` exactly.
//!
//! Exactness holds for all inputs with `max |x_i| <= B^(0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::{scale_of, FiniteSequence};
use crate::symbolic::{factorize_mask, pad_with_deltas};

/// Shape of a network: input dimension `d`, filter support `s`, depth, and
/// the widths `d + j s` for `j = 0, ..., depth`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub d: usize,
    pub s: usize,
    #[serde(rename = "J")]
    pub depth: usize,
    pub widths: Vec<usize>,
}

impl NetworkConfig {
    pub fn new(d: usize, s: usize, depth: usize) -> Self {
        let widths = (0..=depth).map(|j| d + j * s).collect();
        NetworkConfig { d, s, depth, widths }
    }

    pub fn validate(&self) -> Result<()> {
        if self.s < 2 {
            return Err(Error::FilterLengthTooSmall { s: self.s });
        }
        if self.s > self.d {
            return Err(Error::FilterLengthExceedsDimension { s: self.s, d: self.d });
        }
        if self.widths.len() != self.depth + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.depth + 1,
                got: self.widths.len(),
            });
        }
        for (j, &w) in self.widths.iter().enumerate() {
            if w != self.d + j * self.s {
                return Err(Error::DimensionMismatch { expected: self.d + j * self.s, got: w });
            }
        }
        Ok(())
    }
}

/// One ramp term `beta (alpha . x - t)_+` with `|beta| <= 1`,
/// `|alpha|_1 = 1`, and `t` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeTerm<T> {
    pub beta: T,
    pub alpha: Vec<T>,
    pub t: T,
}

/// Normalized ramp-ridge expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeExpansion<T> {
    pub beta0: T,
    pub alpha0: Vec<T>,
    pub v: T,
    pub terms: Vec<RidgeTerm<T>>,
}

/// Slack for the normalization checks; fitted expansions satisfy them up to
/// a handful of roundings.
const NORM_TOL: f64 = 1e-9;

impl<T: Real> RidgeExpansion<T> {
    pub fn new(beta0: T, alpha0: Vec<T>, v: T, terms: Vec<RidgeTerm<T>>) -> Result<Self> {
        let ridge = RidgeExpansion { beta0, alpha0, v, terms };
        ridge.validate()?;
        Ok(ridge)
    }

    pub fn dim(&self) -> usize {
        self.alpha0.len()
    }

    /// Ramp term count `m`.
    pub fn m(&self) -> usize {
        self.terms.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha0.is_empty() {
            return Err(Error::InvalidExpansion("alpha0 must be nonempty".into()));
        }
        if !(self.v > T::zero()) {
            return Err(Error::InvalidExpansion("v must be positive".into()));
        }
        let tol = T::of(NORM_TOL);
        for (k, term) in self.terms.iter().enumerate() {
            if term.alpha.len() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    got: term.alpha.len(),
                });
            }
            if term.beta.abs() > T::one() + tol {
                return Err(Error::InvalidExpansion(format!("|beta_{}| exceeds 1", k + 1)));
            }
            if term.t < -tol || term.t > T::one() + tol {
                return Err(Error::InvalidExpansion(format!("t_{} outside [0, 1]", k + 1)));
            }
            let l1: T = term.alpha.iter().map(|a| a.abs()).sum();
            if (l1 - T::one()).abs() > tol {
                return Err(Error::InvalidExpansion(format!(
                    "alpha_{} l1 norm is {l1}, expected 1",
                    k + 1
                )));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[T]) -> T {
        assert_eq!(x.len(), self.dim(), "input length must match dim");
        let mut acc = self.beta0;
        for (a, xi) in self.alpha0.iter().zip(x) {
            acc += *a * *xi;
        }
        if self.terms.is_empty() {
            return acc;
        }
        let m = T::from_usize(self.terms.len()).unwrap();
        let mut ramps = T::zero();
        for term in &self.terms {
            let mut u = -term.t;
            for (a, xi) in term.alpha.iter().zip(x) {
                u += *a * *xi;
            }
            if u > T::zero() {
                ramps += term.beta * u;
            }
        }
        acc + self.v / m * ramps
    }
}

/// Bias of one layer; `structured` records whether it was produced by the
/// repeated-middle formula (all hidden layers) or laid out entry by entry
/// (the last layer).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasVector<T> {
    pub entries: Vec<T>,
    pub structured: bool,
}

impl<T: Real> BiasVector<T> {
    /// True when all entries between the first `s` and last `s` are
    /// bitwise identical, the shape the hidden-layer formula produces.
    pub fn has_repeated_middle(&self, s: usize) -> bool {
        let n = self.entries.len();
        if n <= 2 * s + 1 {
            return true;
        }
        let middle = &self.entries[s..n - s];
        middle.windows(2).all(|w| w[0] == w[1])
    }
}

/// One convolutional layer: mask and bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer<T> {
    pub mask: FiniteSequence<T>,
    pub bias: BiasVector<T>,
}

/// Deep CNN with fixed widths `d + j s`, one mask and bias per layer, and a
/// linear readout on the last layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepCnn<T> {
    config: NetworkConfig,
    layers: Vec<Layer<T>>,
    output_coeffs: Vec<T>,
    b_ledger: Vec<T>,
}

/// Activations of every layer plus the readout value.
#[derive(Debug, Clone)]
pub struct ForwardPass<T> {
    pub activations: Vec<Vec<T>>,
    pub output: T,
}

impl<T: Real> DeepCnn<T> {
    /// Validates shapes: one layer per depth step, masks within support `s`,
    /// bias lengths matching the widths, readout on the last width, and a
    /// norm ledger entry per level.
    pub fn new(
        config: NetworkConfig,
        layers: Vec<Layer<T>>,
        output_coeffs: Vec<T>,
        b_ledger: Vec<T>,
    ) -> Result<Self> {
        config.validate()?;
        if layers.len() != config.depth {
            return Err(Error::DimensionMismatch { expected: config.depth, got: layers.len() });
        }
        for (j, layer) in layers.iter().enumerate() {
            let degree = layer.mask.effective_degree().unwrap_or(0);
            if degree > config.s {
                return Err(Error::MaskTooLong { degree, bound: config.s });
            }
            let width = config.widths[j + 1];
            if layer.bias.entries.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    got: layer.bias.entries.len(),
                });
            }
        }
        let last = *config.widths.last().expect("widths nonempty");
        if output_coeffs.len() != last {
            return Err(Error::DimensionMismatch { expected: last, got: output_coeffs.len() });
        }
        if b_ledger.len() != config.depth + 1 {
            return Err(Error::DimensionMismatch {
                expected: config.depth + 1,
                got: b_ledger.len(),
            });
        }
        Ok(DeepCnn { config, layers, output_coeffs, b_ledger })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn output_coeffs(&self) -> &[T] {
        &self.output_coeffs
    }

    /// Offsets `B^(0), ..., B^(J)`.
    pub fn b_ledger(&self) -> &[T] {
        &self.b_ledger
    }

    pub fn masks(&self) -> Vec<FiniteSequence<T>> {
        self.layers.iter().map(|l| l.mask.clone()).collect()
    }

    /// Runs `h^(j) = relu(T^(j) h^(j-1) - b^(j))` through all layers and
    /// applies the readout.
    pub fn forward(&self, x: &[T]) -> ForwardPass<T> {
        assert_eq!(x.len(), self.config.d, "input length must match d");
        let mut h = x.to_vec();
        let mut activations = Vec::with_capacity(self.config.depth);
        for layer in &self.layers {
            let mut u = conv_apply(&layer.mask, &h, self.config.s);
            for (ui, bi) in u.iter_mut().zip(&layer.bias.entries) {
                *ui = (*ui - *bi).max(T::zero());
            }
            activations.push(u.clone());
            h = u;
        }
        let output = self
            .output_coeffs
            .iter()
            .zip(&h)
            .fold(T::zero(), |acc, (c, hi)| acc + *c * *hi);
        ForwardPass { activations, output }
    }

    pub fn evaluate(&self, x: &[T]) -> T {
        self.forward(x).output
    }
}

/// `T w . h` without materializing the matrix: the `(len + s)`-vector of the
/// truncated convolution. Accumulation order matches the row-wise matrix
/// product, so results are bitwise equal to applying the Toeplitz matrix.
fn conv_apply<T: Real>(mask: &FiniteSequence<T>, h: &[T], s: usize) -> Vec<T> {
    let mut out = vec![T::zero(); h.len() + s];
    for (k, &hk) in h.iter().enumerate() {
        for l in 0..=s {
            out[k + l] += mask.get(l) * hk;
        }
    }
    out
}

/// Flattens ridge directions into the stacked mask `W` of length
/// `(m + 1) d` with `W_{(k+1)d - i} = alpha_{k,i}` (`alpha_0` comes from the
/// linear term), so that row `(k+1)d` of the big Toeplitz matrix is exactly
/// `alpha_k`.
pub fn stack_ridge_directions<T: Real>(ridge: &RidgeExpansion<T>) -> FiniteSequence<T> {
    let d = ridge.dim();
    let m = ridge.m();
    let mut w = vec![T::zero(); (m + 1) * d];
    for k in 0..=m {
        let alpha = if k == 0 { &ridge.alpha0 } else { &ridge.terms[k - 1].alpha };
        for i in 1..=d {
            w[(k + 1) * d - i] = alpha[i - 1];
        }
    }
    FiniteSequence::new(w)
}

/// Offsets `B^(j) = |w^(j)|_1 ... |w^(1)|_1 B^(0)`; entry `j` bounds every
/// component of `|h^(j)|` on inputs with `max |x_i| <= B^(0)`.
pub fn norm_ledger<T: Real>(masks: &[FiniteSequence<T>], b0: T) -> Vec<T> {
    let mut ledger = Vec::with_capacity(masks.len() + 1);
    ledger.push(b0);
    let mut acc = b0;
    for mask in masks {
        acc = acc * mask.l1_norm();
        ledger.push(acc);
    }
    ledger
}

/// Biases for all layers of a network realizing `ridge` through `masks`.
///
/// Hidden layers use closed forms: `b^(1) = -B^(1) 1` and, for
/// `2 <= j < J`, `b^(j) = B^(j-1) T^(j) 1 - B^(j) 1`, whose interior entries
/// all equal `B^(j-1) |w^(j)|_sum - B^(j)`. The last layer cancels the
/// carried offset everywhere except: component `(k+1)d` keeps the ramp input
/// `alpha_k . x - t_k`, component `d` keeps the linear channel, and
/// component `d + Js` keeps the constant channel `B^(J)`.
pub fn build_biases<T: Real>(
    masks: &[FiniteSequence<T>],
    config: &NetworkConfig,
    b_ledger: &[T],
    ridge: &RidgeExpansion<T>,
) -> Result<Vec<BiasVector<T>>> {
    let depth = config.depth;
    assert!(depth >= 2, "offset cancellation needs at least one hidden layer");
    assert_eq!(masks.len(), depth, "one mask per layer");
    assert_eq!(b_ledger.len(), depth + 1, "ledger covers levels 0..=depth");
    let (d, s) = (config.d, config.s);
    let m = ridge.m();
    let mut biases = Vec::with_capacity(depth);

    for j in 1..depth {
        let width = config.widths[j];
        let entries = if j == 1 {
            vec![-b_ledger[1]; width]
        } else {
            let ones = vec![T::one(); config.widths[j - 1]];
            let t_ones = conv_apply(&masks[j - 1], &ones, s);
            t_ones
                .iter()
                .map(|&v| b_ledger[j - 1] * v - b_ledger[j])
                .collect()
        };
        biases.push(BiasVector { entries, structured: true });
    }

    let ones = vec![T::one(); config.widths[depth - 1]];
    let t_ones = conv_apply(&masks[depth - 1], &ones, s);
    let b_prev = b_ledger[depth - 1];
    let b_last = b_ledger[depth];
    let width = config.widths[depth];
    let mut entries = Vec::with_capacity(width);
    for l in 1..=width {
        let carried = b_prev * t_ones[l - 1];
        let adjust = if l == d || l == width {
            -b_last
        } else if l % d == 0 && l / d >= 2 && l / d <= m + 1 {
            ridge.terms[l / d - 2].t
        } else {
            b_last
        };
        entries.push(carried + adjust);
    }
    biases.push(BiasVector { entries, structured: false });
    Ok(biases)
}

/// Readout coefficients: `1` on the linear channel, `v beta_k / m` on each
/// ramp, and `beta0 / B^(J) - 1` on the constant channel, which adds
/// `beta0` and cancels the offset carried by the linear channel.
pub fn realize_output_coeffs<T: Real>(
    config: &NetworkConfig,
    b_ledger: &[T],
    ridge: &RidgeExpansion<T>,
) -> Result<Vec<T>> {
    let b_last = *b_ledger.last().expect("ledger nonempty");
    if !(b_last > T::zero()) {
        return Err(Error::DegenerateScale);
    }
    let d = config.d;
    let m = ridge.m();
    let width = *config.widths.last().expect("widths nonempty");
    let mut coeffs = vec![T::zero(); width];
    coeffs[d - 1] = T::one();
    if m > 0 {
        let m_t = T::from_usize(m).unwrap();
        for (k, term) in ridge.terms.iter().enumerate() {
            coeffs[(k + 2) * d - 1] = ridge.v * term.beta / m_t;
        }
    }
    coeffs[width - 1] += ridge.beta0 / b_last - T::one();
    Ok(coeffs)
}

/// Default relative accuracy requested from the root finder when a network
/// is built; scaled by machine epsilon so it is attainable for both scalar
/// widths.
fn default_root_tol<T: Real>() -> T {
    T::epsilon() * T::of(512.0)
}

/// Builds the network realizing `ridge` exactly with filters of support `s`
/// and the given depth, on the domain `max |x_i| <= domain_bound`.
///
/// Depth must satisfy `(m + 1) d <= (s - 1) depth` so the stacked mask fits
/// into the factorization; the minimal admissible depth is reported
/// otherwise.
pub fn build_network<T: Real>(
    ridge: &RidgeExpansion<T>,
    s: usize,
    depth: usize,
    domain_bound: T,
) -> Result<DeepCnn<T>> {
    build_network_with_tol(ridge, s, depth, domain_bound, default_root_tol::<T>())
}

/// [`build_network`] with an explicit root-finder tolerance.
pub fn build_network_with_tol<T: Real>(
    ridge: &RidgeExpansion<T>,
    s: usize,
    depth: usize,
    domain_bound: T,
    root_tol: T,
) -> Result<DeepCnn<T>> {
    ridge.validate()?;
    let d = ridge.dim();
    let m = ridge.m();
    if s < 2 {
        return Err(Error::FilterLengthTooSmall { s });
    }
    if s > d {
        return Err(Error::FilterLengthExceedsDimension { s, d });
    }
    if (m + 1) * d > (s - 1) * depth {
        let minimal = ((m + 1) * d).div_ceil(s - 1);
        return Err(Error::DepthTooSmall { depth, minimal });
    }
    if !(domain_bound > T::zero()) {
        return Err(Error::DegenerateScale);
    }

    let w = stack_ridge_directions(ridge);
    if w.is_zero() {
        return Err(Error::ZeroSequence);
    }
    let factorization = factorize_mask(&w, s, root_tol)?;
    debug_assert!(factorization.depth <= depth, "factor count exceeds requested depth");
    let masks = pad_with_deltas(&factorization.masks, depth);

    let config = NetworkConfig::new(d, s, depth);
    let b_ledger = norm_ledger(&masks, domain_bound);
    let biases = build_biases(&masks, &config, &b_ledger, ridge)?;
    let output_coeffs = realize_output_coeffs(&config, &b_ledger, ridge)?;
    let layers = masks
        .into_iter()
        .zip(biases)
        .map(|(mask, bias)| Layer { mask, bias })
        .collect();
    DeepCnn::new(config, layers, output_coeffs, b_ledger)
}

/// Closed form for the free-parameter count of this architecture:
/// `(5s + 2) J + 2d - 2s - 1`.
pub fn free_parameter_formula(s: usize, d: usize, depth: usize) -> usize {
    (5 * s + 2) * depth + 2 * d - 2 * s - 1
}

/// Counts free parameters by enumerating structural slots: `s + 1` mask
/// entries per layer; `2s + 1` bias slots per hidden layer (first `s`, one
/// repeated middle value, last `s`); a full bias vector on the last layer;
/// and a full readout vector. Errors if a hidden bias lacks the repeated
/// middle that justifies counting it as one slot.
pub fn count_free_parameters<T: Real>(net: &DeepCnn<T>) -> Result<usize> {
    let config = net.config();
    let s = config.s;
    let mut count = 0;
    for (j, layer) in net.layers().iter().enumerate() {
        count += s + 1;
        let is_hidden = j + 1 < config.depth;
        if is_hidden {
            if !layer.bias.structured || !layer.bias.has_repeated_middle(s) {
                return Err(Error::UnstructuredBias { layer: j + 1 });
            }
            count += 2 * s + 1;
        } else {
            count += layer.bias.entries.len();
        }
    }
    count += net.output_coeffs().len();
    Ok(count)
}

/// Largest magnitude appearing in the realization of `ridge` by `net` at
/// `x`: used as the scale for exactness comparisons.
pub fn realization_scale<T: Real>(net: &DeepCnn<T>, values: &[T]) -> T {
    scale_of(values).max(scale_of(net.b_ledger()))
}
