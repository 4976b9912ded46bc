//! Approximation studies: named target functions, least-squares ridge
//! fitting, and sup-norm error measurement as network depth grows.
//!
//! The fitting route is deliberately plain. A fixed-size pool of candidate
//! ramps is drawn from one seeded stream (directions uniform on the l1
//! sphere, thresholds uniform on `[0, 1]`), greedy forward selection keeps
//! the `m` candidates most correlated with the running residual, and least
//! squares solves the ramp weights; the constant and linear parts are pinned
//! to the target's value and gradient at the origin. Because the pool and
//! the selection order do not depend on `m`, the terms for `m` ramps are a
//! prefix of the terms for any larger `m` and the model classes are nested.

use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{
    build_network, free_parameter_formula, DeepCnn, RidgeExpansion, RidgeTerm,
};
use crate::rng::{stream, tag};
use crate::scalar::Real;

/// Named target function over `[-1, 1]^d`.
#[derive(Clone)]
pub struct TargetFunction<T> {
    descriptor: String,
    eval: Arc<dyn Fn(&[T]) -> T + Send + Sync>,
}

impl<T> fmt::Debug for TargetFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetFunction").field("descriptor", &self.descriptor).finish()
    }
}

impl<T: Real> TargetFunction<T> {
    /// Registry lookup. Known names: `gaussian` (`exp(-|x|^2)`), `quadratic`
    /// (`|x|^2`), and `cosine-ridge` (`cos(pi * mean(x))`).
    pub fn named(name: &str) -> Result<Self> {
        let eval: Arc<dyn Fn(&[T]) -> T + Send + Sync> = match name {
            "gaussian" => Arc::new(|x: &[T]| {
                let sq = x.iter().fold(T::zero(), |a, v| a + *v * *v);
                (-sq).exp()
            }),
            "quadratic" => Arc::new(|x: &[T]| x.iter().fold(T::zero(), |a, v| a + *v * *v)),
            "cosine-ridge" => Arc::new(|x: &[T]| {
                let n = T::from_usize(x.len().max(1)).unwrap();
                let mean = x.iter().fold(T::zero(), |a, v| a + *v) / n;
                (T::PI() * mean).cos()
            }),
            _ => return Err(Error::UnknownTarget(name.to_string())),
        };
        Ok(TargetFunction { descriptor: name.to_string(), eval })
    }

    /// Target from an arbitrary closure, mainly for tests.
    pub fn custom(
        descriptor: impl Into<String>,
        eval: impl Fn(&[T]) -> T + Send + Sync + 'static,
    ) -> Self {
        TargetFunction { descriptor: descriptor.into(), eval: Arc::new(eval) }
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn evaluate(&self, x: &[T]) -> T {
        (self.eval)(x)
    }
}

/// Evaluation grid description; serialized into reports so a result names
/// the exact points it was measured on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    Tensor { points_per_axis: usize },
    LatinHypercube { samples: usize, seed: u64 },
}

/// Row of a rate study: sup-norm error of the depth-`J` network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport<T> {
    pub sup_error: T,
    pub grid_spec: GridSpec,
    #[serde(rename = "J")]
    pub depth: usize,
    pub param_count: usize,
}

/// Points of `spec` in `[-1, 1]^d`.
pub fn generate_grid<T: Real>(d: usize, spec: &GridSpec) -> Vec<Vec<T>> {
    match spec {
        GridSpec::Tensor { points_per_axis } => tensor_grid(d, *points_per_axis),
        GridSpec::LatinHypercube { samples, seed } => {
            latin_hypercube(d, *samples, &mut stream(*seed, tag::EVAL_GRID))
        }
    }
}

/// Full tensor grid with `per_axis` evenly spaced values per coordinate.
pub fn tensor_grid<T: Real>(d: usize, per_axis: usize) -> Vec<Vec<T>> {
    assert!(per_axis >= 1, "grid needs at least one point per axis");
    let axis: Vec<T> = if per_axis == 1 {
        vec![T::zero()]
    } else {
        (0..per_axis)
            .map(|i| T::of(-1.0 + 2.0 * i as f64 / (per_axis - 1) as f64))
            .collect()
    };
    let total = per_axis.pow(d as u32);
    let mut points = Vec::with_capacity(total);
    let mut index = vec![0usize; d];
    for _ in 0..total {
        points.push(index.iter().map(|&i| axis[i]).collect());
        for slot in (0..d).rev() {
            index[slot] += 1;
            if index[slot] < per_axis {
                break;
            }
            index[slot] = 0;
        }
    }
    points
}

/// Latin hypercube sample: each coordinate is stratified into `samples`
/// bins, each bin hit exactly once, with uniform jitter inside the bin.
pub fn latin_hypercube<T: Real>(d: usize, samples: usize, rng: &mut impl Rng) -> Vec<Vec<T>> {
    let perms: Vec<Vec<usize>> = (0..d)
        .map(|_| {
            let mut p: Vec<usize> = (0..samples).collect();
            p.shuffle(rng);
            p
        })
        .collect();
    (0..samples)
        .map(|i| {
            (0..d)
                .map(|dim| {
                    let u: f64 = rng.random();
                    T::of(-1.0 + 2.0 * (perms[dim][i] as f64 + u) / samples as f64)
                })
                .collect()
        })
        .collect()
}

/// Largest ramp count a depth-`J` network can carry: `floor((s-1)J/d) - 1`.
/// Depths too shallow for even one ramp are rejected with the minimal
/// admissible depth.
pub fn admissible_ramp_count(d: usize, s: usize, depth: usize) -> Result<usize> {
    if s < 2 {
        return Err(Error::FilterLengthTooSmall { s });
    }
    if s > d {
        return Err(Error::FilterLengthExceedsDimension { s, d });
    }
    let q = (s - 1) * depth / d;
    if q < 2 {
        let minimal = (2 * d).div_ceil(s - 1);
        return Err(Error::DepthTooSmall { depth, minimal });
    }
    Ok(q - 1)
}

/// Fits a ramp-ridge expansion with `m` terms to `target` on `[-1, 1]^d`.
///
/// The constant is `target(0)`, the linear part the central-difference
/// gradient at the origin. Ramps are the `m` pool candidates picked by
/// greedy forward selection against the training residual; least squares
/// then solves the weights, folded into the `(v, beta_k)` normalization.
pub fn fit_ridge<T: Real>(
    target: &TargetFunction<T>,
    d: usize,
    m: usize,
    seed: u64,
) -> RidgeExpansion<T> {
    let beta0 = target.evaluate(&vec![T::zero(); d]);
    let h = T::of(1e-5);
    let mut alpha0 = Vec::with_capacity(d);
    let mut probe = vec![T::zero(); d];
    for i in 0..d {
        probe[i] = h;
        let up = target.evaluate(&probe);
        probe[i] = -h;
        let down = target.evaluate(&probe);
        probe[i] = T::zero();
        alpha0.push((up - down) / (h + h));
    }

    if m == 0 {
        return RidgeExpansion::new(beta0, alpha0, T::one(), vec![])
            .expect("trivial expansion is valid");
    }

    let pool_size = CANDIDATE_POOL.max(m);
    let mut rng = stream(seed, tag::RIDGE_DIRECTIONS);
    let mut directions = Vec::with_capacity(pool_size);
    let mut thresholds = Vec::with_capacity(pool_size);
    for _ in 0..pool_size {
        directions.push(sample_l1_direction::<T>(d, &mut rng));
        let u: f64 = rng.random();
        thresholds.push(T::of(u));
    }

    let train = latin_hypercube::<T>(d, FIT_SAMPLES, &mut stream(seed, tag::FIT_POINTS));
    let mut wanted = Vec::with_capacity(train.len());
    for x in &train {
        let linear = alpha0.iter().zip(x).fold(beta0, |a, (c, xi)| a + *c * *xi);
        wanted.push(target.evaluate(x) - linear);
    }
    // One feature column per candidate: relu(alpha_p . x_n - t_p).
    let columns: Vec<Vec<T>> = directions
        .iter()
        .zip(&thresholds)
        .map(|(alpha, t)| {
            train
                .iter()
                .map(|x| {
                    let u = alpha.iter().zip(x).fold(-*t, |a, (c, xi)| a + *c * *xi);
                    u.max(T::zero())
                })
                .collect()
        })
        .collect();

    // Greedy forward selection: each step keeps the candidate with the
    // largest normalized correlation against the current residual, then
    // re-solves the weights on everything selected so far. Ties and scores
    // are compared strictly, so the sequence is deterministic, and it does
    // not depend on m, so smaller fits are prefixes of larger ones.
    let mut selected: Vec<usize> = Vec::with_capacity(m);
    let mut gamma: Vec<T> = Vec::new();
    let mut residual = wanted.clone();
    while selected.len() < m {
        let mut best: Option<(usize, T)> = None;
        for (p, column) in columns.iter().enumerate() {
            if selected.contains(&p) {
                continue;
            }
            let mut corr = T::zero();
            let mut norm_sq = T::zero();
            for (v, r) in column.iter().zip(&residual) {
                corr += *v * *r;
                norm_sq += *v * *v;
            }
            if norm_sq == T::zero() {
                continue;
            }
            let score = corr * corr / norm_sq;
            if best.map_or(true, |(_, s)| score > s) {
                best = Some((p, score));
            }
        }
        let Some((pick, _)) = best else { break };
        selected.push(pick);
        let rows: Vec<Vec<T>> = (0..train.len())
            .map(|n| selected.iter().map(|&p| columns[p][n]).collect())
            .collect();
        gamma = least_squares(&rows, &wanted, selected.len());
        for (n, r) in residual.iter_mut().enumerate() {
            let fit = selected
                .iter()
                .zip(&gamma)
                .fold(T::zero(), |acc, (&p, g)| acc + columns[p][n] * *g);
            *r = wanted[n] - fit;
        }
    }
    // Dead pool (all remaining columns identically zero): pad with unused
    // candidates at weight zero so the term count stays m.
    while selected.len() < m {
        let fill = (0..pool_size).find(|p| !selected.contains(p)).expect("pool >= m");
        selected.push(fill);
        gamma.push(T::zero());
    }

    let peak = gamma.iter().fold(T::zero(), |a, g| a.max(g.abs()));
    let m_t = T::from_usize(m).unwrap();
    let (v, betas): (T, Vec<T>) = if peak > T::zero() {
        let v = m_t * peak;
        let betas = gamma
            .iter()
            .map(|g| (*g * m_t / v).max(-T::one()).min(T::one()))
            .collect();
        (v, betas)
    } else {
        (T::one(), vec![T::zero(); m])
    };

    let terms = selected
        .into_iter()
        .zip(betas)
        .map(|(p, beta)| RidgeTerm { beta, alpha: directions[p].clone(), t: thresholds[p] })
        .collect();
    RidgeExpansion::new(beta0, alpha0, v, terms).expect("fitted expansion is valid")
}

/// Training sample count for the ridge fit.
const FIT_SAMPLES: usize = 2048;

/// Candidate ramps drawn per fit; fixed so the greedy selection sequence is
/// the same whichever m is requested.
const CANDIDATE_POOL: usize = 512;

/// Uniform draw from the unit l1 sphere: exponential magnitudes normalized
/// to unit sum, with independent signs.
fn sample_l1_direction<T: Real>(d: usize, rng: &mut impl Rng) -> Vec<T> {
    let mut mags = Vec::with_capacity(d);
    let mut signs = Vec::with_capacity(d);
    for _ in 0..d {
        let u: f64 = rng.random();
        mags.push(-(1.0 - u).ln());
        let su: f64 = rng.random();
        signs.push(if su < 0.5 { -1.0 } else { 1.0 });
    }
    let total: f64 = mags.iter().sum();
    if total == 0.0 {
        let mut alpha = vec![T::zero(); d];
        alpha[0] = T::one();
        return alpha;
    }
    let mut alpha: Vec<T> = mags
        .iter()
        .zip(&signs)
        .map(|(m, s)| T::of(s * m / total))
        .collect();
    let l1: T = alpha.iter().map(|a| a.abs()).sum();
    for a in alpha.iter_mut() {
        *a /= l1;
    }
    alpha
}

/// Ridge-regularized normal equations `(F'F + lambda I) gamma = F'r`,
/// solved by Gaussian elimination with partial pivoting. The regularization
/// is a hair above zero purely to keep degenerate feature sets solvable.
fn least_squares<T: Real>(features: &[Vec<T>], residual: &[T], m: usize) -> Vec<T> {
    let mut g = vec![vec![T::zero(); m]; m];
    let mut rhs = vec![T::zero(); m];
    for (row, r) in features.iter().zip(residual) {
        for i in 0..m {
            rhs[i] += row[i] * *r;
            for j in 0..m {
                g[i][j] += row[i] * row[j];
            }
        }
    }
    let peak_diag = (0..m).fold(T::zero(), |a, i| a.max(g[i][i]));
    let lambda = T::of(1e-10) * (T::one() + peak_diag);
    for (i, row) in g.iter_mut().enumerate() {
        row[i] += lambda;
    }

    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&a, &b| g[a][col].abs().partial_cmp(&g[b][col].abs()).unwrap())
            .unwrap();
        g.swap(col, pivot);
        rhs.swap(col, pivot);
        let p = g[col][col];
        for row in col + 1..m {
            let f = g[row][col] / p;
            for k in col..m {
                let upper = g[col][k];
                g[row][k] -= f * upper;
            }
            let r = rhs[col];
            rhs[row] -= f * r;
        }
    }
    let mut gamma = vec![T::zero(); m];
    for row in (0..m).rev() {
        let mut acc = rhs[row];
        for k in row + 1..m {
            acc -= g[row][k] * gamma[k];
        }
        gamma[row] = acc / g[row][row];
    }
    gamma
}

/// Largest deviation `|target - net|` over the points, evaluated on up to
/// `threads` worker threads. The maximum is order-independent, so the thread
/// count never changes the result.
pub fn sup_error<T: Real>(
    target: &TargetFunction<T>,
    net: &DeepCnn<T>,
    points: &[Vec<T>],
    threads: usize,
) -> T {
    fold_chunks(
        points,
        threads,
        |chunk| {
            chunk.iter().fold(T::zero(), |acc, x| {
                acc.max((target.evaluate(x) - net.evaluate(x)).abs())
            })
        },
        T::max,
        T::zero(),
    )
}

/// Largest deviation between the network and the expansion it claims to
/// realize, over seeded uniform samples of the network's domain
/// `max |x_i| <= B^(0)`. Returns the deviation and the largest `|F(x)|`
/// seen, the scale deviations are judged against.
pub fn realization_report<T: Real>(
    net: &DeepCnn<T>,
    ridge: &RidgeExpansion<T>,
    samples: usize,
    seed: u64,
    threads: usize,
) -> (T, T) {
    let d = net.config().d;
    let bound = net.b_ledger()[0];
    let mut rng = stream(seed, tag::VERIFY_POINTS);
    let points: Vec<Vec<T>> = (0..samples)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let u: f64 = rng.random();
                    T::of(-1.0 + 2.0 * u) * bound
                })
                .collect()
        })
        .collect();
    fold_chunks(
        &points,
        threads,
        |chunk| {
            chunk.iter().fold((T::zero(), T::zero()), |(dev, mag), x| {
                let want = ridge.evaluate(x);
                let got = net.evaluate(x);
                (dev.max((got - want).abs()), mag.max(want.abs()))
            })
        },
        |(d1, m1), (d2, m2)| (d1.max(d2), m1.max(m2)),
        (T::zero(), T::zero()),
    )
}

/// [`realization_report`] reduced to the deviation alone.
pub fn realization_error<T: Real>(
    net: &DeepCnn<T>,
    ridge: &RidgeExpansion<T>,
    samples: usize,
    seed: u64,
    threads: usize,
) -> T {
    realization_report(net, ridge, samples, seed, threads).0
}

/// Error decay study: for each depth, fit the largest admissible expansion,
/// build the network, and measure sup error on one shared seeded grid.
/// The same seed feeds every fit, so deeper rows extend shallower ones.
pub fn rate_study<T: Real>(
    target: &TargetFunction<T>,
    d: usize,
    s: usize,
    depths: &[usize],
    seed: u64,
    samples: usize,
    threads: usize,
) -> Result<Vec<ErrorReport<T>>> {
    let grid_spec = GridSpec::LatinHypercube { samples, seed };
    let points = generate_grid::<T>(d, &grid_spec);
    depths
        .iter()
        .map(|&depth| {
            let m = admissible_ramp_count(d, s, depth)?;
            let ridge = fit_ridge(target, d, m, seed);
            let net = build_network(&ridge, s, depth, T::one())?;
            let sup = sup_error(target, &net, &points, threads);
            Ok(ErrorReport {
                sup_error: sup,
                grid_spec: grid_spec.clone(),
                depth,
                param_count: free_parameter_formula(s, d, depth),
            })
        })
        .collect()
}

/// Splits `points` into at most `threads` contiguous chunks, maps each on
/// its own scoped thread, and merges with an associative operation.
fn fold_chunks<T, R, F, M>(points: &[Vec<T>], threads: usize, work: F, merge: M, init: R) -> R
where
    T: Real,
    R: Send,
    F: Fn(&[Vec<T>]) -> R + Sync,
    M: Fn(R, R) -> R,
{
    let threads = threads.max(1).min(points.len().max(1));
    if threads == 1 {
        return merge(init, work(points));
    }
    let chunk = points.len().div_ceil(threads);
    let work = &work;
    std::thread::scope(|scope| {
        let handles: Vec<_> = points
            .chunks(chunk)
            .map(|c| scope.spawn(move || work(c)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .fold(init, &merge)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_knows_its_targets() {
        let g = TargetFunction::<f64>::named("gaussian").unwrap();
        assert_eq!(g.evaluate(&[0.0, 0.0]), 1.0);
        assert!((g.evaluate(&[1.0, 0.0]) - (-1.0_f64).exp()).abs() < 1e-15);
        let q = TargetFunction::<f64>::named("quadratic").unwrap();
        assert_eq!(q.evaluate(&[0.5, -0.5]), 0.5);
        let c = TargetFunction::<f64>::named("cosine-ridge").unwrap();
        assert!((c.evaluate(&[1.0, 1.0]) + 1.0).abs() < 1e-15);
        assert_eq!(
            TargetFunction::<f64>::named("nope").unwrap_err(),
            Error::UnknownTarget("nope".into())
        );
    }

    #[test]
    fn tensor_grid_covers_corners() {
        let pts = tensor_grid::<f64>(2, 3);
        assert_eq!(pts.len(), 9);
        assert!(pts.contains(&vec![-1.0, -1.0]));
        assert!(pts.contains(&vec![1.0, 1.0]));
        assert!(pts.contains(&vec![0.0, 0.0]));
    }

    #[test]
    fn latin_hypercube_hits_every_stratum_once() {
        let mut rng = stream(3, tag::EVAL_GRID);
        let pts = latin_hypercube::<f64>(2, 16, &mut rng);
        assert_eq!(pts.len(), 16);
        for dim in 0..2 {
            let mut bins: Vec<usize> = pts
                .iter()
                .map(|p| (((p[dim] + 1.0) / 2.0) * 16.0).floor() as usize)
                .collect();
            bins.sort_unstable();
            assert_eq!(bins, (0..16).collect::<Vec<_>>());
        }
    }

    #[test]
    fn ramp_count_follows_depth() {
        assert_eq!(admissible_ramp_count(2, 2, 4).unwrap(), 1);
        assert_eq!(admissible_ramp_count(2, 2, 8).unwrap(), 3);
        assert_eq!(admissible_ramp_count(2, 2, 16).unwrap(), 7);
        assert_eq!(admissible_ramp_count(2, 2, 32).unwrap(), 15);
        assert_eq!(
            admissible_ramp_count(2, 2, 3).unwrap_err(),
            Error::DepthTooSmall { depth: 3, minimal: 4 }
        );
    }

    #[test]
    fn fitted_expansion_is_valid_and_deterministic() {
        let g = TargetFunction::<f64>::named("gaussian").unwrap();
        let a = fit_ridge(&g, 2, 4, 11);
        let b = fit_ridge(&g, 2, 4, 11);
        assert!(a.validate().is_ok());
        assert_eq!(a, b);
        let c = fit_ridge(&g, 2, 4, 12);
        assert_ne!(a, c);
    }

    #[test]
    fn candidate_streams_nest_across_m() {
        let g = TargetFunction::<f64>::named("gaussian").unwrap();
        let small = fit_ridge(&g, 3, 2, 7);
        let large = fit_ridge(&g, 3, 5, 7);
        for k in 0..2 {
            assert_eq!(small.terms[k].alpha, large.terms[k].alpha);
            assert_eq!(small.terms[k].t, large.terms[k].t);
        }
    }

    #[test]
    fn least_squares_recovers_exact_coefficients() {
        let features: Vec<Vec<f64>> = vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ];
        let residual = vec![2.0, -3.0, -1.0];
        let gamma = least_squares(&features, &residual, 2);
        assert!((gamma[0] - 2.0).abs() < 1e-6);
        assert!((gamma[1] + 3.0).abs() < 1e-6);
    }

    #[test]
    fn thread_count_does_not_change_sup_error() {
        let g = TargetFunction::<f64>::named("gaussian").unwrap();
        let ridge = fit_ridge(&g, 2, 3, 5);
        let net = build_network(&ridge, 2, 8, 1.0).unwrap();
        let points = generate_grid::<f64>(2, &GridSpec::LatinHypercube { samples: 64, seed: 5 });
        let single = sup_error(&g, &net, &points, 1);
        let multi = sup_error(&g, &net, &points, 4);
        assert_eq!(single, multi);
    }

    #[test]
    fn gradient_free_constant_target_degenerates_to_zero_stack() {
        let flat = TargetFunction::<f64>::custom("flat", |_| 1.0);
        let ridge = fit_ridge(&flat, 2, 0, 1);
        assert_eq!(ridge.alpha0, vec![0.0, 0.0]);
        assert_eq!(
            build_network(&ridge, 2, 4, 1.0).unwrap_err(),
            Error::ZeroSequence
        );
    }

    #[test]
    fn rate_study_rows_are_complete() {
        let g = TargetFunction::<f64>::named("gaussian").unwrap();
        let rows = rate_study(&g, 2, 2, &[4, 8], 1, 128, 1).unwrap();
        assert_eq!(rows.len(), 2);
        for (row, depth) in rows.iter().zip([4usize, 8]) {
            assert_eq!(row.depth, depth);
            assert_eq!(row.param_count, free_parameter_formula(2, 2, depth));
            assert!(row.sup_error.is_finite() && row.sup_error >= 0.0);
        }
    }
}
