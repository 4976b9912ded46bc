//! Simultaneous refinement of all complex roots of a real polynomial.
//!
//! The solver is the Ehrlich-Aberth iteration: every root estimate moves by a
//! Newton step corrected for the repulsion of the other estimates, so the
//! estimates converge together instead of being deflated one at a time.
//! Deflation is avoided deliberately; it compounds coefficient error on the
//! high-degree inputs the factorizer produces.
//!
//! Convergence is judged by the relative residual
//! `|p(z)| / sum_k |a_k| |z|^k`, the natural backward-error measure: a point
//! with residual below machine precision is an exact root of a polynomial
//! whose coefficients differ only in their last bits.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Iteration cap for the simultaneous phase.
pub(crate) const MAX_ITERATIONS: u32 = 500;

/// Newton polish steps applied per root after the simultaneous phase.
const POLISH_STEPS: u32 = 20;

#[derive(Debug)]
pub(crate) struct RootSet<T> {
    pub roots: Vec<Complex<T>>,
    pub iterations: u32,
    pub worst_residual: T,
}

/// All complex roots of `sum_k coeffs[k] z^k`, multiplicity included.
///
/// `coeffs` must have a nonzero leading coefficient and degree at least 1.
/// Roots at the origin are read off exactly from the leading zero
/// coefficients before any iteration starts.
pub(crate) fn all_roots<T: Real>(coeffs: &[T], tol: T) -> Result<RootSet<T>> {
    let n = coeffs.len() - 1;
    debug_assert!(n >= 1, "degree must be at least 1");
    debug_assert!(coeffs[n] != T::zero(), "leading coefficient must be nonzero");

    let at_origin = coeffs
        .iter()
        .position(|c| *c != T::zero())
        .expect("leading coefficient is nonzero");
    let mut roots = vec![Complex::new(T::zero(), T::zero()); at_origin];
    let reduced = &coeffs[at_origin..];

    let mut set = solve_reduced(reduced, tol)?;
    roots.append(&mut set.roots);
    Ok(RootSet { roots, iterations: set.iterations, worst_residual: set.worst_residual })
}

/// Roots of a polynomial with nonzero constant and leading coefficients.
fn solve_reduced<T: Real>(coeffs: &[T], tol: T) -> Result<RootSet<T>> {
    let q = coeffs.len() - 1;
    match q {
        0 => Ok(RootSet { roots: vec![], iterations: 0, worst_residual: T::zero() }),
        1 => {
            let root = Complex::new(-coeffs[0] / coeffs[1], T::zero());
            Ok(RootSet { roots: vec![root], iterations: 0, worst_residual: T::zero() })
        }
        2 => Ok(RootSet {
            roots: quadratic_roots(coeffs[0], coeffs[1], coeffs[2]),
            iterations: 0,
            worst_residual: T::zero(),
        }),
        _ => aberth(coeffs, tol),
    }
}

/// Roots of `c + b z + a z^2` without cancellation in the small root.
fn quadratic_roots<T: Real>(c: T, b: T, a: T) -> Vec<Complex<T>> {
    let two = T::of(2.0);
    let disc = b * b - T::of(4.0) * a * c;
    if disc >= T::zero() {
        let sd = disc.sqrt();
        let q = if b >= T::zero() { -(b + sd) / two } else { -(b - sd) / two };
        let r1 = q / a;
        let r2 = if q != T::zero() { c / q } else { T::zero() };
        vec![Complex::new(r1, T::zero()), Complex::new(r2, T::zero())]
    } else {
        let re = -b / (two * a);
        let im = (-disc).sqrt() / (two * a).abs();
        vec![Complex::new(re, im), Complex::new(re, -im)]
    }
}

fn aberth<T: Real>(coeffs: &[T], tol: T) -> Result<RootSet<T>> {
    let q = coeffs.len() - 1;
    // Normalizing by the largest coefficient keeps Horner sums in range
    // without moving the roots.
    let big = coeffs.iter().fold(T::zero(), |acc, c| acc.max(c.abs()));
    let c: Vec<T> = coeffs.iter().map(|&a| a / big).collect();

    let mut z = initial_guesses(&c);
    let mut iterations = 0;
    let eps = T::epsilon();

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut max_step = T::zero();
        let mut all_within_tol = true;

        for i in 0..z.len() {
            let (p, dp) = eval_with_derivative(&c, z[i]);
            let denom = residual_denominator(&c, z[i].norm());
            if p.norm() > tol * denom {
                all_within_tol = false;
            } else {
                continue;
            }
            let w = if dp.norm() == T::zero() {
                // Stationary point of p; shove the estimate off it.
                Complex::from_polar(T::of(1e-3) * (T::one() + z[i].norm()), T::of(0.7))
            } else {
                p / dp
            };
            let mut repulsion = Complex::new(T::zero(), T::zero());
            for (j, &other) in z.iter().enumerate() {
                if j != i {
                    repulsion += (z[i] - other).inv();
                }
            }
            let correction_denom = Complex::new(T::one(), T::zero()) - w * repulsion;
            let step = if correction_denom.norm() == T::zero() { w } else { w / correction_denom };
            z[i] -= step;
            max_step = max_step.max(step.norm());
        }

        if all_within_tol {
            break;
        }
        // Stagnation at machine precision; polishing decides the verdict.
        if max_step <= eps * T::of(4.0) {
            break;
        }
    }

    let mut worst = T::zero();
    for zi in z.iter_mut() {
        *zi = polish(&c, *zi);
        if !zi.re.is_finite() || !zi.im.is_finite() {
            return Err(Error::DidNotConverge {
                iterations,
                worst_residual: f64::INFINITY,
            });
        }
        let (p, _) = eval_with_derivative(&c, *zi);
        worst = worst.max(p.norm() / residual_denominator(&c, zi.norm()));
    }
    if worst > tol {
        return Err(Error::DidNotConverge { iterations, worst_residual: worst.as_f64() });
    }
    debug_assert_eq!(z.len(), q);
    Ok(RootSet { roots: z, iterations, worst_residual: worst })
}

/// Starting points on a logarithmic spiral through the annulus that Cauchy's
/// bounds guarantee contains every root. The golden-angle spacing keeps the
/// guesses distinct and off the real axis for any degree.
fn initial_guesses<T: Real>(c: &[T]) -> Vec<Complex<T>> {
    let q = c.len() - 1;
    let lead = c[q].abs();
    let constant = c[0].abs();
    let mut interior = T::zero();
    for k in 0..q {
        interior = interior.max(c[k].abs());
    }
    let mut tail = T::zero();
    for k in 1..=q {
        tail = tail.max(c[k].abs());
    }
    let upper = T::one() + interior / lead;
    let lower = constant / (constant + tail);
    let golden = T::of(0.618_033_988_749_894_9);
    let tau = T::of(2.0) * T::PI();

    (0..q)
        .map(|i| {
            let frac = (T::from_usize(i).unwrap() + T::of(0.5)) / T::from_usize(q).unwrap();
            let radius = lower * (upper / lower).powf(frac);
            let turns = T::from_usize(i).unwrap() * golden;
            let angle = tau * (turns - turns.floor()) + T::of(0.35);
            Complex::from_polar(radius, angle)
        })
        .collect()
}

/// Newton steps that only move while the relative residual improves.
fn polish<T: Real>(c: &[T], start: Complex<T>) -> Complex<T> {
    let mut best = start;
    let (p0, _) = eval_with_derivative(c, start);
    let mut best_res = p0.norm() / residual_denominator(c, start.norm());
    let mut z = start;
    for _ in 0..POLISH_STEPS {
        let (p, dp) = eval_with_derivative(c, z);
        if dp.norm() == T::zero() {
            break;
        }
        z -= p / dp;
        let (pn, _) = eval_with_derivative(c, z);
        let res = pn.norm() / residual_denominator(c, z.norm());
        if res < best_res {
            best_res = res;
            best = z;
        } else {
            break;
        }
    }
    best
}

/// Horner evaluation of `p` and `p'` in one sweep.
pub(crate) fn eval_with_derivative<T: Real>(c: &[T], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let n = c.len() - 1;
    let mut p = Complex::new(c[n], T::zero());
    let mut dp = Complex::new(T::zero(), T::zero());
    for k in (0..n).rev() {
        dp = dp * z + p;
        p = p * z + Complex::new(c[k], T::zero());
    }
    (p, dp)
}

/// `sum_k |c_k| r^k`, the scale against which `|p(z)|` is judged.
pub(crate) fn residual_denominator<T: Real>(c: &[T], r: T) -> T {
    let mut acc = T::zero();
    for &ck in c.iter().rev() {
        acc = acc * r + ck.abs();
    }
    acc
}
