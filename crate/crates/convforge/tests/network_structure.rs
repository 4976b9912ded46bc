//! Structural checks on built networks: affine closed forms for hidden
//! layers, the final-layer component pattern, and exact realization of the
//! ridge expansion the network was built from.

use convforge::approx::{admissible_ramp_count, fit_ridge, TargetFunction};
use convforge::network::{build_network, stack_ridge_directions, DeepCnn, RidgeExpansion};
use convforge::rng::stream;
use convforge::signal::{big_toeplitz, matrix_chain_product};
use rand::Rng;

const CASES: [(usize, usize, u64); 4] =
    [(2, 2, 11), (3, 2, 12), (4, 3, 13), (5, 4, 14)];

fn target(seed: u64) -> TargetFunction<f64> {
    match seed % 3 {
        0 => TargetFunction::named("gaussian").unwrap(),
        1 => TargetFunction::named("quadratic").unwrap(),
        _ => TargetFunction::named("cosine-ridge").unwrap(),
    }
}

fn built_case(d: usize, s: usize, seed: u64) -> (RidgeExpansion<f64>, DeepCnn<f64>) {
    let depth = (4 * d).div_ceil(s - 1);
    let m = admissible_ramp_count(d, s, depth).unwrap();
    let ridge = fit_ridge(&target(seed), d, m, seed);
    let net = build_network(&ridge, s, depth, 1.0).unwrap();
    (ridge, net)
}

fn random_point(d: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn hidden_layers_are_affine_in_the_input() {
    for (d, s, seed) in CASES {
        let (_, net) = built_case(d, s, seed);
        let masks = net.masks();
        let ledger = net.b_ledger();
        let mut rng = stream(seed, 90);
        for _ in 0..25 {
            let x = random_point(d, &mut rng);
            let pass = net.forward(&x);
            for j in 1..net.config().depth {
                let chain = matrix_chain_product(&masks[..j], d, s).unwrap();
                let h = &pass.activations[j - 1];
                assert_eq!(h.len(), d + j * s, "width law");
                let tol = 1e-9 * ledger[j].max(1.0);
                for (l, &hl) in h.iter().enumerate() {
                    let affine: f64 = (0..d).map(|k| chain[[l, k]] * x[k]).sum::<f64>()
                        + ledger[j];
                    assert!(hl >= 0.0, "hidden activations stay nonnegative");
                    assert!(
                        (hl - affine).abs() <= tol,
                        "layer {j} entry {l}: {hl} vs affine {affine}"
                    );
                    // The offset dominates the signal on the whole domain.
                    let signal: f64 = (0..d).map(|k| chain[[l, k]] * x[k]).sum();
                    assert!(signal.abs() <= ledger[j] * (1.0 + 1e-12));
                }
            }
        }
    }
}

#[test]
fn final_layer_shows_linear_ramp_and_constant_channels() {
    for (d, s, seed) in CASES {
        let (ridge, net) = built_case(d, s, seed);
        let depth = net.config().depth;
        let width = d + depth * s;
        let b_last = net.b_ledger()[depth];
        let m = ridge.m();
        let mut rng = stream(seed, 91);
        for _ in 0..25 {
            let x = random_point(d, &mut rng);
            let h = net.forward(&x).activations[depth - 1].clone();
            assert_eq!(h.len(), width);
            let tol = 1e-9 * b_last.max(1.0);
            for (idx, &hl) in h.iter().enumerate() {
                let l = idx + 1;
                let want = if l == d {
                    let linear: f64 = ridge.alpha0.iter().zip(&x).map(|(a, xi)| a * xi).sum();
                    linear + b_last
                } else if l == width {
                    b_last
                } else if l % d == 0 && l / d >= 2 && l / d <= m + 1 {
                    let term = &ridge.terms[l / d - 2];
                    let u: f64 =
                        term.alpha.iter().zip(&x).map(|(a, xi)| a * xi).sum::<f64>() - term.t;
                    u.max(0.0)
                } else {
                    0.0
                };
                assert!(
                    (hl - want).abs() <= tol,
                    "component {l} of {width}: {hl} vs {want}"
                );
            }
        }
    }
}

#[test]
fn network_output_equals_the_expansion() {
    for (d, s, seed) in CASES {
        let (ridge, net) = built_case(d, s, seed);
        let scale = net.b_ledger().iter().fold(1.0_f64, |a, b| a.max(*b));
        let mut rng = stream(seed, 92);
        for _ in 0..200 {
            let x = random_point(d, &mut rng);
            let got = net.evaluate(&x);
            let want = ridge.evaluate(&x);
            assert!(
                (got - want).abs() <= 1e-9 * scale.max(want.abs()),
                "deviation {} at {:?}",
                (got - want).abs(),
                x
            );
        }
    }
}

#[test]
fn stacked_mask_rows_recover_every_direction() {
    for (d, s, seed) in CASES {
        let (ridge, _) = built_case(d, s, seed);
        let w = stack_ridge_directions(&ridge);
        let m = ridge.m();
        let rows = (m + 2) * d;
        let big = big_toeplitz(&w, d, rows).unwrap();
        for k in 0..=m {
            let alpha = if k == 0 { &ridge.alpha0 } else { &ridge.terms[k - 1].alpha };
            // Row (k+1)d holds alpha_k reversed into mask order.
            let row = (k + 1) * d - 1;
            for (i, &a) in alpha.iter().enumerate() {
                assert_eq!(big.entries()[[row, i]], a, "row {row} col {i}");
            }
        }
    }
}

#[test]
fn chain_product_of_network_masks_is_the_stacked_mask() {
    for (d, s, seed) in CASES {
        let (ridge, net) = built_case(d, s, seed);
        let w = stack_ridge_directions(&ridge);
        let depth = net.config().depth;
        let chain = matrix_chain_product(&net.masks(), d, s).unwrap();
        let big = big_toeplitz(&w, d, d + depth * s).unwrap();
        let scale = chain.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        for l in 0..chain.nrows() {
            for k in 0..d {
                assert!(
                    (chain[[l, k]] - big.entries()[[l, k]]).abs() <= 1e-10 * scale,
                    "entry ({l}, {k})"
                );
            }
        }
    }
}
