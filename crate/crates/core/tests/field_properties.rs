use proptest::prelude::*;
use supwave_core::ensemble::profile_pair;
use supwave_core::field::{nyquist_resolution, oversampled_resolution};
use supwave_core::lp::{grid_lebesgue_norm, project_leq, DyadicDecomposition};
use supwave_core::randomize::{draw_randomized_pair, RandomLaw, SeedSpec};
use supwave_core::{analyze, synthesize, FourierField};

fn random_field(cutoff: usize, seed: u64) -> FourierField {
    let base = profile_pair(cutoff, 0.5, 0.01, 1.0);
    draw_randomized_pair(&base, &RandomLaw::standard_gaussian(), &SeedSpec::new(seed, 0)).u0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn synthesize_then_analyze_is_identity(cutoff in 1usize..6, seed in any::<u64>(), oversample in any::<bool>()) {
        let f = random_field(cutoff, seed);
        let res = if oversample { oversampled_resolution(cutoff) } else { nyquist_resolution(cutoff) };
        let back = analyze(&synthesize(&f, res).unwrap(), cutoff).unwrap();
        prop_assert!(back.max_abs_diff(&f) < 1e-13);
    }

    #[test]
    fn rectangle_rule_reproduces_parseval(cutoff in 1usize..6, seed in any::<u64>()) {
        let f = random_field(cutoff, seed);
        let grid = synthesize(&f, nyquist_resolution(cutoff)).unwrap();
        let l2 = grid_lebesgue_norm(grid.values(), 2.0);
        prop_assert!((l2 - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn radial_multipliers_compose(cutoff in 1usize..6, seed in any::<u64>(), a in 0.1f64..3.0, b in -2.0f64..2.0) {
        let f = random_field(cutoff, seed);
        let sa = move |n: [i32; 3]| (1.0 + a * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) as f64).sqrt();
        let sb = move |n: [i32; 3]| (b * (n[0].abs() + n[1].abs() + n[2].abs()) as f64).cos();
        let two_steps = f.apply_multiplier(sa).unwrap().apply_multiplier(sb).unwrap();
        let one_step = f.apply_multiplier(move |n| sa(n) * sb(n)).unwrap();
        prop_assert!(two_steps.max_abs_diff(&one_step) < 1e-13);
    }

    #[test]
    fn dyadic_blocks_telescope(cutoff in 1usize..8, seed in any::<u64>()) {
        let f = random_field(cutoff, seed);
        let top = DyadicDecomposition::covering_level(cutoff);
        let sum = DyadicDecomposition::new(&f, top).sum().unwrap();
        prop_assert!(sum.max_abs_diff(&f) < 1e-13);
        prop_assert!(project_leq(&f, (1u64 << top) as f64).max_abs_diff(&f) == 0.0);
    }

    #[test]
    fn randomization_is_keyed_by_mode_not_cutoff(cutoff in 1usize..5, seed in any::<u64>(), index in 0u64..1000) {
        let base = profile_pair(cutoff, 0.9, 0.01, 1.0);
        let law = RandomLaw::rademacher();
        let key = SeedSpec::new(seed, index);
        let small = draw_randomized_pair(&base, &law, &key);
        let padded = draw_randomized_pair(&base.map(|f| f.with_cutoff(cutoff + 2)), &law, &key);
        prop_assert_eq!(padded.map(|f| f.with_cutoff(cutoff)), small);
    }
}

#[test]
fn randomizing_zero_data_gives_zero() {
    let zero = profile_pair(3, 0.9, 0.01, 0.0);
    let drawn = draw_randomized_pair(&zero, &RandomLaw::standard_gaussian(), &SeedSpec::new(5, 9));
    assert!(drawn.u0.is_zero() && drawn.u1.is_zero());
}

#[test]
fn rademacher_randomization_preserves_sobolev_norms() {
    // |±1| = 1 on every real-basis coefficient, so every H^σ norm is kept.
    let base = profile_pair(4, 0.9, 0.01, 1.0);
    for i in 0..10 {
        let drawn = draw_randomized_pair(&base, &RandomLaw::rademacher(), &SeedSpec::new(11, i));
        for sigma in [-1.0, 0.0, 0.9] {
            let (a, b) = (drawn.u0.sobolev_norm(sigma), base.u0.sobolev_norm(sigma));
            assert!((a - b).abs() <= 1e-13 * b);
        }
    }
}
