use supwave_core::ensemble::profile_pair;
use supwave_core::lp::lebesgue_norm;
use supwave_core::randomize::{draw_randomized_pair, RandomLaw, SeedSpec};
use supwave_core::solver::{
    energy, energy_derivative_residual, integrate, picard_solve, solve_truncated, Exponent, FreeWave, Integrator, NoForcing, PicardOptions,
    SolveOptions, SolverState,
};
use supwave_core::{CauchyPair, FourierField};

fn p4() -> Exponent {
    Exponent::new(4.0).unwrap()
}

/// Smooth data with a handful of low modes.
fn smooth_state(cutoff: usize, amp: f64) -> SolverState {
    let mut v = FourierField::zeros(cutoff);
    v.set_real_mode([1, 0, 0], amp, 0.0);
    v.set_real_mode([0, 1, 1], 0.5 * amp, -0.3 * amp);
    let mut vt = FourierField::zeros(cutoff);
    vt.set_real_mode([0, 0, 1], 0.7 * amp, 0.0);
    SolverState { t: 0.0, v, vt, p: p4(), truncation: None }
}

fn random_data(cutoff: usize, amplitude: f64, index: u64) -> CauchyPair {
    let base = profile_pair(cutoff, 0.9, 0.01, amplitude);
    draw_randomized_pair(&base, &RandomLaw::standard_gaussian(), &SeedSpec::new(3, index))
}

#[test]
fn unforced_energy_is_conserved() {
    let start = smooth_state(7, 0.5);
    let e0 = energy(&start).unwrap().total;
    let opts = SolveOptions { dt_max: 1e-3, record_stride: 20, ..Default::default() };
    let rec = integrate(start, &NoForcing { cutoff: 7 }, 0.5, &opts).unwrap();
    let drift = rec.rows.iter().map(|r| (r.energy.total - e0).abs() / e0).fold(0.0, f64::max);
    assert!(drift < 1e-6, "relative drift {drift:e}");
}

#[test]
fn unforced_flow_is_time_reversible() {
    let start = smooth_state(5, 0.8);
    let forcing = NoForcing { cutoff: 5 };
    let mut integ = Integrator::new(start.clone(), &forcing).unwrap();
    integ.advance(0.3, 30).unwrap();
    let mut back = integ.into_state();
    back.vt = back.vt.scale(-1.0);
    let mut integ = Integrator::new(back, &forcing).unwrap();
    integ.advance(0.3, 30).unwrap();
    let end = integ.into_state();
    assert!(end.v.max_abs_diff(&start.v) < 1e-12);
    assert!(end.vt.scale(-1.0).max_abs_diff(&start.vt) < 1e-12);
}

#[test]
fn truncation_above_the_lattice_changes_nothing() {
    let pair = random_data(4, 0.3, 0);
    let opts = SolveOptions { dt_max: 0.02, ..Default::default() };
    let cut = solve_truncated(&pair, Some(2.0 * 3f64.sqrt() * 4.0), p4(), 0.2, &opts).unwrap();
    let full = solve_truncated(&pair, None, p4(), 0.2, &opts).unwrap();
    assert_eq!(cut.last.v, full.last.v);
    assert_eq!(cut.rows, full.rows);
}

#[test]
fn potential_energy_bounds_the_lebesgue_norm() {
    // ‖v‖_{L^{p+1}} ≤ ((p+1)E)^{1/(p+1)}, with the norm from a finer grid
    // than the one the energy uses.
    let pair = random_data(5, 0.5, 1);
    let forcing = FreeWave::new(&pair, Some(3.0));
    let opts = SolveOptions { dt_max: 0.01, record_stride: 5, keep_states: true, lebesgue_norms: false };
    let rec = integrate(SolverState::zero(5, p4(), Some(3.0)), &forcing, 0.5, &opts).unwrap();
    for (row, state) in rec.rows.iter().zip(&rec.states) {
        let norm = lebesgue_norm(&state.v, 5.0, Some(32)).unwrap();
        let bound = (5.0f64 * row.energy.total).powf(0.2);
        assert!(norm <= bound * (1.0 + 1e-9), "t = {}: {norm} > {bound}", state.t);
    }
}

fn terminal(dt: f64, horizon: f64) -> SolverState {
    let pair = random_data(3, 1.0, 2);
    let opts = SolveOptions { dt_max: dt, record_stride: usize::MAX, lebesgue_norms: false, ..Default::default() };
    solve_truncated(&pair, None, p4(), horizon, &opts).unwrap().last
}

#[test]
fn strang_is_second_order() {
    let reference = terminal(0.000_625, 0.4);
    let errors: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&dt| terminal(dt, 0.4).h1_distance(&reference)).collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.2..=4.8).contains(&ratio), "errors {errors:?}");
    }
}

#[test]
fn energy_identity_residual_is_second_order_in_spacing() {
    let pair = random_data(3, 0.3, 4);
    let forcing = FreeWave::new(&pair, None);
    let dt = 1e-4;
    let residual = |stride: usize| {
        let opts = SolveOptions { dt_max: dt, record_stride: stride, keep_states: true, lebesgue_norms: false };
        let rec = integrate(SolverState::zero(3, p4(), None), &forcing, 0.4, &opts).unwrap();
        energy_derivative_residual(&rec, &forcing).unwrap()
    };
    let r: Vec<f64> = [400, 200, 100].iter().map(|&s| residual(s)).collect();
    for w in r.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.7..=2.3).contains(&order), "residuals {r:?}");
    }
}

#[test]
fn picard_fixed_point_matches_strang() {
    let pair = random_data(3, 0.5, 5);
    let forcing = FreeWave::new(&pair, None);
    let start = SolverState::zero(3, p4(), None);
    let opts = PicardOptions { steps: 64, tol: 1e-12, max_iter: 60 };
    let picard = picard_solve(&start, &forcing, 0.1, &opts).unwrap();
    let mut integ = Integrator::new(start, &forcing).unwrap();
    integ.advance(0.1, 64).unwrap();
    let strang = integ.into_state();
    let last = picard.states.last().unwrap();
    let gap = last.h1_distance(&strang);
    let dt = 0.1 / 64.0;
    assert!(gap <= 10.0 * (dt * dt + opts.tol) * strang.h1_norm().max(1.0), "gap {gap:e}");
    assert!(picard.contraction_factors().iter().all(|&f| f < 1.0));
}
