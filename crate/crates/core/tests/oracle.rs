use cvbroadcast::fock::{
    oracle_broadcast, oracle_phase_conjugate, oracle_purify, FockDensity, FockGate, OracleOptions,
    OracleReport,
};
use num_complex::Complex64;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn assert_copies(r: &OracleReport, nbar: f64, tol: f64) {
    for (i, copy) in r.copies.iter().enumerate() {
        let got = copy.stats.nbar_eff;
        assert!(
            (got - nbar).abs() <= tol,
            "copy {i}: nbar_eff {got}, want {nbar} ± {tol}"
        );
        assert!(
            (copy.stats.amplitude - r.predicted.amplitude).norm() <= r.amplitude_tolerance(),
            "copy {i}: amplitude {}",
            copy.stats.amplitude
        );
    }
    assert!(r.trace_deficit >= 0.0);
    assert!(
        r.trace_deficit <= r.predicted_tail,
        "deficit {} above predicted tails {}",
        r.trace_deficit,
        r.predicted_tail
    );
}

#[test]
fn broadcast_two_to_two() {
    let r = oracle_broadcast(2, 2, 0.5, c(0.3), &OracleOptions::with_cutoff(12)).unwrap();
    assert_copies(&r, 0.25, 2e-3);
    assert!(r.min_fidelity() >= 0.999);
}

#[test]
fn broadcast_two_to_three() {
    let r = oracle_broadcast(2, 3, 0.5, c(0.2), &OracleOptions::with_cutoff(10)).unwrap();
    assert_copies(&r, 0.5 / 2.0 + 1.0 / 6.0, 5e-3);
    assert!(r.min_fidelity() >= 0.999);
}

#[test]
fn coherent_cloning() {
    let r = oracle_broadcast(1, 2, 0.0, c(0.4), &OracleOptions::with_cutoff(10)).unwrap();
    assert_copies(&r, 0.5, 2e-3);
    assert!(r.min_fidelity() >= 0.999);
}

#[test]
fn purify_two_to_one() {
    let r = oracle_purify(2, 1, 1.0, c(0.3), &OracleOptions::with_cutoff(14)).unwrap();
    assert_copies(&r, 0.5, 2e-3);
    assert!(r.min_fidelity() >= 0.999);
}

#[test]
fn purify_three_to_one() {
    let r = oracle_purify(3, 1, 0.6, c(0.0), &OracleOptions::with_cutoff(10)).unwrap();
    assert_copies(&r, 0.2, 5e-3);
}

#[test]
fn purify_rate_independent_of_m() {
    let opts = OracleOptions::with_cutoff(14);
    let one = oracle_purify(2, 1, 1.0, c(0.0), &opts).unwrap();
    let two = oracle_purify(2, 2, 1.0, c(0.0), &opts).unwrap();
    assert_copies(&one, 0.5, 2e-3);
    assert_copies(&two, 0.5, 2e-3);
    let d = (one.copies[0].stats.nbar_eff - two.copies[1].stats.nbar_eff).abs();
    assert!(d < 2e-3, "{d}");
}

#[test]
fn purify_converges_with_cutoff() {
    let errors: Vec<f64> = [8, 10, 12]
        .iter()
        .map(|&d| {
            let opts = OracleOptions {
                deficit_budget: 1.0,
                ..OracleOptions::with_cutoff(d)
            };
            oracle_purify(2, 1, 0.5, c(0.3), &opts)
                .unwrap()
                .max_noise_error()
        })
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn phase_conjugation_two_to_one() {
    let opts = OracleOptions {
        samples: 100_000,
        ..OracleOptions::with_cutoff(12)
    };
    let r = oracle_phase_conjugate(2, 1, 1.0, c(0.3), &opts).unwrap();
    let copy = r.copies[0].stats;
    assert!((copy.noise_sum - 1.5).abs() < 0.01, "{}", copy.noise_sum);
    let sigma = r.amplitude_stderr.unwrap();
    assert!((copy.amplitude - c(0.3)).norm() < 3.0 * sigma);
}

#[test]
fn phase_conjugation_of_vacuum() {
    let opts = OracleOptions {
        samples: 100_000,
        ..OracleOptions::with_cutoff(12)
    };
    let r = oracle_phase_conjugate(1, 1, 0.0, c(0.0), &opts).unwrap();
    assert!((r.copies[0].stats.noise_sum - 1.5).abs() < 0.01);
}

#[test]
fn phase_conjugation_is_seed_reproducible() {
    let opts = OracleOptions {
        samples: 20_000,
        seed: 99,
        ..OracleOptions::with_cutoff(10)
    };
    let alpha = Complex64::new(0.2, -0.1);
    let a = oracle_phase_conjugate(2, 2, 0.5, alpha, &opts).unwrap();
    let b = oracle_phase_conjugate(2, 2, 0.5, alpha, &opts).unwrap();
    assert_eq!(a, b);
    let other = OracleOptions { seed: 100, ..opts };
    let c = oracle_phase_conjugate(2, 2, 0.5, alpha, &other).unwrap();
    assert_ne!(a.copies[0].stats, c.copies[0].stats);
}

#[test]
fn passive_beam_splitter_conserves_photon_number() {
    let d = 12;
    let rho = FockDensity::thermal(0.4, d)
        .unwrap()
        .apply(
            &FockGate::displacement(Complex64::new(0.3, 0.2), d).unwrap(),
            &[0],
        )
        .unwrap()
        .tensor(&FockDensity::thermal(0.2, d).unwrap());
    let before = rho.total_photon_number();
    for theta in [0.1, 0.7, 1.3] {
        let out = rho
            .apply(&FockGate::beam_splitter(theta, d).unwrap(), &[0, 1])
            .unwrap();
        let lost = out.trace_deficit() - rho.trace_deficit();
        let after = out.total_photon_number();
        // photons leave only with the probability pushed above the cutoff
        assert!((after - before).abs() <= 2.0 * d as f64 * lost.max(0.0) + 1e-12);
    }
}
