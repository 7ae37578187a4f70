//! Distributional invariants tying the modules together: translation
//! covariance of the centered argument increment, rotation invariance of
//! the count law, Gaussianity of translated coefficients, the
//! almost-independence demonstration, and a quadrature cross-check of the
//! coherent-state overlap.

use num_complex::Complex64;

use gef_core::almost_independence::{almost_independence_demo, DemoConfig};
use gef_core::par::map_indexed;
use gef_core::rng::{sample_gef, GaussianStream, SeedLineage};
use gef_core::series::truncation_order;
use gef_core::stats;
use gef_core::translation::{translate_sample, translation_matrix};
use gef_core::zeros::{arc_delta, count_zeros_winding, translated_arc_delta, Arc};
use gef_core::VarianceProfile;

#[test]
fn translated_coefficients_are_standard_gaussian() {
    // zeta_n(w) over independent samples: |zeta|^2 ~ Exp(1).
    let w = Complex64::new(1.5, 0.7);
    let n_pick = 3usize;
    let k_out = 16usize;
    let reach = w.norm() + (k_out as f64).sqrt();
    let k_in = truncation_order(reach, 1e-9, 1e-12).unwrap();
    let profile = VarianceProfile::constant_one();
    let lineage = SeedLineage::new(80, 0, 0);
    let n = 10_000usize;
    let draws: Vec<f64> = map_indexed(n, |i| {
        let s = sample_gef(
            &profile,
            (k_in as f64).sqrt(),
            lineage.with_index(i as u64),
        )
        .unwrap();
        let t = translate_sample(&s, w, k_out).unwrap();
        t.coefficients()[n_pick].norm_sqr()
    });
    let ks = stats::ks_test_continuous(&draws, |t| 1.0 - (-t).exp());
    assert!(ks.p_value > 0.01, "KS p = {}", ks.p_value);
}

#[test]
fn delta_is_translation_covariant() {
    // delta(f, I) = delta(T_w f, I - w) for w the arc center, within 1e-6.
    let profile = VarianceProfile::constant_one();
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    let mut rng = GaussianStream::new(SeedLineage::new(81, 999, 0));
    for i in 0..20 {
        let big_r = 2.0 + 2.0 * rng.next_uniform();
        let arc_len = 0.5 + 0.5 * rng.next_uniform();
        let span = arc_len / big_r;
        let theta0 = std::f64::consts::TAU * rng.next_uniform();
        let arc = Arc::new(big_r, theta0, theta0 + span).unwrap();
        let w = arc.center();

        let k_out = truncation_order(1.0, 1e-9, 1e-12).unwrap();
        let reach = w.norm() + (k_out as f64).sqrt();
        let sample = sample_gef(&profile, reach, SeedLineage::new(81, i, 0)).unwrap();

        let lhs = match arc_delta(&sample, &arc) {
            Ok(v) => v,
            Err(_) => continue, // zero grazes the contour; skip the draw
        };
        let translated = translate_sample(&sample, w, k_out).unwrap();
        let rhs = translated_arc_delta(&translated, &arc, w).unwrap();
        worst = worst.max((lhs - rhs).abs());
        checked += 1;
    }
    assert!(checked >= 15);
    assert!(worst < 1e-6, "worst deviation {worst:.3e}");
}

#[test]
fn count_law_is_rotation_invariant() {
    // Two-sample KS between n(R) of plain samples and of rotated samples
    // (disjoint seed ranges), R = 2.5.
    let r = 2.5f64;
    let profile = VarianceProfile::constant_one();
    let n = 4000usize;
    let lineage = SeedLineage::new(82, 0, 0);
    let theta = 1.234f64;
    let plain: Vec<f64> = map_indexed(n, |i| {
        let s = sample_gef(&profile, r, lineage.with_index(i as u64)).unwrap();
        count_zeros_winding(&s, r).unwrap().count as f64
    });
    let rotated: Vec<f64> = map_indexed(n, |i| {
        let s = sample_gef(&profile, r, lineage.with_index((n + i) as u64))
            .unwrap()
            .rotate(theta);
        count_zeros_winding(&s, r).unwrap().count as f64
    });
    let ks = stats::ks_test_two_sample(&plain, &rotated);
    assert!(ks.p_value > 0.01, "KS p = {}", ks.p_value);
}

#[test]
fn arc_delta_is_centered() {
    // E delta(f, I) = 0 for |I| = 1 arcs at R = 3, within 4 stderr.
    let r = 3.0f64;
    let arc = Arc::new(r, 0.2, 0.2 + 1.0 / r).unwrap();
    let profile = VarianceProfile::constant_one();
    let n = 10_000usize;
    let lineage = SeedLineage::new(83, 0, 0);
    let deltas: Vec<f64> = map_indexed(n, |i| {
        let s = sample_gef(&profile, r, lineage.with_index(i as u64)).unwrap();
        arc_delta(&s, &arc).unwrap()
    });
    let m = stats::mean_with_stderr(&deltas);
    assert!(
        m.mean.abs() <= 4.0 * m.stderr,
        "mean delta {} +- {}",
        m.mean,
        m.stderr
    );
}

#[test]
fn two_center_demo_keeps_remainders_under_threshold() {
    // Centers 30 apart, r = 2, rho = 2 (A = 6 keeps the guard disks
    // disjoint): remainder exceedances must be absent at this scale, and
    // the cross covariances sit under the Gaussian-decay envelope.
    let config = DemoConfig {
        centers: vec![(-15.0, 0.0), (15.0, 0.0)],
        r: 2.0,
        rho: 2.0,
        big_a: 6.0,
        n_trials: 1000,
    };
    let report = almost_independence_demo(&config, SeedLineage::new(84, 0, 0)).unwrap();
    assert_eq!(report.exceed_freq, 0.0, "{report:?}");
    assert!(report.sup_remainder_max < report.threshold);
    assert!(report.cross_cov_max <= report.cross_cov_bound);
    assert!(report.whitening_residual < 1e-10);
    assert!(report.delta_max < 1.0 / 3.0);
}

#[test]
fn coherent_overlap_matches_two_dimensional_quadrature() {
    // <T_{-w} e_0, T_{-w'} e_0> via a tensor Simpson rule over a box
    // against the column-dot route.
    let w1 = Complex64::new(0.0, 0.0);
    let w2 = Complex64::new(1.3, 0.0);
    let k_out = truncation_order(w2.norm() + 1.0, 1e-9, 1e-12).unwrap();
    let m1 = translation_matrix(w1, 0, k_out);
    let m2 = translation_matrix(w2, 0, k_out);
    let dot: Complex64 = (0..=k_out)
        .map(|n| m2.column(0)[n] * m1.column(0)[n].conj())
        .sum();

    // (1/pi) int conj(T_{-w1}e_0)(z) T_{-w2}e_0(z) ... as functions:
    // T_{-w}e_0(z) = e^{z conj(w) - |w|^2/2}; integrand against e^{-|z|^2}.
    let f = |z: Complex64| -> Complex64 {
        let a = (z * w2.conj() - Complex64::new(0.5 * w2.norm_sqr(), 0.0)).exp();
        let b = (z * w1.conj() - Complex64::new(0.5 * w1.norm_sqr(), 0.0)).exp();
        a * b.conj() * (-z.norm_sqr()).exp()
    };
    let l = 7.0f64;
    let n = 400usize; // even
    let h = 2.0 * l / n as f64;
    let weight = |i: usize| -> f64 {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..=n {
        let x = -l + i as f64 * h;
        for j in 0..=n {
            let y = -l + j as f64 * h;
            acc += f(Complex64::new(x, y)) * (weight(i) * weight(j));
        }
    }
    let quad = acc * (h / 3.0) * (h / 3.0) / std::f64::consts::PI;

    let closed = (-0.5 * (w1 - w2).norm_sqr()).exp();
    assert!(
        (dot.norm() - closed).abs() < 1e-10,
        "column dot {} vs closed form {closed}",
        dot.norm()
    );
    assert!(
        (quad.norm() - closed).abs() < 1e-6,
        "quadrature {} vs closed form {closed}",
        quad.norm()
    );
}

#[test]
fn banded_sampling_respects_profile_variances() {
    // Under gamma_a the band coordinates have variance a_k^2.
    let r = 4.0f64;
    let profile = VarianceProfile::jlm_banded(r, 0.75).unwrap();
    let (k_minus, a_sq_minus) = profile.tilted_indices()[0];
    let n = 20_000usize;
    let lineage = SeedLineage::new(85, 0, 0);
    let sq: Vec<f64> = map_indexed(n, |i| {
        let s = sample_gef(&profile, r, lineage.with_index(i as u64)).unwrap();
        s.coefficients()[k_minus].norm_sqr()
    });
    let m = stats::mean_with_stderr(&sq);
    assert!(
        (m.mean - a_sq_minus).abs() <= 4.0 * m.stderr,
        "band variance {} +- {} vs {}",
        m.mean,
        m.stderr,
        a_sq_minus
    );
}
