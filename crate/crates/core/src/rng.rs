//! Seeded, stream-addressed sampling of standard complex Gaussians.
//!
//! A [`SeedLineage`] names one random stream by the triple
//! `(master_seed, sample_index, stream_tag)`. The triple is mixed through a
//! SplitMix64 chain into a 256-bit ChaCha8 key, so distinct triples give
//! statistically independent streams and the same triple always replays the
//! same bits, independent of thread scheduling.
//!
//! The complex-Gaussian transform is fixed for reproducibility:
//! each draw consumes exactly two `u64` words `x1, x2`,
//! maps them to `u1 = 1 - x1 * 2^-53` in `(0, 1]` and `u2 = x2 * 2^-53`
//! in `[0, 1)`, and applies Box-Muller:
//! `g1 = sqrt(-2 ln u1) cos(2 pi u2)`, `g2 = sqrt(-2 ln u1) sin(2 pi u2)`,
//! `zeta = (g1 + i g2) / sqrt(2)`. Then `E|zeta|^2 = 1` and `|zeta|^2`
//! is exactly `-ln u1 ~ Exp(1)`.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::profile::VarianceProfile;
use crate::series::{radius_for_order, SeriesSample, EPS_AMP_DEFAULT, EPS_PROB_DEFAULT};
use crate::Result;

/// Address of one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedLineage {
    pub master_seed: u64,
    pub sample_index: u64,
    pub stream_tag: u32,
}

impl SeedLineage {
    pub fn new(master_seed: u64, sample_index: u64, stream_tag: u32) -> Self {
        Self {
            master_seed,
            sample_index,
            stream_tag,
        }
    }

    /// Same master seed and tag, different sample index.
    pub fn with_index(self, sample_index: u64) -> Self {
        Self {
            sample_index,
            ..self
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream of standard complex Gaussians addressed by a lineage.
pub struct GaussianStream {
    rng: ChaCha8Rng,
}

impl GaussianStream {
    pub fn new(lineage: SeedLineage) -> Self {
        let mut state = lineage.master_seed;
        let mut key = [0u8; 32];
        // Mix the triple into the SplitMix64 state between output words.
        let words = [
            splitmix64(&mut state),
            {
                state ^= lineage.sample_index.wrapping_mul(0xA24B_AED4_963E_E407);
                splitmix64(&mut state)
            },
            {
                state ^= u64::from(lineage.stream_tag).wrapping_mul(0x9FB2_1C65_1E98_DF25);
                splitmix64(&mut state)
            },
            splitmix64(&mut state),
        ];
        for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        Self {
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    /// Uniform in `[0, 1)` from the top 53 bits of one `u64`.
    pub fn next_uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One standard complex Gaussian (density `exp(-|w|^2)/pi`).
    pub fn next_complex_gaussian(&mut self) -> Complex64 {
        let u1 = 1.0 - self.next_uniform(); // (0, 1]
        let u2 = self.next_uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        Complex64::new(radius * angle.cos(), radius * angle.sin()) * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// Draw the coefficient vector `c_k = zeta_k * a_k`, `k = 0..=order`.
pub fn draw_coefficients(
    profile: &VarianceProfile,
    order: usize,
    lineage: SeedLineage,
) -> Result<Vec<Complex64>> {
    let mut stream = GaussianStream::new(lineage);
    let mut coeffs = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let a = profile.value(k)?;
        coeffs.push(stream.next_complex_gaussian() * a);
    }
    Ok(coeffs)
}

/// Sample a truncated Gaussian Taylor series at a caller-chosen order.
/// The certified radius is the largest the default truncation targets
/// support at this order.
pub fn sample_coefficients(
    profile: &VarianceProfile,
    order: usize,
    lineage: SeedLineage,
) -> Result<SeriesSample> {
    let coeffs = draw_coefficients(profile, order, lineage)?;
    let r_valid = radius_for_order(order, EPS_AMP_DEFAULT, EPS_PROB_DEFAULT)?;
    SeriesSample::new(
        coeffs,
        r_valid,
        EPS_AMP_DEFAULT,
        EPS_PROB_DEFAULT,
        Some(lineage),
    )
}

/// Sample a series certified on the disk of radius `r` with the default
/// truncation targets; the order comes from the planner.
pub fn sample_gef(
    profile: &VarianceProfile,
    r: f64,
    lineage: SeedLineage,
) -> Result<SeriesSample> {
    let order = crate::series::truncation_order_for_profile(
        profile,
        r,
        EPS_AMP_DEFAULT,
        EPS_PROB_DEFAULT,
    )?;
    let coeffs = draw_coefficients(profile, order, lineage)?;
    SeriesSample::new(
        coeffs,
        r.max(1.0),
        EPS_AMP_DEFAULT,
        EPS_PROB_DEFAULT,
        Some(lineage),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;

    #[test]
    fn same_lineage_is_bit_identical() {
        let lineage = SeedLineage::new(42, 7, 1);
        let profile = VarianceProfile::constant_one();
        let a = draw_coefficients(&profile, 64, lineage).unwrap();
        let b = draw_coefficients(&profile, 64, lineage).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_streams_differ() {
        let profile = VarianceProfile::constant_one();
        let a = draw_coefficients(&profile, 8, SeedLineage::new(42, 7, 1)).unwrap();
        let b = draw_coefficients(&profile, 8, SeedLineage::new(42, 8, 1)).unwrap();
        let c = draw_coefficients(&profile, 8, SeedLineage::new(42, 7, 2)).unwrap();
        let d = draw_coefficients(&profile, 8, SeedLineage::new(43, 7, 1)).unwrap();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn modulus_squared_mean_is_one() {
        // E|zeta|^2 = 1; 1e5 draws within 3 stderr (Exp(1) has variance 1).
        let n = 100_000usize;
        let mut stream = GaussianStream::new(SeedLineage::new(1, 0, 0));
        let mean = (0..n)
            .map(|_| stream.next_complex_gaussian().norm_sqr())
            .sum::<f64>()
            / n as f64;
        let stderr = 1.0 / (n as f64).sqrt();
        assert!(
            (mean - 1.0).abs() <= 3.0 * stderr,
            "mean {mean} vs 1 +- {stderr}"
        );
    }

    #[test]
    fn modulus_squared_tail_matches_exponential() {
        // P{|zeta|^2 >= 2} = e^{-2}; empirical within 3 stderr on 1e5 draws.
        let n = 100_000usize;
        let mut stream = GaussianStream::new(SeedLineage::new(2, 0, 0));
        let hits = (0..n)
            .filter(|_| stream.next_complex_gaussian().norm_sqr() >= 2.0)
            .count();
        let p = hits as f64 / n as f64;
        let target = (-2.0f64).exp();
        let stderr = (target * (1.0 - target) / n as f64).sqrt();
        assert!((p - target).abs() <= 3.0 * stderr, "p {p} vs {target}");
    }

    #[test]
    fn component_variances_are_half() {
        let n = 100_000usize;
        let mut stream = GaussianStream::new(SeedLineage::new(3, 0, 0));
        let draws: Vec<Complex64> = (0..n).map(|_| stream.next_complex_gaussian()).collect();
        for pick in [0usize, 1] {
            let xs: Vec<f64> = draws
                .iter()
                .map(|z| if pick == 0 { z.re } else { z.im })
                .collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            // Var of squared component estimates: Var(g^2) = 2*(1/2)^2 = 1/2.
            let stderr = (0.5f64 / n as f64).sqrt();
            assert!(
                (var - 0.5).abs() <= 4.0 * stderr,
                "component {pick} variance {var}"
            );
        }
    }

    #[test]
    fn modulus_squared_ks_against_exp1() {
        let n = 10_000usize;
        let mut stream = GaussianStream::new(SeedLineage::new(4, 0, 0));
        let xs: Vec<f64> = (0..n)
            .map(|_| stream.next_complex_gaussian().norm_sqr())
            .collect();
        let p = stats::ks_test_continuous(&xs, |t| 1.0 - (-t).exp());
        assert!(p.p_value > 0.01, "KS p-value {}", p.p_value);
    }
}
