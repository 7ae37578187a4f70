//! Truncated Gaussian Taylor series: stable evaluation of
//! `f(z) = sum_{k<=K} c_k z^k / sqrt(k!)`, the normalized modulus
//! `f*(z) = |f(z)| e^{-|z|^2/2}`, and the truncation planner that certifies
//! how many terms are needed on a disk.
//!
//! # Truncation certificate
//!
//! For `k > r^2` the basis term satisfies
//! `max_{|z|<=r} |z|^k/sqrt(k!) e^{-|z|^2/2} <= e^{-(sqrt(k)-r)^2/2}`,
//! so with `S(K, r) = sum_{k>K} e^{-(sqrt(k)-r)^2/2}` the omitted tail of a
//! unit-variance Gaussian series obeys
//! `P{ sup_{|z|<=r} |tail| e^{-|z|^2/2} >= t } <= 2 e^{-(t/S)^2/2}`.
//! [`truncation_order`] returns the minimal `K >= ceil(r^2)` whose `S(K, r)`
//! drives that bound below the requested failure probability.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numeric::{Kahan, KahanComplex};
use crate::rng::SeedLineage;
use crate::{Error, Result};

/// Default certified amplitude for omitted tails.
pub const EPS_AMP_DEFAULT: f64 = 1e-9;
/// Default probability of the tail certificate failing.
pub const EPS_PROB_DEFAULT: f64 = 1e-12;
/// Largest certified radius the double-precision paths support.
pub const R_VALID_MAX: f64 = 34.0;

/// Serialize `Vec<Complex64>` as `[[re, im], ...]`.
mod serde_complex_vec {
    use super::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(pairs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect())
    }
}

/// One truncated series: coefficients `c_0..c_K` in the basis
/// `e_k(z) = z^k/sqrt(k!)`, a certified validity radius, and the tail
/// certificate `(eps_amp, eps_prob)` that holds on that disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesSample {
    #[serde(with = "serde_complex_vec")]
    coefficients: Vec<Complex64>,
    r_valid: f64,
    eps_amp: f64,
    eps_prob: f64,
    lineage: Option<SeedLineage>,
    #[serde(skip)]
    inv_sqrt: Vec<f64>,
}

/// `[1/sqrt(1), 1/sqrt(2), ..., 1/sqrt(order)]`.
pub(crate) fn inv_sqrt_table(order: usize) -> Vec<f64> {
    (1..=order).map(|k| 1.0 / (k as f64).sqrt()).collect()
}

/// `f(z) e^{-|z|^2/2}` by the scaled term recurrence
/// `t_0 = e^{-|z|^2/2}`, `t_{k+1} = t_k z / sqrt(k+1)`; every term stays in
/// `[e^{-|z|^2/2}, ~1]`, so nothing overflows for `|z| <= R_VALID_MAX`.
pub(crate) fn eval_normalized_raw(
    coefficients: &[Complex64],
    inv_sqrt: &[f64],
    z: Complex64,
) -> Complex64 {
    let mut term = Complex64::new((-0.5 * z.norm_sqr()).exp(), 0.0);
    let mut acc = KahanComplex::new();
    acc.add(coefficients[0] * term);
    for (k, c) in coefficients.iter().enumerate().skip(1) {
        term *= z * inv_sqrt[k - 1];
        acc.add(*c * term);
    }
    acc.value()
}

impl SeriesSample {
    /// General constructor. `r_valid` is the disk on which the caller
    /// certifies the omitted tail at `(eps_amp, eps_prob)`; sampling paths
    /// derive it from the truncation planner.
    pub fn new(
        coefficients: Vec<Complex64>,
        r_valid: f64,
        eps_amp: f64,
        eps_prob: f64,
        lineage: Option<SeedLineage>,
    ) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::precondition("series needs at least one coefficient"));
        }
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::precondition("series coefficients must be finite"));
        }
        if !(r_valid >= 0.0) || r_valid > R_VALID_MAX {
            return Err(Error::precondition(format!(
                "r_valid must lie in [0, {R_VALID_MAX}], got {r_valid}"
            )));
        }
        if !(eps_amp > 0.0 && eps_amp < 1.0 && eps_prob > 0.0 && eps_prob < 1.0) {
            return Err(Error::precondition(
                "eps_amp and eps_prob must lie in (0, 1)",
            ));
        }
        let inv_sqrt = inv_sqrt_table(coefficients.len().saturating_sub(1));
        Ok(Self {
            coefficients,
            r_valid,
            eps_amp,
            eps_prob,
            lineage,
            inv_sqrt,
        })
    }

    /// Exact polynomial in the `e_k` basis: the tail beyond the given
    /// coefficients is identically zero, so any radius up to the numeric cap
    /// is certified.
    pub fn from_coefficients(coefficients: Vec<Complex64>, r_valid: f64) -> Result<Self> {
        Self::new(coefficients, r_valid, 1e-300, 1e-300, None)
    }

    /// Rebuild the evaluation table after deserializing.
    pub fn rehydrate(&mut self) {
        if self.inv_sqrt.len() + 1 != self.coefficients.len() {
            self.inv_sqrt = inv_sqrt_table(self.coefficients.len() - 1);
        }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn r_valid(&self) -> f64 {
        self.r_valid
    }

    pub fn eps_amp(&self) -> f64 {
        self.eps_amp
    }

    pub fn eps_prob(&self) -> f64 {
        self.eps_prob
    }

    pub fn lineage(&self) -> Option<SeedLineage> {
        self.lineage
    }

    pub(crate) fn inv_sqrt(&self) -> &[f64] {
        &self.inv_sqrt
    }

    fn check_radius(&self, z: Complex64) -> Result<()> {
        let r = z.norm();
        // Tiny slack so points generated as R * e^{i theta} pass.
        if r > self.r_valid * (1.0 + 1e-12) + 1e-12 {
            return Err(Error::OutsideCertifiedRadius {
                actual: r,
                limit: self.r_valid,
            });
        }
        Ok(())
    }

    /// `f(z) e^{-|z|^2/2}` (complex-valued; same phase as `f`).
    pub fn evaluate_normalized(&self, z: Complex64) -> Result<Complex64> {
        self.check_radius(z)?;
        Ok(eval_normalized_raw(&self.coefficients, &self.inv_sqrt, z))
    }

    /// `f(z) = sum c_k z^k / sqrt(k!)`.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        let scaled = self.evaluate_normalized(z)?;
        Ok(scaled * (0.5 * z.norm_sqr()).exp())
    }

    /// `f*(z) = |f(z)| e^{-|z|^2/2}`.
    pub fn evaluate_star(&self, z: Complex64) -> Result<f64> {
        Ok(self.evaluate_normalized(z)?.norm())
    }

    /// New sample with `c_k <- c_k e^{i k theta}`; rotates the zero set by
    /// `theta` around the origin.
    pub fn rotate(&self, theta: f64) -> Self {
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(k, c)| c * Complex64::from_polar(1.0, k as f64 * theta))
            .collect();
        Self {
            coefficients,
            inv_sqrt: self.inv_sqrt.clone(),
            ..*self
        }
    }

    /// Upper bound for `max_{|z|<=r} |f'(z)| e^{-r^2/2}`:
    /// `sum_k |c_k| k r^{k-1}/sqrt(k!) e^{-r^2/2}`.
    pub fn derivative_bound_normalized(&self, r: f64) -> f64 {
        let mut u = (-0.5 * r * r).exp(); // r^k/sqrt(k!) e^{-r^2/2} at k=0
        let mut acc = Kahan::new();
        for (k, c) in self.coefficients.iter().enumerate().skip(1) {
            u *= r * self.inv_sqrt[k - 1];
            if r > 0.0 {
                acc.add(c.norm() * k as f64 * u / r);
            }
        }
        acc.value()
    }

    /// Upper bound for `max_{|z|<=r} |f'(z)|` (plain units).
    pub fn derivative_bound(&self, r: f64) -> f64 {
        self.derivative_bound_normalized(r) * (0.5 * r * r).exp()
    }
}

/// `S(K, r) = sum_{k>K} e^{-(sqrt(k)-r)^2/2}`, summed directly until the
/// terms underflow.
pub fn tail_weight_sum(order: usize, r: f64) -> f64 {
    let mut acc = Kahan::new();
    let mut k = order + 1;
    loop {
        let e = -0.5 * ((k as f64).sqrt() - r).powi(2);
        if e < -760.0 && k as f64 > r * r {
            break;
        }
        acc.add(e.exp());
        k += 1;
    }
    acc.value()
}

fn check_eps(eps_amp: f64, eps_prob: f64) -> Result<()> {
    if !(eps_amp > 0.0 && eps_amp < 1.0 && eps_prob > 0.0 && eps_prob < 1.0) {
        return Err(Error::precondition(
            "truncation targets must lie in (0, 1)",
        ));
    }
    Ok(())
}

fn truncation_order_with_threshold(r: f64, threshold: f64) -> Result<usize> {
    let r = r.max(1.0);
    if r > R_VALID_MAX {
        return Err(Error::Overflow(format!(
            "radius {r} beyond the double-precision budget ({R_VALID_MAX})"
        )));
    }
    let k_min = (r * r).ceil() as usize;
    let k_max = ((r + 42.0) * (r + 42.0)).ceil() as usize + 1;
    // Suffix sums of the per-term bounds, so tail(K) = sum_{k>K}.
    let mut tail = vec![0.0f64; k_max - k_min + 2];
    for k in (k_min + 1..=k_max + 1).rev() {
        let term = (-0.5 * ((k as f64).sqrt() - r).powi(2)).exp();
        tail[k - k_min - 1] = tail[k - k_min] + term;
    }
    for (j, t) in tail.iter().enumerate() {
        if *t <= threshold {
            return Ok(k_min + j);
        }
    }
    unreachable!("tail sum vanishes before k_max");
}

/// Minimal order `K >= ceil(r^2)` such that
/// `2 exp(-(eps_amp / S(K, r))^2 / 2) <= eps_prob` for a unit-variance
/// profile. Radii below 1 are clamped to 1.
pub fn truncation_order(r: f64, eps_amp: f64, eps_prob: f64) -> Result<usize> {
    check_eps(eps_amp, eps_prob)?;
    let threshold = eps_amp / (2.0 * (2.0 / eps_prob).ln()).sqrt();
    truncation_order_with_threshold(r, threshold)
}

/// Planner for a general profile: the tail weights scale by `sup_k a_k`,
/// and an explicit table caps the order at its last entry (beyond which the
/// tail is identically zero).
pub fn truncation_order_for_profile(
    profile: &crate::VarianceProfile,
    r: f64,
    eps_amp: f64,
    eps_prob: f64,
) -> Result<usize> {
    check_eps(eps_amp, eps_prob)?;
    let threshold = eps_amp / (2.0 * (2.0 / eps_prob).ln()).sqrt() / profile.sup_value();
    let order = truncation_order_with_threshold(r, threshold)?;
    Ok(match profile.max_degree() {
        Some(m) => order.min(m),
        None => order,
    })
}

/// Largest radius (down to 1) certified at `order` with the given targets.
pub fn radius_for_order(order: usize, eps_amp: f64, eps_prob: f64) -> Result<f64> {
    check_eps(eps_amp, eps_prob)?;
    if truncation_order(1.0, eps_amp, eps_prob)? > order {
        return Err(Error::precondition(format!(
            "order {order} too small to certify any radius >= 1"
        )));
    }
    let (mut lo, mut hi) = (1.0f64, R_VALID_MAX);
    if truncation_order(hi, eps_amp, eps_prob)? <= order {
        return Ok(hi);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if truncation_order(mid, eps_amp, eps_prob)? <= order {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
