//! Statistical machinery for the validators and experiment reports:
//! Kolmogorov-Smirnov tests (continuous, lattice-valued, two-sample),
//! jackknife standard errors, exact binomial confidence intervals, and a
//! small least-squares fitter.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF, Normal};

use crate::numeric::Kahan;
use crate::{Error, Result};

/// Complementary CDF of the Kolmogorov distribution,
/// `Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} e^{-2 j^2 lambda^2}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0f64;
    let mut sign = 1.0f64;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        if term < 1e-18 {
            break;
        }
        sum += sign * term;
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    // Stephens' small-sample adjustment of the asymptotic law.
    let sq = n_eff.sqrt();
    kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KsReport {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// One-sample KS test of data against a continuous CDF.
pub fn ks_test_continuous(data: &[f64], cdf: impl Fn(f64) -> f64) -> KsReport {
    let mut xs = data.to_vec();
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in xs.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    KsReport {
        statistic: d,
        p_value: ks_p_value(d, n),
        n: xs.len(),
    }
}

/// KS test for lattice-valued data against a continuous CDF, using the
/// mid-distribution convention: the empirical CDF is evaluated at the middle
/// of each tie group. The raw Kolmogorov distance of an integer lattice
/// against a continuous law is bounded below by half the largest atom
/// (about 0.1 for standardized zero counts at R = 8), so the raw statistic
/// rejects regardless of how close the law is to normal; the
/// mid-distribution statistic is the discrete-data analogue and the
/// continuous Kolmogorov p-value is conservative for it. The raw distance is
/// reported alongside.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LatticeKsReport {
    pub statistic_mid: f64,
    pub statistic_raw: f64,
    pub p_value: f64,
    pub n: usize,
}

pub fn ks_test_lattice(data: &[f64], cdf: impl Fn(f64) -> f64) -> LatticeKsReport {
    let mut xs = data.to_vec();
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d_mid = 0.0f64;
    let mut d_raw = 0.0f64;
    let mut i = 0usize;
    while i < xs.len() {
        let mut j = i;
        while j + 1 < xs.len() && xs[j + 1] == xs[i] {
            j += 1;
        }
        let f = cdf(xs[i]);
        let lo = i as f64 / n;
        let hi = (j + 1) as f64 / n;
        d_raw = d_raw.max((f - lo).abs()).max((hi - f).abs());
        d_mid = d_mid.max((0.5 * (lo + hi) - f).abs());
        i = j + 1;
    }
    LatticeKsReport {
        statistic_mid: d_mid,
        statistic_raw: d_raw,
        p_value: ks_p_value(d_mid, n),
        n: xs.len(),
    }
}

/// Two-sample KS test (ties allowed; D is evaluated at jump points).
pub fn ks_test_two_sample(xs: &[f64], ys: &[f64]) -> KsReport {
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_unstable_by(|p, q| p.partial_cmp(q).unwrap());
    b.sort_unstable_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        let t = a[i].min(b[j]);
        while i < n && a[i] <= t {
            i += 1;
        }
        while j < m && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let n_eff = (n * m) as f64 / (n + m) as f64;
    KsReport {
        statistic: d,
        p_value: ks_p_value(d, n_eff),
        n: n + m,
    }
}

/// Standard normal CDF.
pub fn standard_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeanReport {
    pub mean: f64,
    pub stderr: f64,
    pub variance: f64,
    pub n: usize,
}

/// Mean with standard error, summed in index order.
pub fn mean_with_stderr(data: &[f64]) -> MeanReport {
    let n = data.len();
    let mut acc = Kahan::new();
    for x in data {
        acc.add(*x);
    }
    let mean = acc.value() / n as f64;
    let mut ss = Kahan::new();
    for x in data {
        ss.add((x - mean) * (x - mean));
    }
    let variance = if n > 1 { ss.value() / (n as f64 - 1.0) } else { 0.0 };
    MeanReport {
        mean,
        stderr: (variance / n as f64).sqrt(),
        variance,
        n,
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VarianceReport {
    pub variance: f64,
    pub stderr: f64,
    pub mean: f64,
    pub n: usize,
}

/// Sample variance with a delete-one jackknife standard error, computed in
/// O(n) from running sums.
pub fn variance_with_jackknife(data: &[f64]) -> VarianceReport {
    let n = data.len();
    assert!(n >= 3, "jackknife needs at least 3 samples");
    let nf = n as f64;
    let mut s1 = Kahan::new();
    let mut s2 = Kahan::new();
    for x in data {
        s1.add(*x);
        s2.add(x * x);
    }
    let (s1, s2) = (s1.value(), s2.value());
    let mean = s1 / nf;
    let variance = (s2 - nf * mean * mean) / (nf - 1.0);
    // Leave-one-out variances from the same sums.
    let mut jack_mean = Kahan::new();
    let mut jack_sq = Kahan::new();
    let m = nf - 1.0;
    for x in data {
        let mean_i = (s1 - x) / m;
        let var_i = ((s2 - x * x) - m * mean_i * mean_i) / (m - 1.0);
        jack_mean.add(var_i);
        jack_sq.add(var_i * var_i);
    }
    let jm = jack_mean.value() / nf;
    let jvar = (jack_sq.value() / nf - jm * jm).max(0.0) * (nf - 1.0);
    VarianceReport {
        variance,
        stderr: jvar.sqrt(),
        mean,
        n,
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BinomialEstimate {
    pub successes: u64,
    pub n: u64,
    pub p_hat: f64,
    pub stderr: f64,
    /// Exact (Clopper-Pearson) interval at the stored confidence level.
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub confidence: f64,
}

/// Exact binomial (Clopper-Pearson) confidence interval.
pub fn binomial_estimate(successes: u64, n: u64, confidence: f64) -> BinomialEstimate {
    assert!(n > 0);
    let alpha = 1.0 - confidence;
    let (k, nf) = (successes as f64, n as f64);
    let p_hat = k / nf;
    let ci_lo = if successes == 0 {
        0.0
    } else {
        Beta::new(k, nf - k + 1.0)
            .map(|b| b.inverse_cdf(alpha / 2.0))
            .unwrap_or(0.0)
    };
    let ci_hi = if successes == n {
        1.0
    } else {
        Beta::new(k + 1.0, nf - k)
            .map(|b| b.inverse_cdf(1.0 - alpha / 2.0))
            .unwrap_or(1.0)
    };
    BinomialEstimate {
        successes,
        n,
        p_hat,
        stderr: (p_hat * (1.0 - p_hat) / nf).sqrt(),
        ci_lo,
        ci_hi,
        confidence,
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub residual_rms: f64,
    pub n: usize,
}

/// Ordinary least squares `y = a + b x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::InsufficientData(format!(
            "need >= 2 paired points, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("degenerate abscissae".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let dof = (nf - 2.0).max(1.0);
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr: (ss_res / dof / sxx).sqrt(),
        residual_rms: (ss_res / nf).sqrt(),
        n,
    })
}

/// Proportional fit through the origin `y = b x` with per-point sigmas.
pub fn fit_through_origin(xs: &[f64], ys: &[f64], sigmas: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() != sigmas.len() || xs.is_empty() {
        return Err(Error::InsufficientData("mismatched fit inputs".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += x * y;
        den += x * x;
    }
    if den == 0.0 {
        return Err(Error::InsufficientData("degenerate abscissae".into()));
    }
    let slope = num / den;
    let var: f64 = xs
        .iter()
        .zip(sigmas)
        .map(|(x, s)| (x * s / den).powi(2))
        .sum();
    Ok((slope, var.sqrt()))
}

/// Importance-sampling summary of weighted indicator values.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeightedSummary {
    pub estimate: f64,
    pub stderr: f64,
    pub ess: f64,
    pub n: usize,
}

/// Unbiased estimator `mean(w 1_E)` with its sample stderr and the effective
/// sample size `(sum w)^2 / sum w^2` of the weights.
pub fn weighted_indicator_summary(weights: &[f64], hits: &[bool]) -> WeightedSummary {
    assert_eq!(weights.len(), hits.len());
    let n = weights.len();
    let nf = n as f64;
    let mut sw = Kahan::new();
    let mut sww = Kahan::new();
    let mut s = Kahan::new();
    let mut ss = Kahan::new();
    for (w, h) in weights.iter().zip(hits) {
        sw.add(*w);
        sww.add(w * w);
        let v = if *h { *w } else { 0.0 };
        s.add(v);
        ss.add(v * v);
    }
    let estimate = s.value() / nf;
    let sample_var = (ss.value() / nf - estimate * estimate).max(0.0) * nf / (nf - 1.0).max(1.0);
    let ess = if sww.value() > 0.0 {
        sw.value() * sw.value() / sww.value()
    } else {
        0.0
    };
    WeightedSummary {
        estimate,
        stderr: (sample_var / nf).sqrt(),
        ess,
        n,
    }
}
