//! Decorrelation of almost-orthogonal standard Gaussians and the
//! desk-scale demonstration that translates of one GEF around
//! well-separated centers split into independent GEFs plus tiny remainders.
//!
//! The mixing matrix is `Gamma^{-1/2} = sum_k alpha_k Delta^k` with
//! `Delta = I - Gamma` and `alpha_k` the binomial series of
//! `(1-x)^{-1/2}` (all positive, `alpha_k <= 1`). Row sums obey
//! `sum_j |(Delta^k)_ij| <= delta_i 3^{1-k}` once every
//! `delta_i = sum_{j != i} |Gamma_ij| <= 1/3`, so the truncated series
//! carries a per-term geometric certificate.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::par::map_indexed;
use crate::rng::{draw_coefficients, SeedLineage};
use crate::series::{truncation_order, EPS_AMP_DEFAULT, EPS_PROB_DEFAULT};
use crate::translation::{translation_matrix, TranslationMatrix};
use crate::{Error, Result, VarianceProfile};

const DELTA_LIMIT: f64 = 1.0 / 3.0;
const TERM_ROW_SUM_FLOOR: f64 = 1e-14;

/// Hermitian covariance with unit diagonal and certified off-diagonal
/// row sums `delta_i <= 1/3`. Diagonal dominance makes any accepted input
/// positive definite.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    gamma: DMatrix<Complex64>,
    delta: Vec<f64>,
}

impl CovarianceMatrix {
    pub fn new(gamma: DMatrix<Complex64>) -> Result<Self> {
        if !gamma.is_square() || gamma.nrows() == 0 {
            return Err(Error::precondition("covariance must be square, nonempty"));
        }
        let n = gamma.nrows();
        for i in 0..n {
            if (gamma[(i, i)] - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
                return Err(Error::precondition(format!(
                    "diagonal entry {i} is not 1: {}",
                    gamma[(i, i)]
                )));
            }
            for j in 0..i {
                if (gamma[(i, j)] - gamma[(j, i)].conj()).norm() > 1e-10 {
                    return Err(Error::precondition("covariance is not Hermitian"));
                }
            }
        }
        let delta: Vec<f64> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|j| *j != i)
                    .map(|j| gamma[(i, j)].norm())
                    .sum()
            })
            .collect();
        if let Some((i, d)) = delta
            .iter()
            .enumerate()
            .find(|(_, d)| **d > DELTA_LIMIT + 1e-12)
        {
            return Err(Error::precondition(format!(
                "row {i} off-diagonal mass {d} exceeds 1/3"
            )));
        }
        Ok(Self { gamma, delta })
    }

    pub fn size(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn gamma(&self) -> &DMatrix<Complex64> {
        &self.gamma
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }
}

/// `mixing = Gamma^{-1/2}` plus the residual-scale certificate.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub mixing: DMatrix<Complex64>,
    /// Row sums of `|I - Gamma^{-1/2}|`; the scale of the dependent
    /// remainder when whitening with `mixing`.
    pub s: Vec<f64>,
    /// Analytic envelope for `s[i]` from the truncated series; always
    /// `<= delta[i]`.
    pub certified_bound: Vec<f64>,
    pub terms_used: usize,
}

fn max_abs_row_sum(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Neumann-series inverse square root of an accepted covariance.
pub fn decorrelate(cov: &CovarianceMatrix) -> Decomposition {
    let n = cov.size();
    let identity = DMatrix::<Complex64>::identity(n, n);
    let delta_mat = &identity - cov.gamma();
    let delta_max = cov.delta.iter().cloned().fold(0.0f64, f64::max);

    let mut mixing = identity.clone();
    let mut power = identity.clone();
    let mut alpha = 1.0f64; // alpha_k, starting at k = 0
    let mut bound_sum = 0.0f64; // sum_{k>=2..} alpha_k 3^{1-k} accumulated
    let mut terms = 0usize;
    for k in 1..=200usize {
        power = &power * &delta_mat;
        alpha *= (2.0 * k as f64 - 1.0) / (2.0 * k as f64);
        let term = power.map(|x| x * Complex64::new(alpha, 0.0));
        let row_sum = max_abs_row_sum(&term);
        // Per-term geometric certificate from the proof.
        let geometric = delta_max * 3.0f64.powi(1 - k as i32);
        assert!(
            row_sum <= geometric * (1.0 + 1e-9) + 1e-250,
            "term {k} row sum {row_sum} exceeds geometric bound {geometric}"
        );
        mixing += &term;
        if k >= 2 {
            bound_sum += alpha * 3.0f64.powi(1 - k as i32);
        }
        terms = k;
        if row_sum <= TERM_ROW_SUM_FLOOR {
            break;
        }
    }
    // Tail of the envelope with |alpha_k| <= 1.
    let tail = 1.5 * 3.0f64.powi(-(terms as i32));
    let s: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let e = if i == j {
                        Complex64::new(1.0, 0.0) - mixing[(i, j)]
                    } else {
                        -mixing[(i, j)]
                    };
                    e.norm()
                })
                .sum()
        })
        .collect();
    let certified_bound: Vec<f64> = cov
        .delta
        .iter()
        .map(|d| d * (0.5 + bound_sum + tail))
        .collect();
    Decomposition {
        mixing,
        s,
        certified_bound,
        terms_used: terms,
    }
}

/// `max |(mixing Gamma mixing^H - I)_ij|`.
pub fn whitening_residual(cov: &CovarianceMatrix, decomp: &Decomposition) -> f64 {
    let product = &decomp.mixing * cov.gamma() * decomp.mixing.adjoint();
    let n = cov.size();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((product[(i, j)] - Complex64::new(want, 0.0)).norm());
        }
    }
    worst
}

/// `E{ zeta_{k1}(w1) conj(zeta_{k2}(w2)) }`, the inner product
/// `<T_{-w2} e_{k2}, T_{-w1} e_{k1}>`, computed as the dot product of two
/// translation-matrix columns at a planner-certified output order.
pub fn coefficient_covariance(
    w1: Complex64,
    k1: usize,
    w2: Complex64,
    k2: usize,
) -> Result<Complex64> {
    if k1 > 200 || k2 > 200 {
        return Err(Error::precondition("degrees are limited to k <= 200"));
    }
    if w1.norm() > 12.0 || w2.norm() > 12.0 {
        return Err(Error::precondition("centers are limited to |w| <= 12"));
    }
    let reach = (w1.norm() + (k1 as f64).sqrt()).max(w2.norm() + (k2 as f64).sqrt());
    let k_out = truncation_order(reach, EPS_AMP_DEFAULT, EPS_PROB_DEFAULT)?;
    let m1 = translation_matrix(w1, k1, k_out);
    let m2 = translation_matrix(w2, k2, k_out);
    Ok(column_dot(m2.column(k2), m1.column(k1)))
}

fn column_dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}

/// Numerical check of the appendix row-sum claim: with disks
/// `D(w_j, R_j + 8 sigma_j)` pairwise disjoint, `R_j >= 1` and
/// `sigma_j >= max(1, sqrt(log R_j))`,
/// `2 sum_{j != i} (1 + R_j^2) e^{-D_ij^2/8} <= e^{-2 sigma_i^2}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Claim1eCheck {
    pub applicable: bool,
    pub hypothesis_failures: Vec<String>,
    pub max_lhs_over_rhs: f64,
    pub pass: bool,
}

pub fn claim_1e_check(centers: &[Complex64], radii: &[f64], sigmas: &[f64]) -> Claim1eCheck {
    let mut failures = Vec::new();
    for (j, (&r, &s)) in radii.iter().zip(sigmas).enumerate() {
        if r < 1.0 {
            failures.push(format!("R_{j} = {r} < 1"));
        }
        let floor = 1.0f64.max(r.max(1.0).ln().sqrt());
        if s < floor {
            failures.push(format!("sigma_{j} = {s} < max(1, sqrt(log R)) = {floor:.3}"));
        }
    }
    for i in 0..centers.len() {
        for j in 0..i {
            let dist = (centers[i] - centers[j]).norm();
            let need = radii[i] + 8.0 * sigmas[i] + radii[j] + 8.0 * sigmas[j];
            if dist < need {
                failures.push(format!("disks {i},{j} overlap: {dist:.3} < {need:.3}"));
            }
        }
    }
    if !failures.is_empty() {
        return Claim1eCheck {
            applicable: false,
            hypothesis_failures: failures,
            max_lhs_over_rhs: f64::NAN,
            pass: false,
        };
    }
    let mut worst = 0.0f64;
    for i in 0..centers.len() {
        let lhs: f64 = (0..centers.len())
            .filter(|j| *j != i)
            .map(|j| {
                let d = (centers[i] - centers[j]).norm() - radii[i] - radii[j];
                2.0 * (1.0 + radii[j] * radii[j]) * (-d * d / 8.0).exp()
            })
            .sum();
        let rhs = (-2.0 * sigmas[i] * sigmas[i]).exp();
        worst = worst.max(lhs / rhs);
    }
    Claim1eCheck {
        applicable: true,
        hypothesis_failures: Vec::new(),
        max_lhs_over_rhs: worst,
        pass: worst <= 1.0,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemoConfig {
    /// Centers `w_j` of the local disks.
    pub centers: Vec<(f64, f64)>,
    /// Local disk radius `r`.
    pub r: f64,
    /// Remainder exponent target: remainders stay below `e^{-rho^2}`.
    pub rho: f64,
    /// Disjointness constant: disks `D(w_j, r + A rho)` must be disjoint.
    pub big_a: f64,
    pub n_trials: usize,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            centers: vec![(-15.0, 0.0), (15.0, 0.0)],
            r: 2.0,
            rho: 2.0,
            big_a: 6.0,
            n_trials: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemoReport {
    pub config: DemoConfig,
    pub k_local: usize,
    pub k_input: usize,
    /// Largest off-diagonal row mass of the assembled covariance.
    pub delta_max: f64,
    /// Largest cross-center coefficient covariance modulus.
    pub cross_cov_max: f64,
    /// Claim-1d envelope `2 e^{-D^2/8}` at the smallest center gap.
    pub cross_cov_bound: f64,
    /// Per-center supremum of `|h_j| e^{-|z|^2/2}` on the local disk,
    /// trial-maximized and trial-averaged.
    pub sup_remainder_max: f64,
    pub sup_remainder_mean: f64,
    /// Threshold `e^{-rho^2}` and the lemma's tail bound
    /// `2 exp(-e^{rho^2}/2)`.
    pub threshold: f64,
    pub tail_bound: f64,
    /// Fraction of (trial, center) pairs whose remainder exceeded the
    /// threshold.
    pub exceed_freq: f64,
    pub whitening_residual: f64,
    pub claim_1e: Claim1eCheck,
}

/// Sample one GEF per trial, expand it around every center, whiten the
/// stacked coefficient family with the exact covariance, and measure the
/// reconstruction remainders `h_j = T_{w_j} f - f_j`.
pub fn almost_independence_demo(config: &DemoConfig, lineage: SeedLineage) -> Result<DemoReport> {
    let centers: Vec<Complex64> = config
        .centers
        .iter()
        .map(|(re, im)| Complex64::new(*re, *im))
        .collect();
    if centers.is_empty() {
        return Err(Error::precondition("demo needs at least one center"));
    }
    let r = config.r;
    let rho = config.rho;
    if !(r >= 1.0) {
        return Err(Error::precondition("demo requires r >= 1"));
    }
    if rho < 1.0f64.max(r.ln().max(0.0).sqrt()) {
        return Err(Error::precondition("demo requires rho >= max(1, sqrt(log r))"));
    }
    let guard = r + config.big_a * rho;
    for i in 0..centers.len() {
        for j in 0..i {
            if (centers[i] - centers[j]).norm() < 2.0 * guard {
                return Err(Error::precondition(format!(
                    "disks D(w, r + A rho) of centers {i} and {j} overlap"
                )));
            }
        }
    }

    let k_local = truncation_order(r, EPS_AMP_DEFAULT, EPS_PROB_DEFAULT)?;
    let max_center = centers.iter().map(|w| w.norm()).fold(0.0f64, f64::max);
    let reach = max_center + (k_local as f64).sqrt();
    let k_input = truncation_order(reach, EPS_AMP_DEFAULT, EPS_PROB_DEFAULT)?;

    // Expansion matrices for T_{w_j} f (the stored matrix expands T_{-w},
    // hence the sign), and wider ones for the covariance columns.
    let expanders: Vec<TranslationMatrix> = centers
        .iter()
        .map(|w| translation_matrix(-*w, k_input, k_local))
        .collect();
    let k_cov = truncation_order(reach, EPS_AMP_DEFAULT, EPS_PROB_DEFAULT)?;
    let cov_columns: Vec<TranslationMatrix> = centers
        .iter()
        .map(|w| translation_matrix(*w, k_local, k_cov))
        .collect();

    let block = k_local + 1;
    let total = centers.len() * block;
    let mut gamma = DMatrix::<Complex64>::identity(total, total);
    let mut cross_cov_max = 0.0f64;
    for i in 0..centers.len() {
        for j in 0..i {
            for k in 0..block {
                for l in 0..block {
                    // E{zeta_k(w_i) conj(zeta_l(w_j))}
                    let cov = column_dot(cov_columns[j].column(l), cov_columns[i].column(k));
                    cross_cov_max = cross_cov_max.max(cov.norm());
                    gamma[(i * block + k, j * block + l)] = cov;
                    gamma[(j * block + l, i * block + k)] = cov.conj();
                }
            }
        }
    }
    let min_gap = if centers.len() > 1 {
        (0..centers.len())
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| (centers[i] - centers[j]).norm())
            .fold(f64::INFINITY, f64::min)
            - 2.0 * (k_local as f64).sqrt()
    } else {
        f64::INFINITY
    };
    let cross_cov_bound = if min_gap.is_finite() {
        2.0 * (-min_gap * min_gap / 8.0).exp()
    } else {
        0.0
    };

    let cov = CovarianceMatrix::new(gamma)?;
    let delta_max = cov.delta().iter().cloned().fold(0.0, f64::max);
    let decomp = decorrelate(&cov);
    let residual = whitening_residual(&cov, &decomp);

    let profile = VarianceProfile::constant_one();
    let inv_sqrt = crate::series::inv_sqrt_table(k_local);
    let threshold = (-rho * rho).exp();
    let n_centers = centers.len();
    let sups: Vec<Vec<f64>> = map_indexed(config.n_trials, |t| {
        let coeffs = draw_coefficients(&profile, k_input, lineage.with_index(t as u64))
            .expect("constant profile cannot fail");
        let xi: Vec<Vec<Complex64>> = expanders.iter().map(|m| m.apply(&coeffs)).collect();
        let mut stacked = DMatrix::<Complex64>::zeros(total, 1);
        for (j, block_vals) in xi.iter().enumerate() {
            for (k, v) in block_vals.iter().enumerate() {
                stacked[(j * block + k, 0)] = *v;
            }
        }
        let whitened = &decomp.mixing * &stacked;
        (0..n_centers)
            .map(|j| {
                let h: Vec<Complex64> = (0..block)
                    .map(|k| xi[j][k] - whitened[(j * block + k, 0)])
                    .collect();
                // sup of |h|* over the local disk on a polar grid
                let mut sup = 0.0f64;
                for ir in 0..=8 {
                    let s = r * ir as f64 / 8.0;
                    let n_ang = if ir == 0 { 1 } else { 32 };
                    for ia in 0..n_ang {
                        let z = Complex64::from_polar(
                            s,
                            std::f64::consts::TAU * ia as f64 / n_ang as f64,
                        );
                        sup = sup
                            .max(crate::series::eval_normalized_raw(&h, &inv_sqrt, z).norm());
                    }
                }
                sup + 3.0 * EPS_AMP_DEFAULT
            })
            .collect()
    });

    let mut sup_max = 0.0f64;
    let mut sup_sum = 0.0f64;
    let mut exceed = 0usize;
    for trial in &sups {
        for s in trial {
            sup_max = sup_max.max(*s);
            sup_sum += s;
            if *s >= threshold {
                exceed += 1;
            }
        }
    }
    let pairs = (config.n_trials * n_centers).max(1);

    // Internal split for the claim-1e hypotheses: a = 2A/5, sigma = (A-a)rho/8,
    // R_j = r + a rho, so R_j + 8 sigma_j = r + A rho exactly.
    let a_small = 0.4 * config.big_a;
    let radii: Vec<f64> = centers.iter().map(|_| r + a_small * rho).collect();
    let sigmas: Vec<f64> = centers
        .iter()
        .map(|_| (config.big_a - a_small) * rho / 8.0)
        .collect();
    let claim_1e = claim_1e_check(&centers, &radii, &sigmas);

    Ok(DemoReport {
        config: config.clone(),
        k_local,
        k_input,
        delta_max,
        cross_cov_max,
        cross_cov_bound,
        sup_remainder_max: sup_max,
        sup_remainder_mean: sup_sum / pairs as f64,
        threshold,
        tail_bound: 2.0 * (-0.5 * (rho * rho).min(700.0).exp()).exp(),
        exceed_freq: exceed as f64 / pairs as f64,
        whitening_residual: residual,
        claim_1e,
    })
}
