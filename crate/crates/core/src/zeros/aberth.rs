//! Aberth-Ehrlich simultaneous root iteration for complex polynomials.

use num_complex::Complex64;

use crate::{Error, Result};

const MAX_ITERATIONS: usize = 200;
const RELATIVE_STEP_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct RootFindReport {
    pub roots: Vec<Complex64>,
    pub iterations: usize,
    pub max_residual: f64,
}

/// Horner evaluation of `p` and `p'`.
fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Backward-relative residual `|p(z)| / sum_k |c_k| |z|^k`; the proper
/// smallness measure for roots of any modulus.
fn backward_residual(coeffs: &[Complex64], z: Complex64) -> f64 {
    let (p, _) = horner(coeffs, z);
    let r = z.norm();
    let mut scale = 0.0f64;
    let mut rk = 1.0f64;
    for c in coeffs {
        scale += c.norm() * rk;
        rk *= r;
    }
    if !scale.is_finite() || scale == 0.0 {
        return f64::INFINITY;
    }
    let res = p.norm() / scale;
    if res.is_finite() {
        res
    } else {
        f64::INFINITY
    }
}

/// All roots of `sum_k coeffs[k] zeta^k`, multiplicities repeated.
///
/// Exact zero leading coefficients become roots at the origin; exact zero
/// trailing coefficients are trimmed. Initial guesses sit on the circle of
/// radius `(|a_0|/|a_deg|)^(1/deg)` with a fixed 1e-3 angular jitter;
/// iteration stops when every relative step drops below 1e-12 and fails
/// after 200 sweeps.
pub fn find_roots(coefficients: &[Complex64]) -> Result<RootFindReport> {
    let mut hi = coefficients.len();
    while hi > 0 && coefficients[hi - 1] == Complex64::new(0.0, 0.0) {
        hi -= 1;
    }
    if hi == 0 {
        return Err(Error::precondition(
            "zero polynomial has no isolated roots",
        ));
    }
    let mut lo = 0usize;
    while coefficients[lo] == Complex64::new(0.0, 0.0) {
        lo += 1;
    }
    let origin_roots = lo;
    let reduced = &coefficients[lo..hi];
    let degree = reduced.len() - 1;
    if degree + origin_roots > 400 {
        return Err(Error::precondition(format!(
            "degree {} beyond the practical bound 400",
            degree + origin_roots
        )));
    }

    let mut roots = vec![Complex64::new(0.0, 0.0); origin_roots];
    if degree == 0 {
        return Ok(RootFindReport {
            roots,
            iterations: 0,
            max_residual: 0.0,
        });
    }

    // Work on unit-scale coefficients.
    let scale = reduced.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let monic: Vec<Complex64> = reduced.iter().map(|c| c / scale).collect();

    let r0 = (monic[0].norm() / monic[degree].norm())
        .powf(1.0 / degree as f64)
        .clamp(1e-6, 1e6);
    let mut z: Vec<Complex64> = (0..degree)
        .map(|i| {
            let theta = std::f64::consts::TAU * (i as f64 + 0.25) / degree as f64
                + 1e-3 * (1.7 * i as f64).sin();
            Complex64::from_polar(r0, theta)
        })
        .collect();

    let mut iterations = 0usize;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut max_rel_step = 0.0f64;
        for i in 0..degree {
            let (p, dp) = horner(&monic, z[i]);
            if !p.re.is_finite() || !p.im.is_finite() {
                // Evaluation overflowed: pull the iterate back in.
                z[i] *= 0.5;
                max_rel_step = f64::INFINITY;
                continue;
            }
            if p == Complex64::new(0.0, 0.0) {
                continue;
            }
            let newton = if dp == Complex64::new(0.0, 0.0) {
                Complex64::new(1e-8, 1e-8)
            } else {
                p / dp
            };
            let mut coupling = Complex64::new(0.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    let diff = z[i] - zj;
                    if diff != Complex64::new(0.0, 0.0) {
                        coupling += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * coupling;
            let mut step = if denom.norm() < 1e-290 {
                newton
            } else {
                newton / denom
            };
            if !step.re.is_finite() || !step.im.is_finite() {
                step = Complex64::new(1e-6, -1e-6) * (1.0 + z[i].norm());
            }
            // Damping against overshoot past the root cluster.
            let cap = 0.5 * (1.0 + z[i].norm());
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            z[i] -= step;
            max_rel_step = max_rel_step.max(step.norm() / (1.0 + z[i].norm()));
        }
        if max_rel_step <= RELATIVE_STEP_TOL {
            converged = true;
            break;
        }
    }

    let max_residual = z
        .iter()
        .map(|&zi| backward_residual(&monic, zi))
        .fold(0.0f64, f64::max);
    if !converged || !max_residual.is_finite() || max_residual > 1e-10 {
        return Err(Error::RootsNotConverged {
            iterations,
            residual: max_residual,
        });
    }
    roots.extend(z);
    Ok(RootFindReport {
        roots,
        iterations,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            coeffs = next;
        }
        coeffs
    }

    fn sort_by_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        v
    }

    #[test]
    fn recovers_simple_real_roots() {
        let want = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
        ];
        let report = find_roots(&poly_from_roots(&want)).unwrap();
        let got = sort_by_re(report.roots);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-10, "{g} vs {w}");
        }
    }

    #[test]
    fn origin_multiplicity_counts() {
        // zeta^2 (zeta - 1): coefficients [0, 0, -1, 1]
        let coeffs = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        let report = find_roots(&coeffs).unwrap();
        assert_eq!(report.roots.len(), 3);
        let at_origin = report.roots.iter().filter(|r| r.norm() < 1e-12).count();
        assert_eq!(at_origin, 2);
    }

    #[test]
    fn constant_has_no_roots_and_zero_errors() {
        let ok = find_roots(&[Complex64::new(3.0, 1.0)]).unwrap();
        assert!(ok.roots.is_empty());
        assert!(find_roots(&[Complex64::new(0.0, 0.0)]).is_err());
    }

    #[test]
    fn clustered_double_root_converges_with_small_residual() {
        // (zeta - 0.5)^2 (zeta + 2)
        let want = vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(-2.0, 0.0),
        ];
        let coeffs = poly_from_roots(&want);
        let report = find_roots(&coeffs).unwrap();
        let near_half = report
            .roots
            .iter()
            .filter(|r| (*r - Complex64::new(0.5, 0.0)).norm() < 1e-5)
            .count();
        assert_eq!(near_half, 2);
        assert!(report.max_residual < 1e-10);
    }

    #[test]
    fn random_coefficients_have_small_residuals() {
        // Deterministic pseudo-random coefficients.
        let coeffs: Vec<Complex64> = (0..40)
            .map(|i| {
                let a = ((i * 2654435761u64 + 1) % 1000) as f64 / 500.0 - 1.0;
                let b = ((i * 40503u64 + 7) % 1000) as f64 / 500.0 - 1.0;
                Complex64::new(a, b)
            })
            .collect();
        let report = find_roots(&coeffs).unwrap();
        assert_eq!(report.roots.len(), 39);
        assert!(report.max_residual < 1e-9, "residual {}", report.max_residual);
    }
}
