//! Zero counting in disks and argument increments over arcs, by two
//! independent methods that cross-validate: certified winding numbers
//! (argument principle) and in-repo Aberth-Ehrlich root finding.
//!
//! # Winding certification
//!
//! A segment of the contour is accepted once
//! `(segment length) * B <= min(|v1|, |v2|) / 2`, where `B` bounds `|f'|`
//! on the enclosing disk via `sum |c_k| k r^{k-1}/sqrt(k!)` and `v1, v2` are
//! the endpoint values. The function then stays inside the disk around `v1`
//! of radius `|v1|/2`, so it cannot vanish on the segment and its continuous
//! argument stays within `(-pi/2, pi/2)` of the endpoint's, making the
//! principal-branch phase difference exact. Segments that cannot be
//! certified are bisected; a certified segment chain makes the total
//! increment exact up to floating-point addition.

pub mod aberth;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::series::SeriesSample;
use crate::{Error, Result};

/// Normalized-modulus floor below which a contour point is treated as a
/// zero on the contour.
const ZERO_ON_CONTOUR_THRESHOLD: f64 = 1e-9;
/// Radius perturbation per retry when a zero sits on the contour.
const CONTOUR_RETRY_STEP: f64 = 1e-6;
const CONTOUR_RETRIES: usize = 8;
const MAX_BISECTION_DEPTH: usize = 60;

/// Counterclockwise arc of the circle `|z| = R`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Arc {
    pub radius: f64,
    pub theta_start: f64,
    pub theta_end: f64,
}

impl Arc {
    pub fn new(radius: f64, theta_start: f64, theta_end: f64) -> Result<Self> {
        let span = theta_end - theta_start;
        if !(radius > 0.0) {
            return Err(Error::precondition("arc radius must be positive"));
        }
        if !(span > 0.0 && span <= std::f64::consts::TAU + 1e-12) {
            return Err(Error::precondition(
                "arc must be counterclockwise with span in (0, 2*pi]",
            ));
        }
        Ok(Self {
            radius,
            theta_start,
            theta_end,
        })
    }

    pub fn full_circle(radius: f64) -> Result<Self> {
        Self::new(radius, 0.0, std::f64::consts::TAU)
    }

    /// Arc length `|I| = R (theta_end - theta_start)`.
    pub fn length(&self) -> f64 {
        self.radius * (self.theta_end - self.theta_start)
    }

    /// Center point `R e^{i (theta_start + theta_end)/2}`.
    pub fn center(&self) -> Complex64 {
        Complex64::from_polar(self.radius, 0.5 * (self.theta_start + self.theta_end))
    }

    pub fn point(&self, theta: f64) -> Complex64 {
        Complex64::from_polar(self.radius, theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    Winding,
    Roots,
}

/// Zero count with method diagnostics. For the winding method
/// `min_modulus_seen` is the smallest normalized modulus `f*` probed on the
/// contour; for the roots method it is the distance from the nearest root to
/// the contour. Either being small flags a near-contour zero.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ZeroCountResult {
    pub count: u32,
    pub method: CountMethod,
    pub subdivisions: u32,
    pub min_modulus_seen: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct IncrementReport {
    pub increment: f64,
    pub segments: u32,
    pub min_modulus: f64,
}

fn certified_increment(
    values: impl Fn(f64) -> Result<Complex64>,
    t0: f64,
    t1: f64,
    speed_bound: f64,
    derivative_bound: f64,
) -> Result<IncrementReport> {
    let b = derivative_bound.max(1e-300);
    let mut increment = 0.0f64;
    let mut segments = 0u32;
    let mut min_modulus = f64::INFINITY;

    let span = t1 - t0;
    let n0 = ((span * speed_bound / 0.25).ceil() as usize).clamp(8, 4096);
    let point = |t: f64| -> Result<(f64, Complex64)> {
        let v = values(t)?;
        Ok((t, v))
    };
    // LIFO stack of (left, right, depth); midpoints evaluated on demand.
    let mut nodes: Vec<((f64, Complex64), (f64, Complex64), usize)> = Vec::new();
    let mut prev = point(t0)?;
    for i in 1..=n0 {
        let t = t0 + span * i as f64 / n0 as f64;
        let next = point(t)?;
        nodes.push((prev, next, 0));
        prev = next;
    }
    nodes.reverse();

    while let Some(((ta, va), (tb, vb), depth)) = nodes.pop() {
        let m = va.norm().min(vb.norm());
        min_modulus = min_modulus.min(m);
        if m < ZERO_ON_CONTOUR_THRESHOLD {
            return Err(Error::ZeroOnContour { min_modulus: m });
        }
        let seg_len = (tb - ta) * speed_bound;
        if seg_len * b <= 0.5 * m {
            increment += (vb * va.conj()).arg();
            segments += 1;
            continue;
        }
        if depth >= MAX_BISECTION_DEPTH {
            return Err(Error::ZeroOnContour { min_modulus: m });
        }
        let tm = 0.5 * (ta + tb);
        let vm = point(tm)?;
        nodes.push((vm.clone(), (tb, vb), depth + 1));
        nodes.push(((ta, va), vm, depth + 1));
    }

    Ok(IncrementReport {
        increment,
        segments,
        min_modulus,
    })
}

/// Increment of `arg f` along an arc of `|z| = R`, certified by adaptive
/// bisection. Fails with `ZeroOnContour` when the contour passes within the
/// certification floor of a zero.
pub fn arc_argument_increment_report(
    sample: &SeriesSample,
    arc: &Arc,
) -> Result<IncrementReport> {
    let r = arc.radius;
    if r > sample.r_valid() * (1.0 + 1e-12) {
        return Err(Error::OutsideCertifiedRadius {
            actual: r,
            limit: sample.r_valid(),
        });
    }
    let b = sample.derivative_bound_normalized(r);
    certified_increment(
        |theta| sample.evaluate_normalized(arc.point(theta)),
        arc.theta_start,
        arc.theta_end,
        r,
        b,
    )
}

/// Increment of `arg f` over an arc (see
/// [`arc_argument_increment_report`] for diagnostics).
pub fn arc_argument_increment(sample: &SeriesSample, arc: &Arc) -> Result<f64> {
    Ok(arc_argument_increment_report(sample, arc)?.increment)
}

/// Centered increment `delta(f, I) = Delta_I arg f - |I| R`.
pub fn arc_delta(sample: &SeriesSample, arc: &Arc) -> Result<f64> {
    Ok(arc_argument_increment(sample, arc)? - arc.length() * arc.radius)
}

/// Increment of `arg f` along the translated arc `I - w` (an arc of the
/// circle of radius R centered at `-w`), evaluated on the plain series.
/// `speed_bound` is `R` under the angle parametrization.
pub fn translated_arc_argument_increment(
    sample: &SeriesSample,
    arc: &Arc,
    w: Complex64,
) -> Result<IncrementReport> {
    let r_enclosing = (arc.point(arc.theta_start) - w)
        .norm()
        .max((arc.point(arc.theta_end) - w).norm())
        .max((arc.point(0.5 * (arc.theta_start + arc.theta_end)) - w).norm())
        * (1.0 + 1e-9);
    if r_enclosing > sample.r_valid() * (1.0 + 1e-12) {
        return Err(Error::OutsideCertifiedRadius {
            actual: r_enclosing,
            limit: sample.r_valid(),
        });
    }
    let b = sample.derivative_bound(r_enclosing);
    certified_increment(
        |theta| sample.evaluate(arc.point(theta) - w),
        arc.theta_start,
        arc.theta_end,
        arc.radius,
        b,
    )
}

/// `delta(T_w f, I - w)` for `w` the arc center: the translated-arc
/// increment minus its mean `|I| R - Im(conj(w) (z_end - z_start))` under
/// the GEF law.
pub fn translated_arc_delta(translated: &SeriesSample, arc: &Arc, w: Complex64) -> Result<f64> {
    let report = translated_arc_argument_increment(translated, arc, w)?;
    let z1 = arc.point(arc.theta_start);
    let z2 = arc.point(arc.theta_end);
    let mean = arc.length() * arc.radius - (w.conj() * (z2 - z1)).im;
    Ok(report.increment - mean)
}

/// Count zeros of the truncated series in `|z| < R` by the argument
/// principle. A zero sitting numerically on the contour triggers up to 8
/// retries with `R` grown by 1e-6 each time.
pub fn count_zeros_winding(sample: &SeriesSample, radius: f64) -> Result<ZeroCountResult> {
    let mut last_err = None;
    for attempt in 0..=CONTOUR_RETRIES {
        let r_try = radius + attempt as f64 * CONTOUR_RETRY_STEP;
        let arc = Arc::full_circle(r_try)?;
        match arc_argument_increment_report(sample, &arc) {
            Ok(report) => {
                let winding = report.increment / std::f64::consts::TAU;
                let count = winding.round();
                if (winding - count).abs() > 1e-6 || count < 0.0 {
                    return Err(Error::Overflow(format!(
                        "winding number {winding} is not a non-negative integer"
                    )));
                }
                return Ok(ZeroCountResult {
                    count: count as u32,
                    method: CountMethod::Winding,
                    subdivisions: report.segments,
                    min_modulus_seen: report.min_modulus,
                });
            }
            Err(e @ Error::ZeroOnContour { .. }) => {
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap())
}

/// Count zeros in `|z| < R` by finding all roots of the truncated
/// polynomial with the in-repo Aberth-Ehrlich iteration. Roots within 1e-7
/// of the contour are reflected in `min_modulus_seen`.
pub fn count_zeros_roots(sample: &SeriesSample, radius: f64) -> Result<ZeroCountResult> {
    if sample.order() > 400 {
        return Err(Error::precondition(format!(
            "roots method is limited to order <= 400, got {}",
            sample.order()
        )));
    }
    if radius > sample.r_valid() * (1.0 + 1e-12) {
        return Err(Error::OutsideCertifiedRadius {
            actual: radius,
            limit: sample.r_valid(),
        });
    }
    // Scale to the unit disk: q_k = c_k R^k / sqrt(k!) e^{-R^2/2}, so the
    // roots of sum q_k zeta^k are z/R for the zeros z of f.
    let mut u = (-0.5 * radius * radius).exp();
    let inv_sqrt = sample.inv_sqrt();
    let q: Vec<Complex64> = sample
        .coefficients()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if k > 0 {
                u *= radius * inv_sqrt[k - 1];
            }
            c * u
        })
        .collect();
    let report = aberth::find_roots(&q)?;
    // Residual oracle on the roots that decide the count: near and inside
    // the contour, |p(root)| must be tiny against the coefficient scale.
    let scale = q.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    for root in report.roots.iter().filter(|z| z.norm() < 1.2) {
        let p = q
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * root + c);
        if !(p.norm() <= 1e-8 * scale) {
            return Err(Error::RootsNotConverged {
                iterations: report.iterations,
                residual: p.norm() / scale,
            });
        }
    }
    let count = report.roots.iter().filter(|z| z.norm() < 1.0).count() as u32;
    let nearest = report
        .roots
        .iter()
        .map(|z| (z.norm() - 1.0).abs() * radius)
        .fold(f64::INFINITY, f64::min);
    Ok(ZeroCountResult {
        count,
        method: CountMethod::Roots,
        subdivisions: report.iterations as u32,
        min_modulus_seen: nearest,
    })
}
