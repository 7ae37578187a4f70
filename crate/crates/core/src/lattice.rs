//! Perturbed-lattice point process: `{omega + zeta_omega}` over the integer
//! lattice, with radially symmetric displacements whose tails are exactly
//! `P{|zeta| > t} = e^{-t^nu}`. Serves as the comparison law for the
//! fluctuation exponents of the zero process.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::rng::{GaussianStream, SeedLineage};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub nu: f64,
    pub r_max: f64,
}

impl LatticeConfig {
    pub fn new(nu: f64, r_max: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::precondition("nu must be positive"));
        }
        if !(r_max > 0.0 && r_max <= 64.0) {
            return Err(Error::precondition("R_max must lie in (0, 64]"));
        }
        Ok(Self { nu, r_max })
    }

    /// Margin beyond `R_max` such that the probability that any lattice
    /// point outside the margin displaces into the disk is below 1e-9.
    pub fn margin(&self) -> f64 {
        // Two passes: the lattice size depends weakly on the margin itself.
        let mut margin = (9.0f64 * std::f64::consts::LN_10).powf(1.0 / self.nu);
        for _ in 0..2 {
            let side = 2.0 * (self.r_max + margin) + 1.0;
            let n_points = side * side;
            margin = ((n_points * 1e9).ln()).powf(1.0 / self.nu);
        }
        margin
    }
}

/// Sample one realization of the perturbed lattice: every `omega` in the
/// square lattice with `|omega| <= R_max + margin` is displaced by an
/// inverse-CDF draw `t = (-log u)^(1/nu)` at a uniform angle. Points are
/// emitted in row-major lattice order, two uniforms per point, so a
/// realization is a pure function of its lineage.
pub fn sample_perturbed_lattice(config: &LatticeConfig, lineage: SeedLineage) -> Vec<Complex64> {
    let reach = config.r_max + config.margin();
    let m = reach.ceil() as i64;
    let mut stream = GaussianStream::new(lineage);
    let mut points = Vec::new();
    for ix in -m..=m {
        for iy in -m..=m {
            let omega = Complex64::new(ix as f64, iy as f64);
            // Two uniforms per lattice point in fixed order.
            let u = 1.0 - stream.next_uniform(); // (0, 1]
            let v = stream.next_uniform();
            if omega.norm() > reach {
                continue;
            }
            let t = (-u.ln()).powf(1.0 / config.nu);
            let angle = std::f64::consts::TAU * v;
            points.push(omega + Complex64::from_polar(t, angle));
        }
    }
    points
}

/// Exact count of points with modulus `<= R`.
pub fn lattice_count(points: &[Complex64], r: f64) -> usize {
    points.iter().filter(|p| p.norm() <= r).count()
}
