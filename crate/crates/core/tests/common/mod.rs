//! Shared test oracles: double-double arithmetic for high-precision
//! re-summation, independent of the library's evaluation path.

#![allow(dead_code)]

use num_complex::Complex64;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    Dd { hi: s, lo: err }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    let err = a.mul_add(b, -p);
    Dd { hi: p, lo: err }
}

pub fn dd_add(a: Dd, b: Dd) -> Dd {
    let s = two_sum(a.hi, b.hi);
    let lo = s.lo + a.lo + b.lo;
    two_sum(s.hi, lo)
}

pub fn dd_mul(a: Dd, b: Dd) -> Dd {
    let p = two_prod(a.hi, b.hi);
    let lo = p.lo + a.hi * b.lo + a.lo * b.hi;
    two_sum(p.hi, lo)
}

pub fn dd_div(a: Dd, b: Dd) -> Dd {
    let q1 = a.hi / b.hi;
    let r = dd_add(a, dd_neg(dd_mul(Dd::from(q1), b)));
    let q2 = r.value() / b.hi;
    two_sum(q1, q2)
}

pub fn dd_neg(a: Dd) -> Dd {
    Dd {
        hi: -a.hi,
        lo: -a.lo,
    }
}

/// sqrt with one double-double Newton refinement.
pub fn dd_sqrt(a: Dd) -> Dd {
    let s = a.hi.sqrt();
    if s == 0.0 {
        return Dd::from(0.0);
    }
    let s_dd = Dd::from(s);
    // s' = s + (a - s^2) / (2s)
    let corr = dd_div(dd_add(a, dd_neg(dd_mul(s_dd, s_dd))), Dd::from(2.0 * s));
    dd_add(s_dd, corr)
}

#[derive(Debug, Clone, Copy)]
pub struct DdComplex {
    pub re: Dd,
    pub im: Dd,
}

impl DdComplex {
    pub fn from(z: Complex64) -> Self {
        DdComplex {
            re: Dd::from(z.re),
            im: Dd::from(z.im),
        }
    }

    pub fn value(self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn ddc_add(a: DdComplex, b: DdComplex) -> DdComplex {
    DdComplex {
        re: dd_add(a.re, b.re),
        im: dd_add(a.im, b.im),
    }
}

pub fn ddc_mul(a: DdComplex, b: DdComplex) -> DdComplex {
    DdComplex {
        re: dd_add(dd_mul(a.re, b.re), dd_neg(dd_mul(a.im, b.im))),
        im: dd_add(dd_mul(a.re, b.im), dd_mul(a.im, b.re)),
    }
}

pub fn ddc_scale(a: DdComplex, s: Dd) -> DdComplex {
    DdComplex {
        re: dd_mul(a.re, s),
        im: dd_mul(a.im, s),
    }
}

/// High-precision re-summation of `sum c_k z^k / sqrt(k!)` by the same term
/// recurrence in double-double arithmetic.
pub fn evaluate_series_dd(coefficients: &[Complex64], z: Complex64) -> Complex64 {
    let zd = DdComplex::from(z);
    let mut term = DdComplex {
        re: Dd::from(1.0),
        im: Dd::from(0.0),
    };
    let mut acc = DdComplex {
        re: Dd::from(0.0),
        im: Dd::from(0.0),
    };
    for (k, c) in coefficients.iter().enumerate() {
        if k > 0 {
            let inv_sqrt = dd_div(Dd::from(1.0), dd_sqrt(Dd::from(k as f64)));
            term = ddc_scale(ddc_mul(term, zd), inv_sqrt);
        }
        acc = ddc_add(acc, ddc_mul(DdComplex::from(*c), term));
    }
    acc.value()
}
