//! Faddeeva function w(z) = exp(-z^2) erfc(-iz) and the scaled
//! complementary error function.
//!
//! Upper half-plane values use Weideman's rational series in
//! Z = (L + iz)/(L - iz) with 40 terms, accurate to about 1e-14 relative.
//! The lower half-plane follows from w(z) = 2 exp(-z^2) - w(-z).

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::C64;

const TERMS: usize = 40;

struct Series {
    l: f64,
    coeffs: [f64; TERMS],
}

fn series() -> &'static Series {
    static SERIES: OnceLock<Series> = OnceLock::new();
    SERIES.get_or_init(|| {
        let n = TERMS;
        let m = 2 * n;
        let m2 = 2 * m;
        let l = (n as f64 / 2f64.sqrt()).sqrt();
        // samples of exp(-t^2)(L^2 + t^2) at t = L tan(theta/2), with a leading zero
        let mut f = vec![0.0; m2];
        for (i, k) in (-(m as i64) + 1..m as i64).enumerate() {
            let theta = k as f64 * PI / m as f64;
            let t = l * (theta / 2.0).tan();
            f[i + 1] = (-t * t).exp() * (l * l + t * t);
        }
        let mut coeffs = [0.0; TERMS];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let freq = (j + 1) as f64;
            let mut acc = 0.0;
            for i in 0..m2 {
                let shifted = f[(i + m) % m2];
                acc += shifted * (2.0 * PI * freq * i as f64 / m2 as f64).cos();
            }
            *c = acc / m2 as f64;
        }
        Series { l, coeffs }
    })
}

fn w_upper(z: C64) -> C64 {
    let s = series();
    let i = C64::i();
    let denom = C64::new(s.l, 0.0) - i * z;
    let big_z = (C64::new(s.l, 0.0) + i * z) / denom;
    let mut p = C64::new(0.0, 0.0);
    for &c in s.coeffs.iter().rev() {
        p = p * big_z + c;
    }
    2.0 * p / (denom * denom) + (1.0 / PI.sqrt()) / denom
}

/// Faddeeva function on the whole complex plane.
///
/// Overflows for large |z| deep in the lower half-plane, where
/// exp(-z^2) itself overflows.
pub fn faddeeva(z: C64) -> C64 {
    if z.im >= 0.0 {
        w_upper(z)
    } else {
        2.0 * (-z * z).exp() - w_upper(-z)
    }
}

/// erfcx(u) = exp(u^2) erfc(u) = w(iu).
pub fn erfcx(u: C64) -> C64 {
    faddeeva(C64::i() * u)
}

/// Real error function.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let a = x.abs();
    if a < 0.5 {
        // Maclaurin series; the complement form loses relative accuracy here
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        for n in 1..30 {
            term *= -x2 / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        return 2.0 / PI.sqrt() * sum;
    }
    let tail = (-a * a).exp() * erfcx(C64::new(a, 0.0)).re;
    (1.0 - tail).copysign(x)
}
