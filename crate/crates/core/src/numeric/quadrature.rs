//! Gauss-Legendre rules.

use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut r = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, r);
            dp = d;
            let step = p / d;
            r -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, r);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - r * r) * dp * dp);
        x[i] = -r;
        x[n - 1 - i] = r;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A composite rule: flat lists of nodes and weights.
#[derive(Debug, Clone, Default)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    /// Append `panels` equal Gauss-Legendre panels covering [a, b].
    pub fn add_panels(&mut self, a: f64, b: f64, panels: usize, base: &(Vec<f64>, Vec<f64>)) {
        if b <= a || panels == 0 {
            return;
        }
        let width = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + p as f64 * width;
            for (x, w) in base.0.iter().zip(&base.1) {
                self.nodes.push(lo + 0.5 * width * (x + 1.0));
                self.weights.push(0.5 * width * w);
            }
        }
    }

    /// Append panels of width at most `max_width` covering [a, b].
    pub fn add_interval(&mut self, a: f64, b: f64, max_width: f64, base: &(Vec<f64>, Vec<f64>)) {
        if b <= a {
            return;
        }
        let panels = ((b - a) / max_width).ceil().max(1.0) as usize;
        self.add_panels(a, b, panels, base);
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
