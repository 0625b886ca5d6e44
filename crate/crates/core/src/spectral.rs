//! Periodic conjugation on an even trapezoidal grid.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

/// Applies `e^{ikt} ↦ i·sgn(k)·e^{ikt}` to real samples on `n` equispaced
/// nodes, i.e. the principal-value operator `(1/2π)∫ cot((t − s)/2) φ(t) dt`.
/// The mean and the Nyquist mode are sent to zero.
#[derive(Clone)]
pub struct Conjugator {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Conjugator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Conjugator").field("n", &self.n).finish()
    }
}

impl Conjugator {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Adds the conjugate of `phi` into `out`.
    pub fn apply_add(&self, phi: &[f64], out: &mut [f64]) {
        let n = self.n;
        let mut buf: Vec<C64> = phi.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        buf[0] = C64::new(0.0, 0.0);
        if n.is_multiple_of(2) {
            buf[n / 2] = C64::new(0.0, 0.0);
        }
        for (k, c) in buf.iter_mut().enumerate().skip(1) {
            if 2 * k < n {
                *c *= C64::i();
            } else if 2 * k > n {
                *c *= -C64::i();
            }
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        for (o, c) in out.iter_mut().zip(&buf) {
            *o += c.re * scale;
        }
    }

    pub fn apply(&self, phi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.apply_add(phi, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn conjugates_monomials() {
        let n = 64;
        let conj = Conjugator::new(n);
        let t: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
        for k in 1..n / 2 {
            let kf = k as f64;
            let cos: Vec<f64> = t.iter().map(|s| (kf * s).cos()).collect();
            let sin: Vec<f64> = t.iter().map(|s| (kf * s).sin()).collect();
            let (c_cos, c_sin) = (conj.apply(&cos), conj.apply(&sin));
            for i in 0..n {
                assert!((c_cos[i] + sin[i]).abs() < 1e-12);
                assert!((c_sin[i] - cos[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn annihilates_constants_and_nyquist() {
        let n = 16;
        let conj = Conjugator::new(n);
        let alt: Vec<f64> = (0..n)
            .map(|i| if i % 2 == 0 { 3.0 } else { -1.0 })
            .collect();
        assert!(conj.apply(&alt).iter().all(|v| v.abs() < 1e-14));
    }
}
