//! Floating-point summation helpers.
//!
//! [`exact_sum`] follows Shewchuk's partials algorithm: the returned value is
//! the correctly rounded sum of the inputs, so it does not depend on the order
//! in which terms arrive. Finite-orbit means rely on this to be reproducible
//! bit for bit regardless of how the orbit was enumerated.

use num_complex::Complex64;

/// Correctly rounded sum of `values`.
pub fn exact_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    round_partials(&partials)
}

fn round_partials(partials: &[f64]) -> f64 {
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    // Half-way case: the remaining partials decide the rounding direction.
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        let yr = x - hi;
        if y == yr {
            hi = x;
        }
    }
    hi
}

pub fn exact_sum_complex<I: IntoIterator<Item = Complex64>>(values: I) -> Complex64 {
    let (re, im): (Vec<f64>, Vec<f64>) = values.into_iter().map(|z| (z.re, z.im)).unzip();
    Complex64::new(exact_sum(re), exact_sum(im))
}

/// Neumaier-compensated running sum for long streams.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated {
    sum: Complex64,
    comp: Complex64,
}

impl Compensated {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: Complex64) {
        self.sum.re = neumaier(self.sum.re, x.re, &mut self.comp.re);
        self.sum.im = neumaier(self.sum.im, x.im, &mut self.comp.im);
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

#[inline]
fn neumaier(sum: f64, x: f64, comp: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancels_exactly() {
        assert_eq!(exact_sum([1e100, 1.0, -1e100]), 1.0);
        assert_eq!(exact_sum([0.1; 10]), 1.0);
        assert_eq!(exact_sum(std::iter::empty()), 0.0);
    }

    #[test]
    fn order_independent() {
        let xs: Vec<f64> = (0..200).map(|i| ((i * 37 % 101) as f64).sin() * 10f64.powi(i % 7)).collect();
        let mut rev = xs.clone();
        rev.reverse();
        assert_eq!(exact_sum(xs.iter().copied()).to_bits(), exact_sum(rev).to_bits());
    }

    #[test]
    fn compensated_tracks_exact() {
        let mut acc = Compensated::new();
        for _ in 0..1_000_000 {
            acc.add(Complex64::new(0.1, -0.1));
        }
        assert!((acc.value().re - 100_000.0).abs() < 1e-9);
        assert!((acc.value().im + 100_000.0).abs() < 1e-9);
    }
}
