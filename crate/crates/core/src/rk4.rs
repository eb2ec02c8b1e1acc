//! Classical fixed-step fourth-order Runge-Kutta.

use std::ops::{Add, Mul};

/// Advances `y` from `t` to `t + h` for `dy/dt = f(t, y)`.
pub fn step<T, const D: usize>(
    f: impl Fn(f64, &[T; D]) -> [T; D],
    t: f64,
    y: &[T; D],
    h: f64,
) -> [T; D]
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let shifted = |base: &[T; D], k: &[T; D], s: f64| -> [T; D] {
        std::array::from_fn(|i| base[i] + k[i] * s)
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &shifted(y, &k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, &shifted(y, &k2, 0.5 * h));
    let k4 = f(t + h, &shifted(y, &k3, h));
    std::array::from_fn(|i| y[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn exponential_decay_is_fourth_order() {
        let f = |_: f64, y: &[f64; 1]| [-y[0]];
        let err = |h: f64| {
            let steps = (1.0 / h).round() as usize;
            let mut y = [1.0];
            for i in 0..steps {
                y = step(f, i as f64 * h, &y, h);
            }
            (y[0] - (-1f64).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn complex_rotation_keeps_modulus() {
        let w = Complex64::new(0.0, 1.0);
        let f = |_: f64, y: &[Complex64; 1]| [w * y[0]];
        let mut y = [Complex64::new(1.0, 0.0)];
        let h = 0.01;
        for i in 0..628 {
            y = step(f, i as f64 * h, &y, h);
        }
        assert!((y[0].norm() - 1.0).abs() < 1e-9);
        assert!((y[0] - Complex64::from_polar(1.0, 628.0 * h)).norm() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator_phase_space() {
        let f = |_: f64, y: &[f64; 2]| [y[1], -y[0]];
        let h = std::f64::consts::PI / 500.0;
        let mut y = [1.0, 0.0];
        for i in 0..1000 {
            y = step(f, i as f64 * h, &y, h);
        }
        assert!((y[0] - 1.0).abs() < 1e-10 && y[1].abs() < 1e-10);
    }
}
