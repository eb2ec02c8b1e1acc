//! Bessel functions of the first kind for orders 0, 1 and 2, and the
//! regularized ratios that appear once the pump phase amplitude `4 sqrt(n)`
//! is substituted.
//!
//! Small arguments (`|x| <= 8`, which covers every photon number `n <= 4`)
//! use the power series directly. Larger arguments up to the supported limit
//! of 40 use Miller's backward recurrence normalized by
//! `J0 + 2 (J2 + J4 + ...) = 1`.

use num_complex::Complex64;

use crate::error::{JpaError, Result};

/// Largest |x| accepted by [`bessel_j`].
pub const MAX_ARGUMENT: f64 = 40.0;

/// Largest |z| accepted by [`scaled_bessel`].
pub const MAX_SCALED_ARGUMENT: f64 = 100.0;

const SERIES_LIMIT: f64 = 8.0;
const TAYLOR_CUTOFF: f64 = 1e-8;

/// Order of a Bessel function of the first kind. Only 0, 1 and 2 exist here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BesselOrder(u8);

impl BesselOrder {
    pub const ZERO: BesselOrder = BesselOrder(0);
    pub const ONE: BesselOrder = BesselOrder(1);
    pub const TWO: BesselOrder = BesselOrder(2);

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u32> for BesselOrder {
    type Error = JpaError;

    fn try_from(order: u32) -> Result<Self> {
        match order {
            0..=2 => Ok(BesselOrder(order as u8)),
            _ => Err(JpaError::domain(format!(
                "Bessel order {order} is not supported (0, 1, 2 only)"
            ))),
        }
    }
}

/// `J_order(x)`.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(JpaError::domain(format!(
            "Bessel argument {x} is not finite"
        )));
    }
    if x.abs() > MAX_ARGUMENT {
        return Err(JpaError::domain(format!(
            "Bessel argument {x} outside |x| <= {MAX_ARGUMENT}"
        )));
    }
    let k = order.0 as usize;
    let ax = x.abs();
    let value = if ax <= SERIES_LIMIT {
        series(k, ax)
    } else {
        miller(ax)[k]
    };
    // J_k(-x) = (-1)^k J_k(x)
    Ok(if x < 0.0 && k % 2 == 1 { -value } else { value })
}

fn series(k: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = (0..k).fold(1.0, |acc, j| acc * half / (j + 1) as f64);
    let mut sum = term;
    // Neumaier-compensated so the alternating terms lose as little as possible.
    let mut comp = 0.0;
    for m in 1..60 {
        term *= q / (m as f64 * (m + k) as f64);
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && (m as f64) > half {
            break;
        }
    }
    sum + comp
}

/// `[J0(x), J1(x), J2(x)]` for `x > 0` by backward recurrence.
fn miller(x: f64) -> [f64; 3] {
    let start = 2 * (((x + 40.0 + 4.0 * x.sqrt()) as usize) / 2);
    let mut above = 0.0;
    let mut current = 1e-30;
    let mut norm = 0.0;
    let mut low = [0.0; 3];
    for k in (1..=start).rev() {
        let below = 2.0 * k as f64 / x * current - above;
        above = current;
        current = below;
        let idx = k - 1;
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * current;
        }
        if idx <= 2 {
            low[idx] = current;
        }
        if current.abs() > 1e200 {
            current *= 1e-200;
            above *= 1e-200;
            norm *= 1e-200;
            for v in &mut low {
                *v *= 1e-200;
            }
        }
    }
    norm += low[0];
    [low[0] / norm, low[1] / norm, low[2] / norm]
}

/// `J1(4 sqrt(n)) / (4 sqrt(n))`, continuously extended to `1/2` at `n = 0`.
pub fn j1_ratio(n: f64) -> Result<f64> {
    check_photon_number(n)?;
    if n < TAYLOR_CUTOFF {
        return Ok(0.5 - n + 2.0 / 3.0 * n * n);
    }
    let x = 4.0 * n.sqrt();
    Ok(bessel_j(BesselOrder::ONE, x)? / x)
}

/// `J2(4 sqrt(n)) / (2 n)`, continuously extended to `1` at `n = 0`.
pub fn j2_ratio(n: f64) -> Result<f64> {
    check_photon_number(n)?;
    if n < TAYLOR_CUTOFF {
        return Ok(1.0 - 4.0 / 3.0 * n + 2.0 / 3.0 * n * n);
    }
    let x = 4.0 * n.sqrt();
    Ok(bessel_j(BesselOrder::TWO, x)? / (2.0 * n))
}

/// `J0(4 sqrt(n))`.
pub fn j0_of_photons(n: f64) -> Result<f64> {
    check_photon_number(n)?;
    bessel_j(BesselOrder::ZERO, 4.0 * n.sqrt())
}

fn check_photon_number(n: f64) -> Result<()> {
    if !n.is_finite() || n < 0.0 {
        return Err(JpaError::domain(format!(
            "photon number must be finite and >= 0, got {n}"
        )));
    }
    Ok(())
}

/// `J_nu(x) / x^nu` with `x = 4 sqrt(z)`, as the entire function of `z`
///
/// `sum_m (-4 z)^m / (2^nu m! (m + nu)!)`.
///
/// This is how the full-sine envelope equation evaluates its nonlinearity when
/// the photon-number argument becomes complex, and how the cusp solver gets
/// higher derivatives of the detuning term: `d/dz E_nu = -8 E_(nu+1)`.
pub fn scaled_bessel(nu: u32, z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(JpaError::domain(format!("argument {z} is not finite")));
    }
    if z.norm() > MAX_SCALED_ARGUMENT {
        return Err(JpaError::domain(format!(
            "|z| = {} exceeds {MAX_SCALED_ARGUMENT}",
            z.norm()
        )));
    }
    let nu_f = nu as f64;
    let first = (1..=nu).fold(1.0, |acc, j| acc / (2.0 * j as f64));
    let step = -4.0 * z;
    let peak = (4.0 * z.norm()).sqrt();
    let mut term = Complex64::new(first, 0.0);
    let mut sum = term;
    for m in 1..200 {
        let mf = m as f64;
        term *= step / (mf * (mf + nu_f));
        sum += term;
        if mf > peak && term.norm() < 1e-18 * sum.norm().max(1e-300) {
            break;
        }
    }
    Ok(sum)
}

/// Real-argument convenience for [`scaled_bessel`].
pub fn scaled_bessel_real(nu: u32, z: f64) -> Result<f64> {
    Ok(scaled_bessel(nu, Complex64::new(z, 0.0))?.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Plain 40-term power series, the reference every evaluation path is
    /// checked against for |x| <= 8.
    fn series_oracle(k: u32, x: f64) -> f64 {
        let mut total = 0.0;
        let mut fact_m = 1.0;
        for m in 0..40u32 {
            if m > 0 {
                fact_m *= m as f64;
            }
            let fact_mk: f64 = (1..=(m + k)).map(|j| j as f64).product();
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * (x / 2.0).powi((2 * m + k) as i32) / (fact_m * fact_mk);
        }
        total
    }

    #[test]
    fn trivial_values() {
        assert_eq!(bessel_j(BesselOrder::ZERO, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(BesselOrder::ONE, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(BesselOrder::TWO, 0.0).unwrap(), 0.0);
        assert_eq!(j1_ratio(0.0).unwrap(), 0.5);
        assert_eq!(j2_ratio(0.0).unwrap(), 1.0);
    }

    #[test]
    fn first_zero_of_j0() {
        let v = bessel_j(BesselOrder::ZERO, 2.404825557695773).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn frozen_reference_values() {
        // 40-digit evaluations of the defining series.
        assert_abs_diff_eq!(
            bessel_j(BesselOrder::TWO, 1.0).unwrap(),
            0.114_903_484_931_900_48,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            j1_ratio(1.0).unwrap(),
            -0.016_510_832_005_887_284,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            j1_ratio(4.0).unwrap(),
            0.029_329_543_356_739_328,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(
            j1_ratio(0.019245).unwrap(),
            0.481_000_335_481_864_70,
            epsilon = 1e-14
        );
        // Miller path.
        assert_abs_diff_eq!(
            bessel_j(BesselOrder::ONE, 20.0).unwrap(),
            0.066_833_124_175_850_046,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(
            bessel_j(BesselOrder::TWO, 35.0).unwrap(),
            0.129_359_450_880_862_61,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(
            bessel_j(BesselOrder::ZERO, -5.5).unwrap(),
            -0.006_843_869_417_819_196_8,
            epsilon = 1e-14
        );
    }

    #[test]
    fn agrees_with_series_oracle() {
        for k in 0..3 {
            let order = BesselOrder::try_from(k).unwrap();
            for i in 0..=400 {
                let x = -8.0 + 16.0 * i as f64 / 400.0;
                let got = bessel_j(order, x).unwrap();
                assert_abs_diff_eq!(got, series_oracle(k, x), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn miller_matches_series_at_the_switch() {
        for k in 0..3 {
            let got = miller(8.0)[k];
            assert_abs_diff_eq!(got, series_oracle(k as u32, 8.0), epsilon = 1e-13);
        }
    }

    #[test]
    fn recurrence_holds() {
        for i in 0..=200 {
            let x = 0.1 + 7.9 * i as f64 / 200.0;
            let j0 = bessel_j(BesselOrder::ZERO, x).unwrap();
            let j1 = bessel_j(BesselOrder::ONE, x).unwrap();
            let j2 = bessel_j(BesselOrder::TWO, x).unwrap();
            assert_abs_diff_eq!(j0 + j2, 2.0 / x * j1, epsilon = 1e-10);
        }
        // and beyond the series range
        for x in [9.0, 15.5, 27.0, 39.9] {
            let j0 = bessel_j(BesselOrder::ZERO, x).unwrap();
            let j1 = bessel_j(BesselOrder::ONE, x).unwrap();
            let j2 = bessel_j(BesselOrder::TWO, x).unwrap();
            assert_abs_diff_eq!(j0 + j2, 2.0 / x * j1, epsilon = 1e-12);
        }
    }

    #[test]
    fn ratio_series_identity() {
        for i in 0..=200 {
            let n = 2.0 * i as f64 / 200.0;
            let mut truncated = 0.5;
            let mut term = 0.5;
            for k in 1..=40 {
                term *= -4.0 * n / (k as f64 * (k + 1) as f64);
                truncated += term;
            }
            assert_abs_diff_eq!(j1_ratio(n).unwrap(), truncated, epsilon = 1e-10);
        }
    }

    #[test]
    fn ratios_continuous_at_zero() {
        assert_abs_diff_eq!(j1_ratio(1e-14).unwrap(), 0.5, epsilon = 1e-10);
        // either side of the Taylor cutoff
        let below = j1_ratio(0.999_999e-8).unwrap();
        let above = j1_ratio(1.000_001e-8).unwrap();
        assert_abs_diff_eq!(below, above, epsilon = 1e-12);
        let below = j2_ratio(0.999_999e-8).unwrap();
        let above = j2_ratio(1.000_001e-8).unwrap();
        assert_abs_diff_eq!(below, above, epsilon = 1e-12);
    }

    #[test]
    fn scaled_bessel_matches_real_path() {
        for i in 0..=80 {
            let n = 4.0 * i as f64 / 80.0;
            assert_abs_diff_eq!(
                scaled_bessel_real(1, n).unwrap(),
                j1_ratio(n).unwrap(),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                8.0 * scaled_bessel_real(2, n).unwrap(),
                j2_ratio(n).unwrap(),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                scaled_bessel_real(0, n).unwrap(),
                j0_of_photons(n).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn scaled_bessel_is_conjugate_symmetric() {
        let z = Complex64::new(0.3, -0.7);
        let a = scaled_bessel(1, z).unwrap();
        let b = scaled_bessel(1, z.conj()).unwrap();
        assert_eq!(a.conj(), b);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_j(BesselOrder::ZERO, f64::NAN).is_err());
        assert!(bessel_j(BesselOrder::ZERO, f64::INFINITY).is_err());
        assert!(bessel_j(BesselOrder::ONE, 40.5).is_err());
        assert!(BesselOrder::try_from(3).is_err());
        assert!(j1_ratio(-1e-3).is_err());
        assert!(j2_ratio(f64::NAN).is_err());
        assert!(scaled_bessel(1, Complex64::new(200.0, 0.0)).is_err());
    }
}
