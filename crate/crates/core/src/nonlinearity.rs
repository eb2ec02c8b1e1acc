//! Truncation order of the Josephson nonlinearity and the rotating-wave
//! series it generates.
//!
//! Every coefficient in the steady-state, linear-gain and cubic-saturation
//! formulas is a power series in the normalized photon number `n`. For a
//! finite order `N` the series is cut after its `N`th term; for `N = inf`
//! the closed Bessel form is used.

use std::fmt;
use std::num::NonZeroU32;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{JpaError, Result};
use crate::special::{j0_of_photons, j1_ratio, j2_ratio, scaled_bessel, scaled_bessel_real};

/// Number of nonlinear terms kept. `Finite(1)` is the Kerr (Duffing) model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "OrderRepr", into = "OrderRepr")]
pub enum Order {
    Finite(NonZeroU32),
    Infinite,
}

impl Order {
    pub const KERR: Order = Order::Finite(NonZeroU32::MIN);

    pub fn finite(n: u32) -> Result<Order> {
        NonZeroU32::new(n)
            .map(Order::Finite)
            .ok_or_else(|| JpaError::validation("order", "must be >= 1 or inf"))
    }

    /// Every series is summed over `k = 1..=terms()`.
    fn terms(self) -> Option<u32> {
        match self {
            Order::Finite(n) => Some(n.get()),
            Order::Infinite => None,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{n}"),
            Order::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Order {
    type Err = JpaError;

    fn from_str(s: &str) -> Result<Order> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Order::Infinite),
            other => {
                let n: u32 = other
                    .parse()
                    .map_err(|_| JpaError::validation("order", format!("cannot parse {s:?}")))?;
                Order::finite(n)
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum OrderRepr {
    Number(u32),
    Text(String),
}

impl TryFrom<OrderRepr> for Order {
    type Error = JpaError;

    fn try_from(r: OrderRepr) -> Result<Order> {
        match r {
            OrderRepr::Number(n) => Order::finite(n),
            OrderRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Order> for OrderRepr {
    fn from(o: Order) -> OrderRepr {
        match o {
            Order::Finite(n) => OrderRepr::Number(n.get()),
            Order::Infinite => OrderRepr::Text("inf".into()),
        }
    }
}

fn check_n(n: f64) -> Result<()> {
    if !n.is_finite() || n < 0.0 {
        return Err(JpaError::domain(format!(
            "photon number must be finite and >= 0, got {n}"
        )));
    }
    Ok(())
}

/// Sums `sum_{k=1..terms} w_k x^(k - shift)` where `w_1 = first` and
/// `w_(k+1) = w_k * next(k)`.
fn truncated(terms: u32, x: f64, shift: i32, first: f64, next: impl Fn(f64) -> f64) -> f64 {
    let mut w = first;
    let mut sum = 0.0;
    for k in 1..=terms {
        let kf = k as f64;
        sum += w * x.powi(k as i32 - shift);
        w *= next(kf);
    }
    sum
}

/// Pump detuning shift `S_N(n) = sum_{k<=N} 2^(2k-1) (-n)^k / (k! (k+1)!)`;
/// for `N = inf` this is `J1(4 sqrt n)/(4 sqrt n) - 1/2`.
pub fn detuning_term(n: f64, order: Order) -> Result<f64> {
    check_n(n)?;
    match order.terms() {
        Some(t) => Ok(truncated(t, -n, 0, 1.0, |k| 4.0 / ((k + 1.0) * (k + 2.0)))),
        None => Ok(j1_ratio(n)? - 0.5),
    }
}

/// `[S, dS/dn, d2S/dn2, d3S/dn3]` of [`detuning_term`].
pub fn detuning_derivatives(n: f64, order: Order) -> Result<[f64; 4]> {
    check_n(n)?;
    match order.terms() {
        Some(t) => {
            let mut out = [0.0; 4];
            let mut w = 1.0;
            for k in 1..=t {
                let kf = k as f64;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let c = w * sign;
                // falling factorials k, k(k-1), k(k-1)(k-2)
                let mut fall = 1.0;
                for (j, slot) in out.iter_mut().enumerate() {
                    if j > 0 {
                        fall *= kf - (j as f64 - 1.0);
                    }
                    let p = k as i32 - j as i32;
                    if fall != 0.0 {
                        *slot += c * fall * if p >= 0 { n.powi(p) } else { 0.0 };
                    }
                }
                w *= 4.0 / ((kf + 1.0) * (kf + 2.0));
            }
            Ok(out)
        }
        None => Ok([
            j1_ratio(n)? - 0.5,
            -j2_ratio(n)?,
            64.0 * scaled_bessel_real(3, n)?,
            -512.0 * scaled_bessel_real(4, n)?,
        ]),
    }
}

/// `d[n S_N(n)]/dn`, the signal-frequency shift entering `l1`.
/// Closed form `J0(4 sqrt n)/2 - 1/2`.
pub fn signal_shift(n: f64, order: Order) -> Result<f64> {
    check_n(n)?;
    match order.terms() {
        Some(t) => Ok(truncated(t, -n, 0, 2.0, |k| 4.0 / ((k + 1.0) * (k + 1.0)))),
        None => Ok(0.5 * j0_of_photons(n)? - 0.5),
    }
}

/// Weight of the idler coupling `l2`: `sum 2^(2k-1) (-n)^(k-1) / ((k-1)! (k+1)!)`,
/// closed form `J2(4 sqrt n)/(2n)`; equals 1 at `n = 0`.
pub fn idler_weight(n: f64, order: Order) -> Result<f64> {
    check_n(n)?;
    match order.terms() {
        Some(t) => Ok(truncated(t, -n, 1, 1.0, |k| 4.0 / (k * (k + 2.0)))),
        None => j2_ratio(n),
    }
}

/// Weight of the quadratic coefficients `c1`, `c2`:
/// `sum 4^(k-1) (-n)^(k-1) / ((k-1)! k!)`, closed form `J1(4 sqrt n)/(2 sqrt n)`.
pub fn quadratic_weight(n: f64, order: Order) -> Result<f64> {
    check_n(n)?;
    match order.terms() {
        Some(t) => Ok(truncated(t, -n, 1, 1.0, |k| 4.0 / (k * (k + 1.0)))),
        None => Ok(2.0 * j1_ratio(n)?),
    }
}

/// Weight of the cubic coefficient `c3`:
/// `sum 4^(k-1) (-n)^(k-1) / ((k-1)!)^2`, closed form `J0(4 sqrt n)`.
pub fn cubic_weight(n: f64, order: Order) -> Result<f64> {
    check_n(n)?;
    match order.terms() {
        Some(t) => Ok(truncated(t, -n, 1, 1.0, |k| 4.0 / (k * k))),
        None => j0_of_photons(n),
    }
}

/// `1/2 + S_N(z)` for a complex photon-number argument; for `N = inf` this is
/// the entire function `J1(4 sqrt z)/(4 sqrt z)`.
pub fn complex_ratio(z: Complex64, order: Order) -> Result<Complex64> {
    match order.terms() {
        Some(t) => {
            let x = -z;
            let mut w = 1.0;
            let mut pow = Complex64::new(1.0, 0.0);
            let mut sum = Complex64::new(0.5, 0.0);
            for k in 1..=t {
                pow *= x;
                sum += w * pow;
                let kf = k as f64;
                w *= 4.0 / ((kf + 1.0) * (kf + 2.0));
            }
            Ok(sum)
        }
        None => scaled_bessel(1, z),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn n(k: u32) -> Order {
        Order::finite(k).unwrap()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("inf".parse::<Order>().unwrap(), Order::Infinite);
        assert_eq!("3".parse::<Order>().unwrap(), n(3));
        assert!("0".parse::<Order>().is_err());
        assert!("x".parse::<Order>().is_err());
        assert_eq!(Order::Infinite.to_string(), "inf");
        assert_eq!("Infinity".parse::<Order>().unwrap(), Order::Infinite);
    }

    #[test]
    fn trivial_values() {
        for o in [n(1), n(2), n(5), Order::Infinite] {
            assert_eq!(detuning_term(0.0, o).unwrap(), 0.0);
            assert_abs_diff_eq!(idler_weight(0.0, o).unwrap(), 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(quadratic_weight(0.0, o).unwrap(), 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(cubic_weight(0.0, o).unwrap(), 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(signal_shift(0.0, o).unwrap(), 0.0, epsilon = 1e-15);
        }
        for x in [0.0, 0.01, 0.3, 2.0] {
            assert_abs_diff_eq!(detuning_term(x, n(1)).unwrap(), -x, epsilon = 1e-15);
            assert_abs_diff_eq!(signal_shift(x, n(1)).unwrap(), -2.0 * x, epsilon = 1e-15);
        }
        assert!(detuning_term(-1e-3, n(1)).is_err());
    }

    #[test]
    fn forty_terms_reproduce_bessel_forms() {
        for i in 0..=200 {
            let x = 2.0 * i as f64 / 200.0;
            let pairs = [
                (detuning_term(x, n(40)), detuning_term(x, Order::Infinite)),
                (signal_shift(x, n(40)), signal_shift(x, Order::Infinite)),
                (idler_weight(x, n(40)), idler_weight(x, Order::Infinite)),
                (
                    quadratic_weight(x, n(40)),
                    quadratic_weight(x, Order::Infinite),
                ),
                (cubic_weight(x, n(40)), cubic_weight(x, Order::Infinite)),
            ];
            for (a, b) in pairs {
                assert_abs_diff_eq!(a.unwrap(), b.unwrap(), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn derivative_identities() {
        // d[nS]/dn = S + n S' and dS/dn = -idler_weight, for every order.
        for o in [n(1), n(2), n(3), n(7), Order::Infinite] {
            for x in [0.0, 0.02, 0.4, 1.5] {
                let d = detuning_derivatives(x, o).unwrap();
                assert_abs_diff_eq!(d[0], detuning_term(x, o).unwrap(), epsilon = 1e-14);
                assert_abs_diff_eq!(
                    d[0] + x * d[1],
                    signal_shift(x, o).unwrap(),
                    epsilon = 1e-12
                );
                assert_abs_diff_eq!(d[1], -idler_weight(x, o).unwrap(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn higher_derivatives_match_finite_differences() {
        for o in [n(3), Order::Infinite] {
            let x = 0.3;
            let h = 1e-4;
            let f = |y: f64| detuning_derivatives(y, o).unwrap();
            let d = f(x);
            assert_abs_diff_eq!(
                d[2],
                (f(x + h)[1] - f(x - h)[1]) / (2.0 * h),
                epsilon = 1e-7
            );
            assert_abs_diff_eq!(
                d[3],
                (f(x + h)[2] - f(x - h)[2]) / (2.0 * h),
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn complex_ratio_on_real_axis() {
        for o in [n(1), n(4), Order::Infinite] {
            for x in [0.0, 0.05, 1.2] {
                let z = complex_ratio(Complex64::new(x, 0.0), o).unwrap();
                assert_abs_diff_eq!(z.re, 0.5 + detuning_term(x, o).unwrap(), epsilon = 1e-13);
                assert_eq!(z.im, 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn truncation_error_scales_with_next_power(x in 1e-4f64..0.1, k in 1u32..4) {
            // |S_N - S_inf| is dominated by the first neglected term.
            let o = n(k);
            let diff = (detuning_term(x, o).unwrap() - detuning_term(x, Order::Infinite).unwrap()).abs();
            let bound = 2.0 * 4f64.powi(k as i32 + 1) * x.powi(k as i32 + 1);
            prop_assert!(diff <= bound);
        }
    }
}
