//! Physical device description and every constant derived from it.
//!
//! This is the only place that knows about SI units. Everything downstream
//! works with frequencies in units of `omega0`, time `tau = omega0 t`,
//! intra-resonator fields as photon amplitudes and propagating fields in
//! units of `sqrt(omega0)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{JpaError, Result};

/// Elementary charge, C (exact, 2019 SI).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Planck constant, J s (exact, 2019 SI).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Magnetic flux quantum `h / 2e`, Wb.
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);

/// JPA parameters as given on the command line or in a device JSON file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceParams {
    /// Natural resonance frequency, Hz.
    pub f0_hz: f64,
    /// Junction critical current, A.
    pub ic_a: f64,
    /// Quality factor.
    pub q: f64,
}

impl DeviceParams {
    pub fn new(f0_hz: f64, ic_a: f64, q: f64) -> Result<Self> {
        let p = DeviceParams { f0_hz, ic_a, q };
        p.validate()?;
        Ok(p)
    }

    /// Device at `f0_hz` and `q` whose critical current is chosen so that
    /// `omega0 / (K Q)` equals `ratio` (which must be negative).
    pub fn with_kerr_ratio(f0_hz: f64, q: f64, ratio: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio < 0.0) {
            return Err(JpaError::validation(
                "ratio",
                format!("omega0/(K Q) must be negative, got {ratio}"),
            ));
        }
        // K = -e omega0^2 / (4 Ic)  =>  omega0/(K Q) = -4 Ic / (e omega0 Q)
        let omega0 = 2.0 * PI * f0_hz;
        let ic_a = -ratio * ELEMENTARY_CHARGE * omega0 * q / 4.0;
        DeviceParams::new(f0_hz, ic_a, q)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.f0_hz) {
            return Err(JpaError::validation(
                "f0_hz",
                format!("must be > 0, got {}", self.f0_hz),
            ));
        }
        if !positive(self.ic_a) {
            return Err(JpaError::validation(
                "ic_a",
                format!("must be > 0, got {}", self.ic_a),
            ));
        }
        if !positive(self.q) {
            return Err(JpaError::validation(
                "q",
                format!("must be > 0, got {}", self.q),
            ));
        }
        Ok(())
    }

    pub fn derive(&self) -> Result<DerivedParams> {
        self.validate()?;
        let omega0 = 2.0 * PI * self.f0_hz;
        let kerr = -omega0 / 8.0 * (2.0 * ELEMENTARY_CHARGE * omega0 / self.ic_a);
        let gamma = omega0 / self.q;
        let lj = FLUX_QUANTUM / (2.0 * PI * self.ic_a);
        let ej = self.ic_a * FLUX_QUANTUM / (2.0 * PI);
        let c = 1.0 / (lj * omega0 * omega0);
        let alpha_in_crit = (-gamma * gamma / (27f64.sqrt() * kerr)).sqrt();
        Ok(DerivedParams {
            q: self.q,
            omega0,
            kerr,
            gamma,
            lj,
            ej,
            c,
            alpha_in_crit,
            kerr_ratio: kerr / omega0,
        })
    }
}

/// Constants derived from [`DeviceParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    pub q: f64,
    /// rad/s
    pub omega0: f64,
    /// Kerr constant, rad/s. Always negative.
    pub kerr: f64,
    /// Coupling rate `omega0 / Q`, rad/s.
    pub gamma: f64,
    /// Josephson inductance, H.
    pub lj: f64,
    /// Josephson energy, J.
    pub ej: f64,
    /// Shunt capacitance, F.
    pub c: f64,
    /// Critical input pump amplitude of the cubic model, sqrt(rad/s).
    pub alpha_in_crit: f64,
    /// `K / omega0`
    pub kerr_ratio: f64,
}

impl DerivedParams {
    /// Critical input pump amplitude in units of `sqrt(omega0)`.
    pub fn alpha_in_crit_dimless(&self) -> f64 {
        self.alpha_in_crit / self.omega0.sqrt()
    }

    /// Pump input amplitude `r * alpha_in_crit` in units of `sqrt(omega0)`.
    pub fn pump_input(&self, r: f64) -> f64 {
        r * self.alpha_in_crit_dimless()
    }

    /// Photon flux (photons/s) of a propagating field whose amplitude is
    /// `amplitude` in units of `sqrt(omega0)`.
    pub fn photon_flux(&self, amplitude: f64) -> f64 {
        amplitude * amplitude * self.omega0
    }

    /// `omega0 / (K Q)`
    pub fn kerr_q_ratio(&self) -> f64 {
        1.0 / (self.kerr_ratio * self.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference() -> DeviceParams {
        DeviceParams::new(7e9, 2e-6, 30.0).unwrap()
    }

    #[test]
    fn kerr_constant_of_reference_device() {
        let d = reference().derive().unwrap();
        // independently evaluated at 40 digits
        assert_relative_eq!(d.kerr, -38_741_481.417_709_9, max_relative = 1e-12);
        assert_relative_eq!(d.kerr / (2.0 * PI), -6.166e6, max_relative = 1e-3);
        assert_relative_eq!(d.kerr_ratio, -8.808_426_100_473_34e-4, max_relative = 1e-12);
        assert_relative_eq!(d.gamma, 2.0 * PI * 7e9 / 30.0, max_relative = 1e-15);
        assert_relative_eq!(d.gamma, 1.466_076_571_675_24e9, max_relative = 1e-12);
        assert_relative_eq!(d.lj, 1.645_529_892_377_27e-10, max_relative = 1e-12);
        assert_relative_eq!(d.c, 3.141_509_716_088_49e-12, max_relative = 1e-12);
        assert_relative_eq!(d.ej, 6.582_119_569_509_07e-22, max_relative = 1e-12);
        assert_relative_eq!(
            d.alpha_in_crit_dimless(),
            0.492_706_902_709_874,
            max_relative = 1e-12
        );
    }

    #[test]
    fn critical_field_identity() {
        let d = reference().derive().unwrap();
        let lhs = d.alpha_in_crit.powi(2) * 27f64.sqrt() * d.kerr.abs();
        assert_relative_eq!(lhs, d.gamma * d.gamma, max_relative = 1e-12);
    }

    #[test]
    fn doubling_critical_current_halves_kerr() {
        let a = DeviceParams::new(7e9, 2e-6, 30.0)
            .unwrap()
            .derive()
            .unwrap();
        let b = DeviceParams::new(7e9, 4e-6, 30.0)
            .unwrap()
            .derive()
            .unwrap();
        assert_relative_eq!(b.kerr, a.kerr / 2.0, max_relative = 1e-14);
        assert_relative_eq!(b.kerr_ratio, a.kerr_ratio / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn kerr_ratio_constructor() {
        let p = DeviceParams::with_kerr_ratio(7e9, 30.0, -1.0).unwrap();
        assert_relative_eq!(p.ic_a, 5.285_055_660_284e-8, max_relative = 1e-12);
        let d = p.derive().unwrap();
        assert_relative_eq!(d.kerr_q_ratio(), -1.0, max_relative = 1e-13);
        for ratio in [-10.0, -100.0] {
            let d = DeviceParams::with_kerr_ratio(7e9, 30.0, ratio)
                .unwrap()
                .derive()
                .unwrap();
            assert_relative_eq!(d.kerr_q_ratio(), ratio, max_relative = 1e-13);
        }
        assert!(DeviceParams::with_kerr_ratio(7e9, 30.0, 1.0).is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let err = DeviceParams::new(7e9, -1.0, 30.0).unwrap_err();
        assert!(matches!(err, JpaError::Validation { field: "ic_a", .. }));
        let err = DeviceParams::new(0.0, 1e-6, 30.0).unwrap_err();
        assert!(matches!(err, JpaError::Validation { field: "f0_hz", .. }));
        let err = DeviceParams::new(7e9, 1e-6, f64::NAN).unwrap_err();
        assert!(matches!(err, JpaError::Validation { field: "q", .. }));
    }
}
