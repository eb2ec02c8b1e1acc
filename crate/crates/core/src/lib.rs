//! Josephson parametric amplifier simulation: pump steady state with the full
//! sine nonlinearity, stiff-pump linear gain, and semi-classical gain
//! saturation, plus a lab-frame phase-equation oracle.

pub mod classical_oracle;
pub mod device;
pub mod error;
pub mod linear;
pub mod nonlinearity;
pub mod rk4;
pub mod saturation;
pub mod special;
pub mod steady_state;

pub use device::{DerivedParams, DeviceParams};
pub use error::{JpaError, Result};
pub use nonlinearity::Order;
pub use steady_state::{PumpDrive, SteadyState};
