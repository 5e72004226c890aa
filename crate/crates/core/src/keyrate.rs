//! Secret-key-rate evaluation from single-photon bounds and the measured
//! signal-pair gain/error rate:
//! R = P1_a P1_b Y11_z [1 - H2(e11_x)] - Q_z f H2(E_z).

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KeyRateError {
    #[error("{name} = {value} outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("reconciliation efficiency {0} must be >= 1")]
    BadReconciliation(f64),
}

/// Binary entropy -x log2 x - (1-x) log2 (1-x), continuous at the endpoints.
pub fn binary_entropy(x: f64) -> Result<f64, KeyRateError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(KeyRateError::OutOfRange { name: "entropy argument", value: x });
    }
    Ok(h2_unchecked(x))
}

#[inline]
pub(crate) fn h2_unchecked(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Everything the key-rate formula needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRateInputs {
    pub p1_a: f64,
    pub p1_b: f64,
    pub y11_z: f64,
    pub e11_x: f64,
    pub q_z: f64,
    pub e_z: f64,
    pub f_ec: f64,
}

impl KeyRateInputs {
    pub fn validate(&self) -> Result<(), KeyRateError> {
        for (name, value) in [
            ("p1_a", self.p1_a),
            ("p1_b", self.p1_b),
            ("y11_z", self.y11_z),
            ("e11_x", self.e11_x),
            ("q_z", self.q_z),
            ("e_z", self.e_z),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(KeyRateError::OutOfRange { name, value });
            }
        }
        if self.f_ec < 1.0 {
            return Err(KeyRateError::BadReconciliation(self.f_ec));
        }
        Ok(())
    }
}

/// Key rate per pulse pair. May be negative; sweeps treat R <= 0 as
/// "no key" but the raw value is preserved for monotonicity checks.
pub fn key_rate(inputs: &KeyRateInputs) -> Result<f64, KeyRateError> {
    inputs.validate()?;
    let secret = inputs.p1_a * inputs.p1_b * inputs.y11_z * (1.0 - h2_unchecked(inputs.e11_x));
    let correction = inputs.q_z * inputs.f_ec * h2_unchecked(inputs.e_z);
    Ok(secret - correction)
}
