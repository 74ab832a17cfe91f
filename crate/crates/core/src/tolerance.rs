//! Numerical thresholds used by validation and support decisions.

/// Environment variable that rescales every threshold in [`Tolerances`].
pub const TOLERANCE_SCALE_ENV: &str = "OBSENT_TOL";

/// Validation and support thresholds.
///
/// `hermiticity` is relative to the largest absolute entry; `support` is
/// relative to the largest eigenvalue. Everything else is absolute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hermiticity: f64,
    pub psd: f64,
    pub trace: f64,
    pub povm_sum: f64,
    pub support: f64,
    pub degeneracy: f64,
    pub zero_effect: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermiticity: 1e-9,
            psd: 1e-9,
            trace: 1e-9,
            povm_sum: 1e-8,
            support: 1e-12,
            degeneracy: 1e-9,
            zero_effect: 1e-12,
        }
    }
}

impl Tolerances {
    /// Every threshold multiplied by `scale`.
    pub fn scaled(scale: f64) -> Self {
        let d = Self::default();
        Self {
            hermiticity: d.hermiticity * scale,
            psd: d.psd * scale,
            trace: d.trace * scale,
            povm_sum: d.povm_sum * scale,
            support: d.support * scale,
            degeneracy: d.degeneracy * scale,
            zero_effect: d.zero_effect * scale,
        }
    }

    /// Reads the scale from `OBSENT_TOL`; unset means 1.
    pub fn from_env() -> std::result::Result<Self, String> {
        Ok(Self::scaled(scale_from_env()?))
    }
}

/// Parses `OBSENT_TOL`. Returns 1 when the variable is unset.
pub fn scale_from_env() -> std::result::Result<f64, String> {
    match std::env::var(TOLERANCE_SCALE_ENV) {
        Err(_) => Ok(1.0),
        Ok(raw) => {
            let s: f64 = raw
                .trim()
                .parse()
                .map_err(|_| format!("{TOLERANCE_SCALE_ENV}={raw:?} is not a number"))?;
            if s.is_finite() && s > 0.0 {
                Ok(s)
            } else {
                Err(format!("{TOLERANCE_SCALE_ENV} must be positive and finite, got {s}"))
            }
        }
    }
}
