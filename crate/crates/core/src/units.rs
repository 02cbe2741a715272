//! SI conversions for the unit suffixes accepted at the boundaries.

pub const PER_CM: f64 = 100.0;
pub const UM: f64 = 1e-6;
pub const NM: f64 = 1e-9;
pub const MM: f64 = 1e-3;
pub const CM: f64 = 1e-2;
pub const MW: f64 = 1e-3;
pub const UW: f64 = 1e-6;
pub const PM_PER_V: f64 = 1e-12;

pub fn per_cm_to_per_m(x: f64) -> f64 {
    x * PER_CM
}

pub fn per_m_to_per_cm(x: f64) -> f64 {
    x / PER_CM
}
