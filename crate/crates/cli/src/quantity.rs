//! Strict parsing of `"<number> <unit>"` strings into SI values.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    /// Rates: m^-1, cm^-1, mm^-1.
    InverseLength,
    Length,
    Area,
    Power,
    /// Heater power in mW, kept in mW.
    HeaterPower,
    /// Nonlinear coefficient: pm/V, m/V.
    Nonlinear,
    /// Phase in rad (bare numbers allowed).
    Angle,
    /// Bare number.
    Number,
}

impl Dim {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dim::InverseLength => &[("m^-1", 1.0), ("cm^-1", 100.0), ("mm^-1", 1e3)],
            Dim::Length => &[("m", 1.0), ("cm", 1e-2), ("mm", 1e-3), ("um", 1e-6), ("μm", 1e-6), ("nm", 1e-9)],
            Dim::Area => &[("m^2", 1.0), ("mm^2", 1e-6), ("um^2", 1e-12), ("μm^2", 1e-12)],
            Dim::Power => &[("W", 1.0), ("mW", 1e-3), ("uW", 1e-6), ("μW", 1e-6)],
            Dim::HeaterPower => &[("mW", 1.0), ("W", 1e3)],
            Dim::Nonlinear => &[("m/V", 1.0), ("pm/V", 1e-12)],
            Dim::Angle => &[("rad", 1.0), ("deg", std::f64::consts::PI / 180.0)],
            Dim::Number => &[],
        }
    }

    fn bare_allowed(self) -> bool {
        matches!(self, Dim::Angle | Dim::Number)
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Dim::Number {
            return f.write_str("a plain number");
        }
        let names: Vec<&str> = self.units().iter().map(|(u, _)| *u).collect();
        write!(f, "a number with unit {}", names.join(", "))
    }
}

/// Parses `text` as a quantity of dimension `dim`, returning SI (or mW for heater power).
pub fn parse_quantity(text: &str, dim: Dim) -> Result<f64, String> {
    let t = text.trim();
    let split = t.find(|c: char| c.is_whitespace()).unwrap_or(t.len());
    let (num, unit) = (&t[..split], t[split..].trim());
    let value: f64 = num.parse().map_err(|_| format!("`{t}` is not {dim}"))?;
    if !value.is_finite() {
        return Err(format!("`{t}` is not finite"));
    }
    if unit.is_empty() {
        return if dim.bare_allowed() { Ok(value) } else { Err(format!("`{t}` has no unit; expected {dim}")) };
    }
    dim.units()
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, f)| value * f)
        .ok_or_else(|| format!("unknown unit `{unit}` in `{t}`; expected {dim}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_in_both_units() {
        assert_eq!(parse_quantity("6.93 m^-1", Dim::InverseLength).unwrap(), 6.93);
        assert_eq!(parse_quantity("7.22 cm^-1", Dim::InverseLength).unwrap(), 722.0);
    }

    #[test]
    fn lengths_and_powers() {
        assert!((parse_quantity("205 um", Dim::Length).unwrap() - 205e-6).abs() < 1e-18);
        assert!((parse_quantity("4 mW", Dim::Power).unwrap() - 4e-3).abs() < 1e-18);
        assert_eq!(parse_quantity("4 mW", Dim::HeaterPower).unwrap(), 4.0);
        assert!((parse_quantity("17.19 pm/V", Dim::Nonlinear).unwrap() - 17.19e-12).abs() < 1e-24);
    }

    #[test]
    fn strictness() {
        assert!(parse_quantity("6.93", Dim::InverseLength).is_err());
        assert!(parse_quantity("6.93 cm-1", Dim::InverseLength).is_err());
        assert!(parse_quantity("four mm", Dim::Length).is_err());
        assert!(parse_quantity("inf m", Dim::Length).is_err());
        assert_eq!(parse_quantity("1.5", Dim::Angle).unwrap(), 1.5);
        assert!((parse_quantity("180 deg", Dim::Angle).unwrap() - std::f64::consts::PI).abs() < 1e-15);
    }
}
