//! Physical quantity kinds and unit suffixes. Values without a suffix are
//! taken as SI.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Dimensionless,
    Length,
    Time,
    /// Stiffness and pressure.
    Stress,
    /// Storage coefficient, inverse of stress.
    Compressibility,
    Density,
    Permeability,
    Viscosity,
    Velocity,
    /// A number whose SI unit depends on context; only bare values allowed.
    Any,
}

/// How a suffix converts to SI.
#[derive(Debug, Clone, Copy)]
enum Factor {
    Mul(f64),
    Div(f64),
}

const UNITS: &[(Quantity, &str, Factor)] = &[
    (Quantity::Length, "m", Factor::Mul(1.0)),
    (Quantity::Length, "km", Factor::Mul(1e3)),
    (Quantity::Length, "cm", Factor::Div(1e2)),
    (Quantity::Length, "mm", Factor::Div(1e3)),
    (Quantity::Time, "s", Factor::Mul(1.0)),
    (Quantity::Time, "ms", Factor::Div(1e3)),
    (Quantity::Time, "us", Factor::Div(1e6)),
    (Quantity::Stress, "Pa", Factor::Mul(1.0)),
    (Quantity::Stress, "kPa", Factor::Mul(1e3)),
    (Quantity::Stress, "MPa", Factor::Mul(1e6)),
    (Quantity::Stress, "GPa", Factor::Mul(1e9)),
    (Quantity::Compressibility, "1/Pa", Factor::Mul(1.0)),
    (Quantity::Compressibility, "1/kPa", Factor::Div(1e3)),
    (Quantity::Compressibility, "1/MPa", Factor::Div(1e6)),
    (Quantity::Compressibility, "1/GPa", Factor::Div(1e9)),
    (Quantity::Density, "kg/m^3", Factor::Mul(1.0)),
    (Quantity::Density, "g/cm^3", Factor::Mul(1e3)),
    (Quantity::Permeability, "m^2", Factor::Mul(1.0)),
    (Quantity::Permeability, "mD", Factor::Mul(9.869233e-16)),
    (Quantity::Permeability, "D", Factor::Mul(9.869233e-13)),
    (Quantity::Viscosity, "Pa*s", Factor::Mul(1.0)),
    (Quantity::Viscosity, "mPa*s", Factor::Div(1e3)),
    (Quantity::Viscosity, "cP", Factor::Div(1e3)),
    (Quantity::Velocity, "m/s", Factor::Mul(1.0)),
    (Quantity::Velocity, "km/s", Factor::Mul(1e3)),
];

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Dimensionless => "dimensionless",
            Quantity::Length => "length",
            Quantity::Time => "time",
            Quantity::Stress => "stress",
            Quantity::Compressibility => "compressibility",
            Quantity::Density => "density",
            Quantity::Permeability => "permeability",
            Quantity::Viscosity => "viscosity",
            Quantity::Velocity => "velocity",
            Quantity::Any => "SI number",
        }
    }

    /// Accepted suffixes.
    pub fn units(self) -> Vec<&'static str> {
        UNITS.iter().filter(|u| u.0 == self).map(|u| u.1).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnitError {
    NotANumber(String),
    Unknown { unit: String, expected: Quantity },
    Mismatch { unit: String, expected: Quantity, found: Quantity },
}

impl fmt::Display for UnitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitError::NotANumber(s) => write!(f, "`{s}` is not a number"),
            UnitError::Unknown { unit, expected } => {
                write!(f, "unknown unit `{unit}` for a {} value (accepted: {})", expected.name(), accepted(*expected))
            }
            UnitError::Mismatch { unit, expected, found } => write!(
                f,
                "unit mismatch: `{unit}` is a {} unit, expected {} (accepted: {})",
                found.name(),
                expected.name(),
                accepted(*expected)
            ),
        }
    }
}

impl std::error::Error for UnitError {}

fn accepted(q: Quantity) -> String {
    let list = q.units();
    if list.is_empty() {
        "no suffix".into()
    } else {
        list.join(", ")
    }
}

/// Converts `value` given in `unit` to SI.
pub fn to_si(value: f64, unit: &str, q: Quantity) -> Result<f64, UnitError> {
    match UNITS.iter().find(|u| u.1 == unit) {
        Some(&(kind, _, factor)) if kind == q => Ok(match factor {
            Factor::Mul(s) => value * s,
            Factor::Div(s) => value / s,
        }),
        Some(&(kind, _, _)) => Err(UnitError::Mismatch { unit: unit.into(), expected: q, found: kind }),
        None => Err(UnitError::Unknown { unit: unit.into(), expected: q }),
    }
}

/// Converts an SI value to `unit`.
pub fn from_si(value: f64, unit: &str, q: Quantity) -> Result<f64, UnitError> {
    match UNITS.iter().find(|u| u.1 == unit) {
        Some(&(kind, _, factor)) if kind == q => Ok(match factor {
            Factor::Mul(s) => value / s,
            Factor::Div(s) => value * s,
        }),
        Some(&(kind, _, _)) => Err(UnitError::Mismatch { unit: unit.into(), expected: q, found: kind }),
        None => Err(UnitError::Unknown { unit: unit.into(), expected: q }),
    }
}

/// Parses `number [unit]`.
pub fn parse_quantity(text: &str, q: Quantity) -> Result<f64, UnitError> {
    let text = text.trim();
    let (num, unit) = match text.split_once(char::is_whitespace) {
        Some((n, u)) => (n, u.trim()),
        None => (text, ""),
    };
    let value: f64 = num.parse().map_err(|_| UnitError::NotANumber(text.into()))?;
    if !value.is_finite() {
        return Err(UnitError::NotANumber(text.into()));
    }
    if unit.is_empty() {
        Ok(value)
    } else {
        to_si(value, unit, q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes_convert() {
        assert_eq!(parse_quantity("36 GPa", Quantity::Stress).unwrap(), 36e9);
        assert_eq!(parse_quantity("2.5 km", Quantity::Length).unwrap(), 2500.0);
        assert_eq!(parse_quantity("1e-3", Quantity::Viscosity).unwrap(), 1e-3);
        assert_eq!(parse_quantity("8.75e-2 1/GPa", Quantity::Compressibility).unwrap(), 8.75e-2 / 1e9);
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let err = parse_quantity("3 GPa", Quantity::Length).unwrap_err();
        assert!(matches!(err, UnitError::Mismatch { .. }));
        assert!(matches!(parse_quantity("3 furlong", Quantity::Length), Err(UnitError::Unknown { .. })));
        assert!(matches!(parse_quantity("abc", Quantity::Length), Err(UnitError::NotANumber(_))));
        assert!(parse_quantity("1 m", Quantity::Any).is_err());
    }
}
