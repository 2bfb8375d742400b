//! Built-in scenario configurations.

use crate::config::{Config, ConfigError, Document};

pub const PRESETS: [(&str, &str); 5] = [
    ("example1-compressible", include_str!("../presets/example1-compressible.cfg")),
    ("example1-nearly-incompressible", include_str!("../presets/example1-nearly-incompressible.cfg")),
    ("example2-isotropic", include_str!("../presets/example2-isotropic.cfg")),
    ("example2-anisotropic", include_str!("../presets/example2-anisotropic.cfg")),
    ("example3-heterogeneous", include_str!("../presets/example3-heterogeneous.cfg")),
];

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.0).collect()
}

/// Preset file contents.
pub fn text(name: &str) -> Result<&'static str, ConfigError> {
    PRESETS
        .iter()
        .find(|p| p.0 == name)
        .map(|p| p.1)
        .ok_or_else(|| ConfigError::UnknownScenario { name: name.into(), available: names().join(", ") })
}

pub fn document(name: &str) -> Result<Document, ConfigError> {
    Document::parse(text(name)?)
}

pub fn scenario(name: &str) -> Result<Config, ConfigError> {
    Config::from_document(&document(name)?)
}
