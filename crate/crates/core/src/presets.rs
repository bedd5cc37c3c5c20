//! Bundled hardware presets: `shuttling`, `gate` and `mixed`.

use crate::error::{MapError, Result};
use crate::hardware::{parse_hardware, HardwareSpec};
use crate::num::Real;

pub const SHUTTLING: &str = include_str!("../presets/shuttling.cfg");
pub const GATE: &str = include_str!("../presets/gate.cfg");
pub const MIXED: &str = include_str!("../presets/mixed.cfg");

pub const NAMES: [&str; 3] = ["shuttling", "gate", "mixed"];

pub fn by_name<R: Real>(name: &str) -> Result<HardwareSpec<R>> {
    let text = match name {
        "shuttling" => SHUTTLING,
        "gate" => GATE,
        "mixed" => MIXED,
        other => {
            return Err(MapError::Config(format!(
                "unknown hardware preset '{other}' (expected one of {NAMES:?})"
            )))
        }
    };
    parse_hardware(text)
}
