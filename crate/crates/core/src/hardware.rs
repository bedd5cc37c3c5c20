//! Hardware description: lattice geometry, radii, fidelities and timings.
//!
//! Radii are stored in units of the lattice constant `d` and compared
//! against Euclidean distances with a small absolute tolerance, so that
//! e.g. diagonal neighbours at distance sqrt(2) are unambiguously inside a
//! radius of 1.5.

use std::collections::BTreeMap;

use crate::circuit::GateKind;
use crate::error::{MapError, Result};
use crate::num::{real, Real};

/// Absolute tolerance, in units of `d`, for radius comparisons.
pub const RADIUS_TOL: f64 = 1e-9;

/// Lattice site indices; the physical position is `(x*d, y*d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Coordinate {
    pub x: u32,
    pub y: u32,
}

impl Coordinate {
    pub fn new(x: u32, y: u32) -> Self {
        Coordinate { x, y }
    }

    /// Squared Euclidean distance in units of `d`.
    pub fn dist2(self, other: Coordinate) -> i64 {
        let dx = self.x as i64 - other.x as i64;
        let dy = self.y as i64 - other.y as i64;
        dx * dx + dy * dy
    }

    /// Euclidean distance in units of `d`.
    pub fn dist<R: Real>(self, other: Coordinate) -> R {
        R::from_i64(self.dist2(other))
            .expect("distance representable")
            .sqrt()
    }

    /// Rectangular (|dx| + |dy|) distance in units of `d`.
    pub fn rect_dist(self, other: Coordinate) -> u64 {
        self.x.abs_diff(other.x) as u64 + self.y.abs_diff(other.y) as u64
    }
}

// Row-major ordering: (y, x). Used for deterministic tie-breaking.
impl Ord for Coordinate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Coordinate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for Coordinate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Static description of the machine. Field names match the config file
/// keys; times are in microseconds, `d` in micrometres, `v` in um/us, radii
/// in units of `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct HardwareSpec<R: Real> {
    pub l: u32,
    pub d: R,
    pub r_int: R,
    pub r_restr: R,
    pub f_cz: R,
    pub f_h: R,
    pub f_shuttle: R,
    pub t_u3: R,
    pub t_cz: R,
    pub t_ccz: R,
    pub t_cccz: R,
    pub v: R,
    pub t_act: R,
    pub t_deact: R,
    pub t1: R,
    pub t2: R,
}

impl<R: Real> HardwareSpec<R> {
    pub fn validate(&self) -> Result<()> {
        let zero = R::zero();
        let one = R::one();
        if self.l == 0 {
            return Err(MapError::Config("l must be positive".into()));
        }
        if !(self.r_int > zero) {
            return Err(MapError::Config("r_int must be positive".into()));
        }
        if self.r_restr < self.r_int {
            return Err(MapError::Config("r_restr must be >= r_int".into()));
        }
        for (name, f) in [
            ("F_cz", self.f_cz),
            ("F_h", self.f_h),
            ("F_shuttle", self.f_shuttle),
        ] {
            if !(f > zero && f <= one) {
                return Err(MapError::Config(format!("{name} must be in (0, 1]")));
            }
        }
        for (name, t) in [
            ("d", self.d),
            ("t_u3", self.t_u3),
            ("t_cz", self.t_cz),
            ("t_ccz", self.t_ccz),
            ("t_cccz", self.t_cccz),
            ("v", self.v),
            ("t_act", self.t_act),
            ("t_deact", self.t_deact),
            ("T1", self.t1),
            ("T2", self.t2),
        ] {
            if !(t > zero) {
                return Err(MapError::Config(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        (self.l as usize) * (self.l as usize)
    }

    pub fn in_bounds(&self, c: Coordinate) -> bool {
        c.x < self.l && c.y < self.l
    }

    /// Row-major site for an index in `[0, l^2)`.
    pub fn site(&self, index: usize) -> Coordinate {
        Coordinate::new((index % self.l as usize) as u32, (index / self.l as usize) as u32)
    }

    /// Whether a distance (units of `d`) lies within a radius (units of `d`).
    pub fn within(&self, dist: R, radius: R) -> bool {
        dist <= radius + real(RADIUS_TOL)
    }

    pub fn coords_within(&self, a: Coordinate, b: Coordinate, radius: R) -> bool {
        self.within(a.dist(b), radius)
    }

    /// Effective coherence time T1*T2/(T1+T2) in us.
    pub fn t_eff(&self) -> R {
        self.t1 * self.t2 / (self.t1 + self.t2)
    }

    pub fn gate_time(&self, kind: GateKind) -> R {
        match kind {
            GateKind::U3 | GateKind::H => self.t_u3,
            GateKind::Cz | GateKind::Cx => self.t_cz,
            GateKind::C2z | GateKind::C2x => self.t_ccz,
            GateKind::C3z | GateKind::C3x => self.t_cccz,
            GateKind::Swap => self.t_cz * real(3.0) + self.t_u3 * real(6.0),
        }
    }

    /// Average fidelity of one native gate. The CZ figure is reused for the
    /// larger members of the CZ family.
    pub fn gate_fidelity(&self, kind: GateKind) -> R {
        match kind {
            GateKind::U3 | GateKind::H => self.f_h,
            _ => self.f_cz,
        }
    }

    /// Duration of a shuttle displacement of rectangular length `s` um,
    /// including AOD activation and deactivation.
    pub fn move_time(&self, s_um: R) -> R {
        self.t_act + s_um / self.v + self.t_deact
    }
}

const CONFIG_KEYS: [&str; 16] = [
    "l", "d", "r_int", "r_restr", "F_cz", "F_h", "F_shuttle", "t_u3", "t_cz", "t_ccz", "t_cccz",
    "v", "t_act", "t_deact", "T1", "T2",
];

/// Parses a flat `key = value` hardware config. Unknown keys are rejected,
/// missing keys are rejected; `#` starts a comment.
pub fn parse_hardware<R: Real>(text: &str) -> Result<HardwareSpec<R>> {
    let mut values: BTreeMap<&str, f64> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            MapError::Config(format!("line {}: expected 'key = value'", lineno + 1))
        })?;
        let key = key.trim();
        let known = CONFIG_KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| MapError::Config(format!("unknown key '{key}'")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| MapError::Config(format!("bad value for '{key}'")))?;
        if values.insert(known, value).is_some() {
            return Err(MapError::Config(format!("duplicate key '{key}'")));
        }
    }
    let get = |key: &str| -> Result<f64> {
        values
            .get(key)
            .copied()
            .ok_or_else(|| MapError::Config(format!("missing key '{key}'")))
    };
    let l_raw = get("l")?;
    if l_raw.fract() != 0.0 || l_raw < 1.0 {
        return Err(MapError::Config("l must be a positive integer".into()));
    }
    let spec = HardwareSpec {
        l: l_raw as u32,
        d: real(get("d")?),
        r_int: real(get("r_int")?),
        r_restr: real(get("r_restr")?),
        f_cz: real(get("F_cz")?),
        f_h: real(get("F_h")?),
        f_shuttle: real(get("F_shuttle")?),
        t_u3: real(get("t_u3")?),
        t_cz: real(get("t_cz")?),
        t_ccz: real(get("t_ccz")?),
        t_cccz: real(get("t_cccz")?),
        v: real(get("v")?),
        t_act: real(get("t_act")?),
        t_deact: real(get("t_deact")?),
        t1: real(get("T1")?),
        t2: real(get("T2")?),
    };
    spec.validate()?;
    Ok(spec)
}
