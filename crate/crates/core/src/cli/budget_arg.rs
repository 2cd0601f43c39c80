use std::fmt;
use std::str::FromStr;

use crate::budget::{chunk_bytes, ArrayRegistry, DimensionSet};
use crate::{Error, Result};

/// A memory budget as given on the command line: a byte count, or a
/// multiple of the footprint of a single timestep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BudgetSpec {
    Bytes(u64),
    SingleTimestepMultiple(f64),
}

impl BudgetSpec {
    pub fn resolve(&self, registry: &ArrayRegistry, dims: &DimensionSet) -> Result<u64> {
        match *self {
            BudgetSpec::Bytes(b) => Ok(b),
            BudgetSpec::SingleTimestepMultiple(k) => {
                let one = chunk_bytes(registry, dims, 1)?;
                Ok((k * one as f64).floor() as u64)
            }
        }
    }
}

impl FromStr for BudgetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("cannot parse budget '{s}'"));
        let t = s.trim();
        if let Some(k) = t.strip_suffix("x-single-timestep") {
            let k: f64 = k.parse().map_err(|_| bad())?;
            if !(k > 0.0 && k.is_finite()) {
                return Err(bad());
            }
            return Ok(BudgetSpec::SingleTimestepMultiple(k));
        }
        let split = t.find(|c: char| !c.is_ascii_digit()).unwrap_or(t.len());
        let (num, unit) = t.split_at(split);
        let n: u64 = num.parse().map_err(|_| bad())?;
        let mult: u64 = match unit.trim().to_ascii_lowercase().as_str() {
            "" | "b" => 1,
            "k" | "kb" => 1_000,
            "m" | "mb" => 1_000_000,
            "g" | "gb" => 1_000_000_000,
            "kib" => 1 << 10,
            "mib" => 1 << 20,
            "gib" => 1 << 30,
            _ => return Err(bad()),
        };
        n.checked_mul(mult).map(BudgetSpec::Bytes).ok_or_else(bad)
    }
}

impl fmt::Display for BudgetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BudgetSpec::Bytes(b) => write!(f, "{b}"),
            BudgetSpec::SingleTimestepMultiple(k) => write!(f, "{k}x-single-timestep"),
        }
    }
}
