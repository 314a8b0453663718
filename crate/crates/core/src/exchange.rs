use serde::{Deserialize, Serialize};

use crate::error::{HbtError, Result};
use crate::real::Real;

/// Exchange sign η of a two-particle state: `+1` for Bose-Einstein,
/// `-1` for Fermi-Dirac statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exchange {
    Boson,
    Fermion,
}

impl Exchange {
    #[inline]
    pub fn sign<T: Real>(self) -> T {
        match self {
            Exchange::Boson => T::one(),
            Exchange::Fermion => -T::one(),
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Exchange::Boson => 1,
            Exchange::Fermion => -1,
        }
    }
}

impl TryFrom<i32> for Exchange {
    type Error = HbtError;

    fn try_from(eta: i32) -> Result<Self> {
        match eta {
            1 => Ok(Exchange::Boson),
            -1 => Ok(Exchange::Fermion),
            other => Err(crate::error::invalid(
                "eta",
                format!("exchange sign must be +1 or -1, got {other}"),
            )),
        }
    }
}
