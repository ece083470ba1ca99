use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use diffprod_core::structured::SetSpec;
use diffprod_core::Rational;
use serde::Serialize;

use crate::error::RunError;

/// `p^r`, or a bare prime `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FieldSpec {
    pub p: u32,
    pub r: u32,
}

impl FromStr for FieldSpec {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || RunError::Config(format!("field must look like p^r, got `{s}`"));
        let (p, r) = match s.split_once('^') {
            Some((p, r)) => (p.trim(), r.trim()),
            None => (s.trim(), "1"),
        };
        Ok(FieldSpec { p: p.parse().map_err(|_| bad())?, r: r.parse().map_err(|_| bad())? })
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.p, self.r)
    }
}

/// Everything that determines a run. Serialized verbatim into the summary.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub field: FieldSpec,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
    pub size: Option<usize>,
    pub k: Option<Rational>,
    pub trials: Option<u64>,
    pub subfield: Option<u32>,
    pub w: Option<SetSpec>,
    pub x: Option<SetSpec>,
    pub a: Option<SetSpec>,
    pub b: Vec<SetSpec>,
    pub kernel: String,
    pub lambda: Option<Rational>,
}

pub fn parse_set(role: &str, s: &str) -> Result<SetSpec, RunError> {
    s.parse().map_err(|e| RunError::Config(format!("--{role}: {e}")))
}

pub fn parse_rational(flag: &str, s: &str) -> Result<Rational, RunError> {
    s.parse().map_err(|e| RunError::Config(format!("--{flag}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_specs() {
        assert_eq!("3^3".parse::<FieldSpec>().unwrap(), FieldSpec { p: 3, r: 3 });
        assert_eq!("31".parse::<FieldSpec>().unwrap(), FieldSpec { p: 31, r: 1 });
        assert!("3^".parse::<FieldSpec>().is_err());
        assert!("x".parse::<FieldSpec>().is_err());
    }
}
