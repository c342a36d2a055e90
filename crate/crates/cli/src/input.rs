//! Parsing of exponents, functions and regions given on the command line.

use std::fs::File;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vicsek::energy::Region;
use vicsek::function::io::{read_function, LoadedFunction};
use vicsek::geometry::measure::alpha_p;
use vicsek::{CellFunction64, Exponent, PaFunction64, PaFunctionQ};

use crate::report::CliError;

/// `p ∈ [1, ∞)` or `∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PSpec {
    Finite(Exponent),
    Inf,
}

impl PSpec {
    pub fn finite(self) -> Result<Exponent, CliError> {
        match self {
            PSpec::Finite(p) => Ok(p),
            PSpec::Inf => Err(CliError::Usage("this command needs a finite p".into())),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            PSpec::Finite(p) => p.get(),
            PSpec::Inf => f64::INFINITY,
        }
    }
}

pub fn parse_p(s: &str) -> Result<PSpec, String> {
    let s = s.trim();
    if matches!(s, "inf" | "infinity" | "∞") {
        return Ok(PSpec::Inf);
    }
    let p: f64 = s.parse().map_err(|_| format!("cannot parse p = {s:?}"))?;
    if p.is_nan() || p < 1.0 || p.is_infinite() {
        return Err(format!("p must be at least 1 or \"inf\", got {s}"));
    }
    Exponent::new(p).map(PSpec::Finite).map_err(|e| e.to_string())
}

/// `critical` (that is `α_p`) or a number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaSpec {
    Critical,
    Value(f64),
}

impl AlphaSpec {
    pub fn resolve(self, p: Exponent) -> f64 {
        match self {
            AlphaSpec::Critical => alpha_p(p),
            AlphaSpec::Value(a) => a,
        }
    }
}

pub fn parse_alpha(s: &str) -> Result<AlphaSpec, String> {
    match s.trim() {
        "critical" => Ok(AlphaSpec::Critical),
        t => match t.parse::<f64>() {
            Ok(a) if a.is_finite() && a > 0.0 => Ok(AlphaSpec::Value(a)),
            _ => Err(format!("alpha must be \"critical\" or a positive number, got {t:?}")),
        },
    }
}

/// The `--function` argument.
#[derive(Clone, Debug, PartialEq)]
pub enum FunctionSpec {
    Cross,
    Dist,
    Cantor,
    Const(f64),
    /// Random dyadic values on `V_level`.
    Random { seed: u64, level: u32 },
    File(PathBuf),
}

/// Default level of `random:<seed>` functions.
pub const RANDOM_LEVEL: u32 = 2;

pub fn parse_function(s: &str) -> Result<FunctionSpec, String> {
    let s = s.trim();
    let bad = || format!("cannot parse function {s:?}");
    Ok(match s {
        "cross" => FunctionSpec::Cross,
        "dist" => FunctionSpec::Dist,
        "cantor" => FunctionSpec::Cantor,
        "const" => FunctionSpec::Const(1.0),
        _ => {
            if let Some(c) = s.strip_prefix("const:") {
                FunctionSpec::Const(c.parse().map_err(|_| bad())?)
            } else if let Some(rest) = s.strip_prefix("random:") {
                let (seed, level) = match rest.split_once(':') {
                    Some((a, b)) => (a, b.parse().map_err(|_| bad())?),
                    None => (rest, RANDOM_LEVEL),
                };
                FunctionSpec::Random { seed: seed.parse().map_err(|_| bad())?, level }
            } else if s.is_empty() {
                return Err(bad());
            } else {
                FunctionSpec::File(PathBuf::from(s.strip_prefix("file:").unwrap_or(s)))
            }
        }
    })
}

/// A loaded function in floating point.
#[derive(Clone, Debug)]
pub enum Func {
    Pa(PaFunction64),
    Dist,
    Cantor,
    Cells(CellFunction64),
}

impl FunctionSpec {
    pub fn load(&self) -> Result<Func, CliError> {
        Ok(match self {
            FunctionSpec::Cross => Func::Pa(PaFunction64::cross()),
            FunctionSpec::Dist => Func::Dist,
            FunctionSpec::Cantor => Func::Cantor,
            FunctionSpec::Const(c) => Func::Pa(PaFunction64::constant(*c, 0)?),
            FunctionSpec::Random { seed, level } => {
                Func::Pa(PaFunction64::random(*level, &mut ChaCha8Rng::seed_from_u64(*seed))?)
            }
            FunctionSpec::File(path) => {
                let file = File::open(path)
                    .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
                match read_function(file)? {
                    LoadedFunction::Pa(f) => Func::Pa(f),
                    LoadedFunction::Cell(f) => Func::Cells(f),
                }
            }
        })
    }

    /// The same function with exact rational values, where one exists.
    pub fn load_exact(&self) -> Result<ExactFunc, CliError> {
        Ok(match self {
            FunctionSpec::Cross => ExactFunc::Pa(PaFunctionQ::cross()),
            FunctionSpec::Dist => ExactFunc::Dist,
            FunctionSpec::Cantor => ExactFunc::Cantor,
            FunctionSpec::Const(c) => {
                let q = num_rational::BigRational::from_float(*c)
                    .ok_or_else(|| CliError::Usage(format!("{c} has no exact value")))?;
                ExactFunc::Pa(PaFunctionQ::constant(q, 0)?)
            }
            FunctionSpec::Random { seed, level } => {
                ExactFunc::Pa(PaFunctionQ::random(*level, &mut ChaCha8Rng::seed_from_u64(*seed))?)
            }
            FunctionSpec::File(_) => {
                return Err(CliError::Usage("--exact is not available for functions read from files".into()))
            }
        })
    }
}

#[derive(Clone, Debug)]
pub enum ExactFunc {
    Pa(PaFunctionQ),
    Dist,
    Cantor,
}

impl Func {
    pub fn pa(&self) -> Result<&PaFunction64, CliError> {
        match self {
            Func::Pa(f) => Ok(f),
            _ => Err(CliError::Usage("this command needs a piecewise-affine function (cross, const, random or a vertex file)".into())),
        }
    }
}

pub fn parse_region(s: &str) -> Result<Region, String> {
    Region::parse(s).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents() {
        assert_eq!(parse_p("inf"), Ok(PSpec::Inf));
        assert_eq!(parse_p("2").unwrap().as_f64(), 2.0);
        assert!(parse_p("0.5").is_err());
        assert!(parse_p("nan").is_err());
        assert!(parse_p("two").is_err());
    }

    #[test]
    fn critical_alpha() {
        let p = Exponent::new(3.0).unwrap();
        let a = parse_alpha("critical").unwrap().resolve(p);
        assert!((a - (1.0 - 1.0 / 3.0 + 5f64.ln() / 3f64.ln() / 3.0)).abs() < 1e-15);
        assert_eq!(parse_alpha("0.5").unwrap(), AlphaSpec::Value(0.5));
        assert!(parse_alpha("-1").is_err());
    }

    #[test]
    fn functions() {
        assert_eq!(parse_function("cross"), Ok(FunctionSpec::Cross));
        assert_eq!(parse_function("random:7"), Ok(FunctionSpec::Random { seed: 7, level: RANDOM_LEVEL }));
        assert_eq!(parse_function("random:7:3"), Ok(FunctionSpec::Random { seed: 7, level: 3 }));
        assert_eq!(parse_function("const:2.5"), Ok(FunctionSpec::Const(2.5)));
        assert_eq!(parse_function("data.csv"), Ok(FunctionSpec::File("data.csv".into())));
        assert!(parse_function("random:x").is_err());
    }
}
