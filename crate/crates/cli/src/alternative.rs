//! Alternatives for the `power` command.

use ncprob_core::AlternativeTransform;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::Failure;

/// `identity`, `pow:A` (`g(u) = u^A`) or `normal-shift:MU`
/// (`g(u) = Φ(Φ⁻¹(u) - MU)`, the null CDF of a unit normal sample shifted by `MU`).
pub fn parse(spec: &str) -> Result<AlternativeTransform, Failure> {
    let (name, arg) = match spec.split_once(':') {
        Some((name, arg)) => (name, Some(arg)),
        None => (spec, None),
    };
    let number = |arg: Option<&str>| -> Result<f64, Failure> {
        let arg = arg.ok_or_else(|| Failure::input(format!("alternative {name} needs a parameter, as in {name}:1.5")))?;
        arg.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Failure::input(format!("cannot parse {arg:?} as the parameter of {name}")))
    };
    let g = match name {
        "identity" if arg.is_none() => AlternativeTransform::identity(),
        "pow" => {
            let a = number(arg)?;
            if a <= 0.0 {
                return Err(Failure::input(format!("pow exponent must be positive, got {a}")));
            }
            AlternativeTransform::new(move |u| u.powf(a))?
        }
        "normal-shift" => {
            let mu = number(arg)?;
            let z = Normal::new(0.0, 1.0).expect("standard normal");
            AlternativeTransform::new(move |u| match u {
                u if u <= 0.0 => 0.0,
                u if u >= 1.0 => 1.0,
                u => z.cdf(z.inverse_cdf(u) - mu),
            })?
        }
        _ => {
            return Err(Failure::input(format!(
                "unknown alternative {spec:?}; expected identity, pow:A or normal-shift:MU"
            )))
        }
    };
    Ok(g)
}

/// Piecewise-linear alternative from lines of `u g(u)` pairs; `#` starts a
/// comment line.
pub fn from_file(text: &str) -> Result<AlternativeTransform, Failure> {
    let mut knots = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let pair = match fields.as_slice() {
            [u, g] => u.parse::<f64>().ok().zip(g.parse::<f64>().ok()),
            _ => None,
        };
        match pair {
            Some((u, g)) if (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&g) => knots.push((u, g)),
            _ => {
                return Err(Failure::input(format!(
                    "transform line {}: expected two numbers in [0, 1], got {line:?}",
                    idx + 1
                )))
            }
        }
    }
    Ok(AlternativeTransform::from_knots(&knots)?)
}
