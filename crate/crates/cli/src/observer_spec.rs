use psyscale::observers::{load_manifest, GaborBankConfig, ObserverKind};
use psyscale::PerceptualScale;
use std::path::Path;
use std::sync::Arc;

use crate::Invalid;

/// Parses `gabor`, `random[:SEED]`, `embedding:PATH` or
/// `synthetic:EXP:SIGMA:SEED`, where the synthetic scale is `t^EXP`.
pub fn parse_observer(spec: &str) -> anyhow::Result<ObserverKind> {
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match head {
        "gabor" if rest.is_empty() => Ok(ObserverKind::GaborBank(GaborBankConfig::default())),
        "random" => {
            let seed = if rest.is_empty() { 0 } else { number(rest, "random seed")? };
            Ok(ObserverKind::Random { seed })
        }
        "embedding" if !rest.is_empty() => {
            let path = Path::new(rest);
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_else(|| rest.to_string());
            Ok(ObserverKind::EmbeddingL2 {
                name,
                manifest: Arc::new(load_manifest(path)?),
            })
        }
        "synthetic" => {
            let parts: Vec<&str> = rest.split(':').collect();
            let [exp, sigma, seed] = parts[..] else {
                return Err(Invalid(format!("synthetic observer needs EXP:SIGMA:SEED, got {spec:?}")).into());
            };
            let exp: f64 = number(exp, "synthetic exponent")?;
            if !(exp.is_finite() && exp > 0.0) {
                return Err(Invalid(format!("synthetic exponent must be positive, got {exp}")).into());
            }
            let sigma: f64 = number(sigma, "synthetic sigma")?;
            let scale = PerceptualScale::from_fn(|t| t.powf(exp), sigma.max(f64::MIN_POSITIVE))
                .map_err(|e| Invalid(e.to_string()))?;
            Ok(ObserverKind::Synthetic {
                scale,
                sigma,
                seed: number(seed, "synthetic seed")?,
            })
        }
        _ => Err(Invalid(format!(
            "unknown observer {spec:?}; expected gabor, random[:SEED], embedding:PATH or synthetic:EXP:SIGMA:SEED"
        ))
        .into()),
    }
}

fn number<T: std::str::FromStr>(text: &str, what: &str) -> Result<T, Invalid> {
    text.parse()
        .map_err(|_| Invalid(format!("{what} {text:?} is not a valid number")))
}
