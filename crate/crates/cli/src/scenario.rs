use crate::CliError;
use serde::Deserialize;
use serde_json::Value;
use std::path::Path;
use supconv::certify::{default_resolution, CertifyOptions};
use supconv::{parse_technology, Technology};

/// A scenario file: the firms plus optional defaults for the commands.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: Option<String>,
    pub firms: Vec<Technology>,
    pub resolution: Option<usize>,
    pub brute_resolution: Option<usize>,
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    /// Input vector `certify` examines.
    pub probe: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    name: Option<String>,
    firms: Vec<Value>,
    resolution: Option<usize>,
    brute_resolution: Option<usize>,
    tolerance: Option<f64>,
    seed: Option<u64>,
    trials: Option<usize>,
    probe: Option<Vec<f64>>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read scenario {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: Raw = serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed scenario: {e}")))?;
        if raw.firms.is_empty() {
            return Err(CliError::Input("scenario lists no firms".into()));
        }
        let firms = raw
            .firms
            .iter()
            .enumerate()
            .map(|(i, rec)| parse_technology(rec).map_err(|e| CliError::Input(format!("firm {}: {e}", i + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        let n = firms[0].dim();
        if let Some(j) = firms.iter().position(|t| t.dim() != n) {
            return Err(CliError::Input(format!("firm {} has {} inputs, firm 1 has {n}", j + 1, firms[j].dim())));
        }
        if let Some(p) = &raw.probe {
            if p.len() != n {
                return Err(CliError::Input(format!("probe has {} components, firms have {n} inputs", p.len())));
            }
        }
        if raw.tolerance.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
            return Err(CliError::Input("tolerance must be positive".into()));
        }
        if raw.resolution == Some(0) || raw.brute_resolution == Some(0) {
            return Err(CliError::Input("resolutions must be positive".into()));
        }
        Ok(Scenario {
            name: raw.name,
            firms,
            resolution: raw.resolution,
            brute_resolution: raw.brute_resolution,
            tolerance: raw.tolerance,
            seed: raw.seed,
            trials: raw.trials,
            probe: raw.probe,
        })
    }

    pub fn dim(&self) -> usize {
        self.firms[0].dim()
    }

    pub fn resolution(&self) -> usize {
        self.resolution.unwrap_or_else(|| default_resolution(self.dim()))
    }

    /// Checker options: scenario values over the defaults, `seed` over both.
    pub fn options(&self, seed: Option<u64>) -> CertifyOptions {
        let base = CertifyOptions::for_dim(self.dim());
        CertifyOptions {
            resolution: self.resolution(),
            brute_resolution: self.brute_resolution.unwrap_or(base.brute_resolution),
            seed: seed.or(self.seed).unwrap_or(base.seed),
            trials: self.trials.unwrap_or(base.trials),
            tolerance: self.tolerance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario() {
        let s = Scenario::parse(r#"{"firms": [{"family": "linear", "v": [1, 2]}]}"#).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.resolution(), 512);
        assert_eq!(s.options(Some(7)).seed, 7);
    }

    #[test]
    fn rejects_bad_scenarios() {
        for text in [
            r#"{"firms": []}"#,
            r#"{"firms": [{"family": "linear", "v": [1, 2]}], "colour": 1}"#,
            r#"{"firms": [{"family": "linear", "v": [1, 2]}, {"family": "linear", "v": [1, 2, 3]}]}"#,
            r#"{"firms": [{"family": "linear", "v": [1, 2]}], "probe": [1]}"#,
            r#"{"firms": [{"family": "cobb_douglas", "alpha": [0.5, 0.6]}]}"#,
            r#"{"firms": "#,
        ] {
            assert!(matches!(Scenario::parse(text), Err(CliError::Input(_))), "{text}");
        }
    }
}
