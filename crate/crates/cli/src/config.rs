//! Experiment configuration: one JSON document per run.

use bykov_core::{BykovError, Observable, SectionPoint, SystemParams};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seed {
    pub theta0: f64,
    pub z0: f64,
}

impl Default for Seed {
    fn default() -> Self {
        Seed {
            theta0: 1.0,
            z0: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Per-time tolerance of the conjugacy check, scaled by `max(1, |t|)`.
    pub conjugacy: f64,
    /// Distance of the parity tails from their limits in the certificate.
    pub certificate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            conjugacy: 1e-8,
            certificate: 1e-3,
        }
    }
}

fn default_pairs() -> usize {
    12
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: SystemParams,
    #[serde(default)]
    pub params_g: Option<SystemParams>,
    #[serde(default)]
    pub seed: Seed,
    #[serde(default = "default_pairs")]
    pub n_pairs: usize,
    #[serde(default)]
    pub observable: Observable,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn seed_point(&self) -> Result<SectionPoint, CliError> {
        Ok(SectionPoint::from_coordinate(
            bykov_core::Chart::Out2,
            self.seed.theta0,
            self.seed.z0,
        )?)
    }

    fn validate(self) -> Result<Self, CliError> {
        self.params.validate()?;
        if let Some(g) = &self.params_g {
            g.validate()?;
        }
        if !(self.seed.z0 > 0.0 && self.seed.z0 < 1.0) {
            return Err(violation("seed.z0 in (0,1)"));
        }
        if !self.seed.theta0.is_finite() {
            return Err(violation("finite seed.theta0"));
        }
        if self.n_pairs < 1 {
            return Err(violation("n_pairs >= 1"));
        }
        self.observable.validate()?;
        let t = self.tolerances;
        if !(t.conjugacy > 0.0 && t.certificate > 0.0) {
            return Err(violation("tolerances > 0"));
        }
        Ok(self)
    }
}

fn violation(what: &str) -> CliError {
    CliError::Model(BykovError::ConstraintViolation(format!("{what} violated")))
}

/// Parses and validates a config; parse failures carry the JSON path of
/// the offending value (`$.params.a`).
pub fn parse_config(text: &[u8]) -> Result<ExperimentConfig, CliError> {
    let mut de = serde_json::Deserializer::from_slice(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let mut path = e.path().to_string();
        let message = e.inner().to_string();
        // a missing key is reported at its parent; point at the key itself
        if let Some(field) = message
            .strip_prefix("missing field `")
            .and_then(|rest| rest.split('`').next())
        {
            path = if path == "." {
                field.to_string()
            } else {
                format!("{path}.{field}")
            };
        }
        let path = if path == "." {
            "$".to_string()
        } else {
            format!("$.{path}")
        };
        CliError::Parse { path, message }
    })?;
    de.end().map_err(|e| CliError::Parse {
        path: "$".into(),
        message: e.to_string(),
    })?;
    cfg.validate()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        r#"{"params": {"C1": 2, "E1": 1, "omega1": 1, "C2": 3, "E2": 1.5, "omega2": 2, "a": 0.5}}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL.as_bytes()).unwrap();
        assert_eq!(cfg.n_pairs, 12);
        assert_eq!(
            cfg.seed,
            Seed {
                theta0: 1.0,
                z0: 0.1
            }
        );
        assert_eq!(cfg.observable, Observable::piecewise(0.0, 1.0));
        assert!(cfg.params_g.is_none());
    }

    #[test]
    fn missing_key_reports_its_path() {
        let text = MINIMAL.replace(", \"a\": 0.5", "");
        match parse_config(text.as_bytes()) {
            Err(CliError::Parse { path, .. }) => assert_eq!(path, "$.params.a"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_type_reports_its_path() {
        let text = MINIMAL.replace("\"E2\": 1.5", "\"E2\": \"fast\"");
        match parse_config(text.as_bytes()) {
            Err(CliError::Parse { path, .. }) => assert_eq!(path, "$.params.E2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_values_are_constraint_violations() {
        let text = MINIMAL.replace("0.5}", "1.2}");
        assert!(matches!(
            parse_config(text.as_bytes()),
            Err(CliError::Model(BykovError::ConstraintViolation(_)))
        ));
        let text = MINIMAL.replace("}}", "}, \"seed\": {\"theta0\": 0, \"z0\": 1.5}}");
        assert!(matches!(
            parse_config(text.as_bytes()),
            Err(CliError::Model(_))
        ));
    }

    #[test]
    fn full_config() {
        let text = r#"{
            "params": {"C1": 2, "E1": 1, "omega1": 1, "C2": 3, "E2": 1.5, "omega2": 2, "a": 0.5,
                       "perturbation": {"c1": 0.1, "c2": 0.1, "eps": 0.5}},
            "params_g": {"C1": 4, "E1": 2, "omega1": 2.3333333333333335, "C2": 6, "E2": 3, "omega2": 1, "a": 0.25},
            "seed": {"theta0": 0.5, "z0": 0.2},
            "n_pairs": 8,
            "observable": {"kind": "smooth", "exponent": 2, "g_boundary": 0.5, "g_sigma1": 0, "g_sigma2": 1},
            "tolerances": {"conjugacy": 1e-9}
        }"#;
        let cfg = parse_config(text.as_bytes()).unwrap();
        assert_eq!(cfg.params.perturbation.unwrap().eps, 0.5);
        assert_eq!(cfg.params_g.unwrap().a, 0.25);
        assert_eq!(cfg.n_pairs, 8);
        assert_eq!(cfg.tolerances.conjugacy, 1e-9);
        assert_eq!(cfg.tolerances.certificate, 1e-3);
        assert_eq!(cfg.observable, Observable::smooth(0.0, 1.0, 2.0, 0.5));
    }

    #[test]
    fn unknown_keys_and_trailing_bytes_are_rejected() {
        let text = MINIMAL.replace("}}", "}, \"pairs\": 3}");
        assert!(matches!(
            parse_config(text.as_bytes()),
            Err(CliError::Parse { .. })
        ));
        let text = format!("{MINIMAL} x");
        assert!(matches!(
            parse_config(text.as_bytes()),
            Err(CliError::Parse { .. })
        ));
    }
}
