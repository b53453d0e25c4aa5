//! Scenario files shipped with the crate.

use crate::error::ConfigError;
use crate::harness::config::ScenarioConfig;

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../scenarios/", $name, ".json")))),*]
    };
}

pub const BUNDLED: &[(&str, &str)] = bundled![
    "default-24h",
    "oracle-stuck",
    "oracle-spoof",
    "vault-misreport",
    "issuance-burst",
    "issuance-latency",
    "market-stable",
    "market-volatile",
    "compliance-corpus",
    "compliance-extended",
    "concentration",
    "governance",
    "scaling",
];

pub fn names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn load(name: &str) -> Result<ScenarioConfig, ConfigError> {
    let text = source(name).ok_or_else(|| ConfigError::Invalid(vec![format!("no bundled scenario named {name}")]))?;
    ScenarioConfig::from_json(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_scenario_validates() {
        for name in names() {
            let cfg = load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.name, name);
        }
    }

    #[test]
    fn unknown_name() {
        assert!(load("nope").is_err());
    }
}
