//! Config documents and `key=value` overrides.

use crate::error::{Error, Result};
use crate::experiments::{scenario_defaults, Merged, ScenarioConfig};

/// Parse a TOML config document. Missing keys come from the named
/// scenario's defaults, or the model defaults when `scenario` is absent;
/// every filled-in key is listed in `applied_defaults`.
pub fn parse_config(text: &str) -> Result<Merged> {
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Malformed(e.to_string()))?;
    let base = match doc.get("scenario") {
        Some(toml::Value::String(name)) if name != "custom" => scenario_defaults(name)?,
        Some(toml::Value::String(_)) | None => ScenarioConfig::default(),
        Some(_) => return Err(Error::config("scenario", "expected string")),
    };
    base.merge(&doc)
}

/// Parse an optional config document for scenario `name`. Missing keys
/// come from that scenario's defaults; a `scenario` key must agree.
pub fn parse_scenario_config(name: &str, text: Option<&str>) -> Result<Merged> {
    let base = scenario_defaults(name)?;
    let doc: toml::Table = match text {
        Some(t) => t.parse().map_err(|e: toml::de::Error| Error::Malformed(e.to_string()))?,
        None => toml::Table::new(),
    };
    match doc.get("scenario") {
        None => {}
        Some(toml::Value::String(s)) if s == name => {}
        Some(other) => return Err(Error::config("scenario", format!("document names {other}, expected \"{name}\""))),
    }
    base.merge(&doc)
}

/// Split `path=value`; the value is read as a TOML literal, falling back
/// to a bare string.
pub fn parse_override(text: &str) -> Result<(String, toml::Value)> {
    let (path, raw) = text
        .split_once('=')
        .ok_or_else(|| Error::config(text, "override must look like key=value"))?;
    let path = path.trim();
    if path.is_empty() {
        return Err(Error::config(text, "empty key"));
    }
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    Ok((path.to_string(), value))
}

/// Apply overrides in order. `cbr` is accepted as a derived numeric key.
pub fn apply_overrides(cfg: &ScenarioConfig, overrides: &[String]) -> Result<ScenarioConfig> {
    let mut out = cfg.clone();
    for o in overrides {
        let (path, value) = parse_override(o)?;
        out = match (path.as_str(), &value) {
            ("cbr" | "rewards.cbr", toml::Value::Float(v)) => out.set_number(&path, *v)?,
            ("cbr" | "rewards.cbr", toml::Value::Integer(v)) => out.set_number(&path, *v as f64)?,
            ("cbr" | "rewards.cbr", _) => return Err(Error::config(path, "expected a number")),
            ("scenario", _) => return Err(Error::config(path, "the scenario is chosen on the command line")),
            _ => out.set(&path, value)?,
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_model_defaults() {
        let m = parse_config("").unwrap();
        let c = &m.config;
        assert_eq!(c.agent.epsilon, 0.1);
        assert_eq!(c.agent.beta, 50.0);
        assert_eq!(c.agent.gamma, 0.9);
        assert_eq!(c.evidence.k, 0.4);
        assert_eq!(c.evidence.sigma, 1.0);
        assert_eq!(c.space.delta, 1.0);
        assert_eq!(c.space.m, 100.0);
        assert_eq!([c.rewards.r_correct, c.rewards.r_wrong, c.rewards.r_wait], [20.0, -50.0, -1.0]);
        assert_eq!(c.stimulus.max_steps, 1000);
        assert!(m.applied_defaults.contains(&"agent.epsilon".to_string()));
        assert!(m.applied_defaults.contains(&"scenario".to_string()));
    }

    #[test]
    fn negative_epsilon_names_the_key() {
        match parse_config("[agent]\nepsilon = -0.1\n") {
            Err(Error::Config { path, .. }) => assert_eq!(path, "agent.epsilon"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_and_mistyped_keys_are_rejected() {
        match parse_config("[agent]\nepsilonn = 0.1\n") {
            Err(Error::Config { path, .. }) => assert_eq!(path, "agent.epsilonn"),
            other => panic!("{other:?}"),
        }
        match parse_config("[agent]\nepsilon = \"big\"\n") {
            Err(Error::Config { path, .. }) => assert_eq!(path, "agent.epsilon"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config("[agent"), Err(Error::Malformed(_))));
    }

    #[test]
    fn echo_round_trips() {
        let m = parse_config("scenario = \"sat-cbr\"\n[agent]\nbeta = inf\n").unwrap();
        let again = parse_config(&m.config.to_toml()).unwrap();
        assert_eq!(again.config, m.config);
        assert!(again.applied_defaults.is_empty());
    }

    #[test]
    fn scenario_document_starts_from_scenario_defaults() {
        let m = parse_config("scenario = \"sat-cbr\"\n").unwrap();
        assert_eq!(m.config, scenario_defaults("sat-cbr").unwrap());
    }

    #[test]
    fn scenario_config_rejects_other_scenarios() {
        let m = parse_scenario_config("sat-cbr", Some("[run]\nreplications = 2\n")).unwrap();
        assert_eq!(m.config.scenario, "sat-cbr");
        assert_eq!(m.config.run.replications, 2);
        assert!(!m.applied_defaults.contains(&"run.replications".to_string()));
        assert!(parse_scenario_config("sat-cbr", Some("scenario = \"volatility\"\n")).is_err());
        assert!(matches!(parse_scenario_config("nosuch", None), Err(Error::UnknownScenario { .. })));
    }

    #[test]
    fn overrides() {
        let cfg = ScenarioConfig::default();
        let c = apply_overrides(&cfg, &["agent.epsilon=0.2".into(), "agent.dynamics=extrema".into(), "cbr=2".into()]).unwrap();
        assert_eq!(c.agent.epsilon, 0.2);
        assert_eq!(c.agent.dynamics, "extrema");
        assert_eq!(c.rewards.r_wrong, -40.0);
        let c = apply_overrides(&cfg, &["task.coherences=[0.0, 0.5]".into(), "run.u_train=10".into()]).unwrap();
        assert_eq!(c.task.coherences, vec![0.0, 0.5]);
        assert_eq!(c.run.u_train, 10);
        assert!(apply_overrides(&cfg, &["agent.epsilon".into()]).is_err());
        assert!(apply_overrides(&cfg, &["nope.x=1".into()]).is_err());
    }
}
