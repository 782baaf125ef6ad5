//! `key=value` scenario files for `simulate`.

use std::fmt::Write as _;
use std::str::FromStr;

use pso_trust::real::format_real;
use pso_trust::SimConfig;

use crate::CliError;

pub const SCENARIO_KEYS: [&str; 15] = [
    "max_population",
    "initial_clients",
    "initial_providers",
    "arrival_probability",
    "departure_probability",
    "malicious_fraction",
    "acquaintances_per_provider",
    "ticks",
    "seed",
    "threshold",
    "c1",
    "c2",
    "inertia",
    "epsilon",
    "max_iterations",
];

fn value<T: FromStr>(key: &str, raw: &str, line: usize) -> Result<T, CliError> {
    raw.parse()
        .map_err(|_| CliError::Config(format!("line {line}: invalid value `{raw}` for key `{key}`")))
}

/// Parses a scenario on top of the defaults. Blank lines and `#` comments
/// are ignored; unknown or repeated keys are errors.
pub fn parse_scenario(text: &str) -> Result<SimConfig, CliError> {
    let mut cfg = SimConfig::default();
    let mut seen = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, val) = content
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {line}: expected key=value, got `{content}`")))?;
        let (key, val) = (key.trim(), val.trim());
        if !SCENARIO_KEYS.contains(&key) {
            return Err(CliError::Config(format!("line {line}: unknown key `{key}`")));
        }
        if seen.contains(&key) {
            return Err(CliError::Config(format!("line {line}: key `{key}` given twice")));
        }
        seen.push(key);
        match key {
            "max_population" => cfg.max_population = value(key, val, line)?,
            "initial_clients" => cfg.initial_clients = value(key, val, line)?,
            "initial_providers" => cfg.initial_providers = value(key, val, line)?,
            "arrival_probability" => cfg.arrival_probability = value(key, val, line)?,
            "departure_probability" => cfg.departure_probability = value(key, val, line)?,
            "malicious_fraction" => cfg.malicious_fraction = value(key, val, line)?,
            "acquaintances_per_provider" => cfg.acquaintances_per_provider = value(key, val, line)?,
            "ticks" => cfg.ticks = value(key, val, line)?,
            "seed" => cfg.seed = value(key, val, line)?,
            "threshold" => cfg.threshold = value(key, val, line)?,
            "c1" => cfg.pso.c1 = value(key, val, line)?,
            "c2" => cfg.pso.c2 = value(key, val, line)?,
            "inertia" => cfg.pso.inertia = value(key, val, line)?,
            "epsilon" => cfg.pso.epsilon = value(key, val, line)?,
            "max_iterations" => cfg.pso.max_iterations = value(key, val, line)?,
            _ => unreachable!("checked against SCENARIO_KEYS"),
        }
    }
    Ok(cfg)
}

/// Writes every scenario key with its effective value.
pub fn render_scenario(cfg: &SimConfig) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k}={v}");
    };
    kv("max_population", cfg.max_population.to_string());
    kv("initial_clients", cfg.initial_clients.to_string());
    kv("initial_providers", cfg.initial_providers.to_string());
    kv("arrival_probability", format_real(cfg.arrival_probability));
    kv("departure_probability", format_real(cfg.departure_probability));
    kv("malicious_fraction", format_real(cfg.malicious_fraction));
    kv("acquaintances_per_provider", cfg.acquaintances_per_provider.to_string());
    kv("ticks", cfg.ticks.to_string());
    kv("seed", cfg.seed.to_string());
    kv("threshold", format_real(cfg.threshold));
    kv("c1", format_real(cfg.pso.c1));
    kv("c2", format_real(cfg.pso.c2));
    kv("inertia", format_real(cfg.pso.inertia));
    kv("epsilon", format_real(cfg.pso.epsilon));
    kv("max_iterations", cfg.pso.max_iterations.to_string());
    out
}
