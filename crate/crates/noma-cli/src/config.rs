//! Flat key-value experiment configs with `[section]` headers.
//!
//! Units are explicit where a quantity has one: distances take `m` or `km`,
//! powers take `W`, `mW`, or `uW`, rates may carry a `bit/s/Hz` suffix.
//! Parse errors cite the offending line. [`canonical`] renders a parsed
//! config back to a normal form (meters and watts) that re-parses to an
//! equivalent config.

use noma_core::channel::{Fading, PlacementSpec};
use noma_core::rate::PowerModel;
use noma_core::scenario::Scenario;
use noma_core::sim::{ExperimentConfig, Strategy, Sweep};

/// A config-file error with its 1-based line number where one applies.
#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError { line: Some(line), message: message.into() }
}

fn err_global(message: impl Into<String>) -> ConfigError {
    ConfigError { line: None, message: message.into() }
}

fn parse_f64(value: &str, line: usize, what: &str) -> Result<f64, ConfigError> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| err(line, format!("cannot parse {what} '{value}' as a number")))
}

/// Power in watts from `<number> [W|mW|uW]`.
fn parse_power(value: &str, line: usize, what: &str) -> Result<f64, ConfigError> {
    let v = value.trim();
    let (num, scale) = if let Some(n) = v.strip_suffix("mW") {
        (n, 1e-3)
    } else if let Some(n) = v.strip_suffix("uW") {
        (n, 1e-6)
    } else if let Some(n) = v.strip_suffix('W') {
        (n, 1.0)
    } else {
        (v, 1.0)
    };
    Ok(parse_f64(num, line, what)? * scale)
}

/// Distance in meters from `<number> [m|km]`.
fn parse_distance(value: &str, line: usize, what: &str) -> Result<f64, ConfigError> {
    let v = value.trim();
    let (num, scale) = if let Some(n) = v.strip_suffix("km") {
        (n, 1000.0)
    } else if let Some(n) = v.strip_suffix('m') {
        (n, 1.0)
    } else {
        (v, 1.0)
    };
    Ok(parse_f64(num, line, what)? * scale)
}

/// Rate in bit/s/Hz; the unit suffix is optional.
fn parse_rate(value: &str, line: usize, what: &str) -> Result<f64, ConfigError> {
    let v = value.trim();
    let num = v.strip_suffix("bit/s/Hz").unwrap_or(v);
    parse_f64(num, line, what)
}

fn parse_usize(value: &str, line: usize, what: &str) -> Result<usize, ConfigError> {
    value
        .trim()
        .parse::<usize>()
        .map_err(|_| err(line, format!("cannot parse {what} '{value}' as an integer")))
}

#[derive(Default)]
struct RawConfig {
    placement: Option<(String, usize)>,
    distances: Option<(Vec<f64>, usize)>,
    radius: Option<(f64, usize)>,
    users: Option<(usize, usize)>,
    alpha: Option<(f64, usize)>,
    noise: Option<(f64, usize)>,
    fading: Option<(String, usize)>,
    budget: Option<(f64, usize)>,
    amplifier_inefficiency: Option<(f64, usize)>,
    circuit_power: Option<(f64, usize)>,
    kind: Option<(String, usize)>,
    rates: Option<(Vec<f64>, usize)>,
    user_counts: Option<(Vec<usize>, usize)>,
    sweep_radius: Option<(f64, usize)>,
    radii: Option<(Vec<f64>, usize)>,
    strategy: Option<(String, usize)>,
    samples: Option<(usize, usize)>,
    trials: Option<(usize, usize)>,
    seed: Option<(u64, usize)>,
    xi0: Option<(f64, usize)>,
}

/// Parses the config text into an [`ExperimentConfig`].
pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut section = String::new();
    let mut raw = RawConfig::default();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            match name {
                "scenario" | "power" | "sweep" | "run" => section = name.to_string(),
                other => return Err(err(line_no, format!("unknown section '[{other}]'"))),
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected 'key = value', got '{line}'")))?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(err(line_no, format!("empty value for '{key}'")));
        }

        match (section.as_str(), key) {
            ("scenario", "placement") => raw.placement = Some((value.to_string(), line_no)),
            ("scenario", "distances") => {
                let list = value
                    .split(',')
                    .map(|d| parse_distance(d, line_no, "distance"))
                    .collect::<Result<Vec<_>, _>>()?;
                raw.distances = Some((list, line_no));
            }
            ("scenario", "radius") => {
                raw.radius = Some((parse_distance(value, line_no, "radius")?, line_no))
            }
            ("scenario", "users") => {
                raw.users = Some((parse_usize(value, line_no, "users")?, line_no))
            }
            ("scenario", "alpha") => {
                raw.alpha = Some((parse_f64(value, line_no, "alpha")?, line_no))
            }
            ("scenario", "noise") => {
                raw.noise = Some((parse_power(value, line_no, "noise")?, line_no))
            }
            ("scenario", "fading") => raw.fading = Some((value.to_string(), line_no)),
            ("power", "budget") => {
                raw.budget = Some((parse_power(value, line_no, "budget")?, line_no))
            }
            ("power", "amplifier_inefficiency") => {
                raw.amplifier_inefficiency =
                    Some((parse_f64(value, line_no, "amplifier_inefficiency")?, line_no))
            }
            ("power", "circuit_power") => {
                raw.circuit_power = Some((parse_power(value, line_no, "circuit_power")?, line_no))
            }
            ("sweep", "kind") => raw.kind = Some((value.to_string(), line_no)),
            ("sweep", "rates") => {
                let list = value
                    .split(',')
                    .map(|r| parse_rate(r, line_no, "rate"))
                    .collect::<Result<Vec<_>, _>>()?;
                raw.rates = Some((list, line_no));
            }
            ("sweep", "user_counts") => {
                let list = value
                    .split(',')
                    .map(|m| parse_usize(m, line_no, "user count"))
                    .collect::<Result<Vec<_>, _>>()?;
                raw.user_counts = Some((list, line_no));
            }
            ("sweep", "sweep_radius") => {
                raw.sweep_radius = Some((parse_distance(value, line_no, "sweep_radius")?, line_no))
            }
            ("sweep", "radii") => {
                let list = value
                    .split(',')
                    .map(|r| parse_distance(r, line_no, "radius"))
                    .collect::<Result<Vec<_>, _>>()?;
                raw.radii = Some((list, line_no));
            }
            ("sweep", "strategy") => raw.strategy = Some((value.to_string(), line_no)),
            ("run", "samples") => {
                raw.samples = Some((parse_usize(value, line_no, "samples")?, line_no))
            }
            ("run", "trials") => {
                raw.trials = Some((parse_usize(value, line_no, "trials")?, line_no))
            }
            ("run", "seed") => {
                let seed = value
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| err(line_no, format!("cannot parse seed '{value}'")))?;
                raw.seed = Some((seed, line_no));
            }
            ("run", "xi0") => raw.xi0 = Some((parse_power(value, line_no, "xi0")?, line_no)),
            ("", key) => {
                return Err(err(line_no, format!("key '{key}' appears before any [section]")))
            }
            (section, key) => {
                return Err(err(line_no, format!("unknown key '{key}' in [{section}]")))
            }
        }
    }

    build(raw)
}

fn build(raw: RawConfig) -> Result<ExperimentConfig, ConfigError> {
    let (placement_kind, pl_line) =
        raw.placement.ok_or_else(|| err_global("missing 'placement' in [scenario]"))?;
    let placement = match placement_kind.as_str() {
        "fixed" => {
            let (distances, d_line) = raw
                .distances
                .ok_or_else(|| err(pl_line, "fixed placement needs 'distances'"))?;
            if let Some((users, u_line)) = raw.users {
                if users != distances.len() {
                    return Err(err(
                        u_line,
                        format!("users = {users} but {} distances given", distances.len()),
                    ));
                }
            }
            PlacementSpec::fixed(distances).map_err(|e| err(d_line, e.to_string()))?
        }
        "disc" => {
            let (radius, r_line) =
                raw.radius.ok_or_else(|| err(pl_line, "disc placement needs 'radius'"))?;
            let (users, _) =
                raw.users.ok_or_else(|| err(pl_line, "disc placement needs 'users'"))?;
            PlacementSpec::uniform_disc(radius, users).map_err(|e| err(r_line, e.to_string()))?
        }
        other => return Err(err(pl_line, format!("placement must be fixed|disc, got '{other}'"))),
    };

    let (alpha, a_line) = raw.alpha.ok_or_else(|| err_global("missing 'alpha' in [scenario]"))?;
    let (noise, _) = raw.noise.ok_or_else(|| err_global("missing 'noise' in [scenario]"))?;
    let fading = match raw.fading {
        Some((f, line)) => match f.as_str() {
            "unit" => Fading::Unit,
            "rayleigh" => Fading::Rayleigh,
            other => return Err(err(line, format!("fading must be unit|rayleigh, got '{other}'"))),
        },
        None => Fading::Rayleigh,
    };
    let scenario =
        Scenario::new(placement, alpha, noise, fading).map_err(|e| err(a_line, e.to_string()))?;

    let mut power_model = PowerModel::simulation_default();
    if let Some((b, _)) = raw.budget {
        power_model.power_budget = b;
    }
    if let Some((r, _)) = raw.amplifier_inefficiency {
        power_model.amplifier_inefficiency = r;
    }
    if let Some((c, _)) = raw.circuit_power {
        power_model.circuit_power_per_user = c;
    }

    let (kind, k_line) = raw.kind.ok_or_else(|| err_global("missing 'kind' in [sweep]"))?;
    let sweep = match kind.as_str() {
        "rate" => Sweep::Rate {
            targets: raw.rates.ok_or_else(|| err(k_line, "rate sweep needs 'rates'"))?.0,
        },
        "ee-curve" => Sweep::EeCurve {
            rate_grid: raw.rates.ok_or_else(|| err(k_line, "ee-curve sweep needs 'rates'"))?.0,
        },
        "users" => Sweep::UserCount {
            user_counts: raw
                .user_counts
                .ok_or_else(|| err(k_line, "users sweep needs 'user_counts'"))?
                .0,
            radius_m: raw
                .sweep_radius
                .ok_or_else(|| err(k_line, "users sweep needs 'sweep_radius'"))?
                .0,
        },
        "radius" => Sweep::Radius {
            radii_m: raw.radii.ok_or_else(|| err(k_line, "radius sweep needs 'radii'"))?.0,
        },
        other => {
            return Err(err(k_line, format!("kind must be rate|users|radius|ee-curve, got '{other}'")))
        }
    };

    let strategy = match raw.strategy {
        Some((s, line)) => match s.as_str() {
            "erpa" => Strategy::Erpa,
            "ica" => Strategy::Ica,
            "both" => Strategy::Both,
            other => return Err(err(line, format!("strategy must be erpa|ica|both, got '{other}'"))),
        },
        None => Strategy::Erpa,
    };

    let config = ExperimentConfig {
        scenario,
        power_model,
        sweep,
        strategy,
        samples: raw.samples.map(|(v, _)| v).unwrap_or(noma_core::scenario::DEFAULT_SAMPLES),
        trials: raw.trials.map(|(v, _)| v).unwrap_or(1),
        master_seed: raw.seed.map(|(v, _)| v).unwrap_or(0),
        xi0: raw.xi0.map(|(v, _)| v).unwrap_or(noma_core::scenario::DEFAULT_XI0),
    };
    config.validate().map_err(|e| err_global(e.to_string()))?;
    Ok(config)
}

/// Renders a config in canonical form: fixed section/key order, distances in
/// meters, powers in watts. Re-parsing the output yields an equivalent
/// config.
pub fn canonical(config: &ExperimentConfig) -> String {
    use noma_core::channel::Placement;
    let mut out = String::new();
    out.push_str("[scenario]\n");
    match config.scenario.placement.placement() {
        Placement::FixedDistances(d) => {
            out.push_str("placement = fixed\n");
            let list: Vec<String> = d.iter().map(|x| format!("{x} m")).collect();
            out.push_str(&format!("distances = {}\n", list.join(", ")));
        }
        Placement::UniformDisc { radius_m } => {
            out.push_str("placement = disc\n");
            out.push_str(&format!("radius = {radius_m} m\n"));
        }
    }
    out.push_str(&format!("users = {}\n", config.scenario.user_count()));
    out.push_str(&format!("alpha = {}\n", config.scenario.path_loss_exponent));
    out.push_str(&format!("noise = {} W\n", config.scenario.noise_power));
    out.push_str(&format!(
        "fading = {}\n",
        match config.scenario.fading {
            Fading::Unit => "unit",
            Fading::Rayleigh => "rayleigh",
        }
    ));
    out.push_str("\n[power]\n");
    out.push_str(&format!("budget = {} W\n", config.power_model.power_budget));
    out.push_str(&format!(
        "amplifier_inefficiency = {}\n",
        config.power_model.amplifier_inefficiency
    ));
    out.push_str(&format!("circuit_power = {} W\n", config.power_model.circuit_power_per_user));
    out.push_str("\n[sweep]\n");
    match &config.sweep {
        Sweep::Rate { targets } => {
            out.push_str("kind = rate\n");
            let list: Vec<String> = targets.iter().map(f64::to_string).collect();
            out.push_str(&format!("rates = {}\n", list.join(", ")));
        }
        Sweep::EeCurve { rate_grid } => {
            out.push_str("kind = ee-curve\n");
            let list: Vec<String> = rate_grid.iter().map(f64::to_string).collect();
            out.push_str(&format!("rates = {}\n", list.join(", ")));
        }
        Sweep::UserCount { user_counts, radius_m } => {
            out.push_str("kind = users\n");
            let list: Vec<String> = user_counts.iter().map(usize::to_string).collect();
            out.push_str(&format!("user_counts = {}\n", list.join(", ")));
            out.push_str(&format!("sweep_radius = {radius_m} m\n"));
        }
        Sweep::Radius { radii_m } => {
            out.push_str("kind = radius\n");
            let list: Vec<String> = radii_m.iter().map(|x| format!("{x} m")).collect();
            out.push_str(&format!("radii = {}\n", list.join(", ")));
        }
    }
    out.push_str(&format!(
        "strategy = {}\n",
        match config.strategy {
            Strategy::Erpa => "erpa",
            Strategy::Ica => "ica",
            Strategy::Both => "both",
        }
    ));
    out.push_str("\n[run]\n");
    out.push_str(&format!("samples = {}\n", config.samples));
    out.push_str(&format!("trials = {}\n", config.trials));
    out.push_str(&format!("seed = {}\n", config.master_seed));
    out.push_str(&format!("xi0 = {} W\n", config.xi0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# four fixed users, rate sweep
[scenario]
placement = fixed
distances = 0.34 km, 290 m, 220 m, 150 m
alpha = 2.0
noise = 1 uW
fading = unit

[power]
budget = 120 W
amplifier_inefficiency = 1.4
circuit_power = 250 mW

[sweep]
kind = rate
rates = 0.5, 1, 1.5, 2 bit/s/Hz
strategy = both

[run]
samples = 100
trials = 2
seed = 7
xi0 = 1.8 W
";

    #[test]
    fn parses_units_and_sections() {
        let config = parse(SAMPLE).unwrap();
        assert_eq!(config.scenario.user_count(), 4);
        assert!((config.scenario.noise_power - 1e-6).abs() < 1e-18);
        assert!((config.power_model.circuit_power_per_user - 0.25).abs() < 1e-12);
        match &config.sweep {
            Sweep::Rate { targets } => assert_eq!(targets, &vec![0.5, 1.0, 1.5, 2.0]),
            other => panic!("wrong sweep {other:?}"),
        }
        match config.scenario.placement.placement() {
            noma_core::channel::Placement::FixedDistances(d) => {
                assert_eq!(d, &vec![340.0, 290.0, 220.0, 150.0]);
            }
            other => panic!("wrong placement {other:?}"),
        }
        assert_eq!(config.master_seed, 7);
        assert_eq!(config.strategy, Strategy::Both);
    }

    #[test]
    fn canonical_round_trip() {
        let config = parse(SAMPLE).unwrap();
        let text = canonical(&config);
        let reparsed = parse(&text).unwrap();
        assert_eq!(config, reparsed);
        // Canonical form is a fixed point.
        assert_eq!(text, canonical(&reparsed));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "[scenario]\nplacement = fixed\nbogus_key = 1\n";
        let e = parse(bad).unwrap_err();
        assert_eq!(e.line, Some(3));
        assert!(e.message.contains("bogus_key"), "{e}");

        let bad_value = "[scenario]\nplacement = fixed\ndistances = 1 m, zzz m\n";
        let e = parse(bad_value).unwrap_err();
        assert_eq!(e.line, Some(3));

        let bad_section = "[nope]\n";
        let e = parse(bad_section).unwrap_err();
        assert_eq!(e.line, Some(1));

        let no_section = "alpha = 2\n";
        let e = parse(no_section).unwrap_err();
        assert_eq!(e.line, Some(1));
    }

    #[test]
    fn disc_sweep_parses() {
        let text = "\
[scenario]
placement = disc
radius = 50 m
users = 2
alpha = 2
noise = 0.1 uW

[sweep]
kind = users
user_counts = 2, 3, 4
sweep_radius = 50 m

[run]
samples = 10
";
        let config = parse(text).unwrap();
        match &config.sweep {
            Sweep::UserCount { user_counts, radius_m } => {
                assert_eq!(user_counts, &vec![2, 3, 4]);
                assert_eq!(*radius_m, 50.0);
            }
            other => panic!("wrong sweep {other:?}"),
        }
        let round = parse(&canonical(&config)).unwrap();
        assert_eq!(config, round);
    }

    #[test]
    fn semantic_validation_is_applied() {
        let zero_samples = "\
[scenario]
placement = disc
radius = 50 m
users = 2
alpha = 2
noise = 1 uW

[sweep]
kind = rate
rates = 1

[run]
samples = 0
";
        assert!(parse(zero_samples).is_err());
    }
}
