//! CSV, JSON aggregate, and run-manifest emission.
//!
//! Every data file opens with a `# run <config-hash>` comment so it can be
//! traced back to its manifest. Numbers are written with Rust's shortest
//! round-trip formatting, which is deterministic, so reruns with the same
//! seed produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use noma_core::sim::{ExperimentAggregate, PointStats};

/// CSV column header shared by every sweep file.
pub const SWEEP_CSV_HEADER: [&str; 23] = [
    "sweep_value",
    "strategy",
    "power_mean",
    "power_std",
    "power_trial_std",
    "sum_rate_mean",
    "sum_rate_std",
    "sum_rate_trial_std",
    "ee_mean",
    "ee_std",
    "ee_trial_std",
    "re_mean",
    "re_std",
    "re_trial_std",
    "jain_mean",
    "jain_std",
    "jain_trial_std",
    "it_fairness_mean",
    "it_fairness_std",
    "it_fairness_trial_std",
    "accepted",
    "rejected",
    "mean_fractions",
];

/// `sha256:<hex>` of the canonical config text.
pub fn config_hash(canonical_config: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(canonical_config.as_bytes());
    format!("sha256:{:x}", hasher.finalize())
}

/// Ties every emitted file to the config that produced it.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub created_utc: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(config_hash: String, master_seed: u64, outputs: Vec<String>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            master_seed,
            created_utc: chrono::Utc::now().to_rfc3339(),
            outputs,
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&path, json + "\n")?;
        Ok(path)
    }
}

fn point_record(p: &PointStats) -> Vec<String> {
    let fractions: Vec<String> = p.mean_fractions.iter().map(f64::to_string).collect();
    vec![
        p.sweep_value.to_string(),
        p.strategy.clone(),
        p.transmit_power.mean.to_string(),
        p.transmit_power.std_dev.to_string(),
        p.transmit_power.trial_std.to_string(),
        p.sum_rate.mean.to_string(),
        p.sum_rate.std_dev.to_string(),
        p.sum_rate.trial_std.to_string(),
        p.energy_efficiency.mean.to_string(),
        p.energy_efficiency.std_dev.to_string(),
        p.energy_efficiency.trial_std.to_string(),
        p.resource_efficiency.mean.to_string(),
        p.resource_efficiency.std_dev.to_string(),
        p.resource_efficiency.trial_std.to_string(),
        p.jain.mean.to_string(),
        p.jain.std_dev.to_string(),
        p.jain.trial_std.to_string(),
        p.it_fairness.mean.to_string(),
        p.it_fairness.std_dev.to_string(),
        p.it_fairness.trial_std.to_string(),
        p.accepted.to_string(),
        p.rejected.to_string(),
        fractions.join("; "),
    ]
}

/// Writes one sweep CSV. For aggregates carrying a joint optimum the row is
/// appended last with `optimum = 1`.
pub fn write_sweep_csv(
    path: &Path,
    hash: &str,
    aggregate: &ExperimentAggregate,
) -> std::io::Result<()> {
    let mut file = fs::File::create(path)?;
    writeln!(file, "# run {hash}")?;
    let mut w = csv::Writer::from_writer(file);

    let with_optimum = aggregate.ee_optimum.is_some();
    let mut header: Vec<&str> = SWEEP_CSV_HEADER.to_vec();
    if with_optimum {
        header.push("optimum");
    }
    w.write_record(&header)?;
    for p in &aggregate.points {
        let mut rec = point_record(p);
        if with_optimum {
            rec.push("0".to_string());
        }
        w.write_record(&rec)?;
    }
    if let Some(opt) = &aggregate.ee_optimum {
        let mut rec = point_record(opt);
        rec.push("1".to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the JSON aggregate next to the CSVs.
pub fn write_aggregate_json<T: Serialize>(
    path: &Path,
    hash: &str,
    aggregate: &T,
) -> std::io::Result<()> {
    #[derive(Serialize)]
    struct Wrapper<'a, T> {
        config_hash: &'a str,
        aggregate: &'a T,
    }
    let json = serde_json::to_string_pretty(&Wrapper { config_hash: hash, aggregate })
        .expect("aggregate serializes");
    fs::write(path, json + "\n")
}

/// Creates the output directory if needed and returns it.
pub fn ensure_out_dir(dir: &Path) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(dir.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_prefixed() {
        let h = config_hash("[scenario]\n");
        assert!(h.starts_with("sha256:"));
        assert_eq!(h, config_hash("[scenario]\n"));
        assert_ne!(h, config_hash("[scenario] \n"));
    }
}
