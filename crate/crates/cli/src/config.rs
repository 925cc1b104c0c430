//! Experiment configuration: one TOML file per run, loaded into a fully
//! resolved form where every default is explicit, so the JSON sidecar can
//! record exactly what ran.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use lehmerlab_core::lehmer::DEFAULT_ENUM_BUDGET;
use lehmerlab_core::rat::parse_rat;
use lehmerlab_core::discrepancy::{DEFAULT_BOX_BUDGET, DEFAULT_SAMPLED_BOXES};
use lehmerlab_core::{RegionSpec, TorusBox};

use crate::fail::{config_err, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    CountScaling,
    CharsumMoments,
    DiscrepancyScan,
    HullScan,
    HScan,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::CountScaling => "count-scaling",
            ExperimentKind::CharsumMoments => "charsum-moments",
            ExperimentKind::DiscrepancyScan => "discrepancy-scan",
            ExperimentKind::HullScan => "hull-scan",
            ExperimentKind::HScan => "h-scan",
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct ModuliRange {
    pub start: u64,
    pub end: u64,
    #[serde(default)]
    pub primes_only: bool,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct InstanceConfig {
    pub a: Vec<u64>,
    pub b: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_lo: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_hi: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct RegionConfig {
    pub kind: String,
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
pub struct Limits {
    pub enum_budget: u64,
    pub box_budget: u64,
    pub sampled_boxes: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            enum_budget: DEFAULT_ENUM_BUDGET,
            box_budget: DEFAULT_BOX_BUDGET,
            sampled_boxes: DEFAULT_SAMPLED_BOXES,
        }
    }
}

/// The on-disk shape, with optional fields.
#[derive(Debug, Deserialize)]
struct RawConfig {
    schema_version: u32,
    experiment: ExperimentKind,
    seed: Option<u64>,
    out: PathBuf,
    r_values: Option<Vec<u32>>,
    moduli: ModuliRange,
    instance: Option<InstanceConfig>,
    region: Option<RegionConfig>,
    #[serde(default)]
    limits: RawLimits,
}

#[derive(Debug, Default, Deserialize)]
struct RawLimits {
    enum_budget: Option<u64>,
    box_budget: Option<u64>,
    sampled_boxes: Option<u64>,
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub out: PathBuf,
    pub r_values: Vec<u32>,
    pub moduli: ModuliRange,
    pub instance: InstanceConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionConfig>,
    pub limits: Limits,
}

pub fn load(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let raw: RawConfig =
        toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> CliResult<ExperimentConfig> {
    if raw.schema_version != 1 {
        return Err(config_err(format!(
            "unsupported schema_version {} (expected 1)",
            raw.schema_version
        )));
    }
    if raw.moduli.start < 2 || raw.moduli.start > raw.moduli.end {
        return Err(config_err(format!(
            "modulus range [{}, {}] is empty or starts below 2",
            raw.moduli.start, raw.moduli.end
        )));
    }
    let instance = match raw.instance {
        Some(i) => i,
        None => match raw.experiment {
            // Scans of the classical statistics default to the unconstrained
            // instance: every unit, every inverse.
            ExperimentKind::HullScan | ExperimentKind::HScan => InstanceConfig {
                a: vec![1, 1],
                b: vec![0, 0],
                box_lo: None,
                box_hi: None,
            },
            _ => {
                return Err(config_err(format!(
                    "experiment '{}' needs an [instance] section",
                    raw.experiment.name()
                )))
            }
        },
    };
    if instance.a.len() < 2 || instance.a.len() != instance.b.len() {
        return Err(config_err(format!(
            "instance needs matching a and b of length k+1 >= 2, got {} and {}",
            instance.a.len(),
            instance.b.len()
        )));
    }
    if instance.a.contains(&0) {
        return Err(config_err("progression moduli a must be positive"));
    }
    match (&instance.box_lo, &instance.box_hi) {
        (None, None) => {}
        (Some(lo), Some(hi)) => {
            if lo.len() != instance.a.len() || hi.len() != instance.a.len() {
                return Err(config_err(format!(
                    "box needs {} coordinates per endpoint",
                    instance.a.len()
                )));
            }
            // Parse now so a malformed box fails the whole run, not each row.
            instance_box(&instance)?;
        }
        _ => return Err(config_err("box needs both box_lo and box_hi")),
    }
    if let Some(region) = &raw.region {
        build_region(region)?;
        if region.center.len() != instance.a.len() {
            return Err(config_err(format!(
                "region dimension {} does not match instance dimension {}",
                region.center.len(),
                instance.a.len()
            )));
        }
    }
    if raw.experiment == ExperimentKind::DiscrepancyScan && raw.seed.is_none() {
        return Err(config_err(
            "discrepancy-scan uses random sampling; set an explicit seed",
        ));
    }
    let r_values = raw.r_values.unwrap_or_else(|| vec![1, 2, 3]);
    if r_values.is_empty() || r_values.contains(&0) {
        return Err(config_err("r_values must be nonempty positive integers"));
    }
    let limits = Limits {
        enum_budget: raw.limits.enum_budget.unwrap_or(DEFAULT_ENUM_BUDGET),
        box_budget: raw.limits.box_budget.unwrap_or(DEFAULT_BOX_BUDGET),
        sampled_boxes: raw.limits.sampled_boxes.unwrap_or(DEFAULT_SAMPLED_BOXES),
    };
    if limits.enum_budget == 0 || limits.box_budget == 0 || limits.sampled_boxes == 0 {
        return Err(config_err("budgets must be positive"));
    }
    Ok(ExperimentConfig {
        schema_version: raw.schema_version,
        experiment: raw.experiment,
        seed: raw.seed.unwrap_or(0),
        out: raw.out,
        r_values,
        moduli: raw.moduli,
        instance,
        region: raw.region,
        limits,
    })
}

/// The instance's dilation box, when one is configured.
pub fn instance_box(instance: &InstanceConfig) -> CliResult<Option<TorusBox>> {
    let (Some(lo), Some(hi)) = (&instance.box_lo, &instance.box_hi) else {
        return Ok(None);
    };
    let alpha = lo
        .iter()
        .map(|s| parse_rat(s))
        .collect::<Result<Vec<_>, _>>()?;
    let beta = hi
        .iter()
        .map(|s| parse_rat(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(TorusBox::new(alpha, beta)?))
}

pub fn build_region(region: &RegionConfig) -> CliResult<RegionSpec> {
    if region.kind != "ball" {
        return Err(config_err(format!(
            "unsupported region kind '{}' (only 'ball')",
            region.kind
        )));
    }
    Ok(RegionSpec::ball(region.center.clone(), region.radius)?)
}

/// `lo:hi,lo:hi,...` with rational endpoints, one pair per axis.
pub fn parse_box_flag(spec: &str, dim: usize) -> CliResult<TorusBox> {
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    for part in spec.split(',') {
        let (lo, hi) = part
            .split_once(':')
            .ok_or_else(|| config_err(format!("box axis '{part}' is not 'lo:hi'")))?;
        alpha.push(parse_rat(lo)?);
        beta.push(parse_rat(hi)?);
    }
    if alpha.len() != dim {
        return Err(config_err(format!(
            "box has {} axes, instance needs {dim}",
            alpha.len()
        )));
    }
    Ok(TorusBox::new(alpha, beta)?)
}

/// `ball:c1,c2,...:radius`.
pub fn parse_region_flag(spec: &str) -> CliResult<RegionSpec> {
    let mut parts = spec.split(':');
    let kind = parts.next().unwrap_or_default();
    if kind != "ball" {
        return Err(config_err(format!(
            "unsupported region '{spec}' (use ball:c1,c2,...:radius)"
        )));
    }
    let (Some(center), Some(radius), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(config_err(format!(
            "region '{spec}' is not ball:c1,c2,...:radius"
        )));
    };
    let center: Vec<f64> = center
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|_| config_err(format!("bad center coordinate '{c}'")))
        })
        .collect::<Result<_, CliError>>()?;
    let radius: f64 = radius
        .trim()
        .parse()
        .map_err(|_| config_err(format!("bad radius '{radius}'")))?;
    Ok(RegionSpec::ball(center, radius)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_toml() -> String {
        r#"
schema_version = 1
experiment = "count-scaling"
seed = 7
out = "run.csv"

[moduli]
start = 100
end = 200
primes_only = true

[instance]
a = [2, 3, 5]
b = [1, 1, 1]
"#
        .to_string()
    }

    fn resolve_str(text: &str) -> CliResult<ExperimentConfig> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        resolve(raw)
    }

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let cfg = resolve_str(&base_toml()).unwrap();
        assert_eq!(cfg.experiment.name(), "count-scaling");
        assert_eq!(cfg.r_values, vec![1, 2, 3]);
        assert_eq!(cfg.limits.enum_budget, DEFAULT_ENUM_BUDGET);
        assert_eq!(cfg.limits.sampled_boxes, DEFAULT_SAMPLED_BOXES);
        assert_eq!(cfg.seed, 7);
        assert!(instance_box(&cfg.instance).unwrap().is_none());
    }

    #[test]
    fn empty_range_is_a_config_error() {
        let text = base_toml().replace("start = 100", "start = 300");
        let err = resolve_str(&text).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_instance_required_for_counting() {
        let text = base_toml().replace("[instance]\na = [2, 3, 5]\nb = [1, 1, 1]\n", "");
        assert!(resolve_str(&text).is_err());
        let hull = text.replace("count-scaling", "hull-scan");
        let cfg = resolve_str(&hull).unwrap();
        assert_eq!(cfg.instance.a, vec![1, 1]);
    }

    #[test]
    fn discrepancy_scan_needs_a_seed() {
        let text = base_toml()
            .replace("count-scaling", "discrepancy-scan")
            .replace("seed = 7\n", "");
        assert!(resolve_str(&text).is_err());
    }

    #[test]
    fn box_and_budget_validation() {
        let with_box = base_toml().replace(
            "b = [1, 1, 1]\n",
            "b = [1, 1, 1]\nbox_lo = [\"0\", \"0\", \"0\"]\nbox_hi = [\"1/2\", \"1/2\", \"1/2\"]\n",
        );
        let cfg = resolve_str(&with_box).unwrap();
        let tb = instance_box(&cfg.instance).unwrap().unwrap();
        assert_eq!(tb.dim(), 3);
        let lopsided = with_box.replace("box_hi = [\"1/2\", \"1/2\", \"1/2\"]\n", "");
        assert!(resolve_str(&lopsided).is_err());
        let zero_budget = base_toml() + "\n[limits]\nenum_budget = 0\n";
        assert!(resolve_str(&zero_budget).is_err());
    }

    #[test]
    fn flag_parsers() {
        let tb = parse_box_flag("0:1/2,1/4:3/4", 2).unwrap();
        assert_eq!(tb.dim(), 2);
        assert!(parse_box_flag("0:1/2", 2).is_err());
        assert!(parse_box_flag("0,1/2", 2).is_err());
        let region = parse_region_flag("ball:0.5,0.5:0.25").unwrap();
        assert_eq!(region.dim(), 2);
        assert!(parse_region_flag("cube:0.5:0.1").is_err());
        assert!(parse_region_flag("ball:0.5").is_err());
    }
}
