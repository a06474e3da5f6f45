//! Experiment spec files: flat `key = value` entries grouped by `[section]`
//! headers, `#` comments. Sections other than `target`, `sampler`,
//! `experiment` and `table` are ignored, which lets emitted manifests (with
//! their extra `[run]` block) parse back into the identical spec.

use std::path::Path;

use heavytail::linalg::SpdMatrix;
use heavytail::samplers::{Algorithm, DivergencePolicy, InitDistribution, SamplerConfig};
use heavytail::targets::TargetDensity;
use heavytail::theory;

use crate::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum SigmaSpec {
    Identity,
    /// Row-major `d*d` entries.
    RowMajor(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TargetSpec {
    pub family: String,
    pub d: usize,
    pub beta: f64,
    pub sigma: SigmaSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerSpec {
    pub algorithm: String,
    pub h: f64,
    pub iterations: u64,
    pub chains: usize,
    pub seed: u64,
    pub init: String,
    pub init_scale: f64,
    /// Zeroth-order smoothing radius sigma.
    pub smoothing: f64,
    /// Zeroth-order batch size m.
    pub batch: u64,
    pub divergence: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentBlock {
    pub epsilon: f64,
    /// `None` means "auto": the crude upper bound
    /// `sqrt(E|x0|^2) + sqrt(E[V] - 1)` is substituted at run time.
    pub w2_init: Option<f64>,
    pub reference_n: usize,
    pub projections: usize,
    /// `None` means an automatic log-spaced schedule over `[0, K]`.
    pub record: Option<Vec<u64>>,
    pub out: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableSpec {
    pub dims: Vec<usize>,
    /// `large-dof` (beta = d + 1) or `small-dof` (beta = (d+3)/2).
    pub rule: String,
    pub epsilon: f64,
    pub w2_init: f64,
    pub batches: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: String,
    pub target: TargetSpec,
    pub sampler: SamplerSpec,
    pub experiment: ExperimentBlock,
    pub table: Option<TableSpec>,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        Self {
            algorithm: "first-order".into(),
            h: 0.001,
            iterations: 100,
            chains: 64,
            seed: 42,
            init: "point".into(),
            init_scale: 1.0,
            smoothing: 0.0,
            batch: 1,
            divergence: "abort".into(),
        }
    }
}

impl Default for ExperimentBlock {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            w2_init: None,
            reference_n: 200_000,
            projections: 128,
            record: None,
            out: "runs/out".into(),
        }
    }
}

fn fail(msg: String) -> HarnessError {
    HarnessError::Validation(vec![msg])
}

/// Parse a spec from its text form.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec> {
    let mut scenario = String::from("unnamed");
    let mut target: Option<TargetSpec> = None;
    let mut sampler = SamplerSpec::default();
    let mut experiment = ExperimentBlock::default();
    let mut table: Option<TableSpec> = None;

    let mut section = String::new();
    // Collected raw fields for the target section (d must arrive before sigma
    // can be checked, so defer construction).
    let mut t_family = String::from("isotropic-student");
    let mut t_d: Option<usize> = None;
    let mut t_beta: Option<f64> = None;
    let mut t_sigma = SigmaSpec::Identity;
    let mut saw_target = false;

    let mut tb_dims: Vec<usize> = vec![];
    let mut tb_rule = String::from("large-dof");
    let mut tb_eps = 0.25;
    let mut tb_w2 = 10.0;
    let mut tb_batches: Vec<u64> = vec![1];
    let mut saw_table = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            if section == "target" {
                saw_target = true;
            }
            if section == "table" {
                saw_table = true;
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(fail(format!("line {}: expected `key = value`, got `{line}`", lineno + 1)));
        };
        let key = key.trim();
        let value = value.trim();
        let ctx = |what: &str| format!("line {}: invalid {what} `{value}`", lineno + 1);
        match (section.as_str(), key) {
            ("", "scenario") => scenario = value.to_string(),
            ("target", "family") => t_family = value.to_string(),
            ("target", "d") => t_d = Some(value.parse().map_err(|_| fail(ctx("integer")))?),
            ("target", "beta") => t_beta = Some(value.parse().map_err(|_| fail(ctx("number")))?),
            ("target", "sigma") => {
                t_sigma = if value == "identity" {
                    SigmaSpec::Identity
                } else {
                    SigmaSpec::RowMajor(parse_f64_list(value).map_err(|_| fail(ctx("matrix")))?)
                }
            }
            ("sampler", "algorithm") => sampler.algorithm = value.to_string(),
            ("sampler", "h") => sampler.h = value.parse().map_err(|_| fail(ctx("number")))?,
            ("sampler", "iterations") => {
                sampler.iterations = value.parse().map_err(|_| fail(ctx("integer")))?
            }
            ("sampler", "chains") => {
                sampler.chains = value.parse().map_err(|_| fail(ctx("integer")))?
            }
            ("sampler", "seed") => sampler.seed = value.parse().map_err(|_| fail(ctx("integer")))?,
            ("sampler", "init") => sampler.init = value.to_string(),
            ("sampler", "init_scale") => {
                sampler.init_scale = value.parse().map_err(|_| fail(ctx("number")))?
            }
            ("sampler", "smoothing") => {
                sampler.smoothing = value.parse().map_err(|_| fail(ctx("number")))?
            }
            ("sampler", "batch") => sampler.batch = value.parse().map_err(|_| fail(ctx("integer")))?,
            ("sampler", "divergence") => sampler.divergence = value.to_string(),
            ("experiment", "epsilon") => {
                experiment.epsilon = value.parse().map_err(|_| fail(ctx("number")))?
            }
            ("experiment", "w2_init") => {
                experiment.w2_init = if value == "auto" {
                    None
                } else {
                    Some(value.parse().map_err(|_| fail(ctx("number")))?)
                }
            }
            ("experiment", "reference_n") => {
                experiment.reference_n = value.parse().map_err(|_| fail(ctx("integer")))?
            }
            ("experiment", "projections") => {
                experiment.projections = value.parse().map_err(|_| fail(ctx("integer")))?
            }
            ("experiment", "record") => {
                experiment.record = if value == "auto" {
                    None
                } else {
                    Some(parse_u64_list(value).map_err(|_| fail(ctx("schedule")))?)
                }
            }
            ("experiment", "out") => experiment.out = value.to_string(),
            ("table", "dims") => {
                tb_dims = parse_u64_list(value)
                    .map_err(|_| fail(ctx("list")))?
                    .into_iter()
                    .map(|v| v as usize)
                    .collect()
            }
            ("table", "rule") => tb_rule = value.to_string(),
            ("table", "epsilon") => tb_eps = value.parse().map_err(|_| fail(ctx("number")))?,
            ("table", "w2_init") => tb_w2 = value.parse().map_err(|_| fail(ctx("number")))?,
            ("table", "batches") => {
                tb_batches = parse_u64_list(value).map_err(|_| fail(ctx("list")))?
            }
            ("target" | "sampler" | "experiment" | "table", _) => {
                return Err(fail(format!(
                    "line {}: unknown key `{key}` in section [{section}]",
                    lineno + 1
                )));
            }
            // Unknown sections (e.g. the [run] block of a manifest) are skipped.
            _ => {}
        }
    }

    if saw_target {
        let d = t_d.ok_or_else(|| fail("target section is missing `d`".into()))?;
        let beta = t_beta.ok_or_else(|| fail("target section is missing `beta`".into()))?;
        target = Some(TargetSpec { family: t_family, d, beta, sigma: t_sigma });
    }
    if saw_table {
        table = Some(TableSpec {
            dims: tb_dims,
            rule: tb_rule,
            epsilon: tb_eps,
            w2_init: tb_w2,
            batches: tb_batches,
        });
    }
    let target = target.ok_or_else(|| fail("spec has no [target] section".into()))?;
    Ok(ExperimentSpec { scenario, target, sampler, experiment, table })
}

pub fn load_spec(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_spec(&text)
}

fn parse_f64_list(value: &str) -> std::result::Result<Vec<f64>, ()> {
    value.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| ())).collect()
}

fn parse_u64_list(value: &str) -> std::result::Result<Vec<u64>, ()> {
    value.split(',').map(|v| v.trim().parse::<u64>().map_err(|_| ())).collect()
}

impl ExperimentSpec {
    /// Serialize back to the spec-file format. Parsing the output reproduces
    /// `self` exactly (floats print in shortest round-trip form).
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("scenario = {}\n\n[target]\n", self.scenario));
        s.push_str(&format!("family = {}\n", self.target.family));
        s.push_str(&format!("d = {}\n", self.target.d));
        s.push_str(&format!("beta = {}\n", self.target.beta));
        match &self.target.sigma {
            SigmaSpec::Identity => s.push_str("sigma = identity\n"),
            SigmaSpec::RowMajor(m) => s.push_str(&format!("sigma = {}\n", join_f64(m))),
        }
        s.push_str("\n[sampler]\n");
        s.push_str(&format!("algorithm = {}\n", self.sampler.algorithm));
        s.push_str(&format!("h = {}\n", self.sampler.h));
        s.push_str(&format!("iterations = {}\n", self.sampler.iterations));
        s.push_str(&format!("chains = {}\n", self.sampler.chains));
        s.push_str(&format!("seed = {}\n", self.sampler.seed));
        s.push_str(&format!("init = {}\n", self.sampler.init));
        s.push_str(&format!("init_scale = {}\n", self.sampler.init_scale));
        s.push_str(&format!("smoothing = {}\n", self.sampler.smoothing));
        s.push_str(&format!("batch = {}\n", self.sampler.batch));
        s.push_str(&format!("divergence = {}\n", self.sampler.divergence));
        s.push_str("\n[experiment]\n");
        s.push_str(&format!("epsilon = {}\n", self.experiment.epsilon));
        match self.experiment.w2_init {
            None => s.push_str("w2_init = auto\n"),
            Some(v) => s.push_str(&format!("w2_init = {v}\n")),
        }
        s.push_str(&format!("reference_n = {}\n", self.experiment.reference_n));
        s.push_str(&format!("projections = {}\n", self.experiment.projections));
        match &self.experiment.record {
            None => s.push_str("record = auto\n"),
            Some(ks) => s.push_str(&format!(
                "record = {}\n",
                ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")
            )),
        }
        s.push_str(&format!("out = {}\n", self.experiment.out));
        if let Some(t) = &self.table {
            s.push_str("\n[table]\n");
            s.push_str(&format!(
                "dims = {}\n",
                t.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
            ));
            s.push_str(&format!("rule = {}\n", t.rule));
            s.push_str(&format!("epsilon = {}\n", t.epsilon));
            s.push_str(&format!("w2_init = {}\n", t.w2_init));
            s.push_str(&format!(
                "batches = {}\n",
                t.batches.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(",")
            ));
        }
        s
    }

    /// Build the target, collecting construction errors as named violations.
    pub fn build_target(&self) -> Result<TargetDensity> {
        let mut violations = Vec::new();
        let target = match self.target.family.as_str() {
            "isotropic-student" => TargetDensity::isotropic_student(self.target.d, self.target.beta),
            "anisotropic-student" => {
                let sigma = match &self.target.sigma {
                    SigmaSpec::Identity => Ok(SpdMatrix::identity(self.target.d)),
                    SigmaSpec::RowMajor(m) => SpdMatrix::from_row_major(self.target.d, m.clone()),
                };
                match sigma {
                    Ok(s) => TargetDensity::anisotropic_student(self.target.d, self.target.beta, s),
                    Err(e) => {
                        violations.push(format!("sigma-spd: {e}"));
                        return Err(HarnessError::Validation(violations));
                    }
                }
            }
            other => {
                violations.push(format!(
                    "target-family: unknown family `{other}` (expected isotropic-student or anisotropic-student)"
                ));
                return Err(HarnessError::Validation(violations));
            }
        };
        target.map_err(|e| {
            violations.push(format!("target-construction: {e}"));
            HarnessError::Validation(violations)
        })
    }

    pub fn algorithm(&self) -> Result<Algorithm> {
        match self.sampler.algorithm.as_str() {
            "first-order" => Ok(Algorithm::FirstOrder),
            "zeroth-order" => Ok(Algorithm::ZerothOrder),
            "ula" => Ok(Algorithm::Ula),
            other => Err(fail(format!(
                "sampler-algorithm: unknown algorithm `{other}` (expected first-order, zeroth-order or ula)"
            ))),
        }
    }

    pub fn divergence_policy(&self) -> Result<DivergencePolicy> {
        match self.sampler.divergence.as_str() {
            "abort" => Ok(DivergencePolicy::Abort),
            "drop" => Ok(DivergencePolicy::DropAndFlag),
            other => Err(fail(format!(
                "sampler-divergence: unknown policy `{other}` (expected abort or drop)"
            ))),
        }
    }

    /// Assemble the sampler config (origin-centred init).
    pub fn sampler_config(&self) -> Result<SamplerConfig> {
        let d = self.target.d;
        let init = match self.sampler.init.as_str() {
            "point" => InitDistribution::Point(vec![0.0; d]),
            "gaussian" => InitDistribution::Gaussian {
                mean: vec![0.0; d],
                scale: self.sampler.init_scale,
            },
            other => {
                return Err(fail(format!(
                    "sampler-init: unknown init `{other}` (expected point or gaussian)"
                )))
            }
        };
        Ok(SamplerConfig {
            algorithm: self.algorithm()?,
            h: self.sampler.h,
            iterations: self.sampler.iterations,
            chains: self.sampler.chains,
            sigma: self.sampler.smoothing,
            m: self.sampler.batch,
            seed: self.sampler.seed,
            init,
            divergence_policy: self.divergence_policy()?,
        })
    }

    /// Validate every precondition an experiment run depends on, returning
    /// the full list of violated, named assumptions.
    pub fn validate_run(&self) -> Result<ValidatedRun> {
        let mut violations = Vec::new();

        let target = match self.build_target() {
            Ok(t) => Some(t),
            Err(HarnessError::Validation(mut v)) => {
                violations.append(&mut v);
                None
            }
            Err(e) => return Err(e),
        };
        let algorithm = match self.algorithm() {
            Ok(a) => Some(a),
            Err(HarnessError::Validation(mut v)) => {
                violations.append(&mut v);
                None
            }
            Err(e) => return Err(e),
        };

        let d = self.target.d;
        let beta = self.target.beta;
        if d == 0 {
            violations.push("dimension-positive: requires d >= 1".to_string());
        }
        if !(beta > 1.0) {
            violations.push(format!("beta-exponent: requires beta > 1, got {beta}"));
        }
        if !(beta > d as f64 / 2.0) {
            violations.push(format!(
                "normalizable: requires beta > d/2 = {}, got {beta}",
                d as f64 / 2.0
            ));
        }
        if !(beta > d as f64 / 2.0 + 1.0) {
            violations.push(format!(
                "finite-moments: requires beta > d/2 + 1 = {}, got {beta}",
                d as f64 / 2.0 + 1.0
            ));
        }

        let mut delta_value = None;
        if let Some(t) = &target {
            match theory::delta(beta, d, t.cv()) {
                Ok(v) => delta_value = Some(v),
                Err(e) => violations.push(format!("delta-positive: {e}")),
            }
            if let (Some(dl), Some(algo)) = (delta_value, algorithm) {
                let bound = match algo {
                    Algorithm::ZerothOrder => theory::zeroth_order_step_bound(
                        t.alpha(),
                        t.lipschitz(),
                        beta,
                        dl,
                        d,
                        self.sampler.batch.max(1),
                    ),
                    _ => theory::first_order_step_bound(t.alpha(), t.lipschitz(), beta, dl),
                };
                if let Ok(bound) = bound {
                    // The ULA baseline is exempt from the weighted-chain bound.
                    if algo != Algorithm::Ula && self.sampler.h > bound {
                        violations.push(format!(
                            "step-stability: h = {} exceeds the stability limit {bound}",
                            self.sampler.h
                        ));
                    }
                }
            }
        }
        if !(self.sampler.h > 0.0) {
            violations.push(format!("step-positive: requires h > 0, got {}", self.sampler.h));
        }
        if self.sampler.chains == 0 {
            violations.push("chains-positive: requires chains >= 1".to_string());
        }
        if algorithm == Some(Algorithm::ZerothOrder) {
            if !(self.sampler.smoothing > 0.0) {
                violations.push(format!(
                    "zo-smoothing-positive: requires smoothing > 0, got {}",
                    self.sampler.smoothing
                ));
            }
            if self.sampler.batch == 0 {
                violations.push("zo-batch-positive: requires batch >= 1".to_string());
            }
        }
        if let Some(record) = &self.experiment.record {
            if record.iter().any(|&k| k > self.sampler.iterations) {
                violations.push(format!(
                    "record-schedule: snapshot iterations must lie in [0, {}]",
                    self.sampler.iterations
                ));
            }
        }
        if !(self.experiment.epsilon > 0.0) {
            violations.push(format!(
                "epsilon-positive: requires epsilon > 0, got {}",
                self.experiment.epsilon
            ));
        }
        if self.experiment.projections == 0 {
            violations.push("projections-positive: requires projections >= 1".to_string());
        }
        if self.experiment.reference_n < self.sampler.chains {
            violations.push(format!(
                "reference-size: reference_n = {} must be >= chains = {}",
                self.experiment.reference_n, self.sampler.chains
            ));
        }

        if !violations.is_empty() {
            return Err(HarnessError::Validation(violations));
        }
        Ok(ValidatedRun {
            target: target.expect("validated"),
            config: self.sampler_config()?,
            delta: delta_value.expect("validated"),
        })
    }
}

/// A spec whose run-time preconditions all hold.
pub struct ValidatedRun {
    pub target: TargetDensity,
    pub config: SamplerConfig,
    pub delta: f64,
}

fn join_f64(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
scenario = demo
[target]
family = anisotropic-student
d = 2
beta = 3.5
sigma = 1,0.25,0.25,2
[sampler]
algorithm = zeroth-order
h = 0.0001
iterations = 50
chains = 8
seed = 7
init = gaussian
init_scale = 0.5
smoothing = 0.05
batch = 4
divergence = drop
[experiment]
epsilon = 0.25
w2_init = 5
reference_n = 1000
projections = 16
record = 0,10,50
out = runs/demo
";

    #[test]
    fn parse_and_round_trip() {
        let spec = parse_spec(SAMPLE).unwrap();
        assert_eq!(spec.scenario, "demo");
        assert_eq!(spec.target.d, 2);
        assert_eq!(spec.sampler.batch, 4);
        assert_eq!(spec.experiment.record, Some(vec![0, 10, 50]));
        let echoed = spec.to_config_text();
        let reparsed = parse_spec(&echoed).unwrap();
        assert_eq!(spec, reparsed);
    }

    #[test]
    fn manifest_sections_are_ignored() {
        let with_run = format!("{SAMPLE}\n[run]\nversion = 0.1.0\nnoise = 1.5\n");
        let spec = parse_spec(&with_run).unwrap();
        assert_eq!(spec, parse_spec(SAMPLE).unwrap());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = SAMPLE.replace("batch = 4", "batchsize = 4");
        assert!(parse_spec(&bad).is_err());
    }

    #[test]
    fn validation_lists_every_violation() {
        let mut spec = parse_spec(SAMPLE).unwrap();
        spec.target.beta = 1.5; // not normalizable in d = 2? (d/2 = 1) -> fine; kill moments instead
        spec.target.d = 4; // beta = 1.5 <= d/2 = 2: not normalizable, moments infinite, delta <= 0
        spec.target.sigma = SigmaSpec::Identity;
        spec.sampler.smoothing = 0.0;
        match spec.validate_run() {
            Err(HarnessError::Validation(violations)) => {
                let text = violations.join("\n");
                assert!(text.contains("normalizable:"), "{text}");
                assert!(text.contains("finite-moments:"), "{text}");
                assert!(text.contains("delta-positive:"), "{text}");
                assert!(text.contains("zo-smoothing-positive:"), "{text}");
            }
            other => panic!("expected validation failure, got {:?}", other.is_ok()),
        }
    }

    #[test]
    fn step_stability_is_validated() {
        let mut spec = parse_spec(SAMPLE).unwrap();
        spec.sampler.algorithm = "first-order".into();
        spec.sampler.h = 10.0;
        match spec.validate_run() {
            Err(HarnessError::Validation(v)) => {
                assert!(v.iter().any(|m| m.starts_with("step-stability:")), "{v:?}")
            }
            other => panic!("expected validation failure, got {:?}", other.is_ok()),
        }
    }
}
