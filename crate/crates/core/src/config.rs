//! Flat key-value scenario configuration.
//!
//! The format is line oriented: `key = value`, `#` starts a comment,
//! nested keys are dotted (`potential.alpha = 1.0`). Parsing collects
//! every violation (unknown keys, bad values, incompatible combinations)
//! before failing, and `serialize` emits a canonical document that parses
//! back to the identical configuration.

use crate::collisions::CollisionRule;
use crate::dsmc::{KernelSpec, PrefactorKind};
use crate::error::{Error, Result};
use crate::manifold::ManifoldSpec;
use crate::meanfield::{MeanFieldSpec, PotentialKind, ThetaHatMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    Relaxation,
    Alignment,
    Stability,
    InvariantFuzz,
    WeakForm,
}

impl ScenarioKind {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "relaxation" => Ok(ScenarioKind::Relaxation),
            "alignment" => Ok(ScenarioKind::Alignment),
            "stability" => Ok(ScenarioKind::Stability),
            "invariant_fuzz" => Ok(ScenarioKind::InvariantFuzz),
            "weakform" => Ok(ScenarioKind::WeakForm),
            other => Err(Error::Config(format!("unknown scenario '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Relaxation => "relaxation",
            ScenarioKind::Alignment => "alignment",
            ScenarioKind::Stability => "stability",
            ScenarioKind::InvariantFuzz => "invariant_fuzz",
            ScenarioKind::WeakForm => "weakform",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialConfig {
    pub kind: String,
    pub alpha: f64,
    pub beta: f64,
    pub theta_hat: f64,
    pub theta_hat_mode: String,
    pub transport_factor: f64,
    pub table: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelConfig {
    pub prefactor_kind: String,
    pub majorant: f64,
    pub table: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitConfig {
    pub bimodal_speed: f64,
    pub noise: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub manifold: ManifoldSpec,
    pub rule: CollisionRule,
    pub n_particles: usize,
    pub n_events: u64,
    pub dt: f64,
    pub t_end: f64,
    pub checkpoint_every: usize,
    pub seed: u64,
    pub potential: PotentialConfig,
    pub kernel: KernelConfig,
    pub init: InitConfig,
    pub output_path: Option<String>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: ScenarioKind::Relaxation,
            manifold: ManifoldSpec::CircleS1,
            rule: CollisionRule::Calamitic2d,
            n_particles: 1000,
            n_events: 1_000_000,
            dt: 0.01,
            t_end: 10.0,
            checkpoint_every: 50,
            seed: 0,
            potential: PotentialConfig {
                kind: "quadratic".into(),
                alpha: 1.0,
                beta: 1.0,
                theta_hat: 0.0,
                theta_hat_mode: "fixed".into(),
                transport_factor: 1.0,
                table: None,
            },
            kernel: KernelConfig {
                prefactor_kind: "unit".into(),
                majorant: 12.0,
                table: None,
            },
            init: InitConfig {
                bimodal_speed: 1.0,
                noise: 0.3,
            },
            output_path: None,
        }
    }
}

impl ScenarioConfig {
    /// Kernel description assembled from the config.
    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        let prefactor = match self.kernel.prefactor_kind.as_str() {
            "unit" => PrefactorKind::Unit,
            "bubble_mean" => PrefactorKind::BubbleMean,
            "custom" => {
                PrefactorKind::CustomTable(parse_table(self.kernel.table.as_deref().ok_or_else(
                    || Error::Config("kernel.table required for custom prefactor".into()),
                )?)?)
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown prefactor kind '{other}' (expected unit, bubble_mean, custom)"
                )))
            }
        };
        KernelSpec::new(self.rule, prefactor, self.kernel.majorant)
    }

    /// Mean-field description assembled from the config.
    pub fn mean_field_spec(&self) -> Result<MeanFieldSpec> {
        let kind = match self.potential.kind.as_str() {
            "quadratic" => PotentialKind::Quadratic,
            "cosine" => PotentialKind::Cosine,
            "custom" => PotentialKind::CustomTable(parse_table(
                self.potential.table.as_deref().ok_or_else(|| {
                    Error::Config("potential.table required for custom potential".into())
                })?,
            )?),
            other => {
                return Err(Error::Config(format!(
                    "unknown potential kind '{other}' (expected quadratic, cosine, custom)"
                )))
            }
        };
        let mode = match self.potential.theta_hat_mode.as_str() {
            "fixed" => ThetaHatMode::Fixed(self.potential.theta_hat),
            "mean" => ThetaHatMode::EnsembleMean,
            other => {
                return Err(Error::Config(format!(
                    "unknown theta_hat mode '{other}' (expected fixed, mean)"
                )))
            }
        };
        MeanFieldSpec::new(kind, self.potential.alpha, self.potential.beta, mode)?
            .with_transport_factor(self.potential.transport_factor)
    }
}

/// Parse `x:y;x:y;...` into a sorted table.
fn parse_table(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for chunk in text.split(';').filter(|c| !c.trim().is_empty()) {
        let mut parts = chunk.split(':');
        let x = parts
            .next()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::Config(format!("bad table entry '{chunk}'")))?;
        let y = parts
            .next()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::Config(format!("bad table entry '{chunk}'")))?;
        if parts.next().is_some() {
            return Err(Error::Config(format!("bad table entry '{chunk}'")));
        }
        out.push((x, y));
    }
    if out.len() < 2 {
        return Err(Error::Config("table needs at least two entries".into()));
    }
    if out.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::Config(
            "table abscissae must strictly increase".into(),
        ));
    }
    Ok(out)
}

const KNOWN_KEYS: &[&str] = &[
    "scenario",
    "manifold",
    "rule",
    "n_particles",
    "n_events",
    "dt",
    "t_end",
    "checkpoint_every",
    "seed",
    "output_path",
    "potential.kind",
    "potential.alpha",
    "potential.beta",
    "potential.theta_hat",
    "potential.theta_hat_mode",
    "potential.transport_factor",
    "potential.table",
    "kernel.prefactor_kind",
    "kernel.majorant",
    "kernel.table",
    "init.bimodal_speed",
    "init.noise",
];

/// Parse a config document; every violation is reported with its key.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    let mut violations: Vec<String> = Vec::new();
    let mut seen: Vec<String> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            violations.push(format!("line {}: expected 'key = value'", lineno + 1));
            continue;
        };
        let key = key.trim();
        let value = value.trim();
        if !KNOWN_KEYS.contains(&key) {
            violations.push(format!("{key}: unknown key"));
            continue;
        }
        if seen.iter().any(|k| k == key) {
            violations.push(format!("{key}: duplicate key"));
            continue;
        }
        seen.push(key.to_string());

        let mut bad = |msg: &str| violations.push(format!("{key}: {msg} (got '{value}')"));
        match key {
            "scenario" => match ScenarioKind::from_name(value) {
                Ok(v) => cfg.scenario = v,
                Err(_) => bad("unknown scenario"),
            },
            "manifold" => match ManifoldSpec::from_name(value) {
                Ok(v) => cfg.manifold = v,
                Err(_) => bad("unknown manifold"),
            },
            "rule" => match CollisionRule::from_name(value) {
                Ok(v) => cfg.rule = v,
                Err(_) => bad("unknown rule"),
            },
            "n_particles" => match value.parse() {
                Ok(v) => cfg.n_particles = v,
                Err(_) => bad("expected a nonnegative integer"),
            },
            "n_events" => match value.parse() {
                Ok(v) => cfg.n_events = v,
                Err(_) => bad("expected a nonnegative integer"),
            },
            "dt" => match value.parse() {
                Ok(v) => cfg.dt = v,
                Err(_) => bad("expected a float"),
            },
            "t_end" => match value.parse() {
                Ok(v) => cfg.t_end = v,
                Err(_) => bad("expected a float"),
            },
            "checkpoint_every" => match value.parse() {
                Ok(v) => cfg.checkpoint_every = v,
                Err(_) => bad("expected a positive integer"),
            },
            "seed" => match value.parse() {
                Ok(v) => cfg.seed = v,
                Err(_) => bad("expected a 64-bit unsigned integer"),
            },
            "output_path" => cfg.output_path = Some(value.to_string()),
            "potential.kind" => cfg.potential.kind = value.to_string(),
            "potential.alpha" => match value.parse() {
                Ok(v) => cfg.potential.alpha = v,
                Err(_) => bad("expected a float"),
            },
            "potential.beta" => match value.parse() {
                Ok(v) => cfg.potential.beta = v,
                Err(_) => bad("expected a float"),
            },
            "potential.theta_hat" => match value.parse() {
                Ok(v) => cfg.potential.theta_hat = v,
                Err(_) => bad("expected a float"),
            },
            "potential.theta_hat_mode" => cfg.potential.theta_hat_mode = value.to_string(),
            "potential.transport_factor" => match value.parse() {
                Ok(v) => cfg.potential.transport_factor = v,
                Err(_) => bad("expected a float"),
            },
            "potential.table" => cfg.potential.table = Some(value.to_string()),
            "kernel.prefactor_kind" => cfg.kernel.prefactor_kind = value.to_string(),
            "kernel.majorant" => match value.parse() {
                Ok(v) => cfg.kernel.majorant = v,
                Err(_) => bad("expected a float"),
            },
            "kernel.table" => cfg.kernel.table = Some(value.to_string()),
            "init.bimodal_speed" => match value.parse() {
                Ok(v) => cfg.init.bimodal_speed = v,
                Err(_) => bad("expected a float"),
            },
            "init.noise" => match value.parse() {
                Ok(v) => cfg.init.noise = v,
                Err(_) => bad("expected a float"),
            },
            _ => unreachable!("key membership already checked"),
        }
    }

    validate(&cfg, &mut violations);
    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(violations.join("; ")))
    }
}

fn validate(cfg: &ScenarioConfig, violations: &mut Vec<String>) {
    if !cfg.rule.compatible_with(cfg.manifold) {
        violations.push(format!(
            "rule: '{}' is incompatible with manifold '{}'",
            cfg.rule.name(),
            cfg.manifold.name()
        ));
    }
    let collisional = matches!(
        cfg.scenario,
        ScenarioKind::Relaxation | ScenarioKind::WeakForm
    );
    if collisional && cfg.n_particles < 2 {
        violations.push("n_particles: collision scenarios need at least 2".into());
    }
    if cfg.scenario == ScenarioKind::Relaxation && cfg.n_particles < 1000 {
        violations.push(
            "n_particles: relaxation needs at least 1000 for the entropy estimator".into(),
        );
    }
    if cfg.scenario == ScenarioKind::Alignment && cfg.n_particles == 0 {
        violations.push("n_particles: alignment needs at least 1".into());
    }
    if !(cfg.dt.is_finite() && cfg.dt > 0.0) {
        violations.push(format!("dt: must be finite and > 0 (got {})", cfg.dt));
    }
    if !(cfg.t_end.is_finite() && cfg.t_end >= 0.0) {
        violations.push(format!(
            "t_end: must be finite and >= 0 (got {})",
            cfg.t_end
        ));
    }
    if cfg.checkpoint_every == 0 {
        violations.push("checkpoint_every: must be >= 1".into());
    }
    if !(cfg.kernel.majorant.is_finite() && cfg.kernel.majorant > 0.0) {
        violations.push(format!(
            "kernel.majorant: must be finite and > 0 (got {})",
            cfg.kernel.majorant
        ));
    }
    if let Err(e) = cfg.kernel_spec() {
        violations.push(format!("kernel.prefactor_kind: {e}"));
    }
    if let Err(e) = cfg.mean_field_spec() {
        violations.push(format!("potential.kind: {e}"));
    }
    if !cfg.potential.theta_hat.is_finite() {
        violations.push("potential.theta_hat: must be finite".into());
    }
    if !(cfg.init.noise.is_finite() && cfg.init.noise >= 0.0) {
        violations.push("init.noise: must be finite and >= 0".into());
    }
}

/// Canonical document: every key in declaration order, full float
/// precision, one `key = value` per line.
pub fn serialize(cfg: &ScenarioConfig) -> String {
    let mut lines = vec![
        format!("scenario = {}", cfg.scenario.name()),
        format!("manifold = {}", cfg.manifold.name()),
        format!("rule = {}", cfg.rule.name()),
        format!("n_particles = {}", cfg.n_particles),
        format!("n_events = {}", cfg.n_events),
        format!("dt = {:?}", cfg.dt),
        format!("t_end = {:?}", cfg.t_end),
        format!("checkpoint_every = {}", cfg.checkpoint_every),
        format!("seed = {}", cfg.seed),
        format!("potential.kind = {}", cfg.potential.kind),
        format!("potential.alpha = {:?}", cfg.potential.alpha),
        format!("potential.beta = {:?}", cfg.potential.beta),
        format!("potential.theta_hat = {:?}", cfg.potential.theta_hat),
        format!(
            "potential.theta_hat_mode = {}",
            cfg.potential.theta_hat_mode
        ),
        format!(
            "potential.transport_factor = {:?}",
            cfg.potential.transport_factor
        ),
        format!("kernel.prefactor_kind = {}", cfg.kernel.prefactor_kind),
        format!("kernel.majorant = {:?}", cfg.kernel.majorant),
        format!("init.bimodal_speed = {:?}", cfg.init.bimodal_speed),
        format!("init.noise = {:?}", cfg.init.noise),
    ];
    if let Some(t) = &cfg.potential.table {
        lines.push(format!("potential.table = {t}"));
    }
    if let Some(t) = &cfg.kernel.table {
        lines.push(format!("kernel.table = {t}"));
    }
    if let Some(p) = &cfg.output_path {
        lines.push(format!("output_path = {p}"));
    }
    lines.push(String::new());
    lines.join("\n")
}
