//! Scenario configuration: JSON in, validated and fully resolved.

use serde::{Deserialize, Serialize};
use susy_core::catalog::{Family, PotentialSpec};
use susy_core::systems::SystemKind;
use susy_core::Grid;

use crate::CliError;

/// Upper bound on the number of computed levels per axis.
pub const MAX_LEVELS: usize = 40;
/// Environment variable overriding `grid.n`.
pub const GRID_N_VAR: &str = "SUSY_GRID_N";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Spectrum,
    Isospectral,
    Ladder,
    Integrals,
    Bracket,
    Riccati,
    P4Residual,
}

impl CheckKind {
    pub const ALL: [CheckKind; 7] = [
        CheckKind::Spectrum,
        CheckKind::Isospectral,
        CheckKind::Ladder,
        CheckKind::Integrals,
        CheckKind::Bracket,
        CheckKind::Riccati,
        CheckKind::P4Residual,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Spectrum => "spectrum",
            CheckKind::Isospectral => "isospectral",
            CheckKind::Ladder => "ladder",
            CheckKind::Integrals => "integrals",
            CheckKind::Bracket => "bracket",
            CheckKind::Riccati => "riccati",
            CheckKind::P4Residual => "p4_residual",
        }
    }
}

/// Physical parameters. Missing values take the catalog defaults unless
/// the system requires them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_p4: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_p4: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<i8>,
    /// Per-axis families for `custom`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<AxisParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<AxisParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisParams {
    pub family: Family,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_p4: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_p4: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<i8>,
}

impl AxisParams {
    pub fn spec(&self) -> PotentialSpec {
        let d = PotentialSpec::new(self.family);
        PotentialSpec {
            family: self.family,
            omega: self.omega.unwrap_or(d.omega),
            gamma: self.gamma.unwrap_or(d.gamma),
            a0: self.a0.unwrap_or(d.a0),
            alpha_p4: self.alpha_p4.unwrap_or(d.alpha_p4),
            beta_p4: self.beta_p4.unwrap_or(d.beta_p4),
            eps: self.eps.unwrap_or(d.eps),
        }
    }

    fn resolved(&self) -> Self {
        let s = self.spec();
        Self {
            family: s.family,
            omega: Some(s.omega),
            gamma: Some(s.gamma),
            a0: Some(s.a0),
            alpha_p4: Some(s.alpha_p4),
            beta_p4: Some(s.beta_p4),
            eps: Some(s.eps),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { x_min: -12.0, x_max: 12.0, n: 2048 }
    }
}

/// Units and sign conventions, echoed into every output config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Conventions {
    pub hbar: f64,
    pub hamiltonian: String,
    pub factorization: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            hamiltonian: "H = -1/2 d^2/dx^2 + V(x)".into(),
            factorization: "A = (d/dx + W)/sqrt(2), A^+ = (-d/dx + W)/sqrt(2)".into(),
        }
    }
}

fn default_levels() -> usize {
    12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub system: SystemKind,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// `None` runs every check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<CheckKind>>,
    pub output: String,
    #[serde(default)]
    pub conventions: Conventions,
}

fn required(system: SystemKind) -> &'static [&'static str] {
    match system {
        SystemKind::Mielnik2d => &["gamma"],
        SystemKind::ErfHe | SystemKind::ErfHf | SystemKind::ErfHgamma1d => &["a0", "gamma"],
        SystemKind::PainleveHss => &["alpha_p4", "beta_p4", "gamma"],
        SystemKind::Custom => &["x", "y"],
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// A config for `system` with default grid and levels.
    pub fn for_system(system: SystemKind) -> Self {
        Self {
            system,
            params: Params::default(),
            grid: GridConfig::default(),
            levels: default_levels(),
            checks: None,
            output: system.name().into(),
            conventions: Conventions::default(),
        }
    }

    /// Applies `SUSY_GRID_N` when set.
    pub fn apply_env(&mut self) -> Result<(), CliError> {
        if let Ok(v) = std::env::var(GRID_N_VAR) {
            self.grid.n = v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{GRID_N_VAR} must be an integer, got {v:?}")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.params;
        let present = |name: &str| match name {
            "gamma" => p.gamma.is_some(),
            "a0" => p.a0.is_some(),
            "alpha_p4" => p.alpha_p4.is_some(),
            "beta_p4" => p.beta_p4.is_some(),
            "x" => p.x.is_some(),
            "y" => p.y.is_some(),
            _ => true,
        };
        let missing: Vec<&str> = required(self.system).iter().copied().filter(|n| !present(n)).collect();
        if !missing.is_empty() {
            return Err(CliError::Config(format!(
                "{} requires params {}",
                self.system.name(),
                missing.join(", ")
            )));
        }
        if self.system != SystemKind::Custom && (p.x.is_some() || p.y.is_some()) {
            return Err(CliError::Config("per-axis params x/y are only used by custom".into()));
        }
        if self.levels == 0 || self.levels > MAX_LEVELS {
            return Err(CliError::Config(format!(
                "levels must be in 1..={MAX_LEVELS}, got {}",
                self.levels
            )));
        }
        if self.conventions.hbar != 1.0 {
            return Err(CliError::Config(format!(
                "only hbar = 1 is supported, got {}",
                self.conventions.hbar
            )));
        }
        if self.output.is_empty() {
            return Err(CliError::Config("output prefix is empty".into()));
        }
        if let Some(c) = &self.checks {
            if c.is_empty() {
                return Err(CliError::Config("checks list is empty".into()));
            }
        }
        let grid = self.grid()?;
        if self.levels > grid.interior().len() / 4 {
            return Err(CliError::Config(format!(
                "{} levels need at least {} grid points, got {}",
                self.levels,
                4 * self.levels + 2,
                grid.len()
            )));
        }
        for spec in self.axis_specs() {
            spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Grid::new(self.grid.x_min, self.grid.x_max, self.grid.n).map_err(|e| CliError::Config(e.to_string()))
    }

    /// System-level parameters with defaults filled in.
    pub fn spec(&self) -> PotentialSpec {
        let p = &self.params;
        let d = PotentialSpec::new(Family::Harmonic);
        PotentialSpec {
            family: Family::Harmonic,
            omega: p.omega.unwrap_or(d.omega),
            gamma: p.gamma.unwrap_or(d.gamma),
            a0: p.a0.unwrap_or(d.a0),
            alpha_p4: p.alpha_p4.unwrap_or(d.alpha_p4),
            beta_p4: p.beta_p4.unwrap_or(d.beta_p4),
            eps: p.eps.unwrap_or(d.eps),
        }
    }

    /// Specs subject to per-family validation.
    fn axis_specs(&self) -> Vec<PotentialSpec> {
        match (&self.params.x, &self.params.y) {
            (Some(x), Some(y)) => vec![x.spec(), y.spec()],
            _ => {
                let family = match self.system {
                    SystemKind::ErfHe | SystemKind::ErfHf | SystemKind::ErfHgamma1d => Family::ErfGamma,
                    _ => Family::Harmonic,
                };
                vec![PotentialSpec { family, ..self.spec() }]
            }
        }
    }

    pub fn checks(&self) -> Vec<CheckKind> {
        match &self.checks {
            Some(c) => {
                // Canonical order, no duplicates.
                CheckKind::ALL.into_iter().filter(|k| c.contains(k)).collect()
            }
            None => CheckKind::ALL.to_vec(),
        }
    }

    /// The config with every default made explicit; re-running it gives
    /// the same results.
    pub fn resolved(&self) -> Self {
        let s = self.spec();
        let params = if self.system == SystemKind::Custom {
            Params {
                x: self.params.x.as_ref().map(AxisParams::resolved),
                y: self.params.y.as_ref().map(AxisParams::resolved),
                ..Params::default()
            }
        } else {
            Params {
                omega: Some(s.omega),
                gamma: Some(s.gamma),
                a0: Some(s.a0),
                alpha_p4: Some(s.alpha_p4),
                beta_p4: Some(s.beta_p4),
                eps: Some(s.eps),
                x: None,
                y: None,
            }
        };
        Self { params, checks: Some(self.checks()), ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ScenarioConfig::from_json(r#"{"system":"mielnik2d","params":{"gamma":1.5},"output":"o"}"#).unwrap();
        c.validate().unwrap();
        assert_eq!(c.levels, 12);
        assert_eq!(c.grid, GridConfig::default());
        assert_eq!(c.checks().len(), 7);
        let r = c.resolved();
        assert_eq!(r.params.omega, Some(1.0));
        let again = ScenarioConfig::from_json(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(again, r);
    }

    #[test]
    fn missing_required_params() {
        let c = ScenarioConfig::from_json(r#"{"system":"erf_he","params":{"gamma":2},"output":"o"}"#).unwrap();
        let e = c.validate().unwrap_err();
        assert!(e.to_string().contains("a0"), "{e}");
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            r#"{"system":"mielnik2d","params":{"gamma":1.5},"levels":41,"output":"o"}"#,
            r#"{"system":"mielnik2d","params":{"gamma":1.5},"grid":{"x_min":1,"x_max":-1,"n":100},"output":"o"}"#,
            r#"{"system":"mielnik2d","params":{"gamma":1.5,"omega":-1},"output":"o"}"#,
            r#"{"system":"erf_he","params":{"gamma":2,"a0":0},"output":"o"}"#,
            r#"{"system":"mielnik2d","params":{"gamma":1.5},"checks":[],"output":"o"}"#,
        ] {
            let c = ScenarioConfig::from_json(text).unwrap();
            assert!(c.validate().is_err(), "{text}");
        }
        for text in [
            r#"{"system":"nope","output":"o"}"#,
            r#"{"system":"mielnik2d","params":{"gama":1.5},"output":"o"}"#,
            r#"{"system":"mielnik2d","checks":["spectra"],"output":"o"}"#,
        ] {
            assert!(ScenarioConfig::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn checks_are_canonicalized() {
        let c = ScenarioConfig::from_json(
            r#"{"system":"mielnik2d","params":{"gamma":1.5},"checks":["ladder","spectrum","ladder"],"output":"o"}"#,
        )
        .unwrap();
        assert_eq!(c.checks(), vec![CheckKind::Spectrum, CheckKind::Ladder]);
    }

    #[test]
    fn custom_needs_both_axes() {
        let c = ScenarioConfig::from_json(
            r#"{"system":"custom","params":{"x":{"family":"harmonic"}},"output":"o"}"#,
        )
        .unwrap();
        assert!(c.validate().is_err());
        let c = ScenarioConfig::from_json(
            r#"{"system":"custom","params":{"x":{"family":"harmonic"},"y":{"family":"mielnik","gamma":2}},"output":"o"}"#,
        )
        .unwrap();
        c.validate().unwrap();
        let r = c.resolved();
        assert_eq!(r.params.y.unwrap().gamma, Some(2.0));
    }
}
