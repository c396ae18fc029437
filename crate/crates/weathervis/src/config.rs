//! Run configuration, read from TOML and overridable from the command line.
//!
//! ```toml
//! mesh = "scene.obj"            # relative to this file
//! out = "results"
//! metrics = ["degree", "sum", "avg"]
//! scale = "shared"              # or "per-run"
//!
//! [grid]
//! bounds = [0.0, 0.0, 50.0, 50.0]   # defaults to the mesh footprint
//! spacing = 1.0
//! eye_height = 1.7
//!
//! [[conditions]]
//! kind = "rain"
//! rate_mm_per_h = 8.0
//!
//! [[conditions]]
//! kind = "fog-ha"
//!
//! [subset]
//! targets = [[40.5, 40.5]]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use weathervis_core::attenuation::DEFAULT_CLEAR_SIGMA;
use weathervis_core::sampling::{
    Bounds2, DEFAULT_EYE_HEIGHT, DEFAULT_SPACING, DEFAULT_WALKABLE_CUTOFF,
};
use weathervis_core::visgraph::AverageNormalization;
use weathervis_core::{
    Aabb, AttenuationConfig, ConditionKind, GridSpec, WeatherCondition,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: PathBuf,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub conditions: Vec<WeatherCondition>,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub scale: ScaleMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<SubsetConfig>,
    /// Pairs farther apart than this (m) are not tested. Off by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_los: Option<f64>,
    #[serde(default = "default_clear_sigma")]
    pub clear_sigma: f64,
    #[serde(default = "default_refractive_index")]
    pub water_refractive_index: f64,
    #[serde(default)]
    pub average: AverageNormalization,
    #[serde(default)]
    pub graph_format: GraphFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// `[min_x, min_y, max_x, max_y]`; the mesh footprint when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<[f64; 4]>,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    #[serde(default = "default_eye_height")]
    pub eye_height: f64,
    #[serde(default = "default_cutoff")]
    pub walkable_cutoff: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drop_height: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            bounds: None,
            spacing: DEFAULT_SPACING,
            eye_height: DEFAULT_EYE_HEIGHT,
            walkable_cutoff: DEFAULT_WALKABLE_CUTOFF,
            drop_height: None,
        }
    }
}

impl GridConfig {
    /// Grid spec over the configured bounds, or the mesh footprint.
    pub fn spec_for(&self, scene_bounds: Aabb) -> GridSpec {
        let bounds = match self.bounds {
            Some([x0, y0, x1, y1]) => Bounds2::new(x0, y0, x1, y1),
            None => {
                let b = scene_bounds;
                Bounds2::new(b.min.x, b.min.y, b.max.x, b.max.y)
            }
        };
        GridSpec {
            bounds,
            spacing: self.spacing,
            eye_height: self.eye_height,
            drop_height: self.drop_height,
            walkable_cutoff: self.walkable_cutoff,
        }
    }
}

/// Target locations for a subset analysis. Every grid node is a source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetConfig {
    /// `[x, y]` or `[x, y, z]` points, each snapped to the nearest node.
    pub targets: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Degree,
    Sum,
    Avg,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Degree, Metric::Sum, Metric::Avg];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Degree => "degree",
            Metric::Sum => "sum",
            Metric::Avg => "avg",
        }
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Metric> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown metric `{s}` (degree, sum, avg)")))
    }
}

/// How heatmap color ranges are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleMode {
    /// Each condition uses its own min/max.
    #[default]
    PerRun,
    /// One min/max per metric across all conditions of the run.
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphFormat {
    #[default]
    Json,
    Binary,
}

impl GraphFormat {
    pub fn file_name(self) -> &'static str {
        match self {
            GraphFormat::Json => "graph.json",
            GraphFormat::Binary => "graph.vgat",
        }
    }
}

fn default_out() -> PathBuf {
    PathBuf::from("weathervis-out")
}
fn default_metrics() -> Vec<Metric> {
    Metric::ALL.to_vec()
}
fn default_clear_sigma() -> f64 {
    DEFAULT_CLEAR_SIGMA
}
fn default_refractive_index() -> f64 {
    weathervis_core::attenuation::WATER_REFRACTIVE_INDEX
}
fn default_spacing() -> f64 {
    DEFAULT_SPACING
}
fn default_eye_height() -> f64 {
    DEFAULT_EYE_HEIGHT
}
fn default_cutoff() -> f64 {
    DEFAULT_WALKABLE_CUTOFF
}

impl RunConfig {
    pub fn new(mesh: impl Into<PathBuf>) -> RunConfig {
        RunConfig {
            mesh: mesh.into(),
            out: default_out(),
            grid: GridConfig::default(),
            conditions: Vec::new(),
            metrics: default_metrics(),
            scale: ScaleMode::default(),
            subset: None,
            max_los: None,
            clear_sigma: DEFAULT_CLEAR_SIGMA,
            water_refractive_index: default_refractive_index(),
            average: AverageNormalization::default(),
            graph_format: GraphFormat::default(),
            threads: None,
        }
    }

    /// Reads a TOML config. Relative `mesh` and `out` paths are resolved
    /// against the config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = RunConfig::from_toml(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if config.mesh.is_relative() {
            config.mesh = base.join(&config.mesh);
        }
        if config.out.is_relative() {
            config.out = base.join(&config.out);
        }
        Ok(config)
    }

    pub fn from_toml(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn attenuation(&self) -> AttenuationConfig {
        AttenuationConfig {
            clear_sigma: self.clear_sigma,
            water_refractive_index: self.water_refractive_index,
            ..AttenuationConfig::default()
        }
    }

    /// Checks everything that does not need the mesh.
    pub fn validate(&self) -> Result<()> {
        self.validate_scene()?;
        self.validate_conditions()?;
        if self.metrics.is_empty() {
            return Err(Error::Config("at least one metric is required".into()));
        }
        Ok(())
    }

    /// Grid, subset and graph settings.
    pub fn validate_scene(&self) -> Result<()> {
        let g = &self.grid;
        if !(g.spacing > 0.0 && g.spacing.is_finite()) {
            return Err(Error::Config("grid spacing must be positive".into()));
        }
        if !(g.eye_height >= 0.0 && g.eye_height.is_finite()) {
            return Err(Error::Config("eye height must be non-negative".into()));
        }
        if !(g.walkable_cutoff >= 0.0 && g.walkable_cutoff.is_finite()) {
            return Err(Error::Config("walkable cutoff must be non-negative".into()));
        }
        if let Some([x0, y0, x1, y1]) = g.bounds {
            if !(x1 > x0 && y1 > y0) || ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
                return Err(Error::Config("grid bounds must be [min_x, min_y, max_x, max_y]".into()));
            }
        }
        if let Some(subset) = &self.subset {
            if subset.targets.is_empty() {
                return Err(Error::Config("subset needs at least one target point".into()));
            }
            for t in &subset.targets {
                if !(t.len() == 2 || t.len() == 3) || !t.iter().all(|v| v.is_finite()) {
                    return Err(Error::Config(format!("subset target {t:?} must be [x, y] or [x, y, z]")));
                }
            }
        }
        if let Some(d) = self.max_los {
            if !(d > 0.0) {
                return Err(Error::Config("max_los must be positive".into()));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    /// At least one condition, each valid, with distinct labels.
    pub fn validate_conditions(&self) -> Result<()> {
        if !(self.clear_sigma >= 0.0 && self.clear_sigma.is_finite()) {
            return Err(Error::Config("clear_sigma must be non-negative".into()));
        }
        if !(self.water_refractive_index > 1.0) {
            return Err(Error::Config("water_refractive_index must exceed 1".into()));
        }
        if self.conditions.is_empty() {
            return Err(Error::Config("at least one weather condition is required".into()));
        }
        let mut labels = Vec::new();
        for c in &self.conditions {
            c.validate()
                .map_err(|e| Error::Config(format!("condition {}: {e}", condition_label(c))))?;
            let label = condition_label(c);
            if labels.contains(&label) {
                return Err(Error::Config(format!("condition `{label}` is listed twice")));
            }
            labels.push(label);
        }
        Ok(())
    }
}

/// Command-line condition syntax: `kind[:rate[:wavelength_nm]]` for rain and
/// snow, `fog-ha[:wavelength_nm]`, `clear`, or `custom:sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionArg(pub WeatherCondition);

impl FromStr for ConditionArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<ConditionArg> {
        let mut parts = s.split(':');
        let name = parts.next().unwrap_or("");
        let kind = ConditionKind::from_name(name).ok_or_else(|| {
            let known: Vec<_> = ConditionKind::ALL.iter().map(|k| k.name()).collect();
            Error::Config(format!("unknown condition `{name}` (one of {})", known.join(", ")))
        })?;
        let numbers = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| Error::Config(format!("`{p}` in `{s}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut c = WeatherCondition::new(kind);
        let arity_error = |max: usize| {
            Error::Config(format!("`{s}`: {name} takes at most {max} value(s)"))
        };
        match kind {
            ConditionKind::Rain | ConditionKind::SnowWet | ConditionKind::SnowDry => {
                if numbers.len() > 2 {
                    return Err(arity_error(2));
                }
                let rate = *numbers
                    .first()
                    .ok_or_else(|| Error::Config(format!("`{s}`: {name} needs a rate in mm/h")))?;
                c.rate_mm_per_h = rate;
                if let Some(&l) = numbers.get(1) {
                    c.wavelength_nm = l;
                }
            }
            ConditionKind::FogHeavyAdvection | ConditionKind::FogModerateRadiation => {
                // fog has no rate, so the only value is the wavelength
                if numbers.len() > 1 {
                    return Err(arity_error(1));
                }
                if let Some(&l) = numbers.first() {
                    c.wavelength_nm = l;
                }
            }
            ConditionKind::Clear => {
                if !numbers.is_empty() {
                    return Err(arity_error(0));
                }
            }
            ConditionKind::CustomSigma => {
                if numbers.len() != 1 {
                    return Err(Error::Config(format!("`{s}`: custom needs exactly one σ in 1/m")));
                }
                c.custom_sigma = numbers[0];
            }
        }
        c.validate().map_err(|e| Error::Config(format!("`{s}`: {e}")))?;
        Ok(ConditionArg(c))
    }
}

impl fmt::Display for ConditionArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&condition_label(&self.0))
    }
}

/// File-name-safe label such as `clear`, `rain-8`, `snow-dry-4-450nm`,
/// `fog-ha` or `custom-0.06`.
pub fn condition_label(c: &WeatherCondition) -> String {
    let mut label = c.kind.name().to_string();
    if c.kind.uses_rate() {
        label.push_str(&format!("-{}", c.rate_mm_per_h));
    }
    if c.kind.uses_wavelength() && c.wavelength_nm != weathervis_core::attenuation::DEFAULT_WAVELENGTH_NM {
        label.push_str(&format!("-{}nm", c.wavelength_nm));
    }
    if c.kind == ConditionKind::CustomSigma {
        label.push_str(&format!("-{}", c.custom_sigma));
    }
    label
}

#[cfg(test)]
mod tests {
    use super::*;
    use weathervis_core::SnowKind;

    fn arg(s: &str) -> Result<WeatherCondition> {
        s.parse::<ConditionArg>().map(|c| c.0)
    }

    #[test]
    fn condition_syntax() {
        assert_eq!(arg("clear").unwrap(), WeatherCondition::clear());
        assert_eq!(arg("rain:8").unwrap(), WeatherCondition::rain(8.0));
        assert_eq!(
            arg("snow-dry:4:450").unwrap(),
            WeatherCondition::snow(SnowKind::Dry, 4.0).with_wavelength(450.0)
        );
        assert_eq!(arg("fog-ha").unwrap(), WeatherCondition::fog_heavy_advection());
        assert_eq!(
            arg("fog-mr:600").unwrap(),
            WeatherCondition::fog_moderate_radiation().with_wavelength(600.0)
        );
        assert_eq!(arg("custom:0.06").unwrap(), WeatherCondition::custom(0.06));
        for bad in ["", "hail", "rain", "rain:x", "rain:-1", "clear:1", "custom", "snow-wet:1:900", "rain:1:2:3", "fog-ha:0:600"] {
            assert!(matches!(arg(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn labels() {
        let cases = [
            ("clear", "clear"),
            ("rain:8", "rain-8"),
            ("rain:0.5", "rain-0.5"),
            ("snow-dry:4", "snow-dry-4"),
            ("snow-wet:2:450", "snow-wet-2-450nm"),
            ("fog-ha", "fog-ha"),
            ("custom:0.06", "custom-0.06"),
        ];
        for (spec, label) in cases {
            assert_eq!(condition_label(&arg(spec).unwrap()), label);
        }
    }

    #[test]
    fn toml_round_trip_and_defaults() {
        let text = r#"
            mesh = "scene.obj"
            scale = "shared"
            metrics = ["sum"]
            [grid]
            bounds = [0, 0, 50, 50]
            [[conditions]]
            kind = "rain"
            rate_mm_per_h = 8
            [[conditions]]
            kind = "fog-ha"
            [subset]
            targets = [[10.5, 10.5]]
        "#;
        let c = RunConfig::from_toml(text).unwrap();
        assert_eq!(c.grid.spacing, 1.0);
        assert_eq!(c.grid.eye_height, 1.7);
        assert_eq!(c.clear_sigma, 0.00015);
        assert_eq!(c.scale, ScaleMode::Shared);
        assert_eq!(c.conditions[1], WeatherCondition::fog_heavy_advection());
        c.validate().unwrap();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn validation_failures() {
        let base = || {
            let mut c = RunConfig::new("m.obj");
            c.conditions.push(WeatherCondition::clear());
            c
        };
        base().validate().unwrap();
        let mut c = base();
        c.conditions.clear();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = base();
        c.grid.spacing = 0.0;
        assert!(c.validate().is_err());
        let mut c = base();
        c.conditions.push(WeatherCondition::clear());
        assert!(c.validate().is_err());
        let mut c = base();
        c.subset = Some(SubsetConfig { targets: vec![vec![1.0]] });
        assert!(c.validate().is_err());
        assert!(RunConfig::from_toml("mesh = 'a'\nbogus = 1").is_err());
    }
}
