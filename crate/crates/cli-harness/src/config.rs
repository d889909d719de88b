use std::path::{Path, PathBuf};

use serde::Deserialize;
use transport_solver::{BoundaryKind, SpatialScheme};

use crate::presets::find_preset;
use crate::{HarnessError, Result};

/// Checks a run can be asked to pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckName {
    /// Slope of `‖u − U₀‖` in `[0.4, 0.6]`.
    RateWindow,
    /// Slope of `‖u − U₀‖` at least 0.4.
    RateFloor,
    /// `ε^{−1/2}‖R̄‖` and `ε^{−1}‖R − R̄‖` within a factor 4 across the sweep.
    ScaledRemainder,
    /// Smallest energy-estimate constant within a factor 2 across the sweep.
    EnergyEstimate,
    /// Same for the kernel estimate.
    KernelEstimate,
    /// Wall flux below 1e−10 (diffuse and specular walls).
    NullFlux,
    /// Doubling the spacing moves `‖u − U₀‖` by less than 10% of its smallest value.
    Resolution,
}

impl CheckName {
    pub const ALL: [CheckName; 7] = [
        CheckName::RateWindow,
        CheckName::RateFloor,
        CheckName::ScaledRemainder,
        CheckName::EnergyEstimate,
        CheckName::KernelEstimate,
        CheckName::NullFlux,
        CheckName::Resolution,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::RateWindow => "rate-window",
            CheckName::RateFloor => "rate-floor",
            CheckName::ScaledRemainder => "scaled-remainder",
            CheckName::EnergyEstimate => "energy-estimate",
            CheckName::KernelEstimate => "kernel-estimate",
            CheckName::NullFlux => "null-flux",
            CheckName::Resolution => "resolution",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InlineData {
    pub kind: BoundaryKind,
    /// `u_o(x, μ)`.
    pub initial: String,
    /// `g` (in-flow) or `h` (diffuse, specular) as a function of `t, μ, n`, with `x` the wall position.
    pub boundary: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataSpec {
    Preset(String),
    Inline(InlineData),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureRule {
    GaussLegendre,
    /// Gauss panels graded toward grazing directions.
    Composite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub cells: usize,
    /// Boundary-layer width in units of `ε`; zero for a uniform grid.
    pub layer_width: f64,
    pub layer_cells: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig {
    pub rule: QuadratureRule,
    pub nodes: usize,
    /// Panel breaks in `(0, 1)` for the composite rule.
    pub breaks: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeConfig {
    /// `Δt = step_factor · ε · h_bulk`.
    pub step_factor: f64,
    pub scheme: SpatialScheme,
    /// Approximate number of recorded levels after the dense start.
    pub records: usize,
    /// Levels before `dense_until · ε²` are all recorded.
    pub dense_until: f64,
    pub tolerance: f64,
}

/// Validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data: DataSpec,
    pub epsilons: Vec<f64>,
    pub t_final: f64,
    pub seed: u64,
    pub perturbation: f64,
    pub jobs: usize,
    pub output: Option<PathBuf>,
    pub checks: Vec<CheckName>,
    pub grid: GridConfig,
    pub quadrature: QuadratureConfig,
    pub time: TimeConfig,
}

impl ExperimentConfig {
    /// Defaults around a preset and an `ε` list, without validation.
    pub fn for_preset(name: &str, epsilons: Vec<f64>) -> Self {
        let checks = find_preset(name).map(|p| p.default_checks.to_vec()).unwrap_or_default();
        Self {
            data: DataSpec::Preset(name.to_string()),
            epsilons,
            t_final: 0.5,
            seed: 0,
            perturbation: 0.0,
            jobs: 1,
            output: None,
            checks,
            grid: GridConfig { cells: 200, layer_width: 4.0, layer_cells: 20, ratio: 1.15 },
            quadrature: QuadratureConfig { rule: QuadratureRule::Composite, nodes: 16, breaks: vec![0.025, 0.1, 0.4] },
            time: TimeConfig {
                step_factor: 1.0,
                scheme: SpatialScheme::Minmod,
                records: 200,
                dense_until: 20.0,
                tolerance: 1e-12,
            },
        }
    }

    pub fn kind(&self) -> Option<BoundaryKind> {
        match &self.data {
            DataSpec::Preset(n) => find_preset(n).map(|p| p.kind),
            DataSpec::Inline(d) => Some(d.kind),
        }
    }

    /// Every violated rule, in a fixed order.
    pub fn validate(&self) -> Vec<String> {
        let mut e = Vec::new();
        let eps = &self.epsilons;
        if eps.len() < 3 {
            e.push(format!("epsilons: rate fitting needs at least 3 entries, got {}", eps.len()));
        }
        if let Some(v) = eps.iter().find(|v| !(**v > 0.0 && **v <= 0.5)) {
            e.push(format!("epsilons: every value must lie in (0, 0.5], got {v}"));
        }
        if eps.windows(2).any(|p| p[1] >= p[0]) {
            e.push("epsilons: the list must be strictly decreasing".into());
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            e.push(format!("t_final must be positive, got {}", self.t_final));
        }
        if !self.perturbation.is_finite() {
            e.push("perturbation must be finite".into());
        }
        if self.jobs == 0 {
            e.push("jobs must be at least 1".into());
        }
        if let DataSpec::Preset(n) = &self.data {
            if find_preset(n).is_none() {
                e.push(format!("unknown preset `{n}`"));
            }
        }
        let g = &self.grid;
        if g.cells < 4 {
            e.push(format!("grid.cells must be at least 4, got {}", g.cells));
        }
        if g.layer_width < 0.0 || !(g.ratio >= 1.0) || (g.layer_width > 0.0 && g.layer_cells == 0) {
            e.push("grid: layer_width >= 0, ratio >= 1 and layer_cells > 0 are required".into());
        }
        let q = &self.quadrature;
        if q.nodes < 2 || q.nodes % 2 != 0 {
            e.push(format!("quadrature.nodes must be even and >= 2, got {}", q.nodes));
        } else if q.rule == QuadratureRule::Composite && q.nodes % (2 * (q.breaks.len() + 1)) != 0 {
            e.push(format!(
                "quadrature.nodes = {} does not split evenly over {} mirrored panels",
                q.nodes,
                q.breaks.len() + 1
            ));
        }
        let t = &self.time;
        if !(t.step_factor > 0.0) || t.records == 0 || !(t.dense_until >= 0.0) || !(t.tolerance > 0.0) {
            e.push("time: step_factor > 0, records > 0, dense_until >= 0 and tolerance > 0 are required".into());
        }
        if let Some(kind) = self.kind() {
            if self.checks.contains(&CheckName::NullFlux) && kind == BoundaryKind::InFlow {
                e.push("check `null-flux` applies to diffuse and specular walls only".into());
            }
        }
        e
    }
}

#[derive(Debug, Deserialize)]
struct RawData {
    kind: String,
    initial: String,
    boundary: String,
}

#[derive(Debug, Default, Deserialize)]
struct RawGrid {
    cells: Option<usize>,
    layer_width: Option<f64>,
    layer_cells: Option<usize>,
    ratio: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
struct RawQuadrature {
    rule: Option<String>,
    nodes: Option<usize>,
    breaks: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
struct RawTime {
    step_factor: Option<f64>,
    scheme: Option<String>,
    records: Option<usize>,
    dense_until: Option<f64>,
    tolerance: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct RawConfig {
    preset: Option<String>,
    data: Option<RawData>,
    epsilons: Vec<f64>,
    t_final: Option<f64>,
    seed: Option<u64>,
    perturbation: Option<f64>,
    jobs: Option<usize>,
    output: Option<PathBuf>,
    checks: Option<Vec<String>>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    quadrature: RawQuadrature,
    #[serde(default)]
    time: RawTime,
}

/// A validated configuration and the keys that were ignored.
#[derive(Debug, Clone)]
pub struct ParsedConfig {
    pub config: ExperimentConfig,
    pub ignored_keys: Vec<String>,
}

fn parse_kind(s: &str) -> Option<BoundaryKind> {
    match s {
        "inflow" | "in-flow" => Some(BoundaryKind::InFlow),
        "diffuse" => Some(BoundaryKind::Diffuse),
        "specular" => Some(BoundaryKind::Specular),
        _ => None,
    }
}

/// Parses TOML text. In strict mode unknown keys are errors; otherwise they
/// are returned in [`ParsedConfig::ignored_keys`].
pub fn parse_config_str(text: &str, strict: bool) -> Result<ParsedConfig> {
    let mut ignored = Vec::new();
    let de = toml::Deserializer::parse(text).map_err(|e| HarnessError::Config(vec![e.to_string()]))?;
    let raw: RawConfig = serde_ignored::deserialize(de, |path| ignored.push(path.to_string()))
        .map_err(|e| HarnessError::Config(vec![e.to_string()]))?;
    let mut errors: Vec<String> = Vec::new();
    if strict {
        errors.extend(ignored.iter().map(|k| format!("unknown key `{k}`")));
    }
    let data = match (raw.preset, raw.data) {
        (Some(p), None) => Some(DataSpec::Preset(p)),
        (None, Some(d)) => match parse_kind(&d.kind) {
            Some(kind) => Some(DataSpec::Inline(InlineData { kind, initial: d.initial, boundary: d.boundary })),
            None => {
                errors.push(format!("data.kind must be inflow, diffuse or specular, got `{}`", d.kind));
                None
            }
        },
        (Some(_), Some(_)) => {
            errors.push("give either `preset` or a `[data]` table, not both".into());
            None
        }
        (None, None) => {
            errors.push("a `preset` or a `[data]` table is required".into());
            None
        }
    };
    let mut cfg = ExperimentConfig::for_preset("", raw.epsilons);
    if let Some(d) = data {
        if let DataSpec::Preset(name) = &d {
            if let Some(p) = find_preset(name) {
                cfg.checks = p.default_checks.to_vec();
            }
        }
        cfg.data = d;
    }
    if let Some(v) = raw.t_final {
        cfg.t_final = v;
    }
    cfg.seed = raw.seed.unwrap_or(cfg.seed);
    cfg.perturbation = raw.perturbation.unwrap_or(cfg.perturbation);
    cfg.jobs = raw.jobs.unwrap_or(cfg.jobs);
    cfg.output = raw.output;
    if let Some(list) = raw.checks {
        cfg.checks.clear();
        for c in list {
            match CheckName::parse(&c) {
                Some(n) => cfg.checks.push(n),
                None => errors.push(format!(
                    "unknown check `{c}` (known: {})",
                    CheckName::ALL.map(|c| c.as_str()).join(", ")
                )),
            }
        }
    }
    let g = raw.grid;
    cfg.grid.cells = g.cells.unwrap_or(cfg.grid.cells);
    cfg.grid.layer_width = g.layer_width.unwrap_or(cfg.grid.layer_width);
    cfg.grid.layer_cells = g.layer_cells.unwrap_or(cfg.grid.layer_cells);
    cfg.grid.ratio = g.ratio.unwrap_or(cfg.grid.ratio);
    let q = raw.quadrature;
    if let Some(r) = q.rule {
        match r.as_str() {
            "gauss-legendre" => cfg.quadrature.rule = QuadratureRule::GaussLegendre,
            "composite" => cfg.quadrature.rule = QuadratureRule::Composite,
            other => errors.push(format!("quadrature.rule must be gauss-legendre or composite, got `{other}`")),
        }
    }
    cfg.quadrature.nodes = q.nodes.unwrap_or(cfg.quadrature.nodes);
    if let Some(b) = q.breaks {
        cfg.quadrature.breaks = b;
    }
    let t = raw.time;
    cfg.time.step_factor = t.step_factor.unwrap_or(cfg.time.step_factor);
    if let Some(s) = t.scheme {
        match s.as_str() {
            "upwind" => cfg.time.scheme = SpatialScheme::Upwind,
            "minmod" => cfg.time.scheme = SpatialScheme::Minmod,
            other => errors.push(format!("time.scheme must be upwind or minmod, got `{other}`")),
        }
    }
    cfg.time.records = t.records.unwrap_or(cfg.time.records);
    cfg.time.dense_until = t.dense_until.unwrap_or(cfg.time.dense_until);
    cfg.time.tolerance = t.tolerance.unwrap_or(cfg.time.tolerance);
    errors.extend(cfg.validate());
    if errors.is_empty() {
        Ok(ParsedConfig { config: cfg, ignored_keys: ignored })
    } else {
        Err(HarnessError::Config(errors))
    }
}

pub fn parse_config(path: &Path, strict: bool) -> Result<ParsedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text, strict)
}
