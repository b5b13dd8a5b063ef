//! Experiment configuration (TOML).
//!
//! ```toml
//! version = 1
//!
//! [network]
//! a = [0.1, 0.25, 0.5]          # uniform self-weight sweep
//! # nodes = 4                   # explicit topology, one-based edges
//! # edges = [[1, 2], [2, 3], [3, 4]]
//! # self_weights = [0.5, 0.5, 0.5, 0.5]
//!
//! [model]
//! kind = "gaussian"             # or "exponential"
//! rho = 1.0                     # lambda_e = [3.0, 5.0] for exponential
//!
//! [dynamics]
//! mu = 0.1
//! n_iters = 100
//! trials = 10000
//! seed = 1
//!
//! [analysis]
//! order = "second"
//!
//! [output]
//! dir = "out"
//! nodes = [3, 9]
//!
//! [adapt]
//! schedule = [{ start = 1, h = 0 }, { start = 1001, h = 1 }, { start = 2001, h = 0 }]
//! ```
//!
//! Node labels in the file are one-based. Every validation error carries the
//! line of the offending key.

use std::fmt;
use std::ops::Range;
use std::path::PathBuf;

use onebit_core::continuous::{SeriesMode, SeriesSettings};
use onebit_core::discrete::{ApproxOrder, DiscreteOptions};
use onebit_core::network::{build_uniform_matrix, build_uniform_matrix_with, reference_network};
use onebit_core::sim::{Schedule, Scheme, Segment};
use onebit_core::steady::{AnalysisOptions, ModeThresholds};
use onebit_core::{Hypothesis, Model, NetworkSpec, Topology};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use toml::Spanned;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    version: Spanned<u32>,
    #[serde(default)]
    network: RawNetwork,
    model: RawModel,
    #[serde(default)]
    dynamics: RawDynamics,
    #[serde(default)]
    analysis: RawAnalysis,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    adapt: RawAdapt,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    nodes: Option<Spanned<usize>>,
    edges: Option<Spanned<Vec<(usize, usize)>>>,
    a: Option<Spanned<OneOrMany>>,
    self_weights: Option<Spanned<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: Spanned<String>,
    rho: Option<Spanned<OneOrMany>>,
    lambda_e: Option<Spanned<OneOrMany>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDynamics {
    mu: Option<Spanned<f64>>,
    n_iters: Option<Spanned<usize>>,
    trials: Option<Spanned<usize>>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    eps_prime: Option<Spanned<f64>>,
    eps_dprime: Option<Spanned<f64>>,
    eps_fraction: Option<Spanned<f64>>,
    eps_absolute: Option<Spanned<f64>>,
    order: Option<Spanned<String>>,
    series: Option<Spanned<String>>,
    mode_eta: Option<Spanned<f64>>,
    mode_a: Option<Spanned<f64>>,
    table_points: Option<Spanned<usize>>,
    gamma_points: Option<Spanned<usize>>,
    gamma_values: Option<Spanned<Vec<f64>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    nodes: Option<Spanned<Vec<usize>>>,
    artifacts: Option<Spanned<Vec<String>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAdapt {
    schedule: Option<Spanned<Vec<RawSegment>>>,
    n_iters: Option<Spanned<usize>>,
    trials: Option<Spanned<usize>>,
    fraction: Option<Spanned<f64>>,
    schemes: Option<Spanned<Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    start: usize,
    h: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Gaussian,
    Exponential,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Gaussian => "gaussian",
            ModelKind::Exponential => "exponential",
        }
    }

    pub fn build(self, param: f64) -> onebit_core::Result<Model> {
        match self {
            ModelKind::Gaussian => Model::gaussian(param),
            ModelKind::Exponential => Model::exponential(param),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Artifact {
    Analytical,
    Empirical,
    Ks,
}

/// Combination weights: one uniform matrix per `a`, or one explicit
/// per-node vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    Uniform(Vec<f64>),
    PerNode(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct AdaptSpec {
    pub schedule: Schedule,
    pub n_iters: usize,
    pub trials: usize,
    pub fraction: f64,
    pub schemes: Vec<Scheme>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub topology: Topology,
    pub weights: Weights,
    pub model_kind: ModelKind,
    pub model_params: Vec<f64>,
    pub mu: f64,
    pub n_iters: usize,
    pub trials: usize,
    pub seed: u64,
    pub analysis: AnalysisOptions,
    pub gamma_points: usize,
    pub gamma_values: Option<Vec<f64>>,
    pub out_dir: PathBuf,
    /// Zero-based.
    pub nodes: Vec<usize>,
    pub artifacts: Vec<Artifact>,
    pub adapt: AdaptSpec,
    /// Hex SHA-256 of the configuration text.
    pub sha256: String,
}

/// One network of a sweep; `a` is the swept self-weight, if any.
#[derive(Debug, Clone)]
pub struct NetworkCase {
    pub a: Option<f64>,
    pub network: NetworkSpec,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError {
            line: e.span().map(|s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        Resolver { text }.resolve(raw, sha256_hex(text.as_bytes()))
    }

    pub fn networks(&self) -> onebit_core::Result<Vec<NetworkCase>> {
        match &self.weights {
            Weights::Uniform(values) => values
                .iter()
                .map(|&a| {
                    Ok(NetworkCase {
                        a: Some(a),
                        network: build_uniform_matrix_with(&self.topology, a)?,
                    })
                })
                .collect(),
            Weights::PerNode(w) => Ok(vec![NetworkCase {
                a: None,
                network: build_uniform_matrix(&self.topology, w)?,
            }]),
        }
    }

    pub fn models(&self) -> onebit_core::Result<Vec<(f64, Model)>> {
        self.model_params.iter().map(|&p| Ok((p, self.model_kind.build(p)?))).collect()
    }

    pub fn wants(&self, artifact: Artifact) -> bool {
        self.artifacts.contains(&artifact)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

struct Resolver<'a> {
    text: &'a str,
}

impl Resolver<'_> {
    fn err(&self, span: Range<usize>, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: Some(line_of(self.text, span.start)),
            message: message.into(),
        }
    }

    fn check<T: Copy>(&self, v: &Spanned<T>, ok: impl Fn(T) -> bool, what: &str) -> Result<T, ConfigError> {
        let x = *v.get_ref();
        if ok(x) {
            Ok(x)
        } else {
            Err(self.err(v.span(), what.to_string()))
        }
    }

    fn resolve(&self, raw: RawConfig, sha256: String) -> Result<ExperimentConfig, ConfigError> {
        if *raw.version.get_ref() != CONFIG_VERSION {
            return Err(self.err(
                raw.version.span(),
                format!("unsupported version {} (expected {CONFIG_VERSION})", raw.version.get_ref()),
            ));
        }
        let topology = self.topology(&raw.network)?;
        let weights = self.weights(&raw.network, topology.size())?;
        let (model_kind, model_params) = self.model(&raw.model)?;

        let d = &raw.dynamics;
        let mu = match &d.mu {
            Some(v) => self.check(v, |x| x > 0.0 && x < 1.0, "mu must lie in (0, 1)")?,
            None => 0.1,
        };
        let n_iters = self.positive(&d.n_iters, 100, "n_iters")?;
        let trials = self.positive(&d.trials, 10_000, "trials")?;

        let (analysis, gamma_points, gamma_values) = self.analysis(&raw.analysis)?;

        let o = &raw.output;
        let nodes = match &o.nodes {
            Some(v) => {
                let mut out = Vec::new();
                for &label in v.get_ref() {
                    if label == 0 || label > topology.size() {
                        return Err(self.err(
                            v.span(),
                            format!("node {label} does not exist (labels are 1..={})", topology.size()),
                        ));
                    }
                    out.push(label - 1);
                }
                out
            }
            None if topology.size() == 10 => vec![2, 8],
            None => (0..topology.size()).collect(),
        };
        let artifacts = match &o.artifacts {
            Some(v) => v
                .get_ref()
                .iter()
                .map(|s| match s.as_str() {
                    "analytical" => Ok(Artifact::Analytical),
                    "empirical" => Ok(Artifact::Empirical),
                    "ks" => Ok(Artifact::Ks),
                    other => Err(self.err(v.span(), format!("unknown artifact {other:?}"))),
                })
                .collect::<Result<_, _>>()?,
            None => vec![Artifact::Analytical, Artifact::Empirical, Artifact::Ks],
        };

        Ok(ExperimentConfig {
            topology,
            weights,
            model_kind,
            model_params,
            mu,
            n_iters,
            trials,
            seed: d.seed.unwrap_or(1),
            analysis,
            gamma_points,
            gamma_values,
            out_dir: PathBuf::from(o.dir.clone().unwrap_or_else(|| "out".into())),
            nodes,
            artifacts,
            adapt: self.adapt(&raw.adapt)?,
            sha256,
        })
    }

    fn positive(&self, v: &Option<Spanned<usize>>, default: usize, name: &str) -> Result<usize, ConfigError> {
        match v {
            Some(v) => self.check(v, |x| x > 0, &format!("{name} must be positive")),
            None => Ok(default),
        }
    }

    fn topology(&self, n: &RawNetwork) -> Result<Topology, ConfigError> {
        let Some(edges) = &n.edges else {
            if let Some(nodes) = &n.nodes {
                return Err(self.err(nodes.span(), "nodes given without edges"));
            }
            return Ok(reference_network());
        };
        let Some(size) = &n.nodes else {
            return Err(self.err(edges.span(), "edges require `nodes`"));
        };
        let size = self.check(size, |x| x > 0, "nodes must be positive")?;
        let mut zero_based = Vec::new();
        for &(a, b) in edges.get_ref() {
            if a == 0 || b == 0 || a > size || b > size {
                return Err(self.err(edges.span(), format!("edge [{a}, {b}] outside 1..={size}")));
            }
            zero_based.push((a - 1, b - 1));
        }
        let topo = Topology::from_edges(size, &zero_based).map_err(|e| self.err(edges.span(), e.to_string()))?;
        if !topo.is_connected() {
            return Err(self.err(edges.span(), "network is not connected"));
        }
        Ok(topo)
    }

    fn weights(&self, n: &RawNetwork, size: usize) -> Result<Weights, ConfigError> {
        let in_range = |x: f64| x > 0.0 && x <= 1.0;
        if let Some(w) = &n.self_weights {
            if n.a.is_some() {
                return Err(self.err(w.span(), "give either `a` or `self_weights`, not both"));
            }
            if w.get_ref().len() != size {
                return Err(self.err(w.span(), format!("expected {size} self-weights, got {}", w.get_ref().len())));
            }
            if !w.get_ref().iter().all(|&x| in_range(x)) {
                return Err(self.err(w.span(), "self-weights must lie in (0, 1]"));
            }
            return Ok(Weights::PerNode(w.get_ref().clone()));
        }
        match &n.a {
            Some(a) => {
                let values = a.get_ref().values();
                if values.is_empty() || !values.iter().all(|&x| in_range(x)) {
                    return Err(self.err(a.span(), "`a` values must be non-empty and lie in (0, 1]"));
                }
                Ok(Weights::Uniform(values))
            }
            None => Ok(Weights::Uniform(vec![0.25])),
        }
    }

    fn model(&self, m: &RawModel) -> Result<(ModelKind, Vec<f64>), ConfigError> {
        let (kind, param, name, ok): (_, _, _, fn(f64) -> bool) = match m.kind.get_ref().as_str() {
            "gaussian" => (ModelKind::Gaussian, &m.rho, "rho", |x| x > 0.0 && x.is_finite()),
            "exponential" => (ModelKind::Exponential, &m.lambda_e, "lambda_e", |x| x > 1.0 && x.is_finite()),
            other => {
                return Err(self.err(
                    m.kind.span(),
                    format!("unknown model kind {other:?} (expected \"gaussian\" or \"exponential\")"),
                ))
            }
        };
        let Some(param) = param else {
            return Err(self.err(m.kind.span(), format!("{} model needs `{name}`", kind.name())));
        };
        let values = param.get_ref().values();
        if values.is_empty() || !values.iter().all(|&x| ok(x)) {
            return Err(self.err(param.span(), format!("invalid `{name}` values {values:?}")));
        }
        Ok((kind, values))
    }

    fn analysis(&self, a: &RawAnalysis) -> Result<(AnalysisOptions, usize, Option<Vec<f64>>), ConfigError> {
        let prob = |v: &Option<Spanned<f64>>, default: f64, name: &str| match v {
            Some(v) => self.check(v, |x| x > 0.0 && x < 1.0, &format!("{name} must lie in (0, 1)")),
            None => Ok(default),
        };
        let mut series = SeriesSettings::default();
        series.eps_prime = prob(&a.eps_prime, series.eps_prime, "eps_prime")?;
        series.eps_dprime = prob(&a.eps_dprime, series.eps_dprime, "eps_dprime")?;
        if let Some(s) = &a.series {
            series.mode = match s.get_ref().as_str() {
                "completed" => SeriesMode::Completed,
                "truncated" => SeriesMode::Truncated,
                other => return Err(self.err(s.span(), format!("unknown series mode {other:?}"))),
            };
        }
        let mut discrete = DiscreteOptions::default();
        if let Some(v) = &a.eps_fraction {
            discrete.eps_fraction = self.check(v, |x| x > 0.0, "eps_fraction must be positive")?;
        }
        if let Some(v) = &a.eps_absolute {
            discrete.eps_absolute = Some(self.check(v, |x| x > 0.0, "eps_absolute must be positive")?);
        }
        if let Some(o) = &a.order {
            discrete.order = match o.get_ref().as_str() {
                "first" => ApproxOrder::First,
                "second" => ApproxOrder::Second,
                other => return Err(self.err(o.span(), format!("unknown approximation order {other:?}"))),
            };
        }
        let defaults = ModeThresholds::default();
        let thresholds = ModeThresholds {
            eta: prob(&a.mode_eta, defaults.eta, "mode_eta")?,
            a: prob(&a.mode_a, defaults.a, "mode_a")?,
        };
        let table_points = match &a.table_points {
            Some(v) => Some(self.check(v, |x| x >= 2, "table_points must be at least 2")?),
            None => None,
        };
        let gamma_points = match &a.gamma_points {
            Some(v) => self.check(v, |x| x >= 2, "gamma_points must be at least 2")?,
            None => 400,
        };
        let gamma_values = match &a.gamma_values {
            Some(v) if v.get_ref().is_empty() || !v.get_ref().iter().all(|x| x.is_finite()) => {
                return Err(self.err(v.span(), "gamma_values must be a non-empty list of numbers"))
            }
            Some(v) => {
                let mut g = v.get_ref().clone();
                g.sort_by(f64::total_cmp);
                g.dedup();
                Some(g)
            }
            None => None,
        };
        Ok((
            AnalysisOptions {
                series,
                discrete,
                thresholds,
                table_points,
            },
            gamma_points,
            gamma_values,
        ))
    }

    fn adapt(&self, a: &RawAdapt) -> Result<AdaptSpec, ConfigError> {
        let n_iters = self.positive(&a.n_iters, 3000, "adapt.n_iters")?;
        let schedule = match &a.schedule {
            Some(s) => {
                let mut segments = Vec::new();
                for seg in s.get_ref() {
                    let h = match seg.h {
                        0 => Hypothesis::H0,
                        1 => Hypothesis::H1,
                        other => return Err(self.err(s.span(), format!("hypothesis {other} is not 0 or 1"))),
                    };
                    if seg.start > n_iters {
                        return Err(self.err(s.span(), format!("segment start {} beyond n_iters {n_iters}", seg.start)));
                    }
                    segments.push(Segment { start: seg.start, h });
                }
                Schedule::new(segments).map_err(|e| self.err(s.span(), e.to_string()))?
            }
            None => Schedule::new(vec![
                Segment {
                    start: 1,
                    h: Hypothesis::H0,
                },
                Segment {
                    start: 1001,
                    h: Hypothesis::H1,
                },
                Segment {
                    start: 2001,
                    h: Hypothesis::H0,
                },
            ])
            .expect("default schedule is valid"),
        };
        let fraction = match &a.fraction {
            Some(v) => self.check(v, |x| x > 0.0 && x < 1.0, "fraction must lie in (0, 1)")?,
            None => 0.9,
        };
        let schemes = match &a.schemes {
            Some(v) => v
                .get_ref()
                .iter()
                .map(|s| {
                    Scheme::ALL
                        .into_iter()
                        .find(|k| k.name() == s)
                        .ok_or_else(|| self.err(v.span(), format!("unknown scheme {s:?}")))
                })
                .collect::<Result<_, _>>()?,
            None => Scheme::ALL.to_vec(),
        };
        Ok(AdaptSpec {
            schedule,
            n_iters,
            trials: self.positive(&a.trials, 100, "adapt.trials")?,
            fraction,
            schemes,
        })
    }
}
