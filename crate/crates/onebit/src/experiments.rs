//! The `cdf`, `roc` and `adapt` experiments.

use std::path::{Path, PathBuf};

use onebit_core::detection::{gamma_grid, max_pd_gap_matched_gamma, roc, RocCurve, RocSource};
use onebit_core::sim::{empirical_cdf, reaction_time, Scheme, SimConfig};
use onebit_core::stats::EmpiricalCdf;
use onebit_core::steady::{Mode, SteadyStateCdf};
use onebit_core::{Hypothesis, Model, NetworkSpec};

use crate::config::{Artifact, ExperimentConfig};
use crate::output::{label, num, CsvSink};
use crate::runner::{derive_seed, run_parallel, AnalysisCache};
use crate::AppError;

/// Points of each analytical CDF curve.
const CURVE_POINTS: usize = 801;

fn h_name(h: Hypothesis) -> &'static str {
    match h {
        Hypothesis::H0 => "H0",
        Hypothesis::H1 => "H1",
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Mixture => "mixture",
        Mode::GaussianLimit => "gaussian_limit",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KsRow {
    pub model: &'static str,
    pub param: f64,
    pub a: f64,
    pub mu: f64,
    /// Zero-based.
    pub node: usize,
    pub h: Hypothesis,
    pub mode: Mode,
    pub trials: usize,
    pub ks: f64,
}

#[derive(Debug, Clone)]
pub struct CdfReport {
    pub rows: Vec<KsRow>,
    pub files: Vec<PathBuf>,
}

struct Sweep<'a> {
    cfg: &'a ExperimentConfig,
    seed: u64,
    tag: u64,
}

impl Sweep<'_> {
    fn next_seed(&mut self) -> u64 {
        self.tag += 1;
        derive_seed(self.seed, self.tag)
    }

    fn simulate(&mut self, network: &NetworkSpec, model: Model, h: Hypothesis) -> Result<onebit_core::sim::TrialEnsemble, AppError> {
        let cfg = self.cfg;
        let sim = SimConfig::new(network.clone(), model, cfg.mu, cfg.n_iters, cfg.trials, h, self.next_seed());
        Ok(run_parallel(&sim)?)
    }
}

/// Analytical and empirical steady-state CDFs with their KS distances.
pub fn cmd_cdf(cfg: &ExperimentConfig, seed: u64, out: &Path) -> Result<CdfReport, AppError> {
    let mut cache = AnalysisCache::new();
    let mut sweep = Sweep { cfg, seed, tag: 0 };
    let ident = ["model", "param", "a", "mu", "node", "h"];
    let header = |extra: &[&'static str]| -> Vec<&'static str> { ident.iter().chain(extra).copied().collect() };
    let mut analytical = cfg
        .wants(Artifact::Analytical)
        .then(|| CsvSink::create(&out.join("cdf_analytical.csv"), &cfg.sha256, seed, &header(&["mode", "y", "F"])))
        .transpose()?;
    let mut empirical = cfg
        .wants(Artifact::Empirical)
        .then(|| CsvSink::create(&out.join("cdf_empirical.csv"), &cfg.sha256, seed, &header(&["y", "F"])))
        .transpose()?;
    let mut rows = Vec::new();
    let name = cfg.model_kind.name();
    for (param, model) in cfg.models()? {
        for case in cfg.networks()? {
            let net = &case.network;
            for h in Hypothesis::BOTH {
                let ens = sweep.simulate(net, model, h)?;
                for &k in &cfg.nodes {
                    let cdf = cache.get(&model, net, k, cfg.mu, h, &cfg.analysis)?;
                    let emp = empirical_cdf(&ens, k);
                    let a = net.self_weight(k);
                    let id = [name.to_string(), num(param), num(a), num(cfg.mu), label(k), h_name(h).to_string()];
                    if let Some(sink) = analytical.as_mut() {
                        for (y, f) in curve(&cdf, &emp) {
                            sink.row(id.iter().cloned().chain([mode_name(cdf.mode()).into(), num(y), num(f)]))?;
                        }
                    }
                    if let Some(sink) = empirical.as_mut() {
                        let n = emp.len() as f64;
                        for (i, &y) in emp.sorted().iter().enumerate() {
                            sink.row(id.iter().cloned().chain([num(y), num((i + 1) as f64 / n)]))?;
                        }
                    }
                    rows.push(KsRow {
                        model: name,
                        param,
                        a,
                        mu: cfg.mu,
                        node: k,
                        h,
                        mode: cdf.mode(),
                        trials: cfg.trials,
                        ks: emp.ks_distance(|y| cdf.eval(y)),
                    });
                }
            }
        }
    }
    let mut files = Vec::new();
    files.extend(analytical.map(CsvSink::finish).transpose()?);
    files.extend(empirical.map(CsvSink::finish).transpose()?);
    if cfg.wants(Artifact::Ks) {
        let mut sink = CsvSink::create(&out.join("ks_summary.csv"), &cfg.sha256, seed, &header(&["mode", "trials", "ks"]))?;
        for r in &rows {
            sink.row([
                r.model.to_string(),
                num(r.param),
                num(r.a),
                num(r.mu),
                label(r.node),
                h_name(r.h).into(),
                mode_name(r.mode).into(),
                r.trials.to_string(),
                num(r.ks),
            ])?;
        }
        files.push(sink.finish()?);
    }
    Ok(CdfReport { rows, files })
}

/// Uniform grid over the analytical effective range widened to the sample.
fn curve(cdf: &SteadyStateCdf, emp: &EmpiricalCdf) -> Vec<(f64, f64)> {
    let (mut lo, mut hi) = cdf.effective_range();
    if let (Some(&first), Some(&last)) = (emp.sorted().first(), emp.sorted().last()) {
        lo = lo.min(first);
        hi = hi.max(last);
    }
    (0..CURVE_POINTS)
        .map(|i| {
            let y = lo + (hi - lo) * i as f64 / (CURVE_POINTS - 1) as f64;
            (y, cdf.eval(y))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocSummary {
    pub model: &'static str,
    pub param: f64,
    pub a: f64,
    pub mu: f64,
    pub node: usize,
    pub analytical: RocCurve,
    pub empirical: RocCurve,
    pub max_pd_gap: f64,
}

/// Analytical and empirical ROC curves on a shared threshold grid.
pub fn cmd_roc(cfg: &ExperimentConfig, seed: u64, out: &Path) -> Result<(Vec<RocSummary>, Vec<PathBuf>), AppError> {
    let mut cache = AnalysisCache::new();
    let mut sweep = Sweep { cfg, seed, tag: 1 << 32 };
    let mut summaries = Vec::new();
    let name = cfg.model_kind.name();
    for (param, model) in cfg.models()? {
        for case in cfg.networks()? {
            let net = &case.network;
            let e0 = sweep.simulate(net, model, Hypothesis::H0)?;
            let e1 = sweep.simulate(net, model, Hypothesis::H1)?;
            for &k in &cfg.nodes {
                let h0 = cache.get(&model, net, k, cfg.mu, Hypothesis::H0, &cfg.analysis)?;
                let h1 = cache.get(&model, net, k, cfg.mu, Hypothesis::H1, &cfg.analysis)?;
                let grid = match &cfg.gamma_values {
                    Some(g) => g.clone(),
                    None => gamma_grid(&h0, &h1, cfg.gamma_points, cfg.analysis.series.eps_prime),
                };
                let analytical = roc(&h0, &h1, &grid, k, RocSource::Analytical);
                let empirical = roc(&empirical_cdf(&e0, k), &empirical_cdf(&e1, k), &grid, k, RocSource::Empirical);
                summaries.push(RocSummary {
                    model: name,
                    param,
                    a: net.self_weight(k),
                    mu: cfg.mu,
                    node: k,
                    max_pd_gap: max_pd_gap_matched_gamma(&analytical, &empirical),
                    analytical,
                    empirical,
                });
            }
        }
    }
    let ident = ["model", "param", "a", "mu", "node"];
    let mut curves = CsvSink::create(
        &out.join("roc.csv"),
        &cfg.sha256,
        seed,
        &[&ident[..], &["source", "gamma", "Pf", "Pd"]].concat(),
    )?;
    let mut table = CsvSink::create(
        &out.join("roc_summary.csv"),
        &cfg.sha256,
        seed,
        &[&ident[..], &["points", "max_pd_gap"]].concat(),
    )?;
    for s in &summaries {
        let id = [s.model.to_string(), num(s.param), num(s.a), num(s.mu), label(s.node)];
        for c in [&s.analytical, &s.empirical] {
            for p in &c.points {
                curves.row(
                    id.iter()
                        .cloned()
                        .chain([c.source.name().into(), num(p.gamma), num(p.pf), num(p.pd)]),
                )?;
            }
        }
        table.row(id.iter().cloned().chain([s.analytical.points.len().to_string(), num(s.max_pd_gap)]))?;
    }
    Ok((summaries, vec![curves.finish()?, table.finish()?]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionRow {
    pub model: &'static str,
    pub param: f64,
    pub a: f64,
    pub scheme: Scheme,
    pub node: usize,
    /// One-based switch time.
    pub switch: usize,
    /// `None` when the trace never reaches the target level.
    pub steps: Option<usize>,
}

/// Mean trajectories of every scheme over the hypothesis schedule, with
/// reaction times at each switch.
pub fn cmd_adapt(cfg: &ExperimentConfig, seed: u64, out: &Path) -> Result<(Vec<ReactionRow>, Vec<PathBuf>), AppError> {
    let spec = &cfg.adapt;
    let mut traj = CsvSink::create(
        &out.join("adapt_trajectories.csv"),
        &cfg.sha256,
        seed,
        &["model", "param", "a", "mu", "scheme", "node", "n", "mean_y"],
    )?;
    let mut rows = Vec::new();
    let name = cfg.model_kind.name();
    let mut tag = 2u64 << 32;
    for (param, model) in cfg.models()? {
        for case in cfg.networks()? {
            let net = &case.network;
            for &scheme in &spec.schemes {
                tag += 1;
                let mut sim = SimConfig::new(
                    net.clone(),
                    model,
                    cfg.mu,
                    spec.n_iters,
                    spec.trials,
                    Hypothesis::H0,
                    derive_seed(seed, tag),
                );
                sim.scheme = scheme;
                sim.schedule = spec.schedule.clone();
                sim.track = cfg.nodes.clone();
                let ens = run_parallel(&sim)?;
                for &k in &cfg.nodes {
                    let a = net.self_weight(k);
                    let mean = ens.trajectory(k).expect("tracked node");
                    for (i, &y) in mean.iter().enumerate() {
                        traj.row([
                            name.to_string(),
                            num(param),
                            num(a),
                            num(cfg.mu),
                            scheme.name().into(),
                            label(k),
                            (i + 1).to_string(),
                            num(y),
                        ])?;
                    }
                    let segs = spec.schedule.segments();
                    for (i, seg) in segs.iter().enumerate().skip(1) {
                        let end = segs.get(i + 1).map_or(spec.n_iters + 1, |s| s.start);
                        rows.push(ReactionRow {
                            model: name,
                            param,
                            a,
                            scheme,
                            node: k,
                            switch: seg.start,
                            steps: reaction_time(mean, seg.start, end, spec.fraction).ok(),
                        });
                    }
                }
            }
        }
    }
    let mut table = CsvSink::create(
        &out.join("reaction_times.csv"),
        &cfg.sha256,
        seed,
        &["model", "param", "a", "scheme", "node", "switch", "reaction_time"],
    )?;
    for r in &rows {
        table.row([
            r.model.to_string(),
            num(r.param),
            num(r.a),
            r.scheme.name().into(),
            label(r.node),
            r.switch.to_string(),
            r.steps.map_or_else(|| "unreached".into(), |s| s.to_string()),
        ])?;
    }
    Ok((rows, vec![traj.finish()?, table.finish()?]))
}
