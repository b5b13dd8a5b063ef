//! Monte Carlo engine for the three diffusion schemes.
//!
//! Each trial owns a ChaCha8 stream selected by `(seed, trial)`; within a
//! trial the statistics are drawn time-major, node-minor. Results therefore
//! do not depend on how trials are scheduled.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Hypothesis, ObservationModel};
use crate::network::NetworkSpec;
use crate::stats::EmpiricalCdf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Neighbors exchange one-bit decisions on their fresh statistics.
    OneBit,
    /// Neighbors exchange one-bit quantized intermediate states.
    QuantizedState,
    /// Neighbors exchange full-precision intermediate states.
    Unquantized,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::OneBit, Scheme::QuantizedState, Scheme::Unquantized];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::OneBit => "one_bit_x",
            Scheme::QuantizedState => "quantized_state",
            Scheme::Unquantized => "unquantized",
        }
    }
}

/// Hypothesis in force from time `start` (1-based) onwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub h: Hypothesis,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    segments: Vec<Segment>,
}

impl Schedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidArgument("schedule has no segments".into()));
        }
        if segments[0].start != 1 {
            return Err(Error::InvalidArgument("first schedule segment must start at time 1".into()));
        }
        if segments.windows(2).any(|w| w[1].start <= w[0].start) {
            return Err(Error::InvalidArgument("schedule segments must be strictly ordered".into()));
        }
        Ok(Self { segments })
    }

    pub fn constant(h: Hypothesis) -> Self {
        Self {
            segments: vec![Segment { start: 1, h }],
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Hypothesis at time `n >= 1`.
    pub fn at(&self, n: usize) -> Hypothesis {
        let i = self.segments.partition_point(|s| s.start <= n);
        self.segments[i.max(1) - 1].h
    }
}

/// Message quantizer: `E_1 x` at or above the threshold, `E_0 x` below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantizer {
    pub threshold: f64,
    pub low: f64,
    pub high: f64,
}

impl Quantizer {
    pub fn from_model<M: ObservationModel + ?Sized>(model: &M) -> Self {
        Self {
            threshold: model.local_threshold(),
            low: model.mean(Hypothesis::H0),
            high: model.mean(Hypothesis::H1),
        }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        if x >= self.threshold {
            self.high
        } else {
            self.low
        }
    }
}

/// Sparse view of the combination matrix.
#[derive(Debug, Clone)]
struct Rows {
    diag: Vec<f64>,
    off: Vec<Vec<(usize, f64)>>,
}

impl Rows {
    fn new(network: &NetworkSpec) -> Self {
        let s = network.size();
        let diag = (0..s).map(|k| network.self_weight(k)).collect();
        let off = (0..s)
            .map(|k| {
                network
                    .neighborhood(k)
                    .iter()
                    .filter(|&&l| l != k)
                    .map(|&l| (l, network.weight(k, l)))
                    .filter(|&(_, w)| w > 0.0)
                    .collect()
            })
            .collect();
        Self { diag, off }
    }
}

/// Reusable stepping kernel for one network and quantizer.
#[derive(Debug, Clone)]
pub struct Stepper {
    rows: Rows,
    mu: f64,
    quantizer: Quantizer,
    v: Vec<f64>,
    msg: Vec<f64>,
}

impl Stepper {
    pub fn new(network: &NetworkSpec, mu: f64, quantizer: Quantizer) -> Self {
        let s = network.size();
        Self {
            rows: Rows::new(network),
            mu,
            quantizer,
            v: vec![0.0; s],
            msg: vec![0.0; s],
        }
    }

    /// Advances `y` in place by one step of `scheme` with fresh statistics `x`.
    pub fn step(&mut self, scheme: Scheme, y: &mut [f64], x: &[f64]) {
        let mu = self.mu;
        for k in 0..y.len() {
            self.v[k] = y[k] + mu * (x[k] - y[k]);
        }
        match scheme {
            Scheme::OneBit => {
                for (m, &xk) in self.msg.iter_mut().zip(x) {
                    *m = self.quantizer.apply(xk);
                }
            }
            Scheme::QuantizedState => {
                for (m, &vk) in self.msg.iter_mut().zip(&self.v) {
                    *m = self.quantizer.apply(vk);
                }
            }
            Scheme::Unquantized => self.msg.copy_from_slice(&self.v),
        }
        for (k, yk) in y.iter_mut().enumerate() {
            let mut acc = self.rows.diag[k] * self.v[k];
            for &(l, w) in &self.rows.off[k] {
                acc += w * self.msg[l];
            }
            *yk = acc;
        }
    }
}

/// One step of the one-bit scheme.
pub fn step_one_bit<M: ObservationModel + ?Sized>(y: &[f64], x: &[f64], network: &NetworkSpec, mu: f64, model: &M) -> Vec<f64> {
    step_with(Scheme::OneBit, y, x, network, mu, Quantizer::from_model(model))
}

/// One step of the full-precision baseline.
pub fn step_unquantized(y: &[f64], x: &[f64], network: &NetworkSpec, mu: f64) -> Vec<f64> {
    let q = Quantizer {
        threshold: 0.0,
        low: 0.0,
        high: 0.0,
    };
    step_with(Scheme::Unquantized, y, x, network, mu, q)
}

/// One step of the quantized-state baseline.
pub fn step_quantized_state<M: ObservationModel + ?Sized>(y: &[f64], x: &[f64], network: &NetworkSpec, mu: f64, model: &M) -> Vec<f64> {
    step_with(Scheme::QuantizedState, y, x, network, mu, Quantizer::from_model(model))
}

fn step_with(scheme: Scheme, y: &[f64], x: &[f64], network: &NetworkSpec, mu: f64, q: Quantizer) -> Vec<f64> {
    let mut out = y.to_vec();
    Stepper::new(network, mu, q).step(scheme, &mut out, x);
    out
}

/// Runs `scheme` from `y(0) = initial` over the given statistics
/// (`draws[n-1]` holds `x(n)`) and returns `y(n)` for the last step.
pub fn run_on_draws<M: ObservationModel + ?Sized>(
    network: &NetworkSpec,
    model: &M,
    mu: f64,
    scheme: Scheme,
    initial: &[f64],
    draws: &[Vec<f64>],
) -> Vec<f64> {
    let mut stepper = Stepper::new(network, mu, Quantizer::from_model(model));
    let mut y = initial.to_vec();
    for x in draws {
        stepper.step(scheme, &mut y, x);
    }
    y
}

#[derive(Debug, Clone)]
pub struct SimConfig<M> {
    pub network: NetworkSpec,
    pub model: M,
    pub mu: f64,
    pub n_iters: usize,
    pub trials: usize,
    pub scheme: Scheme,
    pub schedule: Schedule,
    pub seed: u64,
    /// Nodes whose mean trajectory is recorded.
    pub track: Vec<usize>,
    /// Common initial state of every node.
    pub initial_state: f64,
}

impl<M: ObservationModel> SimConfig<M> {
    /// Static hypothesis, no trajectories, `y(0) = 0`.
    pub fn new(network: NetworkSpec, model: M, mu: f64, n_iters: usize, trials: usize, h: Hypothesis, seed: u64) -> Self {
        Self {
            network,
            model,
            mu,
            n_iters,
            trials,
            scheme: Scheme::OneBit,
            schedule: Schedule::constant(h),
            seed,
            track: Vec::new(),
            initial_state: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_iters == 0 || self.trials == 0 {
            return Err(Error::InvalidArgument("n_iters and trials must be positive".into()));
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::InvalidArgument(format!("step size mu = {} outside (0, 1)", self.mu)));
        }
        if let Some(&k) = self.track.iter().find(|&&k| k >= self.network.size()) {
            return Err(Error::InvalidArgument(format!("tracked node {k} does not exist")));
        }
        Ok(())
    }
}

/// Terminal states and optional per-time trajectories of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub terminal: Vec<f64>,
    /// `trajectories[j][n-1]` is `y_{track[j]}(n)`.
    pub trajectories: Vec<Vec<f64>>,
}

/// Random stream of trial `trial` under master `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs a single trial.
pub fn run_trial<M: ObservationModel>(config: &SimConfig<M>, trial: usize) -> TrialRecord {
    let s = config.network.size();
    let mut rng = trial_rng(config.seed, trial as u64);
    let mut stepper = Stepper::new(&config.network, config.mu, Quantizer::from_model(&config.model));
    let mut y = vec![config.initial_state; s];
    let mut x = vec![0.0; s];
    let mut trajectories = vec![Vec::with_capacity(config.n_iters); config.track.len()];
    for n in 1..=config.n_iters {
        let h = config.schedule.at(n);
        for xk in x.iter_mut() {
            *xk = config.model.sample(h, &mut rng);
        }
        stepper.step(config.scheme, &mut y, &x);
        for (traj, &k) in trajectories.iter_mut().zip(&config.track) {
            traj.push(y[k]);
        }
    }
    TrialRecord { terminal: y, trajectories }
}

/// Monte Carlo record over all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialEnsemble {
    nodes: usize,
    trials: usize,
    /// Row-major `trials x nodes`.
    terminal: Vec<f64>,
    pub tracked: Vec<usize>,
    /// Per-time mean of `y_k(n)` for every tracked node.
    pub mean_trajectories: Vec<Vec<f64>>,
}

impl TrialEnsemble {
    /// Aggregates records given in trial order.
    pub fn from_records(nodes: usize, tracked: Vec<usize>, records: Vec<TrialRecord>) -> Result<Self> {
        let trials = records.len();
        if trials == 0 {
            return Err(Error::InvalidArgument("ensemble needs at least one trial".into()));
        }
        let mut terminal = Vec::with_capacity(trials * nodes);
        let len = records[0].trajectories.first().map_or(0, Vec::len);
        let mut sums = vec![vec![0.0; len]; tracked.len()];
        for r in &records {
            if r.terminal.len() != nodes || r.trajectories.len() != tracked.len() {
                return Err(Error::InvalidArgument("inconsistent trial record".into()));
            }
            terminal.extend_from_slice(&r.terminal);
            for (sum, traj) in sums.iter_mut().zip(&r.trajectories) {
                for (acc, v) in sum.iter_mut().zip(traj) {
                    *acc += v;
                }
            }
        }
        for sum in &mut sums {
            sum.iter_mut().for_each(|v| *v /= trials as f64);
        }
        Ok(Self {
            nodes,
            trials,
            terminal,
            tracked,
            mean_trajectories: sums,
        })
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn terminal(&self, trial: usize, k: usize) -> f64 {
        self.terminal[trial * self.nodes + k]
    }

    /// Terminal states of node `k` across trials.
    pub fn node_states(&self, k: usize) -> Vec<f64> {
        (0..self.trials).map(|t| self.terminal(t, k)).collect()
    }

    /// Mean trajectory of node `k`, if tracked.
    pub fn trajectory(&self, k: usize) -> Option<&[f64]> {
        self.tracked
            .iter()
            .position(|&t| t == k)
            .map(|i| self.mean_trajectories[i].as_slice())
    }
}

/// Sequential Monte Carlo run.
pub fn run<M: ObservationModel>(config: &SimConfig<M>) -> Result<TrialEnsemble> {
    config.validate()?;
    let records = (0..config.trials).map(|t| run_trial(config, t)).collect();
    TrialEnsemble::from_records(config.network.size(), config.track.clone(), records)
}

pub fn empirical_cdf(ensemble: &TrialEnsemble, k: usize) -> EmpiricalCdf {
    EmpiricalCdf::new(ensemble.node_states(k))
}

/// Default averaging window for the steady levels around a switch.
pub const REACTION_WINDOW: usize = 100;

/// Steps after `switch` (1-based, inclusive) until the mean trajectory has
/// covered `fraction` of the gap between the steady level before the switch
/// and the steady level reached before `end` (exclusive). A trace that jumps
/// at the switch itself reacts in one step.
pub fn reaction_time(trajectory: &[f64], switch: usize, end: usize, fraction: f64) -> Result<usize> {
    let end = end.min(trajectory.len() + 1);
    if switch < 2 || switch >= end {
        return Err(Error::InvalidArgument(format!("switch {switch} not inside the trace")));
    }
    let window = REACTION_WINDOW.min(switch - 1).min((end - switch) / 2).max(1);
    let avg = |from: usize, to: usize| -> f64 {
        // times from..to, 1-based, exclusive end
        trajectory[from - 1..to - 1].iter().sum::<f64>() / (to - from) as f64
    };
    let before = avg(switch - window, switch);
    let after = avg(end - window, end);
    let gap = after - before;
    if gap == 0.0 {
        return Err(Error::Unreached);
    }
    (switch..end)
        .find(|&n| (trajectory[n - 1] - before) / gap >= fraction)
        .map(|n| n - switch + 1)
        .ok_or(Error::Unreached)
}
