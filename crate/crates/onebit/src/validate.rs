//! Self-check suite behind the `validate` subcommand.
//!
//! Each check reports the measured statistic next to its tolerance. The
//! quick variant caps table enumeration at `omega <= 8`, runs `10^3` trials
//! and scales Monte Carlo tolerances by `sqrt(10)`.

use std::collections::BTreeMap;

use onebit_core::continuous::{cdf_u, cdf_u_gaussian_closed, moments, DEFAULT_EPS};
use onebit_core::detection::{gamma_grid, max_pd_gap_matched_gamma, min_dominance_margin, roc, RocCurve, RocSource};
use onebit_core::discrete::{table_rows, ApproxOrder, BernoulliApproxSpec};
use onebit_core::math::normal_cdf;
use onebit_core::network::{build_uniform_matrix, build_uniform_matrix_with, reference_network, HUB, LEAF};
use onebit_core::sim::{empirical_cdf, reaction_time, run_on_draws, Quantizer, Schedule, Scheme, Segment, SimConfig};
use onebit_core::stats::EmpiricalCdf;
use onebit_core::steady::{finite_moments_for, SteadyKind, SteadyStateCdf};
use onebit_core::{Hypothesis, Model, NetworkSpec, NodeParams, ObservationModel, Topology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::runner::{analyze_parallel, derive_seed, run_parallel};
use crate::AppError;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn at_most(name: &str, measured: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            passed: measured <= tolerance,
            measured,
            tolerance,
            detail,
        }
    }

    fn above(name: &str, measured: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            passed: measured > tolerance,
            measured,
            tolerance,
            detail,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {} measured={:.6e} tolerance={:.6e} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub quick: bool,
    pub seed: u64,
}

impl SuiteOptions {
    fn trials(&self) -> usize {
        if self.quick {
            1_000
        } else {
            10_000
        }
    }

    fn mc_scale(&self) -> f64 {
        if self.quick {
            10f64.sqrt()
        } else {
            1.0
        }
    }

    fn max_omega(&self) -> usize {
        if self.quick {
            8
        } else {
            12
        }
    }
}

const MU: f64 = 0.1;
const A_SWEEP: [f64; 3] = [0.1, 0.25, 0.5];

fn fig_models() -> Vec<Model> {
    vec![Model::gaussian(1.0).unwrap(), Model::exponential(5.0).unwrap()]
}

fn model_label(m: &Model) -> String {
    match m {
        Model::Gaussian(g) => format!("gaussian(rho={})", g.rho()),
        Model::Exponential(e) => format!("exponential(lambda_e={})", e.lambda_e()),
    }
}

pub fn run_suite(opts: &SuiteOptions) -> Result<Vec<CheckResult>, AppError> {
    let mut out = vec![marginals(), gaussian_series()?, table_oracle(opts), truncation_bound(opts)];
    let (ks, cells) = ks_suite(opts)?;
    out.push(ks);
    out.extend(limit_regime(opts)?);
    out.extend(roc_consistency(opts)?);
    out.push(adaptivity(opts)?);
    out.push(closed_form(opts.seed));
    out.extend(invariants(&cells)?);
    Ok(out)
}

fn marginals() -> CheckResult {
    let g = Model::gaussian(1.0).unwrap();
    let e = Model::exponential(5.0).unwrap();
    let dev = [
        (g.p_d() - 0.760).abs(),
        (1.0 - g.p_f() - 0.760).abs(),
        (1.0 - e.p_f() - 0.866).abs(),
        (e.p_d() - 0.669).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    CheckResult::at_most(
        "marginal_probabilities",
        dev,
        0.005,
        format!(
            "gaussian p_d={:.4} 1-p_f={:.4}; exponential 1-p_f={:.4} p_d={:.4}",
            g.p_d(),
            1.0 - g.p_f(),
            1.0 - e.p_f(),
            e.p_d()
        ),
    )
}

fn gaussian_series() -> Result<CheckResult, AppError> {
    let model = Model::gaussian(1.0)?;
    let mut worst: f64 = 0.0;
    for a in A_SWEEP {
        let node = NodeParams::standalone(a, MU)?;
        for h in Hypothesis::BOTH {
            let m = moments(&model, &node, h)?;
            for i in 0..=100 {
                let u = m.mean + m.std() * (-5.0 + 0.1 * i as f64);
                let series = cdf_u(u, &model, &node, h, DEFAULT_EPS)?;
                let exact = cdf_u_gaussian_closed(u, &model, &node, h)?;
                worst = worst.max((series - exact).abs());
            }
        }
    }
    Ok(CheckResult::at_most(
        "gaussian_series_exactness",
        worst,
        1e-4,
        "mu=0.1 a in {0.1,0.25,0.5}, mean +- 5 std".into(),
    ))
}

type RowKey = (Option<usize>, Option<usize>);

/// Pattern enumeration: each digit string is charged to the row given by
/// its leading one (first order) or two (second order) minus digits.
fn enumerate_table(p: f64, eta: f64, omega: usize, order: ApproxOrder) -> BTreeMap<RowKey, (f64, f64)> {
    let limit = match order {
        ApproxOrder::First => 1,
        ApproxOrder::Second => 2,
    };
    let mut rows = BTreeMap::new();
    for mask in 0..1u32 << omega {
        let k = mask.count_ones() as i32;
        let prob = (1.0 - p).powi(k) * p.powi(omega as i32 - k);
        let mut lead = (0..omega).filter(|&i| mask >> i & 1 == 1).take(limit);
        let key = (lead.next(), lead.next());
        let value = 1.0
            - [key.0, key.1]
                .into_iter()
                .flatten()
                .map(|i| 2.0 * eta.powi(i as i32) * (1.0 - eta))
                .sum::<f64>();
        rows.entry(key).or_insert((value, 0.0)).1 += prob;
    }
    rows
}

const TABLE_PS: [f64; 4] = [0.67, 0.76, 0.87, 0.9];
const TABLE_ETAS: [f64; 3] = [0.09, 0.225, 0.45];

fn table_oracle(opts: &SuiteOptions) -> CheckResult {
    let mut worst: f64 = 0.0;
    let mut mismatched_rows = 0;
    for order in [ApproxOrder::First, ApproxOrder::Second] {
        for omega in 1..=opts.max_omega() {
            for p in TABLE_PS {
                for eta in TABLE_ETAS {
                    let spec = BernoulliApproxSpec { p, eta, omega, order };
                    let oracle = enumerate_table(p, eta, omega, order);
                    let rows = table_rows(&spec).unwrap_or_default();
                    if rows.len() != oracle.len() {
                        mismatched_rows += 1;
                        worst = f64::INFINITY;
                    }
                    for r in rows {
                        match oracle.get(&(r.first_minus, r.second_minus)) {
                            Some(&(v, q)) => worst = worst.max((r.prob - q).abs()).max((r.value - v).abs()),
                            None => worst = f64::INFINITY,
                        }
                    }
                }
            }
        }
    }
    CheckResult::at_most(
        "bernoulli_table_oracle",
        worst,
        1e-14,
        format!(
            "omega<={} p in {TABLE_PS:?} eta in {TABLE_ETAS:?}; row-count mismatches {mismatched_rows}",
            opts.max_omega()
        ),
    )
}

fn truncation_bound(opts: &SuiteOptions) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, 4));
    let mut violation: f64 = 0.0;
    for omega in 1..=opts.max_omega() {
        for eta in TABLE_ETAS {
            let bound = 2.0 * eta.powi(omega as i32);
            let tail_weight = |i: usize| (1.0 - eta) * eta.powi((omega + i) as i32);
            for mask in 0..1u32 << omega {
                let head: f64 = (0..omega)
                    .map(|i| (1.0 - eta) * eta.powi(i as i32) * if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                    .sum();
                let zhat = head + eta.powi(omega as i32);
                for t in 0..3 {
                    let tail: f64 = (0..80)
                        .map(|i| {
                            let sign = match t {
                                0 => 1.0,
                                1 => -1.0,
                                _ if rng.random_bool(0.5) => 1.0,
                                _ => -1.0,
                            };
                            sign * tail_weight(i)
                        })
                        .sum();
                    let err = zhat - (head + tail);
                    violation = violation.max(-err).max(err - bound);
                }
            }
        }
    }
    CheckResult::at_most(
        "truncation_bound",
        violation.max(0.0),
        1e-15,
        format!("0 <= zhat - z <= 2 eta^omega, omega<={}", opts.max_omega()),
    )
}

/// One analysed (model, a, node, hypothesis) cell of the reference sweep.
#[derive(Debug, Clone)]
pub struct Cell {
    pub model: Model,
    pub a: f64,
    pub node: usize,
    pub h: Hypothesis,
    pub cdf: SteadyStateCdf,
    pub ks: f64,
}

fn ks_suite(opts: &SuiteOptions) -> Result<(CheckResult, Vec<Cell>), AppError> {
    let topo = reference_network();
    let mut cells = Vec::new();
    let mut tag = 100;
    for model in fig_models() {
        for a in A_SWEEP {
            let net = build_uniform_matrix_with(&topo, a)?;
            for h in Hypothesis::BOTH {
                tag += 1;
                let ens = run_parallel(&SimConfig::new(
                    net.clone(),
                    model,
                    MU,
                    100,
                    opts.trials(),
                    h,
                    derive_seed(opts.seed, tag),
                ))?;
                for node in [HUB, LEAF] {
                    let cdf = analyze_parallel(&model, &net, node, MU, h, &Default::default())?;
                    let ks = empirical_cdf(&ens, node).ks_distance(|y| cdf.eval(y));
                    cells.push(Cell {
                        model,
                        a,
                        node,
                        h,
                        cdf,
                        ks,
                    });
                }
            }
        }
    }
    let tol = 0.02 * opts.mc_scale();
    let worst = cells.iter().map(|c| c.ks).fold(0.0, f64::max);
    let failing: Vec<String> = cells
        .iter()
        .filter(|c| c.ks > tol)
        .map(|c| format!("{} a={} node={} {:?} ks={:.4}", model_label(&c.model), c.a, c.node + 1, c.h, c.ks))
        .collect();
    let detail = format!(
        "{} cells, {} trials; over tolerance: [{}]",
        cells.len(),
        opts.trials(),
        failing.join("; ")
    );
    Ok((CheckResult::at_most("steady_cdf_ks", worst, tol, detail), cells))
}

/// KS distance of terminal states, standardized by their exact moments,
/// against N(0, 1).
#[allow(clippy::too_many_arguments)]
fn standardized_ks(model: Model, a: f64, mu: f64, n: usize, node: usize, h: Hypothesis, trials: usize, seed: u64) -> Result<f64, AppError> {
    let net = build_uniform_matrix_with(&reference_network(), a)?;
    let ens = run_parallel(&SimConfig::new(net.clone(), model, mu, n, trials, h, seed))?;
    let params = net.node_params(node, mu)?;
    let (m, s) = finite_moments_for(&model, &params, net.offdiag_square_sum(node), h, n as u32)?;
    let z = ens.node_states(node).into_iter().map(|y| (y - m) / s).collect();
    Ok(EmpiricalCdf::new(z).ks_distance(normal_cdf))
}

fn limit_regime(opts: &SuiteOptions) -> Result<Vec<CheckResult>, AppError> {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    let mut tag = 200;
    for model in fig_models() {
        for h in Hypothesis::BOTH {
            for node in [HUB, LEAF] {
                tag += 1;
                let d = standardized_ks(model, 0.99, 0.01, 1000, node, h, opts.trials(), derive_seed(opts.seed, tag))?;
                parts.push(format!("{} node={} {h:?} ks={d:.4}", model_label(&model), node + 1));
                worst = worst.max(d);
            }
        }
    }
    let normal = CheckResult::at_most(
        "gaussian_limit_regime",
        worst,
        0.02 * opts.mc_scale(),
        format!("mu=0.01 a=0.99 n=1000: {}", parts.join("; ")),
    );
    let model = Model::gaussian(1.0)?;
    let leaf = standardized_ks(
        model,
        0.5,
        0.001,
        100,
        LEAF,
        Hypothesis::H1,
        opts.trials(),
        derive_seed(opts.seed, 250),
    )?;
    let hub = standardized_ks(
        model,
        0.5,
        0.001,
        100,
        HUB,
        Hypothesis::H1,
        opts.trials(),
        derive_seed(opts.seed, 251),
    )?;
    let guard = CheckResult::above(
        "non_normality_guard",
        leaf,
        0.05,
        format!("mu=0.001 a=0.5: node 9 ks={leaf:.4} (node 3 ks={hub:.4}, informational)"),
    );
    Ok(vec![normal, guard])
}

fn roc_consistency(opts: &SuiteOptions) -> Result<Vec<CheckResult>, AppError> {
    let topo = reference_network();
    let combos: Vec<(Model, f64)> = [0.1, 0.5]
        .into_iter()
        .map(|r| Model::gaussian(r).unwrap())
        .chain([3.0, 5.0].into_iter().map(|l| Model::exponential(l).unwrap()))
        .flat_map(|m| [0.1, 0.25].map(|a| (m, a)))
        .collect();
    let mut curves: Vec<(Model, f64, usize, RocCurve, RocCurve)> = Vec::new();
    let mut gap: f64 = 0.0;
    let mut tag = 300;
    for (model, a) in combos {
        let net = build_uniform_matrix_with(&topo, a)?;
        tag += 2;
        let e0 = run_parallel(&SimConfig::new(
            net.clone(),
            model,
            MU,
            100,
            opts.trials(),
            Hypothesis::H0,
            derive_seed(opts.seed, tag),
        ))?;
        let e1 = run_parallel(&SimConfig::new(
            net.clone(),
            model,
            MU,
            100,
            opts.trials(),
            Hypothesis::H1,
            derive_seed(opts.seed, tag + 1),
        ))?;
        for node in [HUB, LEAF] {
            let h0 = analyze_parallel(&model, &net, node, MU, Hypothesis::H0, &Default::default())?;
            let h1 = analyze_parallel(&model, &net, node, MU, Hypothesis::H1, &Default::default())?;
            let grid = gamma_grid(&h0, &h1, 400, DEFAULT_EPS);
            let ana = roc(&h0, &h1, &grid, node, RocSource::Analytical);
            let emp = roc(
                &empirical_cdf(&e0, node),
                &empirical_cdf(&e1, node),
                &grid,
                node,
                RocSource::Empirical,
            );
            gap = gap.max(max_pd_gap_matched_gamma(&ana, &emp));
            curves.push((model, a, node, emp, ana));
        }
    }
    let pfs: Vec<f64> = (1..=99).map(|i| i as f64 / 100.0).collect();
    let find = |m: &Model, a: f64, node: usize| {
        curves
            .iter()
            .find(|(cm, ca, cn, ..)| cm == m && *ca == a && *cn == node)
            .map(|c| (&c.3, &c.4))
            .expect("curve computed")
    };
    let mut pairs = Vec::new();
    for a in [0.1, 0.25] {
        for node in [HUB, LEAF] {
            pairs.push((
                format!("rho 0.5>0.1 a={a} node={}", node + 1),
                find(&Model::gaussian(0.5)?, a, node),
                find(&Model::gaussian(0.1)?, a, node),
            ));
        }
    }
    for model in [
        Model::gaussian(0.1)?,
        Model::gaussian(0.5)?,
        Model::exponential(3.0)?,
        Model::exponential(5.0)?,
    ] {
        for a in [0.1, 0.25] {
            pairs.push((
                format!("node 3>9 {} a={a}", model_label(&model)),
                find(&model, a, HUB),
                find(&model, a, LEAF),
            ));
        }
    }
    let mut margin = f64::INFINITY;
    let mut detail = Vec::new();
    for (name, strong, weak) in pairs {
        let d = min_dominance_margin(strong.0, weak.0, &pfs);
        let d_ana = min_dominance_margin(strong.1, weak.1, &pfs);
        detail.push(format!("{name} {d:.4} (analytical {d_ana:.4})"));
        margin = margin.min(d);
    }
    Ok(vec![
        CheckResult::at_most(
            "roc_analytical_vs_empirical",
            gap,
            0.03 * opts.mc_scale(),
            format!("{} curves, {} trials", curves.len(), opts.trials()),
        ),
        CheckResult {
            name: "roc_dominance".into(),
            passed: margin >= -0.01,
            measured: margin,
            tolerance: -0.01,
            detail: format!("empirical curves: {}", detail.join("; ")),
        },
    ])
}

fn adaptivity(opts: &SuiteOptions) -> Result<CheckResult, AppError> {
    let net = build_uniform_matrix_with(&reference_network(), 0.75)?;
    let model = Model::gaussian(2.0)?;
    let schedule = Schedule::new(vec![
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
    ])?;
    let mut times = Vec::new();
    for (i, scheme) in Scheme::ALL.into_iter().enumerate() {
        let mut cfg = SimConfig::new(
            net.clone(),
            model,
            MU,
            3000,
            100,
            Hypothesis::H0,
            derive_seed(opts.seed, 400 + i as u64),
        );
        cfg.scheme = scheme;
        cfg.schedule = schedule.clone();
        cfg.track = vec![HUB];
        let ens = run_parallel(&cfg)?;
        let traj = ens.trajectory(HUB).expect("tracked");
        let r = [(1001, 2001), (2001, 3001)].map(|(s, e)| reaction_time(traj, s, e, 0.9).map_or(f64::INFINITY, |t| t as f64));
        times.push((scheme, r));
    }
    let get = |s: Scheme| times.iter().find(|t| t.0 == s).map(|t| t.1).expect("scheme run");
    let (ob, qs, un) = (get(Scheme::OneBit), get(Scheme::QuantizedState), get(Scheme::Unquantized));
    let violations = (0..2).filter(|&i| ob[i] >= qs[i]).count() + (0..2).filter(|&i| ob[i] > un[i]).count();
    Ok(CheckResult::at_most(
        "adaptivity_ordering",
        violations as f64,
        0.0,
        format!("reaction times (H0->H1, H1->H0): one_bit_x {ob:?}, quantized_state {qs:?}, unquantized {un:?}"),
    ))
}

fn closed_form(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 9));
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let s = rng.random_range(2..=10);
        let mut edges: Vec<(usize, usize)> = (1..s).map(|k| (k - 1, k)).collect();
        for _ in 0..s {
            edges.push((rng.random_range(0..s), rng.random_range(0..s)));
        }
        let topo = Topology::from_edges(s, &edges).expect("valid edges");
        let weights: Vec<f64> = (0..s).map(|_| rng.random_range(0.05..0.95)).collect();
        let net = build_uniform_matrix(&topo, &weights).expect("valid weights");
        let model = if rng.random_bool(0.5) {
            Model::gaussian(rng.random_range(0.2..2.0)).unwrap()
        } else {
            Model::exponential(rng.random_range(2.0..6.0)).unwrap()
        };
        let mu = rng.random_range(0.01..0.5);
        let n = rng.random_range(1..=60);
        let h = if rng.random_bool(0.5) { Hypothesis::H0 } else { Hypothesis::H1 };
        let draws: Vec<Vec<f64>> = (0..n).map(|_| (0..s).map(|_| model.sample(h, &mut rng)).collect()).collect();
        let zero = vec![0.0; s];
        let one_bit = run_on_draws(&net, &model, mu, Scheme::OneBit, &zero, &draws);
        let full = run_on_draws(&net, &model, mu, Scheme::Unquantized, &zero, &draws);
        for (a, b) in one_bit.iter().zip(explicit_one_bit(&net, &model, mu, &draws)) {
            worst = worst.max((a - b).abs());
        }
        for (a, b) in full.iter().zip(explicit_unquantized(&net, mu, &draws)) {
            worst = worst.max((a - b).abs());
        }
    }
    CheckResult::at_most(
        "closed_form_oracles",
        worst,
        1e-12,
        "100 random networks, one-bit and unquantized".into(),
    )
}

fn explicit_one_bit(net: &NetworkSpec, model: &Model, mu: f64, draws: &[Vec<f64>]) -> Vec<f64> {
    let q = Quantizer::from_model(model);
    let n = draws.len();
    (0..net.size())
        .map(|k| {
            let a = net.self_weight(k);
            let eta = (1.0 - mu) * a;
            (0..n)
                .map(|i| {
                    let x = &draws[n - 1 - i];
                    let msgs: f64 = (0..net.size()).filter(|&l| l != k).map(|l| net.weight(k, l) * q.apply(x[l])).sum();
                    eta.powi(i as i32) * (a * mu * x[k] + msgs)
                })
                .sum()
        })
        .collect()
}

fn explicit_unquantized(net: &NetworkSpec, mu: f64, draws: &[Vec<f64>]) -> Vec<f64> {
    let s = net.size();
    let apply = |v: &[f64]| -> Vec<f64> { (0..s).map(|k| (0..s).map(|l| net.weight(k, l) * v[l]).sum()).collect() };
    let n = draws.len();
    let mut y = vec![0.0; s];
    for i in 0..n {
        let mut v = draws[n - 1 - i].clone();
        for _ in 0..=i {
            v = apply(&v);
        }
        let w = mu * (1.0 - mu).powi(i as i32);
        y.iter_mut().zip(v).for_each(|(acc, x)| *acc += w * x);
    }
    y
}

fn invariants(cells: &[Cell]) -> Result<Vec<CheckResult>, AppError> {
    let mut pmf_dev: f64 = 0.0;
    let mut monotone_violation: f64 = 0.0;
    let mut mean_rel: f64 = 0.0;
    for c in cells {
        if let SteadyKind::Mixture { pmf, .. } = &c.cdf.kind {
            pmf_dev = pmf_dev.max((pmf.total() - 1.0).abs());
        }
        let (lo, hi) = c.cdf.effective_range();
        let (lo, hi) = (lo - 0.1 * (hi - lo), hi + 0.1 * (hi - lo));
        let n = 20_000;
        let step = (hi - lo) / n as f64;
        let mut prev = c.cdf.eval(lo);
        let mut integral = 0.0;
        monotone_violation = monotone_violation.max(-prev).max(prev - 1.0);
        for i in 1..=n {
            let f = c.cdf.eval(lo + step * i as f64);
            monotone_violation = monotone_violation.max(prev - f).max(-f).max(f - 1.0);
            integral += step * (1.0 - 0.5 * (f + prev));
            prev = f;
        }
        let integrated = lo + integral;
        let additive = c.cdf.mean();
        mean_rel = mean_rel.max((integrated - additive).abs() / additive.abs());
    }
    let mut bound_violation: f64 = 0.0;
    let topo = reference_network();
    let s = topo.size() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(54);
    let mut nets: Vec<NetworkSpec> = A_SWEEP
        .iter()
        .chain(&[0.75, 0.99])
        .map(|&a| build_uniform_matrix_with(&topo, a))
        .collect::<Result<_, _>>()?;
    for _ in 0..50 {
        let w: Vec<f64> = (0..topo.size()).map(|_| rng.random_range(0.01..1.0)).collect();
        nets.push(build_uniform_matrix(&topo, &w)?);
    }
    for net in &nets {
        for k in 0..net.size() {
            let a = net.self_weight(k);
            let q = net.offdiag_square_sum(k);
            bound_violation = bound_violation.max((1.0 - a).powi(2) / (s - 1.0) - q).max(q - (1.0 - a));
        }
    }
    Ok(vec![
        CheckResult::at_most("pmf_normalization", pmf_dev, 1e-10, format!("{} steady-state PMFs", cells.len())),
        CheckResult::at_most(
            "cdf_monotone_unit_range",
            monotone_violation.max(0.0),
            0.0,
            "20001-point sweep per CDF".into(),
        ),
        CheckResult::at_most(
            "self_weight_energy_bounds",
            bound_violation.max(0.0),
            1e-15,
            format!("{} matrices", nets.len()),
        ),
        CheckResult::at_most(
            "mixture_mean_additivity",
            mean_rel,
            0.01,
            "integrated CDF mean vs discrete + continuous means".into(),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_counts_rows() {
        for omega in 1..=6 {
            let t = enumerate_table(0.8, 0.3, omega, ApproxOrder::Second);
            assert_eq!(t.len(), 1 + omega + omega * (omega - 1) / 2);
            let total: f64 = t.values().map(|v| v.1).sum();
            assert!((total - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cheap_checks_pass() {
        let opts = SuiteOptions { quick: true, seed: 1 };
        for c in [marginals(), table_oracle(&opts), truncation_bound(&opts), closed_form(1)] {
            assert!(c.passed, "{}", c.line());
        }
    }
}
