//! Acceptance suite: ten criteria at full scale, one PASS/FAIL line each.
//!
//! Every reference value is recomputed here from first principles (normal
//! CDF by quadrature, digit-pattern enumeration, explicit sums, moment
//! formulas, KS statistics); the library is only the system under test.
//! Set `ONEBIT_ACCEPTANCE_SEED` to change the master seed (default 1).

use std::process::ExitCode;
use std::time::Instant;

use onebit::runner::{analyze_parallel, derive_seed, run_parallel};
use onebit_core::continuous::{cdf_u, DEFAULT_EPS};
use onebit_core::detection::gamma_grid;
use onebit_core::discrete::{table_rows, ApproxOrder, BernoulliApproxSpec};
use onebit_core::network::{build_uniform_matrix, build_uniform_matrix_with, reference_network, HUB, LEAF};
use onebit_core::sim::{run_on_draws, Schedule, Scheme, Segment, SimConfig};
use onebit_core::steady::{SteadyKind, SteadyStateCdf};
use onebit_core::{Hypothesis, Model, NetworkSpec, NodeParams, ObservationModel, Topology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MU: f64 = 0.1;
const TRIALS: usize = 10_000;
const A_SWEEP: [f64; 3] = [0.1, 0.25, 0.5];

struct Outcome {
    id: usize,
    name: &'static str,
    passed: bool,
    measured: String,
    tolerance: String,
    detail: String,
}

// ---------------------------------------------------------------- oracles

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF by composite Simpson quadrature of the density.
fn phi(x: f64) -> f64 {
    if x.abs() > 9.0 {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let n = 4000;
    let h = x.abs() / n as f64;
    let mut s = std_normal_pdf(0.0) + std_normal_pdf(x.abs());
    for i in 1..n {
        s += std_normal_pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let half = s * h / 3.0;
    if x >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

/// One-sample KS distance between `sample` and `cdf`.
fn ks(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &y)| {
            let f = cdf(y);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Marginal law of the statistic: mean, variance and `P(x >= 0)`.
#[derive(Clone, Copy)]
struct Law {
    mean: [f64; 2],
    var: [f64; 2],
    p_plus: [f64; 2],
}

fn law(model: &Model) -> Law {
    match model {
        Model::Gaussian(g) => {
            let r = g.rho();
            let s = (2.0 * r).sqrt();
            Law {
                mean: [-r, r],
                var: [2.0 * r, 2.0 * r],
                p_plus: [1.0 - phi(r / s), 1.0 - phi(-r / s)],
            }
        }
        Model::Exponential(e) => {
            let l = e.lambda_e();
            let scale = [1.0 - 1.0 / l, l - 1.0];
            // x >= 0  <=>  Y >= ln(l) / scale, Y ~ Exp(1)
            Law {
                mean: scale.map(|s| s - l.ln()),
                var: scale.map(|s| s * s),
                p_plus: scale.map(|s| (-l.ln() / s).exp()),
            }
        }
    }
}

impl Law {
    fn quantize(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.mean[1]
        } else {
            self.mean[0]
        }
    }

    fn message_mean(&self, h: usize) -> f64 {
        self.p_plus[h] * self.mean[1] + (1.0 - self.p_plus[h]) * self.mean[0]
    }

    fn message_var(&self, h: usize) -> f64 {
        let d = self.mean[1] - self.mean[0];
        self.p_plus[h] * (1.0 - self.p_plus[h]) * d * d
    }
}

fn hidx(h: Hypothesis) -> usize {
    match h {
        Hypothesis::H0 => 0,
        Hypothesis::H1 => 1,
    }
}

/// Mean and standard deviation of the one-bit state of node `k` after `n`
/// steps from zero.
fn finite_moments(model: &Model, net: &NetworkSpec, k: usize, mu: f64, h: Hypothesis, n: i32) -> (f64, f64) {
    let lw = law(model);
    let hi = hidx(h);
    let a = net.self_weight(k);
    let eta = (1.0 - mu) * a;
    let others = (0..net.size()).filter(|&l| l != k);
    let c1: f64 = others.clone().map(|l| net.weight(k, l)).sum();
    let c2: f64 = others.map(|l| net.weight(k, l).powi(2)).sum();
    let m = (a * mu * lw.mean[hi] + c1 * lw.message_mean(hi)) * (1.0 - eta.powi(n)) / (1.0 - eta);
    let v = (a * a * mu * mu * lw.var[hi] + c2 * lw.message_var(hi)) * (1.0 - eta.powi(2 * n)) / (1.0 - eta * eta);
    (m, v.sqrt())
}

/// Positions of the first and second minus digit.
type RowKey = (Option<usize>, Option<usize>);

/// Truncated value of a digit pattern (bit `i` set = minus at position `i`).
fn z_hat(mask: u32, eta: f64, omega: usize) -> f64 {
    (0..omega)
        .map(|i| (1.0 - eta) * eta.powi(i as i32) * if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
        .sum::<f64>()
        + eta.powi(omega as i32)
}

/// Rows of the starred table by brute force: a pattern is represented by its
/// prefix up to and including the second (or first) minus digit, the rest
/// starred and read as plus.
fn brute_force_rows(p: f64, eta: f64, omega: usize, order: ApproxOrder) -> Vec<(RowKey, f64, f64)> {
    let keep = if order == ApproxOrder::First { 1 } else { 2 };
    let mut acc: Vec<(RowKey, f64, f64)> = Vec::new();
    for mask in 0u32..1 << omega {
        let minus: Vec<usize> = (0..omega).filter(|&i| mask >> i & 1 == 1).take(keep).collect();
        let rep = minus.iter().fold(0u32, |m, &i| m | 1 << i);
        let key = (minus.first().copied(), minus.get(1).copied());
        let k = mask.count_ones() as i32;
        let prob = (1.0 - p).powi(k) * p.powi(omega as i32 - k);
        match acc.iter_mut().find(|r| r.0 == key) {
            Some(r) => r.2 += prob,
            None => acc.push((key, z_hat(rep, eta, omega), prob)),
        }
    }
    acc
}

/// Threshold exceedance `(P_f, P_d)` of two samples at `gamma`.
fn exceed(s0: &[f64], s1: &[f64], gamma: f64) -> (f64, f64) {
    let frac = |s: &[f64]| s.iter().filter(|&&y| y > gamma).count() as f64 / s.len() as f64;
    (frac(s0), frac(s1))
}

/// Best `P_d` reachable at `P_f <= pf` on a sampled curve.
fn pd_at(points: &[(f64, f64)], pf: f64) -> f64 {
    points.iter().filter(|p| p.0 <= pf).map(|p| p.1).fold(0.0, f64::max)
}

fn model_name(m: &Model) -> String {
    match m {
        Model::Gaussian(g) => format!("gaussian(rho={})", g.rho()),
        Model::Exponential(e) => format!("exponential(lambda_e={})", e.lambda_e()),
    }
}

// ---------------------------------------------------------------- criteria

fn marginal_probabilities() -> Outcome {
    let g = Model::gaussian(1.0).unwrap();
    let e = Model::exponential(5.0).unwrap();
    let (lg, le) = (law(&g), law(&e));
    let lib_vs_oracle = [
        (g.p_d() - lg.p_plus[1]).abs(),
        (g.p_f() - lg.p_plus[0]).abs(),
        (e.p_d() - le.p_plus[1]).abs(),
        (e.p_f() - le.p_plus[0]).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let dev = [
        (g.p_d() - 0.760).abs(),
        (1.0 - g.p_f() - 0.760).abs(),
        (1.0 - e.p_f() - 0.866).abs(),
        (e.p_d() - 0.669).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Outcome {
        id: 1,
        name: "marginal_probabilities",
        passed: dev <= 0.005 && lib_vs_oracle <= 1e-10,
        measured: format!("{dev:.3e}"),
        tolerance: "0.005".into(),
        detail: format!(
            "gaussian p_d={:.4} 1-p_f={:.4}; exponential 1-p_f={:.4} p_d={:.4}; library vs oracle {lib_vs_oracle:.1e}",
            g.p_d(),
            1.0 - g.p_f(),
            1.0 - e.p_f(),
            e.p_d()
        ),
    }
}

fn gaussian_series_exactness() -> Outcome {
    let model = Model::gaussian(1.0).unwrap();
    let lw = law(&model);
    let mut worst: f64 = 0.0;
    for a in A_SWEEP {
        let node = NodeParams::standalone(a, MU).unwrap();
        let eta = (1.0 - MU) * a;
        for h in Hypothesis::BOTH {
            let hi = hidx(h);
            let m = a * MU * lw.mean[hi] / (1.0 - eta);
            let s = (a * a * MU * MU * lw.var[hi] / (1.0 - eta * eta)).sqrt();
            for i in 0..=200 {
                let u = m + s * (-5.0 + 0.05 * i as f64);
                let series = cdf_u(u, &model, &node, h, DEFAULT_EPS).unwrap();
                worst = worst.max((series - phi((u - m) / s)).abs());
            }
        }
    }
    Outcome {
        id: 2,
        name: "gaussian_series_exactness",
        passed: worst <= 1e-4,
        measured: format!("{worst:.3e}"),
        tolerance: "1e-4".into(),
        detail: "mu=0.1, a in {0.1, 0.25, 0.5}, both hypotheses, mean +- 5 std".into(),
    }
}

const TABLE_PS: [f64; 4] = [0.67, 0.76, 0.87, 0.9];
const TABLE_ETAS: [f64; 3] = [0.09, 0.225, 0.45];

fn bernoulli_table_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut missing = 0;
    let mut tables = 0;
    for order in [ApproxOrder::First, ApproxOrder::Second] {
        for omega in 1..=12 {
            for p in TABLE_PS {
                for eta in TABLE_ETAS {
                    tables += 1;
                    let oracle = brute_force_rows(p, eta, omega, order);
                    let rows = table_rows(&BernoulliApproxSpec { p, eta, omega, order }).unwrap();
                    if rows.len() != oracle.len() {
                        missing += 1;
                    }
                    for r in &rows {
                        match oracle.iter().find(|o| o.0 == (r.first_minus, r.second_minus)) {
                            Some(o) => worst = worst.max((r.prob - o.2).abs()).max((r.value - o.1).abs()),
                            None => missing += 1,
                        }
                    }
                }
            }
        }
    }
    Outcome {
        id: 3,
        name: "bernoulli_table_oracle",
        passed: missing == 0 && worst <= 1e-14,
        measured: format!("{worst:.3e}"),
        tolerance: "1e-14".into(),
        detail: format!("{tables} tables, omega <= 12, both orders; row mismatches {missing}"),
    }
}

fn truncation_bound(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 4));
    let mut violation: f64 = 0.0;
    let mut row_dev: f64 = 0.0;
    for omega in 1..=12usize {
        for eta in TABLE_ETAS {
            let bound = 2.0 * eta.powi(omega as i32);
            let rows = table_rows(&BernoulliApproxSpec {
                p: 0.5,
                eta,
                omega,
                order: ApproxOrder::Second,
            })
            .unwrap();
            for mask in 0u32..1 << omega {
                let zh = z_hat(mask, eta, omega);
                if mask.count_ones() <= 2 {
                    let mut it = (0..omega).filter(|&i| mask >> i & 1 == 1);
                    let key = (it.next(), it.next());
                    let r = rows.iter().find(|r| (r.first_minus, r.second_minus) == key).unwrap();
                    row_dev = row_dev.max((r.value - zh).abs());
                }
                let head = zh - eta.powi(omega as i32);
                for tail_kind in 0..3 {
                    let tail: f64 = (0..100)
                        .map(|i| {
                            let sign = match tail_kind {
                                0 => 1.0,
                                1 => -1.0,
                                _ => {
                                    if rng.random_bool(0.5) {
                                        1.0
                                    } else {
                                        -1.0
                                    }
                                }
                            };
                            sign * (1.0 - eta) * eta.powi((omega + i) as i32)
                        })
                        .sum();
                    let err = zh - (head + tail);
                    violation = violation.max(-err).max(err - bound);
                }
            }
        }
    }
    let measured = violation.max(0.0).max(row_dev);
    Outcome {
        id: 4,
        name: "truncation_bound",
        passed: measured <= 1e-15,
        measured: format!("{measured:.3e}"),
        tolerance: "1e-15".into(),
        detail: format!("0 <= zhat - z <= 2 eta^omega over all patterns, omega <= 12; table values vs zhat {row_dev:.1e}"),
    }
}

struct Cell {
    model: Model,
    a: f64,
    node: usize,
    h: Hypothesis,
    cdf: SteadyStateCdf,
    ks: f64,
}

fn steady_state_cdfs(seed: u64) -> (Outcome, Vec<Cell>) {
    let topo = reference_network();
    let mut cells = Vec::new();
    let mut tag = 100;
    for model in [Model::gaussian(1.0).unwrap(), Model::exponential(5.0).unwrap()] {
        for a in A_SWEEP {
            let net = build_uniform_matrix_with(&topo, a).unwrap();
            for h in Hypothesis::BOTH {
                tag += 1;
                let ens = run_parallel(&SimConfig::new(net.clone(), model, MU, 100, TRIALS, h, derive_seed(seed, tag))).unwrap();
                for node in [HUB, LEAF] {
                    let cdf = analyze_parallel(&model, &net, node, MU, h, &Default::default()).unwrap();
                    let d = ks(&ens.node_states(node), |y| cdf.eval(y));
                    cells.push(Cell {
                        model,
                        a,
                        node,
                        h,
                        cdf,
                        ks: d,
                    });
                }
            }
        }
    }
    let worst = cells.iter().map(|c| c.ks).fold(0.0, f64::max);
    let over: Vec<String> = cells
        .iter()
        .filter(|c| c.ks > 0.02)
        .map(|c| format!("{} a={} node={} {:?} {:.4}", model_name(&c.model), c.a, c.node + 1, c.h, c.ks))
        .collect();
    let outcome = Outcome {
        id: 5,
        name: "steady_state_cdf_ks",
        passed: worst <= 0.02,
        measured: format!("{worst:.4}"),
        tolerance: "0.02".into(),
        detail: format!(
            "{} cells, {TRIALS} trials, n=100; over tolerance {}: [{}]",
            cells.len(),
            over.len(),
            over.join("; ")
        ),
    };
    (outcome, cells)
}

fn standardized_ks(model: Model, a: f64, mu: f64, n: usize, node: usize, h: Hypothesis, seed: u64) -> f64 {
    let net = build_uniform_matrix_with(&reference_network(), a).unwrap();
    let ens = run_parallel(&SimConfig::new(net.clone(), model, mu, n, TRIALS, h, seed)).unwrap();
    let (m, s) = finite_moments(&model, &net, node, mu, h, n as i32);
    let z: Vec<f64> = ens.node_states(node).iter().map(|y| (y - m) / s).collect();
    ks(&z, phi)
}

fn normal_limit(seed: u64) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    let mut tag = 200;
    for model in [Model::gaussian(1.0).unwrap(), Model::exponential(5.0).unwrap()] {
        for h in Hypothesis::BOTH {
            for node in [HUB, LEAF] {
                tag += 1;
                let d = standardized_ks(model, 0.99, 0.01, 1000, node, h, derive_seed(seed, tag));
                parts.push(format!("{} node={} {h:?} {d:.4}", model_name(&model), node + 1));
                worst = worst.max(d);
            }
        }
    }
    let model = Model::gaussian(1.0).unwrap();
    let guard = standardized_ks(model, 0.5, 0.001, 100, LEAF, Hypothesis::H1, derive_seed(seed, 250));
    Outcome {
        id: 6,
        name: "normal_limit_and_guard",
        passed: worst <= 0.02 && guard > 0.05,
        measured: format!("{worst:.4} / guard {guard:.4}"),
        tolerance: "<= 0.02 / guard > 0.05".into(),
        detail: format!("mu=0.01 a=0.99 n=1000: [{}]; guard mu=0.001 a=0.5 node 9", parts.join("; ")),
    }
}

struct Roc {
    model: Model,
    a: f64,
    node: usize,
    analytical: Vec<(f64, f64)>,
    empirical: Vec<(f64, f64)>,
}

fn roc_consistency(seed: u64) -> Outcome {
    let topo = reference_network();
    let models = [
        Model::gaussian(0.1).unwrap(),
        Model::gaussian(0.5).unwrap(),
        Model::exponential(3.0).unwrap(),
        Model::exponential(5.0).unwrap(),
    ];
    let mut curves = Vec::new();
    let mut gap: f64 = 0.0;
    let mut worst_gap = String::new();
    let mut tag = 300;
    for model in models {
        for a in [0.1, 0.25] {
            let net = build_uniform_matrix_with(&topo, a).unwrap();
            tag += 2;
            let sim = |h, t| run_parallel(&SimConfig::new(net.clone(), model, MU, 100, TRIALS, h, derive_seed(seed, t))).unwrap();
            let (e0, e1) = (sim(Hypothesis::H0, tag), sim(Hypothesis::H1, tag + 1));
            for node in [HUB, LEAF] {
                let h0 = analyze_parallel(&model, &net, node, MU, Hypothesis::H0, &Default::default()).unwrap();
                let h1 = analyze_parallel(&model, &net, node, MU, Hypothesis::H1, &Default::default()).unwrap();
                let (s0, s1) = (e0.node_states(node), e1.node_states(node));
                let mut analytical = Vec::new();
                let mut empirical = Vec::new();
                for g in gamma_grid(&h0, &h1, 400, DEFAULT_EPS) {
                    let ana = (1.0 - h0.eval(g), 1.0 - h1.eval(g));
                    let emp = exceed(&s0, &s1, g);
                    let d = (ana.1 - emp.1).abs();
                    if d > gap {
                        gap = d;
                        worst_gap = format!("{} a={a} node={} gamma={g:.4}", model_name(&model), node + 1);
                    }
                    analytical.push(ana);
                    empirical.push(emp);
                }
                curves.push(Roc {
                    model,
                    a,
                    node,
                    analytical,
                    empirical,
                });
            }
        }
    }
    let find = |m: &Model, a: f64, node: usize| curves.iter().find(|c| c.model == *m && c.a == a && c.node == node).unwrap();
    let pfs: Vec<f64> = (1..=99).map(|i| i as f64 / 100.0).collect();
    let margin = |x: &[(f64, f64)], y: &[(f64, f64)]| pfs.iter().map(|&pf| pd_at(x, pf) - pd_at(y, pf)).fold(f64::INFINITY, f64::min);
    let mut pairs = Vec::new();
    for a in [0.1, 0.25] {
        for node in [HUB, LEAF] {
            pairs.push((
                format!("rho 0.5>0.1 a={a} node={}", node + 1),
                find(&models[1], a, node),
                find(&models[0], a, node),
            ));
        }
    }
    for m in &models {
        for a in [0.1, 0.25] {
            pairs.push((format!("node 3>9 {} a={a}", model_name(m)), find(m, a, HUB), find(m, a, LEAF)));
        }
    }
    let mut dominance = f64::INFINITY;
    let mut parts = Vec::new();
    for (name, strong, weak) in pairs {
        let emp = margin(&strong.empirical, &weak.empirical);
        let ana = margin(&strong.analytical, &weak.analytical);
        dominance = dominance.min(emp);
        parts.push(format!("{name} {emp:.4} (analytical {ana:.4})"));
    }
    Outcome {
        id: 7,
        name: "roc_consistency",
        passed: gap <= 0.03 && dominance >= -0.01,
        measured: format!("gap {gap:.4} / dominance margin {dominance:.4}"),
        tolerance: "gap <= 0.03 / margin >= -0.01".into(),
        detail: format!(
            "{} curves, {TRIALS} trials; worst gap at {worst_gap}; empirical dominance: [{}]",
            curves.len(),
            parts.join("; ")
        ),
    }
}

/// Steps after `switch` until the trace covers `fraction` of the gap between
/// the 100-step averages preceding the switch and preceding `end`.
fn reaction(trace: &[f64], switch: usize, end: usize, fraction: f64) -> Option<usize> {
    let w = 100;
    let avg = |to: usize| trace[to - 1 - w..to - 1].iter().sum::<f64>() / w as f64;
    let (before, after) = (avg(switch), avg(end));
    (switch..end)
        .find(|&n| (trace[n - 1] - before) / (after - before) >= fraction)
        .map(|n| n - switch + 1)
}

fn adaptivity(seed: u64) -> Outcome {
    let net = build_uniform_matrix_with(&reference_network(), 0.75).unwrap();
    let model = Model::gaussian(2.0).unwrap();
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
    ])
    .unwrap();
    let times: Vec<[Option<usize>; 2]> = Scheme::ALL
        .into_iter()
        .enumerate()
        .map(|(i, scheme)| {
            let mut cfg = SimConfig::new(net.clone(), model, MU, 3000, 100, Hypothesis::H0, derive_seed(seed, 400 + i as u64));
            cfg.scheme = scheme;
            cfg.schedule = schedule.clone();
            cfg.track = vec![HUB];
            let ens = run_parallel(&cfg).unwrap();
            let tr = ens.trajectory(HUB).unwrap();
            [reaction(tr, 1001, 2001, 0.9), reaction(tr, 2001, 3001, 0.9)]
        })
        .collect();
    let get = |s: Scheme| times[Scheme::ALL.iter().position(|&x| x == s).unwrap()];
    let (ob, qs, un) = (get(Scheme::OneBit), get(Scheme::QuantizedState), get(Scheme::Unquantized));
    let lt = |x: Option<usize>, y: Option<usize>| matches!((x, y), (Some(a), Some(b)) if a < b) || matches!((x, y), (Some(_), None));
    let le = |x: Option<usize>, y: Option<usize>| matches!((x, y), (Some(a), Some(b)) if a <= b) || matches!((x, y), (Some(_), None));
    let violations = (0..2).filter(|&i| !lt(ob[i], qs[i])).count() + (0..2).filter(|&i| !le(ob[i], un[i])).count();
    Outcome {
        id: 8,
        name: "adaptivity_ordering",
        passed: violations == 0,
        measured: format!("{violations} violations"),
        tolerance: "0".into(),
        detail: format!("rho=2 a=0.75 node 3, switches at 1001 and 2001: one_bit_x {ob:?}, quantized_state {qs:?}, unquantized {un:?}"),
    }
}

fn closed_forms(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 9));
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let s = rng.random_range(2..=10usize);
        let mut edges: Vec<(usize, usize)> = (1..s).map(|k| (k - 1, k)).collect();
        for _ in 0..s {
            edges.push((rng.random_range(0..s), rng.random_range(0..s)));
        }
        let topo = Topology::from_edges(s, &edges).unwrap();
        let w: Vec<f64> = (0..s).map(|_| rng.random_range(0.05..0.95)).collect();
        let net = build_uniform_matrix(&topo, &w).unwrap();
        let model = if rng.random_bool(0.5) {
            Model::gaussian(rng.random_range(0.2..2.0)).unwrap()
        } else {
            Model::exponential(rng.random_range(2.0..6.0)).unwrap()
        };
        let mu = rng.random_range(0.01..0.5);
        let n = rng.random_range(1..=60usize);
        let h = if rng.random_bool(0.5) { Hypothesis::H0 } else { Hypothesis::H1 };
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..s).map(|_| model.sample(h, &mut rng)).collect()).collect();
        let zero = vec![0.0; s];
        let lw = law(&model);
        let c = |k: usize, l: usize| net.weight(k, l);

        // one-bit: y_k(n) = sum_i eta^i (a mu x_k(n-i) + sum_{l != k} c_kl q(x_l(n-i)))
        let one_bit = run_on_draws(&net, &model, mu, Scheme::OneBit, &zero, &x);
        for k in 0..s {
            let a = c(k, k);
            let eta = (1.0 - mu) * a;
            let direct: f64 = (0..n)
                .map(|i| {
                    let xi = &x[n - 1 - i];
                    let msg: f64 = (0..s).filter(|&l| l != k).map(|l| c(k, l) * lw.quantize(xi[l])).sum();
                    eta.powi(i as i32) * (a * mu * xi[k] + msg)
                })
                .sum();
            worst = worst.max((one_bit[k] - direct).abs());
        }

        // unquantized: y(n) = sum_i mu (1 - mu)^i A^(i+1) x(n-i), powers of A built explicitly
        let full = run_on_draws(&net, &model, mu, Scheme::Unquantized, &zero, &x);
        let matmul = |p: &[Vec<f64>], q: &[Vec<f64>]| -> Vec<Vec<f64>> {
            (0..s)
                .map(|i| (0..s).map(|j| (0..s).map(|m| p[i][m] * q[m][j]).sum()).collect())
                .collect()
        };
        let a_mat: Vec<Vec<f64>> = (0..s).map(|i| (0..s).map(|j| c(i, j)).collect()).collect();
        let mut power = a_mat.clone();
        let mut direct = vec![0.0; s];
        for i in 0..n {
            let xi = &x[n - 1 - i];
            let wgt = mu * (1.0 - mu).powi(i as i32);
            for (k, d) in direct.iter_mut().enumerate() {
                *d += wgt * (0..s).map(|l| power[k][l] * xi[l]).sum::<f64>();
            }
            power = matmul(&power, &a_mat);
        }
        for k in 0..s {
            worst = worst.max((full[k] - direct[k]).abs());
        }
    }
    Outcome {
        id: 9,
        name: "closed_form_oracles",
        passed: worst <= 1e-12,
        measured: format!("{worst:.3e}"),
        tolerance: "1e-12".into(),
        detail: "100 random connected networks, one-bit and unquantized recursions".into(),
    }
}

fn invariants(cells: &[Cell], seed: u64) -> Outcome {
    let mut pmf_dev: f64 = 0.0;
    let mut monotone: f64 = 0.0;
    let mut mean_rel: f64 = 0.0;
    for c in cells {
        let SteadyKind::Mixture { pmf, .. } = &c.cdf.kind else {
            continue;
        };
        pmf_dev = pmf_dev.max((pmf.probs().iter().sum::<f64>() - 1.0).abs());
        let (lo, hi) = c.cdf.effective_range();
        let (lo, hi) = (lo - 0.1 * (hi - lo), hi + 0.1 * (hi - lo));
        let n = 20_000;
        let step = (hi - lo) / n as f64;
        let mut prev = c.cdf.eval(lo);
        monotone = monotone.max(-prev).max(prev - 1.0);
        let mut tail_integral = 0.0;
        for i in 1..=n {
            let f = c.cdf.eval(lo + step * i as f64);
            monotone = monotone.max(prev - f).max(-f).max(f - 1.0);
            tail_integral += step * (1.0 - 0.5 * (f + prev));
            prev = f;
        }
        let mixture_mean = lo + tail_integral;
        let discrete_mean: f64 = pmf.points().iter().zip(pmf.probs()).map(|(z, p)| z * p).sum();
        let lw = law(&c.model);
        let eta = (1.0 - MU) * c.a;
        let continuous_mean = c.a * MU * lw.mean[hidx(c.h)] / (1.0 - eta);
        let sum = discrete_mean + continuous_mean;
        mean_rel = mean_rel.max((mixture_mean - sum).abs() / sum.abs());
    }
    let topo = reference_network();
    let s = topo.size() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 54));
    let mut nets: Vec<NetworkSpec> = [0.1, 0.25, 0.5, 0.75, 0.99, 1.0]
        .iter()
        .map(|&a| build_uniform_matrix_with(&topo, a).unwrap())
        .collect();
    for _ in 0..50 {
        let w: Vec<f64> = (0..topo.size()).map(|_| rng.random_range(0.01..1.0)).collect();
        nets.push(build_uniform_matrix(&topo, &w).unwrap());
    }
    let mut bound: f64 = 0.0;
    for net in &nets {
        for k in 0..net.size() {
            let a = net.self_weight(k);
            let q: f64 = (0..net.size()).filter(|&l| l != k).map(|l| net.weight(k, l).powi(2)).sum();
            bound = bound.max((1.0 - a).powi(2) / (s - 1.0) - q).max(q - (1.0 - a));
        }
    }
    let bound = bound.max(0.0);
    let monotone = monotone.max(0.0);
    Outcome {
        id: 10,
        name: "invariant_suite",
        passed: pmf_dev <= 1e-10 && monotone == 0.0 && bound <= 1e-15 && mean_rel <= 0.01,
        measured: format!("pmf {pmf_dev:.1e} / monotone {monotone:.1e} / bounds {bound:.1e} / mean {mean_rel:.2e}"),
        tolerance: "1e-10 / 0 / 1e-15 / 0.01".into(),
        detail: format!("{} steady-state CDFs, {} combination matrices", cells.len(), nets.len()),
    }
}

fn main() -> ExitCode {
    let seed = std::env::var("ONEBIT_ACCEPTANCE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let start = Instant::now();
    let mut outcomes = vec![
        marginal_probabilities(),
        gaussian_series_exactness(),
        bernoulli_table_oracle(),
        truncation_bound(seed),
    ];
    let (ks_outcome, cells) = steady_state_cdfs(seed);
    outcomes.push(ks_outcome);
    outcomes.push(normal_limit(seed));
    outcomes.push(roc_consistency(seed));
    outcomes.push(adaptivity(seed));
    outcomes.push(closed_forms(seed));
    outcomes.push(invariants(&cells, seed));

    println!("acceptance suite, seed {seed}");
    for o in &outcomes {
        println!(
            "{} criterion {:>2} {}: measured {} (tolerance {}) {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.measured,
            o.tolerance,
            o.detail
        );
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "{} criteria, {failed} failed, {:.1} s",
        outcomes.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
