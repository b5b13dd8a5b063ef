//! Bernoulli-convolution tables against brute-force enumeration of digit
//! patterns.

use std::collections::BTreeMap;

use onebit_core::discrete::{
    convolve, first_order_neglected_mass, second_order_neglected_mass, table_rows, ApproxOrder, BernoulliApproxSpec, DiscretePmf,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PS: [f64; 4] = [0.67, 0.76, 0.87, 0.9];
const ETAS: [f64; 3] = [0.09, 0.225, 0.45];

/// Truncated value `sum_{i<omega} (1-eta) eta^i b_i + eta^omega`.
fn zhat(minus: &[bool], eta: f64) -> f64 {
    let head: f64 = minus
        .iter()
        .enumerate()
        .map(|(i, &m)| (1.0 - eta) * eta.powi(i as i32) * if m { -1.0 } else { 1.0 })
        .sum();
    head + eta.powi(minus.len() as i32)
}

fn pattern(mask: u32, omega: usize) -> Vec<bool> {
    (0..omega).map(|i| mask >> i & 1 == 1).collect()
}

type Key = (Option<usize>, Option<usize>);

/// Row each pattern is charged to: leading minus positions kept, every
/// later digit starred.
fn representative(minus: &[bool], order: ApproxOrder) -> Key {
    let mut pos = minus.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i);
    let first = pos.next();
    let second = match order {
        ApproxOrder::First => None,
        ApproxOrder::Second => pos.next(),
    };
    (first, second)
}

fn enumerate(p: f64, eta: f64, omega: usize, order: ApproxOrder) -> BTreeMap<Key, (f64, f64)> {
    let mut rows = BTreeMap::new();
    for mask in 0..1u32 << omega {
        let minus = pattern(mask, omega);
        let k = minus.iter().filter(|&&m| m).count();
        let prob = (1.0 - p).powi(k as i32) * p.powi((omega - k) as i32);
        let key = representative(&minus, order);
        let mut rep = vec![false; omega];
        for i in [key.0, key.1].into_iter().flatten() {
            rep[i] = true;
        }
        let entry = rows.entry(key).or_insert((zhat(&rep, eta), 0.0));
        entry.1 += prob;
    }
    rows
}

#[test]
fn tables_match_pattern_enumeration() {
    for order in [ApproxOrder::First, ApproxOrder::Second] {
        for omega in 1..=12 {
            for p in PS {
                for eta in ETAS {
                    let spec = BernoulliApproxSpec { p, eta, omega, order };
                    let table = table_rows(&spec).unwrap();
                    let oracle = enumerate(p, eta, omega, order);
                    assert_eq!(table.len(), oracle.len(), "{spec:?}");
                    for row in &table {
                        let (value, prob) = oracle[&(row.first_minus, row.second_minus)];
                        assert!((row.prob - prob).abs() <= 1e-14, "{spec:?} {row:?} oracle {prob}");
                        assert!((row.value - value).abs() <= 1e-14, "{spec:?} {row:?} oracle {value}");
                    }
                }
            }
        }
    }
}

#[test]
fn neglected_masses_match_enumeration() {
    for omega in 1..=12 {
        for p in PS {
            let mut two = 0.0;
            let mut three = 0.0;
            for mask in 0..1u32 << omega {
                let k = mask.count_ones() as usize;
                let prob = (1.0 - p).powi(k as i32) * p.powi((omega - k) as i32);
                if k >= 2 {
                    two += prob;
                }
                if k >= 3 {
                    three += prob;
                }
            }
            assert!((first_order_neglected_mass(p, omega) - two).abs() < 1e-13);
            assert!((second_order_neglected_mass(p, omega) - three).abs() < 1e-13);
        }
    }
}

#[test]
fn truncation_error_is_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    for omega in 1..=12 {
        for eta in ETAS {
            let bound = 2.0 * eta.powi(omega as i32);
            for mask in 0..1u32 << omega {
                let minus = pattern(mask, omega);
                let zh = zhat(&minus, eta);
                let head = zh - eta.powi(omega as i32);
                let mut tails = vec![vec![false; 80], vec![true; 80]];
                tails.push((0..80).map(|_| rng.random_bool(0.3)).collect());
                for tail in tails {
                    let t: f64 = tail
                        .iter()
                        .enumerate()
                        .map(|(i, &m)| (1.0 - eta) * eta.powi((omega + i) as i32) * if m { -1.0 } else { 1.0 })
                        .sum();
                    let err = zh - (head + t);
                    assert!(err >= -1e-15 && err <= bound + 1e-15, "omega {omega} eta {eta}: {err}");
                }
            }
        }
    }
}

#[test]
fn fair_half_digits_give_uniform_grid() {
    let omega = 10;
    let eta: f64 = 0.5;
    let digits: Vec<DiscretePmf> = (0..omega)
        .map(|i| {
            let w = (1.0 - eta) * eta.powi(i);
            DiscretePmf::new(vec![-w, w], vec![0.5, 0.5]).unwrap()
        })
        .collect();
    let z = convolve(&digits, 0.0, usize::MAX).unwrap().affine(1.0, eta.powi(omega));
    assert_eq!(z.len(), 1 << omega);
    let step = 2.0 / (1 << omega) as f64;
    for (i, (x, p)) in z.iter().enumerate() {
        assert!((x - (-1.0 + step * (i + 1) as f64)).abs() < 1e-12);
        assert!((p - 1.0 / (1 << omega) as f64).abs() < 1e-15);
    }
    // the atoms sit at the right ends of equal cells of (-1, 1)
    for u in [-0.9, -0.3, 0.0, 0.41, 0.77] {
        assert!((z.cdf(u) - (u + 1.0) / 2.0).abs() <= step / 2.0 + 1e-12);
    }
}
