//! Seeded generators for random technologies and scenarios.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use supconv::Technology;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `0 = t_0 < … < t_m = 1` with gaps of at least 0.1.
fn breakpoints(rng: &mut ChaCha8Rng, inner: usize) -> Vec<f64> {
    let mut raw: Vec<f64> = (0..inner).map(|_| rng.gen_range(0.1..0.9)).collect();
    raw.sort_by(f64::total_cmp);
    let mut t = vec![0.0];
    for v in raw {
        if v - t[t.len() - 1] >= 0.1 {
            t.push(v);
        }
    }
    t.push(1.0);
    t
}

/// Concave pwl firm: decreasing slopes, shifted up until nonnegative.
pub fn concave_pwl(rng: &mut ChaCha8Rng) -> Technology {
    let inner = rng.gen_range(0..4);
    let t = breakpoints(rng, inner);
    let mut slopes: Vec<f64> = (1..t.len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
    slopes.sort_by(|a, b| b.total_cmp(a));
    let mut y = vec![rng.gen_range(0.0..0.5)];
    for k in 1..t.len() {
        y.push(y[k - 1] + slopes[k - 1] * (t[k] - t[k - 1]));
    }
    let low = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let shift = (-low).max(0.0);
    Technology::pwl_simplex(t.iter().zip(&y).map(|(&a, &b)| [a, b + shift]).collect()).unwrap()
}

/// Arbitrary pwl firm, usually not concave.
pub fn bumpy_pwl(rng: &mut ChaCha8Rng) -> Technology {
    let inner = rng.gen_range(2..6);
    let t = breakpoints(rng, inner);
    Technology::pwl_simplex(t.iter().map(|&a| [a, rng.gen_range(0.0..1.0)]).collect()).unwrap()
}

fn simplex_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|v| v / s).collect();
    let head: f64 = w[..n - 1].iter().sum();
    w[n - 1] = 1.0 - head;
    w
}

/// A firm from one of the smooth or polyhedral parametric families.
pub fn parametric(rng: &mut ChaCha8Rng, n: usize) -> Technology {
    match rng.gen_range(0..4) {
        0 => Technology::cobb_douglas(simplex_weights(rng, n)).unwrap(),
        1 => Technology::leontief((0..n).map(|_| rng.gen_range(0.3..3.0)).collect()).unwrap(),
        2 => Technology::linear((0..n).map(|_| rng.gen_range(0.0..2.0)).collect()).unwrap(),
        _ => {
            let rho = *[-2.0, -0.5, 0.3, 0.6].choose(rng).unwrap();
            Technology::ces((0..n).map(|_| rng.gen_range(0.2..1.5)).collect(), rho).unwrap()
        }
    }
}

pub fn concave_tech(rng: &mut ChaCha8Rng, n: usize) -> Technology {
    if n == 2 && rng.gen_bool(0.3) {
        concave_pwl(rng)
    } else {
        parametric(rng, n)
    }
}

pub fn concave_scenario(rng: &mut ChaCha8Rng, n: usize, j: usize) -> Vec<Technology> {
    (0..j).map(|_| concave_tech(rng, n)).collect()
}

pub fn pwl_concave_scenario(rng: &mut ChaCha8Rng, j: usize) -> Vec<Technology> {
    (0..j).map(|_| concave_pwl(rng)).collect()
}

pub fn point(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn figure_one() -> Vec<Technology> {
    vec![
        Technology::pwl_simplex(vec![[0.0, 0.0], [0.2, 0.5], [0.4, 0.0], [1.0, 0.0]]).unwrap(),
        Technology::pwl_simplex(vec![[0.0, 0.0], [0.4, 0.6], [0.8, 0.0], [0.9, 0.5], [1.0, 0.0]]).unwrap(),
    ]
}

pub fn figure_two() -> Vec<Technology> {
    vec![
        Technology::cobb_douglas(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap(),
        Technology::cobb_douglas(vec![2.0 / 3.0, 1.0 / 3.0]).unwrap(),
    ]
}

pub fn figure_three() -> Vec<Technology> {
    vec![
        Technology::leontief(vec![2.0, 0.5]).unwrap(),
        Technology::leontief(vec![1.0, 1.0]).unwrap(),
        Technology::leontief(vec![0.5, 2.0]).unwrap(),
    ]
}

pub fn flat_level() -> f64 {
    2f64.powf(2.0 / 3.0) / 3.0
}
