//! Clebsch-Gordan coefficients built from coupled states: repeated lowering
//! and orthogonalization on the product basis.
#![allow(dead_code)]

use std::collections::BTreeMap;

/// Product basis index of `(m1, m2)`, doubled quantum numbers.
pub fn index(two_j1: i32, two_j2: i32, two_m1: i32, two_m2: i32) -> usize {
    let i1 = ((two_j1 - two_m1) / 2) as usize;
    let i2 = ((two_j2 - two_m2) / 2) as usize;
    i1 * (two_j2 as usize + 1) + i2
}

/// `J₋ = J₁₋ + J₂₋` on a product-basis vector.
fn lower(v: &[f64], two_j1: i32, two_j2: i32) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    let ladder = |two_j: i32, two_m: i32| {
        let (j, m) = (two_j as f64 / 2.0, two_m as f64 / 2.0);
        ((j + m) * (j - m + 1.0)).sqrt()
    };
    for two_m1 in (-two_j1..=two_j1).step_by(2) {
        for two_m2 in (-two_j2..=two_j2).step_by(2) {
            let a = v[index(two_j1, two_j2, two_m1, two_m2)];
            if a == 0.0 {
                continue;
            }
            if two_m1 > -two_j1 {
                out[index(two_j1, two_j2, two_m1 - 2, two_m2)] += a * ladder(two_j1, two_m1);
            }
            if two_m2 > -two_j2 {
                out[index(two_j1, two_j2, two_m1, two_m2 - 2)] += a * ladder(two_j2, two_m2);
            }
        }
    }
    out
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v {
        *x /= n;
    }
}

/// Coupled states `|J M⟩` keyed by doubled `(J, M)`.
pub fn coupled(two_j1: i32, two_j2: i32) -> BTreeMap<(i32, i32), Vec<f64>> {
    let dim = ((two_j1 + 1) * (two_j2 + 1)) as usize;
    let mut states: BTreeMap<(i32, i32), Vec<f64>> = BTreeMap::new();
    let mut two_j = two_j1 + two_j2;
    while two_j >= (two_j1 - two_j2).abs() {
        // generic seed in the M = J subspace, minus its higher-J part
        let mut top = vec![0.0; dim];
        for two_m1 in (-two_j1..=two_j1).step_by(2) {
            let two_m2 = two_j - two_m1;
            if two_m2.abs() <= two_j2 {
                top[index(two_j1, two_j2, two_m1, two_m2)] = 1.0 + 0.1 * two_m1 as f64;
            }
        }
        // twice, to keep the orthogonalization at machine precision
        for ((_, two_m), s) in states.iter().chain(states.iter()) {
            if *two_m == two_j {
                let d: f64 = top.iter().zip(s).map(|(a, b)| a * b).sum();
                for (a, b) in top.iter_mut().zip(s) {
                    *a -= d * b;
                }
            }
        }
        normalize(&mut top);
        // phase convention: ⟨j1 j1; j2 J−j1 | J J⟩ > 0
        let lead = index(two_j1, two_j2, two_j1, two_j - two_j1);
        if top[lead] < 0.0 {
            for x in &mut top {
                *x = -*x;
            }
        }
        let mut v = top;
        let mut two_m = two_j;
        loop {
            states.insert((two_j, two_m), v.clone());
            if two_m == -two_j {
                break;
            }
            v = lower(&v, two_j1, two_j2);
            normalize(&mut v);
            two_m -= 2;
        }
        two_j -= 2;
    }
    states
}

/// Brute-force CG with integer arguments.
pub fn cg(states: &BTreeMap<(i32, i32), Vec<f64>>, j1: i32, m1: i32, j2: i32, m2: i32, j: i32, m: i32) -> f64 {
    if m1 + m2 != m {
        return 0.0;
    }
    states
        .get(&(2 * j, 2 * m))
        .map_or(0.0, |v| v[index(2 * j1, 2 * j2, 2 * m1, 2 * m2)])
}

/// Normalized spin-wave weights of the write family `alpha` for the
/// rubidium scheme: `|F=1, m⟩ → |F'=2, m⟩` (π), then `|F'=2, m⟩ → |F=2, m+α⟩`.
pub fn write_family(alpha: i32) -> Vec<f64> {
    let up = coupled(2, 2);
    let down = coupled(4, 2);
    let x = |m: i32| cg(&up, 1, m, 1, 0, 2, m) * cg(&down, 2, m, 1, alpha, 2, m + alpha);
    let mut w: Vec<f64> = (-1..=1)
        .filter(|&m| (m + alpha).abs() <= 1)
        .map(x)
        .filter(|v| *v != 0.0)
        .collect();
    let s = w[0].signum() / w.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut w {
        *v *= s;
    }
    w
}
