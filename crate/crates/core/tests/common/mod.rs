//! Independent reference implementations used as test oracles. Everything here is
//! written directly from the defining sums with `f64` trigonometry, sharing no code
//! with the library beyond its data types.
#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use ddmod::{FrameConfig, SeededRng, SpreadingFunction, C};

pub type Cx = C<f64>;

pub fn standard_frame() -> FrameConfig<f64> {
    FrameConfig::new(13, 16, 30e3).unwrap()
}

pub fn cis(theta: f64) -> Cx {
    Cx::new(theta.cos(), theta.sin())
}

fn md(x: i64, n: usize) -> usize {
    x.rem_euclid(n as i64) as usize
}

pub fn random_vec(len: usize, rng: &mut SeededRng) -> Vec<Cx> {
    (0..len).map(|_| rng.complex_normal(1.0)).collect()
}

/// `taps` random positions anywhere on the torus with Gaussian gains.
pub fn random_sparse_channel(cfg: &FrameConfig<f64>, taps: usize, rng: &mut SeededRng) -> SpreadingFunction<f64> {
    let mn = cfg.mn() as i64;
    SpreadingFunction::from_taps(
        cfg,
        (0..taps).map(|_| {
            let k = rng.below(mn as usize) as i64;
            let l = rng.below(mn as usize) as i64;
            (k, l, rng.complex_normal(1.0))
        }),
    )
}

/// `taps` random positions inside `k ∈ [0, M)`, `l ∈ [−⌊N/2⌋, ⌈N/2⌉)`.
pub fn random_window_channel(cfg: &FrameConfig<f64>, taps: usize, rng: &mut SeededRng) -> SpreadingFunction<f64> {
    let (m, n) = (cfg.m(), cfg.n());
    SpreadingFunction::from_taps(
        cfg,
        (0..taps).map(|_| {
            let k = rng.below(m) as i64;
            let l = rng.below(n) as i64 - (n / 2) as i64;
            (k, l, rng.complex_normal(1.0))
        }),
    )
}

pub fn dense_taps(h: &SpreadingFunction<f64>) -> Vec<Vec<Cx>> {
    let mn = h.cfg().mn();
    let mut d = vec![vec![Cx::new(0.0, 0.0); mn]; mn];
    for ((k, l), v) in h.taps() {
        d[k][l] += v;
    }
    d
}

/// Full `O(MN³)` evaluation of `y[n] = Σ_{k,l} h[k,l] x[(n−k)] e^{j2πl(n−k)/MN}`.
pub fn brute_discrete_channel(h: &[Vec<Cx>], x: &[Cx]) -> Vec<Cx> {
    let mn = x.len();
    (0..mn)
        .map(|n| {
            let mut acc = Cx::new(0.0, 0.0);
            for (k, row) in h.iter().enumerate() {
                let shifted = n as i64 - k as i64;
                let xv = x[md(shifted, mn)];
                for (l, hv) in row.iter().enumerate() {
                    if *hv != Cx::new(0.0, 0.0) {
                        acc += hv * xv * cis(2.0 * PI * (l as f64) * (shifted as f64) / mn as f64);
                    }
                }
            }
            acc
        })
        .collect()
}

/// `A[k,l] = Σ_n y[n] x*[(n−k)] e^{−j2πl(n−k)/MN}` by the direct double sum.
pub fn brute_cross_ambiguity(y: &[Cx], x: &[Cx], k: i64, l: i64) -> Cx {
    let mn = x.len();
    (0..mn)
        .map(|n| {
            let s = n as i64 - k;
            y[n] * x[md(s, mn)].conj() * cis(-2.0 * PI * (l as f64) * (s as f64) / mn as f64)
        })
        .sum()
}

/// Footnote formula evaluated over every `(k', l')`, as a dense grid.
pub fn brute_twisted(a: &[Vec<Cx>], b: &[Vec<Cx>]) -> Vec<Vec<Cx>> {
    let mn = a.len();
    let mut c = vec![vec![Cx::new(0.0, 0.0); mn]; mn];
    for (k, crow) in c.iter_mut().enumerate() {
        for (l, cv) in crow.iter_mut().enumerate() {
            for kp in 0..mn {
                for lp in 0..mn {
                    let bv = b[kp][lp];
                    if bv == Cx::new(0.0, 0.0) {
                        continue;
                    }
                    let av = a[md(k as i64 - kp as i64, mn)][md(l as i64 - lp as i64, mn)];
                    *cv += av * bv * cis(2.0 * PI * (kp as f64) * (l as f64 - lp as f64) / mn as f64);
                }
            }
        }
    }
    c
}

/// Dense solve by Gaussian elimination with partial pivoting.
pub fn lu_solve(mut a: Vec<Vec<Cx>>, mut b: Vec<Cx>) -> Vec<Cx> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].norm().partial_cmp(&a[j][col].norm()).unwrap())
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f == Cx::new(0.0, 0.0) {
                continue;
            }
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    let mut x = vec![Cx::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    x
}

/// MMSE through the other normal-equation form, `(HᴴH + σ²I)^{-1} Hᴴ r`.
pub fn mmse_oracle(h: &[Vec<Cx>], r: &[Cx], noise_var: f64) -> Vec<Cx> {
    let n = h.len();
    let cols = h[0].len();
    let mut a = vec![vec![Cx::new(0.0, 0.0); cols]; cols];
    for i in 0..cols {
        for j in 0..cols {
            a[i][j] = (0..n).map(|k| h[k][i].conj() * h[k][j]).sum();
        }
        a[i][i] += noise_var;
    }
    let rhs: Vec<Cx> = (0..cols).map(|i| (0..n).map(|k| h[k][i].conj() * r[k]).sum()).collect();
    lu_solve(a, rhs)
}

pub fn max_diff(a: &[Cx], b: &[Cx]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
