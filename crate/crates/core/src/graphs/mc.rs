use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

use super::KGraph;

const CHUNK: u64 = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    fn exact(value: f64, samples: u64, seed: u64) -> Self {
        McEstimate {
            estimate: value,
            stderr: 0.0,
            samples,
            seed,
        }
    }

    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        (self.estimate - target).abs() <= sigmas * self.stderr + 1e-12
    }
}

/// Gradient of `arg((w - z)/(w - conj z))` in `(z.re, z.im, w.re, w.im)`.
fn angle_gradient(z: (f64, f64), w: (f64, f64)) -> [f64; 4] {
    let (ux, uy) = (w.0 - z.0, w.1 - z.1);
    let (vx, vy) = (w.0 - z.0, w.1 + z.1);
    let nu = ux * ux + uy * uy;
    let nv = vx * vx + vy * vy;
    let (aux, auy) = (-uy / nu, ux / nu);
    let (avx, avy) = (-vy / nv, vx / nv);
    [-aux + avx, -auy - avy, aux - avx, auy - avy]
}

fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty");
        if a[p][col] == 0.0 {
            return 0.0;
        }
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    det
}

fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Standard Cauchy draw and its density.
fn cauchy(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let x = (PI * (open_unit(rng) - 0.5)).tan();
    (x, 1.0 / (PI * (1.0 + x * x)))
}

/// One importance-weighted value of the pulled-back form. The first aerial
/// point sits at `i`; the rest are free, ground points ordered.
fn sample_value(n: usize, m: usize, edges: &[(usize, usize)], rng: &mut ChaCha8Rng) -> f64 {
    let mut pts = vec![(0.0, 1.0); n + m];
    let mut density = 1.0;
    for p in pts.iter_mut().take(n).skip(1) {
        let (x, px) = cauchy(rng);
        let (t, pt) = cauchy(rng);
        let y = t.abs();
        *p = (x, y);
        density *= px * 2.0 * pt;
    }
    for k in 0..m {
        let (r, pr) = cauchy(rng);
        pts[n + k] = (r, 0.0);
        density *= pr;
    }
    if (1..m).any(|k| pts[n + k - 1].0 >= pts[n + k].0) {
        return 0.0;
    }
    // column of each free coordinate: aerial k >= 1 -> (x, y), ground -> x
    let col = |p: usize, comp: usize| -> Option<usize> {
        if p == 0 {
            None
        } else if p < n {
            Some(2 * (p - 1) + comp)
        } else if comp == 0 {
            Some(2 * (n - 1) + (p - n))
        } else {
            None
        }
    };
    let dim = 2 * n;
    let mut jac = vec![vec![0.0; dim]; dim];
    for (e, &(s, t)) in edges.iter().enumerate() {
        let g = angle_gradient(pts[s], pts[t]);
        for (idx, (p, comp)) in [(s, 0), (s, 1), (t, 0), (t, 1)].into_iter().enumerate() {
            if let Some(c) = col(p, comp) {
                jac[e][c] += g[idx] / (2.0 * PI);
            }
        }
    }
    let v = determinant(jac) / density;
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// Integral of the product of normalized angle forms, one per edge `(source,
/// target)`, over the gauge-fixed configuration space. Repeated edges are
/// accepted here (the form then degenerates).
pub fn estimate_form_integral(n: usize, m: usize, edges: &[(usize, usize)], samples: u64, seed: u64) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    if edges.iter().any(|&(s, t)| s >= n || t >= n + m || s == t) {
        return Err(Error::InvalidGraph("edge outside the vertex set".into()));
    }
    if n == 0 {
        return Ok(McEstimate::exact(if edges.is_empty() { 1.0 } else { 0.0 }, samples, seed));
    }
    // form degree must equal the dimension 2n + m - 2
    if edges.len() != 2 * n || m != 2 {
        return Ok(McEstimate::exact(0.0, samples, seed));
    }
    let chunks = samples.div_ceil(CHUNK);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = CHUNK.min(samples - c * CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let v = sample_value(n, m, edges, &mut rng);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums.iter().fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    let nf = samples as f64;
    let mean = s / nf;
    let var = if samples > 1 { (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0) } else { 0.0 };
    Ok(McEstimate {
        estimate: mean,
        stderr: (var / nf).sqrt(),
        samples,
        seed,
    })
}

/// Monte-Carlo estimate of the weight of an admissible graph.
pub fn estimate_weight_mc(g: &KGraph, samples: u64, seed: u64) -> Result<McEstimate> {
    let edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .enumerate()
        .flat_map(|(v, [a, b])| [(v, *a), (v, *b)])
        .collect();
    estimate_form_integral(g.n_aerial(), g.n_ground(), &edges, samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_gradient_matches_finite_differences() {
        let phi = |z: (f64, f64), w: (f64, f64)| {
            let a = (w.1 - z.1).atan2(w.0 - z.0);
            let b = (w.1 + z.1).atan2(w.0 - z.0);
            a - b
        };
        let (z, w) = ((0.3, 1.2), (-0.7, 0.4));
        let g = angle_gradient(z, w);
        let h = 1e-6;
        let num = [
            (phi((z.0 + h, z.1), w) - phi((z.0 - h, z.1), w)) / (2.0 * h),
            (phi((z.0, z.1 + h), w) - phi((z.0, z.1 - h), w)) / (2.0 * h),
            (phi(z, (w.0 + h, w.1)) - phi(z, (w.0 - h, w.1))) / (2.0 * h),
            (phi(z, (w.0, w.1 + h)) - phi(z, (w.0, w.1 - h))) / (2.0 * h),
        ];
        for (a, b) in g.iter().zip(num) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(estimate_weight_mc(&KGraph::empty(2), 10, 1).unwrap().estimate, 1.0);
        assert!(estimate_weight_mc(&KGraph::empty(2), 0, 1).is_err());
        // one ground point leaves a form of the wrong degree
        assert_eq!(estimate_form_integral(1, 1, &[(0, 1)], 10, 1).unwrap().estimate, 0.0);
    }

    #[test]
    fn wedge_is_one_half_and_reproducible() {
        let w = KGraph::new(1, 2, vec![[1, 2]]).unwrap();
        let a = estimate_weight_mc(&w, 100_000, 7).unwrap();
        let b = estimate_weight_mc(&w, 100_000, 7).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        assert!(a.within(0.5, 3.0), "{a:?}");
        let r = estimate_weight_mc(&w.swapped(0).unwrap(), 100_000, 7).unwrap();
        assert!(r.within(-0.5, 3.0), "{r:?}");
    }

    #[test]
    fn double_edge_degenerates() {
        let e = estimate_form_integral(1, 2, &[(0, 1), (0, 1)], 20_000, 3).unwrap();
        assert!(e.estimate.abs() < 1e-9, "{e:?}");
    }
}
