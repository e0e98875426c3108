//! Independent reference implementations used by the integration and
//! acceptance tests. They favour the most literal formulation over speed.
#![allow(dead_code)]

use std::f64::consts::PI;

use fpverify::graph::MinutiaeGraph;
use fpverify::Point2;

pub fn euclid(a: Point2, b: Point2) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// Every distance from `a[i]` to `b`, nearest first picked by a plain loop.
fn min_dists(a: &[Point2], b: &[Point2]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len());
    for &p in a {
        let mut m = f64::INFINITY;
        for &q in b {
            let d = euclid(p, q);
            if d < m {
                m = d;
            }
        }
        out.push(m);
    }
    out
}

pub fn brute_directed_h(a: &[Point2], b: &[Point2]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for d in min_dists(a, b) {
        if d > m {
            m = d;
        }
    }
    m
}

pub fn brute_hausdorff(a: &[Point2], b: &[Point2]) -> f64 {
    brute_directed_h(a, b).max(brute_directed_h(b, a))
}

pub fn brute_directed_mhd(a: &[Point2], b: &[Point2]) -> f64 {
    let mut total = 0.0;
    for d in min_dists(a, b) {
        total += d;
    }
    total / a.len() as f64
}

pub fn brute_mhd(a: &[Point2], b: &[Point2]) -> f64 {
    brute_directed_mhd(a, b).max(brute_directed_mhd(b, a))
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Edge pairs `(i, j)`, `i < j`, in a fixed order; bit `b` of a mask stands
/// for `pairs[b]`.
pub fn edge_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            v.push((i, j));
        }
    }
    v
}

pub fn graph_from_mask(n: usize, mask: u32) -> MinutiaeGraph {
    let pairs = edge_pairs(n);
    MinutiaeGraph::from_edges(n, pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &e)| e)).unwrap()
}

pub fn mask_connected(n: usize, mask: u32) -> bool {
    let pairs = edge_pairs(n);
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for (b, &(i, j)) in pairs.iter().enumerate() {
            if mask >> b & 1 == 1 {
                let w = if i == v { j } else if j == v { i } else { continue };
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Smallest edge mask over all relabelings: equal iff isomorphic.
pub fn canonical_mask(n: usize, mask: u32, perms: &[Vec<usize>]) -> u32 {
    let pairs = edge_pairs(n);
    let mut pos = vec![vec![0usize; n]; n];
    for (b, &(i, j)) in pairs.iter().enumerate() {
        pos[i][j] = b;
        pos[j][i] = b;
    }
    let edges: Vec<(usize, usize)> = pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &e)| e).collect();
    perms
        .iter()
        .map(|p| edges.iter().fold(0u32, |m, &(i, j)| m | 1 << pos[p[i]][p[j]]))
        .min()
        .unwrap()
}

/// Isomorphism by trying every vertex permutation.
pub fn perm_isomorphic(g1: &MinutiaeGraph, g2: &MinutiaeGraph) -> bool {
    let n = g1.vertex_count();
    if n != g2.vertex_count() || g1.edge_count() != g2.edge_count() {
        return false;
    }
    permutations(n)
        .iter()
        .any(|p| g1.edges().all(|(a, b)| g2.has_edge(p[a], p[b])))
}

pub fn sq(p: Point2, q: Point2) -> f64 {
    (p.x - q.x).powi(2) + (p.y - q.y).powi(2)
}

/// Global k-means optimum by enumerating every assignment with no empty
/// cluster.
pub fn brute_kmeans_optimum(points: &[Point2], k: usize) -> f64 {
    let n = points.len();
    let mut best = f64::INFINITY;
    let total = k.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let mut assign = vec![0; n];
        for a in assign.iter_mut() {
            *a = c % k;
            c /= k;
        }
        let mut sx = vec![0.0; k];
        let mut sy = vec![0.0; k];
        let mut cnt = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assign) {
            sx[a] += p.x;
            sy[a] += p.y;
            cnt[a] += 1;
        }
        if cnt.contains(&0) {
            continue;
        }
        let cost: f64 = points
            .iter()
            .zip(&assign)
            .map(|(p, &a)| sq(*p, Point2::new(sx[a] / cnt[a] as f64, sy[a] / cnt[a] as f64)))
            .sum();
        best = best.min(cost);
    }
    best
}

/// Ridge direction of block `(r, c)` of the image
/// `128 + 100 sin(2π(-x sin α + y cos α)/8)`, from its analytic gradient
/// sampled at every pixel of the block.
pub fn analytic_block_direction(alpha: f64, r: usize, c: usize) -> f64 {
    let (s, co) = alpha.sin_cos();
    let w = 2.0 * PI / 8.0;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for y in r * 16..(r + 1) * 16 {
        for x in c * 16..(c + 1) * 16 {
            let u = -(x as f64) * s + (y as f64) * co;
            let g = 100.0 * w * (w * u).cos();
            let gx = -s * g;
            let gy = co * g;
            sxx += gx * gx;
            syy += gy * gy;
            sxy += gx * gy;
        }
    }
    // the gradient is perpendicular to the ridges
    let grad = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    (grad + PI / 2.0).rem_euclid(PI)
}

pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// Winding number / 2π of the angle-doubled orientation `dir` on a circle of
/// `radius` around `(cx, cy)`, sampled finely.
pub fn winding_index(dir: impl Fn(f64, f64) -> f64, cx: f64, cy: f64, radius: f64) -> f64 {
    let steps = 720;
    let mut total = 0.0;
    let at = |i: usize| {
        let t = 2.0 * PI * i as f64 / steps as f64;
        dir(cx + radius * t.cos(), cy + radius * t.sin())
    };
    let mut prev = at(0);
    for i in 1..=steps {
        let cur = at(i % steps);
        let mut d = cur - prev;
        while d > PI / 2.0 {
            d -= PI;
        }
        while d <= -PI / 2.0 {
            d += PI;
        }
        total += d;
        prev = cur;
    }
    total / (2.0 * PI)
}
