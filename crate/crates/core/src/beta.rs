//! Flatness numbers: `β_p(x,t)` over balls, the dyadic `β(Q) = w(Q)/l(Q)`
//! and the sum `β²(K) = Σ β(Q)² l(Q)`.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::QuadratureMeasure;
use crate::scalespace::squared_distance;

/// Affine `d`-plane through `base` spanned by orthonormal `basis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub base: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
}

impl Plane {
    pub fn dist(&self, y: &[f64]) -> f64 {
        let mut v: Vec<f64> = y.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        for b in &self.basis {
            let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Weighted total-least-squares `d`-plane. `points` holds `n` coordinates
/// per point.
pub fn best_plane(points: &[f64], n: usize, weights: &[f64], d: usize) -> Result<Plane> {
    if n == 0 || points.len() != weights.len() * n {
        return Err(Error::contract("points/weights length mismatch"));
    }
    if d == 0 || d >= n {
        return Err(Error::contract(format!("need 1 <= d < n, got d={d}, n={n}")));
    }
    let m = weights.len();
    if m < d + 1 {
        return Err(Error::contract(format!("need at least {} points, got {m}", d + 1)));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::contract("weights must be nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::contract("total weight must be positive"));
    }
    let mut base = vec![0.0; n];
    for (i, w) in weights.iter().enumerate() {
        for c in 0..n {
            base[c] += w * points[i * n + c];
        }
    }
    base.iter_mut().for_each(|b| *b /= total);
    let mut mom = DMatrix::<f64>::zeros(n, n);
    for (i, w) in weights.iter().enumerate() {
        for r in 0..n {
            let vr = points[i * n + r] - base[r];
            for c in 0..n {
                mom[(r, c)] += w * vr * (points[i * n + c] - base[c]);
            }
        }
    }
    let eig = SymmetricEigen::new(mom);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let basis = order[..d]
        .iter()
        .map(|&k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
                if *first < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
            }
            v
        })
        .collect();
    Ok(Plane { base, basis })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaNorm {
    /// `t^{-d} Σ w_i (dist_i / t)^p`.
    Radius,
    /// `μ(B(x,t))^{-1} Σ w_i (dist_i / t)^p`.
    Mass,
}

impl std::str::FromStr for BetaNorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "radius" => Ok(BetaNorm::Radius),
            "mass" => Ok(BetaNorm::Mass),
            other => Err(Error::contract(format!("unknown beta normalization '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BetaP {
    One,
    Two,
    Inf,
}

impl std::str::FromStr for BetaP {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(BetaP::One),
            "2" => Ok(BetaP::Two),
            "inf" | "infinity" => Ok(BetaP::Inf),
            other => Err(Error::contract(format!("p must be 1, 2 or inf, got '{other}'"))),
        }
    }
}

impl std::fmt::Display for BetaP {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BetaP::One => "1",
            BetaP::Two => "2",
            BetaP::Inf => "inf",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaFit {
    pub beta: f64,
    pub plane: Plane,
}

const REFINE_TOL: f64 = 1e-10;
const REFINE_ITERS: usize = 500;

struct Ball {
    pts: Vec<f64>,
    w: Vec<f64>,
    n: usize,
}

impl Ball {
    fn objective(&self, plane: &Plane, p: BetaP, scale: f64, t: f64) -> f64 {
        let dists = self.pts.chunks(self.n).map(|y| plane.dist(y) / t);
        match p {
            BetaP::One => scale * dists.zip(&self.w).map(|(d, w)| w * d).sum::<f64>(),
            BetaP::Two => (scale * dists.zip(&self.w).map(|(d, w)| w * d * d).sum::<f64>()).sqrt(),
            BetaP::Inf => dists.fold(0.0, f64::max),
        }
    }
}

/// `β_p(x,t) = inf_P (norm · Σ_{|y-x|<t} w (dist(y,P)/t)^p)^{1/p}`.
///
/// `p = 2` is exact. `p = 1` refines the `p = 2` plane by reweighted fits;
/// `p = ∞` uses the minimal strip for curves in the plane and Lawson
/// reweighting otherwise. Returns `None` with fewer than `d + 1` points in
/// the ball.
pub fn beta_p(measure: &QuadratureMeasure, x: &[f64], t: f64, p: BetaP, d: usize, norm: BetaNorm) -> Result<Option<BetaFit>> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    if x.len() != measure.n {
        return Err(Error::contract("x must live in the ambient space of the measure"));
    }
    let n = measure.n;
    let mut ball = Ball {
        pts: Vec::new(),
        w: Vec::new(),
        n,
    };
    for i in 0..measure.len() {
        if squared_distance(x, measure.point(i)) < t * t {
            ball.pts.extend_from_slice(measure.point(i));
            ball.w.push(measure.weights()[i]);
        }
    }
    if ball.w.len() < d + 1 {
        return Ok(None);
    }
    let scale = match norm {
        BetaNorm::Radius => t.powi(-(d as i32)),
        BetaNorm::Mass => 1.0 / ball.w.iter().sum::<f64>(),
    };
    let start = best_plane(&ball.pts, n, &ball.w, d)?;
    let start_val = ball.objective(&start, p, scale, t);
    let (plane, beta) = match p {
        BetaP::Two => (start, start_val),
        BetaP::One => refine_l1(&ball, start, start_val, scale, t, d)?,
        BetaP::Inf if n == 2 && d == 1 => {
            let pts: Vec<[f64; 2]> = ball.pts.chunks(2).map(|c| [c[0], c[1]]).collect();
            let strip = min_width_strip(&pts);
            let plane = Plane {
                base: strip.mid.to_vec(),
                basis: vec![vec![-strip.normal[1], strip.normal[0]]],
            };
            let val = ball.objective(&plane, p, scale, t);
            if val <= start_val {
                (plane, val)
            } else {
                (start, start_val)
            }
        }
        BetaP::Inf => refine_linf(&ball, start, start_val, scale, t, d)?,
    };
    Ok(Some(BetaFit { beta, plane }))
}

fn refine_l1(ball: &Ball, start: Plane, start_val: f64, scale: f64, t: f64, d: usize) -> Result<(Plane, f64)> {
    let (mut best, mut best_val) = (start, start_val);
    let mut cur = best.clone();
    let floor = 1e-12 * t;
    for _ in 0..REFINE_ITERS {
        let w: Vec<f64> = ball
            .pts
            .chunks(ball.n)
            .zip(&ball.w)
            .map(|(y, w)| w / cur.dist(y).max(floor))
            .collect();
        cur = best_plane(&ball.pts, ball.n, &w, d)?;
        let val = ball.objective(&cur, BetaP::One, scale, t);
        let improved = best_val - val;
        if val < best_val {
            best = cur.clone();
            best_val = val;
        }
        if improved <= REFINE_TOL * best_val.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok((best, best_val))
}

fn refine_linf(ball: &Ball, start: Plane, start_val: f64, scale: f64, t: f64, d: usize) -> Result<(Plane, f64)> {
    let (mut best, mut best_val) = (start, start_val);
    let mut u = ball.w.clone();
    let mut cur = best.clone();
    let mut stall = 0;
    for _ in 0..REFINE_ITERS {
        let dists: Vec<f64> = ball.pts.chunks(ball.n).map(|y| cur.dist(y)).collect();
        let s: f64 = u.iter().zip(&dists).map(|(a, b)| a * b).sum();
        if !(s > 0.0) {
            break;
        }
        for (ui, di) in u.iter_mut().zip(&dists) {
            *ui *= di / s;
        }
        cur = best_plane(&ball.pts, ball.n, &u, d)?;
        let val = ball.objective(&cur, BetaP::Inf, scale, t);
        if val < best_val * (1.0 - REFINE_TOL) {
            best = cur.clone();
            best_val = val;
            stall = 0;
        } else {
            stall += 1;
            if stall >= 20 {
                break;
            }
        }
    }
    Ok((best, best_val))
}

/// Convex hull in counter-clockwise order without collinear points.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p: Vec<[f64; 2]> = points.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * p.len());
    for &q in p.iter().chain(p.iter().rev().skip(1)) {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
            hull.pop();
        }
        hull.push(q);
    }
    hull.pop();
    hull
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub width: f64,
    /// Unit normal of the strip.
    pub normal: [f64; 2],
    /// A point on the centre line.
    pub mid: [f64; 2],
}

/// Narrowest slab containing `points`, by rotating calipers on the hull.
pub fn min_width_strip(points: &[[f64; 2]]) -> Strip {
    let hull = convex_hull(points);
    match hull.len() {
        0 => {
            return Strip {
                width: 0.0,
                normal: [0.0, 1.0],
                mid: [0.0, 0.0],
            }
        }
        1 | 2 => {
            let a = hull[0];
            let b = *hull.last().unwrap();
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let l = dx.hypot(dy);
            let normal = if l > 0.0 { [-dy / l, dx / l] } else { [0.0, 1.0] };
            return Strip {
                width: 0.0,
                normal,
                mid: a,
            };
        }
        _ => {}
    }
    let h = hull.len();
    let height = |i: usize, q: [f64; 2]| {
        let a = hull[i];
        let b = hull[(i + 1) % h];
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        ((q[0] - a[0]) * dy - (q[1] - a[1]) * dx).abs() / dx.hypot(dy)
    };
    let mut best = Strip {
        width: f64::INFINITY,
        normal: [0.0, 1.0],
        mid: hull[0],
    };
    let mut j = 1;
    for i in 0..h {
        while height(i, hull[(j + 1) % h]) >= height(i, hull[j]) {
            j = (j + 1) % h;
            if j == i {
                break;
            }
        }
        let w = height(i, hull[j]);
        if w < best.width {
            let a = hull[i];
            let b = hull[(i + 1) % h];
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let l = dx.hypot(dy);
            let mut normal = [-dy / l, dx / l];
            // point the normal from the edge towards the far vertex
            let far = hull[j];
            if (far[0] - a[0]) * normal[0] + (far[1] - a[1]) * normal[1] < 0.0 {
                normal = [-normal[0], -normal[1]];
            }
            best = Strip {
                width: w,
                normal,
                mid: [a[0] + 0.5 * w * normal[0], a[1] + 0.5 * w * normal[1]],
            };
        }
    }
    best
}

/// `Q = [j 2^{-level}, (j+1) 2^{-level}] × [k 2^{-level}, (k+1) 2^{-level}]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicSquare {
    pub level: i32,
    pub j: i64,
    pub k: i64,
}

impl DyadicSquare {
    pub fn new(level: i32, j: i64, k: i64) -> Self {
        Self { level, j, k }
    }

    pub fn side(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    pub fn center(&self) -> [f64; 2] {
        let l = self.side();
        [(self.j as f64 + 0.5) * l, (self.k as f64 + 0.5) * l]
    }

    /// Closed `3Q` as `([x0, x1], [y0, y1])`.
    pub fn triple(&self) -> ([f64; 2], [f64; 2]) {
        let l = self.side();
        (
            [(self.j - 1) as f64 * l, (self.j + 2) as f64 * l],
            [(self.k - 1) as f64 * l, (self.k + 2) as f64 * l],
        )
    }

    pub fn triple_contains(&self, p: [f64; 2]) -> bool {
        let (x, y) = self.triple();
        p[0] >= x[0] && p[0] <= x[1] && p[1] >= y[0] && p[1] <= y[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicBeta {
    pub beta: f64,
    pub width: f64,
    pub normal: [f64; 2],
}

/// `β(Q) = w(Q)/l(Q)` for the narrowest strip holding `K ∩ 3Q`.
pub fn dyadic_beta(points: &[[f64; 2]], q: DyadicSquare) -> DyadicBeta {
    let inside: Vec<[f64; 2]> = points.iter().copied().filter(|p| q.triple_contains(*p)).collect();
    beta_of(&inside, q)
}

fn beta_of(inside: &[[f64; 2]], q: DyadicSquare) -> DyadicBeta {
    if inside.len() <= 1 {
        return DyadicBeta {
            beta: 0.0,
            width: 0.0,
            normal: [0.0, 1.0],
        };
    }
    let s = min_width_strip(inside);
    DyadicBeta {
        beta: s.width / q.side(),
        width: s.width,
        normal: s.normal,
    }
}

/// Nonzero `β(Q)` per square for every level in `level_min..=level_max`.
pub fn dyadic_betas(points: &[[f64; 2]], level_min: i32, level_max: i32) -> Result<Vec<(DyadicSquare, f64)>> {
    if level_min > level_max {
        return Err(Error::contract("level_min must not exceed level_max"));
    }
    if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::contract("points must be finite"));
    }
    let mut out = Vec::new();
    for level in level_min..=level_max {
        let l = (-(level as f64)).exp2();
        let mut cells: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            cells
                .entry(((p[0] / l).floor() as i64, (p[1] / l).floor() as i64))
                .or_default()
                .push(i);
        }
        // a closed 3Q can only see points from the 5x5 block of cells around Q
        let mut candidates = BTreeSet::new();
        for &(cx, cy) in cells.keys() {
            for dj in -2..=2 {
                for dk in -2..=2 {
                    candidates.insert((cx + dj, cy + dk));
                }
            }
        }
        for (j, k) in candidates {
            let q = DyadicSquare::new(level, j, k);
            let mut inside = Vec::new();
            for dj in -2..=2 {
                for dk in -2..=2 {
                    if let Some(ids) = cells.get(&(j + dj, k + dk)) {
                        inside.extend(ids.iter().map(|&i| points[i]).filter(|p| q.triple_contains(*p)));
                    }
                }
            }
            let b = beta_of(&inside, q).beta;
            if b > 0.0 {
                out.push((q, b));
            }
        }
    }
    Ok(out)
}

/// `β²(K) = Σ β(Q)² l(Q)` over the levels `level_min..=level_max`.
pub fn tsp_sum(points: &[[f64; 2]], level_min: i32, level_max: i32) -> Result<f64> {
    Ok(dyadic_betas(points, level_min, level_max)?
        .iter()
        .fold(0.0, |acc, (q, b)| acc + b * b * q.side()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(pts: &[[f64; 2]]) -> QuadratureMeasure {
        QuadratureMeasure::new(1, 2, pts.iter().flatten().copied().collect(), vec![1.0; pts.len()]).unwrap()
    }

    #[test]
    fn collinear_plane() {
        let pts = [1.0, 2.0, 2.0, 4.0, 3.0, 6.0];
        let p = best_plane(&pts, 2, &[1.0; 3], 1).unwrap();
        for y in pts.chunks(2) {
            assert!(p.dist(y) < 1e-12);
        }
        assert!(p.basis[0][0] > 0.0);
    }

    #[test]
    fn square_corners_tie() {
        let pts = [0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0];
        let p = best_plane(&pts, 2, &[1.0; 4], 1).unwrap();
        let d: Vec<f64> = pts.chunks(2).map(|y| p.dist(y)).collect();
        assert!(d.iter().all(|x| (x - d[0]).abs() < 1e-12));
        assert_eq!(p, best_plane(&pts, 2, &[1.0; 4], 1).unwrap());
    }

    #[test]
    fn random_search_never_wins() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<f64> = (0..60).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w = vec![1.0; 20];
        let best = best_plane(&pts, 3, &w, 2).unwrap();
        let obj = |p: &Plane| pts.chunks(3).map(|y| p.dist(y).powi(2)).sum::<f64>();
        let v = obj(&best);
        for _ in 0..1000 {
            let base: Vec<f64> = (0..3).map(|_| rng.random_range(-0.5..0.5)).collect();
            let raw: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let nrm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            let normal: Vec<f64> = raw.iter().map(|x| x / nrm).collect();
            // two vectors orthogonal to the normal
            let helper = if normal[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let c = |a: &[f64], b: &[f64]| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
            let u = c(&normal, &helper);
            let un = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            let u: Vec<f64> = u.iter().map(|x| x / un).collect();
            let v2 = c(&normal, &u).to_vec();
            let p = Plane { base, basis: vec![u, v2] };
            assert!(obj(&p) >= v - 1e-8);
        }
    }

    #[test]
    fn beta_values_on_lines_and_circles() {
        let pts: Vec<[f64; 2]> = (0..50).map(|i| [i as f64 * 0.02, 0.5 * i as f64 * 0.02]).collect();
        let mu = cloud(&pts);
        for p in [BetaP::One, BetaP::Two, BetaP::Inf] {
            let b = beta_p(&mu, &[0.5, 0.25], 0.3, p, 1, BetaNorm::Mass).unwrap().unwrap();
            assert!(b.beta <= 1e-12, "{p}: {}", b.beta);
        }
        assert!(beta_p(&mu, &[5.0, 5.0], 0.3, BetaP::Two, 1, BetaNorm::Mass).unwrap().is_none());

        let m = 2000;
        let circ: Vec<[f64; 2]> = (0..m)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                [a.cos(), a.sin()]
            })
            .collect();
        let mu = cloud(&circ);
        for p in [BetaP::One, BetaP::Two, BetaP::Inf] {
            let vals: Vec<f64> = [1.0, 0.5, 0.25, 0.125]
                .iter()
                .map(|&t| beta_p(&mu, &[1.0, 0.0], t, p, 1, BetaNorm::Mass).unwrap().unwrap().beta)
                .collect();
            assert!(vals.windows(2).all(|w| w[1] < w[0]), "{p}: {vals:?}");
        }
        // power-mean ordering
        let b: Vec<f64> = [BetaP::One, BetaP::Two, BetaP::Inf]
            .iter()
            .map(|&p| beta_p(&mu, &[1.0, 0.0], 0.5, p, 1, BetaNorm::Mass).unwrap().unwrap().beta)
            .collect();
        assert!(b[0] <= b[1] && b[1] <= b[2], "{b:?}");
        // β_∞ of the sampled arc of half-angle θ: (1 - cos θ)/2 / t
        let t = 0.5f64;
        let step = 2.0 * std::f64::consts::PI / m as f64;
        let theta = (2.0 * (t / 2.0).asin() / step).floor() * step;
        let expect = (1.0 - theta.cos()) / 2.0 / t;
        assert!((b[2] - expect).abs() < 1e-9 * expect, "{} vs {expect}", b[2]);
    }

    #[test]
    fn strip_widths() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.3]];
        let s = min_width_strip(&tri);
        assert!((s.width - 0.3).abs() < 1e-15);
        let mut brute = f64::INFINITY;
        for i in 0..100_000 {
            let a = std::f64::consts::PI * i as f64 / 100_000.0;
            let (sn, cs) = a.sin_cos();
            let proj: Vec<f64> = tri.iter().map(|p| p[0] * cs + p[1] * sn).collect();
            let w = proj.iter().cloned().fold(f64::MIN, f64::max) - proj.iter().cloned().fold(f64::MAX, f64::min);
            brute = brute.min(w);
        }
        assert!((brute - s.width).abs() < 1e-6);
        assert_eq!(min_width_strip(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).width, 0.0);
    }

    #[test]
    fn dyadic_scale_invariance() {
        let pts = [[0.1, 0.2], [0.4, 0.25], [0.3, 0.6], [0.7, 0.5]];
        let q = DyadicSquare::new(1, 0, 0);
        let b = dyadic_beta(&pts, q);
        let big: Vec<[f64; 2]> = pts.iter().map(|p| [4.0 * p[0], 4.0 * p[1]]).collect();
        let b2 = dyadic_beta(&big, DyadicSquare::new(-1, 0, 0));
        assert_eq!(b.beta, b2.beta);
        assert!(b.beta > 0.0);
        assert_eq!(dyadic_beta(&pts[..1], q).beta, 0.0);
    }

    #[test]
    fn tsp_levels_add_up() {
        let pts: Vec<[f64; 2]> = (0..40)
            .map(|i| {
                let x = i as f64 / 39.0;
                [x, 0.3 * (7.0 * x).sin()]
            })
            .collect();
        let all = tsp_sum(&pts, 0, 6).unwrap();
        let parts = tsp_sum(&pts, 0, 2).unwrap() + tsp_sum(&pts, 3, 6).unwrap();
        assert!((all - parts).abs() < 1e-12 * all);
        let seg: Vec<[f64; 2]> = (0..40).map(|i| [i as f64 / 39.0, 0.5]).collect();
        assert_eq!(tsp_sum(&seg, 0, 6).unwrap(), 0.0);
        assert!(tsp_sum(&pts, 3, 2).is_err());
    }
}
