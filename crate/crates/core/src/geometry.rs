//! Sampled `d`-dimensional surfaces in `ℝⁿ` and the quadrature measures
//! built on them.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelParams, SUPPORT_MARGIN};
use crate::scalespace::squared_distance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    /// `z(r) = (r, A(r))`.
    LipschitzGraph,
    GeneralParametric,
}

/// Samples `z(r)` on a uniform box lattice in parameter space.
///
/// Lattice points are stored in C order (the last parameter axis varies
/// fastest); `samples` holds `n` coordinates per lattice point.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSurface {
    d: usize,
    n: usize,
    shape: Vec<usize>,
    h_r: f64,
    origin: Vec<f64>,
    samples: Vec<f64>,
    kind: SurfaceKind,
    closed: bool,
    explicit_weights: Option<Vec<f64>>,
    lipschitz: f64,
}

impl ParamSurface {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        d: usize,
        n: usize,
        shape: Vec<usize>,
        h_r: f64,
        origin: Vec<f64>,
        samples: Vec<f64>,
        kind: SurfaceKind,
        closed: bool,
    ) -> Result<Self> {
        if d < 1 || d >= n {
            return Err(Error::contract(format!("need 1 <= d < n, got d={d}, n={n}")));
        }
        if shape.len() != d || origin.len() != d {
            return Err(Error::contract("lattice shape/origin must have d entries"));
        }
        if !(h_r > 0.0) || !h_r.is_finite() {
            return Err(Error::contract(format!("parameter spacing must be positive, got {h_r}")));
        }
        let count: usize = shape.iter().product();
        if count == 0 || samples.len() != count * n {
            return Err(Error::contract(format!(
                "{} coordinates do not fill a {:?} lattice in R^{n}",
                samples.len(),
                shape
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("surface samples must be finite"));
        }
        let mut s = Self {
            d,
            n,
            shape,
            h_r,
            origin,
            samples,
            kind,
            closed,
            explicit_weights: None,
            lipschitz: 0.0,
        };
        if kind == SurfaceKind::LipschitzGraph {
            for i in 0..count {
                let r = s.param(i);
                let z = s.point(i);
                for k in 0..d {
                    if (z[k] - r[k]).abs() > 1e-9 * (1.0 + r[k].abs()) {
                        return Err(Error::contract(format!(
                            "graph sample {i}: leading coordinates must equal the parameter"
                        )));
                    }
                }
            }
        }
        s.lipschitz = s.estimate_lipschitz();
        Ok(s)
    }

    /// Graph `(r, A(r))` of a function sampled on the lattice.
    pub fn graph(shape: Vec<usize>, h_r: f64, origin: Vec<f64>, heights: &[Vec<f64>], closed: bool) -> Result<Self> {
        let d = shape.len();
        let count: usize = shape.iter().product();
        if heights.len() != count {
            return Err(Error::contract("one height vector per lattice point required"));
        }
        let m = heights.first().map_or(0, |h| h.len());
        let n = d + m;
        let mut samples = Vec::with_capacity(count * n);
        let strides = strides(&shape);
        for (i, hgt) in heights.iter().enumerate() {
            if hgt.len() != m {
                return Err(Error::contract("ragged graph heights"));
            }
            for k in 0..d {
                let idx = (i / strides[k]) % shape[k];
                samples.push(origin[k] + idx as f64 * h_r);
            }
            samples.extend_from_slice(hgt);
        }
        Self::new(d, n, shape, h_r, origin, samples, SurfaceKind::LipschitzGraph, closed)
    }

    pub fn with_explicit_weights(mut self, w: Vec<f64>) -> Result<Self> {
        if w.len() != self.len() {
            return Err(Error::contract("explicit weights must match sample count"));
        }
        if w.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::contract("explicit weights must be positive and finite"));
        }
        self.explicit_weights = Some(w);
        Ok(self)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn h_r(&self) -> f64 {
        self.h_r
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn explicit_weights(&self) -> Option<&[f64]> {
        self.explicit_weights.as_deref()
    }

    pub fn len(&self) -> usize {
        self.samples.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.samples[i * self.n..(i + 1) * self.n]
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Lattice multi-index of sample `i`.
    pub fn lattice_index(&self, i: usize) -> Vec<usize> {
        let st = strides(&self.shape);
        (0..self.d).map(|k| (i / st[k]) % self.shape[k]).collect()
    }

    pub fn param(&self, i: usize) -> Vec<f64> {
        self.lattice_index(i)
            .iter()
            .zip(&self.origin)
            .map(|(&j, o)| o + j as f64 * self.h_r)
            .collect()
    }

    /// Largest finite-difference slope of `A` between lattice neighbours
    /// (zero for non-graph surfaces).
    pub fn lipschitz_estimate(&self) -> f64 {
        self.lipschitz
    }

    fn estimate_lipschitz(&self) -> f64 {
        if self.kind != SurfaceKind::LipschitzGraph {
            return 0.0;
        }
        let mut best = 0.0f64;
        for i in 0..self.len() {
            for k in 0..self.d {
                if let Some(j) = self.neighbour(i, k, 1) {
                    let a = &self.point(i)[self.d..];
                    let b = &self.point(j)[self.d..];
                    best = best.max(squared_distance(a, b).sqrt() / self.h_r);
                }
            }
        }
        best
    }

    /// Neighbour of `i` one step along axis `k` in direction `dir = ±1`,
    /// wrapping when closed.
    pub fn neighbour(&self, i: usize, k: usize, dir: i64) -> Option<usize> {
        let st = strides(&self.shape);
        let idx = ((i / st[k]) % self.shape[k]) as i64;
        let n = self.shape[k] as i64;
        let j = idx + dir;
        let j = if self.closed {
            j.rem_euclid(n)
        } else if (0..n).contains(&j) {
            j
        } else {
            return None;
        };
        Some((i as i64 + (j - idx) * st[k] as i64) as usize)
    }

    /// Samples on the edge of the parameter box (none when closed).
    pub fn boundary_samples(&self) -> Vec<usize> {
        if self.closed {
            return Vec::new();
        }
        (0..self.len())
            .filter(|&i| self.lattice_index(i).iter().zip(&self.shape).any(|(&j, &n)| j == 0 || j + 1 == n))
            .collect()
    }

    /// Largest ambient distance between lattice neighbours.
    pub fn ambient_spacing(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.len() {
            for k in 0..self.d {
                if let Some(j) = self.neighbour(i, k, 1) {
                    best = best.max(squared_distance(self.point(i), self.point(j)));
                }
            }
        }
        best.sqrt()
    }
}

pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut st = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        st[k] = st[k + 1] * shape[k + 1];
    }
    st
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramWeights {
    /// `‖z'(r)‖ h_r^d` per lattice point.
    pub weights: Vec<f64>,
    /// `sup ‖z'(r)‖` over the lattice.
    pub gamma_star: f64,
    /// Lattice points whose Gram determinant vanished; their weight is 0.
    pub degenerate: Vec<usize>,
}

/// `sqrt(det g)` from difference quotients.
///
/// Each lattice point averages the Gram factor over every combination of
/// forward and backward differences that stays on the lattice. On smooth
/// stretches this agrees with central differences to second order; at
/// kinks it is the one-sided average.
pub fn gram_weights(surface: &ParamSurface) -> Result<GramWeights> {
    let d = surface.d;
    if surface.shape.iter().any(|&m| m < 2) {
        return Err(Error::contract("gram weights need >= 2 lattice points per axis"));
    }
    let h = surface.h_r;
    let cell = h.powi(d as i32);
    let mut weights = Vec::with_capacity(surface.len());
    let mut degenerate = Vec::new();
    let mut gamma_star = 0.0f64;
    let mut jac = DMatrix::<f64>::zeros(surface.n, d);
    for i in 0..surface.len() {
        let mut total = 0.0;
        let mut combos = 0usize;
        for mask in 0..(1usize << d) {
            let mut ok = true;
            for k in 0..d {
                let dir = if mask >> k & 1 == 0 { 1 } else { -1 };
                match surface.neighbour(i, k, dir) {
                    Some(j) => {
                        let (a, b) = (surface.point(i), surface.point(j));
                        for c in 0..surface.n {
                            jac[(c, k)] = (b[c] - a[c]) / (dir as f64 * h);
                        }
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let g = jac.transpose() * &jac;
            let det = g.determinant();
            combos += 1;
            if det > 0.0 {
                total += det.sqrt();
            }
        }
        let factor = if combos == 0 { 0.0 } else { total / combos as f64 };
        if !(factor > 1e-12) {
            degenerate.push(i);
            weights.push(0.0);
        } else {
            gamma_star = gamma_star.max(factor);
            weights.push(factor * cell);
        }
    }
    Ok(GramWeights {
        weights,
        gamma_star,
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMode {
    /// `w_i = ‖z'(r_i)‖ h_r^d`.
    Surface,
    /// `w_i = h_r^d`.
    HausdorffParam,
    /// Weights supplied with the samples.
    Explicit,
}

impl std::str::FromStr for MeasureMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "surface" => Ok(MeasureMode::Surface),
            "hausdorff" | "hausdorff_param" => Ok(MeasureMode::HausdorffParam),
            "explicit" => Ok(MeasureMode::Explicit),
            other => Err(Error::contract(format!("unknown measure mode '{other}'"))),
        }
    }
}

/// Weighted point cloud standing in for a measure on `Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureMeasure {
    /// Intrinsic dimension of the measure.
    pub d: usize,
    /// Ambient dimension.
    pub n: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    pub mode: MeasureMode,
    /// Lattice sample behind each measure point.
    pub sample_ids: Vec<usize>,
    /// Measure indices of samples on the parameter-box edge.
    pub boundary: Vec<usize>,
    /// `sup ‖z'‖` when known (surface mode), else 1.
    pub gamma_star: f64,
    /// Samples dropped because of a degenerate Jacobian.
    pub degenerate: usize,
}

impl QuadratureMeasure {
    pub fn new(d: usize, n: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if n == 0 || !points.len().is_multiple_of(n) || points.len() / n != weights.len() {
            return Err(Error::contract("points/weights length mismatch"));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::contract("measure weights must be positive and finite"));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("measure points must be finite"));
        }
        let m = weights.len();
        Ok(Self {
            d,
            n,
            points,
            weights,
            mode: MeasureMode::Explicit,
            sample_ids: (0..m).collect(),
            boundary: Vec::new(),
            gamma_star: 1.0,
            degenerate: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.n..(i + 1) * self.n]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Bounding-box diagonal, an upper bound for the diameter.
    pub fn diameter(&self) -> f64 {
        let mut lo = vec![f64::INFINITY; self.n];
        let mut hi = vec![f64::NEG_INFINITY; self.n];
        for i in 0..self.len() {
            for (c, v) in self.point(i).iter().enumerate() {
                lo[c] = lo[c].min(*v);
                hi[c] = hi[c].max(*v);
            }
        }
        lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }

    /// Ambient distance from point `i` to the nearest edge sample
    /// (`∞` without an edge).
    pub fn boundary_distance(&self, i: usize) -> f64 {
        self.boundary
            .iter()
            .map(|&b| squared_distance(self.point(i), self.point(b)))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    /// Largest nearest-neighbour distance, i.e. the coarsest sample gap.
    pub fn max_gap(&self) -> f64 {
        let m = self.len();
        let mut worst = 0.0f64;
        for i in 0..m {
            let mut best = f64::INFINITY;
            for j in 0..m {
                if i != j {
                    best = best.min(squared_distance(self.point(i), self.point(j)));
                }
            }
            if best.is_finite() {
                worst = worst.max(best);
            }
        }
        worst.sqrt()
    }
}

/// Quadrature measure on the samples of `surface`.
pub fn as_measure(surface: &ParamSurface, mode: MeasureMode) -> Result<QuadratureMeasure> {
    let count = surface.len();
    let cell = surface.h_r.powi(surface.d as i32);
    let (weights, gamma_star, degenerate): (Vec<f64>, f64, Vec<usize>) = match mode {
        MeasureMode::HausdorffParam => (vec![cell; count], 1.0, Vec::new()),
        MeasureMode::Surface => {
            let g = gram_weights(surface)?;
            (g.weights, g.gamma_star, g.degenerate)
        }
        MeasureMode::Explicit => match &surface.explicit_weights {
            Some(w) => (w.clone(), 1.0, Vec::new()),
            None => return Err(Error::contract("explicit measure mode requires supplied weights")),
        },
    };
    let keep: Vec<usize> = (0..count).filter(|i| weights[*i] > 0.0).collect();
    let mut points = Vec::with_capacity(keep.len() * surface.n);
    for &i in &keep {
        points.extend_from_slice(surface.point(i));
    }
    let w: Vec<f64> = keep.iter().map(|&i| weights[i]).collect();
    let mut m = QuadratureMeasure::new(surface.d, surface.n, points, w)?;
    m.mode = mode;
    m.gamma_star = gamma_star;
    m.degenerate = degenerate.len();
    let edge: std::collections::BTreeSet<usize> = surface.boundary_samples().into_iter().collect();
    m.boundary = keep.iter().enumerate().filter(|(_, s)| edge.contains(s)).map(|(k, _)| k).collect();
    m.sample_ids = keep;
    Ok(m)
}

/// `y ↦ δ Q y + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transform {
    /// Row-major `n × n` orthogonal matrix.
    pub rotation: Vec<f64>,
    pub translation: Vec<f64>,
    pub dilation: f64,
}

impl Transform {
    pub fn identity(n: usize) -> Self {
        let mut rotation = vec![0.0; n * n];
        for i in 0..n {
            rotation[i * n + i] = 1.0;
        }
        Self {
            rotation,
            translation: vec![0.0; n],
            dilation: 1.0,
        }
    }

    pub fn dilation(n: usize, delta: f64) -> Self {
        Self {
            dilation: delta,
            ..Self::identity(n)
        }
    }

    /// Rotation by `angle` in the `(i, j)` coordinate plane.
    pub fn plane_rotation(n: usize, i: usize, j: usize, angle: f64) -> Self {
        let mut t = Self::identity(n);
        let (s, c) = angle.sin_cos();
        t.rotation[i * n + i] = c;
        t.rotation[i * n + j] = -s;
        t.rotation[j * n + i] = s;
        t.rotation[j * n + j] = c;
        t
    }

    pub fn with_translation(mut self, b: Vec<f64>) -> Self {
        self.translation = b;
        self
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    fn matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_row_slice(n, n, &self.rotation)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Transform) -> Transform {
        let q2 = self.matrix();
        let q = &q2 * inner.matrix();
        let b1 = nalgebra::DVector::from_column_slice(&inner.translation);
        let b = (&q2 * b1) * self.dilation + nalgebra::DVector::from_column_slice(&self.translation);
        let n = self.dim();
        let mut rotation = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                rotation.push(q[(r, c)]);
            }
        }
        Transform {
            rotation,
            translation: b.iter().copied().collect(),
            dilation: self.dilation * inner.dilation,
        }
    }

    pub fn apply_point(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|r| {
                let dot: f64 = (0..n).map(|c| self.rotation[r * n + c] * y[c]).sum();
                self.dilation * dot + self.translation[r]
            })
            .collect()
    }

    fn check(&self) -> Result<()> {
        let n = self.dim();
        if self.rotation.len() != n * n {
            return Err(Error::contract("rotation must be n x n"));
        }
        if !(self.dilation > 0.0) || !self.dilation.is_finite() {
            return Err(Error::contract("dilation must be positive"));
        }
        let q = self.matrix();
        let err = (q.transpose() * &q - DMatrix::<f64>::identity(n, n)).abs().max();
        if err > 1e-12 {
            return Err(Error::contract(format!("rotation is not orthogonal (error {err:e})")));
        }
        Ok(())
    }
}

/// Pushes the measure forward; weights scale as `δ^d`.
pub fn apply_transform(measure: &QuadratureMeasure, transform: &Transform) -> Result<QuadratureMeasure> {
    if transform.dim() != measure.n {
        return Err(Error::contract("transform dimension does not match the measure"));
    }
    transform.check()?;
    let mut points = Vec::with_capacity(measure.points.len());
    for i in 0..measure.len() {
        points.extend(transform.apply_point(measure.point(i)));
    }
    let weights = if transform.dilation == 1.0 {
        measure.weights.clone()
    } else {
        let f = transform.dilation.powi(measure.d as i32);
        measure.weights.iter().map(|w| w * f).collect()
    };
    Ok(QuadratureMeasure {
        points,
        weights,
        ..measure.clone()
    })
}

/// Scale window `[t_min, t_max]` for a measure and the sample indices that
/// stay clear of the edge at `t_max`.
///
/// `t_min = (4h)²` with `h` the coarsest ambient sample gap. `t_max` is
/// `16·diam²` for closed sets, past the point-mass crossover. For sets with
/// an edge it is at most `(diam/4)²`, shrunk until the points at least
/// `diam/4` from the edge keep the whole kernel support.
pub fn recommended_window(measure: &QuadratureMeasure, params: &KernelParams) -> (f64, f64, Vec<usize>) {
    let h = measure.max_gap();
    let t_min = (4.0 * h).powi(2);
    let diam = measure.diameter();
    let mut t_max = 16.0 * diam * diam;
    if !measure.boundary.is_empty() {
        t_max = (diam / 4.0).powi(2);
        let c = SUPPORT_MARGIN * ((1.0 / params.eps_trunc).ln() / std::f64::consts::PI).sqrt();
        t_max = t_max.min((diam / (4.0 * c)).powi(2));
    }
    let t_max = t_max.max(4.0 * t_min);
    let reach = params.support_radius(t_max);
    let eval = (0..measure.len()).filter(|&i| measure.boundary_distance(i) >= reach).collect();
    (t_min, t_max, eval)
}
