//! Scale transforms of sampled functions on uniform 1-D and 2-D lattices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelParams, KernelTable, DEFAULT_BASE, DEFAULT_EPS_TRUNC};
use crate::scalespace::{classify_scales, fit_exponential_decay, Matrix, ScaleGrid, ScaleStack};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    ZeroPad,
    Clamp,
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "zero_pad" | "zero-pad" => Ok(Boundary::ZeroPad),
            "clamp" => Ok(Boundary::Clamp),
            other => Err(Error::contract(format!("unknown boundary policy '{other}'"))),
        }
    }
}

/// Uniformly sampled bounded function. Values are row-major with `x`
/// varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    dims: usize,
    shape: [usize; 2],
    h: f64,
    origin: [f64; 2],
    values: Vec<f64>,
    boundary: Boundary,
    sup_norm: f64,
}

impl SampledField {
    pub fn new_1d(values: Vec<f64>, h: f64, boundary: Boundary) -> Result<Self> {
        let n = values.len();
        Self::build(1, [n, 1], h, [0.0, 0.0], values, boundary)
    }

    pub fn new_2d(values: Vec<f64>, nx: usize, ny: usize, h: f64, boundary: Boundary) -> Result<Self> {
        Self::build(2, [nx, ny], h, [0.0, 0.0], values, boundary)
    }

    pub fn with_origin(mut self, origin: [f64; 2]) -> Self {
        self.origin = origin;
        self
    }

    fn build(dims: usize, shape: [usize; 2], h: f64, origin: [f64; 2], values: Vec<f64>, boundary: Boundary) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::contract(format!("grid spacing must be positive, got {h}")));
        }
        if shape[0] * shape[1] != values.len() || values.is_empty() {
            return Err(Error::contract(format!(
                "field shape {:?} inconsistent with {} values",
                &shape[..dims],
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("field contains non-finite values"));
        }
        let sup_norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self {
            dims,
            shape,
            h,
            origin,
            values,
            boundary,
            sup_norm,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape[..self.dims]
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Lebesgue measure of one lattice cell, `h^dims`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dims as i32)
    }

    /// Physical coordinates of sample `i`.
    pub fn coords(&self, i: usize) -> Vec<f64> {
        let ix = i % self.shape[0];
        let iy = i / self.shape[0];
        let mut c = vec![self.origin[0] + ix as f64 * self.h];
        if self.dims == 2 {
            c.push(self.origin[1] + iy as f64 * self.h);
        }
        c
    }

    /// Diameter of the sampled box (the period for periodic fields).
    pub fn extent(&self) -> f64 {
        let span = |n: usize| match self.boundary {
            Boundary::Periodic => n as f64 * self.h,
            _ => (n.max(2) - 1) as f64 * self.h,
        };
        (0..self.dims).map(|k| span(self.shape[k]).powi(2)).sum::<f64>().sqrt()
    }

    /// Distance (in lattice cells) from sample `i` to the nearest edge.
    fn edge_cells(&self, i: usize) -> usize {
        let ix = i % self.shape[0];
        let iy = i / self.shape[0];
        let mut m = ix.min(self.shape[0] - 1 - ix);
        if self.dims == 2 {
            m = m.min(iy.min(self.shape[1] - 1 - iy));
        }
        m
    }

    /// `t_min = (4h)²`; `t_max = extent²` for periodic fields and
    /// `(extent/4)²` otherwise.
    pub fn default_t_window(&self) -> (f64, f64) {
        let t_min = (4.0 * self.h).powi(2);
        let e = self.extent();
        let t_max = match self.boundary {
            Boundary::Periodic => e * e,
            _ => (e / 4.0).powi(2),
        };
        (t_min, t_max.max(4.0 * t_min))
    }
}

/// Output of one lattice convolution at a fixed scale: one row per kernel,
/// plus `Σ|w||f|` for kernel 0.
struct Convolved {
    outputs: Vec<Vec<f64>>,
    magnitude: Vec<f64>,
}

/// Discrete convolution of the field with `nk` radial kernels evaluated by
/// `kern(r2, out)`, truncated at `radius` and weighted by the cell volume.
fn convolve(field: &SampledField, radius: f64, nk: usize, kern: &(dyn Fn(f64, &mut [f64]) + Sync)) -> Convolved {
    let h = field.h;
    let cell = field.cell_volume();
    let rc = (radius / h).floor() as i64;
    let nx = field.shape[0] as i64;
    let ny = field.shape[1] as i64;
    let ry = if field.dims == 2 { rc } else { 0 };
    let npts = field.values.len();
    let mut outputs = vec![vec![0.0; npts]; nk];
    let mut magnitude = vec![0.0; npts];
    let mut buf = vec![0.0; nk];
    let r2max = radius * radius;

    match field.boundary {
        Boundary::Periodic => {
            // fold the kernel onto the period first
            let mut folded = vec![vec![0.0; npts]; nk];
            let mut folded_abs = vec![0.0; npts];
            for ky in -ry..=ry {
                for kx in -rc..=rc {
                    let r2 = ((kx * kx + ky * ky) as f64) * h * h;
                    if r2 > r2max {
                        continue;
                    }
                    kern(r2, &mut buf);
                    let m = (ky.rem_euclid(ny) * nx + kx.rem_euclid(nx)) as usize;
                    for q in 0..nk {
                        folded[q][m] += cell * buf[q];
                    }
                    folded_abs[m] += cell * buf[0].abs();
                }
            }
            let taps: Vec<(i64, i64, usize)> = (0..ny)
                .flat_map(|my| (0..nx).map(move |mx| (mx, my, (my * nx + mx) as usize)))
                .filter(|&(_, _, m)| folded_abs[m] != 0.0 || (0..nk).any(|q| folded[q][m] != 0.0))
                .collect();
            for iy in 0..ny {
                for ix in 0..nx {
                    let i = (iy * nx + ix) as usize;
                    for &(mx, my, m) in &taps {
                        let jx = (ix - mx).rem_euclid(nx);
                        let jy = (iy - my).rem_euclid(ny);
                        let f = field.values[(jy * nx + jx) as usize];
                        for q in 0..nk {
                            outputs[q][i] += folded[q][m] * f;
                        }
                        magnitude[i] += folded_abs[m] * f.abs();
                    }
                }
            }
        }
        Boundary::Clamp | Boundary::ZeroPad => {
            let mut taps = Vec::new();
            for ky in -ry..=ry {
                for kx in -rc..=rc {
                    let r2 = ((kx * kx + ky * ky) as f64) * h * h;
                    if r2 > r2max {
                        continue;
                    }
                    kern(r2, &mut buf);
                    let mut w = buf.clone();
                    w.iter_mut().for_each(|v| *v *= cell);
                    taps.push((kx, ky, w));
                }
            }
            for iy in 0..ny {
                for ix in 0..nx {
                    let i = (iy * nx + ix) as usize;
                    for (kx, ky, w) in &taps {
                        let jx = ix - kx;
                        let jy = iy - ky;
                        let f = if (0..nx).contains(&jx) && (0..ny).contains(&jy) {
                            field.values[(jy * nx + jx) as usize]
                        } else if field.boundary == Boundary::ZeroPad {
                            continue;
                        } else {
                            field.values[(jy.clamp(0, ny - 1) * nx + jx.clamp(0, nx - 1)) as usize]
                        };
                        for q in 0..nk {
                            outputs[q][i] += w[q] * f;
                        }
                        magnitude[i] += w[0].abs() * f.abs();
                    }
                }
            }
        }
    }
    Convolved { outputs, magnitude }
}

fn field_params(field: &SampledField, grid: &ScaleGrid, eps_trunc: f64) -> Result<KernelParams> {
    KernelParams::new(field.dims, grid.a, eps_trunc)
}

/// `K_t * f` at every sample.
pub fn heat_convolve(field: &SampledField, t: f64) -> Result<Vec<f64>> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    let params = KernelParams::new(field.dims, DEFAULT_BASE, DEFAULT_EPS_TRUNC)?;
    let pre = t.powf(-(field.dims as f64) / 2.0);
    let kern = |r2: f64, out: &mut [f64]| {
        out[0] = pre * (-std::f64::consts::PI * r2 / t).exp();
    };
    Ok(convolve(field, params.support_radius(t), 1, &kern).outputs.remove(0))
}

/// Heat representation `u(x, t_i) = (K_{t_i} * f)(x)`; rows are samples.
pub fn heat_stack(field: &SampledField, grid: &ScaleGrid) -> Result<Matrix> {
    let params = field_params(field, grid, DEFAULT_EPS_TRUNC)?;
    let table = KernelTable::new(params, 1);
    let ts = grid.ts();
    let cols: Vec<Vec<f64>> = ts
        .par_iter()
        .map(|&t| {
            let pre = table.prefactor(t);
            let kern = |r2: f64, out: &mut [f64]| {
                out[0] = pre * (-std::f64::consts::PI * r2 / t).exp();
            };
            convolve(field, params.support_radius(t), 1, &kern).outputs.remove(0)
        })
        .collect();
    let mut m = Matrix::zeros(field.len(), grid.steps);
    for (k, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            m.set(i, k, *v);
        }
    }
    Ok(m)
}

/// `S f = ψ_t * f` and `∂_τ^j S f` for `j <= jmax`, with the default
/// truncation threshold.
pub fn scale_transform_field(field: &SampledField, grid: &ScaleGrid, jmax: usize) -> Result<ScaleStack> {
    scale_transform_field_with(field, grid, jmax, DEFAULT_EPS_TRUNC)
}

pub fn scale_transform_field_with(field: &SampledField, grid: &ScaleGrid, jmax: usize, eps_trunc: f64) -> Result<ScaleStack> {
    if jmax > 2 {
        return Err(Error::contract(format!("jmax must be 0, 1 or 2, got {jmax}")));
    }
    let params = field_params(field, grid, eps_trunc)?;
    let table = KernelTable::new(params, jmax + 1);
    let nk = jmax + 1;
    let ts = grid.ts();
    let per_t: Vec<Convolved> = ts
        .par_iter()
        .map(|&t| {
            let pre = table.prefactor(t);
            let kern = |r2: f64, out: &mut [f64]| table.wavelet_family(r2, t, pre, out);
            convolve(field, params.support_radius(t), nk, &kern)
        })
        .collect();

    let n = field.len();
    let mut mats = vec![Matrix::zeros(n, grid.steps); nk];
    let mut mag = Matrix::zeros(n, grid.steps);
    for (k, c) in per_t.iter().enumerate() {
        for (m, out) in mats.iter_mut().zip(&c.outputs) {
            for (i, v) in out.iter().enumerate() {
                m.set(i, k, *v);
            }
        }
        for i in 0..n {
            mag.set(i, k, c.magnitude[i]);
        }
    }
    let mut mats = mats.into_iter();
    let mut stack = ScaleStack::new((0..n).collect(), *grid, mats.next().unwrap())?.with_magnitude(mag)?;
    for (j, m) in mats.enumerate() {
        stack = stack.with_deriv(j + 1, m)?;
    }
    if field.boundary != Boundary::Periodic {
        for i in 0..n {
            let margin = field.edge_cells(i) as f64 * field.h;
            stack.truncated_from[i] = ts.iter().position(|&t| params.support_radius(t) > margin);
        }
    }
    Ok(stack)
}

/// `Sf` for `f(x) = sin(2π m x)`: `-π m² t e^{-π t m²} sin(2π m x)`.
pub fn sine_transform_closed_form(m: u32, x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    let m2 = (m as f64) * (m as f64);
    let pi = std::f64::consts::PI;
    Ok(-pi * m2 * t * (-pi * t * m2).exp() * (2.0 * pi * m as f64 * x).sin())
}

/// Least-squares fit `measure(N) ≈ c1 e^{-c2 N}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaReport {
    pub delta: f64,
    pub beta: Option<f64>,
    /// `(N, |Ω_N|)` for `N = 1..=Nmax`.
    pub measures: Vec<(usize, f64)>,
    pub fit: Option<DecayFit>,
    /// Rows skipped because their kernel support left the sampled region.
    pub skipped: usize,
}

/// Measures of `Ω_{δ,N} = {x : #τ_δ(x) >= N}` (or `Ω_{β,δ,N}` when `beta`
/// is given) as counting measure times `cell_volume`.
pub fn omega_sets(stack: &ScaleStack, cell_volume: f64, delta: f64, beta: Option<f64>, nmax: usize) -> Result<OmegaReport> {
    if nmax < 1 {
        return Err(Error::contract("Nmax must be >= 1"));
    }
    if !(cell_volume > 0.0) {
        return Err(Error::contract("cell volume must be positive"));
    }
    let mut counts = Vec::with_capacity(stack.len());
    let mut skipped = 0;
    for row in 0..stack.len() {
        if stack.is_truncated(row) {
            skipped += 1;
            continue;
        }
        let set = classify_scales(stack, row, beta.unwrap_or(0.0), delta)?;
        counts.push(match beta {
            Some(_) => set.count_visible_separated(),
            None => set.count_separated(),
        });
    }
    let measures: Vec<(usize, f64)> = (1..=nmax)
        .map(|n| (n, cell_volume * counts.iter().filter(|&&c| c >= n).count() as f64))
        .collect();
    let fit = fit_exponential_decay(&measures).map(|(c1, c2)| DecayFit { c1, c2 });
    Ok(OmegaReport {
        delta,
        beta,
        measures,
        fit,
        skipped,
    })
}
