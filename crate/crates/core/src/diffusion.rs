//! Component-wise heat diffusion of a parametrized set and the scale
//! transform of the parametrization.
//!
//! Scales here are in parameter units (`t_param`), unrelated to the
//! ambient scales of [`crate::surface_scales`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::ParamSurface;
use crate::scalespace::{Matrix, ScaleGrid, ScaleStack};
use crate::signal::{heat_convolve, scale_transform_field, Boundary, SampledField};

/// Coordinates `f_1..f_n` of `Γ = {f(r) : r ∈ [0,1]^d}` on a shared lattice.
///
/// Lattice order is C order (last parameter axis fastest). Spacing is
/// `1/N` along a closed axis and `1/(N-1)` along an open one.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamComponents {
    pub d: usize,
    pub shape: Vec<usize>,
    pub components: Vec<Vec<f64>>,
    pub closed: bool,
}

impl ParamComponents {
    pub fn new(shape: Vec<usize>, components: Vec<Vec<f64>>, closed: bool) -> Result<Self> {
        let d = shape.len();
        if !(1..=2).contains(&d) {
            return Err(Error::contract(format!("parameter dimension must be 1 or 2, got {d}")));
        }
        if shape.iter().any(|&m| m < 2) {
            return Err(Error::contract("need >= 2 samples per parameter axis"));
        }
        if d == 2 && shape[0] != shape[1] {
            return Err(Error::contract("two-parameter lattices must be square"));
        }
        let count: usize = shape.iter().product();
        if components.is_empty() {
            return Err(Error::contract("at least one component required"));
        }
        for c in &components {
            if c.len() != count {
                return Err(Error::contract("every component must cover the lattice"));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::contract("components must be finite"));
            }
        }
        Ok(Self {
            d,
            shape,
            components,
            closed,
        })
    }

    pub fn from_surface(s: &ParamSurface) -> Result<Self> {
        let n = s.n();
        let components = (0..n).map(|c| (0..s.len()).map(|i| s.point(i)[c]).collect()).collect();
        Self::new(s.shape().to_vec(), components, s.closed())
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn len(&self) -> usize {
        self.components[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.components[0].is_empty()
    }

    pub fn h(&self) -> f64 {
        let m = self.shape[0] as f64;
        if self.closed {
            1.0 / m
        } else {
            1.0 / (m - 1.0)
        }
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.components.iter().map(|c| c[i]).collect()
    }

    fn field(&self, c: usize) -> Result<SampledField> {
        let b = if self.closed { Boundary::Periodic } else { Boundary::Clamp };
        let v = self.components[c].clone();
        match self.d {
            1 => SampledField::new_1d(v, self.h(), b),
            _ => SampledField::new_2d(v, self.shape[1], self.shape[0], self.h(), b),
        }
    }
}

/// `Γ_t = (K_t * f_1, .., K_t * f_n)` over the parameter lattice.
pub fn diffuse_curve(p: &ParamComponents, t: f64) -> Result<ParamComponents> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    let components = (0..p.n())
        .into_par_iter()
        .map(|c| heat_convolve(&p.field(c)?, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(ParamComponents { components, ..p.clone() })
}

/// `SΓ(r,t) = ‖(ψ_t * f_1, .., ψ_t * f_n)(r)‖` with its first two
/// `τ`-derivatives.
pub fn parametric_scale_stack(p: &ParamComponents, grid: &ScaleGrid) -> Result<ScaleStack> {
    let stacks = (0..p.n())
        .into_par_iter()
        .map(|c| scale_transform_field(&p.field(c)?, grid, 2))
        .collect::<Result<Vec<_>>>()?;
    let (rows, cols) = (p.len(), grid.steps);
    let mut val = Matrix::zeros(rows, cols);
    let mut d1 = Matrix::zeros(rows, cols);
    let mut d2 = Matrix::zeros(rows, cols);
    let mut mag = Matrix::zeros(rows, cols);
    for i in 0..rows {
        for k in 0..cols {
            let (mut vv, mut vd, mut dd, mut vdd, mut mm) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for s in &stacks {
                let v = s.values.get(i, k);
                let a = s.derivs[&1].get(i, k);
                let b = s.derivs[&2].get(i, k);
                vv += v * v;
                vd += v * a;
                dd += a * a;
                vdd += v * b;
                mm += s.magnitude.as_ref().map_or(0.0, |m| m.get(i, k).powi(2));
            }
            let nv = vv.sqrt();
            val.set(i, k, nv);
            mag.set(i, k, mm.sqrt());
            if nv > 0.0 {
                d1.set(i, k, vd / nv);
                d2.set(i, k, (dd + vdd) / nv - vd * vd / (nv * nv * nv));
            }
        }
    }
    let mut out = ScaleStack::new((0..rows).collect(), *grid, val)?
        .with_deriv(1, d1)?
        .with_deriv(2, d2)?
        .with_magnitude(mag)?;
    for i in 0..rows {
        out.truncated_from[i] = stacks.iter().filter_map(|s| s.truncated_from[i]).min();
    }
    Ok(out)
}
