//! `SΓ(x,t) = ψ_t * μ(x)` over quadrature measures and the diagnostics
//! built on it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::QuadratureMeasure;
use crate::kernel::{KernelParams, KernelTable};
use crate::scalespace::{classify_scales, fit_exponential_decay, g_function, squared_distance, Matrix, ScaleGrid, ScaleStack};
use crate::signal::DecayFit;

/// A computed stack together with everything needed to interpret it.
#[derive(Debug, Clone)]
pub struct SurfaceScaleRun {
    pub measure: QuadratureMeasure,
    /// Measure indices of the evaluation points (stack rows).
    pub eval_points: Vec<usize>,
    pub grid: ScaleGrid,
    pub stack: ScaleStack,
    pub params: KernelParams,
}

impl SurfaceScaleRun {
    pub fn compute(measure: QuadratureMeasure, eval_points: Vec<usize>, grid: ScaleGrid, jmax: usize, eps_trunc: f64) -> Result<Self> {
        let params = KernelParams::new(measure.d, grid.a, eps_trunc)?;
        let stack = surface_scale_stack(&measure, &eval_points, &grid, jmax, &params)?;
        Ok(Self {
            measure,
            eval_points,
            grid,
            stack,
            params,
        })
    }

    /// Weight of the measure point behind stack row `row`.
    pub fn row_weight(&self, row: usize) -> f64 {
        self.measure.weights()[self.eval_points[row]]
    }
}

fn check_eval(measure: &QuadratureMeasure, eval: &[usize]) -> Result<()> {
    if eval.is_empty() {
        return Err(Error::contract("no evaluation points"));
    }
    if let Some(bad) = eval.iter().find(|&&e| e >= measure.len()) {
        return Err(Error::contract(format!("evaluation index {bad} outside the measure")));
    }
    Ok(())
}

/// Indices (ascending) of measure points within `radius` of `x`.
fn neighbours(measure: &QuadratureMeasure, x: &[f64], radius: f64) -> Vec<(usize, f64)> {
    let r2max = radius * radius;
    (0..measure.len())
        .filter_map(|i| {
            let r2 = squared_distance(x, measure.point(i));
            (r2 <= r2max).then_some((i, r2))
        })
        .collect()
}

/// `∂_τ^j SΓ(x,t)` for `j <= jmax` at every evaluation point and grid scale.
///
/// Rows whose kernel support at some scale reaches the edge of the sampled
/// set are flagged in `truncated_from`.
pub fn surface_scale_stack(
    measure: &QuadratureMeasure,
    eval: &[usize],
    grid: &ScaleGrid,
    jmax: usize,
    params: &KernelParams,
) -> Result<ScaleStack> {
    if jmax > 2 {
        return Err(Error::contract(format!("jmax must be 0, 1 or 2, got {jmax}")));
    }
    if params.d != measure.d {
        return Err(Error::contract("kernel dimension must equal the intrinsic dimension"));
    }
    if (params.a - grid.a).abs() > 0.0 {
        return Err(Error::contract("kernel base and grid base differ"));
    }
    check_eval(measure, eval)?;
    let table = KernelTable::new(*params, jmax + 1);
    let nk = jmax + 1;
    let ts = grid.ts();
    let w = measure.weights();
    let reach = params.support_radius(grid.t_max());

    struct Row {
        out: Vec<Vec<f64>>,
        mag: Vec<f64>,
        truncated_from: Option<usize>,
    }
    let rows: Vec<Row> = eval
        .par_iter()
        .map(|&e| {
            let x = measure.point(e);
            let near = neighbours(measure, x, reach);
            let mut out = vec![vec![0.0; ts.len()]; nk];
            let mut mag = vec![0.0; ts.len()];
            let mut buf = vec![0.0; nk];
            for (k, &t) in ts.iter().enumerate() {
                let s = params.support_radius(t);
                let s2 = s * s;
                let pre = table.prefactor(t);
                let mut acc = vec![0.0; nk];
                let mut m = 0.0;
                for &(i, r2) in &near {
                    if r2 > s2 {
                        continue;
                    }
                    table.wavelet_family(r2, t, pre, &mut buf);
                    for q in 0..nk {
                        acc[q] += w[i] * buf[q];
                    }
                    m += (w[i] * buf[0]).abs();
                }
                for q in 0..nk {
                    out[q][k] = acc[q];
                }
                mag[k] = m;
            }
            let margin = measure.boundary_distance(e);
            let truncated_from = ts.iter().position(|&t| params.support_radius(t) > margin);
            Row { out, mag, truncated_from }
        })
        .collect();

    let mut mats = vec![Matrix::zeros(eval.len(), ts.len()); nk];
    let mut mag = Matrix::zeros(eval.len(), ts.len());
    for (r, row) in rows.iter().enumerate() {
        for (m, out) in mats.iter_mut().zip(&row.out) {
            m.row_mut(r).copy_from_slice(out);
        }
        mag.row_mut(r).copy_from_slice(&row.mag);
    }
    let mut mats = mats.into_iter();
    let mut stack = ScaleStack::new(eval.to_vec(), *grid, mats.next().unwrap())?.with_magnitude(mag)?;
    for (j, m) in mats.enumerate() {
        stack = stack.with_deriv(j + 1, m)?;
    }
    stack.truncated_from = rows.iter().map(|r| r.truncated_from).collect();
    Ok(stack)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSetReport {
    pub delta: f64,
    pub beta: Option<f64>,
    /// `(N, μ(Γ_N))`.
    pub mu_measures: Vec<(usize, f64)>,
    pub fit: Option<DecayFit>,
    pub skipped: usize,
}

/// `μ(Γ_{δ,N})` with `Γ_{δ,N} = {#τ_δ > N}`, or `μ(Γ_{β,δ,N})` with
/// `Γ_{β,δ,N} = {#τ_{β,δ} >= N}` when `beta` is given.
pub fn gamma_sets(run: &SurfaceScaleRun, delta: f64, beta: Option<f64>, nmax: usize) -> Result<GammaSetReport> {
    if nmax < 1 {
        return Err(Error::contract("Nmax must be >= 1"));
    }
    let mut counts = Vec::with_capacity(run.stack.len());
    let mut skipped = 0;
    for row in 0..run.stack.len() {
        if run.stack.is_truncated(row) {
            skipped += 1;
            continue;
        }
        let set = classify_scales(&run.stack, row, beta.unwrap_or(0.0), delta)?;
        let c = match beta {
            Some(_) => set.count_visible_separated(),
            None => set.count_separated(),
        };
        counts.push((c, run.row_weight(row)));
    }
    let mu_measures: Vec<(usize, f64)> = (1..=nmax)
        .map(|n| {
            let mass = counts
                .iter()
                .filter(|(c, _)| if beta.is_some() { *c >= n } else { *c > n })
                .fold(0.0, |acc, (_, w)| acc + w);
            (n, mass)
        })
        .collect();
    let fit = fit_exponential_decay(&mu_measures).map(|(c1, c2)| DecayFit { c1, c2 });
    Ok(GammaSetReport {
        delta,
        beta,
        mu_measures,
        fit,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundProbe {
    pub k: usize,
    pub sup_value: f64,
    /// `(t, sup_x t^k |∂_t^k SΓ(x,t)|)`.
    pub per_t: Vec<(f64, f64)>,
}

/// `sup t^k |∂_t^k SΓ(x,t)|` over the evaluation points and `t_list`.
pub fn derivative_bound_probe(measure: &QuadratureMeasure, eval: &[usize], k: usize, t_list: &[f64], eps_trunc: f64) -> Result<BoundProbe> {
    if k > 3 {
        return Err(Error::contract(format!("k must be in 0..=3, got {k}")));
    }
    check_eval(measure, eval)?;
    if let Some(t) = t_list.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    let params = KernelParams::new(measure.d, crate::kernel::DEFAULT_BASE, eps_trunc)?;
    let table = KernelTable::new(params, k + 1);
    let w = measure.weights();
    let per_t: Vec<(f64, f64)> = t_list
        .iter()
        .map(|&t| {
            let s = params.support_radius(t);
            let sup = eval
                .par_iter()
                .map(|&e| {
                    let x = measure.point(e);
                    neighbours(measure, x, s)
                        .iter()
                        .map(|&(i, r2)| w[i] * table.t_deriv_wavelet(k, r2, t))
                        .sum::<f64>()
                        .abs()
                })
                .reduce(|| 0.0, f64::max);
            (t, sup)
        })
        .collect();
    let sup_value = per_t.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(BoundProbe { k, sup_value, per_t })
}

/// `‖g_k f‖ / ‖f‖` in `L²(μ)` restricted to the evaluation points, with
/// `g_k f(x)² = ∫ |t^k ∂_t^k K_t * (f dμ)(x)|² dt/t`.
pub fn g_norm_ratio(measure: &QuadratureMeasure, f: &[f64], k: usize, grid: &ScaleGrid, eval: &[usize], eps_trunc: f64) -> Result<f64> {
    if f.len() != measure.len() {
        return Err(Error::contract("one f value per measure point required"));
    }
    if k < 1 {
        return Err(Error::contract("g_k needs k >= 1"));
    }
    check_eval(measure, eval)?;
    let w = measure.weights();
    let fnorm2: f64 = eval.iter().map(|&e| w[e] * f[e] * f[e]).sum();
    if !(fnorm2 > 0.0) {
        return Err(Error::contract("f vanishes on the evaluation points"));
    }
    let params = KernelParams::new(measure.d, grid.a, eps_trunc)?;
    let table = KernelTable::new(params, k);
    let ts = grid.ts();
    let reach = params.support_radius(grid.t_max());
    let g2: Vec<f64> = eval
        .par_iter()
        .map(|&e| -> Result<f64> {
            let x = measure.point(e);
            let near = neighbours(measure, x, reach);
            let profile: Vec<f64> = ts
                .iter()
                .map(|&t| {
                    let s2 = params.support_radius(t).powi(2);
                    near.iter()
                        .filter(|p| p.1 <= s2)
                        .map(|&(i, r2)| w[i] * f[i] * table.t_deriv(k, r2, t))
                        .sum()
                })
                .collect();
            let g = g_function(&profile, grid, k)?;
            Ok(w[e] * g * g)
        })
        .collect::<Result<_>>()?;
    Ok((g2.iter().sum::<f64>() / fnorm2).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{apply_transform, as_measure, recommended_window, MeasureMode, ParamSurface, SurfaceKind, Transform};
    use crate::kernel::DEFAULT_EPS_TRUNC;

    fn circle(r: f64, m: usize) -> QuadratureMeasure {
        let h = 1.0 / m as f64;
        let pts: Vec<f64> = (0..m)
            .flat_map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 * h;
                [r * a.cos(), r * a.sin()]
            })
            .collect();
        let s = ParamSurface::new(1, 2, vec![m], h, vec![0.0], pts, SurfaceKind::GeneralParametric, true).unwrap();
        as_measure(&s, MeasureMode::Surface).unwrap()
    }

    fn line(m: usize, lo: f64, hi: f64) -> QuadratureMeasure {
        let h = (hi - lo) / (m - 1) as f64;
        let heights: Vec<Vec<f64>> = (0..m).map(|i| vec![0.25 * (lo + i as f64 * h) + 1.0]).collect();
        let s = ParamSurface::graph(vec![m], h, vec![lo], &heights, false).unwrap();
        as_measure(&s, MeasureMode::Surface).unwrap()
    }

    #[test]
    fn line_is_null_inside() {
        let mu = line(801, -4.0, 4.0);
        let p = KernelParams::with_dim(1);
        let (t_min, t_max, eval) = recommended_window(&mu, &p);
        assert!(!eval.is_empty());
        let grid = ScaleGrid::from_t_range(2.0, t_min, t_max, 4).unwrap();
        let run = SurfaceScaleRun::compute(mu, eval, grid, 2, DEFAULT_EPS_TRUNC).unwrap();
        for r in 0..run.stack.len() {
            assert!(!run.stack.is_truncated(r));
            for (k, &t) in grid.ts().iter().enumerate() {
                assert!(run.stack.values.get(r, k).abs() <= 1e-8 * t.powf(-0.5));
            }
        }
        let rep = gamma_sets(&run, 1e-3, None, 4).unwrap();
        assert!(rep.mu_measures.iter().all(|m| m.1 == 0.0));
    }

    #[test]
    fn circle_profiles_match() {
        let mu = circle(1.0, 512);
        let grid = ScaleGrid::from_t_range(2.0, 0.01, 0.5, 4).unwrap();
        let run = SurfaceScaleRun::compute(mu, vec![0, 37, 128, 300], grid, 0, DEFAULT_EPS_TRUNC).unwrap();
        for r in 1..4 {
            for k in 0..grid.steps {
                let (a, b) = (run.stack.values.get(0, k), run.stack.values.get(r, k));
                assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn rigid_motion_invariance() {
        let mu = circle(1.0, 256);
        let grid = ScaleGrid::from_t_range(2.0, 0.01, 0.5, 2).unwrap();
        let p = KernelParams::with_dim(1);
        let base = surface_scale_stack(&mu, &[3, 90], &grid, 1, &p).unwrap();
        let tr = Transform::plane_rotation(2, 0, 1, 0.7).with_translation(vec![3.0, -1.5]);
        let moved = apply_transform(&mu, &tr).unwrap();
        let other = surface_scale_stack(&moved, &[3, 90], &grid, 1, &p).unwrap();
        for (a, b) in base.values.as_slice().iter().zip(other.values.as_slice()) {
            assert!((a - b).abs() <= 1e-9 * base.values.max_abs());
        }
    }

    #[test]
    fn linear_in_weights() {
        let mu = circle(1.0, 128);
        let grid = ScaleGrid::from_t_range(2.0, 0.02, 0.3, 2).unwrap();
        let p = KernelParams::with_dim(1);
        let double = QuadratureMeasure::new(1, 2, mu.points().to_vec(), mu.weights().iter().map(|w| 2.0 * w).collect()).unwrap();
        let a = surface_scale_stack(&mu, &[5], &grid, 0, &p).unwrap();
        let b = surface_scale_stack(&double, &[5], &grid, 0, &p).unwrap();
        for (x, y) in a.values.as_slice().iter().zip(b.values.as_slice()) {
            assert!((2.0 * x - y).abs() <= 1e-14 * y.abs().max(1e-300));
        }
    }

    #[test]
    fn edge_points_are_flagged() {
        let mu = line(101, 0.0, 1.0);
        let grid = ScaleGrid::from_t_range(2.0, 1e-3, 0.1, 1).unwrap();
        let p = KernelParams::with_dim(1);
        let s = surface_scale_stack(&mu, &[0, 50], &grid, 0, &p).unwrap();
        assert_eq!(s.truncated_from[0], Some(0));
        assert!(s.truncated_from[1].is_some());
        assert!(s.truncated_from[1].unwrap() > 0);
    }

    #[test]
    fn argument_checks() {
        let mu = circle(1.0, 64);
        let grid = ScaleGrid::from_t_range(2.0, 0.02, 0.3, 2).unwrap();
        let p = KernelParams::with_dim(1);
        assert!(surface_scale_stack(&mu, &[64], &grid, 0, &p).is_err());
        assert!(surface_scale_stack(&mu, &[0], &grid, 3, &p).is_err());
        assert!(derivative_bound_probe(&mu, &[0], 4, &[0.1], DEFAULT_EPS_TRUNC).is_err());
        let zero = vec![0.0; 64];
        assert!(matches!(
            g_norm_ratio(&mu, &zero, 1, &grid, &[0, 1], DEFAULT_EPS_TRUNC),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn probe_on_line_is_zero() {
        let mu = line(401, -2.0, 2.0);
        let mid: Vec<usize> = (150..250).collect();
        for k in 0..=3 {
            let pr = derivative_bound_probe(&mu, &mid, k, &[0.01, 0.02, 0.04], DEFAULT_EPS_TRUNC).unwrap();
            assert!(pr.sup_value < 1e-8, "k={k}: {}", pr.sup_value);
        }
    }
}
