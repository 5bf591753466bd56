//! Log-scale lattice, scale stacks and everything computed along the scale
//! axis: local-maximum detection, visibility/separation flags, the
//! nontangential maximal stack, dilation-consistency checks and the
//! g-function / square-function reductions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries with `|S| <= NULL_REL_TOL * Σ|w·kernel|` are floating-point
/// cancellation residue and are read as exact zeros by the detectors.
pub const NULL_REL_TOL: f64 = 1e-9;

/// Uniform lattice in `τ = log_a t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid {
    pub a: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub steps: usize,
}

impl ScaleGrid {
    pub fn new(a: f64, tau_min: f64, tau_max: f64, steps: usize) -> Result<Self> {
        if !(a > 1.0) || !a.is_finite() {
            return Err(Error::contract(format!("grid base must be > 1, got {a}")));
        }
        if !(tau_min < tau_max) || !tau_min.is_finite() || !tau_max.is_finite() {
            return Err(Error::contract(format!(
                "grid requires tau_min < tau_max, got [{tau_min}, {tau_max}]"
            )));
        }
        if steps < 3 {
            return Err(Error::contract(format!("grid needs >= 3 steps, got {steps}")));
        }
        Ok(Self {
            a,
            tau_min,
            tau_max,
            steps,
        })
    }

    /// Lattice covering `[t_min, t_max]` with about `per_octave` points per
    /// doubling of `t`, endpoints exact.
    pub fn from_t_range(a: f64, t_min: f64, t_max: f64, per_octave: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min) {
            return Err(Error::contract(format!("invalid t range [{t_min}, {t_max}]")));
        }
        let tau_min = t_min.ln() / a.ln();
        let tau_max = t_max.ln() / a.ln();
        let octaves = (t_max / t_min).log2();
        let steps = ((octaves * per_octave.max(1) as f64).ceil() as usize + 1).max(3);
        Self::new(a, tau_min, tau_max, steps)
    }

    pub fn dtau(&self) -> f64 {
        (self.tau_max - self.tau_min) / (self.steps - 1) as f64
    }

    pub fn tau(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            self.tau_max
        } else {
            self.tau_min + i as f64 * self.dtau()
        }
    }

    pub fn t(&self, i: usize) -> f64 {
        self.a.powf(self.tau(i))
    }

    pub fn taus(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.tau(i)).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.t(i)).collect()
    }

    pub fn t_min(&self) -> f64 {
        self.t(0)
    }

    pub fn t_max(&self) -> f64 {
        self.t(self.steps - 1)
    }

    pub fn log_a(&self, x: f64) -> f64 {
        x.ln() / self.a.ln()
    }

    /// Lattice index whose τ is closest to `tau` (clamped).
    pub fn nearest_index(&self, tau: f64) -> usize {
        let x = ((tau - self.tau_min) / self.dtau()).round();
        x.clamp(0.0, (self.steps - 1) as f64) as usize
    }
}

/// Dense row-major matrix, one row per evaluation point, one column per scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, cols: usize) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::contract("ragged matrix rows"));
            }
            data.extend(r);
        }
        Ok(Self { rows: n, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Transform values `S(x, τ)` for a set of points, plus analytic
/// τ-derivatives.
#[derive(Debug, Clone)]
pub struct ScaleStack {
    /// Caller-facing identifiers of the rows (sample indices).
    pub point_ids: Vec<usize>,
    pub grid: ScaleGrid,
    pub values: Matrix,
    /// `∂_τ^j S` keyed by `j`.
    pub derivs: BTreeMap<usize, Matrix>,
    /// `Σ |w_i · ψ_t(x - y_i)|` per entry: the scale of the cancellation
    /// behind each value.
    pub magnitude: Option<Matrix>,
    /// First τ-index at which the kernel support of a row leaves the sampled
    /// region; `None` when the row is clean at every scale.
    pub truncated_from: Vec<Option<usize>>,
}

impl ScaleStack {
    pub fn new(point_ids: Vec<usize>, grid: ScaleGrid, values: Matrix) -> Result<Self> {
        if values.rows() != point_ids.len() || values.cols() != grid.steps {
            return Err(Error::contract(format!(
                "stack is {}x{}, expected {}x{}",
                values.rows(),
                values.cols(),
                point_ids.len(),
                grid.steps
            )));
        }
        let n = point_ids.len();
        Ok(Self {
            point_ids,
            grid,
            values,
            derivs: BTreeMap::new(),
            magnitude: None,
            truncated_from: vec![None; n],
        })
    }

    pub fn with_deriv(mut self, j: usize, m: Matrix) -> Result<Self> {
        self.check_dims(&m)?;
        self.derivs.insert(j, m);
        Ok(self)
    }

    pub fn with_magnitude(mut self, m: Matrix) -> Result<Self> {
        self.check_dims(&m)?;
        self.magnitude = Some(m);
        Ok(self)
    }

    fn check_dims(&self, m: &Matrix) -> Result<()> {
        if m.rows() != self.values.rows() || m.cols() != self.values.cols() {
            return Err(Error::contract("derivative stack dimensions mismatch"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.point_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.point_ids.is_empty()
    }

    pub fn deriv(&self, j: usize) -> Option<&Matrix> {
        self.derivs.get(&j)
    }

    /// `|S|` along τ for one row with numerically null entries zeroed.
    pub fn abs_profile(&self, row: usize) -> Vec<f64> {
        let vals = self.values.row(row);
        match &self.magnitude {
            Some(mag) => vals
                .iter()
                .zip(mag.row(row))
                .map(|(v, m)| if v.abs() <= NULL_REL_TOL * m { 0.0 } else { v.abs() })
                .collect(),
            None => vals.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn is_truncated(&self, row: usize) -> bool {
        self.truncated_from[row].is_some()
    }
}

/// Interior strict local maxima of `profile`; a maximal plateau strictly
/// above both neighbours yields its midpoint (rounded down). The end points
/// never qualify.
pub fn detect_local_scales(profile: &[f64], grid: &ScaleGrid) -> Result<Vec<usize>> {
    if profile.len() != grid.steps {
        return Err(Error::contract(format!(
            "profile length {} does not match grid steps {}",
            profile.len(),
            grid.steps
        )));
    }
    let n = profile.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        // extent of the run of equal values starting at i
        let mut e = i;
        while e + 1 < n && profile[e + 1] == profile[i] {
            e += 1;
        }
        if e + 1 < n && profile[i - 1] < profile[i] && profile[e + 1] < profile[e] {
            out.push((i + e) / 2);
        }
        i = e + 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalScale {
    pub index: usize,
    pub tau: f64,
    pub t: f64,
    /// Signed transform value at the maximum.
    pub value: f64,
    /// `∂²_τ S` at the maximum.
    pub curvature: f64,
    pub visible: bool,
    pub separated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalScaleSet {
    pub point: usize,
    pub beta: f64,
    pub delta: f64,
    pub a: f64,
    pub dtau: f64,
    pub entries: Vec<LocalScale>,
}

impl LocalScaleSet {
    pub fn count_separated(&self) -> usize {
        self.entries.iter().filter(|e| e.separated).count()
    }

    pub fn count_visible_separated(&self) -> usize {
        self.entries.iter().filter(|e| e.visible && e.separated).count()
    }
}

/// Detects local scales of one stack row and flags them `beta`-visible
/// and `delta`-separated.
pub fn classify_scales(stack: &ScaleStack, row: usize, beta: f64, delta: f64) -> Result<LocalScaleSet> {
    if !(beta >= 0.0 && delta >= 0.0) {
        return Err(Error::contract("beta and delta must be >= 0"));
    }
    if row >= stack.len() {
        return Err(Error::contract(format!("row {row} out of range")));
    }
    let d2 = stack
        .deriv(2)
        .ok_or_else(|| Error::contract("stack lacks the analytic second τ-derivative"))?;
    let profile = stack.abs_profile(row);
    let indices = detect_local_scales(&profile, &stack.grid)?;
    let entries = indices
        .into_iter()
        .map(|i| {
            let value = stack.values.get(row, i);
            let curvature = d2.get(row, i);
            LocalScale {
                index: i,
                tau: stack.grid.tau(i),
                t: stack.grid.t(i),
                value,
                curvature,
                visible: profile[i] > beta,
                separated: curvature.abs() > delta,
            }
        })
        .collect();
    Ok(LocalScaleSet {
        point: stack.point_ids[row],
        beta,
        delta,
        a: stack.grid.a,
        dtau: stack.grid.dtau(),
        entries,
    })
}

/// Local maxima of an arbitrary nonnegative profile (no derivative data):
/// entries carry `curvature = NaN` and `separated = false`.
pub fn plain_scales(profile: &[f64], values: &[f64], grid: &ScaleGrid, point: usize, beta: f64) -> Result<LocalScaleSet> {
    let indices = detect_local_scales(profile, grid)?;
    Ok(LocalScaleSet {
        point,
        beta,
        delta: 0.0,
        a: grid.a,
        dtau: grid.dtau(),
        entries: indices
            .into_iter()
            .map(|i| LocalScale {
                index: i,
                tau: grid.tau(i),
                t: grid.t(i),
                value: values[i],
                curvature: f64::NAN,
                visible: profile[i] > beta,
                separated: false,
            })
            .collect(),
    })
}

/// `S*(x,t) = max_{π|x-y|² < t} |S(y,t)| e^{-π|x-y|²/t}` over the stack rows.
pub fn nontangential_stack(stack: &ScaleStack, positions: &[Vec<f64>]) -> Result<ScaleStack> {
    if stack.is_empty() {
        return Err(Error::contract("nontangential stack of an empty stack"));
    }
    if positions.len() != stack.len() {
        return Err(Error::contract(format!(
            "{} positions for {} stack rows",
            positions.len(),
            stack.len()
        )));
    }
    let n = stack.len();
    let steps = stack.grid.steps;
    let abs: Vec<Vec<f64>> = (0..n).map(|i| stack.abs_profile(i)).collect();
    let ts = stack.grid.ts();
    let mut out = Matrix::zeros(n, steps);
    for x in 0..n {
        let px = &positions[x];
        let mut dist2 = Vec::with_capacity(n);
        for py in positions {
            dist2.push(squared_distance(px, py));
        }
        let row = out.row_mut(x);
        for (k, &t) in ts.iter().enumerate() {
            let mut best = abs[x][k];
            for y in 0..n {
                let r2 = dist2[y];
                if y == x || std::f64::consts::PI * r2 >= t {
                    continue;
                }
                let v = abs[y][k] * (-std::f64::consts::PI * r2 / t).exp();
                if v > best {
                    best = v;
                }
            }
            row[k] = best;
        }
    }
    let mut s = ScaleStack::new(stack.point_ids.clone(), stack.grid, out)?;
    s.truncated_from = stack.truncated_from.clone();
    Ok(s)
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Which object was dilated; fixes the sign of the expected τ-shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DilationKind {
    /// `f ↦ f(δ·)`: scales move by `δ^{-2}`.
    Function,
    /// `Γ ↦ δΓ` with `d`-dimensional Hausdorff scaling of the measure:
    /// scales move by `δ^{+2}`.
    Surface,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub count_base: usize,
    pub count_dilated: usize,
    pub count_match: bool,
    pub shift_measured: f64,
    pub shift_expected: f64,
    pub dtau: f64,
    pub pass: bool,
}

pub fn expected_shift(delta: f64, kind: DilationKind, a: f64) -> f64 {
    let mag = 2.0 * delta.ln() / a.ln();
    match kind {
        DilationKind::Function => -mag,
        DilationKind::Surface => mag,
    }
}

pub fn check_dilation_consistency(
    base: &LocalScaleSet,
    dilated: &LocalScaleSet,
    delta: f64,
    kind: DilationKind,
    grid: &ScaleGrid,
) -> Result<ConsistencyReport> {
    if !(delta > 0.0) {
        return Err(Error::contract("dilation factor must be positive"));
    }
    let dtau = grid.dtau();
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(1.0);
    if !close(base.a, grid.a) || !close(dilated.a, grid.a) || !close(base.dtau, dtau) || !close(dilated.dtau, dtau) {
        return Err(Error::contract("scale sets come from grids with different base or spacing"));
    }
    let count_match = base.entries.len() == dilated.entries.len();
    let shift_expected = expected_shift(delta, kind, grid.a);
    let shift_measured = if count_match && !base.entries.is_empty() {
        base.entries.iter().zip(&dilated.entries).map(|(b, d)| d.tau - b.tau).sum::<f64>() / base.entries.len() as f64
    } else if count_match {
        shift_expected
    } else {
        f64::NAN
    };
    let pass = count_match && (shift_measured - shift_expected).abs() <= dtau * (1.0 + 1e-9);
    Ok(ConsistencyReport {
        count_base: base.entries.len(),
        count_dilated: dilated.entries.len(),
        count_match,
        shift_measured,
        shift_expected,
        dtau,
        pass,
    })
}

/// Trapezoid rule with spacing `h`.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// `[∫ |profile|² dt/t]^{1/2}` on the lattice, with `dt/t = ln(a) dτ`.
pub fn g_function(profile: &[f64], grid: &ScaleGrid, k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::contract("g-function order k must be >= 1"));
    }
    if profile.len() != grid.steps {
        return Err(Error::contract("profile length does not match grid"));
    }
    let sq: Vec<f64> = profile.iter().map(|v| v * v).collect();
    Ok((grid.a.ln() * trapezoid(&sq, grid.dtau())).sqrt())
}

/// `ln(a) ∫ |∂²_τ S|² dτ` on the lattice.
pub fn square_function(second_deriv: &[f64], grid: &ScaleGrid) -> Result<f64> {
    if second_deriv.len() != grid.steps {
        return Err(Error::contract("profile length does not match grid"));
    }
    let sq: Vec<f64> = second_deriv.iter().map(|v| v * v).collect();
    Ok(grid.a.ln() * trapezoid(&sq, grid.dtau()))
}

/// Least-squares fit of `ln m(N) = ln c1 - c2 N` over the entries with
/// `m(N) > 0`. `None` with fewer than two such entries.
pub fn fit_exponential_decay(measures: &[(usize, f64)]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = measures
        .iter()
        .filter(|(_, m)| *m > 0.0)
        .map(|&(n, m)| (n as f64, m.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Some((intercept.exp(), -slope))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> ScaleGrid {
        ScaleGrid::new(2.0, 0.0, (n - 1) as f64, n).unwrap()
    }

    #[test]
    fn detect_examples() {
        assert_eq!(detect_local_scales(&[1.0, 3.0, 2.0], &grid(3)).unwrap(), vec![1]);
        assert_eq!(detect_local_scales(&[0.0, 2.0, 2.0, 2.0, 1.0], &grid(5)).unwrap(), vec![2]);
        assert!(detect_local_scales(&[1.0, 2.0, 3.0, 4.0], &grid(4)).unwrap().is_empty());
        assert!(matches!(detect_local_scales(&[1.0, 2.0], &grid(3)), Err(Error::Contract(_))));
    }

    #[test]
    fn plateau_touching_boundary_is_ignored() {
        assert!(detect_local_scales(&[0.0, 2.0, 2.0, 2.0], &grid(4)).unwrap().is_empty());
        assert!(detect_local_scales(&[2.0, 2.0, 1.0], &grid(3)).unwrap().is_empty());
        // plateau of even length rounds down
        assert_eq!(detect_local_scales(&[0.0, 5.0, 5.0, 0.0], &grid(4)).unwrap(), vec![1]);
    }

    #[test]
    fn grid_basics() {
        let g = ScaleGrid::new(2.0, -3.0, 1.0, 5).unwrap();
        assert_eq!(g.dtau(), 1.0);
        assert_eq!(g.t(0), 0.125);
        assert_eq!(g.t(4), 2.0);
        assert!(ScaleGrid::new(1.0, 0.0, 1.0, 3).is_err());
        assert!(ScaleGrid::new(2.0, 1.0, 1.0, 3).is_err());
        assert!(ScaleGrid::new(2.0, 0.0, 1.0, 2).is_err());
        let ts = g.ts();
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
    }

    fn synthetic_stack(values: Vec<f64>, d2: Vec<f64>) -> ScaleStack {
        let n = values.len();
        let g = grid(n);
        ScaleStack::new(vec![7], g, Matrix::from_rows(vec![values], n).unwrap())
            .unwrap()
            .with_deriv(2, Matrix::from_rows(vec![d2], n).unwrap())
            .unwrap()
    }

    #[test]
    fn classify_thresholds() {
        let s = synthetic_stack(vec![0.1, 0.5, 0.2], vec![0.0, -0.3, 0.0]);
        let set = classify_scales(&s, 0, 0.6, 0.2).unwrap();
        assert_eq!(set.point, 7);
        assert_eq!(set.entries.len(), 1);
        assert!(!set.entries[0].visible);
        assert!(set.entries[0].separated);
        let set = classify_scales(&s, 0, 0.0, 0.0).unwrap();
        assert!(set.entries[0].visible && set.entries[0].separated);
    }

    #[test]
    fn classify_requires_second_derivative() {
        let g = grid(3);
        let s = ScaleStack::new(vec![0], g, Matrix::zeros(1, 3)).unwrap();
        assert!(matches!(classify_scales(&s, 0, 0.0, 0.0), Err(Error::Contract(_))));
    }

    #[test]
    fn magnitude_zeroes_cancellation_residue() {
        let g = grid(5);
        let s = ScaleStack::new(vec![0], g, Matrix::from_rows(vec![vec![0.0, 1e-18, 0.0, 1e-18, 0.0]], 5).unwrap())
            .unwrap()
            .with_magnitude(Matrix::from_rows(vec![vec![1.0; 5]], 5).unwrap())
            .unwrap();
        assert_eq!(s.abs_profile(0), vec![0.0; 5]);
    }

    #[test]
    fn nontangential_cone_boundary() {
        let t = 1.0;
        let g = ScaleGrid::new(2.0, -1.0, 1.0, 3).unwrap();
        assert_eq!(g.t(1), t);
        let eps = 1e-6;
        let far = ((t / std::f64::consts::PI) + eps).sqrt();
        let near = ((t / std::f64::consts::PI) - eps).sqrt();
        let vals = Matrix::from_rows(vec![vec![0.0; 3], vec![1.0; 3], vec![1.0; 3]], 3).unwrap();
        let stack = ScaleStack::new(vec![0, 1, 2], g, vals).unwrap();
        // row 1 outside x's cone at t=1, row 2 inside
        let pos_far = vec![vec![0.0], vec![far], vec![100.0]];
        let s = nontangential_stack(&stack, &pos_far).unwrap();
        assert_eq!(s.values.get(0, 1), 0.0);
        let pos_near = vec![vec![0.0], vec![near], vec![100.0]];
        let s = nontangential_stack(&stack, &pos_near).unwrap();
        let expect = (-std::f64::consts::PI * near * near / t).exp();
        assert!((s.values.get(0, 1) - expect).abs() < 1e-12);
    }

    #[test]
    fn nontangential_constant_stack() {
        let g = ScaleGrid::new(2.0, -2.0, 2.0, 5).unwrap();
        let vals = Matrix::from_rows(vec![vec![-0.5; 5]; 4], 5).unwrap();
        let stack = ScaleStack::new(vec![0, 1, 2, 3], g, vals).unwrap();
        let pos: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64 * 0.1]).collect();
        let s = nontangential_stack(&stack, &pos).unwrap();
        assert!(s.values.as_slice().iter().all(|&v| v == 0.5));
        assert!(nontangential_stack(&stack, &pos[..2]).is_err());
    }

    #[test]
    fn consistency_identity_passes() {
        let s = synthetic_stack(vec![0.1, 0.5, 0.2, 0.4, 0.1], vec![-1.0; 5]);
        let set = classify_scales(&s, 0, 0.0, 0.0).unwrap();
        let r = check_dilation_consistency(&set, &set, 1.0, DilationKind::Surface, &s.grid).unwrap();
        assert!(r.pass);
        assert_eq!(r.shift_expected, 0.0);
        assert_eq!(r.count_base, 2);
        let other = ScaleGrid::new(3.0, 0.0, 4.0, 5).unwrap();
        assert!(check_dilation_consistency(&set, &set, 1.0, DilationKind::Surface, &other).is_err());
    }

    #[test]
    fn expected_shift_signs() {
        let a = 2f64.powf(0.125);
        assert!((expected_shift(2.0, DilationKind::Surface, a) - 16.0).abs() < 1e-9);
        assert!((expected_shift(2.0, DilationKind::Function, a) + 16.0).abs() < 1e-9);
    }

    #[test]
    fn g_and_square_function_basics() {
        let g = grid(5);
        assert_eq!(g_function(&[0.0; 5], &g, 1).unwrap(), 0.0);
        assert!(g_function(&[0.0; 5], &g, 0).is_err());
        assert_eq!(square_function(&[0.0; 5], &g).unwrap(), 0.0);
        // constant profile c: ln(a) * c^2 * (tau_max - tau_min)
        let v = square_function(&[2.0; 5], &g).unwrap();
        assert!((v - 2f64.ln() * 4.0 * 4.0).abs() < 1e-12);
    }

    #[test]
    fn square_function_separated_bracket() {
        // a separated scale with |∂²S| >= δ/2 on an interval I contributes at
        // least ln(a) (δ/2)² |I|
        let g = ScaleGrid::new(2.0, -4.0, 4.0, 801).unwrap();
        let delta = 0.8;
        let profile: Vec<f64> = g.taus().iter().map(|&tau| -delta * (-(tau * tau)).exp()).collect();
        // |∂²S| >= δ/2 on |τ| <= sqrt(ln 2)
        let half = 2f64.ln().sqrt();
        let total = square_function(&profile, &g).unwrap();
        assert!(total >= g.a.ln() * (delta / 2.0).powi(2) * 2.0 * half);
    }

    #[test]
    fn decay_fit_recovers_rate() {
        let data: Vec<(usize, f64)> = (1..6).map(|n| (n, 3.0 * (-0.7 * n as f64).exp())).collect();
        let (c1, c2) = fit_exponential_decay(&data).unwrap();
        assert!((c1 - 3.0).abs() < 1e-12);
        assert!((c2 - 0.7).abs() < 1e-12);
        assert!(fit_exponential_decay(&[(1, 1.0), (2, 0.0)]).is_none());
    }

    proptest! {
        #[test]
        fn detect_scale_invariant(v in proptest::collection::vec(0.0f64..10.0, 3..40), c in 0.01f64..100.0) {
            let g = grid(v.len());
            // integer-valued inputs keep distinct values distinct after scaling
            let v: Vec<f64> = v.iter().map(|x| x.round()).collect();
            let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
            prop_assert_eq!(detect_local_scales(&v, &g).unwrap(), detect_local_scales(&scaled, &g).unwrap());
        }

        #[test]
        fn detect_returns_interior_indices(v in proptest::collection::vec(0.0f64..3.0, 3..40)) {
            let v: Vec<f64> = v.iter().map(|x| x.round()).collect();
            let g = grid(v.len());
            let idx = detect_local_scales(&v, &g).unwrap();
            for w in idx.windows(2) {
                prop_assert!(w[1] > w[0] + 1);
            }
            for &i in &idx {
                prop_assert!(i > 0 && i + 1 < v.len());
            }
        }

        #[test]
        fn g_function_homogeneous(v in proptest::collection::vec(-5.0f64..5.0, 3..30), c in 0.0f64..10.0) {
            let g = grid(v.len());
            let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
            let a = g_function(&v, &g, 1).unwrap();
            let b = g_function(&scaled, &g, 1).unwrap();
            prop_assert!((b - c * a).abs() <= 1e-9 * (1.0 + b.abs()));
            let a2 = square_function(&v, &g).unwrap();
            let b2 = square_function(&scaled, &g).unwrap();
            prop_assert!((b2 - c * c * a2).abs() <= 1e-9 * (1.0 + b2.abs()));
        }

        #[test]
        fn square_function_monotone(v in proptest::collection::vec(-5.0f64..5.0, 3..30), w in proptest::collection::vec(0.0f64..1.0, 30)) {
            let g = grid(v.len());
            let dominated: Vec<f64> = v.iter().zip(&w).map(|(x, s)| x * s).collect();
            prop_assert!(square_function(&dominated, &g).unwrap() <= square_function(&v, &g).unwrap() + 1e-12);
            prop_assert!(g_function(&dominated, &g, 2).unwrap() <= g_function(&v, &g, 2).unwrap() + 1e-12);
        }
    }
}
