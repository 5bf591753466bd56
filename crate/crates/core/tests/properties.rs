use std::f64::consts::PI;

use locscale::beta::{beta_p, dyadic_beta, tsp_sum, BetaNorm, BetaP, DyadicSquare};
use locscale::diffusion::{parametric_scale_stack, ParamComponents};
use locscale::geometry::{apply_transform, as_measure, gram_weights, MeasureMode, ParamSurface, QuadratureMeasure, Transform};
use locscale::kernel::{heat_kernel, log_deriv_polynomial, KernelParams, DEFAULT_EPS_TRUNC};
use locscale::scalespace::{
    check_dilation_consistency, classify_scales, detect_local_scales, g_function, nontangential_stack, square_function, DilationKind,
    ScaleGrid,
};
use locscale::signal::{scale_transform_field_with, Boundary, SampledField};
use locscale::surface_scales::surface_scale_stack;
use locscale::synth::koch;
use proptest::prelude::*;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn field(v: Vec<f64>, b: Boundary) -> SampledField {
    let h = 1.0 / v.len() as f64;
    SampledField::new_1d(v, h, b).unwrap()
}

fn small_grid() -> ScaleGrid {
    ScaleGrid::from_t_range(2f64.powf(0.25), 1e-3, 0.05, 4).unwrap()
}

fn graph_measure(heights: &[f64], h: f64) -> QuadratureMeasure {
    let hs: Vec<Vec<f64>> = heights.iter().map(|&z| vec![z]).collect();
    let s = ParamSurface::graph(vec![heights.len()], h, vec![0.0], &hs, false).unwrap();
    as_measure(&s, MeasureMode::Surface).unwrap()
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn heat_kernel_scaling(r2 in 0.0f64..4.0, t in 0.01f64..4.0, delta in 0.2f64..5.0, d in 1usize..4) {
        let p = KernelParams::new(d, 2.0, DEFAULT_EPS_TRUNC).unwrap();
        let lhs = heat_kernel(delta * delta * r2, delta * delta * t, &p).unwrap();
        let rhs = delta.powi(-(d as i32)) * heat_kernel(r2, t, &p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300));
    }

    #[test]
    fn q_polynomials_are_monic(k in 0usize..8, d in 1usize..4) {
        let p = KernelParams::new(d, 2.0, DEFAULT_EPS_TRUNC).unwrap();
        let q = log_deriv_polynomial(k, &p);
        prop_assert_eq!(q.degree(), k);
        prop_assert_eq!(*q.coeffs.last().unwrap(), 1.0);
        let next = q.next(d);
        // coefficient form of (u - d/2) Q - u Q'
        for i in 0..=k + 1 {
            let c = |j: usize| q.coeffs.get(j).copied().unwrap_or(0.0);
            let want = if i > 0 { c(i - 1) } else { 0.0 } - d as f64 / 2.0 * c(i) - i as f64 * c(i);
            prop_assert!((next.coeffs[i] - want).abs() < 1e-9 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn detected_indices_interior_and_separated(v in proptest::collection::vec(0.0f64..1.0, 3..60)) {
        let grid = ScaleGrid::new(2.0, 0.0, (v.len() - 1) as f64, v.len()).unwrap();
        let idx = detect_local_scales(&v, &grid).unwrap();
        for w in idx.windows(2) {
            prop_assert!(w[1] > w[0] + 1);
        }
        for &i in &idx {
            prop_assert!(i > 0 && i + 1 < v.len());
        }
        prop_assert_eq!(idx, detect_local_scales(&v, &grid).unwrap());
    }

    #[test]
    fn square_functions_homogeneous(v in proptest::collection::vec(-1.0f64..1.0, 3..30), c in 0.1f64..10.0, bump in 0.0f64..1.0) {
        let grid = ScaleGrid::new(2.0, 0.0, (v.len() - 1) as f64, v.len()).unwrap();
        let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
        let g = g_function(&v, &grid, 1).unwrap();
        prop_assert!((g_function(&scaled, &grid, 1).unwrap() - c * g).abs() <= 1e-12 * (1.0 + c * g));
        let s = square_function(&v, &grid).unwrap();
        prop_assert!((square_function(&scaled, &grid).unwrap() - c * c * s).abs() <= 1e-12 * (1.0 + c * c * s));
        let bigger: Vec<f64> = v.iter().map(|x| x.signum() * (x.abs() + bump)).collect();
        prop_assert!(g_function(&bigger, &grid, 1).unwrap() >= g - 1e-15);
        prop_assert!(square_function(&bigger, &grid).unwrap() >= s - 1e-15);
    }
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn transform_is_linear(a in proptest::collection::vec(-1.0f64..1.0, 64), b in proptest::collection::vec(-1.0f64..1.0, 64), c in -3.0f64..3.0) {
        let grid = small_grid();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + c * y).collect();
        let sa = scale_transform_field_with(&field(a, Boundary::Periodic), &grid, 0, DEFAULT_EPS_TRUNC).unwrap();
        let sb = scale_transform_field_with(&field(b, Boundary::Periodic), &grid, 0, DEFAULT_EPS_TRUNC).unwrap();
        let ss = scale_transform_field_with(&field(sum, Boundary::Periodic), &grid, 0, DEFAULT_EPS_TRUNC).unwrap();
        let scale = ss.values.max_abs().max(sa.values.max_abs()).max(1e-300);
        for (i, v) in ss.values.as_slice().iter().enumerate() {
            let want = sa.values.as_slice()[i] + c * sb.values.as_slice()[i];
            prop_assert!((v - want).abs() <= 1e-12 * scale * (1.0 + c.abs()));
        }
    }

    #[test]
    fn periodic_shift_equivariance(a in proptest::collection::vec(-1.0f64..1.0, 48), shift in 1usize..47) {
        let grid = small_grid();
        let mut rolled = a.clone();
        rolled.rotate_right(shift);
        let s = scale_transform_field_with(&field(a, Boundary::Periodic), &grid, 1, DEFAULT_EPS_TRUNC).unwrap();
        let r = scale_transform_field_with(&field(rolled, Boundary::Periodic), &grid, 1, DEFAULT_EPS_TRUNC).unwrap();
        let scale = s.values.max_abs().max(1e-300);
        for i in 0..48 {
            for k in 0..grid.steps {
                prop_assert!((s.values.get(i, k) - r.values.get((i + shift) % 48, k)).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn affine_addition_invisible_inside(a in proptest::collection::vec(-1.0f64..1.0, 256), c0 in -5.0f64..5.0, c1 in -5.0f64..5.0) {
        let grid = ScaleGrid::from_t_range(2.0, 4e-4, 4e-3, 2).unwrap();
        let n = a.len();
        let h = 1.0 / n as f64;
        let tilted: Vec<f64> = a.iter().enumerate().map(|(i, v)| v + c0 + c1 * i as f64 * h).collect();
        let s = scale_transform_field_with(&SampledField::new_1d(a, h, Boundary::Clamp).unwrap(), &grid, 0, DEFAULT_EPS_TRUNC).unwrap();
        let t = scale_transform_field_with(&SampledField::new_1d(tilted, h, Boundary::Clamp).unwrap(), &grid, 0, DEFAULT_EPS_TRUNC).unwrap();
        for row in 0..n {
            if s.is_truncated(row) {
                continue;
            }
            for k in 0..grid.steps {
                prop_assert!((s.values.get(row, k) - t.values.get(row, k)).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn nontangential_dominates(a in proptest::collection::vec(-1.0f64..1.0, 64)) {
        let grid = small_grid();
        let f = field(a, Boundary::Periodic);
        let s = scale_transform_field_with(&f, &grid, 0, DEFAULT_EPS_TRUNC).unwrap();
        let pos: Vec<Vec<f64>> = (0..f.len()).map(|i| f.coords(i)).collect();
        let star = nontangential_stack(&s, &pos).unwrap();
        for (x, y) in star.values.as_slice().iter().zip(s.values.as_slice()) {
            prop_assert!(*x >= y.abs());
        }
    }

    #[test]
    fn unit_dilation_is_consistent(a in proptest::collection::vec(-1.0f64..1.0, 64), row in 0usize..64) {
        let grid = small_grid();
        let s = scale_transform_field_with(&field(a, Boundary::Periodic), &grid, 2, DEFAULT_EPS_TRUNC).unwrap();
        let set = classify_scales(&s, row, 0.0, 0.0).unwrap();
        let r = check_dilation_consistency(&set, &set, 1.0, DilationKind::Function, &grid).unwrap();
        prop_assert!(r.pass);
    }

    #[test]
    fn graph_gamma_star_at_least_one(h in proptest::collection::vec(-1.0f64..1.0, 8..40)) {
        let m = graph_measure(&h, 0.1);
        prop_assert!(m.gamma_star >= 1.0);
    }

    #[test]
    fn transforms_compose(a1 in -3.0f64..3.0, a2 in -3.0f64..3.0, b in proptest::collection::vec(-2.0f64..2.0, 3), dl in 0.5f64..2.0) {
        let pts: Vec<f64> = (0..10).flat_map(|i| { let s = i as f64 * 0.1; [s, s * s, 0.3 * s] }).collect();
        let m = QuadratureMeasure::new(1, 3, pts, vec![0.1; 10]).unwrap();
        let t1 = Transform::plane_rotation(3, 0, 2, a1).with_translation(b);
        let t2 = Transform::plane_rotation(3, 1, 2, a2).compose(&Transform::dilation(3, dl));
        let two_step = apply_transform(&apply_transform(&m, &t1).unwrap(), &t2).unwrap();
        let once = apply_transform(&m, &t2.compose(&t1)).unwrap();
        for (x, y) in two_step.points().iter().zip(once.points()) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
        for (x, y) in two_step.weights().iter().zip(once.weights()) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs());
        }
    }

    #[test]
    fn beta_rigid_invariance(angle in -3.0f64..3.0, shift in proptest::collection::vec(-5.0f64..5.0, 2)) {
        let pts: Vec<f64> = (0..80).flat_map(|i| { let s = i as f64 / 40.0 - 1.0; [s, 0.2 * (3.0 * s).sin()] }).collect();
        let m = QuadratureMeasure::new(1, 2, pts, vec![0.025; 80]).unwrap();
        let tr = Transform::plane_rotation(2, 0, 1, angle).with_translation(shift);
        let moved = apply_transform(&m, &tr).unwrap();
        let x = m.point(40).to_vec();
        let y = tr.apply_point(&x);
        for (p, tol) in [(BetaP::Two, 1e-10), (BetaP::One, 1e-8), (BetaP::Inf, 1e-8)] {
            let a = beta_p(&m, &x, 0.7, p, 1, BetaNorm::Mass).unwrap().unwrap().beta;
            let b = beta_p(&moved, &y, 0.7, p, 1, BetaNorm::Mass).unwrap().unwrap().beta;
            prop_assert!((a - b).abs() <= tol * (1.0 + a), "{:?} {} {}", p, a, b);
        }
    }

    #[test]
    fn beta_ordered_in_p(pts in proptest::collection::vec(-1.0f64..1.0, 24..80), t in 0.3f64..2.0) {
        let n = pts.len() / 2;
        let m = QuadratureMeasure::new(1, 2, pts[..2 * n].to_vec(), vec![1.0; n]).unwrap();
        let x = [0.0, 0.0];
        if let Some(b2) = beta_p(&m, &x, t, BetaP::Two, 1, BetaNorm::Mass).unwrap() {
            let b1 = beta_p(&m, &x, t, BetaP::One, 1, BetaNorm::Mass).unwrap().unwrap().beta;
            let bi = beta_p(&m, &x, t, BetaP::Inf, 1, BetaNorm::Mass).unwrap().unwrap().beta;
            prop_assert!(b1 <= b2.beta + 1e-12);
            prop_assert!(b2.beta <= bi + 1e-12);
        }
    }

    #[test]
    fn dyadic_beta_zero_iff_collinear(pts in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 3..30), slope in -2.0f64..2.0) {
        let q = DyadicSquare::new(0, 0, 0);
        let cloud: Vec<[f64; 2]> = pts.iter().map(|&(a, b)| [a, b]).collect();
        let b = dyadic_beta(&cloud, q).beta;
        prop_assert!(b >= 0.0);
        let line: Vec<[f64; 2]> = pts.iter().map(|&(a, _)| [a, 0.5 + slope * (a - 0.5)]).collect();
        prop_assert!(dyadic_beta(&line, q).beta <= 1e-12);
    }

    #[test]
    fn tsp_sum_additive(level in 1u32..5, a in -2i32..1, b in 1i32..3, c in 3i32..6) {
        let k = koch(level);
        let whole = tsp_sum(&k, a, c).unwrap();
        let parts = tsp_sum(&k, a, b).unwrap() + tsp_sum(&k, b + 1, c).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12 * (1.0 + whole));
    }

    #[test]
    fn parametric_stack_rigid_invariance(angle in -3.0f64..3.0, shift in proptest::collection::vec(-5.0f64..5.0, 2)) {
        let m = 256;
        let x: Vec<f64> = (0..m).map(|i| { let a = 2.0 * PI * i as f64 / m as f64; a.cos() + 0.2 * (3.0 * a).cos() }).collect();
        let y: Vec<f64> = (0..m).map(|i| { let a = 2.0 * PI * i as f64 / m as f64; a.sin() }).collect();
        let (s, c) = angle.sin_cos();
        let xr: Vec<f64> = x.iter().zip(&y).map(|(u, v)| c * u - s * v + shift[0]).collect();
        let yr: Vec<f64> = x.iter().zip(&y).map(|(u, v)| s * u + c * v + shift[1]).collect();
        let grid = ScaleGrid::from_t_range(2.0, 1e-3, 0.5, 2).unwrap();
        let a = parametric_scale_stack(&ParamComponents::new(vec![m], vec![x, y], true).unwrap(), &grid).unwrap();
        let b = parametric_scale_stack(&ParamComponents::new(vec![m], vec![xr, yr], true).unwrap(), &grid).unwrap();
        let scale = a.values.max_abs();
        for (u, v) in a.values.as_slice().iter().zip(b.values.as_slice()) {
            prop_assert!((u - v).abs() <= 1e-10 * scale);
        }
    }
}

proptest! {
    #![proptest_config(cfg(8))]

    #[test]
    fn surface_stack_linear_in_weights(w1 in proptest::collection::vec(0.5f64..1.5, 201), w2 in proptest::collection::vec(0.5f64..1.5, 201)) {
        let pts: Vec<f64> = (0..201).flat_map(|i| { let s = i as f64 / 100.0 - 1.0; [s, 0.3 * s * s] }).collect();
        let wsum: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
        let m1 = QuadratureMeasure::new(1, 2, pts.clone(), w1).unwrap();
        let m2 = QuadratureMeasure::new(1, 2, pts.clone(), w2).unwrap();
        let ms = QuadratureMeasure::new(1, 2, pts, wsum).unwrap();
        let grid = ScaleGrid::from_t_range(2.0, 1e-3, 0.02, 2).unwrap();
        let p = KernelParams::new(1, 2.0, DEFAULT_EPS_TRUNC).unwrap();
        let eval = [90usize, 100, 110];
        let s1 = surface_scale_stack(&m1, &eval, &grid, 0, &p).unwrap();
        let s2 = surface_scale_stack(&m2, &eval, &grid, 0, &p).unwrap();
        let ss = surface_scale_stack(&ms, &eval, &grid, 0, &p).unwrap();
        let scale = ss.values.max_abs();
        for i in 0..ss.values.as_slice().len() {
            let want = s1.values.as_slice()[i] + s2.values.as_slice()[i];
            prop_assert!((ss.values.as_slice()[i] - want).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn graph_mass_self_converges(amp in 0.05f64..0.5, freq in 1.0f64..3.0) {
        let mass = |m: usize| {
            let h = 1.0 / (m - 1) as f64;
            let z: Vec<f64> = (0..m).map(|i| amp * (2.0 * PI * freq * i as f64 * h).sin()).collect();
            graph_measure(&z, h).total_mass()
        };
        let (a, b, c) = (mass(101), mass(201), mass(401));
        prop_assert!((c - b).abs() <= 2.0 * (b - a).abs() + 1e-12);
    }
}

#[test]
fn circle_chords_within_sagitta() {
    for (r, m) in [(1.0f64, 64usize), (2.5, 200)] {
        let theta = 2.0 * PI / m as f64;
        let pts: Vec<f64> = (0..m)
            .flat_map(|i| {
                let a = theta * i as f64;
                [r * a.cos(), r * a.sin()]
            })
            .collect();
        for i in 0..m {
            let j = (i + 1) % m;
            let mid = [(pts[2 * i] + pts[2 * j]) / 2.0, (pts[2 * i + 1] + pts[2 * j + 1]) / 2.0];
            let gap = r - (mid[0] * mid[0] + mid[1] * mid[1]).sqrt();
            assert!(gap <= theta * theta * r / 8.0);
        }
        let s = ParamSurface::new(
            1,
            2,
            vec![m],
            1.0 / m as f64,
            vec![0.0],
            pts,
            locscale::geometry::SurfaceKind::GeneralParametric,
            true,
        )
        .unwrap();
        let mass = gram_weights(&s).unwrap().weights.iter().sum::<f64>();
        // arc minus chord is r(θ - 2 sin(θ/2)) ≈ rθ³/24 per segment
        assert!((mass - 2.0 * PI * r).abs() <= 2.0 * PI * r * theta * theta / 12.0);
    }
}

#[test]
fn koch_segments() {
    for j in 0..6u32 {
        let k = koch(j);
        assert_eq!(k.len(), 4usize.pow(j) + 1);
        for w in k.windows(2) {
            let l = ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
            assert!((l - 3f64.powi(-(j as i32))).abs() < 1e-12);
        }
    }
}
