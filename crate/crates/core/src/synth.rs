//! Deterministic fixtures with known ground truth.
//!
//! Circles and Koch curves serve as geometric oracles for the dilation and
//! `β` checks.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ParamSurface, SurfaceKind};
use crate::signal::{Boundary, SampledField};

fn default_length() -> f64 {
    1.0
}

fn default_tilt() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixtureSpec {
    /// `sin(2π m x)` on `[0,1)`, periodic.
    SineSignal {
        m: u32,
        h: f64,
    },
    /// `Σ sin(2π m x)` over `ms`, periodic.
    MultiSine {
        ms: Vec<u32>,
        h: f64,
    },
    /// Graph of `amplitude · sin(2π m r)` for `r ∈ [0, length]`.
    SineGraph {
        m: u32,
        amplitude: f64,
        samples: usize,
        #[serde(default = "default_length")]
        length: f64,
    },
    /// Sawtooth of tents with `|A'| = slope` and `teeth` tents per unit length.
    TentGraph {
        slope: f64,
        teeth: usize,
        samples: usize,
        #[serde(default = "default_length")]
        length: f64,
    },
    Circle {
        radius: f64,
        samples: usize,
    },
    /// Tilted affine `d`-plane in `ℝⁿ` over `[-extent/2, extent/2]^d`.
    Plane {
        d: usize,
        n: usize,
        extent: f64,
        samples: usize,
        #[serde(default = "default_tilt")]
        tilt: f64,
    },
    /// Vertices of the `level`-th Koch iterate from `(0,0)` to `(1,0)`.
    Koch {
        level: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Fixture {
    Field(SampledField),
    Surface(ParamSurface),
    Points(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub fixture: Fixture,
    pub truth: BTreeMap<String, f64>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::contract(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn periodic_count(h: f64) -> Result<usize> {
    positive("h", h)?;
    let n = (1.0 / h).round();
    if n < 2.0 || ((1.0 / h) - n).abs() > 1e-9 * n {
        return Err(Error::contract(format!("1/h must be an integer >= 2, got {}", 1.0 / h)));
    }
    Ok(n as usize)
}

fn min_samples(samples: usize, least: usize) -> Result<()> {
    if samples < least {
        return Err(Error::contract(format!("need at least {least} samples, got {samples}")));
    }
    Ok(())
}

pub fn generate(spec: &FixtureSpec) -> Result<Generated> {
    let mut truth = BTreeMap::new();
    let fixture = match spec {
        FixtureSpec::SineSignal { m, h } => {
            if *m == 0 {
                return Err(Error::contract("frequency must be >= 1"));
            }
            let n = periodic_count(*h)?;
            let step = 1.0 / n as f64;
            let v = (0..n).map(|i| (2.0 * PI * *m as f64 * i as f64 * step).sin()).collect();
            truth.insert("m".into(), *m as f64);
            truth.insert("t_star".into(), 1.0 / (PI * (*m as f64).powi(2)));
            Fixture::Field(SampledField::new_1d(v, step, Boundary::Periodic)?)
        }
        FixtureSpec::MultiSine { ms, h } => {
            if ms.is_empty() || ms.contains(&0) {
                return Err(Error::contract("frequencies must be >= 1"));
            }
            let n = periodic_count(*h)?;
            let step = 1.0 / n as f64;
            let v = (0..n)
                .map(|i| ms.iter().map(|&m| (2.0 * PI * m as f64 * i as f64 * step).sin()).sum())
                .collect();
            for (k, &m) in ms.iter().enumerate() {
                truth.insert(format!("t_star_{k}"), 1.0 / (PI * (m as f64).powi(2)));
            }
            Fixture::Field(SampledField::new_1d(v, step, Boundary::Periodic)?)
        }
        FixtureSpec::SineGraph {
            m,
            amplitude,
            samples,
            length,
        } => {
            min_samples(*samples, 3)?;
            positive("length", *length)?;
            let h = length / (*samples - 1) as f64;
            let heights: Vec<Vec<f64>> = (0..*samples)
                .map(|i| vec![amplitude * (2.0 * PI * *m as f64 * i as f64 * h).sin()])
                .collect();
            truth.insert("m".into(), *m as f64);
            truth.insert("lipschitz".into(), 2.0 * PI * *m as f64 * amplitude.abs());
            Fixture::Surface(ParamSurface::graph(vec![*samples], h, vec![0.0], &heights, false)?)
        }
        FixtureSpec::TentGraph {
            slope,
            teeth,
            samples,
            length,
        } => {
            min_samples(*samples, 3)?;
            positive("slope", *slope)?;
            positive("length", *length)?;
            if *teeth == 0 {
                return Err(Error::contract("teeth must be >= 1"));
            }
            let h = length / (*samples - 1) as f64;
            let tt = *teeth as f64;
            let heights: Vec<Vec<f64>> = (0..*samples)
                .map(|i| {
                    // kinks land on samples when (samples - 1) / (length * teeth) is even
                    let per = (*samples - 1) as f64 / (length * tt);
                    let s = (i as f64 / per).fract();
                    vec![slope / tt * s.min(1.0 - s)]
                })
                .collect();
            truth.insert("slope".into(), *slope);
            truth.insert("gamma_star".into(), (1.0 + slope * slope).sqrt());
            Fixture::Surface(ParamSurface::graph(vec![*samples], h, vec![0.0], &heights, false)?)
        }
        FixtureSpec::Circle { radius, samples } => {
            min_samples(*samples, 3)?;
            positive("radius", *radius)?;
            let h = 1.0 / *samples as f64;
            let pts: Vec<f64> = (0..*samples)
                .flat_map(|i| {
                    let a = 2.0 * PI * i as f64 * h;
                    [radius * a.cos(), radius * a.sin()]
                })
                .collect();
            truth.insert("radius".into(), *radius);
            truth.insert("length".into(), 2.0 * PI * radius);
            Fixture::Surface(ParamSurface::new(
                1,
                2,
                vec![*samples],
                h,
                vec![0.0],
                pts,
                SurfaceKind::GeneralParametric,
                true,
            )?)
        }
        FixtureSpec::Plane {
            d,
            n,
            extent,
            samples,
            tilt,
        } => {
            min_samples(*samples, 2)?;
            positive("extent", *extent)?;
            if *d < 1 || *d >= *n {
                return Err(Error::contract(format!("need 1 <= d < n, got d={d}, n={n}")));
            }
            let h = extent / (*samples - 1) as f64;
            let shape = vec![*samples; *d];
            let count: usize = shape.iter().product();
            let origin = vec![-extent / 2.0; *d];
            let heights: Vec<Vec<f64>> = (0..count)
                .map(|i| {
                    let mut rest = i;
                    let mut sum = 0.0;
                    for _ in 0..*d {
                        sum += -extent / 2.0 + (rest % samples) as f64 * h;
                        rest /= samples;
                    }
                    (0..n - d).map(|c| tilt * sum + 0.1 * c as f64).collect()
                })
                .collect();
            Fixture::Surface(ParamSurface::graph(shape, h, origin, &heights, false)?)
        }
        FixtureSpec::Koch { level } => {
            if *level > 10 {
                return Err(Error::contract("koch level must be <= 10"));
            }
            truth.insert("segments".into(), 4f64.powi(*level as i32));
            truth.insert("segment_length".into(), 3f64.powi(-(*level as i32)));
            Fixture::Points(koch(*level))
        }
    };
    Ok(Generated { fixture, truth })
}

/// Polyline vertices of the Koch iterate; each level keeps the previous
/// vertices.
pub fn koch(level: u32) -> Vec<[f64; 2]> {
    let mut pts = vec![[0.0, 0.0], [1.0, 0.0]];
    let (s, c) = (PI / 3.0).sin_cos();
    for _ in 0..level {
        let mut next = Vec::with_capacity(4 * pts.len());
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let d = [(b[0] - a[0]) / 3.0, (b[1] - a[1]) / 3.0];
            let p1 = [a[0] + d[0], a[1] + d[1]];
            let p3 = [a[0] + 2.0 * d[0], a[1] + 2.0 * d[1]];
            let p2 = [p1[0] + c * d[0] - s * d[1], p1[1] + s * d[0] + c * d[1]];
            next.extend_from_slice(&[a, p1, p2, p3]);
        }
        next.push(*pts.last().unwrap());
        pts = next;
    }
    pts
}

/// `count` values uniform on `[-1, 1]` from a seeded stream.
pub fn random_values(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{as_measure, MeasureMode};

    #[test]
    fn sine_signal() {
        let g = generate(&FixtureSpec::SineSignal { m: 1, h: 1.0 / 256.0 }).unwrap();
        let Fixture::Field(f) = g.fixture else { panic!() };
        assert_eq!(f.len(), 256);
        assert_eq!(f.sup_norm(), 1.0);
        assert_eq!(f.boundary(), Boundary::Periodic);
        assert!(generate(&FixtureSpec::SineSignal { m: 1, h: 0.0 }).is_err());
        assert!(generate(&FixtureSpec::SineSignal { m: 1, h: 0.3 }).is_err());
    }

    #[test]
    fn tent_lipschitz() {
        let spec = FixtureSpec::TentGraph {
            slope: 10.0,
            teeth: 10,
            samples: 2001,
            length: 1.0,
        };
        let Fixture::Surface(s) = generate(&spec).unwrap().fixture else {
            panic!()
        };
        assert!((s.lipschitz_estimate() - 10.0).abs() < 1e-9);
        let mu = as_measure(&s, MeasureMode::Surface).unwrap();
        assert!((mu.gamma_star - 101f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn koch_counts() {
        for j in 0..5 {
            let p = koch(j);
            assert_eq!(p.len(), 4usize.pow(j) + 1);
            for w in p.windows(2) {
                let l = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
                assert!((l - 3f64.powi(-(j as i32))).abs() < 1e-12);
            }
        }
        let seg = koch(0);
        assert_eq!(crate::beta::tsp_sum(&seg, 0, 6).unwrap(), 0.0);
        // nested vertex sets
        let (a, b) = (koch(2), koch(3));
        for (i, p) in a.iter().enumerate() {
            assert_eq!(*p, b[4 * i]);
        }
    }

    #[test]
    fn circle_chord_error() {
        let r = 2.0;
        let m = 512;
        let Fixture::Surface(s) = generate(&FixtureSpec::Circle { radius: r, samples: m }).unwrap().fixture else {
            panic!()
        };
        let sagitta = (2.0 * PI / m as f64).powi(2) * r / 8.0;
        for i in 0..m {
            let (a, b) = (s.point(i), s.point((i + 1) % m));
            let mid = ((a[0] + b[0]) / 2.0).hypot((a[1] + b[1]) / 2.0);
            assert!(r - mid <= sagitta);
        }
        let mu = as_measure(&s, MeasureMode::Surface).unwrap();
        assert!((mu.total_mass() - 2.0 * PI * r).abs() <= m as f64 * sagitta);
    }

    #[test]
    fn specs_round_trip_and_repeat() {
        let spec: FixtureSpec = serde_json::from_str(r#"{"kind":"tent_graph","slope":3,"teeth":2,"samples":41}"#).unwrap();
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let back: FixtureSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        assert_eq!(random_values(5, 9), random_values(5, 9));
        assert_ne!(random_values(5, 9), random_values(5, 10));
    }
}
