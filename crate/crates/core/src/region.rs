//! Regions of the unit torus `[0,1)^s` with their measures and boundary
//! shells.
//!
//! Balls and axis boxes carry exact analytic measures and exact shell
//! measures (Steiner formula for fattened boxes, radial differences for
//! balls). Arbitrary predicates fall back to seeded Monte Carlo for both. All
//! membership tests treat `[0,1)^s` as a plain cube: boxes do not wrap around
//! the torus.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};

/// Which side of the boundary a shell lives on: points of the complement
/// within `eps` of the region (outer), or points of the region within `eps`
/// of the complement (inner).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Outer,
    Inner,
}

/// How a region's measure was obtained; recorded so reports can cite it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureSource {
    Analytic,
    MonteCarlo { samples: u64, seed: u64 },
}

/// Measure specification for predicate regions.
#[derive(Debug, Clone, Copy)]
pub enum MeasureSpec {
    Analytic(f64),
    MonteCarlo { samples: u64, seed: u64 },
}

/// Shared membership test for predicate-defined regions.
type MembershipFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

#[derive(Clone)]
enum Body {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Predicate(MembershipFn),
}

/// Volume of the unit `s`-ball.
pub fn unit_ball_volume(s: usize) -> f64 {
    match s {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(s - 2) * std::f64::consts::TAU / s as f64,
    }
}

fn ball_volume(s: usize, r: f64) -> f64 {
    unit_ball_volume(s) * r.powi(s as i32)
}

/// A measurable region of the unit torus.
#[derive(Clone)]
pub struct RegionSpec {
    dim: usize,
    body: Body,
    measure: f64,
    source: MeasureSource,
    smooth: bool,
    mc_samples: u64,
    mc_seed: u64,
}

const DEFAULT_SHELL_SAMPLES: u64 = 200_000;
const SHELL_DIRECTIONS: usize = 64;

impl RegionSpec {
    /// Euclidean ball, required to lie inside the unit cube so that the
    /// no-wrap membership test agrees with the torus picture.
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let dim = center.len();
        if dim == 0 {
            return Err(domain("ball needs a positive dimension"));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(domain("ball radius must be positive"));
        }
        for &c in &center {
            if c - radius < 0.0 || c + radius > 1.0 {
                return Err(domain(format!(
                    "ball (center {c}, radius {radius}) leaves the unit cube"
                )));
            }
        }
        let measure = ball_volume(dim, radius);
        Ok(RegionSpec {
            dim,
            body: Body::Ball { center, radius },
            measure,
            source: MeasureSource::Analytic,
            smooth: true,
            mc_samples: DEFAULT_SHELL_SAMPLES,
            mc_seed: 0,
        })
    }

    /// Half-open axis box `prod [lo_j, hi_j)` inside the unit cube.
    pub fn box_region(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(domain("box needs matching nonempty bounds"));
        }
        for (&a, &b) in lo.iter().zip(&hi) {
            if !(0.0 <= a && a < b && b <= 1.0) {
                return Err(domain(format!("box edge [{a}, {b}) is not inside [0, 1]")));
            }
        }
        let measure = lo.iter().zip(&hi).map(|(&a, &b)| b - a).product();
        Ok(RegionSpec {
            dim: lo.len(),
            body: Body::Box { lo, hi },
            measure,
            source: MeasureSource::Analytic,
            smooth: false,
            mc_samples: DEFAULT_SHELL_SAMPLES,
            mc_seed: 0,
        })
    }

    /// Region given by an arbitrary membership predicate. `smooth` records
    /// whether the boundary is smooth enough for linear shell bounds; it only
    /// affects reporting. With a Monte Carlo measure spec the measure is
    /// estimated at construction and the sampling parameters are reused for
    /// shell estimates.
    pub fn predicate(
        dim: usize,
        f: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
        smooth: bool,
        measure: MeasureSpec,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(domain("region needs a positive dimension"));
        }
        let body = Body::Predicate(Arc::new(f));
        let (measure, source, samples, seed) = match measure {
            MeasureSpec::Analytic(v) => {
                if !(0.0..=1.0).contains(&v) {
                    return Err(domain(format!("region measure {v} outside [0, 1]")));
                }
                (v, MeasureSource::Analytic, DEFAULT_SHELL_SAMPLES, 0)
            }
            MeasureSpec::MonteCarlo { samples, seed } => {
                if samples == 0 {
                    return Err(domain("Monte Carlo measure needs samples > 0"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut x = vec![0.0f64; dim];
                let mut hits = 0u64;
                for _ in 0..samples {
                    for c in x.iter_mut() {
                        *c = rng.gen::<f64>();
                    }
                    if match &body {
                        Body::Predicate(f) => f(&x),
                        _ => unreachable!(),
                    } {
                        hits += 1;
                    }
                }
                (
                    hits as f64 / samples as f64,
                    MeasureSource::MonteCarlo { samples, seed },
                    samples,
                    seed,
                )
            }
        };
        Ok(RegionSpec {
            dim,
            body,
            measure,
            source,
            smooth,
            mc_samples: samples,
            mc_seed: seed,
        })
    }

    /// The cylinder `self x [0, 1)`: one more coordinate, same measure.
    pub fn extrude(&self) -> RegionSpec {
        let inner = self.clone();
        let dim = self.dim + 1;
        RegionSpec {
            dim,
            body: Body::Predicate(Arc::new(move |x: &[f64]| inner.contains(&x[..inner.dim]))),
            measure: self.measure,
            source: self.source,
            smooth: self.smooth,
            mc_samples: self.mc_samples,
            mc_seed: self.mc_seed,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn measure_source(&self) -> MeasureSource {
        self.source
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        assert_eq!(x.len(), self.dim);
        match &self.body {
            Body::Ball { center, radius } => {
                let d2: f64 = x
                    .iter()
                    .zip(center)
                    .map(|(&a, &c)| (a - c) * (a - c))
                    .sum();
                d2 <= radius * radius
            }
            Body::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&v, (&a, &b))| a <= v && v < b),
            Body::Predicate(f) => f(x),
        }
    }

    /// Measure of the boundary shell at distance `eps`. Exact for balls and
    /// boxes (Steiner formula; valid while the fattened body stays embedded
    /// in the torus), Monte Carlo with a fixed set of probe directions for
    /// predicates.
    pub fn shell_measure(&self, eps: f64, side: Side) -> Result<f64> {
        if !eps.is_finite() || eps <= 0.0 {
            return Err(domain("shell width must be positive"));
        }
        match &self.body {
            Body::Ball { radius, .. } => {
                let s = self.dim;
                Ok(match side {
                    Side::Outer => ball_volume(s, radius + eps) - ball_volume(s, *radius),
                    Side::Inner => {
                        ball_volume(s, *radius) - ball_volume(s, (radius - eps).max(0.0))
                    }
                })
            }
            Body::Box { lo, hi } => {
                let sides: Vec<f64> = lo.iter().zip(hi).map(|(&a, &b)| b - a).collect();
                Ok(match side {
                    Side::Outer => {
                        // Steiner: vol(box + eps*ball) = sum over axis subsets S of
                        // eps^|S| * V_|S| * prod of the remaining side lengths.
                        let s = sides.len();
                        let mut total = 0.0;
                        for mask in 1u32..(1 << s) {
                            let k = mask.count_ones() as usize;
                            let mut prod = 1.0;
                            for (j, &len) in sides.iter().enumerate() {
                                if mask & (1 << j) == 0 {
                                    prod *= len;
                                }
                            }
                            total += eps.powi(k as i32) * unit_ball_volume(k) * prod;
                        }
                        total
                    }
                    Side::Inner => {
                        let vol: f64 = sides.iter().product();
                        let shrunk: f64 = sides.iter().map(|&l| (l - 2.0 * eps).max(0.0)).product();
                        vol - shrunk
                    }
                })
            }
            Body::Predicate(_) => Ok(self.shell_measure_mc(eps, side)),
        }
    }

    fn shell_measure_mc(&self, eps: f64, side: Side) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.mc_seed.wrapping_add(0x7e11));
        let dirs = sample_directions(self.dim, SHELL_DIRECTIONS, &mut rng);
        let mut x = vec![0.0f64; self.dim];
        let mut probe = vec![0.0f64; self.dim];
        let mut hits = 0u64;
        for _ in 0..self.mc_samples {
            for c in x.iter_mut() {
                *c = rng.gen::<f64>();
            }
            let inside = self.contains(&x);
            let candidate = match side {
                Side::Outer => !inside,
                Side::Inner => inside,
            };
            if !candidate {
                continue;
            }
            // Near the boundary iff some probe at distance eps lands on the
            // other side. Probes leaving the cube count as "outside".
            'dirs: for d in &dirs {
                let mut in_cube = true;
                for j in 0..self.dim {
                    probe[j] = x[j] + eps * d[j];
                    if !(0.0..1.0).contains(&probe[j]) {
                        in_cube = false;
                    }
                }
                let probe_inside = in_cube && self.contains(&probe);
                let crossed = match side {
                    Side::Outer => probe_inside,
                    Side::Inner => !probe_inside,
                };
                if crossed {
                    hits += 1;
                    break 'dirs;
                }
            }
        }
        hits as f64 / self.mc_samples as f64
    }
}

/// Unit vectors drawn by rejection from the cube; used as shell probes.
fn sample_directions(dim: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(count);
    while dirs.len() < count {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let norm2: f64 = v.iter().map(|&c| c * c).sum();
        if !(1e-6..=1.0).contains(&norm2) {
            continue;
        }
        let norm = norm2.sqrt();
        dirs.push(v.into_iter().map(|c| c / norm).collect());
    }
    dirs
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-12);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ball_measure_and_shells() {
        let b = RegionSpec::ball(vec![0.5, 0.5], 0.25).unwrap();
        assert!((b.measure() - PI * 0.0625).abs() < 1e-12);
        assert_eq!(b.measure_source(), MeasureSource::Analytic);
        let eps = 0.05;
        let outer = b.shell_measure(eps, Side::Outer).unwrap();
        assert!((outer - PI * ((0.3f64).powi(2) - 0.0625)).abs() < 1e-12);
        let inner = b.shell_measure(eps, Side::Inner).unwrap();
        assert!((inner - PI * (0.0625 - (0.2f64).powi(2))).abs() < 1e-12);
        assert!(b.contains(&[0.5, 0.6]));
        assert!(!b.contains(&[0.5, 0.80001]));
        assert!(RegionSpec::ball(vec![0.1], 0.2).is_err());
        assert!(RegionSpec::ball(vec![0.5], 0.0).is_err());
    }

    #[test]
    fn box_measure_and_shells() {
        let r = RegionSpec::box_region(vec![0.2, 0.3], vec![0.6, 0.8]).unwrap();
        assert!((r.measure() - 0.2).abs() < 1e-12);
        assert!(r.contains(&[0.2, 0.3]));
        assert!(!r.contains(&[0.6, 0.5]));
        let eps = 0.01;
        // Perimeter strip plus the corner disc.
        let outer = r.shell_measure(eps, Side::Outer).unwrap();
        assert!((outer - (2.0 * eps * (0.4 + 0.5) + PI * eps * eps)).abs() < 1e-12);
        let inner = r.shell_measure(eps, Side::Inner).unwrap();
        assert!((inner - (0.2 - 0.38 * 0.48)).abs() < 1e-12);
        assert!(RegionSpec::box_region(vec![0.4], vec![0.4]).is_err());
        assert!(r.shell_measure(0.0, Side::Outer).is_err());
    }

    #[test]
    fn one_dimensional_box_shell_is_linear() {
        let r = RegionSpec::box_region(vec![0.25], vec![0.75]).unwrap();
        for eps in [0.5f64.powi(3), 0.5f64.powi(6), 0.5f64.powi(10)] {
            let outer = r.shell_measure(eps, Side::Outer).unwrap();
            assert!((outer - 2.0 * eps).abs() < 1e-15);
        }
    }

    #[test]
    fn predicate_measure_monte_carlo() {
        let r = RegionSpec::predicate(
            2,
            |x| {
                let dx = x[0] - 0.5;
                let dy = x[1] - 0.5;
                dx * dx + dy * dy <= 0.0625
            },
            true,
            MeasureSpec::MonteCarlo {
                samples: 200_000,
                seed: 7,
            },
        )
        .unwrap();
        assert!((r.measure() - PI * 0.0625).abs() < 5e-3);
        assert!(matches!(
            r.measure_source(),
            MeasureSource::MonteCarlo { samples: 200_000, seed: 7 }
        ));
        // The MC shell estimate should be in the ballpark of the exact one.
        let exact = RegionSpec::ball(vec![0.5, 0.5], 0.25).unwrap();
        let eps = 0.05;
        let mc = r.shell_measure(eps, Side::Outer).unwrap();
        let truth = exact.shell_measure(eps, Side::Outer).unwrap();
        assert!((mc - truth).abs() < 0.25 * truth + 5e-3);
    }

    #[test]
    fn extrusion_keeps_measure_and_membership() {
        let b = RegionSpec::ball(vec![0.5, 0.5], 0.25).unwrap();
        let cyl = b.extrude();
        assert_eq!(cyl.dim(), 3);
        assert_eq!(cyl.measure(), b.measure());
        assert!(cyl.contains(&[0.5, 0.6, 0.99]));
        assert!(!cyl.contains(&[0.5, 0.9, 0.0]));
    }
}
